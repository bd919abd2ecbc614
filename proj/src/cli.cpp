#include "brassica/cli.hpp"

#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "brassica/checkpoint.hpp"
#include "brassica/metrics.hpp"
#include "brassica/train.hpp"

namespace fs = std::filesystem;

namespace brassica {

namespace {

std::string trim(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& v) {
    try {
        size_t used = 0;
        double d = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (...) {
        throw ConfigError("config: bad numeric value for " + key + ": '" + v + "'");
    }
}

int64_t parse_int(const std::string& key, const std::string& v) {
    try {
        size_t used = 0;
        int64_t i = std::stoll(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return i;
    } catch (...) {
        throw ConfigError("config: bad integer value for " + key + ": '" + v + "'");
    }
}

uint64_t parse_u64(const std::string& key, const std::string& v) {
    try {
        size_t used = 0;
        uint64_t i = std::stoull(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return i;
    } catch (...) {
        throw ConfigError("config: bad unsigned value for " + key + ": '" + v + "'");
    }
}

bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw ConfigError("config: bad boolean value for " + key + ": '" + v + "'");
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write file: " + path);
    out << content;
    if (!out) throw IoError("failed writing file: " + path);
}

std::vector<std::string> class_names_or_default(const Config& config, int64_t k) {
    if (!config.data_root.empty() && fs::is_directory(config.data_root)) {
        DatasetManifest m = scan(config.data_root, ScanOptions{.verify_decode = false});
        if (int64_t(m.classes.size()) == k) return m.class_names();
    }
    if (k == 10) {
        return std::vector<std::string>(kBrassicaClassNames.begin(), kBrassicaClassNames.end());
    }
    std::vector<std::string> names;
    for (int64_t i = 0; i < k; ++i) names.push_back("class_" + std::to_string(i));
    return names;
}

}  // namespace

Config parse_config_text(const std::string& text) {
    Config c;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const size_t eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (key == "data_root") c.data_root = val;
        else if (key == "train_ratio") c.ratios.train = parse_double(key, val);
        else if (key == "val_ratio") c.ratios.val = parse_double(key, val);
        else if (key == "test_ratio") c.ratios.test = parse_double(key, val);
        else if (key == "split_seed") c.split_seed = parse_u64(key, val);
        else if (key == "learning_rate") c.train.learning_rate = parse_double(key, val);
        else if (key == "batch_size") c.train.batch_size = parse_int(key, val);
        else if (key == "epochs") c.train.epochs = parse_int(key, val);
        else if (key == "adam_beta1") c.train.adam_beta1 = parse_double(key, val);
        else if (key == "adam_beta2") c.train.adam_beta2 = parse_double(key, val);
        else if (key == "adam_eps") c.train.adam_eps = parse_double(key, val);
        else if (key == "seed") c.train.seed = parse_u64(key, val);
        else if (key == "shuffle_each_epoch") c.train.shuffle_each_epoch = parse_bool(key, val);
        else if (key == "plateau_stop") c.train.plateau_stop = parse_bool(key, val);
        else if (key == "checkpoint") c.checkpoint = val;
        else if (key == "output_dir") c.output_dir = val;
        else if (key == "strict_deterministic") c.strict_deterministic = parse_bool(key, val);
        else throw ConfigError("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    }
    c.train.validate();
    return c;
}

Config parse_config_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config_text(text.str());
}

std::string dump_config(const Config& c) {
    char buf[4096];
    std::snprintf(buf, sizeof(buf),
                  "data_root = %s\n"
                  "train_ratio = %.17g\n"
                  "val_ratio = %.17g\n"
                  "test_ratio = %.17g\n"
                  "split_seed = %" PRIu64 "\n"
                  "learning_rate = %.17g\n"
                  "batch_size = %lld\n"
                  "epochs = %lld\n"
                  "adam_beta1 = %.17g\n"
                  "adam_beta2 = %.17g\n"
                  "adam_eps = %.17g\n"
                  "seed = %" PRIu64 "\n"
                  "shuffle_each_epoch = %s\n"
                  "plateau_stop = %s\n"
                  "checkpoint = %s\n"
                  "output_dir = %s\n"
                  "strict_deterministic = %s\n",
                  c.data_root.c_str(), c.ratios.train, c.ratios.val, c.ratios.test, c.split_seed,
                  c.train.learning_rate, static_cast<long long>(c.train.batch_size),
                  static_cast<long long>(c.train.epochs), c.train.adam_beta1, c.train.adam_beta2,
                  c.train.adam_eps, c.train.seed, c.train.shuffle_each_epoch ? "true" : "false",
                  c.train.plateau_stop ? "true" : "false", c.checkpoint.c_str(),
                  c.output_dir.c_str(), c.strict_deterministic ? "true" : "false");
    return buf;
}

int cmd_train(const Config& config) {
    if (config.data_root.empty()) throw ConfigError("train: data_root is required");
    fs::create_directories(config.output_dir);

    DatasetManifest manifest = scan(config.data_root);
    Split split = split_dataset(manifest, config.ratios, config.split_seed);
    write_split_manifest(split, (fs::path(config.output_dir) / "split.csv").string());

    std::printf("dataset: %lld images, %zu classes, %lld warnings\n",
                static_cast<long long>(manifest.total()), manifest.classes.size(),
                static_cast<long long>(manifest.warnings));
    std::printf("split: train=%zu val=%zu test=%zu\n", split.train.size(), split.val.size(),
                split.test.size());

    LabeledData train_data = load_split(split.train);
    LabeledData val_data = load_split(split.val);

    Rng init_rng(config.train.seed);
    NetworkF net = build_brassica_net(init_rng);

    const std::string best_path = (fs::path(config.output_dir) / "best.ckpt").string();
    const std::string final_path = (fs::path(config.output_dir) / "final.ckpt").string();
    const std::string log_path = (fs::path(config.output_dir) / "train_log.csv").string();

    TrainLog partial;
    double best_acc = -1.0;
    auto callback = [&](NetworkF& n, const EpochRecord& rec) {
        partial.epochs.push_back(rec);
        std::printf("epoch %lld/%lld  train_loss=%.6f train_acc=%.4f  "
                    "val_loss=%.6f val_acc=%.4f  (%.1fs)\n",
                    static_cast<long long>(rec.epoch),
                    static_cast<long long>(config.train.epochs), rec.train_loss, rec.train_acc,
                    rec.val_loss, rec.val_acc, rec.seconds);
        std::fflush(stdout);
        if (rec.val_acc > best_acc) {  // ties keep the earliest epoch
            best_acc = rec.val_acc;
            save_checkpoint(n, best_path);
        }
        return TrainControl::proceed;
    };

    try {
        train(net, train_data, val_data, config.train, callback);
    } catch (const NumericError&) {
        write_file(log_path, partial.to_csv(config.strict_deterministic));
        throw;
    }

    write_file(log_path, partial.to_csv(config.strict_deterministic));
    save_checkpoint(net, final_path);
    std::printf("wrote %s\n", log_path.c_str());
    return kExitOk;
}

int cmd_eval(const Config& config, const std::string& split_name) {
    if (split_name != "val" && split_name != "test") {
        throw ConfigError("eval: split must be 'val' or 'test', got '" + split_name + "'");
    }
    if (config.checkpoint.empty()) throw ConfigError("eval: checkpoint is required");
    if (config.data_root.empty()) throw ConfigError("eval: data_root is required");

    NetworkF net = load_checkpoint(config.checkpoint);
    const std::string expected = spec_digest(brassica_layer_specs());
    if (net.digest() != expected) {
        throw CheckpointError(CheckpointError::Kind::SpecMismatch,
                              "checkpoint architecture digest " + net.digest() +
                                  " does not match the expected " + expected);
    }

    DatasetManifest manifest = scan(config.data_root);
    Split split = split_dataset(manifest, config.ratios, config.split_seed);
    const auto& entries = split_name == "val" ? split.val : split.test;
    LabeledData data = load_split(entries);

    EvalResult res = evaluate(net, data, config.train.batch_size);
    ConfusionMatrix cm =
        confusion(data.labels, res.predictions, int(manifest.classes.size()));
    MetricsReport rep = report(cm);
    const std::vector<std::string> names = manifest.class_names();

    fs::create_directories(config.output_dir);
    write_file((fs::path(config.output_dir) / "confusion_matrix.csv").string(),
               render_confusion_csv(cm, names));
    write_file((fs::path(config.output_dir) / "report.txt").string(),
               render_report_text(rep, names));
    write_file((fs::path(config.output_dir) / "report.csv").string(),
               render_report_csv(rep, names));

    std::printf("%s accuracy %.6f over %lld images\n", split_name.c_str(), res.accuracy,
                static_cast<long long>(rep.total_support));
    return kExitOk;
}

int cmd_predict(const Config& config, const std::string& image_path) {
    if (config.checkpoint.empty()) throw ConfigError("predict: checkpoint is required");
    NetworkF net = load_checkpoint(config.checkpoint);

    const Shape4 in = net.input_shape();
    Tensor x = resize_bilinear(decode_image(image_path), in.h, in.w);
    Tensor probs = net.forward(x);
    const std::vector<int> pred = argmax_channel(probs);
    const int64_t k = probs.shape().c;
    const std::vector<std::string> names = class_names_or_default(config, k);

    std::printf("prediction: %s\n", names[size_t(pred[0])].c_str());
    for (int64_t c = 0; c < k; ++c) {
        std::printf("%s %.4f\n", names[size_t(c)].c_str(), double(probs[c]));
    }
    return kExitOk;
}

int cmd_sweep(const Config& config, const std::vector<int64_t>& batch_sizes,
              const std::vector<int64_t>& epoch_budgets) {
    if (batch_sizes.empty() && epoch_budgets.empty()) {
        throw ConfigError("sweep: provide at least one batch size or epoch budget");
    }
    if (config.data_root.empty()) throw ConfigError("sweep: data_root is required");
    fs::create_directories(config.output_dir);

    DatasetManifest manifest = scan(config.data_root);
    Split split = split_dataset(manifest, config.ratios, config.split_seed);
    LabeledData train_data = load_split(split.train);
    LabeledData val_data = load_split(split.val);
    LabeledData test_data = load_split(split.test);

    auto make_net = [&config]() {
        Rng rng(config.train.seed);
        return build_brassica_net(rng);
    };
    std::vector<SweepEntry> rows =
        sweep(make_net, train_data, val_data, test_data, config.train, batch_sizes, epoch_budgets);

    const std::string csv = sweep_to_csv(rows);
    write_file((fs::path(config.output_dir) / "sweep.csv").string(), csv);
    std::printf("%s", csv.c_str());
    return kExitOk;
}

int run_command(const std::function<int()>& body) {
    try {
        return body();
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitUsage;
    } catch (const ArgumentError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitUsage;
    } catch (const ShapeError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitUsage;
    } catch (const DataError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitData;
    } catch (const NumericError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitNumeric;
    } catch (const IoError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitIo;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitIo;
    }
}

}  // namespace brassica
