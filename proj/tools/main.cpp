#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "brassica/cli.hpp"

namespace {

struct CommonArgs {
    std::string config_path;
    bool dump_config = false;
    double lr = -1.0;
    long long batch_size = -1;
    long long epochs = -1;
    long long seed = -1;
    std::string out;
    std::string checkpoint;
};

void add_common(CLI::App* cmd, CommonArgs& a, bool with_epochs = true) {
    cmd->add_option("--config", a.config_path, "configuration file (key = value lines)");
    cmd->add_flag("--dump-config", a.dump_config, "print the effective config and exit");
    cmd->add_option("--lr", a.lr, "override learning_rate");
    cmd->add_option("--batch-size", a.batch_size, "override batch_size");
    if (with_epochs) cmd->add_option("--epochs", a.epochs, "override epochs");
    cmd->add_option("--seed", a.seed, "override seed");
    cmd->add_option("--out", a.out, "override output_dir");
    cmd->add_option("--checkpoint", a.checkpoint, "override checkpoint path");
}

brassica::Config effective_config(const CommonArgs& a) {
    brassica::Config c;
    if (!a.config_path.empty()) c = brassica::parse_config_file(a.config_path);
    if (a.lr >= 0) c.train.learning_rate = a.lr;
    if (a.batch_size >= 0) c.train.batch_size = a.batch_size;
    if (a.epochs >= 0) c.train.epochs = a.epochs;
    if (a.seed >= 0) c.train.seed = static_cast<uint64_t>(a.seed);
    if (!a.out.empty()) c.output_dir = a.out;
    if (!a.checkpoint.empty()) c.checkpoint = a.checkpoint;
    c.train.validate();
    return c;
}

std::vector<int64_t> parse_list(const std::string& csv) {
    std::vector<int64_t> out;
    size_t pos = 0;
    while (pos < csv.size()) {
        size_t comma = csv.find(',', pos);
        if (comma == std::string::npos) comma = csv.size();
        const std::string tok = csv.substr(pos, comma - pos);
        if (!tok.empty()) {
            try {
                out.push_back(std::stoll(tok));
            } catch (...) {
                throw brassica::ConfigError("bad list entry '" + tok + "'");
            }
        }
        pos = comma + 1;
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"brassica: from-scratch CNN trainer and evaluator for seed classification"};
    app.require_subcommand(1);

    CommonArgs train_args, eval_args, predict_args, sweep_args;
    std::string eval_split = "test";
    std::string predict_image;
    std::string sweep_batches, sweep_epochs;

    CLI::App* train_cmd = app.add_subcommand("train", "train the network on an image directory");
    add_common(train_cmd, train_args);

    CLI::App* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint on val or test split");
    add_common(eval_cmd, eval_args);
    eval_cmd->add_option("--split", eval_split, "val or test")->check(CLI::IsMember({"val", "test"}));

    CLI::App* predict_cmd = app.add_subcommand("predict", "classify one image");
    add_common(predict_cmd, predict_args);
    predict_cmd->add_option("image", predict_image, "image file (PPM or PNG)")->required();

    CLI::App* sweep_cmd = app.add_subcommand("sweep", "batch-size / epoch-budget sweep");
    add_common(sweep_cmd, sweep_args, /*with_epochs=*/false);
    sweep_cmd->add_option("--batches", sweep_batches, "comma-separated batch sizes");
    sweep_cmd->add_option("--epochs", sweep_epochs, "comma-separated epoch budgets");

    CLI11_PARSE(app, argc, argv);

    auto dispatch = [&](const CommonArgs& args, auto&& body) {
        return brassica::run_command([&]() -> int {
            brassica::Config c = effective_config(args);
            if (args.dump_config) {
                std::printf("%s", brassica::dump_config(c).c_str());
                return brassica::kExitOk;
            }
            return body(c);
        });
    };

    if (train_cmd->parsed()) {
        return dispatch(train_args, [](const brassica::Config& c) { return brassica::cmd_train(c); });
    }
    if (eval_cmd->parsed()) {
        return dispatch(eval_args, [&](const brassica::Config& c) {
            return brassica::cmd_eval(c, eval_split);
        });
    }
    if (predict_cmd->parsed()) {
        return dispatch(predict_args, [&](const brassica::Config& c) {
            return brassica::cmd_predict(c, predict_image);
        });
    }
    if (sweep_cmd->parsed()) {
        return dispatch(sweep_args, [&](const brassica::Config& c) {
            return brassica::cmd_sweep(c, parse_list(sweep_batches), parse_list(sweep_epochs));
        });
    }
    return brassica::kExitUsage;
}
