#include "brassica/train.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <limits>
#include <numeric>

namespace brassica {

namespace {

double now_seconds() {
    using clock = std::chrono::steady_clock;
    return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

// Gathers dataset entries into one (batch, c, h, w) tensor.
Tensor assemble_batch(const LabeledData& data, const std::vector<int64_t>& order, int64_t begin,
                      int64_t end) {
    const Shape4& one = data.images[size_t(order[size_t(begin)])].shape();
    Tensor batch(Shape4(end - begin, one.c, one.h, one.w));
    const int64_t stride = one.elements();
    for (int64_t i = begin; i < end; ++i) {
        const Tensor& img = data.images[size_t(order[size_t(i)])];
        if (img.shape() != one) throw ShapeError("assemble_batch: mixed image shapes");
        std::copy(img.data(), img.data() + stride, batch.data() + (i - begin) * stride);
    }
    return batch;
}

std::vector<int> gather_labels(const LabeledData& data, const std::vector<int64_t>& order,
                               int64_t begin, int64_t end) {
    std::vector<int> out(size_t(end - begin));
    for (int64_t i = begin; i < end; ++i) out[size_t(i - begin)] = data.labels[size_t(order[size_t(i)])];
    return out;
}

}  // namespace

EvalResult evaluate(NetworkF& net, const LabeledData& data, int64_t batch_size) {
    if (data.size() == 0) throw ConfigError("evaluate: empty split");
    const bool was_training = net.train_mode();
    net.set_train(false);
    const int64_t n = int64_t(data.size());
    const int64_t k = net.num_classes();
    std::vector<int64_t> order(static_cast<size_t>(n));
    std::iota(order.begin(), order.end(), 0);

    EvalResult res;
    res.predictions.resize(static_cast<size_t>(n));
    double loss_sum = 0.0;
    int64_t correct = 0;
    for (int64_t begin = 0; begin < n; begin += batch_size) {
        const int64_t end = std::min(n, begin + batch_size);
        Tensor x = assemble_batch(data, order, begin, end);
        const std::vector<int> labels = gather_labels(data, order, begin, end);
        Tensor probs = net.forward(x);
        Tensor targets = one_hot<float>(labels, k);
        loss_sum += cross_entropy(probs, targets) * double(end - begin);
        const std::vector<int> pred = argmax_channel(probs);
        for (size_t i = 0; i < pred.size(); ++i) {
            res.predictions[size_t(begin) + i] = pred[i];
            if (pred[i] == labels[i]) ++correct;
        }
    }
    res.loss = loss_sum / double(n);
    res.accuracy = double(correct) / double(n);
    net.set_train(was_training);
    return res;
}

TrainLog train(NetworkF& net, const LabeledData& train_data, const LabeledData& val_data,
               const TrainConfig& cfg, const EpochCallback& callback) {
    cfg.validate();
    if (train_data.size() == 0) throw ConfigError("train: empty training split");
    if (val_data.size() == 0) throw ConfigError("train: empty validation split");
    if (train_data.size() != train_data.labels.size()) {
        throw ArgumentError("train: images/labels length mismatch");
    }

    const int64_t n = int64_t(train_data.size());
    const int64_t k = net.num_classes();
    Rng rng(cfg.seed);

    auto params = net.params();
    AdamState adam = AdamState::init(params);

    std::vector<int64_t> order(static_cast<size_t>(n));
    std::iota(order.begin(), order.end(), 0);

    TrainLog log;
    double best_val_loss = std::numeric_limits<double>::infinity();
    int64_t epochs_since_improvement = 0;

    for (int64_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
        const double epoch_start = now_seconds();
        if (cfg.shuffle_each_epoch) rng.shuffle(order);

        net.set_train(true);
        double loss_sum = 0.0;
        int64_t correct = 0;
        for (int64_t begin = 0; begin < n; begin += cfg.batch_size) {
            const int64_t end = std::min(n, begin + cfg.batch_size);
            Tensor x = assemble_batch(train_data, order, begin, end);
            const std::vector<int> labels = gather_labels(train_data, order, begin, end);
            Tensor targets = one_hot<float>(labels, k);

            Tensor probs = net.forward(x, &rng);
            double batch_loss;
            try {
                batch_loss = cross_entropy(probs, targets);
            } catch (const NumericError& e) {
                throw NumericError("train: " + std::string(e.what()) + " at epoch " +
                                   std::to_string(epoch) + ", batch offset " +
                                   std::to_string(begin));
            }
            loss_sum += batch_loss * double(end - begin);
            const std::vector<int> pred = argmax_channel(probs);
            for (size_t i = 0; i < pred.size(); ++i) {
                if (pred[i] == labels[i]) ++correct;
            }

            net.backward(targets);
            adam_step(params, adam, cfg);
        }
        const double train_end = now_seconds();

        const EvalResult val = evaluate(net, val_data, cfg.batch_size);

        EpochRecord rec;
        rec.epoch = epoch;
        rec.train_loss = loss_sum / double(n);
        rec.train_acc = double(correct) / double(n);
        rec.val_loss = val.loss;
        rec.val_acc = val.accuracy;
        rec.train_seconds = train_end - epoch_start;
        rec.seconds = now_seconds() - epoch_start;
        log.epochs.push_back(rec);

        if (callback && callback(net, rec) == TrainControl::stop) break;

        if (cfg.plateau_stop) {
            if (rec.val_loss < best_val_loss - 1e-4) {
                best_val_loss = rec.val_loss;
                epochs_since_improvement = 0;
            } else if (++epochs_since_improvement >= 10) {
                break;
            }
        }
    }
    net.set_train(false);
    return log;
}

std::string TrainLog::to_csv(bool zero_seconds) const {
    std::string out = "epoch,train_loss,train_acc,val_loss,val_acc,seconds\n";
    char line[256];
    for (const auto& r : epochs) {
        std::snprintf(line, sizeof(line), "%lld,%.6f,%.6f,%.6f,%.6f,%.3f\n",
                      static_cast<long long>(r.epoch), r.train_loss, r.train_acc, r.val_loss,
                      r.val_acc, zero_seconds ? 0.0 : r.seconds);
        out += line;
    }
    return out;
}

std::vector<SweepEntry> sweep(const std::function<NetworkF()>& make_net,
                              const LabeledData& train_data, const LabeledData& val_data,
                              const LabeledData& test_data, const TrainConfig& base,
                              const std::vector<int64_t>& batch_sizes,
                              const std::vector<int64_t>& epoch_budgets) {
    if (batch_sizes.empty() && epoch_budgets.empty()) {
        throw ConfigError("sweep: need at least one batch size or epoch budget");
    }
    std::vector<SweepEntry> out;
    auto run_one = [&](const std::string& setting, const TrainConfig& cfg) {
        NetworkF net = make_net();
        TrainLog log = train(net, train_data, val_data, cfg);
        double train_time = 0.0;
        for (const auto& r : log.epochs) train_time += r.train_seconds;
        SweepEntry e;
        e.setting = setting;
        e.seconds_per_epoch = train_time / double(log.epochs.size());
        e.test_accuracy = evaluate(net, test_data, cfg.batch_size).accuracy;
        out.push_back(e);
    };
    for (int64_t b : batch_sizes) {
        TrainConfig cfg = base;
        cfg.batch_size = b;
        run_one("batch=" + std::to_string(b), cfg);
    }
    for (int64_t e : epoch_budgets) {
        TrainConfig cfg = base;
        cfg.epochs = e;
        run_one("epochs=" + std::to_string(e), cfg);
    }
    return out;
}

std::string sweep_to_csv(const std::vector<SweepEntry>& entries) {
    std::string out = "setting,seconds_per_epoch,test_accuracy\n";
    char line[160];
    for (const auto& e : entries) {
        std::snprintf(line, sizeof(line), "%s,%.4f,%.6f\n", e.setting.c_str(),
                      e.seconds_per_epoch, e.test_accuracy);
        out += line;
    }
    return out;
}

}  // namespace brassica
