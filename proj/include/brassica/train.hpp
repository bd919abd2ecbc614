#pragma once

#include <functional>
#include <string>
#include <vector>

#include "brassica/network.hpp"
#include "brassica/optimizer.hpp"
#include "brassica/tensor.hpp"

namespace brassica {

// In-memory dataset split: one (1, c, h, w) tensor per image.
struct LabeledData {
    std::vector<Tensor> images;
    std::vector<int> labels;

    size_t size() const { return images.size(); }
};

struct EpochRecord {
    int64_t epoch = 0;  // 1-based
    double train_loss = 0.0;
    double train_acc = 0.0;
    double val_loss = 0.0;
    double val_acc = 0.0;
    double seconds = 0.0;        // wall clock for the whole epoch
    double train_seconds = 0.0;  // training phase only (validation excluded)
};

struct TrainLog {
    std::vector<EpochRecord> epochs;

    std::string to_csv(bool zero_seconds = false) const;
};

enum class TrainControl { proceed, stop };

// Invoked after each epoch's validation; may stop training early.
using EpochCallback = std::function<TrainControl(NetworkF&, const EpochRecord&)>;

struct EvalResult {
    double loss = 0.0;
    double accuracy = 0.0;
    std::vector<int> predictions;
};

// Eval-mode loss/accuracy over a split, batched deterministically.
EvalResult evaluate(NetworkF& net, const LabeledData& data, int64_t batch_size);

// The epoch loop: seeded shuffle, minibatches of cfg.batch_size (final short
// batch included), forward/backward/adam per batch, then a full validation in
// eval mode. Identical (seed, config, data) produce identical logs.
TrainLog train(NetworkF& net, const LabeledData& train_data, const LabeledData& val_data,
               const TrainConfig& cfg, const EpochCallback& callback = {});

struct SweepEntry {
    std::string setting;
    double seconds_per_epoch = 0.0;
    double test_accuracy = 0.0;
};

// Batch-size / epoch-budget sweep. Each setting trains a fresh network from
// the same seed; seconds_per_epoch averages the training phase only.
std::vector<SweepEntry> sweep(const std::function<NetworkF()>& make_net,
                              const LabeledData& train_data, const LabeledData& val_data,
                              const LabeledData& test_data, const TrainConfig& base,
                              const std::vector<int64_t>& batch_sizes,
                              const std::vector<int64_t>& epoch_budgets);

std::string sweep_to_csv(const std::vector<SweepEntry>& entries);

}  // namespace brassica
