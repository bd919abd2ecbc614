#include <chrono>
#include <cstdio>

#include "brassica/optimizer.hpp"
#include "brassica/train.hpp"
#include "support/synth.hpp"

using namespace brassica;

int main() {
    Rng rng(1);
    NetworkF net = build_brassica_net(rng);
    std::printf("params: %lld\n", (long long)net.parameter_count());

    Tensor x = uniform<float>(Shape4(64, 3, 128, 128), 0.0f, 1.0f, rng);
    std::vector<int> labels(64);
    for (int i = 0; i < 64; ++i) labels[i] = i % 10;
    Tensor targets = one_hot<float>(labels, 10);

    auto params = net.params();
    AdamState adam = AdamState::init(params);
    TrainConfig cfg;

    net.set_train(true);
    auto t0 = std::chrono::steady_clock::now();
    for (int it = 0; it < 3; ++it) {
        Tensor probs = net.forward(x, &rng);
        net.backward(targets);
        adam_step(params, adam, cfg);
    }
    auto t1 = std::chrono::steady_clock::now();
    double per_step = std::chrono::duration<double>(t1 - t0).count() / 3.0;
    std::printf("fwd+bwd+adam per batch-64 step: %.3f s  (epoch of 300 imgs ~ %.2f s)\n",
                per_step, per_step * 300.0 / 64.0);

    auto t2 = std::chrono::steady_clock::now();
    for (int it = 0; it < 20; ++it) adam_step(params, adam, cfg);
    auto t3 = std::chrono::steady_clock::now();
    std::printf("adam step alone: %.4f s\n", std::chrono::duration<double>(t3 - t2).count() / 20.0);

    // Per-epoch wall for different batch sizes over a 300-image in-memory set.
    LabeledData data;
    Rng drng(7);
    for (int i = 0; i < 300; ++i) {
        data.images.push_back(uniform<float>(Shape4(1, 3, 128, 128), 0.0f, 1.0f, drng));
        data.labels.push_back(i % 10);
    }
    LabeledData val;
    for (int i = 0; i < 20; ++i) {
        val.images.push_back(data.images[size_t(i)]);
        val.labels.push_back(data.labels[size_t(i)]);
    }
    for (int64_t b : {8, 16, 32, 64}) {
        Rng r2(1);
        NetworkF n2 = build_brassica_net(r2);
        TrainConfig c2;
        c2.batch_size = b;
        c2.epochs = 2;
        TrainLog log = train(n2, data, val, c2);
        std::printf("batch %2lld: train_seconds/epoch = %.3f %.3f\n", (long long)b,
                    log.epochs[0].train_seconds, log.epochs[1].train_seconds);
    }
    return 0;
}
