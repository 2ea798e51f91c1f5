#pragma once

// Minibatch training with AdamW, per-epoch history and best-validation
// model retention.

#include "gafvit/data.hpp"
#include "gafvit/model.hpp"
#include "gafvit/optim.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <vector>

namespace gafvit {

struct TrainConfig {
    std::size_t batch_size = 8;
    double learning_rate = 1e-5;
    std::size_t epochs = 50;
    double weight_decay = 0.01;
    double train_fraction = 0.8;
    double val_fraction = 0.1;
    double test_fraction = 0.1;
    std::uint64_t seed = 0;

    void validate() const;
};

struct SplitIndices {
    std::vector<std::size_t> train, val, test;
};

// Seeded shuffle, then contiguous slices; val and test take floor(n * frac),
// train takes the rest.
SplitIndices split_dataset(std::size_t n, const TrainConfig& config);

struct EpochRecord {
    std::size_t epoch = 0; // 1-based
    double train_loss = 0.0;
    double train_acc = 0.0;
    double val_loss = 0.0;
    double val_acc = 0.0;
};

struct Evaluation {
    double loss = 0.0;
    double accuracy = 0.0;
    std::vector<std::size_t> predictions;
};

Evaluation evaluate(GafVitModel& model, const std::vector<data::Sample>& samples);

// Mean cross-entropy over a batch, gradients scaled by 1/B accumulated into
// the model's parameters. Returns the batch loss; `correct` counts argmax hits.
double accumulate_batch(GafVitModel& model, const std::vector<const data::Sample*>& batch, std::size_t* correct = nullptr);

struct FitResult {
    std::vector<EpochRecord> history;
    ParamStore best; // lowest validation loss; initial parameters when no epoch ran
    std::size_t best_epoch = 0;
    double best_val_loss = 0.0;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

// Leaves the model at its final parameters.
FitResult fit(GafVitModel& model, const std::vector<data::Sample>& train, const std::vector<data::Sample>& val,
              const TrainConfig& config, const EpochCallback& on_epoch = {});

void write_history_csv(const std::filesystem::path& path, const std::vector<EpochRecord>& history);

} // namespace gafvit
