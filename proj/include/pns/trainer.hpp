#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "pns/datasets.hpp"
#include "pns/gcn.hpp"
#include "pns/instance.hpp"

namespace pns {

struct TrainConfig {
    double learning_rate = 0.001;
    int epochs = 2000;
    double dropout = 0.0;
    double weight_decay = 0.0;
    double train_fraction = 0.8;
    std::uint64_t seed = 0;
    int log_every = 10;  // accuracy sampling interval for the curve

    /// Throws std::invalid_argument when a field is out of range.
    void validate() const;
};

struct EpochStats {
    int epoch = 0;
    double loss = 0.0;
    double train_accuracy = 0.0;
    double test_accuracy = 0.0;
};

struct TrainResult {
    GcnParams params;
    double train_accuracy = 0.0;
    double test_accuracy = 0.0;
    std::vector<double> losses;      // one per epoch, before the update
    std::vector<EpochStats> curve;   // every `log_every` epochs plus the last
    std::vector<std::size_t> train_index;
    std::vector<std::size_t> test_index;
};

/// Divergence (a non-finite loss) aborts training.
class TrainingDiverged : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Full-batch cross-entropy training on the labelled nodes of one graph,
/// with a seeded per-node train/test split.
TrainResult train(const NodeDataset& dataset, const TrainConfig& config);
/// Full-batch training over a per-graph train/test split.
TrainResult train(const GraphDataset& dataset, const TrainConfig& config);

/// Fraction of instances whose model argmax equals their task label.
double evaluate_accuracy(const GcnParams& params, std::span<const Instance> instances);

/// Seeded split of [0, n) into train and test index sets.
void split_indices(std::size_t n, double train_fraction, std::uint64_t seed, std::vector<std::size_t>& train,
                   std::vector<std::size_t>& test);

}  // namespace pns
