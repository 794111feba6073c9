#include "pns/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "pns/optim.hpp"

namespace pns {

namespace {

std::span<double> flat(Matrix& m) { return {m.data(), static_cast<std::size_t>(m.size())}; }
std::span<const double> flat(const Matrix& m) { return {m.data(), static_cast<std::size_t>(m.size())}; }
std::span<double> flat(Vector& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }
std::span<const double> flat(const Vector& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }

class ParamOptimizer {
public:
    ParamOptimizer(const GcnParams& p, const TrainConfig& c) {
        for (const auto& w : p.layers) blocks_.emplace_back(static_cast<std::size_t>(w.size()), c.learning_rate, c.weight_decay);
        for (const auto& b : p.biases) blocks_.emplace_back(static_cast<std::size_t>(b.size()), c.learning_rate, c.weight_decay);
        blocks_.emplace_back(static_cast<std::size_t>(p.readout_weight.size()), c.learning_rate, c.weight_decay);
        blocks_.emplace_back(static_cast<std::size_t>(p.readout_bias.size()), c.learning_rate, c.weight_decay);
    }

    void step(GcnParams& p, const ParamGradients& g) {
        std::size_t i = 0;
        for (std::size_t k = 0; k < p.layers.size(); ++k) blocks_[i++].step(flat(p.layers[k]), flat(g.layers[k]));
        for (std::size_t k = 0; k < p.biases.size(); ++k) blocks_[i++].step(flat(p.biases[k]), flat(g.biases[k]));
        blocks_[i++].step(flat(p.readout_weight), flat(g.readout_weight));
        blocks_[i++].step(flat(p.readout_bias), flat(g.readout_bias));
    }

private:
    std::vector<Adam> blocks_;
};

void accumulate(ParamGradients& acc, const ParamGradients& g) {
    for (std::size_t k = 0; k < acc.layers.size(); ++k) acc.layers[k] += g.layers[k];
    for (std::size_t k = 0; k < acc.biases.size(); ++k) acc.biases[k] += g.biases[k];
    acc.readout_weight += g.readout_weight;
    acc.readout_bias += g.readout_bias;
}

void scale(ParamGradients& g, double s) {
    for (auto& w : g.layers) w *= s;
    for (auto& b : g.biases) b *= s;
    g.readout_weight *= s;
    g.readout_bias *= s;
}

int argmax_row(const Matrix& m, Eigen::Index r) {
    Eigen::Index idx = 0;
    m.row(r).maxCoeff(&idx);
    return static_cast<int>(idx);
}

void check_finite(double loss, int epoch) {
    if (!std::isfinite(loss)) {
        throw TrainingDiverged("training diverged: loss is " + std::to_string(loss) + " at epoch " +
                               std::to_string(epoch));
    }
}

}  // namespace

void TrainConfig::validate() const {
    if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
        throw std::invalid_argument("learning rate must be finite and non-negative");
    }
    if (epochs < 0) throw std::invalid_argument("epoch count must be non-negative");
    if (!(dropout >= 0.0 && dropout < 1.0)) throw std::invalid_argument("dropout must be in [0,1)");
    if (!(weight_decay >= 0.0)) throw std::invalid_argument("weight decay must be non-negative");
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw std::invalid_argument("train fraction must be in (0,1)");
    if (log_every < 1) throw std::invalid_argument("log interval must be positive");
}

void split_indices(std::size_t n, double train_fraction, std::uint64_t seed, std::vector<std::size_t>& train,
                   std::vector<std::size_t>& test) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 rng(seed ^ 0x5eedULL);
    std::shuffle(order.begin(), order.end(), rng);
    const auto cut = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(n)));
    train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(cut));
    test.assign(order.begin() + static_cast<std::ptrdiff_t>(cut), order.end());
    std::sort(train.begin(), train.end());
    std::sort(test.begin(), test.end());
}

TrainResult train(const NodeDataset& dataset, const TrainConfig& config) {
    config.validate();
    const auto n = dataset.graph.num_nodes();
    if (n == 0) throw std::invalid_argument("dataset has no nodes");
    if (dataset.labels.size() != n) throw std::invalid_argument("label count does not match node count");
    for (int l : dataset.labels) {
        if (l < 0 || l >= dataset.num_classes) throw std::invalid_argument("node label outside class range");
    }

    TrainResult result;
    split_indices(n, config.train_fraction, config.seed, result.train_index, result.test_index);
    result.params = GcnParams::initialize(static_cast<int>(dataset.features.cols()), dataset.num_classes,
                                          TaskKind::node, config.seed);
    ParamOptimizer opt(result.params, config);
    std::mt19937_64 dropout_rng(config.seed + 1);

    std::vector<NodeId> all(n);
    std::iota(all.begin(), all.end(), NodeId{0});
    const Readout readout = Readout::nodes(all);
    const auto weights = dataset.graph.to_arcs(dataset.graph.edge_weights());

    auto accuracy = [&](const Matrix& probs, const std::vector<std::size_t>& idx) {
        if (idx.empty()) return 0.0;
        std::size_t hit = 0;
        for (auto i : idx) hit += argmax_row(probs, static_cast<Eigen::Index>(i)) == dataset.labels[i];
        return static_cast<double>(hit) / static_cast<double>(idx.size());
    };
    auto record = [&](int epoch, double loss) {
        const auto eval = forward_batch(result.params, dataset.graph, weights, dataset.features, readout);
        result.train_accuracy = accuracy(eval.probs, result.train_index);
        result.test_accuracy = accuracy(eval.probs, result.test_index);
        result.curve.push_back({epoch, loss, result.train_accuracy, result.test_accuracy});
    };

    const double inv = 1.0 / static_cast<double>(result.train_index.size());
    double loss = 0.0;
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        const auto tape = forward_batch(result.params, dataset.graph, weights, dataset.features, readout,
                                        Dropout{config.dropout, &dropout_rng});
        Matrix d_logits = Matrix::Zero(tape.probs.rows(), tape.probs.cols());
        loss = 0.0;
        for (auto i : result.train_index) {
            const auto r = static_cast<Eigen::Index>(i);
            const int y = dataset.labels[i];
            loss -= std::log(std::max(tape.probs(r, y), 1e-300));
            d_logits.row(r) = tape.probs.row(r) * inv;
            d_logits(r, y) -= inv;
        }
        loss *= inv;
        check_finite(loss, epoch);
        result.losses.push_back(loss);
        if (epoch % config.log_every == 0) record(epoch, loss);

        ParamGradients grads;
        backward_from_logits(tape, result.params, d_logits, nullptr, &grads);
        opt.step(result.params, grads);
    }
    record(config.epochs, loss);
    return result;
}

TrainResult train(const GraphDataset& dataset, const TrainConfig& config) {
    config.validate();
    if (dataset.graphs.empty()) throw std::invalid_argument("dataset has no graphs");
    for (const auto& g : dataset.graphs) {
        if (g.label < 0 || g.label >= dataset.num_classes) throw std::invalid_argument("graph label outside class range");
    }

    TrainResult result;
    split_indices(dataset.graphs.size(), config.train_fraction, config.seed, result.train_index, result.test_index);
    result.params = GcnParams::initialize(dataset.feature_dim, dataset.num_classes, TaskKind::graph, config.seed);
    ParamOptimizer opt(result.params, config);
    std::mt19937_64 dropout_rng(config.seed + 1);

    std::vector<std::vector<double>> weights;
    for (const auto& g : dataset.graphs) weights.push_back(g.graph.to_arcs(g.graph.edge_weights()));

    auto accuracy = [&](const std::vector<std::size_t>& idx) {
        if (idx.empty()) return 0.0;
        std::size_t hit = 0;
        for (auto i : idx) {
            const auto& g = dataset.graphs[i];
            const auto tape = forward_batch(result.params, g.graph, weights[i], g.features, Readout::graph());
            hit += argmax_row(tape.probs, 0) == g.label;
        }
        return static_cast<double>(hit) / static_cast<double>(idx.size());
    };
    auto record = [&](int epoch, double loss) {
        result.train_accuracy = accuracy(result.train_index);
        result.test_accuracy = accuracy(result.test_index);
        result.curve.push_back({epoch, loss, result.train_accuracy, result.test_accuracy});
    };

    const double inv = 1.0 / static_cast<double>(result.train_index.size());
    double loss = 0.0;
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        ParamGradients total = ParamGradients::zeros_like(result.params);
        loss = 0.0;
        for (auto i : result.train_index) {
            const auto& g = dataset.graphs[i];
            const auto tape = forward_batch(result.params, g.graph, weights[i], g.features, Readout::graph(),
                                            Dropout{config.dropout, &dropout_rng});
            loss -= std::log(std::max(tape.probs(0, g.label), 1e-300));
            Matrix d_logits = tape.probs;
            d_logits(0, g.label) -= 1.0;
            ParamGradients grads;
            backward_from_logits(tape, result.params, d_logits, nullptr, &grads);
            accumulate(total, grads);
        }
        loss *= inv;
        check_finite(loss, epoch);
        scale(total, inv);
        result.losses.push_back(loss);
        if (epoch % config.log_every == 0) record(epoch, loss);
        opt.step(result.params, total);
    }
    record(config.epochs, loss);
    return result;
}

double evaluate_accuracy(const GcnParams& params, std::span<const Instance> instances) {
    if (instances.empty()) throw std::invalid_argument("cannot evaluate accuracy on an empty instance list");
    std::size_t hit = 0;
    for (const auto& inst : instances) {
        if (inst.features.cols() != params.feature_dim()) throw std::invalid_argument("instance feature width mismatch");
        const auto weights = inst.graph.to_arcs(inst.graph.edge_weights());
        const auto res = forward(params, inst.graph, weights, inst.features, inst.task.readout());
        if (res.probs.size() != params.num_classes()) throw std::invalid_argument("class count mismatch");
        Eigen::Index idx = 0;
        res.probs.maxCoeff(&idx);
        hit += static_cast<int>(idx) == inst.task.label;
    }
    return static_cast<double>(hit) / static_cast<double>(instances.size());
}

}  // namespace pns
