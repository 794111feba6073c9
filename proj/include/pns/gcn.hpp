#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

#include "pns/graph.hpp"

namespace pns {

enum class TaskKind { graph, node };

/// Hidden widths of the three graph-convolution layers.
inline constexpr std::array<int, 3> kDefaultHidden{16, 32, 16};

/// Weights of a 3-layer GCN followed by a fully connected classifier.
/// Graph tasks sum-pool the last layer; node tasks classify one row.
struct GcnParams {
    std::vector<Matrix> layers;  // layers[k] is (in_k x out_k)
    std::vector<Vector> biases;  // biases[k] is (out_k), added after propagation
    Matrix readout_weight;       // (hidden_last x classes)
    Vector readout_bias;         // (classes)
    TaskKind task = TaskKind::node;
    std::uint64_t seed = 0;

    int feature_dim() const { return layers.empty() ? 0 : static_cast<int>(layers.front().rows()); }
    int num_classes() const { return static_cast<int>(readout_bias.size()); }

    /// Throws std::invalid_argument when the chain of shapes is broken or an
    /// entry is non-finite.
    void validate() const;
    std::uint64_t fingerprint() const;

    /// Glorot-uniform convolution weights, U(-1,1) layer biases, fan-in
    /// uniform classifier.
    static GcnParams initialize(int feature_dim, int num_classes, TaskKind task, std::uint64_t seed,
                                std::span<const int> hidden = kDefaultHidden);
};

/// Parameter-shaped gradient container; also used as Adam moment storage.
struct ParamGradients {
    std::vector<Matrix> layers;
    std::vector<Vector> biases;
    Matrix readout_weight;
    Vector readout_bias;

    static ParamGradients zeros_like(const GcnParams& params);
};

/// D^-1/2 (A_w + I) D^-1/2 stored per arc plus the diagonal.
struct NormalizedAdjacency {
    std::vector<double> arc_values;   // entry (dst, src) for each arc
    std::vector<double> self_values;  // 1 / d_v
    std::vector<double> degree;       // 1 + weighted in-degree
    std::vector<double> inv_sqrt_degree;

    Matrix to_dense(const SparseGraph& graph) const;
};

/// Normalization with self-loops. Weights are per arc, each in [0,1].
NormalizedAdjacency normalize_adjacency(const SparseGraph& graph, std::span<const double> arc_weights);

struct Readout {
    TaskKind kind = TaskKind::graph;
    std::vector<NodeId> rows;  // node task: rows classified, in output order

    static Readout graph() { return {TaskKind::graph, {}}; }
    static Readout node(NodeId target) { return {TaskKind::node, {target}}; }
    static Readout nodes(std::vector<NodeId> targets) { return {TaskKind::node, std::move(targets)}; }
    std::size_t num_outputs() const { return kind == TaskKind::graph ? 1 : rows.size(); }
};

/// Optional inverted dropout on every hidden activation (training only).
struct Dropout {
    double rate = 0.0;
    std::mt19937_64* rng = nullptr;
};

class StaleTapeError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Everything the reverse pass needs. Inputs are copied in, so the tape
/// stays valid while callers reuse their buffers; the graph and parameters
/// are checked by fingerprint at backward time.
struct ForwardTape {
    const SparseGraph* graph = nullptr;
    std::uint64_t graph_fingerprint = 0;
    std::uint64_t params_fingerprint = 0;
    Readout readout;
    std::vector<double> arc_weights;
    NormalizedAdjacency adjacency;
    Matrix input;
    std::vector<Matrix> projected;     // H_{k-1} W_k
    std::vector<Matrix> pre;           // A_hat H_{k-1} W_k + b_k
    std::vector<Matrix> activations;   // ReLU (and dropout) of pre
    std::vector<Matrix> dropout_scale; // empty when dropout is off
    Matrix pooled;                     // rows fed to the classifier
    Matrix logits;
    Matrix probs;                      // row-wise softmax of logits
};

struct ForwardResult {
    Vector probs;  // class probabilities of the first (usually only) output
    ForwardTape tape;
};

struct InputGradients {
    std::vector<double> arc_weights;  // per arc
    Matrix features;

    std::vector<double> edge_weights(const SparseGraph& graph) const { return graph.to_edges(arc_weights); }
};

/// Single-output forward pass (graph readout or one target node).
ForwardResult forward(const GcnParams& params, const SparseGraph& graph, std::span<const double> arc_weights,
                      const FeatureMatrix& features, const Readout& readout);

/// Multi-output forward pass used by training; `probs` of the tape holds one
/// row per readout output.
ForwardTape forward_batch(const GcnParams& params, const SparseGraph& graph, std::span<const double> arc_weights,
                          const FeatureMatrix& features, const Readout& readout, Dropout dropout = {});

/// Gradients of a scalar with respect to arc weights and features, given
/// the gradient of that scalar with respect to the class probabilities of
/// the single output.
InputGradients backward_inputs(const ForwardTape& tape, const GcnParams& params, const Vector& upstream);
ParamGradients backward_params(const ForwardTape& tape, const GcnParams& params, const Vector& upstream);

/// Reverse pass from logits (rows x classes). Either output may be null.
void backward_from_logits(const ForwardTape& tape, const GcnParams& params, const Matrix& d_logits,
                          InputGradients* inputs, ParamGradients* grads);

/// Row-wise softmax Jacobian-transpose product.
Matrix softmax_backward(const Matrix& probs, const Matrix& upstream);

}  // namespace pns
