#pragma once

#include <memory>
#include <span>
#include <vector>

#include "pns/gcn.hpp"
#include "pns/graph.hpp"

namespace pns {

/// Prediction target of an explicand.
struct Task {
    TaskKind kind = TaskKind::graph;
    NodeId target = 0;  // node tasks only
    int label = -1;     // ground-truth label, -1 when unknown

    static Task graph(int label = -1) { return {TaskKind::graph, 0, label}; }
    static Task node(NodeId target, int label = -1) { return {TaskKind::node, target, label}; }
    Readout readout() const { return kind == TaskKind::graph ? Readout::graph() : Readout::node(target); }
};

/// One explicand: a graph, its features, the target and the frozen model's
/// prediction on the unmasked input.
struct Instance {
    SparseGraph graph;
    FeatureMatrix features;
    Task task;
    int predicted = -1;
    Vector probs;  // model output on the unmasked input
    std::shared_ptr<const GcnParams> model;
};

/// Runs one forward pass to fix the predicted label. Throws
/// std::invalid_argument on shape mismatch or non-finite features.
Instance build_instance(SparseGraph graph, FeatureMatrix features, Task task, std::shared_ptr<const GcnParams> model);

/// Same graph, features and model with a different target; the prediction
/// is recomputed.
Instance retarget(const Instance& base, Task task);

struct SubgraphMapping {
    std::vector<NodeId> nodes;  // subgraph node -> parent node
    std::vector<EdgeId> edges;  // subgraph logical edge -> parent logical edge
};

struct Subgraph {
    Instance instance;
    SubgraphMapping mapping;
};

/// Induced subgraph on every node within `k` hops of `center`; the result is
/// a node task on the relabelled center. With symmetric normalization the
/// center's output is reproduced exactly once `k` exceeds the model depth by
/// one (the outermost layer still reads degrees of nodes `depth` hops away).
Subgraph khop_subgraph(const Instance& instance, NodeId center, std::size_t k);

/// Hop radius that reproduces a node prediction exactly for `model`.
std::size_t receptive_field_hops(const GcnParams& model);

/// Continuous masks over logical edges and nodes, each entry in [0,1].
struct MaskPair {
    std::vector<double> edge_mask;
    std::vector<double> node_mask;

    static MaskPair ones(const Instance& instance);
    static MaskPair constant(const Instance& instance, double edge_value, double node_value);
    /// Throws std::invalid_argument on length mismatch or entries outside [0,1].
    void validate(const Instance& instance) const;
};

struct MaskedInputs {
    std::vector<double> arc_weights;
    FeatureMatrix features;
};

/// Per-arc weights E * M_e (one logical entry drives both arcs of an
/// undirected edge) and row-scaled features M_f * X.
MaskedInputs apply_masks(const Instance& instance, const MaskPair& masks);

/// Class probabilities of the frozen model on arbitrary inputs over the
/// instance's graph.
Vector predict(const Instance& instance, std::span<const double> arc_weights, const FeatureMatrix& features);

}  // namespace pns
