#include "pns/instance.hpp"

#include <stdexcept>
#include <string>

namespace pns {

namespace {

int argmax(const Vector& v) {
    Eigen::Index idx = 0;
    v.maxCoeff(&idx);
    return static_cast<int>(idx);
}

}  // namespace

Instance build_instance(SparseGraph graph, FeatureMatrix features, Task task, std::shared_ptr<const GcnParams> model) {
    if (!model) throw std::invalid_argument("instance needs a model");
    if (static_cast<std::size_t>(features.rows()) != graph.num_nodes()) {
        throw std::invalid_argument("feature matrix has " + std::to_string(features.rows()) + " rows for " +
                                    std::to_string(graph.num_nodes()) + " nodes");
    }
    if (features.cols() != model->feature_dim()) {
        throw std::invalid_argument("feature width " + std::to_string(features.cols()) +
                                    " does not match model input width " + std::to_string(model->feature_dim()));
    }
    if (!features.allFinite()) throw std::invalid_argument("feature matrix contains non-finite entries");
    if (task.kind != model->task) throw std::invalid_argument("task kind does not match the model");
    if (task.kind == TaskKind::node && task.target >= graph.num_nodes()) {
        throw std::invalid_argument("target node " + std::to_string(task.target) + " out of range");
    }

    Instance inst{std::move(graph), std::move(features), task, -1, {}, std::move(model)};
    const auto weights = inst.graph.to_arcs(inst.graph.edge_weights());
    inst.probs = forward(*inst.model, inst.graph, weights, inst.features, task.readout()).probs;
    inst.predicted = argmax(inst.probs);
    return inst;
}

Instance retarget(const Instance& base, Task task) {
    if (task.kind != base.task.kind) throw std::invalid_argument("retarget cannot change the task kind");
    if (task.kind == TaskKind::node && task.target >= base.graph.num_nodes()) {
        throw std::invalid_argument("target node " + std::to_string(task.target) + " out of range");
    }
    Instance inst = base;
    inst.task = task;
    inst.probs = predict(inst, inst.graph.to_arcs(inst.graph.edge_weights()), inst.features);
    inst.predicted = argmax(inst.probs);
    return inst;
}

std::size_t receptive_field_hops(const GcnParams& model) { return model.layers.size() + 1; }

Subgraph khop_subgraph(const Instance& instance, NodeId center, std::size_t k) {
    if (instance.task.kind != TaskKind::node) throw std::invalid_argument("k-hop extraction needs a node task");
    if (k < 1) throw std::invalid_argument("hop count must be at least 1");
    if (center >= instance.graph.num_nodes()) {
        throw std::out_of_range("center node " + std::to_string(center) + " out of range");
    }
    Subgraph out;
    out.mapping.nodes = khop_nodes(instance.graph, center, k);
    SparseGraph sub = induced_subgraph(instance.graph, out.mapping.nodes, &out.mapping.edges);

    FeatureMatrix features(static_cast<Eigen::Index>(out.mapping.nodes.size()), instance.features.cols());
    NodeId local_center = 0;
    for (std::size_t i = 0; i < out.mapping.nodes.size(); ++i) {
        features.row(static_cast<Eigen::Index>(i)) = instance.features.row(out.mapping.nodes[i]);
        if (out.mapping.nodes[i] == center) local_center = static_cast<NodeId>(i);
    }
    const int label = center == instance.task.target ? instance.task.label : -1;
    out.instance = build_instance(std::move(sub), std::move(features), Task::node(local_center, label), instance.model);
    return out;
}

MaskPair MaskPair::ones(const Instance& instance) { return constant(instance, 1.0, 1.0); }

MaskPair MaskPair::constant(const Instance& instance, double edge_value, double node_value) {
    return {std::vector<double>(instance.graph.num_edges(), edge_value),
            std::vector<double>(instance.graph.num_nodes(), node_value)};
}

void MaskPair::validate(const Instance& instance) const {
    if (edge_mask.size() != instance.graph.num_edges()) {
        throw std::invalid_argument("edge mask length " + std::to_string(edge_mask.size()) + " != edge count " +
                                    std::to_string(instance.graph.num_edges()));
    }
    if (node_mask.size() != instance.graph.num_nodes()) {
        throw std::invalid_argument("node mask length " + std::to_string(node_mask.size()) + " != node count " +
                                    std::to_string(instance.graph.num_nodes()));
    }
    for (double m : edge_mask) {
        if (!(m >= 0.0 && m <= 1.0)) throw std::invalid_argument("edge mask entry outside [0,1]");
    }
    for (double m : node_mask) {
        if (!(m >= 0.0 && m <= 1.0)) throw std::invalid_argument("node mask entry outside [0,1]");
    }
}

MaskedInputs apply_masks(const Instance& instance, const MaskPair& masks) {
    masks.validate(instance);
    MaskedInputs out;
    const auto arcs = instance.graph.arcs();
    const auto weights = instance.graph.edge_weights();
    out.arc_weights.resize(arcs.size());
    for (std::size_t a = 0; a < arcs.size(); ++a) out.arc_weights[a] = weights[arcs[a].edge] * masks.edge_mask[arcs[a].edge];
    out.features = instance.features;
    for (Eigen::Index v = 0; v < out.features.rows(); ++v) {
        const double m = masks.node_mask[static_cast<std::size_t>(v)];
        if (m != 1.0) out.features.row(v) *= m;
    }
    return out;
}

Vector predict(const Instance& instance, std::span<const double> arc_weights, const FeatureMatrix& features) {
    return forward(*instance.model, instance.graph, arc_weights, features, instance.task.readout()).probs;
}

}  // namespace pns
