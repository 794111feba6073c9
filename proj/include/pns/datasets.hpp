#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "pns/graph.hpp"

namespace pns {

/// Planted-motif ground truth for node-classification benchmarks.
struct SyntheticGroundTruth {
    std::vector<std::vector<EdgeId>> node_edges;  // per node; empty outside motifs
    std::vector<std::vector<NodeId>> node_nodes;  // per node; motif members
    std::size_t edge_k = 0;  // top-K for edge accuracy
    std::size_t node_k = 0;  // top-K for node accuracy

    std::vector<NodeId> motif_nodes() const;
    bool has(NodeId v) const { return v < node_edges.size() && !node_edges[v].empty(); }
};

/// A single graph with per-node labels.
struct NodeDataset {
    std::string name;
    SparseGraph graph;
    FeatureMatrix features;
    std::vector<int> labels;
    int num_classes = 0;
    SyntheticGroundTruth ground_truth;
};

struct GraphSample {
    SparseGraph graph;
    FeatureMatrix features;
    int label = 0;
};

/// A collection of labelled graphs (graph classification).
struct GraphDataset {
    std::string name;
    std::vector<GraphSample> graphs;
    int num_classes = 0;
    int feature_dim = 0;
};

/// Generator knobs. Defaults reproduce the published node counts exactly.
struct SyntheticConfig {
    std::size_t base_nodes = 300;  // BA base size
    std::size_t ba_edges_per_node = 5;
    std::size_t tree_height = 8;   // 2^(h+1) - 1 tree nodes
    std::size_t motifs = 80;
    std::size_t feature_dim = 10;
    /// Extra uniformly random edges; negative selects the dataset default
    /// (1% of the planted edge count for BA-Shapes, none for the trees).
    long perturbation_edges = -1;
};

NodeDataset generate_ba_shapes(std::uint64_t seed, SyntheticConfig config = {});
NodeDataset generate_tree_cycles(std::uint64_t seed, SyntheticConfig config = {.motifs = 60});
NodeDataset generate_tree_grid(std::uint64_t seed, SyntheticConfig config = {});

/// Dispatch on "ba-shapes", "tree-cycles" or "tree-grid". Throws
/// std::invalid_argument for other names.
NodeDataset generate_synthetic(const std::string& name, std::uint64_t seed);

/// Reads DS_A.txt, DS_graph_indicator.txt, DS_graph_labels.txt and
/// DS_node_labels.txt, where DS is the directory name (or `prefix` when
/// given). Node labels become one-hot features; graph labels are remapped
/// to 0..C-1 in sorted order.
GraphDataset load_tu_dataset(const std::filesystem::path& dir, const std::string& prefix = {});

}  // namespace pns
