#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace pns {

using NodeId = std::uint32_t;
using EdgeId = std::uint32_t;

/// Row-major dense matrix used for features, activations and weights.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

/// Node feature matrix, one row per node.
using FeatureMatrix = Matrix;

struct Edge {
    NodeId u;
    NodeId v;
    friend bool operator==(const Edge&, const Edge&) = default;
};

/// Directed arc carrying a message from `src` to `dst`. Both arcs of an
/// undirected edge point at the same logical edge.
struct Arc {
    NodeId src;
    NodeId dst;
    EdgeId edge;
};

/// Immutable sparse graph. Logical edges are the unit of masking; arcs are
/// the unit of message passing.
///
/// Undirected graphs store each edge once with u < v, sorted
/// lexicographically, and expand to two arcs. Directed graphs keep (u, v) as
/// given (sorted, deduplicated) and expand to a single arc u -> v.
class SparseGraph {
public:
    SparseGraph() = default;

    /// Throws std::invalid_argument on self-loops, out-of-range ids or
    /// weights outside [0,1]. Duplicate edges (including (v,u) twins of an
    /// undirected edge) are merged; the first weight wins.
    static SparseGraph undirected(std::size_t num_nodes, std::span<const Edge> edges,
                                  std::span<const double> weights = {});
    static SparseGraph directed(std::size_t num_nodes, std::span<const Edge> edges,
                                std::span<const double> weights = {});

    std::size_t num_nodes() const { return num_nodes_; }
    std::size_t num_edges() const { return edges_.size(); }
    std::size_t num_arcs() const { return arcs_.size(); }
    bool is_directed() const { return directed_; }

    std::span<const Edge> edges() const { return edges_; }
    std::span<const double> edge_weights() const { return weights_; }
    std::span<const Arc> arcs() const { return arcs_; }

    /// Undirected neighbours (both arc directions) of a node.
    std::span<const NodeId> neighbors(NodeId v) const;

    /// Logical id of edge (u,v), or -1 when absent. Order-insensitive for
    /// undirected graphs.
    std::int64_t find_edge(NodeId u, NodeId v) const;

    /// Broadcast a per-logical-edge vector onto arcs.
    std::vector<double> to_arcs(std::span<const double> per_edge) const;
    /// Sum a per-arc vector back onto logical edges.
    std::vector<double> to_edges(std::span<const double> per_arc) const;

    /// Stable 64-bit content hash (structure and weights).
    std::uint64_t fingerprint() const { return fingerprint_; }

private:
    static SparseGraph build(std::size_t num_nodes, std::span<const Edge> edges,
                             std::span<const double> weights, bool directed);

    std::size_t num_nodes_ = 0;
    bool directed_ = false;
    std::vector<Edge> edges_;
    std::vector<double> weights_;
    std::vector<Arc> arcs_;
    std::vector<std::size_t> nbr_offsets_;
    std::vector<NodeId> nbrs_;
    std::uint64_t fingerprint_ = 0;
};

/// FNV-1a over raw bytes; used for cheap staleness checks.
std::uint64_t fnv1a(const void* data, std::size_t size, std::uint64_t seed = 0xcbf29ce484222325ULL);

/// Nodes within `k` hops of `center`, sorted ascending.
std::vector<NodeId> khop_nodes(const SparseGraph& graph, NodeId center, std::size_t k);

/// Subgraph induced by `nodes` (which must be sorted and unique). Fills
/// `edge_map` with the parent logical edge id of every subgraph edge.
SparseGraph induced_subgraph(const SparseGraph& graph, std::span<const NodeId> nodes,
                             std::vector<EdgeId>* edge_map = nullptr);

}  // namespace pns
