#include "pns/graph.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <stdexcept>
#include <string>

namespace pns {

std::uint64_t fnv1a(const void* data, std::size_t size, std::uint64_t seed) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    std::uint64_t h = seed;
    for (std::size_t i = 0; i < size; ++i) {
        h ^= bytes[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

SparseGraph SparseGraph::undirected(std::size_t num_nodes, std::span<const Edge> edges,
                                    std::span<const double> weights) {
    return build(num_nodes, edges, weights, false);
}

SparseGraph SparseGraph::directed(std::size_t num_nodes, std::span<const Edge> edges,
                                  std::span<const double> weights) {
    return build(num_nodes, edges, weights, true);
}

SparseGraph SparseGraph::build(std::size_t num_nodes, std::span<const Edge> edges,
                               std::span<const double> weights, bool directed) {
    if (!weights.empty() && weights.size() != edges.size()) {
        throw std::invalid_argument("edge weight count " + std::to_string(weights.size()) +
                                    " does not match edge count " + std::to_string(edges.size()));
    }
    std::map<std::pair<NodeId, NodeId>, double> unique;
    for (std::size_t i = 0; i < edges.size(); ++i) {
        auto [u, v] = edges[i];
        if (u >= num_nodes || v >= num_nodes) {
            throw std::invalid_argument("edge (" + std::to_string(u) + "," + std::to_string(v) +
                                        ") references a node >= " + std::to_string(num_nodes));
        }
        if (u == v) {
            throw std::invalid_argument("self-loop on node " + std::to_string(u));
        }
        const double w = weights.empty() ? 1.0 : weights[i];
        if (!(w >= 0.0 && w <= 1.0)) {
            throw std::invalid_argument("edge weight outside [0,1]");
        }
        if (!directed && u > v) std::swap(u, v);
        unique.try_emplace({u, v}, w);
    }

    SparseGraph g;
    g.num_nodes_ = num_nodes;
    g.directed_ = directed;
    g.edges_.reserve(unique.size());
    g.weights_.reserve(unique.size());
    for (const auto& [key, w] : unique) {
        g.edges_.push_back({key.first, key.second});
        g.weights_.push_back(w);
    }

    g.arcs_.reserve(directed ? g.edges_.size() : 2 * g.edges_.size());
    for (EdgeId e = 0; e < g.edges_.size(); ++e) {
        const auto [u, v] = g.edges_[e];
        g.arcs_.push_back({u, v, e});
        if (!directed) g.arcs_.push_back({v, u, e});
    }

    std::vector<std::size_t> counts(num_nodes + 1, 0);
    for (const auto& [u, v] : g.edges_) {
        ++counts[u + 1];
        ++counts[v + 1];
    }
    for (std::size_t i = 1; i <= num_nodes; ++i) counts[i] += counts[i - 1];
    g.nbr_offsets_ = counts;
    g.nbrs_.resize(counts[num_nodes]);
    std::vector<std::size_t> fill(counts.begin(), counts.end() - 1);
    for (const auto& [u, v] : g.edges_) {
        g.nbrs_[fill[u]++] = v;
        g.nbrs_[fill[v]++] = u;
    }
    for (std::size_t v = 0; v < num_nodes; ++v) {
        std::sort(g.nbrs_.begin() + static_cast<std::ptrdiff_t>(counts[v]),
                  g.nbrs_.begin() + static_cast<std::ptrdiff_t>(counts[v + 1]));
    }

    std::uint64_t h = fnv1a(&num_nodes, sizeof(num_nodes));
    h = fnv1a(&directed, sizeof(directed), h);
    h = fnv1a(g.edges_.data(), g.edges_.size() * sizeof(Edge), h);
    h = fnv1a(g.weights_.data(), g.weights_.size() * sizeof(double), h);
    g.fingerprint_ = h;
    return g;
}

std::span<const NodeId> SparseGraph::neighbors(NodeId v) const {
    if (v >= num_nodes_) throw std::out_of_range("node id out of range");
    return std::span<const NodeId>(nbrs_).subspan(nbr_offsets_[v], nbr_offsets_[v + 1] - nbr_offsets_[v]);
}

std::int64_t SparseGraph::find_edge(NodeId u, NodeId v) const {
    if (!directed_ && u > v) std::swap(u, v);
    const Edge key{u, v};
    auto it = std::lower_bound(edges_.begin(), edges_.end(), key, [](const Edge& a, const Edge& b) {
        return a.u != b.u ? a.u < b.u : a.v < b.v;
    });
    if (it == edges_.end() || !(*it == key)) return -1;
    return it - edges_.begin();
}

std::vector<double> SparseGraph::to_arcs(std::span<const double> per_edge) const {
    if (per_edge.size() != edges_.size()) {
        throw std::invalid_argument("per-edge vector has length " + std::to_string(per_edge.size()) +
                                    ", expected " + std::to_string(edges_.size()));
    }
    std::vector<double> out(arcs_.size());
    for (std::size_t a = 0; a < arcs_.size(); ++a) out[a] = per_edge[arcs_[a].edge];
    return out;
}

std::vector<double> SparseGraph::to_edges(std::span<const double> per_arc) const {
    if (per_arc.size() != arcs_.size()) {
        throw std::invalid_argument("per-arc vector has the wrong length");
    }
    std::vector<double> out(edges_.size(), 0.0);
    for (std::size_t a = 0; a < arcs_.size(); ++a) out[arcs_[a].edge] += per_arc[a];
    return out;
}

std::vector<NodeId> khop_nodes(const SparseGraph& graph, NodeId center, std::size_t k) {
    if (center >= graph.num_nodes()) {
        throw std::out_of_range("center node " + std::to_string(center) + " out of range");
    }
    std::vector<std::size_t> dist(graph.num_nodes(), static_cast<std::size_t>(-1));
    std::deque<NodeId> queue{center};
    dist[center] = 0;
    std::vector<NodeId> out{center};
    while (!queue.empty()) {
        const NodeId v = queue.front();
        queue.pop_front();
        if (dist[v] == k) continue;
        for (NodeId u : graph.neighbors(v)) {
            if (dist[u] != static_cast<std::size_t>(-1)) continue;
            dist[u] = dist[v] + 1;
            out.push_back(u);
            queue.push_back(u);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

SparseGraph induced_subgraph(const SparseGraph& graph, std::span<const NodeId> nodes,
                             std::vector<EdgeId>* edge_map) {
    std::vector<std::int64_t> local(graph.num_nodes(), -1);
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (nodes[i] >= graph.num_nodes()) throw std::out_of_range("subgraph node out of range");
        if (i > 0 && nodes[i] <= nodes[i - 1]) {
            throw std::invalid_argument("subgraph node list must be sorted and unique");
        }
        local[nodes[i]] = static_cast<std::int64_t>(i);
    }
    std::vector<Edge> sub_edges;
    std::vector<double> sub_weights;
    std::vector<EdgeId> parents;
    const auto edges = graph.edges();
    const auto weights = graph.edge_weights();
    for (EdgeId e = 0; e < edges.size(); ++e) {
        const auto lu = local[edges[e].u];
        const auto lv = local[edges[e].v];
        if (lu < 0 || lv < 0) continue;
        sub_edges.push_back({static_cast<NodeId>(lu), static_cast<NodeId>(lv)});
        sub_weights.push_back(weights[e]);
        parents.push_back(e);
    }
    // Relabelling is monotone, so the parent order is already the canonical
    // sorted order of the subgraph.
    auto sub = graph.is_directed() ? SparseGraph::directed(nodes.size(), sub_edges, sub_weights)
                                   : SparseGraph::undirected(nodes.size(), sub_edges, sub_weights);
    if (edge_map) *edge_map = std::move(parents);
    return sub;
}

}  // namespace pns
