#include "pns/datasets.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>

namespace pns {

namespace {

struct Builder {
    std::size_t num_nodes = 0;
    std::vector<Edge> edges;
    std::set<std::pair<NodeId, NodeId>> present;
    std::vector<int> labels;

    NodeId add_node(int label) {
        labels.push_back(label);
        return static_cast<NodeId>(num_nodes++);
    }

    bool add_edge(NodeId u, NodeId v) {
        if (u == v) return false;
        const auto key = std::minmax(u, v);
        if (!present.insert({key.first, key.second}).second) return false;
        edges.push_back({u, v});
        return true;
    }
};

struct Motif {
    std::vector<NodeId> nodes;
    std::vector<Edge> edges;
};

// Preferential attachment as in the classic construction: node m joins the
// m seed nodes, every later node draws m distinct targets from the list of
// edge endpoints.
void barabasi_albert(Builder& b, std::size_t n, std::size_t m, std::mt19937_64& rng) {
    std::vector<NodeId> targets;
    for (std::size_t i = 0; i < m; ++i) targets.push_back(b.add_node(0));
    std::vector<NodeId> repeated;
    for (std::size_t source = m; source < n; ++source) {
        const NodeId s = b.add_node(0);
        for (NodeId t : targets) b.add_edge(s, t);
        repeated.insert(repeated.end(), targets.begin(), targets.end());
        repeated.insert(repeated.end(), m, s);
        std::set<NodeId> chosen;
        std::uniform_int_distribution<std::size_t> pick(0, repeated.size() - 1);
        while (chosen.size() < m) chosen.insert(repeated[pick(rng)]);
        targets.assign(chosen.begin(), chosen.end());
    }
}

void balanced_tree(Builder& b, std::size_t height) {
    const std::size_t count = (std::size_t{1} << (height + 1)) - 1;
    for (std::size_t i = 0; i < count; ++i) b.add_node(0);
    for (std::size_t i = 1; i < count; ++i) b.add_edge(static_cast<NodeId>((i - 1) / 2), static_cast<NodeId>(i));
}

// Roof is node 4, joined to the two middle nodes 0 and 1; 2 and 3 form the
// bottom. Node 0 is the anchor.
Motif add_house(Builder& b) {
    Motif m;
    const int roles[5] = {2, 2, 3, 3, 1};  // middle, middle, bottom, bottom, top
    for (int r : roles) m.nodes.push_back(b.add_node(r));
    const auto& n = m.nodes;
    m.edges = {{n[0], n[1]}, {n[1], n[2]}, {n[2], n[3]}, {n[3], n[0]}, {n[4], n[0]}, {n[4], n[1]}};
    for (auto e : m.edges) b.add_edge(e.u, e.v);
    return m;
}

Motif add_cycle(Builder& b, std::size_t len) {
    Motif m;
    for (std::size_t i = 0; i < len; ++i) m.nodes.push_back(b.add_node(1));
    for (std::size_t i = 0; i < len; ++i) m.edges.push_back({m.nodes[i], m.nodes[(i + 1) % len]});
    for (auto e : m.edges) b.add_edge(e.u, e.v);
    return m;
}

Motif add_grid(Builder& b, std::size_t side) {
    Motif m;
    for (std::size_t i = 0; i < side * side; ++i) m.nodes.push_back(b.add_node(1));
    for (std::size_t r = 0; r < side; ++r) {
        for (std::size_t c = 0; c < side; ++c) {
            const NodeId v = m.nodes[r * side + c];
            if (c + 1 < side) m.edges.push_back({v, m.nodes[r * side + c + 1]});
            if (r + 1 < side) m.edges.push_back({v, m.nodes[(r + 1) * side + c]});
        }
    }
    for (auto e : m.edges) b.add_edge(e.u, e.v);
    return m;
}

// Attach each motif's anchor (first node) to a distinct random base node.
void attach(Builder& b, const std::vector<Motif>& motifs, std::size_t base_count, std::mt19937_64& rng) {
    if (motifs.size() > base_count) throw std::invalid_argument("more motifs than base nodes");
    std::vector<NodeId> base(base_count);
    for (std::size_t i = 0; i < base_count; ++i) base[i] = static_cast<NodeId>(i);
    std::shuffle(base.begin(), base.end(), rng);
    for (std::size_t i = 0; i < motifs.size(); ++i) b.add_edge(motifs[i].nodes.front(), base[i]);
}

void perturb(Builder& b, std::size_t count, std::mt19937_64& rng) {
    std::uniform_int_distribution<NodeId> pick(0, static_cast<NodeId>(b.num_nodes - 1));
    std::size_t added = 0;
    while (added < count) {
        if (b.add_edge(pick(rng), pick(rng))) ++added;
    }
}

NodeDataset finish(std::string name, Builder& b, const std::vector<Motif>& motifs, int num_classes,
                   std::size_t feature_dim, std::size_t node_k) {
    NodeDataset ds;
    ds.name = std::move(name);
    ds.graph = SparseGraph::undirected(b.num_nodes, b.edges);
    ds.features = FeatureMatrix::Ones(static_cast<Eigen::Index>(b.num_nodes), static_cast<Eigen::Index>(feature_dim));
    ds.labels = b.labels;
    ds.num_classes = num_classes;
    auto& gt = ds.ground_truth;
    gt.node_edges.assign(b.num_nodes, {});
    gt.node_nodes.assign(b.num_nodes, {});
    gt.node_k = node_k;
    for (const auto& m : motifs) {
        std::vector<EdgeId> ids;
        for (auto e : m.edges) ids.push_back(static_cast<EdgeId>(ds.graph.find_edge(e.u, e.v)));
        std::sort(ids.begin(), ids.end());
        gt.edge_k = ids.size();
        for (NodeId v : m.nodes) {
            gt.node_edges[v] = ids;
            gt.node_nodes[v] = m.nodes;
        }
    }
    return ds;
}

}  // namespace

std::vector<NodeId> SyntheticGroundTruth::motif_nodes() const {
    std::vector<NodeId> out;
    for (NodeId v = 0; v < node_edges.size(); ++v) {
        if (!node_edges[v].empty()) out.push_back(v);
    }
    return out;
}

NodeDataset generate_ba_shapes(std::uint64_t seed, SyntheticConfig config) {
    std::mt19937_64 rng(seed);
    Builder b;
    barabasi_albert(b, config.base_nodes, config.ba_edges_per_node, rng);
    std::vector<Motif> motifs;
    for (std::size_t i = 0; i < config.motifs; ++i) motifs.push_back(add_house(b));
    attach(b, motifs, config.base_nodes, rng);
    const std::size_t extra =
        config.perturbation_edges < 0 ? b.edges.size() / 100 : static_cast<std::size_t>(config.perturbation_edges);
    perturb(b, extra, rng);
    return finish("ba-shapes", b, motifs, 4, config.feature_dim, 5);
}

NodeDataset generate_tree_cycles(std::uint64_t seed, SyntheticConfig config) {
    std::mt19937_64 rng(seed);
    Builder b;
    balanced_tree(b, config.tree_height);
    const std::size_t base = b.num_nodes;
    std::vector<Motif> motifs;
    for (std::size_t i = 0; i < config.motifs; ++i) motifs.push_back(add_cycle(b, 6));
    attach(b, motifs, base, rng);
    if (config.perturbation_edges > 0) perturb(b, static_cast<std::size_t>(config.perturbation_edges), rng);
    return finish("tree-cycles", b, motifs, 2, config.feature_dim, 6);
}

NodeDataset generate_tree_grid(std::uint64_t seed, SyntheticConfig config) {
    std::mt19937_64 rng(seed);
    Builder b;
    balanced_tree(b, config.tree_height);
    const std::size_t base = b.num_nodes;
    std::vector<Motif> motifs;
    for (std::size_t i = 0; i < config.motifs; ++i) motifs.push_back(add_grid(b, 3));
    attach(b, motifs, base, rng);
    if (config.perturbation_edges > 0) perturb(b, static_cast<std::size_t>(config.perturbation_edges), rng);
    return finish("tree-grid", b, motifs, 2, config.feature_dim, 9);
}

NodeDataset generate_synthetic(const std::string& name, std::uint64_t seed) {
    if (name == "ba-shapes") return generate_ba_shapes(seed);
    if (name == "tree-cycles") return generate_tree_cycles(seed);
    if (name == "tree-grid") return generate_tree_grid(seed);
    throw std::invalid_argument("unknown dataset '" + name + "' (expected ba-shapes, tree-cycles or tree-grid)");
}

namespace {

std::vector<std::vector<long>> read_rows(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::vector<std::vector<long>> rows;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ss(line);
        std::vector<long> row;
        long x = 0;
        while (ss >> x) row.push_back(x);
        if (!ss.eof()) throw std::runtime_error(path.string() + ":" + std::to_string(lineno) + ": not an integer row");
        if (!row.empty()) rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<long> read_column(const std::filesystem::path& path) {
    std::vector<long> out;
    for (auto& row : read_rows(path)) {
        if (row.size() != 1) throw std::runtime_error(path.string() + ": expected one value per line");
        out.push_back(row[0]);
    }
    return out;
}

}  // namespace

GraphDataset load_tu_dataset(const std::filesystem::path& dir, const std::string& prefix) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir)) throw std::runtime_error("not a directory: " + dir.string());
    const std::string ds = prefix.empty() ? fs::path(dir).lexically_normal().filename().string() : prefix;
    auto file = [&](const char* suffix) {
        const auto p = dir / (ds + suffix);
        if (!fs::exists(p)) throw std::runtime_error("missing TU file " + p.string());
        return p;
    };
    const auto arcs = read_rows(file("_A.txt"));
    const auto indicator = read_column(file("_graph_indicator.txt"));
    const auto graph_labels = read_column(file("_graph_labels.txt"));
    const auto node_labels = read_column(file("_node_labels.txt"));

    if (indicator.empty()) throw std::runtime_error("empty graph indicator");
    if (node_labels.size() != indicator.size()) {
        throw std::runtime_error("node label count " + std::to_string(node_labels.size()) +
                                 " != node count " + std::to_string(indicator.size()));
    }
    const long num_graphs = static_cast<long>(graph_labels.size());
    for (std::size_t i = 0; i < indicator.size(); ++i) {
        if (indicator[i] < 1 || indicator[i] > num_graphs) {
            throw std::runtime_error("graph indicator " + std::to_string(indicator[i]) + " out of range");
        }
        if (i > 0 && indicator[i] < indicator[i - 1]) throw std::runtime_error("graph indicator is not sorted");
    }

    std::map<long, int> class_of;
    for (long l : graph_labels) class_of.emplace(l, 0);
    int next = 0;
    for (auto& [l, c] : class_of) c = next++;
    std::map<long, int> feature_of;
    for (long l : node_labels) feature_of.emplace(l, 0);
    next = 0;
    for (auto& [l, c] : feature_of) c = next++;

    GraphDataset out;
    out.name = ds;
    out.num_classes = static_cast<int>(class_of.size());
    out.feature_dim = static_cast<int>(feature_of.size());

    std::vector<std::size_t> first(static_cast<std::size_t>(num_graphs) + 1, indicator.size());
    std::vector<std::size_t> count(static_cast<std::size_t>(num_graphs), 0);
    for (std::size_t i = indicator.size(); i-- > 0;) {
        const auto g = static_cast<std::size_t>(indicator[i] - 1);
        first[g] = i;
        ++count[g];
    }
    std::vector<std::vector<Edge>> edges(static_cast<std::size_t>(num_graphs));
    for (const auto& row : arcs) {
        if (row.size() != 2) throw std::runtime_error("adjacency rows must have two entries");
        const long u = row[0] - 1;
        const long v = row[1] - 1;
        if (u < 0 || v < 0 || u >= static_cast<long>(indicator.size()) || v >= static_cast<long>(indicator.size())) {
            throw std::runtime_error("dangling node id in adjacency: " + std::to_string(row[0]) + ", " +
                                     std::to_string(row[1]));
        }
        if (indicator[static_cast<std::size_t>(u)] != indicator[static_cast<std::size_t>(v)]) {
            throw std::runtime_error("adjacency arc crosses graphs");
        }
        if (u == v) continue;  // self-loops are injected by normalization
        const auto g = static_cast<std::size_t>(indicator[static_cast<std::size_t>(u)] - 1);
        edges[g].push_back({static_cast<NodeId>(u - static_cast<long>(first[g])),
                            static_cast<NodeId>(v - static_cast<long>(first[g]))});
    }

    for (std::size_t g = 0; g < static_cast<std::size_t>(num_graphs); ++g) {
        GraphSample s;
        s.graph = SparseGraph::undirected(count[g], edges[g]);
        s.features = FeatureMatrix::Zero(static_cast<Eigen::Index>(count[g]), out.feature_dim);
        for (std::size_t i = 0; i < count[g]; ++i) {
            s.features(static_cast<Eigen::Index>(i), feature_of.at(node_labels[first[g] + i])) = 1.0;
        }
        s.label = class_of.at(graph_labels[g]);
        out.graphs.push_back(std::move(s));
    }
    return out;
}

}  // namespace pns
