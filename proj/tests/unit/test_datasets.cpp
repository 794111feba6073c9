#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <queue>
#include <set>

#include "pns/datasets.hpp"

using namespace pns;
namespace fs = std::filesystem;

namespace {

// Every ground-truth edge set must form one connected piece that touches
// its node.
bool connected_through(const SparseGraph& g, NodeId v, const std::vector<EdgeId>& edges) {
    std::set<NodeId> nodes;
    for (auto e : edges) {
        nodes.insert(g.edges()[e].u);
        nodes.insert(g.edges()[e].v);
    }
    if (!nodes.count(v)) return false;
    std::set<NodeId> seen{v};
    std::queue<NodeId> q;
    q.push(v);
    while (!q.empty()) {
        const NodeId a = q.front();
        q.pop();
        for (auto e : edges) {
            const auto& ed = g.edges()[e];
            const NodeId b = ed.u == a ? ed.v : ed.v == a ? ed.u : a;
            if (b != a && seen.insert(b).second) q.push(b);
        }
    }
    return seen == nodes;
}

void check_ground_truth(const NodeDataset& d, std::size_t per_node) {
    const auto motif = d.ground_truth.motif_nodes();
    REQUIRE(!motif.empty());
    for (auto v : motif) {
        const auto& gt = d.ground_truth.node_edges[v];
        CHECK(gt.size() == per_node);
        for (auto e : gt) CHECK(e < d.graph.num_edges());
        CHECK(connected_through(d.graph, v, gt));
        CHECK(d.labels[v] != 0);
    }
    CHECK(d.ground_truth.edge_k == per_node);
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    void write(const std::string& file, const std::string& text) const { std::ofstream(path / file) << text; }
};

}  // namespace

TEST_CASE("BA-Shapes statistics") {
    const auto d = generate_ba_shapes(0);
    CHECK(d.graph.num_nodes() == 700);
    CHECK(d.num_classes == 4);
    CHECK(d.graph.num_edges() == 2055);
    CHECK(d.ground_truth.motif_nodes().size() == 400);
    CHECK(d.ground_truth.node_k == 5);
    CHECK(d.features.cols() == 10);
    CHECK((d.features.array() == 1.0).all());
    check_ground_truth(d, 6);
}

TEST_CASE("Tree-Cycles statistics") {
    const auto d = generate_tree_cycles(0);
    CHECK(d.graph.num_nodes() == 871);
    CHECK(d.num_classes == 2);
    CHECK(d.ground_truth.motif_nodes().size() == 360);
    CHECK(d.ground_truth.node_k == 6);
    check_ground_truth(d, 6);
}

TEST_CASE("Tree-Grid statistics") {
    const auto d = generate_tree_grid(0);
    CHECK(d.graph.num_nodes() == 1231);
    CHECK(d.num_classes == 2);
    CHECK(d.ground_truth.motif_nodes().size() == 720);
    CHECK(d.ground_truth.node_k == 9);
    check_ground_truth(d, 12);
}

TEST_CASE("generators are seed-deterministic") {
    for (const char* name : {"ba-shapes", "tree-cycles", "tree-grid"}) {
        const auto a = generate_synthetic(name, 4);
        const auto b = generate_synthetic(name, 4);
        CHECK(a.graph.fingerprint() == b.graph.fingerprint());
        CHECK(a.labels == b.labels);
        CHECK(a.ground_truth.node_edges == b.ground_truth.node_edges);
    }
    CHECK(generate_ba_shapes(1).graph.fingerprint() != generate_ba_shapes(2).graph.fingerprint());
    CHECK_THROWS_AS(generate_synthetic("cora", 0), std::invalid_argument);
}

TEST_CASE("TU loader reads the flat files") {
    TempDir dir("pns_tu_toy");
    // Graph 1: nodes 1-3 (triangle); graph 2: nodes 4-5 (one edge, both arcs listed).
    dir.write("pns_tu_toy_A.txt", "1, 2\n2, 1\n2, 3\n3, 2\n1, 3\n3, 1\n4, 5\n5, 4\n");
    dir.write("pns_tu_toy_graph_indicator.txt", "1\n1\n1\n2\n2\n");
    dir.write("pns_tu_toy_graph_labels.txt", "-1\n1\n");
    dir.write("pns_tu_toy_node_labels.txt", "0\n2\n2\n5\n0\n");
    const auto d = load_tu_dataset(dir.path);
    REQUIRE(d.graphs.size() == 2);
    CHECK(d.num_classes == 2);
    CHECK(d.feature_dim == 3);
    CHECK(d.graphs[0].graph.num_edges() == 3);
    CHECK(d.graphs[1].graph.num_edges() == 1);
    CHECK(d.graphs[0].label == 0);
    CHECK(d.graphs[1].label == 1);
    CHECK(d.graphs[0].features(1, 1) == 1.0);
    CHECK(d.graphs[1].features(0, 2) == 1.0);
    CHECK(d.graphs[1].features.row(1).sum() == 1.0);
}

TEST_CASE("TU loader errors") {
    SUBCASE("empty directory") {
        TempDir dir("pns_tu_empty");
        CHECK_THROWS(load_tu_dataset(dir.path));
    }
    SUBCASE("dangling node id") {
        TempDir dir("pns_tu_bad");
        dir.write("pns_tu_bad_A.txt", "1, 9\n");
        dir.write("pns_tu_bad_graph_indicator.txt", "1\n1\n");
        dir.write("pns_tu_bad_graph_labels.txt", "0\n");
        dir.write("pns_tu_bad_node_labels.txt", "0\n0\n");
        CHECK_THROWS(load_tu_dataset(dir.path));
    }
    SUBCASE("inconsistent node labels") {
        TempDir dir("pns_tu_short");
        dir.write("pns_tu_short_A.txt", "1, 2\n");
        dir.write("pns_tu_short_graph_indicator.txt", "1\n1\n");
        dir.write("pns_tu_short_graph_labels.txt", "0\n");
        dir.write("pns_tu_short_node_labels.txt", "0\n");
        CHECK_THROWS(load_tu_dataset(dir.path));
    }
    SUBCASE("missing directory") { CHECK_THROWS(load_tu_dataset("/nonexistent/pns")); }
}

// Runs only when PNS_TU_ROOT points at a directory holding the downloaded
// Mutagenicity/ and MSRC_21/ folders.
TEST_CASE("real dataset counts when the files are present") {
    const char* root = std::getenv("PNS_TU_ROOT");
    if (!root) return;
    if (fs::is_directory(fs::path(root) / "Mutagenicity")) {
        const auto d = load_tu_dataset(fs::path(root) / "Mutagenicity");
        CHECK(d.graphs.size() == 4337);
        CHECK(d.num_classes == 2);
    }
    if (fs::is_directory(fs::path(root) / "MSRC_21")) {
        const auto d = load_tu_dataset(fs::path(root) / "MSRC_21");
        CHECK(d.graphs.size() == 563);
        CHECK(d.num_classes == 20);
    }
}
