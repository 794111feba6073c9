#include <doctest.h>

#include <memory>
#include <random>

#include "checks.hpp"
#include "pns/datasets.hpp"
#include "pns/instance.hpp"
#include "pns/trainer.hpp"

using namespace pns;

namespace {

std::shared_ptr<const GcnParams> model_for(int dim, int classes, TaskKind kind, std::uint64_t seed = 3) {
    return std::make_shared<const GcnParams>(GcnParams::initialize(dim, classes, kind, seed));
}

SparseGraph path(std::size_t n) {
    std::vector<Edge> e;
    for (NodeId v = 0; v + 1 < n; ++v) e.push_back({v, v + 1});
    return SparseGraph::undirected(n, e);
}

}  // namespace

TEST_CASE("undirected graphs store each edge once, sorted, as two arcs") {
    const std::vector<Edge> e{{2, 1}, {0, 1}, {1, 2}, {3, 0}};
    const auto g = SparseGraph::undirected(4, e);
    REQUIRE(g.num_edges() == 3);
    CHECK(g.edges()[0] == Edge{0, 1});
    CHECK(g.edges()[1] == Edge{0, 3});
    CHECK(g.edges()[2] == Edge{1, 2});
    CHECK(g.num_arcs() == 6);
    for (const auto& a : g.arcs()) {
        const auto& le = g.edges()[a.edge];
        CHECK(((a.src == le.u && a.dst == le.v) || (a.src == le.v && a.dst == le.u)));
    }
    CHECK(g.find_edge(2, 1) == 2);
    CHECK(g.find_edge(1, 3) == -1);
}

TEST_CASE("graph construction rejects self-loops, bad ids and bad weights") {
    const std::vector<Edge> loop{{1, 1}};
    CHECK_THROWS_AS(SparseGraph::undirected(3, loop), std::invalid_argument);
    const std::vector<Edge> far{{0, 5}};
    CHECK_THROWS_AS(SparseGraph::undirected(3, far), std::invalid_argument);
    const std::vector<Edge> one{{0, 1}};
    const std::vector<double> heavy{1.5};
    CHECK_THROWS_AS(SparseGraph::undirected(2, one, heavy), std::invalid_argument);
}

TEST_CASE("directed graphs keep orientation with one arc per edge") {
    const std::vector<Edge> e{{1, 0}, {0, 1}};
    const auto g = SparseGraph::directed(2, e);
    CHECK(g.num_edges() == 2);
    CHECK(g.num_arcs() == 2);
    CHECK(g.find_edge(1, 0) >= 0);
}

TEST_CASE("build_instance fixes the prediction and validates inputs") {
    auto model = model_for(3, 2, TaskKind::graph);
    FeatureMatrix x = FeatureMatrix::Zero(5, 3);
    for (int i = 0; i < 5; ++i) x(i, i % 3) = 1.0;
    const auto inst = build_instance(path(5), x, Task::graph(), model);
    const auto res = forward(*model, inst.graph, inst.graph.to_arcs(inst.graph.edge_weights()), x, Readout::graph());
    Eigen::Index am = 0;
    res.probs.maxCoeff(&am);
    CHECK(inst.predicted == am);

    FeatureMatrix bad = x;
    bad(2, 1) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(build_instance(path(5), bad, Task::graph(), model), std::invalid_argument);
    CHECK_THROWS_AS(build_instance(path(5), FeatureMatrix::Zero(4, 3), Task::graph(), model), std::invalid_argument);
    CHECK_THROWS_AS(build_instance(path(5), FeatureMatrix::Zero(5, 2), Task::graph(), model), std::invalid_argument);
    CHECK_THROWS_AS(build_instance(path(5), x, Task::node(9), model_for(3, 2, TaskKind::node)), std::invalid_argument);
}

TEST_CASE("Tree-Cycles cycle node gets a binary prediction from a trained model") {
    const auto d = generate_tree_cycles(0);
    TrainConfig tc;
    tc.epochs = 50;
    tc.log_every = 100;
    auto model = std::make_shared<const GcnParams>(train(d, tc).params);
    const auto inst = build_instance(d.graph, d.features, Task::node(600, d.labels[600]), model);
    CHECK(inst.probs.size() == 2);
    CHECK((inst.predicted == 0 || inst.predicted == 1));
}

TEST_CASE("k-hop subgraph examples") {
    SUBCASE("star center with k = 1 keeps the whole star") {
        const std::vector<Edge> e{{0, 1}, {0, 2}, {0, 3}, {0, 4}};
        const auto g = SparseGraph::undirected(5, e);
        const auto inst = build_instance(g, FeatureMatrix::Ones(5, 2), Task::node(0), model_for(2, 2, TaskKind::node));
        const auto sub = khop_subgraph(inst, 0, 1);
        CHECK(sub.instance.graph.num_nodes() == 5);
        CHECK(sub.instance.graph.num_edges() == 4);
    }
    SUBCASE("isolated node stays alone") {
        const std::vector<Edge> e{{1, 2}};
        const auto g = SparseGraph::undirected(3, e);
        const auto inst = build_instance(g, FeatureMatrix::Ones(3, 2), Task::node(0), model_for(2, 2, TaskKind::node));
        const auto sub = khop_subgraph(inst, 0, 3);
        CHECK(sub.instance.graph.num_nodes() == 1);
        CHECK(sub.instance.graph.num_edges() == 0);
        CHECK(sub.mapping.nodes == std::vector<NodeId>{0});
    }
    SUBCASE("center out of range") {
        const auto inst = build_instance(path(3), FeatureMatrix::Ones(3, 2), Task::node(0), model_for(2, 2, TaskKind::node));
        CHECK_THROWS_AS(khop_subgraph(inst, 7, 2), std::out_of_range);
        CHECK_THROWS_AS(khop_subgraph(inst, 0, 0), std::invalid_argument);
    }
}

TEST_CASE("receptive-field subgraph reproduces the full-graph prediction on Tree-Cycles") {
    const auto d = generate_tree_cycles(0);
    auto model = model_for(10, 2, TaskKind::node, 11);
    const auto full = build_instance(d.graph, d.features, Task::node(0), model);
    const auto k = receptive_field_hops(*model);
    for (NodeId v : {NodeId{3}, NodeId{600}, NodeId{700}, NodeId{870}}) {
        const auto inst = retarget(full, Task::node(v));
        const auto sub = khop_subgraph(inst, v, k);
        CHECK((sub.instance.probs - inst.probs).cwiseAbs().maxCoeff() <= 1e-10);
        CHECK(sub.mapping.nodes[sub.instance.task.target] == v);
        for (std::size_t e = 0; e < sub.mapping.edges.size(); ++e) {
            const auto& le = sub.instance.graph.edges()[e];
            const auto& pe = d.graph.edges()[sub.mapping.edges[e]];
            CHECK(Edge{sub.mapping.nodes[le.u], sub.mapping.nodes[le.v]} == pe);
        }
    }
}

TEST_CASE("apply_masks examples") {
    const std::vector<Edge> e{{0, 1}, {1, 2}, {2, 3}};
    const auto g = SparseGraph::undirected(4, e);
    FeatureMatrix x(4, 2);
    x << 1, 2, 3, 4, 5, 6, 7, 8;
    const auto inst = build_instance(g, x, Task::graph(), model_for(2, 2, TaskKind::graph));

    SUBCASE("ones are the identity, bit for bit") {
        const auto out = apply_masks(inst, MaskPair::ones(inst));
        CHECK(out.arc_weights == inst.graph.to_arcs(inst.graph.edge_weights()));
        CHECK(out.features == inst.features);
    }
    SUBCASE("zero node mask zeroes the features") {
        const auto out = apply_masks(inst, MaskPair::constant(inst, 1.0, 0.0));
        CHECK(out.features.isZero());
    }
    SUBCASE("edge mask (1,0,1) hits both arcs of each edge") {
        MaskPair m = MaskPair::ones(inst);
        m.edge_mask = {1.0, 0.0, 1.0};
        const auto out = apply_masks(inst, m);
        for (std::size_t a = 0; a < g.num_arcs(); ++a) CHECK(out.arc_weights[a] == m.edge_mask[g.arcs()[a].edge]);
    }
    SUBCASE("length mismatch") {
        MaskPair m = MaskPair::ones(inst);
        m.edge_mask.pop_back();
        CHECK_THROWS_AS(apply_masks(inst, m), std::invalid_argument);
    }
}

TEST_CASE("apply_masks is affine in each entry and shares the entry across arcs") {
    std::mt19937_64 rng(5);
    const auto inst = testing::random_instance(rng, 7, TaskKind::graph);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    MaskPair m = MaskPair::ones(inst);
    for (auto& x : m.edge_mask) x = u(rng);
    for (auto& x : m.node_mask) x = u(rng);
    const auto g = inst.graph;
    for (std::size_t i = 0; i < m.edge_mask.size(); ++i) {
        MaskPair a = m, b = m, mid = m;
        a.edge_mask[i] = 0.2;
        b.edge_mask[i] = 0.8;
        mid.edge_mask[i] = 0.5;
        const auto wa = apply_masks(inst, a).arc_weights, wb = apply_masks(inst, b).arc_weights;
        const auto wm = apply_masks(inst, mid).arc_weights;
        for (std::size_t k = 0; k < wa.size(); ++k) {
            CHECK(wm[k] == doctest::Approx(0.5 * (wa[k] + wb[k])).epsilon(1e-14));
            const bool touched = g.arcs()[k].edge == i;
            CHECK((wa[k] != wb[k]) == (touched && g.edge_weights()[i] != 0.0));
        }
    }
    const auto v = 3;
    MaskPair a = m, b = m, mid = m;
    a.node_mask[v] = 0.0;
    b.node_mask[v] = 1.0;
    mid.node_mask[v] = 0.25;
    const auto fa = apply_masks(inst, a).features, fb = apply_masks(inst, b).features;
    const auto fm = apply_masks(inst, mid).features;
    CHECK((fm - (0.75 * fa + 0.25 * fb)).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("apply_masks leaves the instance untouched") {
    std::mt19937_64 rng(6);
    const auto inst = testing::random_instance(rng, 6, TaskKind::graph);
    const FeatureMatrix before = inst.features;
    const std::vector<double> w(inst.graph.edge_weights().begin(), inst.graph.edge_weights().end());
    (void)apply_masks(inst, MaskPair::constant(inst, 0.3, 0.4));
    CHECK(inst.features == before);
    CHECK(std::equal(w.begin(), w.end(), inst.graph.edge_weights().begin()));
}
