#include <doctest.h>

#include <cmath>
#include <memory>
#include <random>

#include "checks.hpp"
#include "pns/datasets.hpp"
#include "pns/explainer.hpp"
#include "pns/trainer.hpp"
#include "pns/workflow.hpp"

using namespace pns;

namespace {

double predicted_prob(const Instance& inst, std::span<const double> edge_weights, const FeatureMatrix& x) {
    const auto w = inst.graph.to_arcs(edge_weights);
    return forward(*inst.model, inst.graph, w, x, inst.task.readout()).probs[inst.predicted];
}

std::shared_ptr<const GcnParams> zero_model(int dim, int classes, TaskKind kind) {
    auto p = GcnParams::initialize(dim, classes, kind, 0);
    for (auto& m : p.layers) m.setZero();
    for (auto& b : p.biases) b.setZero();
    p.readout_weight.setZero();
    p.readout_bias.setZero();
    return std::make_shared<const GcnParams>(std::move(p));
}

// K2 whose edge decides the class: with the edge both hidden units die and
// the bias picks class 0, without it node 0 survives and class 1 wins.
Instance switch_instance() {
    GcnParams p;
    p.task = TaskKind::graph;
    p.layers = {Matrix::Ones(2, 1), Matrix::Ones(1, 1), Matrix::Ones(1, 1)};
    p.biases = {Vector::Constant(1, -0.6), Vector::Zero(1), Vector::Zero(1)};
    p.readout_weight = Matrix(1, 2);
    p.readout_weight << 0.0, 200.0;
    p.readout_bias = Vector(2);
    p.readout_bias << 40.0, 0.0;
    FeatureMatrix x = FeatureMatrix::Zero(2, 2);
    x(0, 0) = 1.0;
    const std::vector<Edge> e{{0, 1}};
    return build_instance(SparseGraph::undirected(2, e), x, Task::graph(), std::make_shared<const GcnParams>(p));
}

}  // namespace

TEST_CASE("sample_complement examples") {
    std::mt19937_64 rng(1);
    const auto inst = testing::random_instance(rng, 6, TaskKind::graph);
    const auto base = inst.graph.edge_weights();

    SUBCASE("no noise and a full mask remove every edge") {
        const auto c = sample_complement(inst, MaskPair::ones(inst), Channel::edges, rng, 0.0);
        for (double w : c.edge_weights) CHECK(w == 0.0);
        CHECK(c.features == inst.features);
    }
    SUBCASE("an empty mask keeps the original graph") {
        const auto c = sample_complement(inst, MaskPair::constant(inst, 0.0, 1.0), Channel::edges, rng, 0.0);
        for (std::size_t i = 0; i < base.size(); ++i) CHECK(c.edge_weights[i] == base[i]);
    }
    SUBCASE("half masks with noise stay in range and average one half") {
        const auto unit = SparseGraph::undirected(inst.graph.num_nodes(), inst.graph.edges());
        const auto plain = build_instance(unit, inst.features, inst.task, inst.model);
        double sum = 0.0;
        std::size_t count = 0;
        for (int s = 0; s < 2000; ++s) {
            const auto c = sample_complement(plain, MaskPair::constant(plain, 0.5, 1.0), Channel::edges, rng, 0.5);
            for (double w : c.edge_weights) {
                CHECK(w >= 0.0);
                CHECK(w <= 1.0);
                sum += w;
                ++count;
            }
        }
        CHECK(sum / count == doctest::Approx(0.5).epsilon(0.01));
    }
    SUBCASE("the channel not perturbed keeps its factual mask") {
        const auto m = MaskPair::constant(inst, 0.3, 0.6);
        const auto c = sample_complement(inst, m, Channel::edges, rng, 0.5);
        CHECK((c.features - 0.6 * inst.features).cwiseAbs().maxCoeff() < 1e-15);
        const auto f = sample_complement(inst, m, Channel::features, rng, 0.5);
        for (std::size_t i = 0; i < base.size(); ++i) CHECK(f.edge_weights[i] == doctest::Approx(0.3 * base[i]));
    }
    SUBCASE("negative noise width") {
        CHECK_THROWS_AS(sample_complement(inst, MaskPair::ones(inst), Channel::edges, rng, -0.1), std::invalid_argument);
    }
}

TEST_CASE("ps_term is the masked forward pass") {
    std::mt19937_64 rng(2);
    for (int t = 0; t < 6; ++t) {
        const auto inst = testing::random_instance(rng, 4 + t, t % 2 ? TaskKind::node : TaskKind::graph);
        CHECK(ps_term(inst, MaskPair::ones(inst)).value == inst.probs[inst.predicted]);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        MaskPair m = MaskPair::ones(inst);
        for (auto& x : m.edge_mask) x = u(rng);
        for (auto& x : m.node_mask) x = u(rng);
        const auto in = apply_masks(inst, m);
        const double f = forward(*inst.model, inst.graph, in.arc_weights, in.features, inst.task.readout()).probs[inst.predicted];
        CHECK(std::abs(ps_term(inst, m).value - f) <= 1e-12);
    }
}

TEST_CASE("pn_term examples") {
    std::mt19937_64 rng(3);
    SUBCASE("a constant model leaves 1 - 1/C") {
        auto inst = testing::random_instance(rng, 5, TaskKind::graph);
        inst = build_instance(inst.graph, inst.features, inst.task, zero_model(3, 3, TaskKind::graph));
        for (auto o : {Objective::pns_e, Objective::pns_ef}) {
            ExplainConfig c;
            c.objective = o;
            CHECK(pn_term(inst, MaskPair::constant(inst, 0.4, 0.7), c, rng).value == doctest::Approx(2.0 / 3.0));
            CHECK(pns_lower_bound(inst, MaskPair::constant(inst, 0.4, 0.7), c, rng).value == doctest::Approx(0.0));
        }
    }
    SUBCASE("without noise the edge complement is deterministic") {
        const auto inst = testing::random_instance(rng, 7, TaskKind::graph);
        ExplainConfig c;
        c.sigma_e = 0.0;
        MaskPair m = MaskPair::ones(inst);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (auto& x : m.edge_mask) x = u(rng);
        std::vector<double> w(inst.graph.num_edges());
        for (std::size_t i = 0; i < w.size(); ++i) w[i] = (1.0 - m.edge_mask[i]) * inst.graph.edge_weights()[i];
        const double expect = 1.0 - predicted_prob(inst, w, inst.features);
        CHECK(pn_term(inst, m, c, rng).value == doctest::Approx(expect).epsilon(1e-12));
    }
}

TEST_CASE("the bound is pn + ps - 1 for every objective family") {
    std::mt19937_64 rng(4);
    for (auto o : {Objective::pns_e, Objective::pns_ef}) {
        const auto inst = testing::random_instance(rng, 6, TaskKind::graph);
        ExplainConfig c;
        c.objective = o;
        c.mc_samples = 3;
        const auto noise = draw_noise(inst, c, rng);
        const auto m = MaskPair::constant(inst, 0.3, 0.8);
        const double pn = pn_term(inst, m, c, noise).value;
        const double ps = ps_term(inst, m).value;
        CHECK(std::abs(pns_lower_bound(inst, m, c, noise).value - (pn + ps - 1.0)) <= 1e-12);
    }
}

TEST_CASE("mask entropy") {
    const std::vector<double> binary{0.0, 1.0, 1.0, 0.0};
    CHECK(mask_entropy(binary) == 0.0);
    const std::vector<double> half(5, 0.5);
    CHECK(mask_entropy(half) == doctest::Approx(5.0 * std::log(2.0)));
}

TEST_CASE("overall_loss adds the regularizers to the negated objective") {
    std::mt19937_64 rng(5);
    const auto inst = testing::random_instance(rng, 5, TaskKind::graph);
    for (auto o : {Objective::pns_e, Objective::pn_e, Objective::ps_e, Objective::pns_ef}) {
        ExplainConfig c;
        c.objective = o;
        c.alpha_e = 0.1;
        c.beta_e = 0.3;
        c.alpha_f = 0.2;
        c.beta_f = 0.7;
        const auto z = MaskLogits::random(inst, 1.0, rng);
        const auto noise = draw_noise(inst, c, rng);
        const auto r = overall_loss(inst, z, c, noise);
        auto m = z.masks();
        const bool joint = uses_features(o);
        if (!joint) m.node_mask.assign(inst.graph.num_nodes(), 1.0);
        double expect = -r.objective;
        for (double x : m.edge_mask) expect += c.alpha_e * x;
        expect += c.beta_e * mask_entropy(m.edge_mask);
        if (joint) {
            for (double x : m.node_mask) expect += c.alpha_f * x;
            expect += c.beta_f * mask_entropy(m.node_mask);
        }
        CHECK(r.loss == doctest::Approx(expect).epsilon(1e-12));
        const double obj = o == Objective::pn_e ? pn_term(inst, m, c, noise).value
                           : o == Objective::ps_e ? ps_term(inst, m).value
                                                  : pns_lower_bound(inst, m, c, noise).value;
        CHECK(r.objective == doctest::Approx(obj).epsilon(1e-12));
        if (!joint) {
            for (double g : r.grad_logits.node) CHECK(g == 0.0);
        }
    }
}

TEST_CASE("mask-logit gradients match central differences") {
    std::mt19937_64 rng(6);
    for (int t = 0; t < 4; ++t) {
        const auto inst = testing::random_instance(rng, 4 + t, t % 2 ? TaskKind::node : TaskKind::graph);
        CHECK(testing::check_gradients(inst, rng).mask_error < 1e-3);
    }
}

TEST_CASE("extraction examples") {
    MaskPair m;
    m.edge_mask = {0.9, 0.1, 0.8};
    m.node_mask = {0.2, 0.6};
    SUBCASE("top-K") {
        const auto x = extract_explanation(m, ExtractionMode::top_k(2, 1));
        CHECK(x.edges == std::vector<EdgeId>{0, 2});
        CHECK(x.nodes == std::vector<NodeId>{1});
    }
    SUBCASE("threshold") {
        const auto x = extract_explanation(m, ExtractionMode::above(0.5));
        CHECK(x.edges == std::vector<EdgeId>{0, 2});
        CHECK(x.nodes == std::vector<NodeId>{1});
        CHECK(extract_explanation(m, ExtractionMode::above(0.9)).edges.empty());
    }
    SUBCASE("ties go to the lower id") {
        MaskPair t;
        t.edge_mask = {0.7, 0.7};
        t.node_mask = {0.5};
        CHECK(extract_explanation(t, ExtractionMode::top_k(1)).edges == std::vector<EdgeId>{0});
    }
    SUBCASE("errors") {
        CHECK_THROWS_AS(extract_explanation(m, ExtractionMode::top_k(4, 1)), std::invalid_argument);
        CHECK_THROWS_AS(extract_explanation(m, ExtractionMode::top_k(0, 1)), std::invalid_argument);
        CHECK_THROWS_AS(extract_explanation(m, ExtractionMode::above(1.5)), std::invalid_argument);
    }
}

TEST_CASE("explain with zero epochs reports the initial masks") {
    std::mt19937_64 rng(7);
    const auto inst = testing::random_instance(rng, 6, TaskKind::graph);
    ExplainConfig c;
    c.epochs = 0;
    const auto ex = explain(inst, c);
    CHECK(ex.losses.empty());
    for (double m : ex.masks.edge_mask) CHECK(m == doctest::Approx(0.5).epsilon(1e-3));
    for (double m : ex.masks.node_mask) CHECK(m == 1.0);
    CHECK(ex.extracted_nodes.empty());
}

TEST_CASE("explain is deterministic and keeps everything in range") {
    std::mt19937_64 rng(8);
    for (auto o : {Objective::pns_e, Objective::pns_ef, Objective::pn_e, Objective::ps_ef}) {
        const auto inst = testing::random_instance(rng, 7, TaskKind::node);
        ExplainConfig c;
        c.objective = o;
        c.epochs = 60;
        c.seed = 3;
        const auto a = explain(inst, c);
        const auto b = explain(inst, c);
        CHECK(a.masks.edge_mask == b.masks.edge_mask);
        CHECK(a.masks.node_mask == b.masks.node_mask);
        CHECK(a.pns_lb == b.pns_lb);
        CHECK(a.losses.size() == 60);
        for (double m : a.masks.edge_mask) CHECK((m >= 0.0 && m <= 1.0));
        for (double m : a.masks.node_mask) CHECK((m >= 0.0 && m <= 1.0));
        CHECK(a.pns_lb >= 0.0);
        CHECK(a.pns_lb <= 1.0);
        CHECK(a.pns_lb == std::max(0.0, a.pns_raw));
        CHECK(a.pns_raw == doctest::Approx(a.pn_lb + a.ps_lb - 1.0));
        CHECK(a.mapping.nodes[a.explained.task.target] == inst.task.target);
        CHECK(a.explained.predicted == inst.predicted);
    }
    ExplainConfig bad;
    bad.p00 = 0.9;
    CHECK_THROWS_AS(explain(testing::random_instance(rng, 4, TaskKind::graph), bad), std::invalid_argument);
}

TEST_CASE("explanations raise the bound on Tree-Cycles") {
    const auto d = generate_tree_cycles(0);
    TrainConfig tc;
    tc.epochs = 300;
    tc.learning_rate = 0.01;
    tc.log_every = 1000;
    auto model = std::make_shared<const GcnParams>(train(d, tc).params);
    auto cfg = ExplainConfig::preset("tree-cycles", Objective::pns_e);
    cfg.epochs = 300;
    const auto motif = d.ground_truth.motif_nodes();
    int improved = 0;
    const int total = 20;
    for (int i = 0; i < total; ++i) {
        const auto inst = node_instance(d, model, motif[static_cast<std::size_t>(i) * 17 % motif.size()]);
        const auto ex = explain(inst, cfg);
        ExplainConfig start = cfg;
        start.epochs = 0;
        if (ex.pns_raw >= explain(inst, start).pns_raw - 1e-9) ++improved;
    }
    CHECK(improved >= 19);
}

TEST_CASE("oracle examples") {
    SUBCASE("an edge that alone decides the class scores one") {
        const auto inst = switch_instance();
        REQUIRE(inst.predicted == 0);
        const std::vector<EdgeId> all{0};
        CHECK(oracle_pns_lb(inst, all) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(oracle_pns_lb(inst, std::vector<EdgeId>{}) == 0.0);
    }
    SUBCASE("a constant model scores zero") {
        std::mt19937_64 rng(9);
        auto inst = testing::random_instance(rng, 5, TaskKind::graph);
        inst = build_instance(inst.graph, inst.features, inst.task, zero_model(3, 3, TaskKind::graph));
        const auto best = oracle_best_edges(inst);
        CHECK(best.value == doctest::Approx(0.0));
        const std::vector<NodeId> nodes{0, 2};
        CHECK(oracle_pns_lb(inst, best.edges, &nodes) == doctest::Approx(0.0));
    }
    SUBCASE("the subset table agrees with direct evaluation") {
        std::mt19937_64 rng(10);
        const auto inst = testing::random_instance(rng, 5, TaskKind::graph);
        const auto best = oracle_best_edges(inst);
        const std::size_t m = inst.graph.num_edges();
        REQUIRE(best.subset_values.size() == (1u << m));
        for (std::uint32_t s = 0; s < best.subset_values.size(); ++s) {
            std::vector<EdgeId> edges;
            for (std::size_t i = 0; i < m; ++i) {
                if ((s >> i) & 1u) edges.push_back(static_cast<EdgeId>(i));
            }
            CHECK(best.subset_values[s] == doctest::Approx(oracle_pns_lb(inst, edges)).epsilon(1e-12));
            CHECK(best.subset_values[s] <= best.value + 1e-15);
        }
    }
    SUBCASE("triangle with a pendant edge on the toy detector") {
        const auto toy = testing::triangle_toy(100, 10);
        const std::vector<Edge> e{{0, 1}, {1, 2}, {0, 2}, {2, 3}};
        const auto inst = build_instance(SparseGraph::undirected(4, e), FeatureMatrix::Ones(4, 2), Task::graph(1), toy.model);
        const auto best = oracle_best_edges(inst);
        CHECK(inst.predicted == 1);
        CHECK(best.value == doctest::Approx(0.10266171725496498).epsilon(1e-9));
        CHECK(best.edges == std::vector<EdgeId>{0, 1, 2});
    }
    SUBCASE("instances too large to enumerate") {
        std::mt19937_64 rng(11);
        const auto inst = testing::random_instance(rng, 14, TaskKind::graph);
        CHECK_THROWS_AS(oracle_best_edges(inst), std::invalid_argument);
    }
}

TEST_CASE("toy SCM examples") {
    SUBCASE("deterministic and monotone") {
        const auto r = toy_scm_pns({{1.0}, {0}, {1}, 0});
        CHECK(r.exact == 1.0);
        CHECK(r.bound == 1.0);
        CHECK(r.monotone);
    }
    SUBCASE("anti-correlated halves") {
        const auto r = toy_scm_pns({{0.5, 0.5}, {0, 1}, {1, 0}, 0});
        CHECK(r.exact == 0.5);
        CHECK(r.bound == 0.0);
        CHECK(!r.monotone);
    }
    SUBCASE("independent outcomes") {
        const double p = 0.25;
        const auto r = toy_scm_pns({{p * p, p * (1 - p), (1 - p) * p, (1 - p) * (1 - p)}, {0, 0, 1, 1}, {0, 1, 0, 1}, 0});
        CHECK(r.exact == doctest::Approx(p * (1 - p)));
        CHECK(r.bound == 0.0);
    }
    SUBCASE("malformed tables") {
        CHECK_THROWS_AS(toy_scm_pns({{0.5, 0.5}, {0}, {1, 1}, 0}), std::invalid_argument);
        CHECK_THROWS_AS(toy_scm_pns({{0.5, 0.6}, {0, 0}, {1, 1}, 0}), std::invalid_argument);
        CHECK_THROWS_AS(toy_scm_pns({{}, {}, {}, 0}), std::invalid_argument);
    }
}

TEST_CASE("the bound never exceeds the exact value and is tight under monotonicity") {
    const auto s = testing::lemma_suite(1000, 12);
    CHECK(s.tables == 1000);
    CHECK(s.monotone >= 500);
    CHECK(s.bound_violations == 0);
    CHECK(s.equality_violations == 0);
}

TEST_CASE("presets") {
    const auto ba = ExplainConfig::preset("ba-shapes", Objective::pns_e);
    CHECK(ba.alpha_e == 5e-3);
    CHECK(ba.beta_e == 1.0);
    CHECK(ba.epochs == 1000);
    const auto tc = ExplainConfig::preset("Tree-Cycles", Objective::pns_ef);
    CHECK(tc.alpha_e == 1e-2);
    CHECK(tc.alpha_f == 1e-3);
    const auto mu = ExplainConfig::preset("mutagenicity", Objective::pns_e);
    CHECK(mu.alpha_e == 1e-4);
    CHECK(mu.beta_e == 1e-3);
    CHECK(mu.epochs == 500);
    const auto ms = ExplainConfig::preset("MSRC-21", Objective::pns_ef);
    CHECK(ms.alpha_e == 5e-4);
    CHECK(ms.beta_f == 1.0);
    CHECK(ExplainConfig::preset("msrc_21", Objective::pns_e).alpha_e == 1e-3);
    CHECK_THROWS_AS(ExplainConfig::preset("cora", Objective::pns_e), std::invalid_argument);
}

TEST_CASE("configuration validation and objective names") {
    ExplainConfig c;
    CHECK_NOTHROW(c.validate());
    c.alpha_e = -1.0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = {};
    c.mc_samples = 0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = {};
    c.extraction = ExtractionMode::top_k(0);
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    CHECK(parse_objective("PNS_e") == Objective::pns_e);
    CHECK(parse_objective("pn-ef") == Objective::pn_ef);
    CHECK(to_string(parse_objective("ps_e")) == "ps-e");
    CHECK_THROWS_AS(parse_objective("gnnexplainer"), std::invalid_argument);
    CHECK(uses_features(Objective::pns_ef));
    CHECK(!uses_features(Objective::pns_e));
}
