#include <doctest.h>

#include <cmath>
#include <random>

#include "checks.hpp"
#include "pns/metrics.hpp"

using namespace pns;

TEST_CASE("charact examples") {
    CHECK(charact(1.0, 0.0) == 1.0);
    CHECK(charact(0.0, 1.0) == 0.0);
    CHECK(charact(0.0, 0.0) == 0.0);
    CHECK(charact(0.9790, 0.0) == doctest::Approx(0.9894).epsilon(1e-4));
    CHECK(charact(0.5, 0.5) == doctest::Approx(0.5));
    CHECK(charact(0.6, 0.2) == doctest::Approx(2 * 0.6 * 0.8 / 1.4));
}

TEST_CASE("fidelity with trivial masks") {
    std::mt19937_64 rng(1);
    std::vector<Instance> insts;
    std::vector<MaskPair> full, empty;
    for (int i = 0; i < 8; ++i) {
        insts.push_back(testing::random_instance(rng, 5 + i % 3, i % 2 ? TaskKind::node : TaskKind::graph));
        full.push_back(MaskPair::ones(insts.back()));
        empty.push_back(MaskPair::constant(insts.back(), 0.0, 1.0));
    }
    const auto keep_all = fidelity(insts, full, true);
    CHECK(keep_all.fid_minus == 0.0);
    const auto keep_none = fidelity(insts, empty, true);
    CHECK(keep_none.fid_plus == 0.0);
    CHECK(keep_all.fid_plus == keep_none.fid_minus);

    const std::vector<MaskPair> short_list(full.begin(), full.begin() + 3);
    CHECK_THROWS_AS(fidelity(insts, short_list, true), std::invalid_argument);
}

TEST_CASE("discrete and continuous fidelity agree on binary masks") {
    std::mt19937_64 rng(2);
    std::vector<Instance> insts;
    std::vector<MaskPair> masks;
    for (int i = 0; i < 10; ++i) {
        insts.push_back(testing::random_instance(rng, 6, TaskKind::graph));
        MaskPair m = MaskPair::ones(insts.back());
        for (auto& x : m.edge_mask) x = rng() & 1u ? 1.0 : 0.0;
        masks.push_back(std::move(m));
    }
    EvaluationInput in;
    in.instances = insts;
    in.masks = masks;
    const auto r = evaluate(in);
    CHECK(r.fid_plus_c == r.fid_plus_d);
    CHECK(r.fid_minus_c == r.fid_minus_d);
    CHECK(!r.has_ground_truth);
    CHECK(r.n == 10);
}

TEST_CASE("binarize is strict") {
    MaskPair m;
    m.edge_mask = {0.5, 0.51, 0.2};
    m.node_mask = {1.0, 0.0};
    const auto b = binarize(m);
    CHECK(b.edge_mask == std::vector<double>{0.0, 1.0, 0.0});
    CHECK(b.node_mask == std::vector<double>{1.0, 0.0});
}

TEST_CASE("top-K accuracy examples") {
    const std::vector<double> mask{0.9, 0.8, 0.1, 0.7, 0.2};
    const std::vector<std::uint32_t> truth{0, 3};
    CHECK(topk_accuracy(mask, truth, 2) == 0.5);
    CHECK(topk_accuracy(mask, truth, 3) == 1.0);
    CHECK(topk_accuracy(mask, truth, 1) == 1.0);
    const std::vector<std::uint32_t> tail{2, 4};
    CHECK(topk_accuracy(mask, tail, 2) == 0.0);
    const std::vector<double> flat(4, 0.5);
    const std::vector<std::uint32_t> first{0};
    CHECK(topk_accuracy(flat, first, 1) == 1.0);

    const std::vector<std::vector<double>> masks{mask, mask};
    const std::vector<std::vector<std::uint32_t>> truths{truth, tail};
    CHECK(topk_accuracy(masks, truths, 2) == 0.25);
    const std::vector<std::vector<std::uint32_t>> none{truth, {}};
    CHECK_THROWS_AS(topk_accuracy(masks, none, 2), std::invalid_argument);
}

TEST_CASE("top-K with random tie breaking matches the hypergeometric mean") {
    const std::vector<double> flat(60, 0.5);
    const std::vector<std::uint32_t> truth{3, 11, 17, 29, 41, 58};
    std::mt19937_64 rng(3);
    double sum = 0.0;
    const int draws = 4000;
    for (int i = 0; i < draws; ++i) sum += topk_accuracy(flat, truth, 6, &rng);
    CHECK(sum / draws == doctest::Approx(0.1).epsilon(0.1));
}

TEST_CASE("ROC AUC examples") {
    const std::vector<double> perfect{0.9, 0.8, 0.1, 0.2};
    const std::vector<std::uint32_t> pos{0, 1};
    CHECK(roc_auc(perfect, pos) == 1.0);
    const std::vector<std::uint32_t> wrong{2, 3};
    CHECK(roc_auc(perfect, wrong) == 0.0);
    const std::vector<double> constant(4, 0.3);
    CHECK(roc_auc(constant, pos) == 0.5);
    const std::vector<double> mixed{0.9, 0.2, 0.5, 0.1};
    CHECK(roc_auc(mixed, pos) == 0.75);
    std::vector<double> cubed;
    for (double x : mixed) cubed.push_back(std::exp(3.0 * x) - 7.0);
    CHECK(roc_auc(cubed, pos) == roc_auc(mixed, pos));
    const std::vector<std::uint32_t> every{0, 1, 2, 3};
    CHECK_THROWS_AS(roc_auc(mixed, every), std::invalid_argument);
}

TEST_CASE("averaged AUC skips instances without both classes") {
    const std::vector<std::vector<double>> masks{{0.9, 0.1}, {0.2, 0.8}, {0.5, 0.5}};
    const std::vector<std::vector<std::uint32_t>> truths{{0}, {0}, {0, 1}};
    CHECK(roc_auc(masks, truths) == 0.5);
    const std::vector<std::vector<std::uint32_t>> useless{{0, 1}, {0, 1}, {0, 1}};
    CHECK_THROWS_AS(roc_auc(masks, useless), std::invalid_argument);
}

TEST_CASE("summaries and CSV rows") {
    const std::vector<double> one{0.4};
    CHECK(summarize(one).mean == 0.4);
    CHECK(summarize(one).half_width == 0.0);
    const std::vector<double> two{1.0, 3.0};
    const auto s = summarize(two);
    CHECK(s.mean == 2.0);
    CHECK(s.half_width == doctest::Approx(1.96 * std::sqrt(2.0) / std::sqrt(2.0)));
    CHECK_THROWS_AS(summarize(std::span<const double>{}), std::invalid_argument);

    MetricReport r;
    r.fid_plus_c = 0.75;
    r.n = 12;
    const std::vector<MetricReport> runs{r};
    const auto csv = metric_csv_rows("ba-shapes", "pns-e", runs);
    CHECK(csv.find("ba-shapes,pns-e,fid_plus_c,0.750000,0.000000,1,12\n") != std::string::npos);
    CHECK(csv.find("topk_accuracy") == std::string::npos);
    r.has_ground_truth = true;
    const std::vector<MetricReport> with_truth{r};
    CHECK(metric_csv_rows("ba-shapes", "pns-e", with_truth).find("roc_auc") != std::string::npos);
    CHECK(metric_csv_header() == "dataset,method,metric,mean,half_width,runs,instances\n");
}
