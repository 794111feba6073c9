#include "pns/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace pns {

namespace {

int argmax(const Vector& v) {
    Eigen::Index i = 0;
    v.maxCoeff(&i);
    return static_cast<int>(i);
}

int predict_with(const Instance& inst, std::span<const double> edge_scale, const FeatureMatrix& features) {
    const auto arcs = inst.graph.arcs();
    const auto base = inst.graph.edge_weights();
    std::vector<double> w(arcs.size());
    for (std::size_t a = 0; a < arcs.size(); ++a) w[a] = base[arcs[a].edge] * edge_scale[arcs[a].edge];
    return argmax(predict(inst, w, features));
}

}  // namespace

FidelityFlags fidelity_flags(const Instance& instance, const MaskPair& masks, bool edge_only,
                             const FeatureMatrix* baseline) {
    masks.validate(instance);
    const auto m = masks.edge_mask.size();
    std::vector<double> keep(masks.edge_mask), drop(m);
    for (std::size_t i = 0; i < m; ++i) drop[i] = 1.0 - keep[i];

    FeatureMatrix kept = instance.features;
    FeatureMatrix removed = instance.features;
    if (!edge_only) {
        if (baseline && (baseline->rows() != kept.rows() || baseline->cols() != kept.cols())) {
            throw std::invalid_argument("baseline features do not match the instance shape");
        }
        for (Eigen::Index v = 0; v < kept.rows(); ++v) {
            const double mf = masks.node_mask[static_cast<std::size_t>(v)];
            kept.row(v) *= mf;
            removed.row(v) *= 1.0 - mf;
            if (baseline) {
                kept.row(v) += (1.0 - mf) * baseline->row(v);
                removed.row(v) += mf * baseline->row(v);
            }
        }
    }
    FidelityFlags f;
    f.plus_changed = predict_with(instance, drop, removed) != instance.predicted;
    f.minus_changed = predict_with(instance, keep, kept) != instance.predicted;
    return f;
}

FidelityPair fidelity(std::span<const Instance> instances, std::span<const MaskPair> masks, bool edge_only,
                      std::span<const FeatureMatrix> baselines) {
    if (instances.size() != masks.size()) {
        throw std::invalid_argument("fidelity needs one mask pair per instance (" + std::to_string(masks.size()) +
                                    " masks for " + std::to_string(instances.size()) + " instances)");
    }
    if (!baselines.empty() && baselines.size() != instances.size()) {
        throw std::invalid_argument("fidelity needs one baseline per instance");
    }
    if (instances.empty()) throw std::invalid_argument("fidelity needs at least one instance");
    std::size_t plus = 0, minus = 0;
    for (std::size_t i = 0; i < instances.size(); ++i) {
        const auto f = fidelity_flags(instances[i], masks[i], edge_only, baselines.empty() ? nullptr : &baselines[i]);
        plus += f.plus_changed;
        minus += f.minus_changed;
    }
    const double n = static_cast<double>(instances.size());
    return {plus / n, minus / n};
}

MaskPair binarize(const MaskPair& masks, double t) {
    MaskPair out = masks;
    for (auto& m : out.edge_mask) m = m > t ? 1.0 : 0.0;
    for (auto& m : out.node_mask) m = m > t ? 1.0 : 0.0;
    return out;
}

double charact(double fid_plus, double fid_minus) {
    const double keep = 1.0 - fid_minus;
    const double denom = fid_plus + keep;
    return denom == 0.0 ? 0.0 : 2.0 * fid_plus * keep / denom;
}

double topk_accuracy(std::span<const double> mask, std::span<const std::uint32_t> truth, std::size_t k,
                     std::mt19937_64* tie_rng) {
    if (k < 1) throw std::invalid_argument("top-K size must be positive");
    if (truth.empty()) throw std::invalid_argument("top-K accuracy needs ground truth");
    std::vector<std::uint32_t> order(mask.size());
    std::iota(order.begin(), order.end(), 0u);
    if (tie_rng) std::shuffle(order.begin(), order.end(), *tie_rng);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return mask[a] > mask[b]; });
    const std::size_t take = std::min(k, order.size());
    std::size_t hit = 0;
    for (std::size_t i = 0; i < take; ++i) hit += std::find(truth.begin(), truth.end(), order[i]) != truth.end();
    return static_cast<double>(hit) / static_cast<double>(std::min(k, truth.size()));
}

double topk_accuracy(std::span<const std::vector<double>> masks, std::span<const std::vector<std::uint32_t>> truths,
                     std::size_t k) {
    if (masks.size() != truths.size() || masks.empty()) {
        throw std::invalid_argument("top-K accuracy needs one ground truth per mask");
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < masks.size(); ++i) sum += topk_accuracy(masks[i], truths[i], k);
    return sum / static_cast<double>(masks.size());
}

double roc_auc(std::span<const double> scores, std::span<const std::uint32_t> positives) {
    std::vector<char> label(scores.size(), 0);
    for (auto p : positives) {
        if (p >= scores.size()) throw std::out_of_range("ground-truth index outside the mask");
        label[p] = 1;
    }
    const auto pos = static_cast<std::size_t>(std::count(label.begin(), label.end(), 1));
    const std::size_t neg = scores.size() - pos;
    if (pos == 0 || neg == 0) throw std::invalid_argument("ROC-AUC needs both positive and negative entries");

    // Mann-Whitney statistic with average ranks for ties.
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return scores[a] < scores[b]; });
    double rank_sum = 0.0;
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
        const double avg = 0.5 * static_cast<double>(i + 1 + j);
        for (std::size_t t = i; t < j; ++t) {
            if (label[order[t]]) rank_sum += avg;
        }
        i = j;
    }
    const double p = static_cast<double>(pos);
    return (rank_sum - p * (p + 1.0) / 2.0) / (p * static_cast<double>(neg));
}

double roc_auc(std::span<const std::vector<double>> masks, std::span<const std::vector<std::uint32_t>> truths) {
    if (masks.size() != truths.size() || masks.empty()) {
        throw std::invalid_argument("ROC-AUC needs one ground truth per mask");
    }
    double sum = 0.0;
    std::size_t used = 0;
    for (std::size_t i = 0; i < masks.size(); ++i) {
        std::vector<char> positive(masks[i].size(), 0);
        for (auto p : truths[i]) {
            if (p < positive.size()) positive[p] = 1;
        }
        const auto pos = static_cast<std::size_t>(std::count(positive.begin(), positive.end(), 1));
        if (pos == 0 || pos == positive.size()) continue;
        sum += roc_auc(masks[i], truths[i]);
        ++used;
    }
    if (used == 0) throw std::invalid_argument("ROC-AUC undefined: no instance has both positive and negative edges");
    return sum / static_cast<double>(used);
}

MetricReport evaluate(const EvaluationInput& input) {
    MetricReport r;
    r.n = input.instances.size();
    const auto c = fidelity(input.instances, input.masks, input.edge_only);
    std::vector<MaskPair> discrete;
    discrete.reserve(input.masks.size());
    for (const auto& m : input.masks) discrete.push_back(binarize(m, input.threshold));
    const auto d = fidelity(input.instances, discrete, input.edge_only);
    r.fid_plus_c = c.fid_plus;
    r.fid_minus_c = c.fid_minus;
    r.charact_c = charact(c.fid_plus, c.fid_minus);
    r.fid_plus_d = d.fid_plus;
    r.fid_minus_d = d.fid_minus;
    r.charact_d = charact(d.fid_plus, d.fid_minus);
    if (!input.truths.empty()) {
        std::vector<std::vector<double>> edge_masks;
        for (const auto& m : input.masks) edge_masks.push_back(m.edge_mask);
        r.topk_accuracy = topk_accuracy(edge_masks, input.truths, input.k);
        r.roc_auc = roc_auc(edge_masks, input.truths);
        r.has_ground_truth = true;
    }
    return r;
}

Interval summarize(std::span<const double> values) {
    if (values.empty()) throw std::invalid_argument("cannot summarize an empty sample");
    const double n = static_cast<double>(values.size());
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
    if (values.size() == 1) return {mean, 0.0};
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    return {mean, 1.96 * std::sqrt(ss / (n - 1.0)) / std::sqrt(n)};
}

std::string metric_csv_header() { return "dataset,method,metric,mean,half_width,runs,instances\n"; }

std::string metric_csv_rows(const std::string& dataset, const std::string& method, std::span<const MetricReport> runs) {
    if (runs.empty()) throw std::invalid_argument("no runs to report");
    struct Field {
        const char* name;
        double MetricReport::*member;
        bool needs_truth;
    };
    static constexpr Field fields[] = {
        {"fid_plus_c", &MetricReport::fid_plus_c, false}, {"fid_minus_c", &MetricReport::fid_minus_c, false},
        {"charact_c", &MetricReport::charact_c, false},   {"fid_plus_d", &MetricReport::fid_plus_d, false},
        {"fid_minus_d", &MetricReport::fid_minus_d, false}, {"charact_d", &MetricReport::charact_d, false},
        {"topk_accuracy", &MetricReport::topk_accuracy, true}, {"roc_auc", &MetricReport::roc_auc, true},
    };
    const bool truth = std::all_of(runs.begin(), runs.end(), [](const auto& r) { return r.has_ground_truth; });
    std::ostringstream out;
    out.precision(6);
    out << std::fixed;
    for (const auto& f : fields) {
        if (f.needs_truth && !truth) continue;
        std::vector<double> v;
        for (const auto& r : runs) v.push_back(r.*(f.member));
        const auto s = summarize(v);
        out << dataset << ',' << method << ',' << f.name << ',' << s.mean << ',' << s.half_width << ',' << runs.size()
            << ',' << runs.front().n << '\n';
    }
    return out.str();
}

}  // namespace pns
