#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "pns/instance.hpp"

namespace pns {

/// Whether the prediction left the predicted class when only the complement
/// of the explanation is kept (plus) or when only the explanation is kept
/// (minus).
struct FidelityFlags {
    bool plus_changed = false;
    bool minus_changed = false;
};

/// Edge-only explanations leave the features at their factual values in
/// both evaluations. Joint explanations fill removed feature rows from
/// `baseline` (zeros when null).
FidelityFlags fidelity_flags(const Instance& instance, const MaskPair& masks, bool edge_only,
                             const FeatureMatrix* baseline = nullptr);

struct FidelityPair {
    double fid_plus = 0.0;
    double fid_minus = 0.0;
};

/// Throws std::invalid_argument when the mask and instance counts differ or
/// when `baselines` is non-empty with the wrong count.
FidelityPair fidelity(std::span<const Instance> instances, std::span<const MaskPair> masks, bool edge_only,
                      std::span<const FeatureMatrix> baselines = {});

/// Entries strictly above `t` become 1, the rest 0.
MaskPair binarize(const MaskPair& masks, double t = 0.5);

/// Harmonic combination of Fid+ and 1 - Fid-, zero when both vanish.
double charact(double fid_plus, double fid_minus);

/// |top-K of mask  intersect  truth| / min(K, |truth|). Ties fall to the lower
/// index unless `tie_rng` is given, in which case they are broken by a
/// uniformly random permutation.
double topk_accuracy(std::span<const double> mask, std::span<const std::uint32_t> truth, std::size_t k,
                     std::mt19937_64* tie_rng = nullptr);
/// Mean over instances. Throws std::invalid_argument when the counts differ
/// or an instance has no ground truth.
double topk_accuracy(std::span<const std::vector<double>> masks, std::span<const std::vector<std::uint32_t>> truths,
                     std::size_t k);

/// Probability that a positive outranks a negative, ties counting half.
/// Throws std::invalid_argument unless both classes are present.
double roc_auc(std::span<const double> scores, std::span<const std::uint32_t> positives);
/// Per-instance AUC averaged over the instances where it is defined.
double roc_auc(std::span<const std::vector<double>> masks, std::span<const std::vector<std::uint32_t>> truths);

struct MetricReport {
    double fid_plus_c = 0.0, fid_minus_c = 0.0, charact_c = 0.0;
    double fid_plus_d = 0.0, fid_minus_d = 0.0, charact_d = 0.0;
    double topk_accuracy = 0.0;
    double roc_auc = 0.0;
    bool has_ground_truth = false;
    std::size_t n = 0;
};

struct EvaluationInput {
    std::span<const Instance> instances;
    std::span<const MaskPair> masks;
    bool edge_only = true;
    /// Ground-truth edge ids per instance, in that instance's numbering.
    /// Empty disables the accuracy metrics.
    std::span<const std::vector<std::uint32_t>> truths;
    std::size_t k = 6;
    double threshold = 0.5;
};

MetricReport evaluate(const EvaluationInput& input);

struct Interval {
    double mean = 0.0;
    double half_width = 0.0;  // normal 95% half-width, 0 for one sample
};

Interval summarize(std::span<const double> values);

/// One CSV row per metric with mean and 95% half-width over `runs`.
std::string metric_csv_header();
std::string metric_csv_rows(const std::string& dataset, const std::string& method, std::span<const MetricReport> runs);

}  // namespace pns
