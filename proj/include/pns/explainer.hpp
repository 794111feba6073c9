#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "pns/instance.hpp"

namespace pns {

enum class Objective { pns_e, pns_ef, pn_ef, ps_ef, pn_e, ps_e };

/// True for the joint edge + node-feature objectives.
bool uses_features(Objective objective);
std::string to_string(Objective objective);
/// Accepts "pns-e", "pns_e", "PNS_e" and so on. Throws std::invalid_argument.
Objective parse_objective(const std::string& text);

struct ExtractionMode {
    enum class Kind { top_k, threshold };
    Kind kind = Kind::threshold;
    std::size_t edge_k = 0;
    std::size_t node_k = 0;
    double threshold = 0.5;

    static ExtractionMode top_k(std::size_t edge_k, std::size_t node_k = 0) {
        return {Kind::top_k, edge_k, node_k == 0 ? edge_k : node_k, 0.5};
    }
    static ExtractionMode above(double t) { return {Kind::threshold, 0, 0, t}; }
};

struct ExplainConfig {
    Objective objective = Objective::pns_e;
    double alpha_e = 5e-3;
    double beta_e = 1.0;
    double alpha_f = 5e-3;
    double beta_f = 1.0;
    int epochs = 1000;
    double learning_rate = 0.01;
    int mc_samples = 1;
    double sigma_e = 0.5;
    double sigma_f = 0.5;
    double p00 = 1.0 / 3.0;
    double p01 = 1.0 / 3.0;
    double p10 = 1.0 / 3.0;
    double init_std = 1e-4;  // spread of the initial logits
    int report_samples = 32; // draws used for the final bound values
    ExtractionMode extraction;
    std::uint64_t seed = 0;

    /// Throws std::invalid_argument when a field is out of range.
    void validate() const;

    /// Hyper-parameters tuned per benchmark; `dataset` is one of ba-shapes,
    /// tree-cycles, tree-grid, mutagenicity, msrc_21.
    static ExplainConfig preset(const std::string& dataset, Objective objective);
};

/// Unconstrained mask parameters; masks are their logistic sigmoid.
struct MaskLogits {
    std::vector<double> edge;
    std::vector<double> node;

    MaskPair masks() const;
    static MaskLogits random(const Instance& instance, double stddev, std::mt19937_64& rng);
};

/// d(value)/d(mask entry) for each logical edge and node.
struct MaskGradient {
    std::vector<double> edge;
    std::vector<double> node;
};

struct TermResult {
    double value = 0.0;
    MaskGradient grad;
};

enum class Channel { edges, features, both };

/// One uniform draw per logical edge and per node.
struct NoiseDraw {
    std::vector<double> edge;
    std::vector<double> node;
};

/// Frozen draws for the three complement expectations, `mc_samples` each.
/// Edge-only objectives use `edges` alone.
struct ComplementNoise {
    std::vector<NoiseDraw> both;
    std::vector<NoiseDraw> edges;
    std::vector<NoiseDraw> features;
};

ComplementNoise draw_noise(const Instance& instance, const ExplainConfig& config, std::mt19937_64& rng);

struct ComplementSample {
    std::vector<double> edge_weights;  // per logical edge
    FeatureMatrix features;
    NoiseDraw noise;
};

/// Complement of the masked event: clamp(1 - M + eps, 0, 1) scales the
/// selected channel, the other channel keeps its masked value M * (.).
ComplementSample sample_complement(const Instance& instance, const MaskPair& masks, Channel which,
                                   std::mt19937_64& rng, double sigma);
ComplementSample complement_from_noise(const Instance& instance, const MaskPair& masks, Channel which,
                                       const NoiseDraw& noise);

/// Probability of the predicted class under the factually masked inputs.
TermResult ps_term(const Instance& instance, const MaskPair& masks);
/// One minus the expected predicted-class probability under complements.
/// Joint objectives mix the three sub-events with the configured priors;
/// edge-only objectives use the edge complement with factual features.
TermResult pn_term(const Instance& instance, const MaskPair& masks, const ExplainConfig& config,
                   const ComplementNoise& noise);
TermResult pn_term(const Instance& instance, const MaskPair& masks, const ExplainConfig& config, std::mt19937_64& rng);
/// pn_term + ps_term - 1, unclamped.
TermResult pns_lower_bound(const Instance& instance, const MaskPair& masks, const ExplainConfig& config,
                           const ComplementNoise& noise);
TermResult pns_lower_bound(const Instance& instance, const MaskPair& masks, const ExplainConfig& config,
                           std::mt19937_64& rng);

/// Sum of binary entropies, 0 ln 0 = 0.
double mask_entropy(std::span<const double> mask);

struct LossResult {
    double loss = 0.0;
    double objective = 0.0;  // unclamped value of the configured objective
    double pn = 0.0;
    double ps = 0.0;
    MaskGradient grad_masks;   // dL/dM
    MaskGradient grad_logits;  // dL/dz
};

/// -objective + alpha_e |M_e|_1 + beta_e Ent(M_e) [+ the same on M_f for
/// joint objectives]. Edge-only objectives hold M_f at one.
LossResult overall_loss(const Instance& instance, const MaskLogits& logits, const ExplainConfig& config,
                        const ComplementNoise& noise);

struct Extraction {
    std::vector<EdgeId> edges;
    std::vector<NodeId> nodes;
};

/// Top-K (ties to the lower id) or strict threshold selection. Throws
/// std::invalid_argument for K larger than the mask or t outside [0,1].
Extraction extract_explanation(const MaskPair& masks, const ExtractionMode& mode);

struct Explanation {
    Objective objective = Objective::pns_e;
    Instance explained;       // k-hop subgraph for node tasks, the instance itself otherwise
    SubgraphMapping mapping;  // explained ids -> original ids
    MaskPair masks;
    std::vector<EdgeId> extracted_edges;  // explained ids
    std::vector<NodeId> extracted_nodes;  // empty for edge-only objectives
    double pns_lb = 0.0;   // clamped at 0
    double pns_raw = 0.0;  // pn + ps - 1
    double pn_lb = 0.0;
    double ps_lb = 0.0;
    std::vector<double> losses;
    std::vector<double> objectives;

    std::vector<EdgeId> original_edges() const;
    std::vector<NodeId> original_nodes() const;
};

class ExplainDiverged : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Adam on the mask logits with fresh complement draws every epoch.
Explanation explain(const Instance& instance, const ExplainConfig& config);

/// Exact bound for a binary explanation: the complement is uniform over
/// every other edge subset (and node subset when `nodes` is given, mixed
/// over the three sub-events with equal priors). Limited to 12 edges and
/// 12 nodes.
double oracle_pns_lb(const Instance& instance, std::span<const EdgeId> edges, const std::vector<NodeId>* nodes = nullptr);

struct OracleOptimum {
    std::vector<EdgeId> edges;
    double value = 0.0;
    std::vector<double> subset_values;  // indexed by edge-subset bitmask
};

/// Best edge-only binary explanation by enumerating every subset.
OracleOptimum oracle_best_edges(const Instance& instance);

/// A binary-treatment SCM given as a table over latent states.
struct ToyScm {
    std::vector<double> prior;
    std::vector<int> outcome_event;       // Y under the explanation event
    std::vector<int> outcome_complement;  // Y under its complement
    int predicted = 0;
};

struct ToyPns {
    double exact = 0.0;
    double bound = 0.0;
    bool monotone = false;
};

/// Throws std::invalid_argument on ragged tables or a prior that is not a
/// distribution.
ToyPns toy_scm_pns(const ToyScm& scm);

}  // namespace pns
