#include "pns/explainer.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "pns/optim.hpp"
#include "pns/workflow.hpp"

namespace pns {

namespace {

constexpr std::size_t kOracleMaxEdges = 12;
constexpr std::size_t kOracleMaxNodes = 12;

double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

// Predicted-class probability and its derivatives with respect to a
// per-edge scale on E and a per-node scale on the rows of X.
struct Probe {
    double value = 0.0;
    std::vector<double> d_edge;
    std::vector<double> d_node;
};

Probe probe(const Instance& inst, std::span<const double> edge_scale, std::span<const double> node_scale,
            bool want_grad) {
    const auto arcs = inst.graph.arcs();
    const auto base = inst.graph.edge_weights();
    std::vector<double> arc_weights(arcs.size());
    for (std::size_t a = 0; a < arcs.size(); ++a) arc_weights[a] = base[arcs[a].edge] * edge_scale[arcs[a].edge];
    FeatureMatrix features = inst.features;
    for (Eigen::Index v = 0; v < features.rows(); ++v) features.row(v) *= node_scale[static_cast<std::size_t>(v)];

    auto res = forward(*inst.model, inst.graph, arc_weights, features, inst.task.readout());
    Probe out;
    out.value = res.probs[inst.predicted];
    if (!want_grad) return out;

    Vector upstream = Vector::Zero(res.probs.size());
    upstream[inst.predicted] = 1.0;
    const InputGradients g = backward_inputs(res.tape, *inst.model, upstream);
    out.d_edge.assign(inst.graph.num_edges(), 0.0);
    for (std::size_t a = 0; a < arcs.size(); ++a) out.d_edge[arcs[a].edge] += g.arc_weights[a] * base[arcs[a].edge];
    out.d_node.resize(inst.graph.num_nodes());
    for (Eigen::Index v = 0; v < features.rows(); ++v) {
        out.d_node[static_cast<std::size_t>(v)] = g.features.row(v).dot(inst.features.row(v));
    }
    return out;
}

double clamp01(double x) { return std::clamp(x, 0.0, 1.0); }

// Complement scale clamp(1 - m + eps) and its derivative in m.
void complement_scale(std::span<const double> mask, std::span<const double> eps, std::vector<double>& scale,
                      std::vector<double>& slope) {
    scale.resize(mask.size());
    slope.resize(mask.size());
    for (std::size_t i = 0; i < mask.size(); ++i) {
        const double raw = 1.0 - mask[i] + eps[i];
        scale[i] = clamp01(raw);
        slope[i] = (raw > 0.0 && raw < 1.0) ? -1.0 : 0.0;
    }
}

NoiseDraw uniform_draw(std::size_t edges, std::size_t nodes, double sigma_e, double sigma_f, std::mt19937_64& rng) {
    NoiseDraw d;
    d.edge.resize(edges);
    d.node.resize(nodes);
    std::uniform_real_distribution<double> ue(-sigma_e, sigma_e);
    std::uniform_real_distribution<double> uf(-sigma_f, sigma_f);
    for (auto& x : d.edge) x = sigma_e > 0.0 ? ue(rng) : 0.0;
    for (auto& x : d.node) x = sigma_f > 0.0 ? uf(rng) : 0.0;
    return d;
}

// Mean predicted-class probability over complement draws of one sub-event,
// with gradients folded back onto the mask entries.
TermResult expected_complement(const Instance& inst, const MaskPair& masks, Channel which,
                               std::span<const NoiseDraw> draws, bool factual_features) {
    const std::size_t m = inst.graph.num_edges();
    const std::size_t n = inst.graph.num_nodes();
    TermResult out;
    out.grad.edge.assign(m, 0.0);
    out.grad.node.assign(n, 0.0);
    if (draws.empty()) throw std::invalid_argument("complement expectation needs at least one draw");

    const std::vector<double> ones(n, 1.0);
    std::vector<double> e_scale, e_slope, f_scale, f_slope;
    const double inv = 1.0 / static_cast<double>(draws.size());
    for (const auto& d : draws) {
        const bool perturb_edges = which != Channel::features;
        const bool perturb_nodes = which != Channel::edges;
        if (perturb_edges) complement_scale(masks.edge_mask, d.edge, e_scale, e_slope);
        if (perturb_nodes) complement_scale(masks.node_mask, d.node, f_scale, f_slope);
        std::span<const double> es = perturb_edges ? std::span<const double>(e_scale) : masks.edge_mask;
        std::span<const double> ns = perturb_nodes ? std::span<const double>(f_scale)
                                     : factual_features ? std::span<const double>(ones)
                                                        : std::span<const double>(masks.node_mask);
        const Probe p = probe(inst, es, ns, true);
        out.value += inv * p.value;
        for (std::size_t i = 0; i < m; ++i) out.grad.edge[i] += inv * p.d_edge[i] * (perturb_edges ? e_slope[i] : 1.0);
        if (!factual_features) {
            for (std::size_t v = 0; v < n; ++v) out.grad.node[v] += inv * p.d_node[v] * (perturb_nodes ? f_slope[v] : 1.0);
        }
    }
    return out;
}

void axpy(MaskGradient& acc, double a, const MaskGradient& g) {
    for (std::size_t i = 0; i < acc.edge.size(); ++i) acc.edge[i] += a * g.edge[i];
    for (std::size_t i = 0; i < acc.node.size(); ++i) acc.node[i] += a * g.node[i];
}

MaskGradient zero_gradient(const Instance& inst) {
    return {std::vector<double>(inst.graph.num_edges(), 0.0), std::vector<double>(inst.graph.num_nodes(), 0.0)};
}

bool is_pn(Objective o) { return o == Objective::pn_e || o == Objective::pn_ef; }
bool is_ps(Objective o) { return o == Objective::ps_e || o == Objective::ps_ef; }

std::vector<std::uint32_t> select(std::span<const double> values, ExtractionMode::Kind kind, std::size_t k,
                                  double threshold, const char* what) {
    std::vector<std::uint32_t> out;
    if (kind == ExtractionMode::Kind::top_k) {
        if (k < 1 || k > values.size()) {
            throw std::invalid_argument(std::string("top-K size ") + std::to_string(k) + " invalid for " +
                                        std::to_string(values.size()) + " " + what);
        }
        std::vector<std::uint32_t> order(values.size());
        std::iota(order.begin(), order.end(), 0u);
        std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return values[a] > values[b]; });
        out.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k));
        std::sort(out.begin(), out.end());
    } else {
        if (!(threshold >= 0.0 && threshold <= 1.0)) throw std::invalid_argument("threshold must lie in [0,1]");
        for (std::uint32_t i = 0; i < values.size(); ++i) {
            if (values[i] > threshold) out.push_back(i);
        }
    }
    return out;
}

}  // namespace

bool uses_features(Objective objective) {
    return objective == Objective::pns_ef || objective == Objective::pn_ef || objective == Objective::ps_ef;
}

std::string to_string(Objective objective) {
    switch (objective) {
        case Objective::pns_e: return "pns-e";
        case Objective::pns_ef: return "pns-ef";
        case Objective::pn_ef: return "pn-ef";
        case Objective::ps_ef: return "ps-ef";
        case Objective::pn_e: return "pn-e";
        case Objective::ps_e: return "ps-e";
    }
    return "?";
}

Objective parse_objective(const std::string& text) {
    std::string key;
    for (char c : text) key += c == '_' ? '-' : static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    for (auto o : {Objective::pns_e, Objective::pns_ef, Objective::pn_ef, Objective::ps_ef, Objective::pn_e,
                   Objective::ps_e}) {
        if (key == to_string(o)) return o;
    }
    throw std::invalid_argument("unknown objective '" + text + "' (expected pns-e, pns-ef, pn-e, pn-ef, ps-e or ps-ef)");
}

void ExplainConfig::validate() const {
    auto require = [](bool ok, const char* msg) {
        if (!ok) throw std::invalid_argument(msg);
    };
    require(alpha_e >= 0.0 && beta_e >= 0.0 && alpha_f >= 0.0 && beta_f >= 0.0,
            "regularizer weights must be non-negative");
    require(epochs >= 0, "epoch count must be non-negative");
    require(learning_rate > 0.0 && std::isfinite(learning_rate), "step size must be positive");
    require(mc_samples >= 1 && report_samples >= 1, "sample counts must be positive");
    require(sigma_e >= 0.0 && sigma_f >= 0.0, "noise half-width must be non-negative");
    require(p00 >= 0.0 && p01 >= 0.0 && p10 >= 0.0, "complement priors must be non-negative");
    require(std::abs(p00 + p01 + p10 - 1.0) < 1e-9, "complement priors must sum to 1");
    require(init_std >= 0.0, "initial logit spread must be non-negative");
    if (extraction.kind == ExtractionMode::Kind::threshold) {
        require(extraction.threshold >= 0.0 && extraction.threshold <= 1.0, "threshold must lie in [0,1]");
    } else {
        require(extraction.edge_k >= 1, "top-K size must be positive");
    }
}

ExplainConfig ExplainConfig::preset(const std::string& dataset, Objective objective) {
    struct Row {
        const char* name;
        double ae, be;               // edge-only objectives
        double jae, jbe, jaf, jbf;   // joint objectives
        int epochs;
    };
    static constexpr Row rows[] = {
        {"ba-shapes", 5e-3, 1.0, 5e-3, 1.0, 5e-3, 1.0, 1000},
        {"tree-cycles", 1e-2, 1.0, 1e-2, 1.0, 1e-3, 1.0, 1000},
        {"tree-grid", 1e-2, 1.0, 1e-2, 1.0, 1e-2, 1.0, 1000},
        {"mutagenicity", 1e-4, 1e-3, 1e-4, 1e-3, 1e-4, 1e-3, 500},
        {"msrc_21", 1e-3, 1.0, 5e-4, 1.0, 5e-4, 1.0, 500},
    };
    std::string key;
    for (char c : dataset) key += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (key == "msrc-21") key = "msrc_21";
    for (const auto& r : rows) {
        if (key != r.name) continue;
        ExplainConfig c;
        c.objective = objective;
        c.epochs = r.epochs;
        if (uses_features(objective)) {
            c.alpha_e = r.jae;
            c.beta_e = r.jbe;
            c.alpha_f = r.jaf;
            c.beta_f = r.jbf;
        } else {
            c.alpha_e = r.ae;
            c.beta_e = r.be;
            c.alpha_f = 0.0;
            c.beta_f = 0.0;
        }
        return c;
    }
    throw std::invalid_argument("no preset for dataset '" + dataset + "'");
}

MaskPair MaskLogits::masks() const {
    MaskPair p;
    p.edge_mask.resize(edge.size());
    p.node_mask.resize(node.size());
    std::transform(edge.begin(), edge.end(), p.edge_mask.begin(), sigmoid);
    std::transform(node.begin(), node.end(), p.node_mask.begin(), sigmoid);
    return p;
}

MaskLogits MaskLogits::random(const Instance& instance, double stddev, std::mt19937_64& rng) {
    MaskLogits z;
    z.edge.resize(instance.graph.num_edges());
    z.node.resize(instance.graph.num_nodes());
    std::normal_distribution<double> dist(0.0, stddev);
    for (auto& x : z.edge) x = stddev > 0.0 ? dist(rng) : 0.0;
    for (auto& x : z.node) x = stddev > 0.0 ? dist(rng) : 0.0;
    return z;
}

ComplementNoise draw_noise(const Instance& instance, const ExplainConfig& config, std::mt19937_64& rng) {
    const auto m = instance.graph.num_edges();
    const auto n = instance.graph.num_nodes();
    ComplementNoise noise;
    for (int s = 0; s < config.mc_samples; ++s) {
        if (uses_features(config.objective)) {
            noise.both.push_back(uniform_draw(m, n, config.sigma_e, config.sigma_f, rng));
            noise.edges.push_back(uniform_draw(m, 0, config.sigma_e, 0.0, rng));
            noise.features.push_back(uniform_draw(0, n, 0.0, config.sigma_f, rng));
        } else {
            noise.edges.push_back(uniform_draw(m, 0, config.sigma_e, 0.0, rng));
        }
    }
    return noise;
}

ComplementSample complement_from_noise(const Instance& instance, const MaskPair& masks, Channel which,
                                       const NoiseDraw& noise) {
    masks.validate(instance);
    ComplementSample out;
    out.noise = noise;
    const auto base = instance.graph.edge_weights();
    out.edge_weights.resize(base.size());
    const bool edges = which != Channel::features;
    const bool nodes = which != Channel::edges;
    if (edges && noise.edge.size() != base.size()) throw std::invalid_argument("edge noise length mismatch");
    if (nodes && noise.node.size() != instance.graph.num_nodes()) throw std::invalid_argument("node noise length mismatch");
    for (std::size_t i = 0; i < base.size(); ++i) {
        const double s = edges ? clamp01(1.0 - masks.edge_mask[i] + noise.edge[i]) : masks.edge_mask[i];
        out.edge_weights[i] = s * base[i];
    }
    out.features = instance.features;
    for (Eigen::Index v = 0; v < out.features.rows(); ++v) {
        const auto i = static_cast<std::size_t>(v);
        const double s = nodes ? clamp01(1.0 - masks.node_mask[i] + noise.node[i]) : masks.node_mask[i];
        out.features.row(v) *= s;
    }
    return out;
}

ComplementSample sample_complement(const Instance& instance, const MaskPair& masks, Channel which,
                                   std::mt19937_64& rng, double sigma) {
    if (!(sigma >= 0.0)) throw std::invalid_argument("noise half-width must be non-negative");
    const NoiseDraw d = uniform_draw(which != Channel::features ? instance.graph.num_edges() : 0,
                                     which != Channel::edges ? instance.graph.num_nodes() : 0, sigma, sigma, rng);
    return complement_from_noise(instance, masks, which, d);
}

TermResult ps_term(const Instance& instance, const MaskPair& masks) {
    masks.validate(instance);
    const Probe p = probe(instance, masks.edge_mask, masks.node_mask, true);
    return {p.value, {p.d_edge, p.d_node}};
}

TermResult pn_term(const Instance& instance, const MaskPair& masks, const ExplainConfig& config,
                   const ComplementNoise& noise) {
    masks.validate(instance);
    TermResult out{1.0, zero_gradient(instance)};
    if (!uses_features(config.objective)) {
        const TermResult e = expected_complement(instance, masks, Channel::edges, noise.edges, true);
        out.value -= e.value;
        axpy(out.grad, -1.0, e.grad);
        return out;
    }
    const std::pair<Channel, double> parts[] = {
        {Channel::both, config.p00}, {Channel::edges, config.p01}, {Channel::features, config.p10}};
    for (const auto& [which, prior] : parts) {
        const auto& draws = which == Channel::both ? noise.both : which == Channel::edges ? noise.edges : noise.features;
        const TermResult e = expected_complement(instance, masks, which, draws, false);
        out.value -= prior * e.value;
        axpy(out.grad, -prior, e.grad);
    }
    return out;
}

TermResult pn_term(const Instance& instance, const MaskPair& masks, const ExplainConfig& config, std::mt19937_64& rng) {
    return pn_term(instance, masks, config, draw_noise(instance, config, rng));
}

TermResult pns_lower_bound(const Instance& instance, const MaskPair& masks, const ExplainConfig& config,
                           const ComplementNoise& noise) {
    TermResult pn = pn_term(instance, masks, config, noise);
    const TermResult ps = ps_term(instance, masks);
    pn.value = pn.value + ps.value - 1.0;
    axpy(pn.grad, 1.0, ps.grad);
    return pn;
}

TermResult pns_lower_bound(const Instance& instance, const MaskPair& masks, const ExplainConfig& config,
                           std::mt19937_64& rng) {
    return pns_lower_bound(instance, masks, config, draw_noise(instance, config, rng));
}

double mask_entropy(std::span<const double> mask) {
    double h = 0.0;
    for (double m : mask) {
        if (m > 0.0) h -= m * std::log(m);
        if (m < 1.0) h -= (1.0 - m) * std::log(1.0 - m);
    }
    return h;
}

LossResult overall_loss(const Instance& instance, const MaskLogits& logits, const ExplainConfig& config,
                        const ComplementNoise& noise) {
    const bool joint = uses_features(config.objective);
    MaskPair masks = logits.masks();
    if (!joint) masks.node_mask.assign(instance.graph.num_nodes(), 1.0);

    LossResult out;
    out.grad_masks = zero_gradient(instance);
    const bool need_pn = !is_ps(config.objective);
    const bool need_ps = !is_pn(config.objective);
    if (need_pn) {
        const TermResult pn = pn_term(instance, masks, config, noise);
        out.pn = pn.value;
        axpy(out.grad_masks, -1.0, pn.grad);
    }
    if (need_ps) {
        const TermResult ps = ps_term(instance, masks);
        out.ps = ps.value;
        axpy(out.grad_masks, -1.0, ps.grad);
    }
    if (!joint) std::fill(out.grad_masks.node.begin(), out.grad_masks.node.end(), 0.0);
    out.objective = need_pn && need_ps ? out.pn + out.ps - 1.0 : need_pn ? out.pn : out.ps;
    out.loss = -out.objective;

    // Regularizers are written in logit space: with m = sigmoid(z) the
    // binary entropy is m softplus(-z) + (1 - m) softplus(z), whose
    // derivative is -z m (1 - m).
    auto regularize = [&](const std::vector<double>& z, const std::vector<double>& m, std::vector<double>& g_mask,
                          double alpha, double beta, bool active, std::vector<double>& g_logit) {
        g_logit.assign(z.size(), 0.0);
        for (std::size_t i = 0; i < z.size(); ++i) {
            const double s = m[i] * (1.0 - m[i]);
            if (active) {
                out.loss += alpha * m[i] + beta * (m[i] * softplus(-z[i]) + (1.0 - m[i]) * softplus(z[i]));
                g_logit[i] = (g_mask[i] + alpha) * s - beta * z[i] * s;
                g_mask[i] += alpha + beta * std::log((1.0 - m[i]) / m[i]);
            }
        }
    };
    regularize(logits.edge, masks.edge_mask, out.grad_masks.edge, config.alpha_e, config.beta_e, true,
               out.grad_logits.edge);
    regularize(logits.node, masks.node_mask, out.grad_masks.node, config.alpha_f, config.beta_f, joint,
               out.grad_logits.node);
    return out;
}

Extraction extract_explanation(const MaskPair& masks, const ExtractionMode& mode) {
    Extraction out;
    out.edges = select(masks.edge_mask, mode.kind, mode.edge_k, mode.threshold, "edges");
    out.nodes = select(masks.node_mask, mode.kind, mode.node_k, mode.threshold, "nodes");
    return out;
}

std::vector<EdgeId> Explanation::original_edges() const {
    std::vector<EdgeId> out;
    for (EdgeId e : extracted_edges) out.push_back(mapping.edges[e]);
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<NodeId> Explanation::original_nodes() const {
    std::vector<NodeId> out;
    for (NodeId v : extracted_nodes) out.push_back(mapping.nodes[v]);
    std::sort(out.begin(), out.end());
    return out;
}

Explanation explain(const Instance& instance, const ExplainConfig& config) {
    config.validate();
    if (!instance.model) throw std::invalid_argument("instance has no model");
    if (instance.predicted < 0) throw std::invalid_argument("instance has no prediction");

    Explanation ex;
    ex.objective = config.objective;
    Subgraph view = explained_view(instance);
    ex.explained = std::move(view.instance);
    ex.mapping = std::move(view.mapping);
    const Instance& target = ex.explained;
    const bool joint = uses_features(config.objective);

    std::mt19937_64 rng(config.seed);
    MaskLogits logits = MaskLogits::random(target, config.init_std, rng);
    Adam edge_opt(logits.edge.size(), config.learning_rate);
    Adam node_opt(logits.node.size(), config.learning_rate);

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        const ComplementNoise noise = draw_noise(target, config, rng);
        const LossResult r = overall_loss(target, logits, config, noise);
        if (!std::isfinite(r.loss)) {
            throw ExplainDiverged("explanation loss became non-finite at epoch " + std::to_string(epoch));
        }
        ex.losses.push_back(r.loss);
        ex.objectives.push_back(r.objective);
        edge_opt.step(logits.edge, r.grad_logits.edge);
        if (joint) node_opt.step(logits.node, r.grad_logits.node);
    }

    ex.masks = logits.masks();
    if (!joint) ex.masks.node_mask.assign(target.graph.num_nodes(), 1.0);

    ExplainConfig report = config;
    report.mc_samples = config.report_samples;
    const TermResult pn = pn_term(target, ex.masks, report, draw_noise(target, report, rng));
    const TermResult ps = ps_term(target, ex.masks);
    ex.pn_lb = pn.value;
    ex.ps_lb = ps.value;
    ex.pns_raw = pn.value + ps.value - 1.0;
    ex.pns_lb = std::max(0.0, ex.pns_raw);

    const auto& mode = config.extraction;
    ex.extracted_edges = select(ex.masks.edge_mask, mode.kind, mode.edge_k, mode.threshold, "edges");
    if (joint) ex.extracted_nodes = select(ex.masks.node_mask, mode.kind, mode.node_k, mode.threshold, "nodes");
    return ex;
}

double oracle_pns_lb(const Instance& instance, std::span<const EdgeId> edges, const std::vector<NodeId>* nodes) {
    const std::size_t m = instance.graph.num_edges();
    const std::size_t n = instance.graph.num_nodes();
    if (m == 0) throw std::invalid_argument("oracle needs at least one edge");
    if (m > kOracleMaxEdges || n > kOracleMaxNodes) {
        throw std::invalid_argument("oracle enumeration limited to " + std::to_string(kOracleMaxEdges) + " edges and " +
                                    std::to_string(kOracleMaxNodes) + " nodes");
    }
    std::uint32_t e_bits = 0;
    for (EdgeId e : edges) {
        if (e >= m) throw std::out_of_range("explanation edge out of range");
        e_bits |= 1u << e;
    }
    std::uint32_t v_bits = (1u << n) - 1u;
    if (nodes) {
        v_bits = 0;
        for (NodeId v : *nodes) {
            if (v >= n) throw std::out_of_range("explanation node out of range");
            v_bits |= 1u << v;
        }
    }

    std::vector<double> es(m), ns(n);
    auto f = [&](std::uint32_t eb, std::uint32_t vb) {
        for (std::size_t i = 0; i < m; ++i) es[i] = (eb >> i) & 1u;
        for (std::size_t v = 0; v < n; ++v) ns[v] = (vb >> v) & 1u;
        return probe(instance, es, ns, false).value;
    };

    const std::uint32_t e_count = 1u << m;
    const std::uint32_t v_count = 1u << n;
    const double ps = f(e_bits, v_bits);
    double pn = 1.0;
    if (!nodes) {
        double sum = 0.0;
        for (std::uint32_t s = 0; s < e_count; ++s) {
            if (s != e_bits) sum += f(s, v_bits);
        }
        pn -= sum / (e_count - 1);
    } else {
        double both = 0.0, edge_only = 0.0, node_only = 0.0;
        for (std::uint32_t s = 0; s < e_count; ++s) {
            if (s == e_bits) continue;
            edge_only += f(s, v_bits);
            for (std::uint32_t t = 0; t < v_count; ++t) {
                if (t != v_bits) both += f(s, t);
            }
        }
        for (std::uint32_t t = 0; t < v_count; ++t) {
            if (t != v_bits) node_only += f(e_bits, t);
        }
        const double ce = e_count - 1.0;
        const double cv = v_count - 1.0;
        pn -= (both / (ce * cv) + edge_only / ce + node_only / cv) / 3.0;
    }
    return std::max(0.0, pn + ps - 1.0);
}

OracleOptimum oracle_best_edges(const Instance& instance) {
    const std::size_t m = instance.graph.num_edges();
    if (m == 0 || m > kOracleMaxEdges) {
        throw std::invalid_argument("oracle enumeration needs between 1 and " + std::to_string(kOracleMaxEdges) +
                                    " edges");
    }
    const std::uint32_t count = 1u << m;
    const std::vector<double> ones(instance.graph.num_nodes(), 1.0);
    std::vector<double> es(m);
    std::vector<double> prob(count);
    double total = 0.0;
    for (std::uint32_t s = 0; s < count; ++s) {
        for (std::size_t i = 0; i < m; ++i) es[i] = (s >> i) & 1u;
        prob[s] = probe(instance, es, ones, false).value;
        total += prob[s];
    }
    // With a uniform complement over the other 2^m - 1 subsets the bound of
    // subset S is f(S) - (total - f(S)) / (2^m - 1).
    OracleOptimum out;
    out.subset_values.resize(count);
    std::uint32_t best = 0;
    for (std::uint32_t s = 0; s < count; ++s) {
        out.subset_values[s] = std::max(0.0, prob[s] - (total - prob[s]) / (count - 1.0));
        if (out.subset_values[s] > out.subset_values[best]) best = s;
    }
    out.value = out.subset_values[best];
    for (std::size_t i = 0; i < m; ++i) {
        if ((best >> i) & 1u) out.edges.push_back(static_cast<EdgeId>(i));
    }
    return out;
}

ToyPns toy_scm_pns(const ToyScm& scm) {
    const auto k = scm.prior.size();
    if (k == 0 || scm.outcome_event.size() != k || scm.outcome_complement.size() != k) {
        throw std::invalid_argument("toy SCM table rows must match the prior length");
    }
    double mass = 0.0;
    for (double p : scm.prior) {
        if (!(p >= 0.0)) throw std::invalid_argument("toy SCM prior has a negative entry");
        mass += p;
    }
    if (std::abs(mass - 1.0) > 1e-9) throw std::invalid_argument("toy SCM prior does not sum to 1");

    ToyPns out;
    out.monotone = true;
    double p_sufficient = 0.0, p_necessary = 0.0;
    for (std::size_t u = 0; u < k; ++u) {
        const bool hit = scm.outcome_event[u] == scm.predicted;
        const bool flip = scm.outcome_complement[u] != scm.predicted;
        if (hit) p_sufficient += scm.prior[u];
        if (flip) p_necessary += scm.prior[u];
        if (hit && flip) out.exact += scm.prior[u];
        if (!hit && !flip) out.monotone = false;
    }
    out.bound = std::max(0.0, p_necessary + p_sufficient - 1.0);
    return out;
}

}  // namespace pns
