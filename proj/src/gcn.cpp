#include "pns/gcn.hpp"

#include <cmath>
#include <string>

namespace pns {

namespace {

void require(bool ok, const std::string& msg) {
    if (!ok) throw std::invalid_argument(msg);
}

std::uint64_t hash_matrix(const Matrix& m, std::uint64_t h) {
    const auto rows = m.rows();
    const auto cols = m.cols();
    h = fnv1a(&rows, sizeof(rows), h);
    h = fnv1a(&cols, sizeof(cols), h);
    return fnv1a(m.data(), static_cast<std::size_t>(m.size()) * sizeof(double), h);
}

// out = A_hat * in
Matrix propagate(const SparseGraph& graph, const NormalizedAdjacency& adj, const Matrix& in) {
    Matrix out = Eigen::Map<const Vector>(adj.self_values.data(), static_cast<Eigen::Index>(adj.self_values.size()))
                     .asDiagonal() *
                 in;
    const auto arcs = graph.arcs();
    for (std::size_t a = 0; a < arcs.size(); ++a) {
        const double w = adj.arc_values[a];
        if (w != 0.0) out.row(arcs[a].dst) += w * in.row(arcs[a].src);
    }
    return out;
}

// out = A_hat^T * in
Matrix propagate_transposed(const SparseGraph& graph, const NormalizedAdjacency& adj, const Matrix& in) {
    Matrix out = Eigen::Map<const Vector>(adj.self_values.data(), static_cast<Eigen::Index>(adj.self_values.size()))
                     .asDiagonal() *
                 in;
    const auto arcs = graph.arcs();
    for (std::size_t a = 0; a < arcs.size(); ++a) {
        const double w = adj.arc_values[a];
        if (w != 0.0) out.row(arcs[a].src) += w * in.row(arcs[a].dst);
    }
    return out;
}

Matrix softmax_rows(const Matrix& logits) {
    Matrix out(logits.rows(), logits.cols());
    for (Eigen::Index r = 0; r < logits.rows(); ++r) {
        const double mx = logits.row(r).maxCoeff();
        double sum = 0.0;
        for (Eigen::Index c = 0; c < logits.cols(); ++c) {
            out(r, c) = std::exp(logits(r, c) - mx);
            sum += out(r, c);
        }
        out.row(r) /= sum;
    }
    return out;
}

void check_tape(const ForwardTape& tape, const GcnParams& params) {
    if (tape.graph == nullptr || tape.graph->fingerprint() != tape.graph_fingerprint) {
        throw StaleTapeError("forward tape refers to a graph that changed since the forward pass");
    }
    if (params.fingerprint() != tape.params_fingerprint) {
        throw StaleTapeError("forward tape was recorded with different model parameters");
    }
}

}  // namespace

void GcnParams::validate() const {
    require(!layers.empty(), "GCN needs at least one layer");
    for (std::size_t k = 0; k < layers.size(); ++k) {
        require(layers[k].size() > 0, "empty GCN layer");
        if (k > 0) {
            require(layers[k].rows() == layers[k - 1].cols(),
                    "layer " + std::to_string(k) + " input width does not match previous output");
        }
        require(layers[k].allFinite(), "non-finite GCN weight");
    }
    require(biases.size() == layers.size(), "one bias vector per GCN layer expected");
    for (std::size_t k = 0; k < layers.size(); ++k) {
        require(biases[k].size() == layers[k].cols(), "layer " + std::to_string(k) + " bias width mismatch");
        require(biases[k].allFinite(), "non-finite GCN bias");
    }
    require(readout_weight.rows() == layers.back().cols(), "readout input width mismatch");
    require(readout_weight.cols() == readout_bias.size(), "readout bias width mismatch");
    require(readout_bias.size() >= 1, "need at least one class");
    require(readout_weight.allFinite() && readout_bias.allFinite(), "non-finite readout weight");
}

std::uint64_t GcnParams::fingerprint() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const auto& w : layers) h = hash_matrix(w, h);
    for (const auto& b : biases) h = fnv1a(b.data(), static_cast<std::size_t>(b.size()) * sizeof(double), h);
    h = hash_matrix(readout_weight, h);
    h = fnv1a(readout_bias.data(), static_cast<std::size_t>(readout_bias.size()) * sizeof(double), h);
    return fnv1a(&task, sizeof(task), h);
}

GcnParams GcnParams::initialize(int feature_dim, int num_classes, TaskKind task, std::uint64_t seed,
                                std::span<const int> hidden) {
    require(feature_dim > 0 && num_classes > 0 && !hidden.empty(), "invalid GCN dimensions");
    std::mt19937_64 rng(seed);
    GcnParams p;
    p.task = task;
    p.seed = seed;
    int in = feature_dim;
    for (int out : hidden) {
        const double bound = std::sqrt(6.0 / (in + out));
        std::uniform_real_distribution<double> dist(-bound, bound);
        Matrix w(in, out);
        for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = dist(rng);
        p.layers.push_back(std::move(w));
        // Constant input features make every row of a bias-free layer a
        // multiple of one vector; random offsets separate them from step 0.
        std::uniform_real_distribution<double> offset(-1.0, 1.0);
        Vector b(out);
        for (Eigen::Index i = 0; i < b.size(); ++i) b[i] = offset(rng);
        p.biases.push_back(std::move(b));
        in = out;
    }
    const double bound = 1.0 / std::sqrt(static_cast<double>(in));
    std::uniform_real_distribution<double> dist(-bound, bound);
    p.readout_weight.resize(in, num_classes);
    for (Eigen::Index i = 0; i < p.readout_weight.size(); ++i) p.readout_weight.data()[i] = dist(rng);
    p.readout_bias.resize(num_classes);
    for (Eigen::Index i = 0; i < p.readout_bias.size(); ++i) p.readout_bias[i] = dist(rng);
    return p;
}

ParamGradients ParamGradients::zeros_like(const GcnParams& params) {
    ParamGradients g;
    for (const auto& w : params.layers) g.layers.push_back(Matrix::Zero(w.rows(), w.cols()));
    for (const auto& b : params.biases) g.biases.push_back(Vector::Zero(b.size()));
    g.readout_weight = Matrix::Zero(params.readout_weight.rows(), params.readout_weight.cols());
    g.readout_bias = Vector::Zero(params.readout_bias.size());
    return g;
}

NormalizedAdjacency normalize_adjacency(const SparseGraph& graph, std::span<const double> arc_weights) {
    require(arc_weights.size() == graph.num_arcs(), "arc weight count " + std::to_string(arc_weights.size()) +
                                                        " does not match arc count " +
                                                        std::to_string(graph.num_arcs()));
    const auto n = graph.num_nodes();
    NormalizedAdjacency adj;
    adj.degree.assign(n, 1.0);
    const auto arcs = graph.arcs();
    for (std::size_t a = 0; a < arcs.size(); ++a) {
        require(arc_weights[a] >= 0.0 && arc_weights[a] <= 1.0, "arc weight outside [0,1]");
        adj.degree[arcs[a].dst] += arc_weights[a];
    }
    adj.inv_sqrt_degree.resize(n);
    adj.self_values.resize(n);
    for (std::size_t v = 0; v < n; ++v) {
        adj.inv_sqrt_degree[v] = 1.0 / std::sqrt(adj.degree[v]);
        adj.self_values[v] = 1.0 / adj.degree[v];
    }
    adj.arc_values.resize(arcs.size());
    for (std::size_t a = 0; a < arcs.size(); ++a) {
        adj.arc_values[a] = arc_weights[a] * adj.inv_sqrt_degree[arcs[a].dst] * adj.inv_sqrt_degree[arcs[a].src];
    }
    return adj;
}

Matrix NormalizedAdjacency::to_dense(const SparseGraph& graph) const {
    const auto n = static_cast<Eigen::Index>(graph.num_nodes());
    Matrix out = Matrix::Zero(n, n);
    for (Eigen::Index v = 0; v < n; ++v) out(v, v) = self_values[static_cast<std::size_t>(v)];
    const auto arcs = graph.arcs();
    for (std::size_t a = 0; a < arcs.size(); ++a) out(arcs[a].dst, arcs[a].src) += arc_values[a];
    return out;
}

ForwardTape forward_batch(const GcnParams& params, const SparseGraph& graph, std::span<const double> arc_weights,
                          const FeatureMatrix& features, const Readout& readout, Dropout dropout) {
    require(static_cast<std::size_t>(features.rows()) == graph.num_nodes(),
            "feature rows " + std::to_string(features.rows()) + " != node count " +
                std::to_string(graph.num_nodes()));
    require(features.cols() == params.feature_dim(), "feature width " + std::to_string(features.cols()) +
                                                         " != model input width " +
                                                         std::to_string(params.feature_dim()));
    require(readout.kind == params.task, "readout kind does not match the model task");
    if (readout.kind == TaskKind::node) {
        require(!readout.rows.empty(), "node readout needs at least one row");
        for (NodeId r : readout.rows) require(r < graph.num_nodes(), "readout node out of range");
    }
    require(dropout.rate >= 0.0 && dropout.rate < 1.0, "dropout rate must be in [0,1)");

    ForwardTape tape;
    tape.graph = &graph;
    tape.graph_fingerprint = graph.fingerprint();
    tape.params_fingerprint = params.fingerprint();
    tape.readout = readout;
    tape.arc_weights.assign(arc_weights.begin(), arc_weights.end());
    tape.adjacency = normalize_adjacency(graph, arc_weights);
    tape.input = features;

    const bool use_dropout = dropout.rate > 0.0 && dropout.rng != nullptr;
    std::bernoulli_distribution keep(1.0 - dropout.rate);
    const double scale = use_dropout ? 1.0 / (1.0 - dropout.rate) : 1.0;

    const Matrix* h = &tape.input;
    for (std::size_t k = 0; k < params.layers.size(); ++k) {
        tape.projected.push_back(*h * params.layers[k]);
        tape.pre.push_back(propagate(graph, tape.adjacency, tape.projected.back()));
        tape.pre.back().rowwise() += params.biases[k].transpose();
        Matrix act = tape.pre.back().cwiseMax(0.0);
        if (use_dropout) {
            Matrix mask(act.rows(), act.cols());
            for (Eigen::Index i = 0; i < mask.size(); ++i) mask.data()[i] = keep(*dropout.rng) ? scale : 0.0;
            act = act.cwiseProduct(mask);
            tape.dropout_scale.push_back(std::move(mask));
        }
        tape.activations.push_back(std::move(act));
        h = &tape.activations.back();
    }

    const Matrix& last = tape.activations.back();
    if (readout.kind == TaskKind::graph) {
        tape.pooled = last.colwise().sum();
    } else {
        tape.pooled.resize(static_cast<Eigen::Index>(readout.rows.size()), last.cols());
        for (std::size_t r = 0; r < readout.rows.size(); ++r) {
            tape.pooled.row(static_cast<Eigen::Index>(r)) = last.row(readout.rows[r]);
        }
    }
    tape.logits = tape.pooled * params.readout_weight;
    tape.logits.rowwise() += params.readout_bias.transpose();
    tape.probs = softmax_rows(tape.logits);
    return tape;
}

ForwardResult forward(const GcnParams& params, const SparseGraph& graph, std::span<const double> arc_weights,
                      const FeatureMatrix& features, const Readout& readout) {
    require(readout.num_outputs() == 1, "single-output forward needs exactly one readout row");
    ForwardResult result;
    result.tape = forward_batch(params, graph, arc_weights, features, readout);
    result.probs = result.tape.probs.row(0).transpose();
    return result;
}

Matrix softmax_backward(const Matrix& probs, const Matrix& upstream) {
    Matrix out(probs.rows(), probs.cols());
    for (Eigen::Index r = 0; r < probs.rows(); ++r) {
        const double dot = probs.row(r).dot(upstream.row(r));
        out.row(r) = (probs.row(r).array() * (upstream.row(r).array() - dot)).matrix();
    }
    return out;
}

void backward_from_logits(const ForwardTape& tape, const GcnParams& params, const Matrix& d_logits,
                          InputGradients* inputs, ParamGradients* grads) {
    check_tape(tape, params);
    require(d_logits.rows() == tape.logits.rows() && d_logits.cols() == tape.logits.cols(),
            "upstream gradient shape does not match the logits");
    const SparseGraph& graph = *tape.graph;
    const auto arcs = graph.arcs();
    const auto& adj = tape.adjacency;
    const std::size_t depth = params.layers.size();

    if (grads) {
        *grads = ParamGradients::zeros_like(params);
        grads->readout_weight = tape.pooled.transpose() * d_logits;
        grads->readout_bias = d_logits.colwise().sum().transpose();
    }
    const Matrix d_pooled = d_logits * params.readout_weight.transpose();

    Matrix d_h = Matrix::Zero(tape.activations.back().rows(), tape.activations.back().cols());
    if (tape.readout.kind == TaskKind::graph) {
        d_h.rowwise() = d_pooled.row(0);
    } else {
        for (std::size_t r = 0; r < tape.readout.rows.size(); ++r) {
            d_h.row(tape.readout.rows[r]) += d_pooled.row(static_cast<Eigen::Index>(r));
        }
    }

    // Gradient with respect to every A_hat entry, accumulated over layers.
    std::vector<double> g_arc;
    std::vector<double> g_self;
    if (inputs) {
        g_arc.assign(arcs.size(), 0.0);
        g_self.assign(graph.num_nodes(), 0.0);
    }

    for (std::size_t k = depth; k-- > 0;) {
        Matrix d_pre = d_h;
        const Matrix& pre = tape.pre[k];
        for (Eigen::Index i = 0; i < d_pre.size(); ++i) {
            if (pre.data()[i] <= 0.0) d_pre.data()[i] = 0.0;
        }
        if (!tape.dropout_scale.empty()) d_pre = d_pre.cwiseProduct(tape.dropout_scale[k]);

        if (grads) grads->biases[k] = d_pre.colwise().sum().transpose();
        const Matrix& projected = tape.projected[k];
        if (inputs) {
            for (std::size_t a = 0; a < arcs.size(); ++a) {
                g_arc[a] += d_pre.row(arcs[a].dst).dot(projected.row(arcs[a].src));
            }
            for (Eigen::Index v = 0; v < d_pre.rows(); ++v) {
                g_self[static_cast<std::size_t>(v)] += d_pre.row(v).dot(projected.row(v));
            }
        }
        const Matrix d_projected = propagate_transposed(graph, adj, d_pre);
        const Matrix& below = k == 0 ? tape.input : tape.activations[k - 1];
        if (grads) grads->layers[k] = below.transpose() * d_projected;
        if (k > 0 || inputs) d_h = d_projected * params.layers[k].transpose();
    }

    if (inputs) {
        inputs->features = std::move(d_h);
        // A_hat[v][u] = w * d_v^-1/2 * d_u^-1/2 with d_v = 1 + sum of weights
        // into v, so every arc weight also moves the entries of its row and
        // column through d_dst.
        const std::size_t n = graph.num_nodes();
        std::vector<double> g_degree(n, 0.0);
        for (std::size_t v = 0; v < n; ++v) g_degree[v] = 2.0 * g_self[v] * adj.self_values[v];
        for (std::size_t a = 0; a < arcs.size(); ++a) {
            const double contrib = g_arc[a] * adj.arc_values[a];
            g_degree[arcs[a].dst] += contrib;
            g_degree[arcs[a].src] += contrib;
        }
        for (std::size_t v = 0; v < n; ++v) g_degree[v] *= -0.5 / adj.degree[v];

        inputs->arc_weights.resize(arcs.size());
        for (std::size_t a = 0; a < arcs.size(); ++a) {
            const double direct = g_arc[a] * adj.inv_sqrt_degree[arcs[a].dst] * adj.inv_sqrt_degree[arcs[a].src];
            inputs->arc_weights[a] = direct + g_degree[arcs[a].dst];
        }
    }
}

InputGradients backward_inputs(const ForwardTape& tape, const GcnParams& params, const Vector& upstream) {
    require(tape.probs.rows() == 1, "backward_inputs expects a single-output tape");
    require(upstream.size() == tape.probs.cols(), "upstream gradient width mismatch");
    const Matrix d_logits = softmax_backward(tape.probs, upstream.transpose());
    InputGradients out;
    backward_from_logits(tape, params, d_logits, &out, nullptr);
    return out;
}

ParamGradients backward_params(const ForwardTape& tape, const GcnParams& params, const Vector& upstream) {
    require(tape.probs.rows() == 1, "backward_params expects a single-output tape");
    require(upstream.size() == tape.probs.cols(), "upstream gradient width mismatch");
    const Matrix d_logits = softmax_backward(tape.probs, upstream.transpose());
    ParamGradients out;
    backward_from_logits(tape, params, d_logits, nullptr, &out);
    return out;
}

}  // namespace pns
