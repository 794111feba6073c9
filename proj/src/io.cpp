#include "pns/io.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <openssl/evp.h>

namespace pns {

namespace {

const Json& field(const Json& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) throw FormatError(std::string("missing field '") + key + "'");
    return j.at(key);
}

template <typename T>
T get(const Json& j, const char* key) {
    try {
        return field(j, key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("field '") + key + "': " + e.what());
    }
}

Json edge_pairs(std::span<const Edge> edges) {
    Json out = Json::array();
    for (const auto& e : edges) out.push_back({e.u, e.v});
    return out;
}

std::vector<Edge> read_pairs(const Json& j) {
    if (!j.is_array()) throw FormatError("edge list must be an array of [u,v] pairs");
    std::vector<Edge> out;
    out.reserve(j.size());
    for (const auto& p : j) {
        if (!p.is_array() || p.size() != 2 || !p[0].is_number_unsigned() || !p[1].is_number_unsigned()) {
            throw FormatError("edge entries must be [u,v] pairs of node ids");
        }
        out.push_back({p[0].get<NodeId>(), p[1].get<NodeId>()});
    }
    return out;
}

Json matrix_to_json(const Matrix& m) {
    return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::vector<double>(m.data(), m.data() + m.size())}};
}

Matrix matrix_from_json(const Json& j) {
    const auto rows = get<Eigen::Index>(j, "rows");
    const auto cols = get<Eigen::Index>(j, "cols");
    const auto data = get<std::vector<double>>(j, "data");
    if (rows < 0 || cols < 0 || static_cast<std::size_t>(rows * cols) != data.size()) {
        throw FormatError("matrix data length does not match rows x cols");
    }
    Matrix m(rows, cols);
    std::copy(data.begin(), data.end(), m.data());
    return m;
}

std::string lower(std::string s) {
    for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

std::string normalize_key(std::string k) {
    k = lower(std::move(k));
    std::replace(k.begin(), k.end(), '-', '_');
    return k;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
    std::size_t used = 0;
    double d = 0.0;
    try {
        d = std::stod(v, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != v.size() || v.empty()) throw FormatError("'" + key + "' expects a number, got '" + v + "'");
    return d;
}

long long to_int(const std::string& key, const std::string& v) {
    std::size_t used = 0;
    long long d = 0;
    try {
        d = std::stoll(v, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != v.size() || v.empty()) throw FormatError("'" + key + "' expects an integer, got '" + v + "'");
    return d;
}

std::uint64_t to_seed(const std::string& key, const std::string& v) {
    const auto d = to_int(key, v);
    if (d < 0) throw FormatError("'" + key + "' must be non-negative");
    return static_cast<std::uint64_t>(d);
}

std::string task_name(TaskKind k) { return k == TaskKind::node ? "node" : "graph"; }

TaskKind parse_task(const std::string& s) {
    if (s == "node") return TaskKind::node;
    if (s == "graph") return TaskKind::graph;
    throw FormatError("task must be 'node' or 'graph', got '" + s + "'");
}

}  // namespace

Json graph_to_json(const SparseGraph& graph) {
    Json j;
    j["num_nodes"] = graph.num_nodes();
    j["directed"] = graph.is_directed();
    j["edges"] = edge_pairs(graph.edges());
    const auto w = graph.edge_weights();
    if (std::any_of(w.begin(), w.end(), [](double x) { return x != 1.0; })) {
        j["weights"] = std::vector<double>(w.begin(), w.end());
    }
    return j;
}

SparseGraph graph_from_json(const Json& j) {
    const auto n = get<std::size_t>(j, "num_nodes");
    const auto edges = read_pairs(field(j, "edges"));
    std::vector<double> w;
    if (j.contains("weights")) w = get<std::vector<double>>(j, "weights");
    if (!w.empty() && w.size() != edges.size()) throw FormatError("weights length does not match the edge list");
    const bool directed = j.value("directed", false);
    try {
        return directed ? SparseGraph::directed(n, edges, w) : SparseGraph::undirected(n, edges, w);
    } catch (const std::invalid_argument& e) {
        throw FormatError(e.what());
    }
}

Json features_to_json(const FeatureMatrix& x) {
    Json rows = Json::array();
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
        rows.push_back(std::vector<double>(x.row(r).data(), x.row(r).data() + x.cols()));
    }
    return rows;
}

FeatureMatrix features_from_json(const Json& j, std::size_t rows) {
    if (!j.is_array() || j.size() != rows) {
        throw FormatError("feature matrix needs one row per node (" + std::to_string(rows) + ")");
    }
    const std::size_t cols = rows == 0 ? 0 : j[0].size();
    FeatureMatrix x(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (std::size_t r = 0; r < rows; ++r) {
        const auto& row = j[r];
        if (!row.is_array() || row.size() != cols) throw FormatError("ragged feature matrix");
        for (std::size_t c = 0; c < cols; ++c) {
            if (!row[c].is_number()) throw FormatError("feature entries must be numbers");
            x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = row[c].get<double>();
        }
    }
    if (!x.allFinite()) throw FormatError("feature matrix contains non-finite entries");
    return x;
}

Json dataset_to_json(const NodeDataset& d) {
    Json j = graph_to_json(d.graph);
    j["name"] = d.name;
    j["task"] = "node";
    j["num_classes"] = d.num_classes;
    j["features"] = features_to_json(d.features);
    j["labels"] = d.labels;
    return j;
}

Json dataset_to_json(const GraphDataset& d) {
    Json j;
    j["name"] = d.name;
    j["task"] = "graph";
    j["num_classes"] = d.num_classes;
    j["feature_dim"] = d.feature_dim;
    Json graphs = Json::array();
    for (const auto& g : d.graphs) {
        Json gj = graph_to_json(g.graph);
        gj["features"] = features_to_json(g.features);
        gj["label"] = g.label;
        graphs.push_back(std::move(gj));
    }
    j["graphs"] = std::move(graphs);
    return j;
}

DatasetFile dataset_from_json(const Json& j) {
    DatasetFile f;
    f.task = parse_task(get<std::string>(j, "task"));
    if (f.task == TaskKind::node) {
        auto& d = f.nodes;
        d.name = j.value("name", std::string{});
        d.graph = graph_from_json(j);
        d.features = features_from_json(field(j, "features"), d.graph.num_nodes());
        d.labels = get<std::vector<int>>(j, "labels");
        d.num_classes = get<int>(j, "num_classes");
        if (d.labels.size() != d.graph.num_nodes()) throw FormatError("labels need one entry per node");
        for (int l : d.labels) {
            if (l < 0 || l >= d.num_classes) throw FormatError("node label outside class range");
        }
        return f;
    }
    auto& d = f.graphs;
    d.name = j.value("name", std::string{});
    d.num_classes = get<int>(j, "num_classes");
    d.feature_dim = get<int>(j, "feature_dim");
    for (const auto& gj : field(j, "graphs")) {
        GraphSample s;
        s.graph = graph_from_json(gj);
        s.features = features_from_json(field(gj, "features"), s.graph.num_nodes());
        if (s.graph.num_nodes() > 0 && s.features.cols() != d.feature_dim) throw FormatError("feature width mismatch");
        if (s.graph.num_nodes() == 0) s.features.resize(0, d.feature_dim);
        s.label = get<int>(gj, "label");
        if (s.label < 0 || s.label >= d.num_classes) throw FormatError("graph label outside class range");
        d.graphs.push_back(std::move(s));
    }
    return f;
}

Json ground_truth_to_json(const SparseGraph& graph, const SyntheticGroundTruth& gt) {
    Json j;
    j["edge_k"] = gt.edge_k;
    j["node_k"] = gt.node_k;
    Json nodes = Json::array();
    const auto edges = graph.edges();
    for (NodeId v : gt.motif_nodes()) {
        std::vector<Edge> e;
        for (auto id : gt.node_edges[v]) e.push_back(edges[id]);
        nodes.push_back({{"node", v}, {"edges", edge_pairs(e)}, {"motif", gt.node_nodes[v]}});
    }
    j["nodes"] = std::move(nodes);
    return j;
}

SyntheticGroundTruth ground_truth_from_json(const Json& j, const SparseGraph& graph) {
    SyntheticGroundTruth gt;
    gt.edge_k = get<std::size_t>(j, "edge_k");
    gt.node_k = get<std::size_t>(j, "node_k");
    gt.node_edges.assign(graph.num_nodes(), {});
    gt.node_nodes.assign(graph.num_nodes(), {});
    for (const auto& entry : field(j, "nodes")) {
        const auto v = get<NodeId>(entry, "node");
        if (v >= graph.num_nodes()) throw FormatError("ground-truth node " + std::to_string(v) + " out of range");
        for (const auto& e : read_pairs(field(entry, "edges"))) {
            const auto id = graph.find_edge(e.u, e.v);
            if (id < 0) {
                throw FormatError("ground-truth edge (" + std::to_string(e.u) + "," + std::to_string(e.v) +
                                  ") is not in the graph");
            }
            gt.node_edges[v].push_back(static_cast<EdgeId>(id));
        }
        gt.node_nodes[v] = get<std::vector<NodeId>>(entry, "motif");
    }
    return gt;
}

Json params_to_json(const GcnParams& p) {
    p.validate();
    Json layers = Json::array();
    for (const auto& w : p.layers) layers.push_back(matrix_to_json(w));
    Json biases = Json::array();
    for (const auto& b : p.biases) biases.push_back(std::vector<double>(b.data(), b.data() + b.size()));
    Json j;
    j["layers"] = std::move(layers);
    j["biases"] = std::move(biases);
    j["readout"] = {{"weight", matrix_to_json(p.readout_weight)},
                    {"bias", std::vector<double>(p.readout_bias.data(), p.readout_bias.data() + p.readout_bias.size())}};
    j["meta"] = {{"task", task_name(p.task)},
                 {"classes", p.num_classes()},
                 {"feature_dim", p.feature_dim()},
                 {"seed", p.seed}};
    return j;
}

GcnParams params_from_json(const Json& j) {
    GcnParams p;
    for (const auto& l : field(j, "layers")) p.layers.push_back(matrix_from_json(l));
    for (const auto& b : field(j, "biases")) {
        const auto v = b.get<std::vector<double>>();
        p.biases.push_back(Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size())));
    }
    const auto& r = field(j, "readout");
    p.readout_weight = matrix_from_json(field(r, "weight"));
    const auto rb = get<std::vector<double>>(r, "bias");
    p.readout_bias = Eigen::Map<const Vector>(rb.data(), static_cast<Eigen::Index>(rb.size()));
    const auto& meta = field(j, "meta");
    p.task = parse_task(get<std::string>(meta, "task"));
    p.seed = get<std::uint64_t>(meta, "seed");
    try {
        p.validate();
    } catch (const std::invalid_argument& e) {
        throw FormatError(std::string("invalid weights: ") + e.what());
    }
    if (get<int>(meta, "classes") != p.num_classes() || get<int>(meta, "feature_dim") != p.feature_dim()) {
        throw FormatError("weight metadata disagrees with the stored shapes");
    }
    return p;
}

Json explanation_to_json(const Explanation& ex, std::uint64_t instance_id) {
    const auto& g = ex.explained.graph;
    std::vector<Edge> edges;
    for (std::size_t e = 0; e < g.num_edges(); ++e) {
        const auto& local = g.edges()[e];
        edges.push_back({ex.mapping.nodes[local.u], ex.mapping.nodes[local.v]});
    }
    std::vector<Edge> extracted;
    for (auto e : ex.extracted_edges) extracted.push_back(edges[e]);
    Json j;
    j["instance_id"] = instance_id;
    j["task"] = task_name(ex.explained.task.kind);
    j["objective"] = to_string(ex.objective);
    j["predicted"] = ex.explained.predicted;
    j["edges"] = edge_pairs(edges);
    j["nodes"] = ex.mapping.nodes;
    j["edge_mask"] = ex.masks.edge_mask;
    j["node_mask"] = ex.masks.node_mask;
    j["extracted_edges"] = edge_pairs(extracted);
    j["extracted_nodes"] = ex.original_nodes();
    j["pns_lb"] = ex.pns_lb;
    j["pn_lb"] = ex.pn_lb;
    j["ps_lb"] = ex.ps_lb;
    return j;
}

ImportedExplanation explanation_from_json(const Json& j) {
    ImportedExplanation ex;
    ex.instance_id = get<std::uint64_t>(j, "instance_id");
    ex.task = parse_task(j.value("task", std::string("node")));
    ex.objective = j.value("objective", std::string{});
    ex.edge_mask = get<std::vector<double>>(j, "edge_mask");
    if (j.contains("node_mask")) ex.node_mask = get<std::vector<double>>(j, "node_mask");
    if (j.contains("edges")) ex.edges = read_pairs(j.at("edges"));
    if (j.contains("nodes")) ex.nodes = get<std::vector<NodeId>>(j, "nodes");
    if (j.contains("extracted_edges")) ex.extracted_edges = read_pairs(j.at("extracted_edges"));
    if (j.contains("extracted_nodes")) ex.extracted_nodes = get<std::vector<NodeId>>(j, "extracted_nodes");
    ex.pns_lb = j.value("pns_lb", 0.0);
    ex.pn_lb = j.value("pn_lb", 0.0);
    ex.ps_lb = j.value("ps_lb", 0.0);
    if (!ex.edges.empty() && ex.edges.size() != ex.edge_mask.size()) {
        throw FormatError("edge_mask and edges differ in length");
    }
    if (!ex.nodes.empty() && !ex.node_mask.empty() && ex.nodes.size() != ex.node_mask.size()) {
        throw FormatError("node_mask and nodes differ in length");
    }
    for (double m : ex.edge_mask) {
        if (!(m >= 0.0 && m <= 1.0)) throw FormatError("edge mask entry outside [0,1]");
    }
    for (double m : ex.node_mask) {
        if (!(m >= 0.0 && m <= 1.0)) throw FormatError("node mask entry outside [0,1]");
    }
    return ex;
}

MaskPair align_masks(const ImportedExplanation& ex, const Instance& target, const SubgraphMapping& mapping) {
    const auto& g = target.graph;
    MaskPair out{std::vector<double>(g.num_edges(), 0.0), std::vector<double>(g.num_nodes(), 1.0)};

    if (ex.edges.empty()) {
        if (ex.edge_mask.size() != g.num_edges()) {
            throw FormatError("edge mask has " + std::to_string(ex.edge_mask.size()) + " entries for " +
                              std::to_string(g.num_edges()) + " edges");
        }
        out.edge_mask = ex.edge_mask;
    } else {
        std::vector<std::int64_t> local(mapping.nodes.empty() ? 0 : mapping.nodes.back() + 1, -1);
        for (std::size_t i = 0; i < mapping.nodes.size(); ++i) local[mapping.nodes[i]] = static_cast<std::int64_t>(i);
        auto to_local = [&](NodeId v) { return v < local.size() ? local[v] : -1; };
        for (std::size_t i = 0; i < ex.edges.size(); ++i) {
            const auto u = to_local(ex.edges[i].u), v = to_local(ex.edges[i].v);
            if (u < 0 || v < 0) continue;
            const auto id = g.find_edge(static_cast<NodeId>(u), static_cast<NodeId>(v));
            if (id >= 0) out.edge_mask[static_cast<std::size_t>(id)] = ex.edge_mask[i];
        }
    }

    if (!ex.node_mask.empty()) {
        if (ex.nodes.empty()) {
            if (ex.node_mask.size() != g.num_nodes()) throw FormatError("node mask length does not match the instance");
            out.node_mask = ex.node_mask;
        } else {
            for (std::size_t i = 0; i < ex.nodes.size(); ++i) {
                const auto it = std::lower_bound(mapping.nodes.begin(), mapping.nodes.end(), ex.nodes[i]);
                if (it != mapping.nodes.end() && *it == ex.nodes[i]) {
                    out.node_mask[static_cast<std::size_t>(it - mapping.nodes.begin())] = ex.node_mask[i];
                }
            }
        }
    }
    return out;
}

std::string to_dot(const SparseGraph& graph, const std::vector<EdgeId>& edges, const std::vector<NodeId>& nodes,
                   const std::vector<std::string>* labels, std::int64_t target) {
    std::vector<char> hot_edge(graph.num_edges(), 0), hot_node(graph.num_nodes(), 0);
    for (auto e : edges) {
        if (e < hot_edge.size()) hot_edge[e] = 1;
    }
    for (auto v : nodes) {
        if (v < hot_node.size()) hot_node[v] = 1;
    }
    std::ostringstream out;
    const bool directed = graph.is_directed();
    out << (directed ? "digraph" : "graph") << " explanation {\n  node [shape=circle, style=filled, fillcolor=white];\n";
    for (std::size_t v = 0; v < graph.num_nodes(); ++v) {
        out << "  " << v << " [label=\"" << (labels && v < labels->size() ? (*labels)[v] : std::to_string(v)) << '"';
        if (static_cast<std::int64_t>(v) == target) out << ", shape=doublecircle";
        if (hot_node[v]) out << ", fillcolor=orange";
        out << "];\n";
    }
    const char* arrow = directed ? " -> " : " -- ";
    for (std::size_t e = 0; e < graph.num_edges(); ++e) {
        const auto& ed = graph.edges()[e];
        out << "  " << ed.u << arrow << ed.v;
        if (hot_edge[e]) {
            out << " [color=red, penwidth=3]";
        } else {
            out << " [color=gray]";
        }
        out << ";\n";
    }
    out << "}\n";
    return out.str();
}

Json read_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open " + path.string());
    try {
        return Json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

void write_json(const std::filesystem::path& path, const Json& j) { write_text(path, j.dump(1) + "\n"); }

std::map<std::string, std::string> parse_key_values(const std::string& text) {
    std::map<std::string, std::string> kv;
    std::istringstream in(text);
    std::string line;
    int n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw FormatError("config line " + std::to_string(n) + ": expected key = value");
        const auto key = normalize_key(trim(line.substr(0, eq)));
        if (key.empty()) throw FormatError("config line " + std::to_string(n) + ": empty key");
        kv[key] = trim(line.substr(eq + 1));
    }
    return kv;
}

std::map<std::string, std::string> read_key_values(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open config " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_key_values(ss.str());
}

TrainConfig train_preset(const std::string& dataset) {
    const auto key = lower(dataset);
    TrainConfig c;
    if (key == "ba-shapes" || key == "tree-cycles" || key == "tree-grid") return c;
    if (key == "mutagenicity" || key == "msrc_21" || key == "msrc-21") {
        c.epochs = 500;
        c.dropout = 0.5;
        c.weight_decay = 5e-4;
        return c;
    }
    throw FormatError("no training preset for '" + dataset + "'");
}

void apply_train_config(TrainConfig& c, const std::map<std::string, std::string>& kv) {
    if (auto it = kv.find("preset"); it != kv.end()) {
        const auto seed = c.seed;
        c = train_preset(it->second);
        c.seed = seed;
    }
    for (const auto& [k, v] : kv) {
        if (k == "preset") continue;
        if (k == "lr" || k == "learning_rate") c.learning_rate = to_double(k, v);
        else if (k == "epochs") c.epochs = static_cast<int>(to_int(k, v));
        else if (k == "dropout") c.dropout = to_double(k, v);
        else if (k == "weight_decay") c.weight_decay = to_double(k, v);
        else if (k == "train_fraction" || k == "split") c.train_fraction = to_double(k, v);
        else if (k == "seed") c.seed = to_seed(k, v);
        else if (k == "log_every") c.log_every = static_cast<int>(to_int(k, v));
        else throw FormatError("unknown training key '" + k + "'");
    }
    try {
        c.validate();
    } catch (const std::invalid_argument& e) {
        throw FormatError(e.what());
    }
}

void apply_explain_config(ExplainConfig& c, const std::map<std::string, std::string>& kv) {
    if (auto it = kv.find("objective"); it != kv.end()) c.objective = parse_objective(it->second);
    if (auto it = kv.find("preset"); it != kv.end()) {
        const auto seed = c.seed;
        const auto extraction = c.extraction;
        try {
            c = ExplainConfig::preset(it->second, c.objective);
        } catch (const std::invalid_argument& e) {
            throw FormatError(e.what());
        }
        c.seed = seed;
        c.extraction = extraction;
    }
    for (const auto& [k, v] : kv) {
        if (k == "preset" || k == "objective") continue;
        if (k == "alpha_e") c.alpha_e = to_double(k, v);
        else if (k == "beta_e") c.beta_e = to_double(k, v);
        else if (k == "alpha_f") c.alpha_f = to_double(k, v);
        else if (k == "beta_f") c.beta_f = to_double(k, v);
        else if (k == "epochs") c.epochs = static_cast<int>(to_int(k, v));
        else if (k == "lr" || k == "learning_rate") c.learning_rate = to_double(k, v);
        else if (k == "mc_samples") c.mc_samples = static_cast<int>(to_int(k, v));
        else if (k == "sigma") c.sigma_e = c.sigma_f = to_double(k, v);
        else if (k == "sigma_e") c.sigma_e = to_double(k, v);
        else if (k == "sigma_f") c.sigma_f = to_double(k, v);
        else if (k == "p00") c.p00 = to_double(k, v);
        else if (k == "p01") c.p01 = to_double(k, v);
        else if (k == "p10") c.p10 = to_double(k, v);
        else if (k == "init_std") c.init_std = to_double(k, v);
        else if (k == "report_samples") c.report_samples = static_cast<int>(to_int(k, v));
        else if (k == "seed") c.seed = to_seed(k, v);
        else if (k == "extraction") {
            const auto mode = lower(v);
            if (mode == "threshold") c.extraction.kind = ExtractionMode::Kind::threshold;
            else if (mode == "top-k" || mode == "top_k" || mode == "topk") c.extraction.kind = ExtractionMode::Kind::top_k;
            else throw FormatError("extraction must be 'threshold' or 'top-k', got '" + v + "'");
        } else if (k == "threshold") c.extraction.threshold = to_double(k, v);
        else if (k == "k" || k == "edge_k") {
            const auto n = to_int(k, v);
            if (n < 1) throw FormatError("'" + k + "' must be positive");
            c.extraction.edge_k = static_cast<std::size_t>(n);
            if (c.extraction.node_k == 0) c.extraction.node_k = c.extraction.edge_k;
        } else if (k == "node_k") {
            const auto n = to_int(k, v);
            if (n < 1) throw FormatError("'" + k + "' must be positive");
            c.extraction.node_k = static_cast<std::size_t>(n);
        } else {
            throw FormatError("unknown explanation key '" + k + "'");
        }
    }
    try {
        c.validate();
    } catch (const std::invalid_argument& e) {
        throw FormatError(e.what());
    }
}

Json train_config_to_json(const TrainConfig& c) {
    return {{"learning_rate", c.learning_rate}, {"epochs", c.epochs},
            {"dropout", c.dropout},             {"weight_decay", c.weight_decay},
            {"train_fraction", c.train_fraction}, {"seed", c.seed},
            {"log_every", c.log_every}};
}

Json explain_config_to_json(const ExplainConfig& c) {
    Json extraction;
    if (c.extraction.kind == ExtractionMode::Kind::top_k) {
        extraction = {{"mode", "top-k"}, {"edge_k", c.extraction.edge_k}, {"node_k", c.extraction.node_k}};
    } else {
        extraction = {{"mode", "threshold"}, {"threshold", c.extraction.threshold}};
    }
    return {{"objective", to_string(c.objective)},
            {"alpha_e", c.alpha_e},
            {"beta_e", c.beta_e},
            {"alpha_f", c.alpha_f},
            {"beta_f", c.beta_f},
            {"epochs", c.epochs},
            {"learning_rate", c.learning_rate},
            {"mc_samples", c.mc_samples},
            {"sigma_e", c.sigma_e},
            {"sigma_f", c.sigma_f},
            {"p00", c.p00},
            {"p01", c.p01},
            {"p10", c.p10},
            {"init_std", c.init_std},
            {"report_samples", c.report_samples},
            {"extraction", extraction},
            {"seed", c.seed}};
}

std::string sha256_hex(const std::string& bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
        throw std::runtime_error("SHA-256 failed");
    }
    std::ostringstream out;
    for (unsigned int i = 0; i < len; ++i) out << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
    return out.str();
}

std::string sha256_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return sha256_hex(ss.str());
}

Json RunManifest::to_json() const {
    auto hashes = [](const std::vector<std::string>& paths) {
        Json out = Json::object();
        for (const auto& p : paths) {
            std::error_code ec;
            if (std::filesystem::is_regular_file(p, ec)) out[p] = sha256_file(p);
        }
        return out;
    };
    Json j;
    j["command"] = command;
    j["argv"] = argv;
    j["config"] = config;
    j["seed"] = seed;
    j["inputs"] = inputs;
    j["outputs"] = outputs;
    j["wall_seconds"] = wall_seconds;
    j["input_sha256"] = hashes(inputs);
    j["output_sha256"] = hashes(outputs);
    j["results"] = results;
    return j;
}

}  // namespace pns
