// pns-explain: generate data, train models, explain predictions, score explanations.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <memory>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "pns/datasets.hpp"
#include "pns/explainer.hpp"
#include "pns/io.hpp"
#include "pns/metrics.hpp"
#include "pns/trainer.hpp"
#include "pns/workflow.hpp"

namespace fs = std::filesystem;
using namespace pns;

namespace {

struct Clock {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
};

bool is_synthetic(const std::string& name) {
    return name == "ba-shapes" || name == "tree-cycles" || name == "tree-grid";
}

bool has_explain_preset(const std::string& name) {
    return is_synthetic(name) || name == "mutagenicity" || name == "msrc_21";
}

std::string canonical_name(std::string name) {
    for (auto& c : name) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (name == "msrc-21") name = "msrc_21";
    return name;
}

fs::path sibling(const fs::path& p, const std::string& suffix) {
    auto out = p;
    out.replace_extension();
    return out.string() + suffix;
}

// ---------------------------------------------------------------- generate

struct GenerateArgs {
    std::string dataset;
    std::uint64_t seed = 0;
    std::string out;
    std::string tu_dir;
};

int cmd_generate(const GenerateArgs& a, const std::vector<std::string>& argv) {
    Clock clock;
    const auto name = canonical_name(a.dataset);
    const fs::path dir(a.out);
    RunManifest m{"generate", argv, {{"dataset", name}, {"seed", a.seed}}, a.seed, {}, {}, 0.0, {}};
    if (is_synthetic(name)) {
        const auto d = generate_synthetic(name, a.seed);
        write_json(dir / "graph.json", dataset_to_json(d));
        write_json(dir / "ground_truth.json", ground_truth_to_json(d.graph, d.ground_truth));
        m.outputs = {(dir / "graph.json").string(), (dir / "ground_truth.json").string()};
        m.results = {{"nodes", d.graph.num_nodes()}, {"edges", d.graph.num_edges()}, {"classes", d.num_classes}};
        std::printf("%s: %zu nodes, %zu edges, %d classes\n", name.c_str(), d.graph.num_nodes(), d.graph.num_edges(),
                    d.num_classes);
    } else if (name == "mutagenicity" || name == "msrc_21") {
        if (a.tu_dir.empty()) throw std::invalid_argument(name + " needs --tu-dir with the TU flat files");
        auto d = load_tu_dataset(a.tu_dir);
        d.name = name;
        write_json(dir / "graph.json", dataset_to_json(d));
        m.inputs = {a.tu_dir};
        m.outputs = {(dir / "graph.json").string()};
        m.results = {{"graphs", d.graphs.size()}, {"classes", d.num_classes}};
        std::printf("%s: %zu graphs, %d classes\n", name.c_str(), d.graphs.size(), d.num_classes);
    } else {
        throw std::invalid_argument("unknown dataset '" + a.dataset +
                                    "' (expected ba-shapes, tree-cycles, tree-grid, mutagenicity or msrc_21)");
    }
    m.wall_seconds = clock.seconds();
    write_json(dir / "manifest.json", m.to_json());
    return 0;
}

// ---------------------------------------------------------------- train

struct TrainArgs {
    std::string data;
    std::string config;
    std::string preset;
    std::string out;
    std::string curve;
    std::map<std::string, std::string> overrides;
};

int cmd_train(const TrainArgs& a, const std::vector<std::string>& argv) {
    Clock clock;
    const auto file = dataset_from_json(read_json(a.data));
    const auto name = canonical_name(a.preset.empty() ? file.name() : a.preset);

    TrainConfig cfg;
    std::map<std::string, std::string> kv;
    if (!a.preset.empty() || is_synthetic(name) || name == "mutagenicity" || name == "msrc_21") kv["preset"] = name;
    if (!a.config.empty()) {
        for (const auto& [k, v] : read_key_values(a.config)) kv[k] = v;
    }
    for (const auto& [k, v] : a.overrides) kv[k] = v;
    apply_train_config(cfg, kv);

    const auto result = file.task == TaskKind::node ? train(file.nodes, cfg) : train(file.graphs, cfg);
    const fs::path out(a.out);
    write_json(out, params_to_json(result.params));
    const fs::path curve = a.curve.empty() ? sibling(out, ".curve.csv") : fs::path(a.curve);
    std::string csv = "epoch,loss,train_acc,test_acc\n";
    char line[160];
    for (const auto& e : result.curve) {
        std::snprintf(line, sizeof line, "%d,%.10g,%.6f,%.6f\n", e.epoch, e.loss, e.train_accuracy, e.test_accuracy);
        csv += line;
    }
    write_text(curve, csv);

    RunManifest m{"train", argv, train_config_to_json(cfg), cfg.seed, {a.data}, {out.string(), curve.string()}, 0.0,
                  {{"train_accuracy", result.train_accuracy}, {"test_accuracy", result.test_accuracy}}};
    if (!a.config.empty()) m.inputs.push_back(a.config);
    m.wall_seconds = clock.seconds();
    write_json(sibling(out, ".manifest.json"), m.to_json());
    std::printf("train accuracy %.4f, test accuracy %.4f\n", result.train_accuracy, result.test_accuracy);
    return 0;
}

// ---------------------------------------------------------------- explain

struct ExplainArgs {
    std::string model;
    std::string data;
    std::string gt;
    std::string objective = "pns-e";
    std::string config;
    std::string preset;
    bool motif = false;
    std::vector<std::uint64_t> nodes;
    std::vector<std::uint64_t> graphs;
    bool all_graphs = false;
    std::size_t sample = 0;
    unsigned jobs = 0;
    std::string out;
    std::map<std::string, std::string> overrides;
};

int cmd_explain(const ExplainArgs& a, const std::vector<std::string>& argv) {
    Clock clock;
    const auto file = dataset_from_json(read_json(a.data));
    auto model = std::make_shared<const GcnParams>(params_from_json(read_json(a.model)));
    if (model->task != file.task) throw std::invalid_argument("model and data disagree on the task kind");

    ExplainConfig cfg;
    std::map<std::string, std::string> kv{{"objective", a.objective}};
    const auto name = canonical_name(a.preset.empty() ? file.name() : a.preset);
    if (!a.preset.empty() || has_explain_preset(name)) kv["preset"] = name;
    if (!a.config.empty()) {
        for (const auto& [k, v] : read_key_values(a.config)) kv[k] = v;
    }
    for (const auto& [k, v] : a.overrides) kv[k] = v;
    apply_explain_config(cfg, kv);

    std::vector<std::uint64_t> ids;
    if (file.task == TaskKind::node) {
        if (!a.graphs.empty() || a.all_graphs) throw std::invalid_argument("graph selectors need a graph dataset");
        if (a.motif) {
            if (a.gt.empty()) throw std::invalid_argument("--motif needs --gt");
            const auto gt = ground_truth_from_json(read_json(a.gt), file.nodes.graph);
            for (auto v : gt.motif_nodes()) ids.push_back(v);
        }
        ids.insert(ids.end(), a.nodes.begin(), a.nodes.end());
    } else {
        if (a.motif || !a.nodes.empty()) throw std::invalid_argument("node selectors need a node dataset");
        if (a.all_graphs) {
            for (std::size_t i = 0; i < file.graphs.graphs.size(); ++i) ids.push_back(i);
        }
        ids.insert(ids.end(), a.graphs.begin(), a.graphs.end());
    }
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    if (a.sample > 0 && a.sample < ids.size()) {
        std::mt19937_64 rng(mix_seed(cfg.seed, 0x5a3e));
        std::shuffle(ids.begin(), ids.end(), rng);
        ids.resize(a.sample);
        std::sort(ids.begin(), ids.end());
    }
    if (ids.empty()) throw std::invalid_argument("instance selector is empty");

    std::vector<Instance> instances;
    instances.reserve(ids.size());
    if (file.task == TaskKind::node) {
        const Instance base = node_instance(file.nodes, model, static_cast<NodeId>(ids.front()));
        for (auto id : ids) {
            if (id >= file.nodes.graph.num_nodes()) throw std::out_of_range("node " + std::to_string(id) + " out of range");
            instances.push_back(retarget(base, Task::node(static_cast<NodeId>(id), file.nodes.labels[id])));
        }
    } else {
        for (auto id : ids) instances.push_back(graph_instance(file.graphs, model, id));
    }

    const unsigned jobs = a.jobs > 0 ? a.jobs : std::max(1u, std::thread::hardware_concurrency());
    const auto results = explain_all(instances, ids, cfg, jobs);

    const fs::path dir(a.out);
    const std::string prefix = file.task == TaskKind::node ? "node-" : "graph-";
    RunManifest m{"explain", argv, explain_config_to_json(cfg), cfg.seed, {a.model, a.data}, {}, 0.0, {}};
    if (!a.gt.empty()) m.inputs.push_back(a.gt);
    if (!a.config.empty()) m.inputs.push_back(a.config);
    double mean_pns = 0.0;
    for (std::size_t i = 0; i < results.size(); ++i) {
        const auto& ex = results[i];
        const auto stem = dir / (prefix + std::to_string(ids[i]));
        write_json(stem.string() + ".json", explanation_to_json(ex, ids[i]));
        std::vector<std::string> labels;
        for (auto v : ex.mapping.nodes) labels.push_back(std::to_string(v));
        const std::int64_t target = ex.explained.task.kind == TaskKind::node ? ex.explained.task.target : -1;
        write_text(stem.string() + ".dot",
                   to_dot(ex.explained.graph, ex.extracted_edges, ex.extracted_nodes, &labels, target));
        m.outputs.push_back(stem.string() + ".json");
        m.outputs.push_back(stem.string() + ".dot");
        mean_pns += ex.pns_lb;
    }
    mean_pns /= static_cast<double>(results.size());
    m.results = {{"instances", results.size()}, {"mean_pns_lb", mean_pns}};
    m.wall_seconds = clock.seconds();
    write_json(dir / "manifest.json", m.to_json());
    std::printf("explained %zu instances, mean PNS lower bound %.4f\n", results.size(), mean_pns);
    return 0;
}

// ---------------------------------------------------------------- evaluate

struct EvaluateArgs {
    std::vector<std::string> dirs;
    std::string model;
    std::string data;
    std::string gt;
    std::string out;
    std::string dataset;
    std::string method;
    std::size_t k = 0;
    double threshold = 0.5;
};

std::vector<fs::path> explanation_files(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw std::invalid_argument(dir.string() + " is not a directory");
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir)) {
        if (e.path().extension() == ".json" && e.path().filename() != "manifest.json") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) throw std::invalid_argument("no explanation files in " + dir.string());
    return files;
}

bool edge_only_objective(const ImportedExplanation& ex) {
    if (!ex.objective.empty()) {
        try {
            return !uses_features(parse_objective(ex.objective));
        } catch (const std::invalid_argument&) {
        }
    }
    return ex.node_mask.empty();
}

int cmd_evaluate(const EvaluateArgs& a, const std::vector<std::string>& argv) {
    Clock clock;
    const auto file = dataset_from_json(read_json(a.data));
    auto model = std::make_shared<const GcnParams>(params_from_json(read_json(a.model)));
    if (model->task != file.task) throw std::invalid_argument("model and data disagree on the task kind");
    std::unique_ptr<SyntheticGroundTruth> gt;
    if (!a.gt.empty()) {
        if (file.task != TaskKind::node) throw std::invalid_argument("ground truth applies to node datasets only");
        gt = std::make_unique<SyntheticGroundTruth>(ground_truth_from_json(read_json(a.gt), file.nodes.graph));
    }

    std::unique_ptr<Instance> base;
    if (file.task == TaskKind::node) base = std::make_unique<Instance>(node_instance(file.nodes, model, 0));

    std::vector<MetricReport> runs;
    std::string method = a.method;
    for (const auto& dir : a.dirs) {
        std::vector<Instance> instances;
        std::vector<MaskPair> masks;
        std::vector<std::vector<std::uint32_t>> truths;
        bool edge_only = true, all_truth = static_cast<bool>(gt);
        std::size_t joint = 0;
        for (const auto& path : explanation_files(dir)) {
            const auto ex = explanation_from_json(read_json(path));
            if (ex.task != file.task) throw std::invalid_argument(path.string() + ": task kind does not match the data");
            if (method.empty()) method = ex.objective;
            Instance inst;
            if (file.task == TaskKind::node) {
                if (ex.instance_id >= file.nodes.graph.num_nodes()) {
                    throw std::out_of_range(path.string() + ": node id out of range");
                }
                const auto v = static_cast<NodeId>(ex.instance_id);
                inst = retarget(*base, Task::node(v, file.nodes.labels[v]));
            } else {
                inst = graph_instance(file.graphs, model, ex.instance_id);
            }
            auto view = explained_view(inst);
            try {
                masks.push_back(align_masks(ex, view.instance, view.mapping));
            } catch (const FormatError& e) {
                throw FormatError(path.string() + ": " + e.what());
            }
            if (gt) {
                truths.push_back(local_truth(*gt, static_cast<NodeId>(ex.instance_id), view.mapping));
                if (truths.back().empty()) all_truth = false;
            }
            joint += !edge_only_objective(ex);
            instances.push_back(std::move(view.instance));
        }
        if (joint != 0 && joint != instances.size()) {
            throw std::invalid_argument(dir + ": mixes edge-only and joint explanations");
        }
        edge_only = joint == 0;
        if (gt && !all_truth) {
            std::fprintf(stderr, "warning: %s has instances without ground truth; accuracy metrics skipped\n",
                         dir.c_str());
        }
        EvaluationInput in;
        in.instances = instances;
        in.masks = masks;
        in.edge_only = edge_only;
        if (gt && all_truth) in.truths = truths;
        in.k = a.k > 0 ? a.k : (gt ? gt->edge_k : 6);
        in.threshold = a.threshold;
        runs.push_back(evaluate(in));
    }

    const auto dataset = a.dataset.empty() ? file.name() : a.dataset;
    const auto csv = metric_csv_header() + metric_csv_rows(dataset, method.empty() ? "unknown" : method, runs);
    if (a.out.empty()) {
        std::cout << csv;
    } else {
        write_text(a.out, csv);
        RunManifest m{"evaluate", argv, {{"k", a.k}, {"threshold", a.threshold}}, 0, {a.model, a.data}, {a.out}, 0.0,
                      {{"runs", runs.size()}}};
        for (const auto& d : a.dirs) m.inputs.push_back(d);
        if (!a.gt.empty()) m.inputs.push_back(a.gt);
        m.wall_seconds = clock.seconds();
        write_json(sibling(a.out, ".manifest.json"), m.to_json());
    }
    return 0;
}

// ---------------------------------------------------------------- export-dot

struct DotArgs {
    std::string data;
    std::string explanation;
    std::string out;
};

int cmd_export_dot(const DotArgs& a) {
    const auto file = dataset_from_json(read_json(a.data));
    const auto ex = explanation_from_json(read_json(a.explanation));
    const SparseGraph* graph = nullptr;
    if (file.task == TaskKind::node) {
        graph = &file.nodes.graph;
    } else {
        if (ex.instance_id >= file.graphs.graphs.size()) throw std::out_of_range("graph id out of range");
        graph = &file.graphs.graphs[ex.instance_id].graph;
    }
    std::vector<NodeId> nodes = ex.nodes;
    if (nodes.empty()) {
        for (NodeId v = 0; v < graph->num_nodes(); ++v) nodes.push_back(v);
    }
    std::sort(nodes.begin(), nodes.end());
    for (auto v : nodes) {
        if (v >= graph->num_nodes()) throw std::out_of_range("explanation node out of range");
    }
    const SparseGraph sub = induced_subgraph(*graph, nodes);
    auto local = [&](NodeId v) -> std::int64_t {
        const auto it = std::lower_bound(nodes.begin(), nodes.end(), v);
        return it != nodes.end() && *it == v ? it - nodes.begin() : -1;
    };
    std::vector<EdgeId> hot_edges;
    for (const auto& e : ex.extracted_edges) {
        const auto u = local(e.u), v = local(e.v);
        if (u < 0 || v < 0) continue;
        const auto id = sub.find_edge(static_cast<NodeId>(u), static_cast<NodeId>(v));
        if (id >= 0) hot_edges.push_back(static_cast<EdgeId>(id));
    }
    std::vector<NodeId> hot_nodes;
    for (auto v : ex.extracted_nodes) {
        if (const auto l = local(v); l >= 0) hot_nodes.push_back(static_cast<NodeId>(l));
    }
    std::vector<std::string> labels;
    for (auto v : nodes) labels.push_back(std::to_string(v));
    const std::int64_t target = ex.task == TaskKind::node ? local(static_cast<NodeId>(ex.instance_id)) : -1;
    const auto dot = to_dot(sub, hot_edges, hot_nodes, &labels, target);
    if (a.out.empty()) {
        std::cout << dot;
    } else {
        write_text(a.out, dot);
    }
    return 0;
}

// ---------------------------------------------------------------- driver

void add_override(CLI::App* app, std::map<std::string, std::string>& kv, const std::string& flag,
                  const std::string& key, const std::string& help) {
    app->add_option_function<std::string>(flag, [&kv, key](const std::string& v) { kv[key] = v; }, help);
}

int run(const std::vector<std::string>& argv);

int cmd_replay(const std::string& path) {
    const auto m = read_json(path);
    if (!m.contains("argv") || !m["argv"].is_array() || m["argv"].empty()) {
        throw FormatError(path + ": manifest has no argv");
    }
    auto argv = m["argv"].get<std::vector<std::string>>();
    if (argv.size() > 1 && argv[1] == "replay") throw FormatError("a replay manifest cannot replay itself");
    return run(argv);
}

int run(const std::vector<std::string>& argv) {
    CLI::App app{"Necessity-and-sufficiency explanations for graph convolutional networks"};
    app.require_subcommand(1);

    GenerateArgs gen;
    auto* g = app.add_subcommand("generate", "write a synthetic benchmark (or convert a TU dataset) to JSON");
    g->add_option("--dataset", gen.dataset, "ba-shapes | tree-cycles | tree-grid | mutagenicity | msrc_21")->required();
    g->add_option("--seed", gen.seed, "generator seed");
    g->add_option("--out", gen.out, "output directory")->required();
    g->add_option("--tu-dir", gen.tu_dir, "directory with the TU flat files (real datasets)");

    TrainArgs tr;
    auto* t = app.add_subcommand("train", "train the 3-layer GCN");
    t->add_option("--data", tr.data, "dataset JSON")->required();
    t->add_option("--config", tr.config, "key = value config file");
    t->add_option("--preset", tr.preset, "named defaults (defaults to the dataset name)");
    t->add_option("--out", tr.out, "weights JSON")->required();
    t->add_option("--curve", tr.curve, "training curve CSV (default: next to the weights)");
    add_override(t, tr.overrides, "--lr", "lr", "learning rate");
    add_override(t, tr.overrides, "--epochs", "epochs", "epoch count");
    add_override(t, tr.overrides, "--dropout", "dropout", "dropout rate");
    add_override(t, tr.overrides, "--weight-decay", "weight_decay", "L2 weight decay");
    add_override(t, tr.overrides, "--train-fraction", "train_fraction", "train split fraction");
    add_override(t, tr.overrides, "--seed", "seed", "initialization and split seed");

    ExplainArgs ex;
    auto* e = app.add_subcommand("explain", "optimize explanation masks for selected instances");
    e->add_option("--model", ex.model, "weights JSON")->required();
    e->add_option("--data", ex.data, "dataset JSON")->required();
    e->add_option("--gt", ex.gt, "ground-truth JSON (needed by --motif)");
    e->add_option("--objective", ex.objective, "pns-e | pns-ef | pn-ef | ps-ef | pn-e | ps-e");
    e->add_option("--config", ex.config, "key = value config file");
    e->add_option("--preset", ex.preset, "named defaults (defaults to the dataset name)");
    e->add_flag("--motif", ex.motif, "every motif node");
    e->add_option("--nodes", ex.nodes, "node ids")->delimiter(',');
    e->add_option("--graphs", ex.graphs, "graph indices")->delimiter(',');
    e->add_flag("--all-graphs", ex.all_graphs, "every graph of a graph dataset");
    e->add_option("--sample", ex.sample, "seeded random subsample of the selection");
    e->add_option("--jobs", ex.jobs, "worker threads (default: hardware threads)");
    e->add_option("--out", ex.out, "output directory")->required();
    add_override(e, ex.overrides, "--epochs", "epochs", "optimization steps");
    add_override(e, ex.overrides, "--lr", "lr", "mask step size");
    add_override(e, ex.overrides, "--alpha-e", "alpha_e", "edge L1 weight");
    add_override(e, ex.overrides, "--beta-e", "beta_e", "edge entropy weight");
    add_override(e, ex.overrides, "--alpha-f", "alpha_f", "node L1 weight");
    add_override(e, ex.overrides, "--beta-f", "beta_f", "node entropy weight");
    add_override(e, ex.overrides, "--mc-samples", "mc_samples", "complement draws per expectation per step");
    add_override(e, ex.overrides, "--sigma", "sigma", "noise half-width for both channels");
    add_override(e, ex.overrides, "--seed", "seed", "run seed");
    add_override(e, ex.overrides, "--extraction", "extraction", "threshold | top-k");
    add_override(e, ex.overrides, "--k", "k", "top-K size");
    add_override(e, ex.overrides, "--threshold", "threshold", "extraction threshold");

    EvaluateArgs ev;
    auto* v = app.add_subcommand("evaluate", "score explanation directories (one per seed)");
    v->add_option("--dir", ev.dirs, "explanation directory; repeat for several seeds")->required();
    v->add_option("--model", ev.model, "weights JSON")->required();
    v->add_option("--data", ev.data, "dataset JSON")->required();
    v->add_option("--gt", ev.gt, "ground-truth JSON");
    v->add_option("--out", ev.out, "CSV path (default: stdout)");
    v->add_option("--dataset", ev.dataset, "dataset label in the CSV");
    v->add_option("--method", ev.method, "method label in the CSV (default: the objective)");
    v->add_option("--k", ev.k, "top-K size (default: from the ground truth)");
    v->add_option("--threshold", ev.threshold, "binarization threshold");

    DotArgs dot;
    auto* d = app.add_subcommand("export-dot", "render an explanation as Graphviz DOT");
    d->add_option("--data", dot.data, "dataset JSON")->required();
    d->add_option("--explanation", dot.explanation, "explanation JSON")->required();
    d->add_option("--out", dot.out, "DOT path (default: stdout)");

    std::string manifest;
    auto* r = app.add_subcommand("replay", "re-run the command recorded in a manifest");
    r->add_option("manifest", manifest, "manifest JSON")->required();

    std::vector<std::string> args(argv.rbegin(), argv.rend() - 1);
    try {
        app.parse(args);
    } catch (const CLI::CallForHelp& err) {
        return app.exit(err);
    } catch (const CLI::ParseError& err) {
        std::fprintf(stderr, "error: %s\n", err.what());
        return 2;
    }

    if (g->parsed()) return cmd_generate(gen, argv);
    if (t->parsed()) return cmd_train(tr, argv);
    if (e->parsed()) return cmd_explain(ex, argv);
    if (v->parsed()) return cmd_evaluate(ev, argv);
    if (d->parsed()) return cmd_export_dot(dot);
    return cmd_replay(manifest);
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(std::vector<std::string>(argv, argv + argc));
    } catch (const std::exception& err) {
        std::fprintf(stderr, "error: %s\n", err.what());
        return 1;
    }
}
