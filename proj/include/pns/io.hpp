#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "pns/datasets.hpp"
#include "pns/explainer.hpp"
#include "pns/gcn.hpp"
#include "pns/trainer.hpp"

namespace pns {

using Json = nlohmann::json;

/// Thrown for malformed or inconsistent files.
class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

Json graph_to_json(const SparseGraph& graph);
SparseGraph graph_from_json(const Json& j);
Json features_to_json(const FeatureMatrix& x);
FeatureMatrix features_from_json(const Json& j, std::size_t rows);

/// Either a single graph with per-node labels or a list of labelled graphs.
struct DatasetFile {
    TaskKind task = TaskKind::node;
    NodeDataset nodes;   // node tasks
    GraphDataset graphs; // graph tasks

    const std::string& name() const { return task == TaskKind::node ? nodes.name : graphs.name; }
    int num_classes() const { return task == TaskKind::node ? nodes.num_classes : graphs.num_classes; }
};

Json dataset_to_json(const NodeDataset& d);
Json dataset_to_json(const GraphDataset& d);
DatasetFile dataset_from_json(const Json& j);

/// Ground truth of a node dataset; edges are written as [u,v] pairs.
Json ground_truth_to_json(const SparseGraph& graph, const SyntheticGroundTruth& gt);
SyntheticGroundTruth ground_truth_from_json(const Json& j, const SparseGraph& graph);

Json params_to_json(const GcnParams& p);
GcnParams params_from_json(const Json& j);

/// Explanation export. `instance_id` is the node id for node tasks and the
/// graph index for graph tasks. Masks are listed against `edges` / `nodes`
/// in original ids so imported masks can be matched by endpoints.
Json explanation_to_json(const Explanation& ex, std::uint64_t instance_id);

struct ImportedExplanation {
    TaskKind task = TaskKind::node;
    std::uint64_t instance_id = 0;
    std::string objective;
    std::vector<Edge> edges;          // empty when the file omits them
    std::vector<NodeId> nodes;        // empty when the file omits them
    std::vector<double> edge_mask;
    std::vector<double> node_mask;
    std::vector<Edge> extracted_edges;
    std::vector<NodeId> extracted_nodes;
    double pns_lb = 0.0, pn_lb = 0.0, ps_lb = 0.0;
};

ImportedExplanation explanation_from_json(const Json& j);

/// Lays imported masks onto `target` (an explained instance in original
/// ids given by `mapping`). Entries are matched by endpoints when the file
/// lists them and by position otherwise; missing entries count as 0 and a
/// missing node mask as all ones.
MaskPair align_masks(const ImportedExplanation& ex, const Instance& target, const SubgraphMapping& mapping);

/// Graphviz rendering; `edges` and `nodes` are highlighted.
std::string to_dot(const SparseGraph& graph, const std::vector<EdgeId>& edges, const std::vector<NodeId>& nodes,
                   const std::vector<std::string>* labels = nullptr, std::int64_t target = -1);

Json read_json(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);
void write_json(const std::filesystem::path& path, const Json& j);

/// `key = value` lines; `#` starts a comment. Keys may use '-' or '_'.
std::map<std::string, std::string> parse_key_values(const std::string& text);
std::map<std::string, std::string> read_key_values(const std::filesystem::path& path);

/// Unknown keys throw FormatError. The key `preset` selects the named
/// per-dataset defaults before the other keys apply.
void apply_train_config(TrainConfig& c, const std::map<std::string, std::string>& kv);
void apply_explain_config(ExplainConfig& c, const std::map<std::string, std::string>& kv);

/// Per-dataset training defaults (lr 0.001, 2000 epochs for the synthetic
/// sets).
TrainConfig train_preset(const std::string& dataset);

Json train_config_to_json(const TrainConfig& c);
Json explain_config_to_json(const ExplainConfig& c);

std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::filesystem::path& path);

struct RunManifest {
    std::string command;
    std::vector<std::string> argv;
    Json config;
    std::uint64_t seed = 0;
    std::vector<std::string> inputs;
    std::vector<std::string> outputs;
    double wall_seconds = 0.0;
    Json results;

    /// Hashes every input and output that exists.
    Json to_json() const;
};

}  // namespace pns
