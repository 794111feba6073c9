#include "pns/workflow.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace pns {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t id) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (id + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

Instance node_instance(const NodeDataset& dataset, std::shared_ptr<const GcnParams> model, NodeId v) {
    if (v >= dataset.graph.num_nodes()) throw std::out_of_range("node " + std::to_string(v) + " out of range");
    return build_instance(dataset.graph, dataset.features, Task::node(v, dataset.labels[v]), std::move(model));
}

Instance graph_instance(const GraphDataset& dataset, std::shared_ptr<const GcnParams> model, std::size_t index) {
    if (index >= dataset.graphs.size()) throw std::out_of_range("graph " + std::to_string(index) + " out of range");
    const auto& g = dataset.graphs[index];
    return build_instance(g.graph, g.features, Task::graph(g.label), std::move(model));
}

std::vector<Explanation> explain_all(std::span<const Instance> instances, std::span<const std::uint64_t> ids,
                                     const ExplainConfig& config, unsigned jobs) {
    if (instances.size() != ids.size()) throw std::invalid_argument("explain_all needs one id per instance");
    std::vector<Explanation> out(instances.size());
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mutex;

    auto worker = [&] {
        for (std::size_t i = next++; i < instances.size() && !failed; i = next++) {
            try {
                ExplainConfig c = config;
                c.seed = mix_seed(config.seed, ids[i]);
                out[i] = explain(instances[i], c);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
                failed = true;
            }
        }
    };
    const auto n = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(instances.size())));
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < n; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
    return out;
}

std::vector<std::uint32_t> local_truth(const SyntheticGroundTruth& gt, NodeId v, const SubgraphMapping& mapping) {
    std::vector<std::uint32_t> out;
    if (!gt.has(v)) return out;
    for (auto e : gt.node_edges[v]) {
        const auto it = std::find(mapping.edges.begin(), mapping.edges.end(), e);
        if (it != mapping.edges.end()) out.push_back(static_cast<std::uint32_t>(it - mapping.edges.begin()));
    }
    std::sort(out.begin(), out.end());
    return out;
}

Subgraph explained_view(const Instance& instance) {
    if (instance.task.kind == TaskKind::node) {
        Subgraph sub = khop_subgraph(instance, instance.task.target, receptive_field_hops(*instance.model));
        sub.instance.predicted = instance.predicted;
        return sub;
    }
    Subgraph sub{instance, {}};
    sub.mapping.nodes.resize(instance.graph.num_nodes());
    sub.mapping.edges.resize(instance.graph.num_edges());
    for (std::size_t i = 0; i < sub.mapping.nodes.size(); ++i) sub.mapping.nodes[i] = static_cast<NodeId>(i);
    for (std::size_t i = 0; i < sub.mapping.edges.size(); ++i) sub.mapping.edges[i] = static_cast<EdgeId>(i);
    return sub;
}

}  // namespace pns
