#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "pns/datasets.hpp"
#include "pns/explainer.hpp"
#include "pns/instance.hpp"

namespace pns {

/// Deterministic 64-bit mixing of a run seed with an instance id.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t id);

Instance node_instance(const NodeDataset& dataset, std::shared_ptr<const GcnParams> model, NodeId v);
Instance graph_instance(const GraphDataset& dataset, std::shared_ptr<const GcnParams> model, std::size_t index);

/// Explains every instance with at most `jobs` worker threads. Instance i
/// runs with seed mix_seed(config.seed, ids[i]), so results do not depend
/// on the worker count. The first failure is rethrown after all workers
/// stop.
std::vector<Explanation> explain_all(std::span<const Instance> instances, std::span<const std::uint64_t> ids,
                                     const ExplainConfig& config, unsigned jobs);

/// Ground-truth edges of `v` renumbered into an explained subgraph; edges
/// outside the subgraph are dropped.
std::vector<std::uint32_t> local_truth(const SyntheticGroundTruth& gt, NodeId v, const SubgraphMapping& mapping);

/// The explained view of an instance: the receptive-field subgraph for node
/// tasks, the instance itself for graph tasks.
Subgraph explained_view(const Instance& instance);

}  // namespace pns
