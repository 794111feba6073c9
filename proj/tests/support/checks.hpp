#pragma once

#include <cstdint>
#include <memory>
#include <random>
#include <vector>

#include "pns/explainer.hpp"
#include "pns/instance.hpp"

namespace pns::testing {

/// Connected random graph on `n` nodes with random features and a random
/// (untrained) model.
Instance random_instance(std::mt19937_64& rng, std::size_t n, TaskKind kind);

/// |a - n| / max(|a|, |n|, floor); the floor keeps near-zero entries from
/// dominating through round-off.
double rel_error(double analytic, double numeric, double floor = 1e-6);

struct GradCheck {
    double mask_error = 0.0;   // worst over mask logits of overall_loss
    double model_error = 0.0;  // worst over weights of cross-entropy
    std::size_t entries = 0;
};

/// Central differences with step `h` on every mask logit (edge-only and
/// joint objectives, noise frozen) and every model parameter.
GradCheck check_gradients(const Instance& instance, std::mt19937_64& rng, double h = 1e-5);

struct LemmaStats {
    std::size_t tables = 0;
    std::size_t monotone = 0;
    std::size_t bound_violations = 0;     // bound > exact
    std::size_t equality_violations = 0;  // monotone but bound != exact
};

/// Random tables over dyadic priors so sums are exact in binary floating
/// point.
LemmaStats lemma_suite(std::size_t tables, std::uint64_t seed);

/// Small graph-classification problem: does the graph contain a triangle.
struct ToyProblem {
    std::vector<Instance> held_out;  // test split, built against the model
    std::shared_ptr<const GcnParams> model;
};

/// Trains a toy triangle detector on random graphs with at most
/// `max_edges` edges.
ToyProblem triangle_toy(std::uint64_t seed, std::size_t max_edges);

struct OracleCase {
    double oracle_value = 0.0;
    double achieved = 0.0;  // oracle value of the binarized explanation
};

OracleCase oracle_case(const Instance& instance, std::uint64_t seed);

}  // namespace pns::testing
