#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "tomo/estimation.hpp"
#include "tomo/inference.hpp"
#include "tomo/tree.hpp"

namespace tomo {

enum class Algorithm { nj, rnj };
enum class Direction { forward, reverse };

std::string to_string(Algorithm a);
std::string to_string(Direction d);
std::string to_string(TreeKind k);

// Full description of one Monte-Carlo scenario. Parsed from a line-oriented
// key=value file ('#' starts a comment); see parse() for the key list.
struct ExperimentConfig {
    TreeKind tree_kind = TreeKind::binary;
    int n_leaves = 10;
    double alpha_low = 0.90;
    double alpha_high = 0.99;
    std::vector<int> sample_sizes;
    int trials = 100;
    std::vector<Algorithm> algorithms = {Algorithm::nj, Algorithm::rnj};
    Direction direction = Direction::forward;
    std::uint64_t base_seed = 1;
    ZeroCountPolicy zero_count_policy = ZeroCountPolicy::clamp;
    double clamp_value = 0.5;
    std::optional<double> delta_override;
    int max_children = 5;
    double contract_prob = 0.5;

    static ExperimentConfig parse(std::istream& in);
    void validate() const;
};

struct ResultRow {
    Algorithm algorithm;
    int sample_size = 0;
    int trials = 0;
    int count_correct = 0;
    int aborted_trials = 0;
    double fraction_correct = 0.0;
    double mean_eps_E = 0.0;  // over correctly inferred trees only; NaN if none
};

struct ExperimentResult {
    ExperimentConfig config;
    std::vector<ResultRow> rows;  // sorted by (algorithm, sample_size)

    // Columns: algorithm,direction,tree_kind,n_leaves,sample_size,trials,
    // fraction_correct,mean_eps_E,aborted_trials,base_seed,rng_id.
    void save_csv(std::ostream& out) const;
};

// Per-link relative errors |rate_hat - rate| / rate between a truth tree
// (with rates) and an inferred tree of equal topology, matched through the
// canonical isomorphism; .mean averages over all links. Throws
// TopologyMismatch when the topologies differ.
struct LinkErrors {
    std::vector<std::pair<int, double>> per_link;  // keyed by truth child node id
    double mean = 0.0;
};
LinkErrors relative_errors(const RoutedTree& truth, const LinkMetric& truth_metric,
                           const InferredTree& inferred);

// Outcome of one (trial, sample size, algorithm) cell, exposed for tests.
struct TrialOutcome {
    bool aborted = false;
    bool correct = false;
    double eps_E = 0.0;
};

// Runs the full pipeline per trial: generate a tree and rates, simulate at
// every sample size, estimate distances, run each algorithm, compare with the
// truth. Seeds are derived as mix_seed(base_seed, trial, 1) for the topology,
// mix_seed(base_seed, trial, 2) for the rates, and
// mix_seed(base_seed, trial, 16 + size_index) for the probes, so parallel and
// serial runs produce identical results. `details`, when non-null, receives
// trials x sizes x algorithms outcomes.
ExperimentResult run_experiment(const ExperimentConfig& cfg, bool parallel = true,
                                std::vector<TrialOutcome>* details = nullptr);

// Same pipeline on receiver-rooted trees; the receiver takes the root role
// throughout and the estimation and inference stages are reused unchanged.
ExperimentResult run_reverse_experiment(ExperimentConfig cfg, bool parallel = true,
                                        std::vector<TrialOutcome>* details = nullptr);

}  // namespace tomo
