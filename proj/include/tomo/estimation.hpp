#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "tomo/distance_matrix.hpp"
#include "tomo/metrics.hpp"
#include "tomo/sampling.hpp"
#include "tomo/tree.hpp"

namespace tomo {

enum class ZeroCountPolicy { error, clamp };

struct EstimatorConfig {
    ZeroCountPolicy zero_count_policy = ZeroCountPolicy::clamp;
    // Pseudo-count substituted for a zero sum before dividing by n.
    double clamp_value = 0.5;
};

struct EstimateResult {
    DistanceMatrix dist;
    int zero_count_clamps = 0;      // sums replaced by the pseudo-count
    int negative_clamps = 0;        // off-diagonal entries clamped up to 0
};

// Pairwise distance from sample means: log(mi * mj / mij^2). Exposed so exact
// probabilities can be plugged in where empirical means would go.
double loss_distance_from_means(double mean_i, double mean_j, double mean_ij);

// Estimated distance matrix over the sample labels: d(i,j) from the empirical
// means, zero diagonal. For the constant anchor column this reduces to
// -log(mean). Zero counts follow the configured policy; negative estimates
// are clamped to 0 and counted.
EstimateResult empirical_distance_matrix(const SampleSet& samples, const EstimatorConfig& cfg = {});

// Empirical 2x2 conditional tables between two observed terminals. A
// conditioning outcome that never occurs follows the zero-count policy
// (error, or a uniform row under clamp).
TransitionPair transition_pair_from_samples(const SampleSet& samples, const std::string& label_i,
                                            const std::string& label_j,
                                            const EstimatorConfig& cfg = {});

struct DeviationPoint {
    int sample_size;
    double prob_exceed;                 // fraction of trials with any pair >= epsilon
    std::vector<double> per_pair_max;   // max |dhat - d| per pair, across trials
};

struct DeviationCurve {
    std::vector<std::string> labels;
    std::vector<std::pair<std::size_t, std::size_t>> pairs;  // label indices, i < j
    double epsilon;
    int trials;
    std::vector<DeviationPoint> points;

    // Long-format rows: n, epsilon, prob_exceed, label_i, label_j, max_abs_deviation.
    void save_csv(std::ostream& out) const;
};

// Repeatedly simulates the tree at each sample size and measures how often
// the worst terminal-pair deviation from the exact distances reaches epsilon.
// Trial r at size index si uses engine seed mix_seed(rng_seed, si, r); trials
// may run in parallel, with results identical to the serial order.
DeviationCurve deviation_curve(const RoutedTree& tree, const LinkMetric& metric,
                               const std::vector<int>& sample_sizes, int trials, double epsilon,
                               std::uint64_t rng_seed, const EstimatorConfig& cfg = {},
                               bool parallel = true);

}  // namespace tomo
