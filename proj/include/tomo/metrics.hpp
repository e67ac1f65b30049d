#pragma once

#include <array>
#include <span>
#include <vector>

#include "tomo/distance_matrix.hpp"

namespace tomo {

// Joint outcome summary for one pair of terminals: marginal success
// probabilities and the probability both succeed on the same probe.
struct JointLeafDistribution {
    JointLeafDistribution(double p_i, double p_j, double p_ij);
    double p_i;
    double p_j;
    double p_ij;
};

// 2x2 conditional outcome tables for an ordered node pair, row-stochastic,
// rows indexed by the conditioning outcome (0, 1).
struct TransitionPair {
    using Matrix2 = std::array<std::array<double, 2>, 2>;
    TransitionPair(Matrix2 forward, Matrix2 backward);
    Matrix2 forward;
    Matrix2 backward;
};

// Link length of the loss metric: -log(alpha), natural log.
double loss_link_length(double alpha);

// Inverse of loss_link_length: exp(-length).
double rate_from_length(double length);

// Terminal-pair distance of the loss metric from an exact joint outcome
// distribution: log(p_i * p_j / p_ij^2).
double true_loss_distance(const JointLeafDistribution& dist);

// Terminal-pair (or per-link) distance of the log-determinant metric:
// -log|det forward| - log|det backward|.
double log_det_distance(const TransitionPair& t);

// Entrywise linear combination of matrices over identical label lists;
// coefficients must sum to 1 within 1e-12.
DistanceMatrix fuse_distances(std::span<const DistanceMatrix> parts,
                              std::span<const double> coeffs);

}  // namespace tomo
