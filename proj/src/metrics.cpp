#include "tomo/metrics.hpp"

#include <cmath>
#include <string>

#include "tomo/errors.hpp"

namespace tomo {

namespace {
// Slack for the distribution consistency checks; empirical frequencies obey
// them exactly, exact products up to rounding.
constexpr double kProbSlack = 1e-12;
}  // namespace

JointLeafDistribution::JointLeafDistribution(double p_i, double p_j, double p_ij)
    : p_i(p_i), p_j(p_j), p_ij(p_ij) {
    auto in_unit = [](double p) { return p >= 0.0 && p <= 1.0; };
    if (!in_unit(p_i) || !in_unit(p_j) || !in_unit(p_ij))
        throw DegenerateDistribution("probabilities must lie in [0,1]");
    if (p_ij > std::min(p_i, p_j) + kProbSlack)
        throw DegenerateDistribution("joint probability exceeds a marginal");
    if (p_ij < std::max(0.0, p_i + p_j - 1.0) - kProbSlack)
        throw DegenerateDistribution("joint probability below the Frechet lower bound");
}

TransitionPair::TransitionPair(Matrix2 f, Matrix2 b) : forward(f), backward(b) {
    for (const auto* m : {&forward, &backward}) {
        for (int r = 0; r < 2; ++r) {
            double sum = 0.0;
            for (int c = 0; c < 2; ++c) {
                const double v = (*m)[r][c];
                if (!(v >= 0.0 && v <= 1.0))
                    throw std::invalid_argument("transition entries must lie in [0,1]");
                sum += v;
            }
            if (std::abs(sum - 1.0) > 1e-9)
                throw std::invalid_argument("transition rows must sum to 1");
        }
    }
}

double loss_link_length(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw InvalidRate("success rate must lie in (0,1), got " + std::to_string(alpha));
    return -std::log(alpha);
}

double rate_from_length(double length) {
    if (!(length > 0.0))
        throw InvalidLength("link length must be positive, got " + std::to_string(length));
    return std::exp(-length);
}

double true_loss_distance(const JointLeafDistribution& dist) {
    if (!(dist.p_i > 0.0) || !(dist.p_j > 0.0) || !(dist.p_ij > 0.0))
        throw DegenerateDistribution("loss distance requires strictly positive probabilities");
    return std::log(dist.p_i * dist.p_j / (dist.p_ij * dist.p_ij));
}

namespace {
double det2(const TransitionPair::Matrix2& m) {
    return m[0][0] * m[1][1] - m[0][1] * m[1][0];
}
}  // namespace

double log_det_distance(const TransitionPair& t) {
    double total = 0.0;
    for (const auto* m : {&t.forward, &t.backward}) {
        const double d = std::abs(det2(*m));
        if (d == 0.0) throw SingularTransition("transition matrix is singular");
        if (d >= 1.0) throw PermutationLike("transition matrix is permutation-like (|det| >= 1)");
        total += -std::log(d);
    }
    return total;
}

DistanceMatrix fuse_distances(std::span<const DistanceMatrix> parts,
                              std::span<const double> coeffs) {
    if (parts.empty()) throw InvalidCoefficients("fusion requires at least one matrix");
    if (parts.size() != coeffs.size())
        throw InvalidCoefficients("one coefficient per matrix required");
    double sum = 0.0;
    for (double c : coeffs) sum += c;
    if (std::abs(sum - 1.0) > 1e-12)
        throw InvalidCoefficients("coefficients must sum to 1, got " + std::to_string(sum));

    const auto& labels = parts[0].labels();
    for (const auto& p : parts)
        if (p.labels() != labels) throw LabelMismatch("fused matrices must share the label list");

    DistanceMatrix out(labels);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        for (std::size_t j = i + 1; j < labels.size(); ++j) {
            double v = 0.0;
            for (std::size_t k = 0; k < parts.size(); ++k) v += coeffs[k] * parts[k].at(i, j);
            out.set(i, j, v);
        }
    }
    return out;
}

}  // namespace tomo
