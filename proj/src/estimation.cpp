#include "tomo/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <ostream>
#include <stdexcept>

#include "tomo/errors.hpp"
#include "tomo/rng.hpp"
#include "tomo/text.hpp"

namespace tomo {

double loss_distance_from_means(double mean_i, double mean_j, double mean_ij) {
    return std::log(mean_i * mean_j / (mean_ij * mean_ij));
}

namespace {

double resolve_count(double count, const EstimatorConfig& cfg, const std::string& what,
                     int& clamps) {
    if (count > 0.0) return count;
    if (cfg.zero_count_policy == ZeroCountPolicy::error)
        throw ZeroCountError("zero count for " + what);
    ++clamps;
    return cfg.clamp_value;
}

}  // namespace

EstimateResult empirical_distance_matrix(const SampleSet& samples, const EstimatorConfig& cfg) {
    if (samples.n < 1) throw std::invalid_argument("sample set is empty");
    if (cfg.clamp_value <= 0.0) throw std::invalid_argument("clamp_value must be positive");
    const std::size_t k = samples.labels.size();
    const double n = static_cast<double>(samples.n);

    EstimateResult res;
    res.dist = DistanceMatrix(samples.labels);

    std::vector<double> marg(k);
    for (std::size_t i = 0; i < k; ++i) {
        double c = 0.0;
        for (std::uint8_t b : samples.columns[i]) c += b;
        marg[i] = resolve_count(c, cfg, "terminal " + samples.labels[i], res.zero_count_clamps) / n;
    }

    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = i + 1; j < k; ++j) {
            const auto& ci = samples.columns[i];
            const auto& cj = samples.columns[j];
            double joint = 0.0;
            for (std::size_t t = 0; t < samples.n; ++t) joint += ci[t] & cj[t];
            joint = resolve_count(joint, cfg,
                                  "pair (" + samples.labels[i] + "," + samples.labels[j] + ")",
                                  res.zero_count_clamps) /
                    n;
            double d = loss_distance_from_means(marg[i], marg[j], joint);
            if (d < 0.0) {
                d = 0.0;
                ++res.negative_clamps;
            }
            res.dist.set(i, j, d);
        }
    }
    return res;
}

TransitionPair transition_pair_from_samples(const SampleSet& samples, const std::string& label_i,
                                            const std::string& label_j,
                                            const EstimatorConfig& cfg) {
    const auto& ci = samples.column(label_i);
    const auto& cj = samples.column(label_j);
    double cell[2][2] = {{0, 0}, {0, 0}};
    for (std::size_t t = 0; t < samples.n; ++t) cell[ci[t]][cj[t]] += 1.0;

    auto rows = [&](bool forward) {
        TransitionPair::Matrix2 m;
        for (int a = 0; a < 2; ++a) {
            const double c0 = forward ? cell[a][0] : cell[0][a];
            const double c1 = forward ? cell[a][1] : cell[1][a];
            if (c0 + c1 == 0.0) {
                if (cfg.zero_count_policy == ZeroCountPolicy::error)
                    throw ZeroCountError("zero count for outcome " + std::to_string(a) + " of " +
                                         (forward ? label_i : label_j));
                m[a] = {0.5, 0.5};
            } else {
                m[a] = {c0 / (c0 + c1), c1 / (c0 + c1)};
            }
        }
        return m;
    };
    return TransitionPair(rows(true), rows(false));
}

void DeviationCurve::save_csv(std::ostream& out) const {
    out << "n,epsilon,prob_exceed,label_i,label_j,max_abs_deviation\n";
    for (const auto& pt : points) {
        for (std::size_t p = 0; p < pairs.size(); ++p) {
            out << pt.sample_size << ',' << text::format_double(epsilon) << ','
                << text::format_double(pt.prob_exceed) << ',' << labels[pairs[p].first] << ','
                << labels[pairs[p].second] << ',' << text::format_double(pt.per_pair_max[p])
                << '\n';
        }
    }
}

DeviationCurve deviation_curve(const RoutedTree& tree, const LinkMetric& metric,
                               const std::vector<int>& sample_sizes, int trials, double epsilon,
                               std::uint64_t rng_seed, const EstimatorConfig& cfg, bool parallel) {
    if (trials < 1) throw std::invalid_argument("trials must be >= 1");
    if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
    for (std::size_t i = 1; i < sample_sizes.size(); ++i)
        if (sample_sizes[i] <= sample_sizes[i - 1])
            throw std::invalid_argument("sample sizes must be strictly increasing");

    const DistanceMatrix exact = terminal_distance_matrix(tree, metric);

    DeviationCurve curve;
    curve.labels = exact.labels();
    curve.epsilon = epsilon;
    curve.trials = trials;
    for (std::size_t i = 0; i < curve.labels.size(); ++i)
        for (std::size_t j = i + 1; j < curve.labels.size(); ++j) curve.pairs.emplace_back(i, j);

    const auto simulate_fn = tree.orientation() == Orientation::source_rooted
                                 ? simulate_multicast
                                 : simulate_reverse_multicast;

    for (std::size_t si = 0; si < sample_sizes.size(); ++si) {
        const int n = sample_sizes[si];
        std::vector<std::vector<double>> trial_max(trials,
                                                   std::vector<double>(curve.pairs.size(), 0.0));
        std::vector<std::exception_ptr> errors(trials);

#pragma omp parallel for schedule(dynamic) if (parallel)
        for (int r = 0; r < trials; ++r) {
            try {
                const SampleSet s = simulate_fn(tree, metric, static_cast<std::size_t>(n),
                                                rng::mix_seed(rng_seed, si, r));
                const DistanceMatrix est = empirical_distance_matrix(s, cfg).dist;
                for (std::size_t p = 0; p < curve.pairs.size(); ++p) {
                    const auto [a, b] = curve.pairs[p];
                    trial_max[r][p] = std::abs(est.at(a, b) - exact.at(a, b));
                }
            } catch (...) {
                errors[r] = std::current_exception();
            }
        }
        for (int r = 0; r < trials; ++r)
            if (errors[r]) std::rethrow_exception(errors[r]);

        DeviationPoint pt;
        pt.sample_size = n;
        pt.per_pair_max.assign(curve.pairs.size(), 0.0);
        int exceed = 0;
        for (int r = 0; r < trials; ++r) {
            bool any = false;
            for (std::size_t p = 0; p < curve.pairs.size(); ++p) {
                pt.per_pair_max[p] = std::max(pt.per_pair_max[p], trial_max[r][p]);
                if (trial_max[r][p] >= epsilon) any = true;
            }
            if (any) ++exceed;
        }
        pt.prob_exceed = static_cast<double>(exceed) / trials;
        curve.points.push_back(std::move(pt));
    }
    return curve;
}

}  // namespace tomo
