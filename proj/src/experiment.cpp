#include "tomo/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <istream>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <type_traits>

#include "tomo/errors.hpp"
#include "tomo/rng.hpp"
#include "tomo/text.hpp"

namespace tomo {

std::string to_string(Algorithm a) { return a == Algorithm::nj ? "nj" : "rnj"; }
std::string to_string(Direction d) { return d == Direction::forward ? "forward" : "reverse"; }
std::string to_string(TreeKind k) { return k == TreeKind::binary ? "binary" : "general"; }

namespace {

[[noreturn]] void bad_config(const std::string& what) {
    throw std::invalid_argument("experiment config: " + what);
}

template <typename T>
T parse_num(const std::string& key, const std::string& value) {
    if constexpr (std::is_floating_point_v<T>) {
        double v;
        if (!text::parse_double(value, v)) bad_config("bad number for " + key + ": " + value);
        return static_cast<T>(v);
    } else if constexpr (std::is_same_v<T, std::uint64_t>) {
        unsigned long long v;
        if (!text::parse_uint64(value, v)) bad_config("bad integer for " + key + ": " + value);
        return static_cast<T>(v);
    } else {
        long long v;
        if (!text::parse_int(value, v)) bad_config("bad integer for " + key + ": " + value);
        return static_cast<T>(v);
    }
}

}  // namespace

ExperimentConfig ExperimentConfig::parse(std::istream& in) {
    ExperimentConfig cfg;
    cfg.sample_sizes.clear();
    std::string line;
    bool have_sizes = false;
    while (std::getline(in, line)) {
        auto sv = std::string_view(line);
        if (auto hash = sv.find('#'); hash != std::string_view::npos) sv = sv.substr(0, hash);
        sv = text::trim(sv);
        if (sv.empty()) continue;
        const auto eq = sv.find('=');
        if (eq == std::string_view::npos) bad_config("expected key=value, got: " + std::string(sv));
        const std::string key(text::trim(sv.substr(0, eq)));
        const std::string value(text::trim(sv.substr(eq + 1)));

        if (key == "tree_kind") {
            if (value == "binary") cfg.tree_kind = TreeKind::binary;
            else if (value == "general") cfg.tree_kind = TreeKind::general;
            else bad_config("tree_kind must be binary or general");
        } else if (key == "n_leaves") {
            cfg.n_leaves = parse_num<int>(key, value);
        } else if (key == "alpha_range") {
            const auto parts = text::split(value, ',');
            if (parts.size() != 2) bad_config("alpha_range must be low,high");
            cfg.alpha_low = parse_num<double>(key, parts[0]);
            cfg.alpha_high = parse_num<double>(key, parts[1]);
        } else if (key == "sample_sizes") {
            cfg.sample_sizes.clear();
            for (const auto& p : text::split(value, ','))
                cfg.sample_sizes.push_back(parse_num<int>(key, p));
            have_sizes = true;
        } else if (key == "trials") {
            cfg.trials = parse_num<int>(key, value);
        } else if (key == "algorithms") {
            cfg.algorithms.clear();
            for (const auto& p : text::split(value, ',')) {
                const std::string a(text::trim(p));
                if (a == "nj") cfg.algorithms.push_back(Algorithm::nj);
                else if (a == "rnj") cfg.algorithms.push_back(Algorithm::rnj);
                else bad_config("algorithms must list nj and/or rnj");
            }
        } else if (key == "direction") {
            if (value == "forward") cfg.direction = Direction::forward;
            else if (value == "reverse") cfg.direction = Direction::reverse;
            else bad_config("direction must be forward or reverse");
        } else if (key == "base_seed") {
            cfg.base_seed = parse_num<std::uint64_t>(key, value);
        } else if (key == "zero_count_policy") {
            if (value == "clamp") cfg.zero_count_policy = ZeroCountPolicy::clamp;
            else if (value == "error") cfg.zero_count_policy = ZeroCountPolicy::error;
            else bad_config("zero_count_policy must be clamp or error");
        } else if (key == "clamp_value") {
            cfg.clamp_value = parse_num<double>(key, value);
        } else if (key == "delta_override") {
            cfg.delta_override = parse_num<double>(key, value);
        } else if (key == "max_children") {
            cfg.max_children = parse_num<int>(key, value);
        } else if (key == "contract_prob") {
            cfg.contract_prob = parse_num<double>(key, value);
        } else {
            bad_config("unknown key: " + key);
        }
    }
    if (!have_sizes) bad_config("sample_sizes is required");
    cfg.validate();
    return cfg;
}

void ExperimentConfig::validate() const {
    if (n_leaves < 2) bad_config("n_leaves must be >= 2");
    if (!(alpha_low > 0.0 && alpha_high < 1.0 && alpha_low < alpha_high))
        bad_config("alpha_range must satisfy 0 < low < high < 1");
    if (trials < 1) bad_config("trials must be >= 1");
    if (sample_sizes.empty()) bad_config("sample_sizes must be nonempty");
    for (std::size_t i = 0; i < sample_sizes.size(); ++i) {
        if (sample_sizes[i] < 1) bad_config("sample sizes must be >= 1");
        if (i && sample_sizes[i] <= sample_sizes[i - 1])
            bad_config("sample_sizes must be strictly increasing");
    }
    if (algorithms.empty()) bad_config("algorithms must be nonempty");
    if (clamp_value <= 0.0) bad_config("clamp_value must be positive");
    if (delta_override && !(*delta_override > 0.0)) bad_config("delta_override must be positive");
    if (max_children < 2) bad_config("max_children must be >= 2");
    if (!(contract_prob >= 0.0 && contract_prob <= 1.0))
        bad_config("contract_prob must lie in [0,1]");
}

LinkErrors relative_errors(const RoutedTree& truth, const LinkMetric& truth_metric,
                           const InferredTree& inferred) {
    const auto pairs = matched_links(truth, inferred.tree);
    const auto rates = rates_from_tree(inferred);

    LinkErrors out;
    double sum = 0.0;
    for (const auto& [tc, ic] : pairs) {
        const double alpha = truth_metric.rate(tc);
        const double alpha_hat = rates[ic - 1].rate;
        const double eps = std::abs(alpha_hat - alpha) / alpha;
        out.per_link.emplace_back(tc, eps);
        sum += eps;
    }
    out.mean = out.per_link.empty() ? 0.0 : sum / static_cast<double>(out.per_link.size());
    return out;
}

namespace {

InferredTree run_algorithm(Algorithm alg, TreeKind kind, const DistanceMatrix& dist,
                           double delta) {
    const InferenceConfig icfg{delta};
    if (kind == TreeKind::binary)
        return alg == Algorithm::nj ? nj_binary(dist) : rnj_binary(dist);
    return alg == Algorithm::nj ? nj_general(dist, icfg) : rnj_general(dist, icfg);
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg, bool parallel,
                                std::vector<TrialOutcome>* details) {
    cfg.validate();
    const std::size_t n_sizes = cfg.sample_sizes.size();
    const std::size_t n_algs = cfg.algorithms.size();
    const std::size_t cells = static_cast<std::size_t>(cfg.trials) * n_sizes * n_algs;

    std::vector<TrialOutcome> out(cells);
    std::vector<std::string> failures(cfg.trials);
    const EstimatorConfig est_cfg{cfg.zero_count_policy, cfg.clamp_value};

#pragma omp parallel for schedule(dynamic) if (parallel)
    for (int t = 0; t < cfg.trials; ++t) {
        try {
            RoutedTree tree =
                random_tree(cfg.n_leaves, cfg.tree_kind, cfg.max_children,
                            rng::mix_seed(cfg.base_seed, t, 1),
                            RandomTreeOptions{cfg.contract_prob, "s"});
            if (cfg.direction == Direction::reverse) tree = tree.mirrored();

            rng::Engine rate_eng(rng::mix_seed(cfg.base_seed, t, 2));
            std::vector<double> rates(tree.node_count(),
                                      std::numeric_limits<double>::quiet_NaN());
            for (int v = 1; v < tree.node_count(); ++v)
                rates[v] = rng::uniform(rate_eng, cfg.alpha_low, cfg.alpha_high);
            const LinkMetric metric = LinkMetric::from_rates(rates);

            double delta;
            if (cfg.delta_override) {
                delta = *cfg.delta_override;
            } else {
                delta = std::numeric_limits<double>::infinity();
                for (int v = 1; v < tree.node_count(); ++v)
                    delta = std::min(delta, metric.length(v));
            }

            for (std::size_t si = 0; si < n_sizes; ++si) {
                const std::uint64_t probe_seed = rng::mix_seed(cfg.base_seed, t, 16 + si);
                const SampleSet samples =
                    cfg.direction == Direction::forward
                        ? simulate_multicast(tree, metric, cfg.sample_sizes[si], probe_seed)
                        : simulate_reverse_multicast(tree, metric, cfg.sample_sizes[si],
                                                     probe_seed);

                DistanceMatrix dist;
                bool aborted = false;
                try {
                    dist = empirical_distance_matrix(samples, est_cfg).dist;
                } catch (const ZeroCountError&) {
                    aborted = true;
                }

                for (std::size_t ai = 0; ai < n_algs; ++ai) {
                    TrialOutcome& cell =
                        out[(static_cast<std::size_t>(t) * n_sizes + si) * n_algs + ai];
                    if (aborted) {
                        cell.aborted = true;
                        continue;
                    }
                    const InferredTree inferred =
                        run_algorithm(cfg.algorithms[ai], cfg.tree_kind, dist, delta);
                    if (trees_equal(tree, inferred.tree)) {
                        cell.correct = true;
                        cell.eps_E = relative_errors(tree, metric, inferred).mean;
                    }
                }
            }
        } catch (const std::exception& e) {
            failures[t] = e.what();
        }
    }

    for (int t = 0; t < cfg.trials; ++t)
        if (!failures[t].empty())
            throw std::runtime_error("trial " + std::to_string(t) + ": " + failures[t]);

    ExperimentResult result;
    result.config = cfg;
    std::vector<std::size_t> alg_order(n_algs);
    for (std::size_t i = 0; i < n_algs; ++i) alg_order[i] = i;
    std::sort(alg_order.begin(), alg_order.end(), [&](std::size_t a, std::size_t b) {
        return cfg.algorithms[a] < cfg.algorithms[b];
    });

    for (std::size_t ai : alg_order) {
        for (std::size_t si = 0; si < n_sizes; ++si) {
            ResultRow row;
            row.algorithm = cfg.algorithms[ai];
            row.sample_size = cfg.sample_sizes[si];
            row.trials = cfg.trials;
            double eps_sum = 0.0;
            for (int t = 0; t < cfg.trials; ++t) {
                const TrialOutcome& cell =
                    out[(static_cast<std::size_t>(t) * n_sizes + si) * n_algs + ai];
                if (cell.aborted) ++row.aborted_trials;
                if (cell.correct) {
                    ++row.count_correct;
                    eps_sum += cell.eps_E;
                }
            }
            row.fraction_correct = static_cast<double>(row.count_correct) / cfg.trials;
            row.mean_eps_E = row.count_correct
                                 ? eps_sum / row.count_correct
                                 : std::numeric_limits<double>::quiet_NaN();
            result.rows.push_back(row);
        }
    }

    if (details) *details = std::move(out);
    return result;
}

ExperimentResult run_reverse_experiment(ExperimentConfig cfg, bool parallel,
                                        std::vector<TrialOutcome>* details) {
    cfg.direction = Direction::reverse;
    return run_experiment(cfg, parallel, details);
}

void ExperimentResult::save_csv(std::ostream& out) const {
    out << "algorithm,direction,tree_kind,n_leaves,sample_size,trials,fraction_correct,"
           "mean_eps_E,aborted_trials,base_seed,rng_id\n";
    for (const auto& row : rows) {
        out << to_string(row.algorithm) << ',' << to_string(config.direction) << ','
            << to_string(config.tree_kind) << ',' << config.n_leaves << ',' << row.sample_size
            << ',' << row.trials << ',' << text::format_double(row.fraction_correct) << ','
            << text::format_double(row.mean_eps_E) << ',' << row.aborted_trials << ','
            << config.base_seed << ',' << rng::kRngId << '\n';
    }
}

}  // namespace tomo
