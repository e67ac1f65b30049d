#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "tomo/estimation.hpp"
#include "tomo/experiment.hpp"
#include "tomo/inference.hpp"
#include "tomo/newick.hpp"
#include "tomo/rng.hpp"
#include "tomo/sampling.hpp"
#include "tomo/text.hpp"

namespace {

tomo::ParsedTree load_tree(const std::string& path) {
    return tomo::parse_newick(tomo::text::read_file(path));
}

int cmd_gen_tree(int leaves, const std::string& kind, int max_children, double contract_prob,
                 std::uint64_t seed, const std::string& root_label, const std::string& out_path) {
    const auto tree_kind = kind == "binary" ? tomo::TreeKind::binary : tomo::TreeKind::general;
    const auto tree = tomo::random_tree(leaves, tree_kind, max_children, seed,
                                        {contract_prob, root_label});
    tomo::text::write_file(out_path, tomo::to_newick(tree) + "\n");
    return 0;
}

int cmd_simulate(const std::string& tree_path, double alpha_low, double alpha_high,
                 std::uint64_t n, std::uint64_t seed, bool reverse, const std::string& out_path) {
    tomo::RoutedTree tree = load_tree(tree_path).tree;
    if (reverse) tree = tree.mirrored();

    // One derived stream for the rates, one for the probes.
    tomo::rng::Engine rate_eng(tomo::rng::mix_seed(seed, 1));
    std::vector<double> rates(tree.node_count(), std::numeric_limits<double>::quiet_NaN());
    for (int v = 1; v < tree.node_count(); ++v)
        rates[v] = tomo::rng::uniform(rate_eng, alpha_low, alpha_high);
    const auto metric = tomo::LinkMetric::from_rates(rates);

    const auto samples = reverse
                             ? tomo::simulate_reverse_multicast(tree, metric, n,
                                                                tomo::rng::mix_seed(seed, 2))
                             : tomo::simulate_multicast(tree, metric, n,
                                                        tomo::rng::mix_seed(seed, 2));
    std::ostringstream ss;
    samples.save_csv(ss);
    tomo::text::write_file(out_path, ss.str());
    return 0;
}

int cmd_estimate(const std::string& samples_path, const std::string& zero_count,
                 double clamp_value, const std::string& out_path) {
    std::istringstream in(tomo::text::read_file(samples_path));
    const auto samples = tomo::SampleSet::load_csv(in);
    tomo::EstimatorConfig cfg;
    cfg.zero_count_policy = zero_count == "error" ? tomo::ZeroCountPolicy::error
                                                  : tomo::ZeroCountPolicy::clamp;
    cfg.clamp_value = clamp_value;
    const auto res = tomo::empirical_distance_matrix(samples, cfg);
    if (res.zero_count_clamps)
        std::cerr << "warning: " << res.zero_count_clamps
                  << " zero counts replaced by the pseudo-count\n";
    if (res.negative_clamps)
        std::cerr << "warning: " << res.negative_clamps
                  << " negative distance estimates clamped to 0\n";
    std::ostringstream ss;
    res.dist.save_csv(ss);
    tomo::text::write_file(out_path, ss.str());
    return 0;
}

int cmd_infer(const std::string& dist_path, const std::string& algo, const std::string& kind,
              double delta, const std::string& out_path, const std::string& links_path) {
    std::istringstream in(tomo::text::read_file(dist_path));
    const auto dist = tomo::DistanceMatrix::load_csv(in);
    const auto tree_kind = kind == "binary" ? tomo::TreeKind::binary : tomo::TreeKind::general;
    if (tree_kind == tomo::TreeKind::general && !(delta > 0.0)) {
        std::cerr << "error: --delta > 0 is required for general trees\n";
        return 1;
    }

    tomo::InferredTree inferred = [&] {
        if (tree_kind == tomo::TreeKind::binary)
            return algo == "nj" ? tomo::nj_binary(dist) : tomo::rnj_binary(dist);
        const tomo::InferenceConfig icfg{delta};
        return algo == "nj" ? tomo::nj_general(dist, icfg) : tomo::rnj_general(dist, icfg);
    }();

    tomo::text::write_file(out_path, tomo::to_newick(inferred.tree, &inferred.lengths) + "\n");
    if (!links_path.empty()) {
        std::ostringstream ss;
        tomo::save_link_table(inferred, ss);
        tomo::text::write_file(links_path, ss.str());
    }
    return 0;
}

int cmd_experiment(const std::string& config_path, const std::string& out_path, bool serial) {
    std::istringstream in(tomo::text::read_file(config_path));
    const auto cfg = tomo::ExperimentConfig::parse(in);
    const auto result = tomo::run_experiment(cfg, !serial);
    std::ostringstream ss;
    result.save_csv(ss);
    tomo::text::write_file(out_path, ss.str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Network tomography toolkit: simulate loss probing on routing trees, "
                 "estimate terminal distances, reconstruct topology and link rates"};
    app.require_subcommand(1);

    // gen-tree
    int leaves = 0;
    std::string kind = "binary";
    int max_children = 5;
    double contract_prob = 0.5;
    std::uint64_t seed = 1;
    std::string root_label = "s";
    std::string out_path, tree_path, samples_path, dist_path, links_path, config_path;

    auto* gen = app.add_subcommand("gen-tree", "Generate a random routing tree as Newick");
    gen->add_option("--leaves", leaves, "Number of leaves")->required();
    gen->add_option("--kind", kind, "binary or general")
        ->check(CLI::IsMember({"binary", "general"}))
        ->required();
    gen->add_option("--seed", seed, "RNG seed")->required();
    gen->add_option("--max-children", max_children, "Fan-out cap for general trees");
    gen->add_option("--contract-prob", contract_prob, "Internal-link contraction probability");
    gen->add_option("--root-label", root_label, "Label of the root terminal");
    gen->add_option("--out", out_path, "Output Newick file")->required();

    // simulate
    double alpha_low = 0.0, alpha_high = 0.0;
    std::uint64_t n_probes = 0;
    bool reverse = false;
    auto* sim = app.add_subcommand("simulate", "Simulate multicast loss probes down a tree");
    sim->add_option("--tree", tree_path, "Input Newick tree")->required();
    sim->add_option("--alpha-low", alpha_low, "Lower bound of the link success rate range")
        ->required();
    sim->add_option("--alpha-high", alpha_high, "Upper bound of the link success rate range")
        ->required();
    sim->add_option("--n", n_probes, "Number of probes")->required();
    sim->add_option("--seed", seed, "RNG seed")->required();
    sim->add_flag("--reverse", reverse, "Reverse multicast (receiver-rooted tree)");
    sim->add_option("--out", out_path, "Output sample CSV")->required();

    // estimate
    std::string zero_count = "clamp";
    double clamp_value = 0.5;
    auto* est = app.add_subcommand("estimate", "Estimate terminal distances from samples");
    est->add_option("--samples", samples_path, "Input sample CSV")->required();
    est->add_option("--zero-count", zero_count, "Zero-count policy")
        ->check(CLI::IsMember({"clamp", "error"}));
    est->add_option("--clamp-value", clamp_value, "Pseudo-count for the clamp policy");
    est->add_option("--out", out_path, "Output distance CSV")->required();

    // infer
    std::string algo = "rnj";
    double delta = 0.0;
    auto* inf = app.add_subcommand("infer", "Reconstruct the tree from a distance matrix");
    inf->add_option("--dist", dist_path, "Input distance CSV")->required();
    inf->add_option("--algo", algo, "nj or rnj")
        ->check(CLI::IsMember({"nj", "rnj"}))
        ->required();
    inf->add_option("--kind", kind, "binary or general")
        ->check(CLI::IsMember({"binary", "general"}))
        ->required();
    inf->add_option("--delta", delta, "Estimated minimum link length (general trees)");
    inf->add_option("--out", out_path, "Output Newick file")->required();
    inf->add_option("--links", links_path, "Output link table CSV");

    // experiment
    bool serial = false;
    auto* exp = app.add_subcommand("experiment", "Run a Monte-Carlo inference experiment");
    exp->add_option("--config", config_path, "Experiment config file")->required();
    exp->add_option("--out", out_path, "Output results CSV")->required();
    exp->add_flag("--serial", serial, "Run trials on one thread (reference mode)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed())
            return cmd_gen_tree(leaves, kind, max_children, contract_prob, seed, root_label,
                                out_path);
        if (sim->parsed())
            return cmd_simulate(tree_path, alpha_low, alpha_high, n_probes, seed, reverse,
                                out_path);
        if (est->parsed()) return cmd_estimate(samples_path, zero_count, clamp_value, out_path);
        if (inf->parsed()) return cmd_infer(dist_path, algo, kind, delta, out_path, links_path);
        if (exp->parsed()) return cmd_experiment(config_path, out_path, serial);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
