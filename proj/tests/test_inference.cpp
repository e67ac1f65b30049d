#include <chrono>
#include <cmath>

#include "doctest.h"
#include "testutil.hpp"
#include "tomo/inference.hpp"
#include "tomo/newick.hpp"
#include "tomo/tree.hpp"

using namespace tomo;

namespace {

using testutil::jitter;
using testutil::perturb;

bool is_ancestor(const RoutedTree& t, int anc, int v) {
    while (v >= 0) {
        if (v == anc) return true;
        v = t.parent(v);
    }
    return false;
}

double rho_at(const DistanceMatrix& d, std::size_t a, std::size_t b) {
    return (d.at(0, a) + d.at(0, b) - d.at(a, b)) / 2.0;
}

// Sufficient condition for the binary agglomeration: whenever the common
// ancestor of (i,j) lies strictly below that of (i,k), the rho score of (i,j)
// must be strictly larger.
bool binary_condition_holds(const RoutedTree& truth, const DistanceMatrix& input) {
    const auto leaves = truth.leaves();
    const std::size_t n = leaves.size();
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b)
            for (std::size_t c = 0; c < n; ++c) {
                if (a == b || a == c || b == c) continue;
                const int ab = nearest_common_ancestor(truth, leaves[a], leaves[b]);
                const int ac = nearest_common_ancestor(truth, leaves[a], leaves[c]);
                if (ab != ac && is_ancestor(truth, ac, ab)) {
                    if (!(rho_at(input, a + 1, b + 1) > rho_at(input, a + 1, c + 1)))
                        return false;
                }
            }
    return true;
}

// Two-sided sufficient condition for the general-tree variant with
// threshold delta/2.
bool general_condition_holds(const RoutedTree& truth, const DistanceMatrix& input, double delta) {
    const auto leaves = truth.leaves();
    const std::size_t n = leaves.size();
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b)
            for (std::size_t c = 0; c < n; ++c) {
                if (a == b || a == c || b == c) continue;
                const int ab = nearest_common_ancestor(truth, leaves[a], leaves[b]);
                const int ac = nearest_common_ancestor(truth, leaves[a], leaves[c]);
                const double gap = rho_at(input, a + 1, b + 1) - rho_at(input, a + 1, c + 1);
                if (ab == ac) {
                    if (!(std::abs(gap) <= delta / 2.0)) return false;
                } else if (is_ancestor(truth, ac, ab)) {
                    if (!(gap > delta / 2.0)) return false;
                }
            }
    return true;
}

void check_exact_recovery(const RoutedTree& truth, const LinkMetric& metric,
                          const InferredTree& inferred, double tol = 1e-9) {
    REQUIRE(trees_equal(truth, inferred.tree));
    for (const auto& [tc, ic] : matched_links(truth, inferred.tree))
        CHECK(std::abs(metric.length(tc) - inferred.lengths[ic]) < tol);
}

}  // namespace

TEST_SUITE_BEGIN("inference");

TEST_CASE("rho score") {
    const auto m = testutil::caterpillar_matrix();
    CHECK(rho(m, "s", "1", "2") == doctest::Approx(1.0));
    CHECK(rho(m, "s", "1", "3") == doctest::Approx(0.0));
    CHECK(rho(m, "s", "2", "3") == doctest::Approx(0.0));
    CHECK(rho(m, "s", "1", "2") == rho(m, "s", "2", "1"));
    CHECK_THROWS_AS(rho(m, "s", "1", "9"), LabelMismatch);
}

TEST_CASE("hand-traced three-leaf input with a root-level leaf") {
    // Distances of: root with two branches, a cherry {1,2} one link down and
    // leaf 3 directly at the root. The algorithms must join {1,2} first and
    // emit a zero-length link where the truth has the root branching.
    const auto m = testutil::caterpillar_matrix();
    const auto truth = testutil::caterpillar_tree();

    auto check_output = [&](const InferredTree& out) {
        const int l1 = *out.tree.find_label("1");
        const int l2 = *out.tree.find_label("2");
        const int l3 = *out.tree.find_label("3");
        CHECK(out.tree.parent(l1) == out.tree.parent(l2));
        CHECK(out.tree.parent(l3) != out.tree.parent(l1));
        // Unit lengths everywhere except the root link, which collapses.
        CHECK(out.lengths[l1] == doctest::Approx(1.0));
        CHECK(out.lengths[l2] == doctest::Approx(1.0));
        CHECK(out.lengths[l3] == doctest::Approx(1.0));
        const int cherry = out.tree.parent(l1);
        CHECK(out.lengths[cherry] == doctest::Approx(1.0));
        const int top = out.tree.children(out.tree.root())[0];
        CHECK(out.lengths[top] == doctest::Approx(0.0));
        CHECK(trees_equal(testutil::contract_short_links(out.tree, out.lengths, 1e-9), truth));
    };

    check_output(nj_binary(m));
    check_output(rnj_binary(m));
}

TEST_CASE("two destinations give the unique shape") {
    DistanceMatrix m({"s", "1", "2"});
    m.set(0, 1, 0.7);
    m.set(0, 2, 1.9);
    m.set(1, 2, 2.2);
    for (const auto& out : {nj_binary(m), rnj_binary(m)}) {
        CHECK(out.tree.leaves().size() == 2);
        CHECK(out.tree.children(out.tree.root()).size() == 1);
        const int l1 = *out.tree.find_label("1");
        const int l2 = *out.tree.find_label("2");
        CHECK(out.tree.parent(l1) == out.tree.parent(l2));
    }
}

TEST_CASE("too few destinations") {
    DistanceMatrix m({"s", "1"});
    m.set(0, 1, 1.0);
    CHECK_THROWS_AS(nj_binary(m), TooFewLeaves);
    CHECK_THROWS_AS(rnj_binary(m), TooFewLeaves);
    CHECK_THROWS_AS(rnj_general(m, {1.0}), TooFewLeaves);
    CHECK_THROWS_AS(nj_general(m, {1.0}), TooFewLeaves);
    DistanceMatrix ok({"s", "1", "2"});
    ok.set(0, 1, 1.0);
    ok.set(0, 2, 1.0);
    ok.set(1, 2, 1.0);
    CHECK_THROWS_AS(rnj_general(ok, {0.0}), std::invalid_argument);
}

TEST_CASE("three-leaf star is recovered by the general-tree variants") {
    const auto truth = testutil::star3_tree();
    const auto metric = testutil::unit_lengths(truth);
    const auto m = terminal_distance_matrix(truth, metric);
    check_exact_recovery(truth, metric, rnj_general(m, {1.0}));
    check_exact_recovery(truth, metric, nj_general(m, {1.0}));

    // The binary variants must not magically resolve the multifurcation: they
    // produce an extra zero-length link instead.
    const auto bin = rnj_binary(m);
    CHECK_FALSE(trees_equal(truth, bin.tree));
    CHECK(trees_equal(testutil::contract_short_links(bin.tree, bin.lengths, 1e-9), truth));
}

TEST_CASE("exact recovery on random binary trees") {
    for (int rep = 0; rep < 150; ++rep) {
        const int leaves = 4 + rep % 29;
        const auto truth = random_tree(leaves, TreeKind::binary, 2, 10000 + rep);
        const auto metric = testutil::random_lengths(truth, 0.05, 1.5, rep);
        const auto m = terminal_distance_matrix(truth, metric);
        check_exact_recovery(truth, metric, nj_binary(m));
        check_exact_recovery(truth, metric, rnj_binary(m));
    }
}

TEST_CASE("exact recovery on random general trees") {
    for (int rep = 0; rep < 150; ++rep) {
        const int leaves = 4 + rep % 29;
        const auto truth = random_tree(leaves, TreeKind::general, 5, 20000 + rep);
        const auto metric = testutil::random_lengths(truth, 0.05, 1.5, rep);
        const auto m = terminal_distance_matrix(truth, metric);
        const double delta = testutil::min_link_length(truth, metric);
        check_exact_recovery(truth, metric, rnj_general(m, {delta}));
        check_exact_recovery(truth, metric, nj_general(m, {delta}));
    }
}

TEST_CASE("robustness radius: binary within half the minimum link length") {
    for (int rep = 0; rep < 100; ++rep) {
        const auto truth = random_tree(4 + rep % 12, TreeKind::binary, 2, 30000 + rep);
        const auto metric = testutil::random_lengths(truth, 0.1, 1.0, rep);
        const auto exact = terminal_distance_matrix(truth, metric);
        const double delta = testutil::min_link_length(truth, metric);
        const auto noisy = perturb(exact, 0.49 * delta, 40000 + rep);
        CHECK(trees_equal(truth, rnj_binary(noisy).tree));
    }
}

TEST_CASE("robustness radius: general within a quarter of the minimum link length") {
    for (int rep = 0; rep < 100; ++rep) {
        const auto truth = random_tree(4 + rep % 12, TreeKind::general, 5, 50000 + rep);
        const auto metric = testutil::random_lengths(truth, 0.1, 1.0, rep);
        const auto exact = terminal_distance_matrix(truth, metric);
        const double delta = testutil::min_link_length(truth, metric);
        const auto noisy = perturb(exact, 0.24 * delta, 60000 + rep);
        CHECK(trees_equal(truth, rnj_general(noisy, {delta}).tree));
    }
}

TEST_CASE("sufficient-condition oracle for the binary variant") {
    int held = 0;
    for (int rep = 0; rep < 200; ++rep) {
        const auto truth = random_tree(5 + rep % 6, TreeKind::binary, 2, 70000 + rep);
        const auto metric = testutil::random_lengths(truth, 0.2, 1.0, rep);
        const auto exact = terminal_distance_matrix(truth, metric);
        const double delta = testutil::min_link_length(truth, metric);
        // Beyond the guaranteed radius, so the condition sometimes fails.
        const auto noisy = jitter(exact, 0.7 * delta, 80000 + rep);
        if (binary_condition_holds(truth, noisy)) {
            ++held;
            CHECK(trees_equal(truth, rnj_binary(noisy).tree));
        }
    }
    CHECK(held > 10);
    CHECK(held < 200);
}

TEST_CASE("sufficient-condition oracle for the general variant") {
    int held = 0;
    for (int rep = 0; rep < 200; ++rep) {
        const auto truth = random_tree(5 + rep % 6, TreeKind::general, 4, 90000 + rep);
        const auto metric = testutil::random_lengths(truth, 0.2, 1.0, rep);
        const auto exact = terminal_distance_matrix(truth, metric);
        const double delta = testutil::min_link_length(truth, metric);
        const auto noisy = jitter(exact, 0.3 * delta, 95000 + rep);
        if (general_condition_holds(truth, noisy, delta)) {
            ++held;
            CHECK(trees_equal(truth, rnj_general(noisy, {delta}).tree));
        }
    }
    CHECK(held > 10);
}

TEST_CASE("scale invariance") {
    const double c = 3.7;
    for (int rep = 0; rep < 20; ++rep) {
        const bool binary = rep % 2 == 0;
        const auto truth = random_tree(5 + rep, binary ? TreeKind::binary : TreeKind::general, 4,
                                       110000 + rep);
        const auto metric = testutil::random_lengths(truth, 0.1, 1.2, rep);
        const auto exact = terminal_distance_matrix(truth, metric);
        const double delta = testutil::min_link_length(truth, metric);
        DistanceMatrix scaled(exact.labels());
        for (std::size_t i = 0; i < exact.size(); ++i)
            for (std::size_t j = i + 1; j < exact.size(); ++j)
                scaled.set(i, j, c * exact.at(i, j));

        auto run = [&](const DistanceMatrix& d, double dl) {
            return binary ? (rep % 4 < 2 ? nj_binary(d) : rnj_binary(d))
                          : (rep % 4 < 2 ? nj_general(d, {dl}) : rnj_general(d, {dl}));
        };
        const auto base = run(exact, delta);
        const auto big = run(scaled, c * delta);
        CHECK(trees_equal(base.tree, big.tree));
        for (const auto& [bc, gc] : matched_links(base.tree, big.tree))
            CHECK(big.lengths[gc] == doctest::Approx(c * base.lengths[bc]).epsilon(1e-9));
    }
}

TEST_CASE("rates from an inferred tree") {
    auto truth = testutil::two_leaf_tree();
    InferredTree t{truth, {std::nan(""), 0.105360516, 0.105360516, 0.105360516}};
    const auto rates = rates_from_tree(t);
    REQUIRE(rates.size() == 3);
    for (const auto& lr : rates) {
        CHECK(lr.rate == doctest::Approx(0.9).epsilon(1e-9));
        CHECK_FALSE(lr.clamped);
    }

    InferredTree flagged{truth, {std::nan(""), 0.5, 0.0, -0.2}};
    const auto fr = rates_from_tree(flagged);
    CHECK_FALSE(fr[0].clamped);
    CHECK(fr[1].clamped);
    CHECK(fr[1].rate == 1.0);
    CHECK(fr[2].clamped);
    CHECK(fr[2].rate == 1.0);

    // Round trip through the one-to-one mapping on positive lengths.
    for (double alpha : {0.1, 0.5, 0.9, 0.99})
        CHECK(rate_from_length(loss_link_length(alpha)) == doctest::Approx(alpha).epsilon(1e-15));
}

TEST_CASE("subcubic scaling of the general-tree agglomeration") {
    auto time_inference = [](int leaves) {
        const auto truth = random_tree(leaves, TreeKind::general, 5, 777);
        const auto metric = testutil::random_lengths(truth, 0.1, 1.0, 778);
        const auto m = terminal_distance_matrix(truth, metric);
        const double delta = testutil::min_link_length(truth, metric);
        // Repeat until the clock has something to chew on.
        const auto t0 = std::chrono::steady_clock::now();
        int reps = 0;
        double elapsed = 0.0;
        do {
            const auto out = rnj_general(m, {delta});
            CHECK(out.tree.leaves().size() == static_cast<std::size_t>(leaves));
            ++reps;
            elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        } while (elapsed < 0.05 || reps < 3);
        return elapsed / reps;
    };
    const double t32 = time_inference(32);
    const double t256 = time_inference(256);
    // Cubic growth over an 8x size increase would be 512x; demand clearly less.
    CHECK(t256 / t32 < 256.0);
}

TEST_SUITE_END();
