#include <cmath>
#include <sstream>

#include "doctest.h"
#include "testutil.hpp"
#include "tomo/sampling.hpp"
#include "tomo/tree.hpp"

using namespace tomo;

namespace {

double column_mean(const SampleSet& s, const std::string& label) {
    const auto& col = s.column(label);
    double sum = 0.0;
    for (auto b : col) sum += b;
    return sum / static_cast<double>(s.n);
}

// Success probability of a terminal pair: product of rates over the union of
// their root paths.
double pair_probability(const RoutedTree& t, const LinkMetric& m, int i, int j) {
    const int anc = nearest_common_ancestor(t, i, j);
    double p = 1.0;
    for (int v = anc; v != t.root(); v = t.parent(v)) p *= m.rate(v);
    for (int v = i; v != anc; v = t.parent(v)) p *= m.rate(v);
    for (int v = j; v != anc; v = t.parent(v)) p *= m.rate(v);
    return p;
}

}  // namespace

TEST_SUITE_BEGIN("sampling");

TEST_CASE("degenerate rates") {
    auto t = random_tree(5, TreeKind::binary, 2, 17);

    SUBCASE("all links perfect: every outcome is 1") {
        const auto s = simulate_multicast(t, testutil::uniform_rates(t, 1.0), 50, 1);
        for (const auto& col : s.columns)
            for (auto b : col) CHECK(b == 1);
    }
    SUBCASE("dead root link: all leaf outcomes are 0, anchor column stays 1") {
        std::vector<double> rates(t.node_count(), 0.9);
        rates[0] = std::nan("");
        rates[t.children(t.root())[0]] = 0.0;
        const auto s = simulate_multicast(t, LinkMetric::from_rates(rates), 200, 2);
        for (auto b : s.columns[0]) CHECK(b == 1);
        for (std::size_t c = 1; c < s.columns.size(); ++c)
            for (auto b : s.columns[c]) CHECK(b == 0);
    }
}

TEST_CASE("column means converge to the exact marginals") {
    auto t = testutil::two_leaf_tree();
    const auto s = simulate_multicast(t, testutil::uniform_rates(t, 0.9), 100000, 42);
    // Exact marginal 0.81; 4 binomial standard deviations ~ 0.005.
    CHECK(std::abs(column_mean(s, "1") - 0.81) < 0.005);
    CHECK(std::abs(column_mean(s, "2") - 0.81) < 0.005);
}

TEST_CASE("reverse multicast on the joining example") {
    auto t = testutil::reverse_example_tree();
    REQUIRE(t.orientation() == Orientation::receiver_rooted);
    const auto s = simulate_reverse_multicast(t, testutil::uniform_rates(t, 0.9), 100000, 7);
    CHECK(s.labels[0] == "r");
    // Source 4 crosses three links; 0.9^3 = 0.729, 4 sigma ~ 0.006.
    CHECK(std::abs(column_mean(s, "4") - 0.729) < 0.006);
    // Source 3 crosses two links.
    CHECK(std::abs(column_mean(s, "3") - 0.81) < 0.006);
}

TEST_CASE("reverse equals forward on the mirrored tree, bit for bit") {
    for (int rep = 0; rep < 6; ++rep) {
        auto t = random_tree(6, rep % 2 ? TreeKind::general : TreeKind::binary, 4, 70 + rep);
        auto m = testutil::random_rates(t, 0.7, 0.99, rep);
        const auto fwd = simulate_multicast(t, m, 500, 900 + rep);
        const auto rev = simulate_reverse_multicast(t.mirrored(), m, 500, 900 + rep);
        CHECK(fwd.labels == rev.labels);
        CHECK(fwd.columns == rev.columns);
    }
}

TEST_CASE("orientation preconditions") {
    auto t = testutil::two_leaf_tree();
    auto m = testutil::uniform_rates(t, 0.9);
    CHECK_THROWS_AS(simulate_reverse_multicast(t, m, 10, 1), std::invalid_argument);
    CHECK_THROWS_AS(simulate_multicast(t.mirrored(), m, 10, 1), std::invalid_argument);
    CHECK_THROWS_AS(simulate_multicast(t, m, 0, 1), std::invalid_argument);
    CHECK_THROWS_AS(simulate_multicast(t, testutil::unit_lengths(t), 10, 1), MetricIncomplete);
}

TEST_CASE("determinism and seed sensitivity") {
    auto t = random_tree(8, TreeKind::general, 4, 3);
    auto m = testutil::random_rates(t, 0.8, 0.95, 4);
    const auto a = simulate_multicast(t, m, 300, 555);
    const auto b = simulate_multicast(t, m, 300, 555);
    const auto c = simulate_multicast(t, m, 300, 556);
    CHECK(a.columns == b.columns);
    CHECK(a.columns != c.columns);
}

TEST_CASE("outcomes are monotone along the tree") {
    // A pair's joint count can never exceed either marginal count, which is
    // the observable face of per-probe monotone propagation.
    auto t = random_tree(7, TreeKind::general, 4, 21);
    const auto s = simulate_multicast(t, testutil::random_rates(t, 0.6, 0.95, 5), 2000, 9);
    for (std::size_t a = 0; a < s.columns.size(); ++a) {
        for (std::size_t b = a + 1; b < s.columns.size(); ++b) {
            long ca = 0, cb = 0, cab = 0;
            for (std::size_t i = 0; i < s.n; ++i) {
                ca += s.columns[a][i];
                cb += s.columns[b][i];
                cab += s.columns[a][i] & s.columns[b][i];
            }
            CHECK(cab <= ca);
            CHECK(cab <= cb);
        }
    }
}

TEST_CASE("pairwise joint frequencies match the shared-path product") {
    auto t = random_tree(5, TreeKind::binary, 2, 31);
    auto m = testutil::random_rates(t, 0.8, 0.95, 6);
    const auto s = simulate_multicast(t, m, 100000, 77);
    const auto leaves = t.leaves();
    for (std::size_t a = 0; a < leaves.size(); ++a) {
        for (std::size_t b = a + 1; b < leaves.size(); ++b) {
            const double p = pair_probability(t, m, leaves[a], leaves[b]);
            double joint = 0.0;
            const auto& ca = s.columns[a + 1];
            const auto& cb = s.columns[b + 1];
            for (std::size_t i = 0; i < s.n; ++i) joint += ca[i] & cb[i];
            joint /= static_cast<double>(s.n);
            const double sigma = std::sqrt(p * (1.0 - p) / static_cast<double>(s.n));
            CHECK(std::abs(joint - p) < 4.0 * sigma + 1e-12);
        }
    }
}

TEST_CASE("sample CSV round trip") {
    auto t = random_tree(4, TreeKind::binary, 2, 8);
    const auto s = simulate_multicast(t, testutil::random_rates(t, 0.7, 0.95, 9), 64, 10);
    std::ostringstream out;
    s.save_csv(out);
    std::istringstream in(out.str());
    const auto back = SampleSet::load_csv(in);
    CHECK(back.labels == s.labels);
    CHECK(back.columns == s.columns);
    CHECK(back.n == s.n);

    std::istringstream bad("a,b\n1,2\n");
    CHECK_THROWS_AS(SampleSet::load_csv(bad), ParseError);
}

TEST_SUITE_END();
