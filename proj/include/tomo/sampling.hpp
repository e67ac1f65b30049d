#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "tomo/tree.hpp"

namespace tomo {

// Binary probe outcomes at the terminals: one column per terminal label, one
// entry per probe. Column 0 belongs to the constant terminal (the source in
// forward mode, the receiver in reverse mode) and is all ones.
struct SampleSet {
    std::vector<std::string> labels;
    std::vector<std::vector<std::uint8_t>> columns;  // columns[c][t], aligned with labels
    std::size_t n = 0;

    const std::vector<std::uint8_t>& column(const std::string& label) const;

    // Header row of labels, then one 0/1 row per probe.
    void save_csv(std::ostream& out) const;
    static SampleSet load_csv(std::istream& in);
};

// Simulates n multicast probes down a source-rooted tree: per probe every
// link draws an independent pass/fail state and a node receives the probe iff
// its parent did and its incoming link passed. Deterministic in the seed.
SampleSet simulate_multicast(const RoutedTree& tree, const LinkMetric& metric, std::size_t n,
                             std::uint64_t seed);

// Reverse multicast on a receiver-rooted tree. A source's probe reaches the
// receiver iff every link on its path passes, which is the same product of
// link states as the forward direction; both entry points therefore share one
// propagation core and produce identical outcomes on mirrored trees.
SampleSet simulate_reverse_multicast(const RoutedTree& tree, const LinkMetric& metric,
                                     std::size_t n, std::uint64_t seed);

}  // namespace tomo
