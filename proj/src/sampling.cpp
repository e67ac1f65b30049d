#include "tomo/sampling.hpp"

#include <istream>
#include <ostream>
#include <stdexcept>

#include "tomo/errors.hpp"
#include "tomo/rng.hpp"
#include "tomo/text.hpp"

namespace tomo {

const std::vector<std::uint8_t>& SampleSet::column(const std::string& label) const {
    for (std::size_t i = 0; i < labels.size(); ++i)
        if (labels[i] == label) return columns[i];
    throw LabelMismatch("no sample column for label: " + label);
}

void SampleSet::save_csv(std::ostream& out) const {
    for (std::size_t i = 0; i < labels.size(); ++i) out << (i ? "," : "") << labels[i];
    out << '\n';
    for (std::size_t t = 0; t < n; ++t) {
        for (std::size_t i = 0; i < labels.size(); ++i)
            out << (i ? "," : "") << (columns[i][t] ? '1' : '0');
        out << '\n';
    }
}

SampleSet SampleSet::load_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw ParseError("empty sample file", 0);
    SampleSet s;
    for (auto& h : text::split(std::string_view(line), ',')) {
        std::string name(text::trim(h));
        if (name.empty()) throw ParseError("empty label in sample header", 0);
        s.labels.push_back(std::move(name));
    }
    s.columns.resize(s.labels.size());
    while (std::getline(in, line)) {
        if (text::trim(line).empty()) continue;
        auto fields = text::split(std::string_view(line), ',');
        if (fields.size() != s.labels.size())
            throw ParseError("sample row has " + std::to_string(fields.size()) +
                                 " fields, expected " + std::to_string(s.labels.size()),
                             0);
        for (std::size_t i = 0; i < fields.size(); ++i) {
            auto f = text::trim(fields[i]);
            if (f != "0" && f != "1")
                throw ParseError("sample entries must be 0 or 1, got '" + fields[i] + "'", 0);
            s.columns[i].push_back(f == "1" ? 1 : 0);
        }
        ++s.n;
    }
    if (s.n == 0) throw ParseError("sample file has no probe rows", 0);
    return s;
}

namespace {

SampleSet simulate_core(const RoutedTree& tree, const LinkMetric& metric, std::size_t n,
                        std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("sample size must be >= 1");
    const int nodes = tree.node_count();
    std::vector<double> rate(nodes, 0.0);
    for (int v = 1; v < nodes; ++v) rate[v] = metric.rate(v);

    const std::vector<int> leaf_ids = tree.leaves();
    SampleSet out;
    out.labels = tree.terminal_labels();
    out.n = n;
    out.columns.assign(out.labels.size(), std::vector<std::uint8_t>(n, 0));
    out.columns[0].assign(n, 1);

    rng::Engine eng(seed);
    std::vector<std::uint8_t> x(nodes);
    for (std::size_t t = 0; t < n; ++t) {
        x[0] = 1;
        // Every link draws its state each probe, in node id order; parents
        // precede children, so one pass propagates the outcomes.
        for (int v = 1; v < nodes; ++v) {
            const std::uint8_t z = rng::bernoulli(eng, rate[v]) ? 1 : 0;
            x[v] = x[tree.parent(v)] & z;
        }
        for (std::size_t c = 0; c < leaf_ids.size(); ++c) out.columns[c + 1][t] = x[leaf_ids[c]];
    }
    return out;
}

}  // namespace

SampleSet simulate_multicast(const RoutedTree& tree, const LinkMetric& metric, std::size_t n,
                             std::uint64_t seed) {
    if (tree.orientation() != Orientation::source_rooted)
        throw std::invalid_argument("simulate_multicast requires a source-rooted tree");
    return simulate_core(tree, metric, n, seed);
}

SampleSet simulate_reverse_multicast(const RoutedTree& tree, const LinkMetric& metric,
                                     std::size_t n, std::uint64_t seed) {
    if (tree.orientation() != Orientation::receiver_rooted)
        throw std::invalid_argument("simulate_reverse_multicast requires a receiver-rooted tree");
    return simulate_core(tree, metric, n, seed);
}

}  // namespace tomo
