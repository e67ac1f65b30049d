#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tomo/tree.hpp"

namespace tomo {

struct ParsedTree {
    RoutedTree tree;
    // Lengths keyed by child node id; present only when the text carried a
    // length for every non-root node.
    std::optional<std::vector<double>> lengths;

    // Requires all lengths present and positive.
    LinkMetric to_link_metric() const;
};

// Serializes the tree with the root label outermost, e.g.
// "((1:1.0,2:1.0)n1:1.0)s;". Lengths, when given, are keyed by child node id
// and must cover every non-root node; they round-trip exactly.
std::string to_newick(const RoutedTree& tree, const std::vector<double>* lengths_by_child = nullptr);
std::string to_newick(const RoutedTree& tree, const LinkMetric& metric);

// Parses a single ;-terminated tree. Leaf and root names are required,
// internal names optional (synthetic ones are assigned). Lengths must be
// attached to all non-root nodes or to none. The result is source_rooted;
// reorient with RoutedTree::mirrored() when needed.
ParsedTree parse_newick(std::string_view text);

}  // namespace tomo
