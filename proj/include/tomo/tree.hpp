#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tomo/distance_matrix.hpp"
#include "tomo/errors.hpp"

namespace tomo {

// Which end of the tree anchors the probes: the source in a classic
// one-to-many layout, or the receiver in the many-to-one layout. The rooted
// structure is identical either way; propagation and terminology differ.
enum class Orientation { source_rooted, receiver_rooted };

enum class TreeKind { binary, general };

// Rooted logical routing tree. Node 0 is always the root and every other
// node is created under an existing parent, so parent ids are smaller than
// child ids and the graph is a connected, acyclic single-rooted tree by
// construction. Leaves and the root carry external labels; internal nodes
// get synthetic names. Instances are treated as immutable once built.
class RoutedTree {
public:
    RoutedTree(Orientation orientation, std::string root_label);

    // Returns the id of the new node. Pass an empty label for an internal
    // node whose name does not matter; assign_internal_labels() fills those.
    int add_child(int parent, std::string label = "");

    int root() const { return 0; }
    int parent(int v) const;  // -1 for the root
    const std::vector<int>& children(int v) const;
    int node_count() const { return static_cast<int>(parent_.size()); }
    bool is_leaf(int v) const;
    const std::string& label(int v) const;
    Orientation orientation() const { return orientation_; }

    // Depth in links from the root.
    int depth(int v) const;

    // Leaf ids in preorder.
    std::vector<int> leaves() const;

    // Root label first, then leaf labels in preorder. This fixed order is
    // used everywhere terminals are listed (sample columns, matrices).
    std::vector<std::string> terminal_labels() const;

    std::optional<int> find_label(const std::string& label) const;

    // Logical routing trees have exactly one link out of the root and every
    // other internal node of degree >= 3. Generated and inferred trees
    // satisfy this; hand-built fixtures may legitimately not.
    bool is_logical() const;

    // Same shape and labels, opposite orientation.
    RoutedTree mirrored() const;

    // Names every unnamed internal node "n1", "n2", ... skipping names
    // already in use.
    void assign_internal_labels();

    void require_node(int v) const;

private:
    Orientation orientation_;
    std::vector<int> parent_;
    std::vector<std::vector<int>> children_;
    std::vector<std::string> label_;
};

// Per-link values keyed by the link's child node id (each non-root node has
// exactly one incoming link). Entry 0 is a placeholder. A metric built from
// rates keeps both representations, tied together by length = -log(rate).
class LinkMetric {
public:
    LinkMetric() = default;

    // Lengths must be strictly positive and finite; index 0 is ignored.
    static LinkMetric from_lengths(std::vector<double> lengths_by_child);

    // Rates must lie in [0,1]. The closed endpoints are allowed so that
    // degenerate links can be simulated; estimation-side contracts still
    // exclude them. Lengths are derived as -log(rate).
    static LinkMetric from_rates(std::vector<double> rates_by_child);

    double length(int child) const;  // MetricIncomplete if absent
    double rate(int child) const;    // MetricIncomplete if rates absent
    bool has_rates() const { return has_rates_; }
    std::size_t size() const { return length_.size(); }

    // True when every non-root node of the tree has a value.
    bool covers(const RoutedTree& tree) const;

private:
    std::vector<double> length_;  // NaN marks an absent entry
    std::vector<double> rate_;
    bool has_rates_ = false;
};

// Sum of link lengths along the unique i-j path; 0 when i == j.
double path_distance(const RoutedTree& tree, const LinkMetric& metric, int i, int j);

// Deepest node that is an ancestor of both i and j (a node is its own
// ancestor). On a receiver-rooted tree the same computation yields the
// nearest common descendant.
int nearest_common_ancestor(const RoutedTree& tree, int i, int j);

// Exact additive distances over the terminals (root plus leaves), in
// terminal_labels() order.
DistanceMatrix terminal_distance_matrix(const RoutedTree& tree, const LinkMetric& metric);

struct RandomTreeOptions {
    double contract_prob = 0.5;   // chance of collapsing an internal link (general kind)
    std::string root_label = "s";
};

// Random tree with n_leaves leaves labeled "1".."n_leaves", deterministic in
// the seed. Binary trees grow by splitting a uniformly chosen link; general
// trees additionally contract internal links at random, capped so no node
// exceeds max_children children.
RoutedTree random_tree(int n_leaves, TreeKind kind, int max_children, std::uint64_t seed,
                       const RandomTreeOptions& opts = {});

// Rooted leaf-labeled topology isomorphism; link lengths and orientation are
// ignored. Both trees must carry the same root label and the same leaf label
// set. Children are compared via canonical order (sorted leaf-label sets).
bool trees_equal(const RoutedTree& a, const RoutedTree& b);

// Pairs of (child id in a, child id in b) matching every link of a to the
// corresponding link of b under the canonical isomorphism. Throws
// TopologyMismatch when the trees are not equal.
std::vector<std::pair<int, int>> matched_links(const RoutedTree& a, const RoutedTree& b);

}  // namespace tomo
