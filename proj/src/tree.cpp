#include "tomo/tree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "tomo/rng.hpp"

namespace tomo {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

RoutedTree::RoutedTree(Orientation orientation, std::string root_label)
    : orientation_(orientation) {
    parent_.push_back(-1);
    children_.emplace_back();
    label_.push_back(std::move(root_label));
}

int RoutedTree::add_child(int parent, std::string label) {
    require_node(parent);
    const int id = node_count();
    parent_.push_back(parent);
    children_.emplace_back();
    label_.push_back(std::move(label));
    children_[parent].push_back(id);
    return id;
}

int RoutedTree::parent(int v) const {
    require_node(v);
    return parent_[v];
}

const std::vector<int>& RoutedTree::children(int v) const {
    require_node(v);
    return children_[v];
}

bool RoutedTree::is_leaf(int v) const {
    require_node(v);
    return v != 0 && children_[v].empty();
}

const std::string& RoutedTree::label(int v) const {
    require_node(v);
    return label_[v];
}

int RoutedTree::depth(int v) const {
    require_node(v);
    int d = 0;
    while (parent_[v] >= 0) {
        v = parent_[v];
        ++d;
    }
    return d;
}

std::vector<int> RoutedTree::leaves() const {
    std::vector<int> out;
    std::vector<int> stack{0};
    while (!stack.empty()) {
        int v = stack.back();
        stack.pop_back();
        if (is_leaf(v)) out.push_back(v);
        const auto& ch = children_[v];
        for (auto it = ch.rbegin(); it != ch.rend(); ++it) stack.push_back(*it);
    }
    return out;
}

std::vector<std::string> RoutedTree::terminal_labels() const {
    std::vector<std::string> out{label_[0]};
    for (int v : leaves()) out.push_back(label_[v]);
    return out;
}

std::optional<int> RoutedTree::find_label(const std::string& label) const {
    for (int v = 0; v < node_count(); ++v)
        if (label_[v] == label) return v;
    return std::nullopt;
}

bool RoutedTree::is_logical() const {
    if (children_[0].size() != 1 && node_count() > 1) return false;
    for (int v = 1; v < node_count(); ++v) {
        if (children_[v].empty()) continue;                  // leaf
        if (1 + children_[v].size() < 3) return false;       // internal: parent + >= 2 children
    }
    return true;
}

RoutedTree RoutedTree::mirrored() const {
    RoutedTree t = *this;
    t.orientation_ = orientation_ == Orientation::source_rooted ? Orientation::receiver_rooted
                                                                : Orientation::source_rooted;
    return t;
}

void RoutedTree::assign_internal_labels() {
    std::set<std::string> used(label_.begin(), label_.end());
    int counter = 1;
    for (int v = 1; v < node_count(); ++v) {
        if (children_[v].empty() || !label_[v].empty()) continue;
        std::string name;
        do {
            name = "n" + std::to_string(counter++);
        } while (used.count(name));
        used.insert(name);
        label_[v] = name;
    }
}

void RoutedTree::require_node(int v) const {
    if (v < 0 || v >= node_count())
        throw NodeNotFound("node id " + std::to_string(v) + " not in tree");
}

// --- LinkMetric ---

LinkMetric LinkMetric::from_lengths(std::vector<double> lengths_by_child) {
    for (std::size_t v = 1; v < lengths_by_child.size(); ++v) {
        const double d = lengths_by_child[v];
        if (std::isnan(d)) continue;
        if (!(d > 0.0) || !std::isfinite(d))
            throw InvalidLength("link length must be positive and finite, got " +
                                std::to_string(d));
    }
    LinkMetric m;
    m.length_ = std::move(lengths_by_child);
    return m;
}

LinkMetric LinkMetric::from_rates(std::vector<double> rates_by_child) {
    LinkMetric m;
    m.length_.resize(rates_by_child.size(), kNaN);
    for (std::size_t v = 1; v < rates_by_child.size(); ++v) {
        const double a = rates_by_child[v];
        if (std::isnan(a)) continue;
        if (!(a >= 0.0 && a <= 1.0))
            throw InvalidRate("success rate must lie in [0,1], got " + std::to_string(a));
        m.length_[v] = -std::log(a);
    }
    m.rate_ = std::move(rates_by_child);
    m.has_rates_ = true;
    return m;
}

double LinkMetric::length(int child) const {
    if (child <= 0 || static_cast<std::size_t>(child) >= length_.size() ||
        std::isnan(length_[child]))
        throw MetricIncomplete("missing length for link into node " + std::to_string(child));
    return length_[child];
}

double LinkMetric::rate(int child) const {
    if (!has_rates_ || child <= 0 || static_cast<std::size_t>(child) >= rate_.size() ||
        std::isnan(rate_[child]))
        throw MetricIncomplete("missing success rate for link into node " + std::to_string(child));
    return rate_[child];
}

bool LinkMetric::covers(const RoutedTree& tree) const {
    for (int v = 1; v < tree.node_count(); ++v)
        if (static_cast<std::size_t>(v) >= length_.size() || std::isnan(length_[v])) return false;
    return true;
}

// --- path and distance operations ---

double path_distance(const RoutedTree& tree, const LinkMetric& metric, int i, int j) {
    tree.require_node(i);
    tree.require_node(j);
    if (i == j) return 0.0;
    int di = tree.depth(i), dj = tree.depth(j);
    double sum = 0.0;
    while (di > dj) {
        sum += metric.length(i);
        i = tree.parent(i);
        --di;
    }
    while (dj > di) {
        sum += metric.length(j);
        j = tree.parent(j);
        --dj;
    }
    while (i != j) {
        sum += metric.length(i) + metric.length(j);
        i = tree.parent(i);
        j = tree.parent(j);
    }
    return sum;
}

int nearest_common_ancestor(const RoutedTree& tree, int i, int j) {
    tree.require_node(i);
    tree.require_node(j);
    int di = tree.depth(i), dj = tree.depth(j);
    while (di > dj) {
        i = tree.parent(i);
        --di;
    }
    while (dj > di) {
        j = tree.parent(j);
        --dj;
    }
    while (i != j) {
        i = tree.parent(i);
        j = tree.parent(j);
    }
    return i;
}

DistanceMatrix terminal_distance_matrix(const RoutedTree& tree, const LinkMetric& metric) {
    // Distance from the root to every node; ids grow away from the root so a
    // single forward pass suffices.
    std::vector<double> from_root(tree.node_count(), 0.0);
    for (int v = 1; v < tree.node_count(); ++v)
        from_root[v] = from_root[tree.parent(v)] + metric.length(v);

    std::vector<int> terms{tree.root()};
    for (int v : tree.leaves()) terms.push_back(v);

    DistanceMatrix m(tree.terminal_labels());
    for (std::size_t a = 0; a < terms.size(); ++a) {
        for (std::size_t b = a + 1; b < terms.size(); ++b) {
            const int anc = nearest_common_ancestor(tree, terms[a], terms[b]);
            m.set(a, b, from_root[terms[a]] + from_root[terms[b]] - 2.0 * from_root[anc]);
        }
    }
    return m;
}

// --- random generation ---

namespace {

// Mutable staging structure; materialized into a RoutedTree with preorder ids
// once the shape is final.
struct Scaffold {
    struct Node {
        int parent = -1;
        std::string label;
        std::vector<int> kids;
    };
    std::vector<Node> nodes;

    int add(int parent, std::string label) {
        nodes.push_back({parent, std::move(label), {}});
        const int id = static_cast<int>(nodes.size()) - 1;
        if (parent >= 0) nodes[parent].kids.push_back(id);
        return id;
    }

    void materialize(RoutedTree& out, int from, int out_parent) const {
        for (int k : nodes[from].kids) {
            const int id = out.add_child(out_parent, nodes[k].label);
            materialize(out, k, id);
        }
    }
};

}  // namespace

RoutedTree random_tree(int n_leaves, TreeKind kind, int max_children, std::uint64_t seed,
                       const RandomTreeOptions& opts) {
    if (n_leaves < 2) throw TooFewLeaves("random_tree requires at least 2 leaves");
    if (max_children < 2) throw std::invalid_argument("max_children must be >= 2");

    rng::Engine eng(seed);

    Scaffold sc;
    const int root = sc.add(-1, opts.root_label);
    const int hub = sc.add(root, "");
    sc.add(hub, "1");
    sc.add(hub, "2");

    // Grow a binary shape: split a uniformly random link (u, v) by inserting
    // a fresh parent for v, then hang the new leaf off it.
    for (int leaf = 3; leaf <= n_leaves; ++leaf) {
        const int v = static_cast<int>(1 + rng::uniform_index(eng, sc.nodes.size() - 1));
        const int u = sc.nodes[v].parent;
        sc.nodes.push_back({u, "", {v}});
        const int w = static_cast<int>(sc.nodes.size()) - 1;
        auto& ukids = sc.nodes[u].kids;
        *std::find(ukids.begin(), ukids.end(), v) = w;
        sc.nodes[v].parent = w;
        sc.add(w, std::to_string(leaf));
    }

    if (kind == TreeKind::general) {
        // Contract internal links at random, bounded by max_children. Links
        // are visited in id order of the lower endpoint for determinism; a
        // contraction merges the child's children into the parent.
        for (std::size_t v = 1; v < sc.nodes.size(); ++v) {
            auto& node = sc.nodes[v];
            if (node.kids.empty()) continue;  // leaf
            const int u = node.parent;
            if (u == root) continue;  // keep the single root link intact
            const bool contract = rng::bernoulli(eng, opts.contract_prob);
            if (!contract) continue;
            auto& ukids = sc.nodes[u].kids;
            if (ukids.size() - 1 + node.kids.size() > static_cast<std::size_t>(max_children))
                continue;
            ukids.erase(std::find(ukids.begin(), ukids.end(), static_cast<int>(v)));
            for (int k : node.kids) {
                sc.nodes[k].parent = u;
                ukids.push_back(k);
            }
            node.kids.clear();
            node.parent = -2;  // detached
        }
    }

    RoutedTree out(Orientation::source_rooted, opts.root_label);
    sc.materialize(out, root, out.root());
    out.assign_internal_labels();
    return out;
}

// --- comparison ---

namespace {

// Canonical key of a subtree: its sorted leaf labels. Sibling subtrees have
// disjoint leaf sets, so comparing keys orders children totally.
struct Canon {
    const RoutedTree& t;
    std::vector<std::vector<std::string>> key;
    std::vector<std::vector<int>> ordered_kids;

    explicit Canon(const RoutedTree& tree) : t(tree) {
        key.resize(t.node_count());
        ordered_kids.resize(t.node_count());
        build(t.root());
    }

    void build(int v) {
        if (t.is_leaf(v)) {
            key[v] = {t.label(v)};
            return;
        }
        for (int c : t.children(v)) build(c);
        ordered_kids[v] = t.children(v);
        std::sort(ordered_kids[v].begin(), ordered_kids[v].end(),
                  [&](int a, int b) { return key[a] < key[b]; });
        for (int c : ordered_kids[v]) {
            key[v].insert(key[v].end(), key[c].begin(), key[c].end());
        }
        std::sort(key[v].begin(), key[v].end());
    }

    std::string shape(int v) const {
        if (t.is_leaf(v)) return "'" + t.label(v);
        std::string s = "(";
        for (std::size_t i = 0; i < ordered_kids[v].size(); ++i) {
            if (i) s += ",";
            s += shape(ordered_kids[v][i]);
        }
        s += ")";
        return s;
    }
};

void check_same_labels(const RoutedTree& a, const RoutedTree& b) {
    if (a.label(a.root()) != b.label(b.root()))
        throw LabelMismatch("root labels differ: " + a.label(a.root()) + " vs " +
                            b.label(b.root()));
    std::set<std::string> la, lb;
    for (int v : a.leaves()) la.insert(a.label(v));
    for (int v : b.leaves()) lb.insert(b.label(v));
    if (la.size() != a.leaves().size() || lb.size() != b.leaves().size())
        throw LabelMismatch("duplicate leaf labels");
    if (la != lb) throw LabelMismatch("leaf label sets differ");
}

void pair_walk(const Canon& ca, int va, const Canon& cb, int vb,
               std::vector<std::pair<int, int>>& out) {
    if (ca.t.is_leaf(va) != cb.t.is_leaf(vb))
        throw TopologyMismatch("trees differ at " + ca.t.label(va));
    if (ca.t.is_leaf(va)) {
        if (ca.t.label(va) != cb.t.label(vb))
            throw TopologyMismatch("leaf labels differ: " + ca.t.label(va) + " vs " +
                                   cb.t.label(vb));
        return;
    }
    const auto& ka = ca.ordered_kids[va];
    const auto& kb = cb.ordered_kids[vb];
    if (ka.size() != kb.size())
        throw TopologyMismatch("node degree differs under common subtree");
    for (std::size_t i = 0; i < ka.size(); ++i) {
        out.emplace_back(ka[i], kb[i]);
        pair_walk(ca, ka[i], cb, kb[i], out);
    }
}

}  // namespace

bool trees_equal(const RoutedTree& a, const RoutedTree& b) {
    check_same_labels(a, b);
    Canon ca(a), cb(b);
    return ca.shape(a.root()) == cb.shape(b.root());
}

std::vector<std::pair<int, int>> matched_links(const RoutedTree& a, const RoutedTree& b) {
    check_same_labels(a, b);
    Canon ca(a), cb(b);
    std::vector<std::pair<int, int>> out;
    pair_walk(ca, a.root(), cb, b.root(), out);
    return out;
}

}  // namespace tomo
