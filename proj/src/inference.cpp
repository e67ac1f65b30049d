#include "tomo/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <queue>
#include <stdexcept>
#include <tuple>

#include "tomo/errors.hpp"
#include "tomo/text.hpp"

namespace tomo {

double rho(const DistanceMatrix& dist, const std::string& source_label, const std::string& i,
           const std::string& j) {
    const std::size_t s = dist.index_of(source_label);
    const std::size_t a = dist.index_of(i);
    const std::size_t b = dist.index_of(j);
    return (dist.at(s, a) + dist.at(s, b) - dist.at(a, b)) / 2.0;
}

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Bottom-up staging of the output tree; materialized once agglomeration ends.
struct AggForest {
    struct Node {
        std::string label;
        double parent_len = kNaN;
        std::vector<int> kids;
    };
    std::vector<Node> nodes;

    int add(std::string label) {
        nodes.push_back({std::move(label), kNaN, {}});
        return static_cast<int>(nodes.size()) - 1;
    }
};

// Working state shared by the agglomeration variants. Slot 0 is the anchor
// (root terminal); the current leaf set occupies the other live slots. A
// merge writes the new node into the slot of the first joined element and
// retires the others; stamps invalidate any queued score referring to a
// retired slot.
struct AggState {
    explicit AggState(const DistanceMatrix& in) : A(in.size() - 1), W(in.size()) {
        if (in.size() < 3) throw TooFewLeaves("inference requires at least 2 destinations");
        d.assign(W * W, 0.0);
        for (std::size_t i = 0; i < W; ++i)
            for (std::size_t j = 0; j < W; ++j) d[i * W + j] = in.at(i, j);
        stamp.assign(W, 0);
        key.resize(W);
        agg.assign(W, -1);
        forest.add(in.labels()[0]);
        for (std::size_t i = 1; i < W; ++i) {
            agg[i] = forest.add(in.labels()[i]);
            key[i] = in.labels()[i];
            active.push_back(static_cast<int>(i));
        }
    }

    double& D(int a, int b) { return d[static_cast<std::size_t>(a) * W + b]; }
    double Dv(int a, int b) const { return d[static_cast<std::size_t>(a) * W + b]; }

    double rho_of(int a, int b) const { return (Dv(0, a) + Dv(0, b) - Dv(a, b)) / 2.0; }

    void remove_active(int slot) {
        active.erase(std::find(active.begin(), active.end(), slot));
    }

    const std::size_t A;  // initial destination count
    const std::size_t W;  // slot count (A + 1)
    std::vector<double> d;
    std::vector<long> stamp;
    std::vector<std::string> key;  // smallest leaf label below the slot's node
    std::vector<int> agg;          // forest node held by each slot
    std::vector<int> active;
    AggForest forest;
};

// Tie-break ordering: the pair whose (smaller key, larger key) compares
// lexicographically smallest wins among equal scores.
std::pair<const std::string*, const std::string*> key_pair(const AggState& st, int a, int b) {
    const std::string *ka = &st.key[a], *kb = &st.key[b];
    if (*kb < *ka) std::swap(ka, kb);
    return {ka, kb};
}

bool pair_less(const AggState& st, int a1, int b1, int a2, int b2) {
    const auto p1 = key_pair(st, a1, b1);
    const auto p2 = key_pair(st, a2, b2);
    return std::tie(*p1.first, *p1.second) < std::tie(*p2.first, *p2.second);
}

InferredTree materialize(const AggForest& forest, const std::string& root_label) {
    RoutedTree tree(Orientation::source_rooted, root_label);
    std::vector<double> lengths{kNaN};

    // Recursive copy; forest ids are unrelated to final preorder ids.
    auto rec = [&](auto&& self, int from, int out_parent) -> void {
        for (int k : forest.nodes[from].kids) {
            const int id = tree.add_child(out_parent, forest.nodes[k].label);
            lengths.push_back(forest.nodes[k].parent_len);
            self(self, k, id);
        }
    };
    rec(rec, 0, tree.root());
    tree.assign_internal_labels();
    return InferredTree{std::move(tree), std::move(lengths)};
}

// Joins the last remaining leaf-set member to the root.
void attach_last(AggState& st) {
    const int x = st.active.front();
    st.forest.nodes[st.agg[x]].parent_len = st.Dv(0, x);
    st.forest.nodes[0].kids.push_back(st.agg[x]);
}

// --- rho-driven agglomeration (with optional sibling absorption) ---

struct RhoEntry {
    double rho;
    std::string ka, kb;  // ka <= kb
    int sa, sb;
    long ta, tb;
};

struct RhoEntryLess {
    bool operator()(const RhoEntry& x, const RhoEntry& y) const {
        if (x.rho != y.rho) return x.rho < y.rho;
        return std::tie(x.ka, x.kb) > std::tie(y.ka, y.kb);
    }
};

InferredTree rho_agglomerate(const DistanceMatrix& dist, const double* absorb_delta) {
    AggState st(dist);
    const std::size_t W = st.W;

    // Separate working table for the rho scores; entries follow the printed
    // averaged update rather than being recomputed from distances.
    std::vector<double> r(W * W, 0.0);
    auto R = [&](int a, int b) -> double& { return r[static_cast<std::size_t>(a) * W + b]; };

    std::priority_queue<RhoEntry, std::vector<RhoEntry>, RhoEntryLess> heap;
    auto push_pair = [&](int a, int b) {
        const auto kp = key_pair(st, a, b);
        heap.push({R(a, b), *kp.first, *kp.second, a, b, st.stamp[a], st.stamp[b]});
    };

    for (std::size_t i = 0; i < st.active.size(); ++i) {
        for (std::size_t j = i + 1; j < st.active.size(); ++j) {
            const int a = st.active[i], b = st.active[j];
            R(a, b) = R(b, a) = st.rho_of(a, b);
            push_pair(a, b);
        }
    }

    while (st.active.size() > 1) {
        RhoEntry top;
        for (;;) {
            if (heap.empty()) throw std::logic_error("agglomeration queue exhausted");
            top = heap.top();
            heap.pop();
            if (st.stamp[top.sa] == top.ta && st.stamp[top.sb] == top.tb) break;
        }
        const int sa = top.sa, sb = top.sb;
        const double rho_star = R(sa, sb);

        st.remove_active(sa);
        st.remove_active(sb);

        const int f_node = st.forest.add("");
        auto& fk = st.forest.nodes[f_node].kids;
        fk.push_back(st.agg[sa]);
        fk.push_back(st.agg[sb]);
        st.forest.nodes[st.agg[sa]].parent_len = st.Dv(0, sa) - rho_star;
        st.forest.nodes[st.agg[sb]].parent_len = st.Dv(0, sb) - rho_star;
        std::string fkey = std::min(st.key[sa], st.key[sb]);

        if (absorb_delta) {
            std::vector<int> absorbed;
            for (int k : st.active)
                if (rho_star - R(sa, k) <= *absorb_delta / 2.0) absorbed.push_back(k);
            for (int k : absorbed) {
                st.remove_active(k);
                fk.push_back(st.agg[k]);
                st.forest.nodes[st.agg[k]].parent_len = st.Dv(0, k) - rho_star;
                fkey = std::min(fkey, st.key[k]);
                ++st.stamp[k];
            }
        }

        // New distances and scores against the survivors, from the joined
        // pair only; computed before the slot is overwritten.
        const double li = st.forest.nodes[st.agg[sa]].parent_len;
        const double lj = st.forest.nodes[st.agg[sb]].parent_len;
        std::vector<std::pair<int, double>> nd, nr;
        nd.reserve(st.active.size());
        nr.reserve(st.active.size());
        for (int k : st.active) {
            nd.emplace_back(k, 0.5 * (st.Dv(k, sa) - li) + 0.5 * (st.Dv(k, sb) - lj));
            nr.emplace_back(k, 0.5 * (R(k, sa) + R(k, sb)));
        }

        ++st.stamp[sa];
        ++st.stamp[sb];
        const int f = sa;
        st.agg[f] = f_node;
        st.key[f] = std::move(fkey);
        st.D(0, f) = st.D(f, 0) = rho_star;
        for (const auto& [k, v] : nd) st.D(k, f) = st.D(f, k) = v;
        for (const auto& [k, v] : nr) R(k, f) = R(f, k) = v;
        for (const auto& [k, v] : nr) {
            (void)v;
            push_pair(k, f);
        }
        st.active.push_back(f);
    }

    attach_last(st);
    return materialize(st.forest, dist.labels()[0]);
}

// --- Q-driven agglomeration ---
//
// Classic neighbor joining over the full terminal set, with the anchor
// joinable like any other member. Restricting merges to destination pairs is
// not sound: on some additive inputs the only Q-maximal pair contains the
// anchor, and the best destination pair is not a sibling pair, so the join
// goes wrong. Treating the anchor cluster as a leaf (its working distances
// measured from the open end of the partially built trunk) recovers the
// classical correctness guarantees while keeping the same score and length
// arithmetic. Joins with the anchor cluster extend the trunk downward by one
// node carrying the other cluster as a side child.

InferredTree q_agglomerate(const DistanceMatrix& dist, const double* absorb_delta) {
    AggState st(dist);
    st.active.insert(st.active.begin(), 0);
    st.key[0] = dist.labels()[0];
    int open_node = 0;  // forest node at the lower end of the trunk

    while (st.active.size() > 2) {
        // Q(i,j) = rowsum(i) + rowsum(j) - (|U|-2) d(i,j), recomputed from the
        // working distances each round.
        const std::size_t m = st.active.size();
        std::vector<double> rowsum(st.W, 0.0);
        for (int i : st.active)
            for (int k : st.active) rowsum[i] += st.Dv(i, k);

        int sa = -1, sb = -1;
        double best_q = 0.0;
        for (std::size_t i = 0; i < st.active.size(); ++i) {
            for (std::size_t j = i + 1; j < st.active.size(); ++j) {
                const int a = st.active[i], b = st.active[j];
                const double q = rowsum[a] + rowsum[b] -
                                 (static_cast<double>(m) - 2.0) * st.Dv(a, b);
                if (sa < 0 || q > best_q ||
                    (q == best_q && pair_less(st, a, b, sa, sb))) {
                    best_q = q;
                    sa = a;
                    sb = b;
                }
            }
        }
        if (sb == 0) std::swap(sa, sb);  // anchor, if joined, sits in sa

        st.remove_active(sa);
        st.remove_active(sb);

        // Sibling absorption for the general-tree variant: a destination
        // cluster within delta/2 of the joined pair's rho becomes another
        // child of the new node. The second clause blocks clusters that have
        // a deeper affinity to some other cluster: those belong to a sibling
        // subtree that has not finished agglomerating, and absorbing them
        // here would misplace them (their subtree closes up later and its
        // root reaches the new node through a zero-length link instead).
        std::vector<int> absorbed;
        if (absorb_delta && sa != 0) {
            const double rho_star = st.rho_of(sa, sb);
            for (int k : st.active) {
                if (k == 0) continue;
                if (rho_star - st.rho_of(sa, k) > *absorb_delta / 2.0) continue;
                double deepest = -std::numeric_limits<double>::infinity();
                for (int l : st.active)
                    if (l != 0 && l != k) deepest = std::max(deepest, st.rho_of(k, l));
                if (deepest <= rho_star + *absorb_delta / 2.0) absorbed.push_back(k);
            }
            for (int k : absorbed) {
                st.remove_active(k);
                st.forest.nodes[st.agg[k]].parent_len = st.Dv(0, k) - rho_star;
            }
        }

        // Per-terminal two-point lengths averaged over the remaining
        // terminals (anchor included).
        double la = 0.0, lb = 0.0;
        for (int k : st.active) {
            la += (st.Dv(k, sa) + st.Dv(sa, sb) - st.Dv(k, sb)) / 2.0;
            lb += (st.Dv(k, sb) + st.Dv(sa, sb) - st.Dv(k, sa)) / 2.0;
        }
        const double m_after = static_cast<double>(st.active.size());
        la /= m_after;
        lb /= m_after;

        const int f_node = st.forest.add("");
        if (sa == 0) {
            // Trunk extension: f hangs below the open end, carries the other
            // cluster as a side child, and becomes the new open end.
            st.forest.nodes[f_node].parent_len = la;
            st.forest.nodes[open_node].kids.push_back(f_node);
            st.forest.nodes[f_node].kids.push_back(st.agg[sb]);
            st.forest.nodes[st.agg[sb]].parent_len = lb;
            open_node = f_node;
        } else {
            auto& fk = st.forest.nodes[f_node].kids;
            fk.push_back(st.agg[sa]);
            fk.push_back(st.agg[sb]);
            st.forest.nodes[st.agg[sa]].parent_len = la;
            st.forest.nodes[st.agg[sb]].parent_len = lb;
            for (int k : absorbed) fk.push_back(st.agg[k]);
        }

        std::vector<std::pair<int, double>> nd;
        for (int k : st.active)
            nd.emplace_back(k, 0.5 * (st.Dv(k, sa) - la) + 0.5 * (st.Dv(k, sb) - lb));

        const int f = sa;  // the anchor cluster stays in slot 0
        if (f != 0) st.agg[f] = f_node;
        st.key[f] = std::min(st.key[sa], st.key[sb]);
        for (int k : absorbed) st.key[f] = std::min(st.key[f], st.key[k]);
        st.D(f, f) = 0.0;
        for (const auto& [k, v] : nd) st.D(k, f) = st.D(f, k) = v;
        st.active.push_back(f);
    }

    // Two clusters left; the non-anchor one closes the trunk.
    const int last = st.active[0] == 0 ? st.active[1] : st.active[0];
    st.forest.nodes[st.agg[last]].parent_len = st.Dv(0, last);
    st.forest.nodes[open_node].kids.push_back(st.agg[last]);
    return materialize(st.forest, dist.labels()[0]);
}

// Collapses internal non-root links shorter than the threshold, merging the
// child's children into the parent. Siblings that finish agglomerating after
// their multifurcation was joined reach it through a zero-length link (exact
// zeros on additive input); this pass removes those.
InferredTree contract_short_links(const InferredTree& in, double threshold) {
    RoutedTree tree(Orientation::source_rooted, in.tree.label(in.tree.root()));
    std::vector<double> lengths{std::numeric_limits<double>::quiet_NaN()};

    auto rec = [&](auto&& self, int from, int out_parent) -> void {
        for (int c : in.tree.children(from)) {
            const bool internal = !in.tree.is_leaf(c);
            const bool root_link = from == in.tree.root();
            if (internal && !root_link && in.lengths[c] < threshold) {
                self(self, c, out_parent);
            } else {
                const int id = tree.add_child(out_parent, in.tree.label(c));
                lengths.push_back(in.lengths[c]);
                self(self, c, id);
            }
        }
    };
    rec(rec, in.tree.root(), tree.root());
    tree.assign_internal_labels();
    return InferredTree{std::move(tree), std::move(lengths)};
}

void require_delta(const InferenceConfig& cfg) {
    if (!(cfg.delta > 0.0))
        throw std::invalid_argument("general-tree inference requires delta > 0");
}

}  // namespace

InferredTree nj_binary(const DistanceMatrix& dist) { return q_agglomerate(dist, nullptr); }

InferredTree rnj_binary(const DistanceMatrix& dist) { return rho_agglomerate(dist, nullptr); }

InferredTree rnj_general(const DistanceMatrix& dist, const InferenceConfig& cfg) {
    require_delta(cfg);
    return rho_agglomerate(dist, &cfg.delta);
}

InferredTree nj_general(const DistanceMatrix& dist, const InferenceConfig& cfg) {
    require_delta(cfg);
    // Deferred sibling attachments surface as exact-zero internal links on
    // additive input; the cleanup threshold removes those and nothing else.
    // Multifurcations the absorption test missed under noise stay unresolved,
    // which is the price of deciding siblinghood round by round.
    return contract_short_links(q_agglomerate(dist, &cfg.delta), 1e-7 * cfg.delta);
}

std::vector<LinkRate> rates_from_tree(const InferredTree& t) {
    std::vector<LinkRate> out;
    for (int v = 1; v < t.tree.node_count(); ++v) {
        LinkRate lr;
        lr.child = v;
        const double len = t.lengths[v];
        if (len > 0.0) {
            lr.rate = std::exp(-len);
        } else {
            lr.rate = 1.0;
            lr.clamped = true;
        }
        out.push_back(lr);
    }
    return out;
}

void save_link_table(const InferredTree& t, std::ostream& out) {
    out << "parent_label,child_label,length,rate,flag\n";
    const auto rates = rates_from_tree(t);
    for (int v = 1; v < t.tree.node_count(); ++v) {
        const auto& lr = rates[v - 1];
        out << t.tree.label(t.tree.parent(v)) << ',' << t.tree.label(v) << ','
            << text::format_double(t.lengths[v]) << ',' << text::format_double(lr.rate) << ','
            << (lr.clamped ? 1 : 0) << '\n';
    }
}

}  // namespace tomo
