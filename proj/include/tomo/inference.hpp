#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "tomo/distance_matrix.hpp"
#include "tomo/tree.hpp"

namespace tomo {

struct InferenceConfig {
    // Estimated minimum link length; the sibling-absorption threshold of the
    // general-tree variants is delta/2.
    double delta = 0.0;
};

// Reconstruction output. Lengths are kept exactly as the agglomeration
// computed them, so under noisy input they may be zero or negative; they are
// only clamped (and flagged) when converted to success rates.
struct InferredTree {
    RoutedTree tree;                // source-rooted; root label = anchor label of the input
    std::vector<double> lengths;    // keyed by child node id
};

struct LinkRate {
    int child = 0;          // child node id of the link in the inferred tree
    double rate = 1.0;
    bool clamped = false;   // true when the length was <= 0 and the rate was pinned to 1
};

// Estimated root distance of the nearest common ancestor of i and j:
// (d(s,i) + d(s,j) - d(i,j)) / 2.
double rho(const DistanceMatrix& dist, const std::string& source_label, const std::string& i,
           const std::string& j);

// Agglomerative reconstruction of a binary tree by repeatedly joining the
// pair with the largest Q score, the anchor cluster being joinable like any
// other member (a join with it extends the trunk below the root). The first
// label of the matrix is the anchor (root). Ties break toward the
// lexicographically smallest pair of subtree keys (the smallest leaf label
// below each node).
InferredTree nj_binary(const DistanceMatrix& dist);

// Same agglomeration driven by the rho score (estimated shared-path length to
// the root), which joins the deepest sibling pair first.
InferredTree rnj_binary(const DistanceMatrix& dist);

// Rho-driven agglomeration for arbitrary branching: after joining the best
// pair, every remaining leaf within delta/2 of the pair's rho is absorbed as
// an additional sibling.
InferredTree rnj_general(const DistanceMatrix& dist, const InferenceConfig& cfg);

// Q-score pair selection with the delta/2 sibling-absorption test. A cluster
// is only absorbed while it has no deeper affinity to another cluster, so
// unfinished sibling subtrees are left to complete; they reattach through
// zero-length links that a final cleanup pass collapses.
InferredTree nj_general(const DistanceMatrix& dist, const InferenceConfig& cfg);

// Per-link success rates exp(-length); non-positive lengths give rate 1 with
// the clamped flag set.
std::vector<LinkRate> rates_from_tree(const InferredTree& t);

// Flat link table: parent_label,child_label,length,rate,flag.
void save_link_table(const InferredTree& t, std::ostream& out);

}  // namespace tomo
