#pragma once

#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "parapc/data.hpp"
#include "parapc/graph.hpp"

namespace parapc {

/// Possible causal effects of one treatment on one target, one per locally
/// valid parent set of the treatment.
struct EffectEstimate {
    Node treatment = 0;
    Node target = 0;
    std::vector<double> effects;
    /// Effect of minimum absolute value, sign kept.
    double summary = 0;
    /// Some regression had a rank-deficient design (minimum-norm solution used).
    bool singular = false;
};

/// Parent sets of x across the DAGs in the class of `g`, found locally:
/// directed parents plus every subset S of the undirected neighbours such
/// that orienting S -> x (and x -> the rest) creates no new v-structure at
/// x. Ordered by |S|, then lexicographically; each set is sorted.
std::vector<std::vector<Node>> local_parent_sets(const CpdagGraph& g, Node x);

/// Least-squares coefficient of column x when regressing column y on
/// {x} u pa with an intercept. A rank-deficient design falls back to the
/// minimum-norm solution and sets *singular.
double adjusted_effect(const Dataset& d, Node x, Node y, std::span<const Node> pa, bool* singular = nullptr);

/// Same estimate from a precomputed p x p row-major covariance matrix.
double adjusted_effect_from_covariance(std::span<const double> cov, int p, Node x, Node y,
                                       std::span<const Node> pa, bool* singular = nullptr);

/// Effects of every treatment on every target (self-pairs skipped), ranked
/// by |summary| descending; ties keep (treatment, target) input order.
std::vector<EffectEstimate> ida_all_effects(const Dataset& d, const CpdagGraph& g, std::span<const Node> treatments,
                                            std::span<const Node> targets, int workers = 1);

/// "treatment<TAB>target<TAB>summary_effect<TAB>n_parent_sets<TAB>effects"
/// with a header row.
void write_effects_tsv(std::ostream& out, std::span<const EffectEstimate> effects,
                       std::span<const std::string> names);

} // namespace parapc
