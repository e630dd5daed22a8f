#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <gmpxx.h>

#include "causalbandit/dag.hpp"

namespace causalbandit {

using Rational = mpq_class;

double to_double(const Rational& q);
std::string to_string(const Rational& q);

/// Closed-form expected number of interventions of the randomized parent
/// search: sum over X of 1 / (|A(P) xor A(X) \ {X}| + 1).
Rational expected_interventions(const Dag& dag, const ParentSpec& parent);

/// T(V) from the memoized candidate-set recursion, T(empty) = 0. n <= 24.
Rational expected_interventions_recursive(const Dag& dag, const ParentSpec& parent);

/// Mean intervention count of the permutation form over all n! orders.
/// n <= 8.
Rational enumerate_permutation_mean(const Dag& dag, const ParentSpec& parent);

/// Universal lower bound over learners using atomic interventions.
Rational lower_bound(const Dag& dag, const ParentSpec& parent);

inline constexpr std::size_t kCandidateFamilyMaxNodes = 12;

/// Every candidate set the search can be called with, in canonical order.
/// n <= 12.
std::vector<NodeSet> candidate_family(const Dag& dag, const ParentSpec& parent);

struct FastCondParams {
  double alpha = 0.4;
  double beta = 0.4;
  double gamma = 0.4;
  double c = 1.0;
  double k = 1.0;
  double log_base = 2.0;
};

struct FastConditionReport {
  bool holds = true;
  std::size_t sets_checked = 0;
  std::optional<NodeSet> violating_set;
  std::size_t heavy_count = 0;     // for the violating set
  std::size_t ancestor_count = 0;  // for the violating set
  double size_cap = 0.0;           // c * log_base(n)^k
};

/// Checks that every candidate set C has at least beta|C| heavy
/// non-ancestors (descendant count >= alpha|C|), or at least gamma|C|
/// ancestors of P, or |C| <= c log^k(n). `log_reference_n` overrides the n
/// inside the logarithm (defaults to the graph size).
FastConditionReport check_fast_condition(const Dag& dag, const ParentSpec& parent, const FastCondParams& params,
                                         std::optional<std::size_t> log_reference_n = std::nullopt);

struct MultiParentPair {
  std::vector<Node> ordering;  // topological ordering of the parents; empty for the no-parent pair
  std::size_t index = 0;       // i in 1..|P|; 0 for the no-parent pair
  NodeSet kept;                // V \ S(tau, i) or V \ D(P)
  std::optional<Node> parent;  // tau_i in original labels
  bool checked = false;        // false when |kept| <= c log^k(n)
  bool holds = true;
};

struct MultiParentConditionReport {
  bool holds = true;
  std::vector<MultiParentPair> pairs;
};

/// Fast condition over every (subgraph, parent) pair built from the
/// topological orderings of the parent set. |parents| <= 4, n <= 12.
MultiParentConditionReport check_multiparent_condition(const Dag& dag, const ParentSpec& parents,
                                                       const FastCondParams& params);

/// Number of X != P sharing no common ancestor with P.
std::size_t count_trekless(const Dag& dag, const ParentSpec& parent);
// count * log_d(n) / n with d the skeleton degree; NaN when d < 2.
double trekless_ratio(const Dag& dag, const ParentSpec& parent);

enum class ThresholdVariant { corollary, remark };

/// Edge probability above which Erdos-Renyi DAGs meet the fast condition.
/// `n` may be fractional (the multi-parent threshold evaluates it at
/// c1 log^k(n)).
double er_fast_threshold(double n, double k, double c, ThresholdVariant variant, double log_base = 2.0);

/// Edge probability for the multi-parent experiments:
/// er_fast_threshold at n' = c1 log^k(n) with c = c0.
double er_multiparent_threshold(double n, double k, double c0, double c1, double log_base = 2.0);

/// Lower-bound value for perfect d-ary trees with n nodes.
double dary_tree_bound(std::size_t n, std::size_t d);

/// Expected total interventions of the multi-parent loop obtained by summing
/// the closed form over the (subgraph, parent) pairs induced by a discovery
/// order (latest-discovered first), plus the final no-parent call.
Rational multiparent_expected_interventions(const Dag& dag, const std::vector<Node>& discovery_order);

}  // namespace causalbandit
