#include "causalbandit/theory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <unordered_map>

#include "causalbandit/errors.hpp"
#include "causalbandit/graph_gen.hpp"

namespace causalbandit {

double to_double(const Rational& q) { return q.get_d(); }

std::string to_string(const Rational& q) {
  Rational c = q;
  c.canonicalize();
  return c.get_str();
}

Rational expected_interventions(const Dag& dag, const ParentSpec& parent) {
  parent.single_parent();
  const NodeSet ap = parent_ancestors(dag, parent);
  // Terms grouped by denominator.
  std::map<std::size_t, std::size_t> by_denominator;
  for (Node x = 0; x < dag.size(); ++x) {
    NodeSet sym = ap ^ dag.ancestors(x);
    sym.erase(x);
    ++by_denominator[sym.size() + 1];
  }
  Rational total = 0;
  for (const auto& [den, count] : by_denominator) total += Rational(static_cast<unsigned long>(count), static_cast<unsigned long>(den));
  total.canonicalize();
  return total;
}

Rational lower_bound(const Dag& dag, const ParentSpec& parent) {
  parent.single_parent();
  const NodeSet ap = parent_ancestors(dag, parent);
  const std::size_t a = ap.size();
  Rational total = 0;
  for (Node x = 0; x < dag.size(); ++x) {
    const NodeSet& ax = dag.ancestors(x);
    // |A xor B| = |A| + |B| - 2|A and B|; x is in the difference iff x is
    // not an ancestor of the parent.
    std::size_t d = a + ax.size() - 2 * ap.intersection_size(ax);
    if (!ap.test(x)) d -= 1;
    total += Rational(1, static_cast<unsigned long>(d + 1));
  }
  total.canonicalize();
  return total;
}

Rational expected_interventions_recursive(const Dag& dag, const ParentSpec& parent) {
  const std::size_t n = dag.size();
  if (n > 24) throw CapabilityError("the recursion supports at most 24 nodes");
  const auto p = parent.single_parent();
  std::vector<std::uint32_t> child_mask(n, 0);
  for (const auto& [u, v] : dag.edges()) child_mask[u] |= 1u << v;

  // Descendants of x in the subgraph induced by c.
  auto desc_in = [&](std::uint32_t c, Node x) {
    std::uint32_t seen = 1u << x, frontier = seen;
    while (frontier) {
      const int v = std::countr_zero(frontier);
      frontier &= frontier - 1;
      const std::uint32_t next = child_mask[v] & c & ~seen;
      seen |= next;
      frontier |= next;
    }
    return seen;
  };

  std::unordered_map<std::uint32_t, Rational> memo;
  memo[0] = 0;
  auto T = [&](auto&& self, std::uint32_t c) -> Rational {
    if (auto it = memo.find(c); it != memo.end()) return it->second;
    std::uint32_t anc = 0;
    if (p && ((c >> *p) & 1u)) anc = static_cast<std::uint32_t>(ancestors_in(dag, NodeSet::from_mask(n, c), *p).mask());
    Rational sum = 0;
    for (std::uint32_t rest = c; rest; rest &= rest - 1) {
      const Node x = static_cast<Node>(std::countr_zero(rest));
      const std::uint32_t d = desc_in(c, x);
      if ((anc >> x) & 1u)
        sum += self(self, d & ~(1u << x));
      else
        sum += self(self, c & ~d);
    }
    Rational t = 1 + sum / static_cast<unsigned long>(std::popcount(c));
    t.canonicalize();
    memo.emplace(c, t);
    return t;
  };
  const std::uint32_t full = (1u << n) - 1;
  return T(T, full);
}

Rational enumerate_permutation_mean(const Dag& dag, const ParentSpec& parent) {
  const std::size_t n = dag.size();
  if (n > 8) throw CapabilityError("permutation enumeration supports at most 8 nodes");
  if (n == 0) return 0;
  parent.single_parent();
  const std::uint64_t ap = parent_ancestors(dag, parent).mask();
  // blocked[x]: nodes whose earlier appearance makes x skipped.
  std::vector<std::uint64_t> blocked(n);
  for (Node x = 0; x < n; ++x) blocked[x] = (ap ^ dag.ancestors(x).mask()) & ~(std::uint64_t{1} << x);

  std::vector<Node> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::uint64_t total = 0, count = 0;
  do {
    std::uint64_t seen = 0;
    for (Node x : perm) {
      if (!(blocked[x] & seen)) ++total;
      seen |= std::uint64_t{1} << x;
    }
    ++count;
  } while (std::next_permutation(perm.begin(), perm.end()));
  Rational r(static_cast<unsigned long>(total), static_cast<unsigned long>(count));
  r.canonicalize();
  return r;
}

std::vector<NodeSet> candidate_family(const Dag& dag, const ParentSpec& parent) {
  const std::size_t n = dag.size();
  if (n > kCandidateFamilyMaxNodes) throw CapabilityError("candidate family supports at most 12 nodes");
  parent.single_parent();
  const NodeSet ap = parent_ancestors(dag, parent);
  std::set<NodeSet> family;

  auto desc_of = [&](const std::vector<Node>& pool, std::uint64_t bits) {
    NodeSet d(n);
    for (std::size_t i = 0; i < pool.size(); ++i)
      if ((bits >> i) & 1u) d |= dag.descendants(pool[i]);
    return d;
  };

  const auto non_anc = (dag.all_nodes() - ap).members();
  for (std::uint64_t w = 0; w < (std::uint64_t{1} << non_anc.size()); ++w)
    family.insert(dag.all_nodes() - desc_of(non_anc, w));

  ap.for_each([&](Node x) {
    const NodeSet& dx = dag.descendants(x);
    const auto pool = (dx - ap).members();
    for (std::uint64_t w = 0; w < (std::uint64_t{1} << pool.size()); ++w) {
      NodeSet c = dx - (desc_of(pool, w) & dx);
      c.erase(x);
      family.insert(std::move(c));
    }
  });
  return {family.begin(), family.end()};
}

namespace {

double log_cap(const FastCondParams& params, double n) {
  return params.c * std::pow(std::log(n) / std::log(params.log_base), params.k);
}

void validate(const FastCondParams& p) {
  auto frac = [](double v) { return v > 0.0 && v < 1.0; };
  if (!frac(p.alpha) || !frac(p.beta) || !frac(p.gamma)) throw ParameterError("alpha, beta and gamma must lie in (0, 1)");
  if (!(p.c > 0.0) || !(p.k >= 1.0) || !(p.log_base > 1.0)) throw ParameterError("need c > 0, k >= 1 and log base > 1");
}

}  // namespace

FastConditionReport check_fast_condition(const Dag& dag, const ParentSpec& parent, const FastCondParams& params,
                                         std::optional<std::size_t> log_reference_n) {
  validate(params);
  const std::size_t n = dag.size();
  const auto p = parent.single_parent();
  FastConditionReport rep;
  const std::size_t ref = log_reference_n.value_or(n);
  rep.size_cap = ref >= 1 ? log_cap(params, static_cast<double>(ref)) : 0.0;
  for (const NodeSet& c : candidate_family(dag, parent)) {
    ++rep.sets_checked;
    const double size = static_cast<double>(c.size());
    if (size <= rep.size_cap) continue;
    NodeSet anc(n);
    if (p && c.test(*p)) anc = ancestors_in(dag, c, *p);
    std::size_t heavy = 0;
    (c - anc).for_each([&](Node x) {
      if (static_cast<double>(descendants_in(dag, c, x).size()) >= params.alpha * size) ++heavy;
    });
    if (static_cast<double>(heavy) >= params.beta * size) continue;
    if (static_cast<double>(anc.size()) >= params.gamma * size) continue;
    rep.holds = false;
    rep.violating_set = c;
    rep.heavy_count = heavy;
    rep.ancestor_count = anc.size();
    return rep;
  }
  return rep;
}

MultiParentConditionReport check_multiparent_condition(const Dag& dag, const ParentSpec& parents,
                                                       const FastCondParams& params) {
  validate(params);
  const std::size_t n = dag.size();
  if (parents.count() > 4) throw CapabilityError("the multi-parent condition supports at most 4 parents");
  if (n > kCandidateFamilyMaxNodes) throw CapabilityError("the multi-parent condition supports at most 12 nodes");
  const double cap = n >= 1 ? log_cap(params, static_cast<double>(n)) : 0.0;
  MultiParentConditionReport rep;

  auto check_pair = [&](MultiParentPair pair) {
    pair.checked = static_cast<double>(pair.kept.size()) > cap;
    if (pair.checked) {
      std::vector<Node> old_of_new;
      Dag sub = dag.induced(pair.kept, &old_of_new);
      ParentSpec sp = ParentSpec::none(sub.size());
      if (pair.parent) {
        const auto it = std::lower_bound(old_of_new.begin(), old_of_new.end(), *pair.parent);
        sp.parents.insert(static_cast<Node>(it - old_of_new.begin()));
      }
      pair.holds = check_fast_condition(sub, sp, params, n).holds;
      rep.holds = rep.holds && pair.holds;
    }
    rep.pairs.push_back(std::move(pair));
  };

  std::vector<Node> plist = parents.parents.members();
  std::sort(plist.begin(), plist.end());
  do {
    bool topo = true;
    for (std::size_t i = 0; i < plist.size() && topo; ++i)
      for (std::size_t j = i + 1; j < plist.size(); ++j)
        if (dag.ancestors(plist[i]).test(plist[j])) {
          topo = false;
          break;
        }
    if (!topo) continue;
    for (std::size_t i = 0; i < plist.size(); ++i) {
      NodeSet s(n);
      for (std::size_t j = i + 1; j < plist.size(); ++j) s |= dag.descendants(plist[j]);
      MultiParentPair pair;
      pair.ordering = plist;
      pair.index = i + 1;
      pair.kept = dag.all_nodes() - s;
      pair.parent = plist[i];
      check_pair(std::move(pair));
    }
  } while (std::next_permutation(plist.begin(), plist.end()));

  NodeSet dp(n);
  parents.parents.for_each([&](Node v) { dp |= dag.descendants(v); });
  MultiParentPair last;
  last.kept = dag.all_nodes() - dp;
  check_pair(std::move(last));
  return rep;
}

std::size_t count_trekless(const Dag& dag, const ParentSpec& parent) {
  const auto p = parent.single_parent();
  std::size_t count = 0;
  for (Node x = 0; x < dag.size(); ++x) {
    if (p && x == *p) continue;
    if (!has_trek(dag, x, parent)) ++count;
  }
  return count;
}

double trekless_ratio(const Dag& dag, const ParentSpec& parent) {
  const std::size_t d = skeleton_max_degree(dag);
  const double n = static_cast<double>(dag.size());
  if (d < 2 || dag.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  return static_cast<double>(count_trekless(dag, parent)) * (std::log(n) / std::log(static_cast<double>(d))) / n;
}

double er_fast_threshold(double n, double k, double c, ThresholdVariant variant, double log_base) {
  if (!(c >= 0.0 && c <= 1.0)) throw DomainError("c must lie in [0, 1]");
  if (!(log_base > 1.0) || !(k > 0.0) || !(n > 0.0)) throw DomainError("need n > 0, k > 0 and log base > 1");
  const double l = std::pow(std::log(n) / std::log(log_base), k);
  if (!(l > 1.0)) throw DomainError("log^k(n) must exceed 1");
  if (c == 1.0) return 1.0;
  double p = 0.0;
  if (variant == ThresholdVariant::corollary)
    p = 1.0 - std::pow((1.0 - c) / (l - 1.0), 1.0 / (l - 1.0));
  else
    p = (std::log(l - 1.0) - std::log(1.0 - c)) / (l - 1.0);
  return std::clamp(p, 0.0, 1.0);
}

double er_multiparent_threshold(double n, double k, double c0, double c1, double log_base) {
  if (!(c1 > 0.0)) throw DomainError("c1 must be positive");
  if (!(n > 1.0)) throw DomainError("n must exceed 1");
  const double inner = c1 * std::pow(std::log(n) / std::log(log_base), k);
  return er_fast_threshold(inner, k, c0, ThresholdVariant::corollary, log_base);
}

double dary_tree_bound(std::size_t n, std::size_t d) {
  if (d < 2) throw ParameterError("tree arity must be at least 2");
  const std::size_t h = dary_tree_height(n, d);
  const double levels = static_cast<double>(h + 1);  // log_d(n + 1)
  const double dd = static_cast<double>(d);
  return (static_cast<double>(n) + 1.0) * (dd - 1.0) / (dd * (levels + 1.0));
}

Rational multiparent_expected_interventions(const Dag& dag, const std::vector<Node>& discovery_order) {
  const std::size_t n = dag.size();
  NodeSet s = NodeSet::full(n);
  Rational total = 0;
  auto add = [&](std::optional<Node> p) {
    std::vector<Node> old_of_new;
    Dag sub = dag.induced(s, &old_of_new);
    ParentSpec sp = ParentSpec::none(sub.size());
    if (p) {
      const auto it = std::lower_bound(old_of_new.begin(), old_of_new.end(), *p);
      if (it == old_of_new.end() || *it != *p) throw DomainError("discovered parent outside the remaining set");
      sp.parents.insert(static_cast<Node>(it - old_of_new.begin()));
    }
    total += expected_interventions(sub, sp);
  };
  for (Node p : discovery_order) {
    add(p);
    s -= dag.descendants(p);
  }
  add(std::nullopt);
  total.canonicalize();
  return total;
}

}  // namespace causalbandit
