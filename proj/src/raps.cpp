#include "causalbandit/raps.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "causalbandit/errors.hpp"

namespace causalbandit {

std::vector<Node> SearchTrace::intervened_sequence() const {
  std::vector<Node> seq;
  seq.reserve(steps.size());
  for (const auto& s : steps) seq.push_back(s.intervened);
  return seq;
}

NodePicker uniform_picker(Rng& rng) {
  return [&rng](const NodeSet& c) { return c.nth(rng.uniform_below(c.size())); };
}

SearchTrace run_raps(const NodeSet& start, InterventionOracle& oracle, const NodePicker& pick) {
  SearchTrace trace;
  trace.result = ParentSpec::none(start.width());
  NodeSet c = start;
  std::optional<Node> last;
  while (!c.empty()) {
    const Node x = pick(c);
    if (!c.contains(x)) throw StateError("picker returned a node outside the candidate set");
    auto resp = oracle.query(c, x);
    resp.descendants &= c;
    resp.descendants.insert(x);
    SearchStep step{c, c.size(), x, resp.is_ancestor, resp.descendants};
    if (resp.is_ancestor) {
      last = x;
      c = resp.descendants;
      c.erase(x);
    } else {
      c -= resp.descendants;
    }
    trace.steps.push_back(std::move(step));
  }
  if (last) trace.result.parents.insert(*last);
  trace.intervention_count = trace.steps.size();
  return trace;
}

GroundTruthOracle::GroundTruthOracle(const Dag& dag, const ParentSpec& parent)
    : dag_(dag), parent_(parent.single_parent()) {}

InterventionOracle::Response GroundTruthOracle::query(const NodeSet& candidates, Node x) {
  Response r;
  r.is_ancestor = parent_ && dag_.ancestors(*parent_).test(x);
  r.descendants = descendants_in(dag_, candidates, x);
  return r;
}

MultiParentOracle::MultiParentOracle(const Dag& dag, const ParentSpec& parents)
    : dag_(dag), parents_(parents.parents), reaches_(dag.size()) {
  set_discovered(NodeSet(dag.size()));
}

void MultiParentOracle::set_discovered(const NodeSet& discovered) {
  // Reverse search from the undiscovered parents that never enters a
  // discovered node.
  reaches_.clear();
  std::vector<Node> stack;
  (parents_ - discovered).for_each([&](Node p) {
    reaches_.insert(p);
    stack.push_back(p);
  });
  while (!stack.empty()) {
    const Node v = stack.back();
    stack.pop_back();
    for (Node u : dag_.parents(v)) {
      if (discovered.test(u) || reaches_.test(u)) continue;
      reaches_.insert(u);
      stack.push_back(u);
    }
  }
}

InterventionOracle::Response MultiParentOracle::query(const NodeSet& candidates, Node x) {
  Response r;
  r.is_ancestor = reaches_.test(x);
  r.descendants = descendants_in(dag_, candidates, x);
  return r;
}

SearchTrace raps_oracle(const Dag& dag, const ParentSpec& parent, Rng& rng) {
  return raps_oracle(dag, parent, uniform_picker(rng));
}

SearchTrace raps_oracle(const Dag& dag, const ParentSpec& parent, const NodePicker& pick) {
  GroundTruthOracle oracle(dag, parent);
  return run_raps(dag.all_nodes(), oracle, pick);
}

SearchTrace raps_permutation(const Dag& dag, const ParentSpec& parent, std::span<const Node> perm) {
  const std::size_t n = dag.size();
  if (perm.size() != n) throw ParameterError("permutation length differs from node count");
  std::vector<bool> hit(n, false);
  for (Node v : perm) {
    if (v >= n || hit[v]) throw ParameterError("permutation is not a bijection");
    hit[v] = true;
  }
  parent.single_parent();
  const NodeSet ap = parent_ancestors(dag, parent);

  SearchTrace trace;
  trace.result = ParentSpec::none(n);
  NodeSet seen(n), intervened(n);
  std::optional<Node> last;
  for (Node x : perm) {
    NodeSet sym = ap ^ dag.ancestors(x);
    sym.erase(x);
    const bool take = !sym.intersects(seen);
    seen.insert(x);
    if (!take) continue;

    NodeSet cand(n);
    for (Node y = 0; y < n; ++y) {
      NodeSet block = ap ^ dag.ancestors(y);
      block.insert(y);
      if (!block.intersects(intervened)) cand.insert(y);
    }
    const bool anc = ap.test(x);
    trace.steps.push_back(SearchStep{cand, cand.size(), x, anc, dag.descendants(x) & cand});
    intervened.insert(x);
    if (anc) last = x;
  }
  if (last) trace.result.parents.insert(*last);
  trace.intervention_count = trace.steps.size();
  return trace;
}

std::uint64_t required_batch_size(std::size_t n, int K, double delta, double Delta, double eps) {
  if (n < 1 || K < 1) throw DomainError("batch size needs n >= 1 and K >= 1");
  if (!(delta > 0.0 && delta < 1.0)) throw DomainError("delta must lie in (0, 1)");
  if (!(Delta > 0.0) || !(eps > 0.0)) throw DomainError("gaps must be positive");
  const double nn = static_cast<double>(n), kk = static_cast<double>(K);
  const double a = 32.0 / (Delta * Delta) * std::log(8.0 * nn * kk / delta);
  const double b = 8.0 / (eps * eps) * std::log(8.0 * nn * nn * kk * kk / delta);
  return static_cast<std::uint64_t>(std::ceil(std::max(a, b)));
}

bool SampleLedger::all_correct() const {
  return std::all_of(declarations.begin(), declarations.end(), [](const Declaration& d) { return d.correct(); });
}

StatisticalOracle::StatisticalOracle(const Scm& scm, const DetectorConfig& cfg, Rng& rng, SampleSink sink)
    : scm_(scm), cfg_(cfg), rng_(rng), sink_(std::move(sink)), discovered_(scm.size()), true_targets_(scm.size()) {
  if (cfg_.B < 1) throw ParameterError("batch size must be at least 1");
  if (!(cfg_.Delta > 0.0) || !(cfg_.eps > 0.0)) throw ParameterError("detector gaps must be positive");
  if (cfg_.K != scm_.K()) throw ParameterError("detector K differs from the SCM");
  refresh_baselines();
}

StatisticalOracle::Batch StatisticalOracle::draw_batch(const Intervention& iv, std::uint64_t count, bool observational) {
  const std::size_t n = scm_.size();
  const int K = scm_.K();
  const auto forced = forced_values(n, iv);
  Batch b;
  b.freq.assign(n, std::vector<double>(K, 0.0));
  double sum = 0.0;
  for (std::uint64_t i = 0; i < count; ++i) {
    const double r = scm_.sample_into(forced, rng_, scratch_);
    sum += r;
    for (Node v = 0; v < n; ++v) b.freq[v][scratch_[v]] += 1.0;
    if (sink_) sink_(iv, Sample{scratch_, r});
  }
  const double c = static_cast<double>(count);
  b.reward_mean = sum / c;
  for (auto& f : b.freq)
    for (auto& q : f) q /= c;
  if (observational)
    ledger_.observational += count;
  else
    ledger_.interventional += count;
  return b;
}

namespace {

// Every assignment of `nodes`, first node most significant.
std::vector<std::vector<int>> assignments(std::size_t count, int K) {
  std::vector<std::vector<int>> out{{}};
  for (std::size_t i = 0; i < count; ++i) {
    std::vector<std::vector<int>> next;
    for (const auto& a : out)
      for (int k = 0; k < K; ++k) {
        auto b = a;
        b.push_back(k);
        next.push_back(std::move(b));
      }
    out = std::move(next);
  }
  return out;
}

}  // namespace

void StatisticalOracle::refresh_baselines() {
  baselines_.clear();
  cache_.clear();
  const std::size_t n = scm_.size();
  if (discovered_.empty()) {
    baselines_.push_back(draw_batch(Intervention::observational(n), cfg_.B, true));
  } else {
    for (auto& v : assignments(discovered_list_.size(), cfg_.K))
      baselines_.push_back(draw_batch(Intervention::on_set(discovered_, v), cfg_.B, false));
  }
  // Ground truth: nodes with a directed path to an undiscovered parent that
  // avoids the discovered ones.
  const Dag& dag = scm_.dag();
  true_targets_.clear();
  std::vector<Node> stack;
  (scm_.reward_parents().parents - discovered_).for_each([&](Node p) {
    true_targets_.insert(p);
    stack.push_back(p);
  });
  while (!stack.empty()) {
    const Node v = stack.back();
    stack.pop_back();
    for (Node u : dag.parents(v)) {
      if (discovered_.test(u) || true_targets_.test(u)) continue;
      true_targets_.insert(u);
      stack.push_back(u);
    }
  }
}

void StatisticalOracle::set_discovered(const NodeSet& discovered) {
  if (discovered == discovered_) return;
  discovered_ = discovered;
  discovered_list_ = discovered.members();
  if (!discovered_.empty()) ledger_.thresholds_extrapolated = true;
  refresh_baselines();
}

InterventionOracle::Response StatisticalOracle::query(const NodeSet& candidates, Node x) {
  const std::size_t n = scm_.size();
  const int K = cfg_.K;
  Response resp;
  resp.descendants = NodeSet(n);
  resp.descendants.insert(x);

  const auto base_assign = assignments(discovered_list_.size(), K);
  auto [it, fresh] = cache_.try_emplace(x);
  std::vector<Batch>& batches = it->second;
  for (std::size_t a = 0; a < base_assign.size(); ++a) {
    const Batch& base = baselines_[a];
    for (int xv = 0; xv < K; ++xv) {
      if (fresh) {
        NodeSet targets = discovered_;
        targets.insert(x);
        // Values in increasing node order.
        std::vector<int> vals;
        std::size_t j = 0;
        targets.for_each([&](Node v) { vals.push_back(v == x ? xv : base_assign[a][j++]); });
        batches.push_back(draw_batch(Intervention::on_set(targets, std::move(vals)), cfg_.B, false));
      }
      const Batch& b = batches[a * K + xv];
      if (std::abs(base.reward_mean - b.reward_mean) > cfg_.Delta / 2) resp.is_ancestor = true;
      candidates.for_each([&](Node y) {
        if (resp.descendants.test(y)) return;
        for (int yv = 0; yv < scm_.K(); ++yv) {
          if (std::abs(base.freq[y][yv] - b.freq[y][yv]) > cfg_.eps / 2) {
            resp.descendants.insert(y);
            return;
          }
        }
      });
    }
  }

  Declaration d;
  d.node = x;
  d.declared_ancestor = resp.is_ancestor;
  d.true_ancestor = true_targets_.test(x);
  d.declared_descendants = resp.descendants;
  d.true_descendants = scm_.dag().descendants(x) & candidates;
  d.true_descendants.insert(x);
  ledger_.declarations.push_back(std::move(d));
  return resp;
}

StatisticalResult raps_statistical(const Scm& scm, const DetectorConfig& cfg, Rng& rng, SampleSink sink) {
  if (scm.reward_parents().count() > 1) throw ParameterError("raps_statistical expects at most one parent");
  StatisticalOracle oracle(scm, cfg, rng, std::move(sink));
  StatisticalResult out;
  out.trace = run_raps(scm.dag().all_nodes(), oracle, uniform_picker(rng));
  out.ledger = oracle.ledger();
  out.trace.samples_used = out.ledger.total();
  return out;
}

MultiParentResult multiparent_search(InterventionOracle& oracle, std::size_t n, Rng& rng,
                                     const std::function<void(const NodeSet&)>& on_discovered) {
  MultiParentResult out;
  out.parents = ParentSpec::none(n);
  NodeSet s = NodeSet::full(n);
  if (on_discovered) on_discovered(out.parents.parents);
  const auto pick = uniform_picker(rng);
  while (true) {
    SearchTrace t = run_raps(s, oracle, pick);
    out.total_interventions += t.intervention_count;
    const auto found = t.result.single_parent();
    out.traces.push_back(std::move(t));
    if (!found) break;
    if (out.parents.parents.test(*found)) throw StateError("search returned an already discovered parent");
    // Descendants of the new parent within the whole remaining set.
    const auto desc = oracle.query(s, *found).descendants;
    out.parents.parents.insert(*found);
    out.discovery_order.push_back(*found);
    s -= desc;
    s.erase(*found);
    if (on_discovered) on_discovered(out.parents.parents);
  }
  return out;
}

MultiParentResult multiparent_search_oracle(const Dag& dag, const ParentSpec& parents, Rng& rng) {
  MultiParentOracle oracle(dag, parents);
  return multiparent_search(oracle, dag.size(), rng, [&](const NodeSet& d) { oracle.set_discovered(d); });
}

MultiParentResult multiparent_search_statistical(const Scm& scm, const DetectorConfig& cfg, Rng& rng, SampleSink sink) {
  StatisticalOracle oracle(scm, cfg, rng, std::move(sink));
  auto out = multiparent_search(oracle, scm.size(), rng, [&](const NodeSet& d) { oracle.set_discovered(d); });
  out.ledger = oracle.ledger();
  return out;
}

bool is_reverse_topological(const Dag& dag, std::span<const Node> order) {
  for (std::size_t i = 0; i < order.size(); ++i)
    for (std::size_t j = i + 1; j < order.size(); ++j)
      if (order[i] != order[j] && dag.ancestors(order[j]).test(order[i])) return false;
  return true;
}

}  // namespace causalbandit
