#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "causalbandit/dag.hpp"
#include "causalbandit/rng.hpp"
#include "causalbandit/scm.hpp"

namespace causalbandit {

struct SearchStep {
  NodeSet candidates;  // candidate set at the time of the draw
  std::size_t candidate_set_size = 0;
  Node intervened = 0;
  bool was_ancestor = false;
  NodeSet discovered_descendants;  // declared descendants within `candidates`
};

struct SearchTrace {
  std::vector<SearchStep> steps;
  ParentSpec result;
  std::size_t intervention_count = 0;
  std::uint64_t samples_used = 0;  // statistical mode only

  std::vector<Node> intervened_sequence() const;
};

/// Answers the line-7 query of the search: is X an ancestor of the target,
/// and which members of the candidate set are its descendants.
class InterventionOracle {
 public:
  struct Response {
    bool is_ancestor = false;
    NodeSet descendants;  // subset of the candidate set, contains X
  };
  virtual ~InterventionOracle() = default;
  virtual Response query(const NodeSet& candidates, Node x) = 0;
};

// Draws the node to intervene on from a non-empty candidate set.
using NodePicker = std::function<Node(const NodeSet&)>;

NodePicker uniform_picker(Rng& rng);

/// Randomized parent search over `start`. Each draw is one logical
/// intervention; the result is the last node declared an ancestor, or the
/// empty spec when the walk never finds one.
SearchTrace run_raps(const NodeSet& start, InterventionOracle& oracle, const NodePicker& pick);

/// Ground truth for a single parent, answered from the graph's reachability.
class GroundTruthOracle final : public InterventionOracle {
 public:
  GroundTruthOracle(const Dag& dag, const ParentSpec& parent);
  Response query(const NodeSet& candidates, Node x) override;

 private:
  const Dag& dag_;
  std::optional<Node> parent_;
};

/// Ground truth for the multi-parent loop: X qualifies iff it has a directed
/// path to an undiscovered parent that avoids every discovered parent.
class MultiParentOracle final : public InterventionOracle {
 public:
  MultiParentOracle(const Dag& dag, const ParentSpec& parents);
  void set_discovered(const NodeSet& discovered);
  Response query(const NodeSet& candidates, Node x) override;

 private:
  const Dag& dag_;
  NodeSet parents_;
  NodeSet reaches_;  // nodes with a qualifying path
};

SearchTrace raps_oracle(const Dag& dag, const ParentSpec& parent, Rng& rng);
SearchTrace raps_oracle(const Dag& dag, const ParentSpec& parent, const NodePicker& pick);

/// Permutation form: walks `perm`, intervening on tau_i iff no member of
/// (A(P) xor A(tau_i)) \ {tau_i} appeared earlier in the permutation.
/// Step snapshots hold the set of nodes still eligible at that point.
SearchTrace raps_permutation(const Dag& dag, const ParentSpec& parent, std::span<const Node> perm);

struct DetectorConfig {
  double Delta = 0.3;  // reward gap
  double eps = 0.3;    // ancestral effect gap
  double delta = 0.1;  // failure probability
  std::uint64_t B = 1;  // samples per intervention value
  int K = 2;
};

/// Batch size from the detector's concentration bound (natural logs).
std::uint64_t required_batch_size(std::size_t n, int K, double delta, double Delta, double eps);

// One declaration made by the statistical detector, with ground truth.
struct Declaration {
  Node node = 0;
  bool declared_ancestor = false;
  bool true_ancestor = false;
  NodeSet declared_descendants;
  NodeSet true_descendants;
  bool correct() const { return declared_ancestor == true_ancestor && declared_descendants == true_descendants; }
};

struct SampleLedger {
  std::uint64_t observational = 0;
  std::uint64_t interventional = 0;
  std::uint64_t total() const { return observational + interventional; }
  std::vector<Declaration> declarations;
  // Set when the multi-parent detector reuses single-parent thresholds for
  // joint interventions, which the batch-size bound does not cover.
  bool thresholds_extrapolated = false;
  bool all_correct() const;
};

// Called with every physical sample drawn by the detector.
using SampleSink = std::function<void(const Intervention&, const Sample&)>;

/// Empirical detector: one shared observational batch of B samples, then B
/// samples of each do(X = x) per tested node (of do(Phat = v, X = x) in
/// multi-parent mode, per assignment v of the discovered parents).
class StatisticalOracle final : public InterventionOracle {
 public:
  StatisticalOracle(const Scm& scm, const DetectorConfig& cfg, Rng& rng, SampleSink sink = {});
  void set_discovered(const NodeSet& discovered);
  Response query(const NodeSet& candidates, Node x) override;
  const SampleLedger& ledger() const noexcept { return ledger_; }

 private:
  struct Batch {
    double reward_mean = 0.0;
    std::vector<std::vector<double>> freq;  // freq[Y][y]
  };
  Batch draw_batch(const Intervention& iv, std::uint64_t count, bool observational);
  void refresh_baselines();

  const Scm& scm_;
  DetectorConfig cfg_;
  Rng& rng_;
  SampleSink sink_;
  NodeSet discovered_;
  std::vector<Node> discovered_list_;
  std::vector<Batch> baselines_;  // one per assignment of the discovered set
  // Batches per tested node for the current discovered set; a repeated query
  // reuses them instead of drawing again.
  std::map<Node, std::vector<Batch>> cache_;
  NodeSet true_targets_;          // ground truth for the ledger
  SampleLedger ledger_;
  std::vector<int> scratch_;
};

struct StatisticalResult {
  SearchTrace trace;
  SampleLedger ledger;
};

StatisticalResult raps_statistical(const Scm& scm, const DetectorConfig& cfg, Rng& rng, SampleSink sink = {});

enum class SearchMode { oracle, statistical };

struct MultiParentResult {
  ParentSpec parents;
  std::vector<Node> discovery_order;
  std::vector<SearchTrace> traces;  // one per call, the last returns empty
  std::size_t total_interventions = 0;
  SampleLedger ledger;  // statistical mode
};

MultiParentResult multiparent_search(InterventionOracle& oracle, std::size_t n, Rng& rng,
                                     const std::function<void(const NodeSet&)>& on_discovered);
MultiParentResult multiparent_search_oracle(const Dag& dag, const ParentSpec& parents, Rng& rng);
MultiParentResult multiparent_search_statistical(const Scm& scm, const DetectorConfig& cfg, Rng& rng,
                                                 SampleSink sink = {});

// True iff no discovered parent is a proper ancestor of a later one.
bool is_reverse_topological(const Dag& dag, std::span<const Node> order);

}  // namespace causalbandit
