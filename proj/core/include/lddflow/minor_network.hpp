#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <numeric>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <type_traits>
#include <utility>
#include <vector>

#include "lddflow/error.hpp"
#include "lddflow/graph.hpp"
#include "lddflow/rng.hpp"

namespace lddflow {

/// Commutative and associative combiner with its identity element.
template <typename T> struct AggregationOp {
  AggregationOp() = default;
  AggregationOp(T id, std::function<T(const T &, const T &)> fn)
      : identity(std::move(id)), combine(std::move(fn)) {}

  T identity{};
  std::function<T(const T &, const T &)> combine;
  /// The model is only well defined for order-independent operators; rounds
  /// refuse operators that do not declare themselves as such.
  bool commutative_associative = true;
  /// Equality used by the randomized re-association check. Defaults to ==.
  std::function<bool(const T &, const T &)> equal;
};

namespace ops {

template <typename T> AggregationOp<T> sum() {
  AggregationOp<T> op{T{}, [](const T &a, const T &b) { return a + b; }};
  if constexpr (std::is_floating_point_v<T>) {
    op.equal = [](const T &a, const T &b) {
      return std::abs(a - b) <= 1e-9 * std::max({T{1}, std::abs(a), std::abs(b)});
    };
  }
  return op;
}

template <typename T> AggregationOp<T> min(T identity) {
  return {identity, [](const T &a, const T &b) { return b < a ? b : a; }};
}

template <typename T> AggregationOp<T> max(T identity) {
  return {identity, [](const T &a, const T &b) { return a < b ? b : a; }};
}

inline AggregationOp<bool> any() {
  return {false, [](bool a, bool b) { return a || b; }};
}

/// Placeholder for rounds that do not use a step.
struct Nothing {
  friend bool operator==(Nothing, Nothing) { return true; }
};
inline AggregationOp<Nothing> none() {
  return {Nothing{}, [](Nothing, Nothing) { return Nothing{}; }};
}

} // namespace ops

/// Size in bits a value occupies on the wire. Specialize for types whose
/// in-memory size is not representative.
template <typename T> unsigned payload_bits(const T &) {
  if constexpr (std::is_same_v<T, ops::Nothing>) return 0;
  else return static_cast<unsigned>(sizeof(T) * 8);
}

template <typename X, typename Z> struct RoundSpec {
  std::string_view label = "round";
  /// Contraction step: c_e = true contracts edge e. Empty means contract nothing.
  std::function<bool(EdgeId)> contract;
  /// Contract every edge (global aggregation); overrides `contract`.
  bool contract_all = false;
  /// Consensus step: private input x_v of every node.
  std::function<X(NodeId)> input;
  AggregationOp<X> consensus;
  /// Aggregation step: called for every minor edge (tail and head in
  /// different supernodes) with y of the tail-side and head-side supernodes;
  /// returns the contributions (z_tail_side, z_head_side). Empty means no
  /// aggregation, every node receives the identity.
  std::function<std::pair<Z, Z>(EdgeId, const X &, const X &)> edge;
  AggregationOp<Z> aggregate;
};

template <typename X, typename Z> struct RoundResult {
  /// Per-node consensus value y_s of its supernode.
  std::vector<X> consensus;
  /// Per-node aggregate over the minor edges incident to its supernode.
  std::vector<Z> aggregate;
  /// Simulator-side view of the partition (minimum node id of each supernode).
  /// Algorithms must not read this; nodes learn supernode identity through
  /// consensus like everything else. Exposed for verification.
  std::vector<NodeId> supernode;
  std::size_t num_supernodes = 0;
  std::size_t num_minor_edges = 0;
};

struct NetworkOptions {
  unsigned payload_budget_bits = 256;
  /// Raise payload_budget errors instead of logging a fidelity warning.
  bool enforce_payload_budget = false;
#ifdef NDEBUG
  bool check_associativity = false;
#else
  bool check_associativity = true;
#endif
  /// One JSON line per round when set.
  std::ostream *trace = nullptr;
};

/// Round bookkeeping shared by a network and all minors derived from it.
struct RoundLedger {
  std::uint64_t rounds = 0;
  /// Rounds charged for computations replayed outside run_round.
  std::uint64_t replayed_rounds = 0;
  unsigned max_payload_bits = 0;
  std::uint64_t payload_warnings = 0;
  NetworkOptions options;
};

/// Simulator of the Distributed Minor-Aggregation model on a fixed base graph.
///
/// Every call to run_round executes one round: contraction, consensus and
/// aggregation, in that order, and advances the shared round counter by one.
/// A network may be a view on a minor G/F (see as_minor); frozen edges are
/// contracted in every round and rounds accrue to the parent's counter.
class MinorNetwork {
public:
  explicit MinorNetwork(const Graph &graph, NetworkOptions options = {});

  const Graph &graph() const { return *graph_; }
  std::size_t num_nodes() const { return graph_->num_nodes(); }
  std::size_t num_edges() const { return graph_->num_edges(); }

  std::uint64_t rounds() const { return ledger_->rounds; }
  const RoundLedger &ledger() const { return *ledger_; }
  std::shared_ptr<RoundLedger> shared_ledger() const { return ledger_; }

  /// Network on the minor G/F sharing this network's round counter. Frozen
  /// sets accumulate across nested views.
  MinorNetwork as_minor(const std::vector<EdgeId> &frozen_edges) const;
  bool is_frozen(EdgeId e) const { return !frozen_.empty() && frozen_[e]; }
  bool has_frozen_edges() const { return frozen_count_ > 0; }

  /// A network on a different graph (e.g. an explicitly built minor) that
  /// accrues rounds to this network's counter.
  MinorNetwork derived(const Graph &graph) const;

  /// Accounts for `count` rounds of a pipeline whose result was computed by
  /// an equivalent centralized replay.
  void charge_rounds(std::uint64_t count, std::string_view label);

  template <typename X, typename Z> RoundResult<X, Z> run_round(const RoundSpec<X, Z> &spec);

private:
  MinorNetwork(std::shared_ptr<const Graph> graph, std::shared_ptr<RoundLedger> ledger,
               std::vector<char> frozen);

  void note_payload(unsigned bits);
  void trace_round(std::string_view label, std::size_t supernodes, std::size_t minor_edges,
                   unsigned payload);
  std::vector<NodeId> partition(const std::function<bool(EdgeId)> &contract, bool contract_all,
                                std::vector<std::size_t> &dense, std::size_t &count) const;
  template <typename T>
  void check_operator(const AggregationOp<T> &op, const std::vector<T> &samples,
                      std::string_view label);

  std::shared_ptr<const Graph> graph_;
  std::shared_ptr<RoundLedger> ledger_;
  std::vector<char> frozen_;
  std::size_t frozen_count_ = 0;
  std::uint64_t check_state_ = 0x5eed;
};

template <typename T>
void MinorNetwork::check_operator(const AggregationOp<T> &op, const std::vector<T> &samples,
                                  std::string_view label) {
  if (!op.commutative_associative) {
    throw Error(ErrorCode::non_associative,
                std::string(label) + ": aggregation operator is not commutative and associative");
  }
  if (!ledger_->options.check_associativity || samples.size() < 3) return;
  auto eq = [&](const T &a, const T &b) {
    if (op.equal) return op.equal(a, b);
    if constexpr (std::equality_comparable<T>) return a == b;
    else return true;
  };
  Rng rng(splitmix64(++check_state_));
  for (int trial = 0; trial < 8; ++trial) {
    const T &a = samples[rng.below(samples.size())];
    const T &b = samples[rng.below(samples.size())];
    const T &c = samples[rng.below(samples.size())];
    if (!eq(op.combine(op.combine(a, b), c), op.combine(a, op.combine(b, c))) ||
        !eq(op.combine(a, b), op.combine(b, a)) || !eq(op.combine(a, op.identity), a)) {
      throw Error(ErrorCode::non_associative,
                  std::string(label) + ": re-association check failed for aggregation operator");
    }
  }
}

template <typename X, typename Z>
RoundResult<X, Z> MinorNetwork::run_round(const RoundSpec<X, Z> &spec) {
  const Graph &g = *graph_;
  const std::size_t n = g.num_nodes();
  RoundResult<X, Z> result;

  // Contraction step.
  std::vector<std::size_t> dense;
  result.supernode = partition(spec.contract, spec.contract_all, dense, result.num_supernodes);
  const std::size_t k = result.num_supernodes;

  unsigned payload = 0;

  // Consensus step: deterministic left fold over members in id order.
  std::vector<X> y(k, spec.consensus.identity);
  if (spec.input && ledger_->options.check_associativity) {
    std::vector<X> inputs;
    inputs.reserve(n);
    for (NodeId v = 0; v < n; ++v) inputs.push_back(spec.input(v));
    check_operator(spec.consensus, inputs, spec.label);
    for (NodeId v = 0; v < n; ++v) {
      payload = std::max(payload, payload_bits(inputs[v]));
      y[dense[v]] = spec.consensus.combine(y[dense[v]], inputs[v]);
    }
  } else if (spec.input) {
    check_operator(spec.consensus, std::vector<X>{}, spec.label);
    for (NodeId v = 0; v < n; ++v) {
      const X input = spec.input(v);
      payload = std::max(payload, payload_bits(input));
      y[dense[v]] = spec.consensus.combine(y[dense[v]], input);
    }
  }
  for (const X &value : y) payload = std::max(payload, payload_bits(value));

  // Aggregation step over minor edges in edge-id order.
  std::vector<Z> z(k, spec.aggregate.identity);
  if (spec.edge) {
    std::vector<Z> contributions;
    const bool checking = ledger_->options.check_associativity;
    for (EdgeId e = 0; e < g.num_edges(); ++e) {
      const std::size_t a = dense[g.edge(e).tail];
      const std::size_t b = dense[g.edge(e).head];
      if (a == b) continue;
      ++result.num_minor_edges;
      auto [za, zb] = spec.edge(e, y[a], y[b]);
      payload = std::max({payload, payload_bits(za), payload_bits(zb)});
      if (checking && contributions.size() < 64) {
        contributions.push_back(za);
        contributions.push_back(zb);
      }
      z[a] = spec.aggregate.combine(z[a], za);
      z[b] = spec.aggregate.combine(z[b], zb);
    }
    check_operator(spec.aggregate, contributions, spec.label);
  } else {
    for (EdgeId e = 0; e < g.num_edges(); ++e)
      if (dense[g.edge(e).tail] != dense[g.edge(e).head]) ++result.num_minor_edges;
  }

  result.consensus.resize(n, spec.consensus.identity);
  result.aggregate.resize(n, spec.aggregate.identity);
  for (NodeId v = 0; v < n; ++v) {
    result.consensus[v] = y[dense[v]];
    result.aggregate[v] = z[dense[v]];
  }

  ++ledger_->rounds;
  note_payload(payload);
  trace_round(spec.label, k, result.num_minor_edges, payload);
  return result;
}

// Linear-algebra primitives over distributedly stored vectors. Each costs
// exactly one round. Edge values are co-located with their endpoints, so a
// node may fold the values of the edges it is the tail of before the round.

double dot(MinorNetwork &net, const NodeVector &a, const NodeVector &b);
double dot(MinorNetwork &net, const EdgeVector &a, const EdgeVector &b);
/// p-norm for finite p >= 1; p = infinity gives the max norm.
double norm(MinorNetwork &net, const NodeVector &a, double p);
double norm(MinorNetwork &net, const EdgeVector &a, double p);
/// All nodes learn the value held by `holder`.
double broadcast_scalar(MinorNetwork &net, NodeId holder, double value);

NodeVector apply_B(MinorNetwork &net, const EdgeVector &f);
EdgeVector apply_Bt(MinorNetwork &net, const NodeVector &phi);
EdgeVector apply_W(MinorNetwork &net, const EdgeVector &f);

} // namespace lddflow
