#include "lddflow/minor_network.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

namespace lddflow {

namespace {

void require_size(std::size_t actual, std::size_t expected, const char *what) {
  if (actual != expected) {
    throw Error(ErrorCode::dimension_mismatch, std::string(what) + ": expected length " +
                                                   std::to_string(expected) + ", got " +
                                                   std::to_string(actual));
  }
}

NodeId find_root(std::vector<NodeId> &parent, NodeId v) {
  while (parent[v] != v) {
    parent[v] = parent[parent[v]];
    v = parent[v];
  }
  return v;
}

} // namespace

MinorNetwork::MinorNetwork(const Graph &graph, NetworkOptions options)
    : graph_(std::make_shared<const Graph>(graph)), ledger_(std::make_shared<RoundLedger>()) {
  ledger_->options = options;
}

MinorNetwork::MinorNetwork(std::shared_ptr<const Graph> graph, std::shared_ptr<RoundLedger> ledger,
                           std::vector<char> frozen)
    : graph_(std::move(graph)), ledger_(std::move(ledger)), frozen_(std::move(frozen)) {
  frozen_count_ = static_cast<std::size_t>(std::count(frozen_.begin(), frozen_.end(), 1));
}

MinorNetwork MinorNetwork::as_minor(const std::vector<EdgeId> &frozen_edges) const {
  std::vector<char> frozen = frozen_.empty() ? std::vector<char>(num_edges(), 0) : frozen_;
  for (EdgeId e : frozen_edges) {
    if (e >= num_edges()) throw Error(ErrorCode::invalid_argument, "frozen edge id out of range");
    frozen[e] = 1;
  }
  return MinorNetwork(graph_, ledger_, std::move(frozen));
}

MinorNetwork MinorNetwork::derived(const Graph &graph) const {
  return MinorNetwork(std::make_shared<const Graph>(graph), ledger_, {});
}

void MinorNetwork::charge_rounds(std::uint64_t count, std::string_view label) {
  if (count == 0) return;
  const std::uint64_t first = ledger_->rounds + 1;
  ledger_->rounds += count;
  ledger_->replayed_rounds += count;
  if (std::ostream *out = ledger_->options.trace) {
    nlohmann::json line = {{"round", first},         {"rounds", count},
                           {"label", label},         {"replayed", true},
                           {"supernodes", nullptr},  {"minor_edges", nullptr},
                           {"max_payload_bits", nullptr}};
    *out << line.dump() << '\n';
  }
}

void MinorNetwork::note_payload(unsigned bits) {
  RoundLedger &ledger = *ledger_;
  ledger.max_payload_bits = std::max(ledger.max_payload_bits, bits);
  if (bits <= ledger.options.payload_budget_bits) return;
  if (ledger.options.enforce_payload_budget) {
    throw Error(ErrorCode::payload_budget, "round payload of " + std::to_string(bits) +
                                               " bits exceeds the budget of " +
                                               std::to_string(ledger.options.payload_budget_bits));
  }
  if (ledger.payload_warnings++ == 0) {
    spdlog::warn("round payload of {} bits exceeds the {}-bit budget", bits,
                 ledger.options.payload_budget_bits);
  }
}

void MinorNetwork::trace_round(std::string_view label, std::size_t supernodes,
                               std::size_t minor_edges, unsigned payload) {
  std::ostream *out = ledger_->options.trace;
  if (!out) return;
  nlohmann::json line = {{"round", ledger_->rounds},  {"rounds", 1},
                         {"label", label},            {"replayed", false},
                         {"supernodes", supernodes},  {"minor_edges", minor_edges},
                         {"max_payload_bits", payload}};
  *out << line.dump() << '\n';
}

std::vector<NodeId> MinorNetwork::partition(const std::function<bool(EdgeId)> &contract, bool contract_all,
                                            std::vector<std::size_t> &dense,
                                            std::size_t &count) const {
  const Graph &g = *graph_;
  const std::size_t n = g.num_nodes();
  std::vector<NodeId> parent(n);
  std::iota(parent.begin(), parent.end(), NodeId{0});
  if (!contract_all && !contract && frozen_count_ == 0) {
    dense.resize(n);
    std::iota(dense.begin(), dense.end(), std::size_t{0});
    count = n;
    return parent;
  }
  {
    for (EdgeId e = 0; e < g.num_edges(); ++e) {
      if (!contract_all && !is_frozen(e) && !(contract && contract(e))) continue;
      NodeId a = find_root(parent, g.edge(e).tail);
      NodeId b = find_root(parent, g.edge(e).head);
      if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
  }
  // Roots are always the smallest id of their set because unions attach the
  // larger root below the smaller one.
  std::vector<NodeId> leader(n);
  dense.assign(n, 0);
  std::vector<std::size_t> index_of_root(n, std::numeric_limits<std::size_t>::max());
  count = 0;
  for (NodeId v = 0; v < n; ++v) {
    const NodeId r = find_root(parent, v);
    leader[v] = r;
    if (index_of_root[r] == std::numeric_limits<std::size_t>::max()) index_of_root[r] = count++;
    dense[v] = index_of_root[r];
  }
  return leader;
}

namespace {

double local_edge_fold(const Graph &g, NodeId v, const EdgeVector &a, const EdgeVector &b) {
  double s = 0.0;
  for (const Incidence &inc : g.neighbors(v))
    if (g.edge(inc.edge).tail == v) s += a[inc.edge] * b[inc.edge];
  return s;
}

template <typename F> double reduce_sum(MinorNetwork &net, std::string_view label, F &&input) {
  RoundSpec<double, ops::Nothing> spec;
  spec.label = label;
  spec.contract_all = true;
  spec.input = std::forward<F>(input);
  spec.consensus = ops::sum<double>();
  spec.aggregate = ops::none();
  const auto result = net.run_round(spec);
  return net.num_nodes() == 0 ? 0.0 : result.consensus[0];
}

template <typename F> double reduce_max(MinorNetwork &net, std::string_view label, F &&input) {
  RoundSpec<double, ops::Nothing> spec;
  spec.label = label;
  spec.contract_all = true;
  spec.input = std::forward<F>(input);
  spec.consensus = ops::max<double>(0.0);
  spec.aggregate = ops::none();
  const auto result = net.run_round(spec);
  return net.num_nodes() == 0 ? 0.0 : result.consensus[0];
}

} // namespace

double dot(MinorNetwork &net, const NodeVector &a, const NodeVector &b) {
  require_size(a.size(), net.num_nodes(), "dot");
  require_size(b.size(), net.num_nodes(), "dot");
  return reduce_sum(net, "dot", [&](NodeId v) { return a[v] * b[v]; });
}

double dot(MinorNetwork &net, const EdgeVector &a, const EdgeVector &b) {
  require_size(a.size(), net.num_edges(), "dot");
  require_size(b.size(), net.num_edges(), "dot");
  const Graph &g = net.graph();
  return reduce_sum(net, "dot", [&](NodeId v) { return local_edge_fold(g, v, a, b); });
}

double norm(MinorNetwork &net, const NodeVector &a, double p) {
  require_size(a.size(), net.num_nodes(), "norm");
  if (std::isinf(p)) return reduce_max(net, "norm", [&](NodeId v) { return std::abs(a[v]); });
  if (!(p >= 1)) throw Error(ErrorCode::invalid_argument, "norm requires p >= 1");
  const double s = reduce_sum(net, "norm", [&](NodeId v) { return p == 1 ? std::abs(a[v]) : std::pow(std::abs(a[v]), p); });
  return p == 1 ? s : std::pow(s, 1.0 / p);
}

double norm(MinorNetwork &net, const EdgeVector &a, double p) {
  require_size(a.size(), net.num_edges(), "norm");
  const Graph &g = net.graph();
  if (std::isinf(p)) {
    return reduce_max(net, "norm", [&](NodeId v) {
      double m = 0.0;
      for (const Incidence &inc : g.neighbors(v))
        if (g.edge(inc.edge).tail == v) m = std::max(m, std::abs(a[inc.edge]));
      return m;
    });
  }
  if (!(p >= 1)) throw Error(ErrorCode::invalid_argument, "norm requires p >= 1");
  const double s = reduce_sum(net, "norm", [&](NodeId v) {
    double acc = 0.0;
    for (const Incidence &inc : g.neighbors(v))
      if (g.edge(inc.edge).tail == v) acc += p == 1 ? std::abs(a[inc.edge]) : std::pow(std::abs(a[inc.edge]), p);
    return acc;
  });
  return p == 1 ? s : std::pow(s, 1.0 / p);
}

double broadcast_scalar(MinorNetwork &net, NodeId holder, double value) {
  if (holder >= net.num_nodes()) throw Error(ErrorCode::node_out_of_range, "broadcast holder");
  return reduce_sum(net, "broadcast", [&](NodeId v) { return v == holder ? value : 0.0; });
}

NodeVector apply_B(MinorNetwork &net, const EdgeVector &f) {
  require_size(f.size(), net.num_edges(), "apply_B");
  if (net.has_frozen_edges()) {
    throw Error(ErrorCode::invalid_argument, "apply_B needs an uncontracted network");
  }
  RoundSpec<ops::Nothing, double> spec;
  spec.label = "apply_B";
  spec.consensus = ops::none();
  spec.edge = [&](EdgeId e, ops::Nothing, ops::Nothing) { return std::pair{f[e], -f[e]}; };
  spec.aggregate = ops::sum<double>();
  auto result = net.run_round(spec);
  return NodeVector(std::move(result.aggregate));
}

EdgeVector apply_Bt(MinorNetwork &net, const NodeVector &phi) {
  require_size(phi.size(), net.num_nodes(), "apply_Bt");
  if (net.has_frozen_edges()) {
    throw Error(ErrorCode::invalid_argument, "apply_Bt needs an uncontracted network");
  }
  // Each edge sees both endpoint values and keeps the difference in its memory.
  EdgeVector out(net.num_edges());
  RoundSpec<double, ops::Nothing> spec;
  spec.label = "apply_Bt";
  spec.input = [&](NodeId v) { return phi[v]; };
  spec.consensus = ops::sum<double>();
  spec.edge = [&](EdgeId e, double tail_value, double head_value) {
    out[e] = tail_value - head_value;
    return std::pair{ops::Nothing{}, ops::Nothing{}};
  };
  spec.aggregate = ops::none();
  net.run_round(spec);
  return out;
}

EdgeVector apply_W(MinorNetwork &net, const EdgeVector &f) {
  require_size(f.size(), net.num_edges(), "apply_W");
  // Weights are known at both endpoints; the round only synchronizes.
  RoundSpec<ops::Nothing, ops::Nothing> spec;
  spec.label = "apply_W";
  spec.consensus = ops::none();
  spec.aggregate = ops::none();
  net.run_round(spec);
  return apply_W(net.graph(), f);
}

} // namespace lddflow
