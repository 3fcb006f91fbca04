#include "lddflow/generators.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>
#include <numeric>
#include <sstream>
#include <vector>

#include "lddflow/rng.hpp"

namespace lddflow {

namespace {

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = text.find(sep, start);
    parts.push_back(text.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

[[noreturn]] void bad_spec(std::string_view text, const std::string &why) {
  throw Error(ErrorCode::parse, "generator spec \"" + std::string(text) + "\": " + why);
}

template <typename T> T parse_number(std::string_view text, std::string_view whole, const char *what) {
  T value{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) bad_spec(whole, std::string("bad ") + what);
  return value;
}

double parse_real(std::string_view text, std::string_view whole, const char *what) {
  std::string copy(text);
  std::size_t used = 0;
  double value = 0;
  try {
    value = std::stod(copy, &used);
  } catch (const std::exception &) {
    bad_spec(whole, std::string("bad ") + what);
  }
  if (used != copy.size()) bad_spec(whole, std::string("bad ") + what);
  return value;
}

WeightSpec parse_weights(std::string_view text, std::string_view whole) {
  WeightSpec w;
  if (text == "unit") return w;
  std::string_view body;
  if (text.starts_with("lw")) {
    w.kind = WeightSpec::Kind::log_uniform;
    body = text.substr(2);
  } else if (text.starts_with("w")) {
    w.kind = WeightSpec::Kind::uniform_int;
    body = text.substr(1);
  } else {
    bad_spec(whole, "weights must be unit, w<lo>-<hi> or lw<lo>-<hi>");
  }
  const auto range = split(body, '-');
  if (range.size() != 2) bad_spec(whole, "weight range must be <lo>-<hi>");
  w.lo = parse_real(range[0], whole, "weight bound");
  w.hi = parse_real(range[1], whole, "weight bound");
  if (!(w.lo >= 1.0) || !(w.hi >= w.lo)) bad_spec(whole, "weight range must satisfy 1 <= lo <= hi");
  return w;
}

/// Shortest text that parses back to x.
std::string shortest(double x) {
  char buf[32];
  return std::string(buf, std::to_chars(buf, buf + sizeof buf, x).ptr);
}

std::string weights_to_string(const WeightSpec &w) {
  switch (w.kind) {
  case WeightSpec::Kind::unit: return "unit";
  case WeightSpec::Kind::uniform_int: return 'w' + shortest(w.lo) + '-' + shortest(w.hi);
  case WeightSpec::Kind::log_uniform: return "lw" + shortest(w.lo) + '-' + shortest(w.hi);
  }
  return {};
}

double draw_weight(const WeightSpec &w, Rng &rng) {
  switch (w.kind) {
  case WeightSpec::Kind::unit: return 1.0;
  case WeightSpec::Kind::uniform_int: {
    const auto lo = static_cast<std::uint64_t>(std::ceil(w.lo));
    const auto hi = static_cast<std::uint64_t>(std::floor(w.hi));
    return static_cast<double>(lo + rng.below(hi - lo + 1));
  }
  case WeightSpec::Kind::log_uniform:
    return std::min(w.hi, w.lo * std::exp(rng.uniform() * std::log(w.hi / w.lo)));
  }
  return 1.0;
}

bool connected(std::size_t n, const std::vector<Edge> &edges) {
  std::vector<NodeId> parent(n);
  std::iota(parent.begin(), parent.end(), NodeId{0});
  std::function<NodeId(NodeId)> find = [&](NodeId v) { return parent[v] == v ? v : parent[v] = find(parent[v]); };
  std::size_t parts = n;
  for (const Edge &e : edges) {
    const NodeId a = find(e.tail), b = find(e.head);
    if (a != b) {
      parent[a] = b;
      --parts;
    }
  }
  return parts <= 1;
}

} // namespace

GeneratorSpec parse_generator_spec(std::string_view text) {
  auto parts = split(text, ':');
  GeneratorSpec spec;
  if (!parts.empty() && parts.back().starts_with("seed")) {
    spec.seed = parse_number<std::uint64_t>(parts.back().substr(4), text, "seed");
    parts.pop_back();
  }
  if (parts.empty()) bad_spec(text, "empty");
  const std::string_view kind = parts[0];
  auto expect = [&](std::size_t count) {
    if (parts.size() != count) bad_spec(text, "expected " + std::to_string(count) + " fields");
  };
  auto size_field = [&](std::string_view field) {
    const auto value = parse_number<std::size_t>(field, text, "size");
    if (value < 1) bad_spec(text, "size must be at least 1");
    return value;
  };
  if (kind == "path" || kind == "tree") {
    expect(3);
    spec.kind = kind == "path" ? GeneratorSpec::Kind::path : GeneratorSpec::Kind::tree;
    spec.n = size_field(parts[1]);
    spec.weights = parse_weights(parts[2], text);
  } else if (kind == "grid") {
    expect(3);
    spec.kind = GeneratorSpec::Kind::grid;
    const auto dims = split(parts[1], 'x');
    if (dims.size() != 2) bad_spec(text, "grid size must be <rows>x<cols>");
    spec.rows = size_field(dims[0]);
    spec.cols = size_field(dims[1]);
    spec.n = spec.rows * spec.cols;
    spec.weights = parse_weights(parts[2], text);
  } else if (kind == "er" || kind == "geometric") {
    expect(4);
    spec.kind = kind == "er" ? GeneratorSpec::Kind::er : GeneratorSpec::Kind::geometric;
    spec.n = size_field(parts[1]);
    spec.param = parse_real(parts[2], text, kind == "er" ? "edge probability" : "radius");
    if (!(spec.param >= 0.0) || (kind == "er" && spec.param > 1.0)) bad_spec(text, "parameter out of range");
    spec.weights = parse_weights(parts[3], text);
  } else {
    bad_spec(text, "unknown family (path, grid, er, geometric, tree)");
  }
  return spec;
}

std::string to_string(const GeneratorSpec &spec) {
  std::ostringstream out;
  switch (spec.kind) {
  case GeneratorSpec::Kind::path: out << "path:" << spec.n; break;
  case GeneratorSpec::Kind::tree: out << "tree:" << spec.n; break;
  case GeneratorSpec::Kind::grid: out << "grid:" << spec.rows << 'x' << spec.cols; break;
  case GeneratorSpec::Kind::er: out << "er:" << spec.n << ':' << shortest(spec.param); break;
  case GeneratorSpec::Kind::geometric: out << "geometric:" << spec.n << ':' << shortest(spec.param); break;
  }
  out << ':' << weights_to_string(spec.weights) << ":seed" << spec.seed;
  return out.str();
}

Graph generate(const GeneratorSpec &spec) {
  Rng rng(derive_seed(spec.seed, {static_cast<std::uint64_t>(spec.kind), spec.n}));
  const std::size_t n = spec.n;
  std::vector<Edge> edges;
  auto add = [&](NodeId u, NodeId v) { edges.push_back({u, v, draw_weight(spec.weights, rng)}); };

  switch (spec.kind) {
  case GeneratorSpec::Kind::path:
    for (NodeId v = 0; v + 1 < n; ++v) add(v, v + 1);
    break;
  case GeneratorSpec::Kind::grid:
    for (std::size_t r = 0; r < spec.rows; ++r) {
      for (std::size_t c = 0; c < spec.cols; ++c) {
        const auto v = static_cast<NodeId>(r * spec.cols + c);
        if (c + 1 < spec.cols) add(v, v + 1);
        if (r + 1 < spec.rows) add(v, static_cast<NodeId>(v + spec.cols));
      }
    }
    break;
  case GeneratorSpec::Kind::tree:
    for (NodeId v = 1; v < n; ++v) add(static_cast<NodeId>(rng.below(v)), v);
    break;
  case GeneratorSpec::Kind::er:
  case GeneratorSpec::Kind::geometric: {
    for (int attempt = 0; attempt < 100; ++attempt) {
      edges.clear();
      if (spec.kind == GeneratorSpec::Kind::er) {
        for (NodeId u = 0; u < n; ++u)
          for (NodeId v = u + 1; v < n; ++v)
            if (rng.bernoulli(spec.param)) add(u, v);
      } else {
        std::vector<std::pair<double, double>> pts(n);
        for (auto &p : pts) p = {rng.uniform(), rng.uniform()};
        for (NodeId u = 0; u < n; ++u) {
          for (NodeId v = u + 1; v < n; ++v) {
            const double dx = pts[u].first - pts[v].first, dy = pts[u].second - pts[v].second;
            if (dx * dx + dy * dy <= spec.param * spec.param) add(u, v);
          }
        }
      }
      if (connected(n, edges)) return Graph::from_edges(n, std::move(edges), GraphOptions{});
    }
    throw Error(ErrorCode::disconnected, "generator " + to_string(spec) + " produced no connected graph in 100 attempts");
  }
  }
  return Graph::from_edges(n, std::move(edges), GraphOptions{});
}

Graph generate(std::string_view spec) { return generate(parse_generator_spec(spec)); }

Graph random_connected_graph(std::size_t n, double p, const WeightSpec &weights, std::uint64_t seed) {
  Rng rng(derive_seed(seed, {0x7ee, n}));
  std::vector<NodeId> perm(n);
  std::iota(perm.begin(), perm.end(), NodeId{0});
  for (std::size_t i = n; i > 1; --i) std::swap(perm[i - 1], perm[rng.below(i)]);
  std::vector<Edge> edges;
  std::vector<char> present;
  auto key = [n](NodeId u, NodeId v) { return std::min(u, v) * n + std::max(u, v); };
  present.assign(n * n, 0);
  for (std::size_t i = 1; i < n; ++i) {
    const NodeId u = perm[i], v = perm[rng.below(i)];
    present[key(u, v)] = 1;
    edges.push_back({u, v, draw_weight(weights, rng)});
  }
  for (NodeId u = 0; u < n; ++u) {
    for (NodeId v = u + 1; v < n; ++v) {
      if (present[key(u, v)] || !rng.bernoulli(p)) continue;
      edges.push_back({u, v, draw_weight(weights, rng)});
    }
  }
  return Graph::from_edges(n, std::move(edges), GraphOptions{});
}

} // namespace lddflow
