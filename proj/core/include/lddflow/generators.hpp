#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "lddflow/graph.hpp"

namespace lddflow {

/// Edge weight distribution of a generated graph.
struct WeightSpec {
  enum class Kind { unit, uniform_int, log_uniform } kind = Kind::unit;
  double lo = 1.0;
  double hi = 1.0;
};

/// Parsed generator description such as "er:50:0.2:w1-16:seed7".
///
///   path:<n>:<weights>             grid:<r>x<c>:<weights>
///   er:<n>:<p>:<weights>           geometric:<n>:<radius>:<weights>
///   tree:<n>:<weights>
///
/// Weights are "unit", "w<lo>-<hi>" (uniform integers) or "lw<lo>-<hi>"
/// (log-uniform reals). A trailing ":seed<k>" sets the seed (default 1).
struct GeneratorSpec {
  enum class Kind { path, grid, er, geometric, tree } kind = Kind::path;
  std::size_t n = 1;
  std::size_t rows = 1, cols = 1;
  double param = 0.0; // edge probability or connection radius
  WeightSpec weights;
  std::uint64_t seed = 1;
};

GeneratorSpec parse_generator_spec(std::string_view text);
std::string to_string(const GeneratorSpec &spec);

/// Deterministic for a given spec. Random families are redrawn (up to 100
/// attempts) until connected.
Graph generate(const GeneratorSpec &spec);
Graph generate(std::string_view spec);

/// Connected Erdos-Renyi graph with the given weight distribution; a random
/// spanning tree is added if the draw alone is disconnected after 100 tries.
Graph random_connected_graph(std::size_t n, double p, const WeightSpec &weights, std::uint64_t seed);

} // namespace lddflow
