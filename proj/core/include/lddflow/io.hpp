#pragma once

#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "lddflow/graph.hpp"

namespace lddflow {

/// Vectors serialize as plain JSON arrays; position i holds the value of
/// node (or edge) id i, which is id i+1 in the 1-based text formats.
nlohmann::json to_json(const NodeVector &v);
nlohmann::json to_json(const EdgeVector &v);
NodeVector node_vector_from_json(const nlohmann::json &j, std::size_t n);
EdgeVector edge_vector_from_json(const nlohmann::json &j, std::size_t m);

/// Demand file: one "v d_v" per line with 1-based v; unlisted nodes get 0.
Demand parse_demand(std::string_view text, std::size_t n);
Demand load_demand(const std::string &path, std::size_t n);

std::string read_file(const std::string &path);
void write_file(const std::string &path, std::string_view contents);

} // namespace lddflow
