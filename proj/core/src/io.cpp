#include "lddflow/io.hpp"

#include <fstream>
#include <sstream>

namespace lddflow {

namespace {

template <typename Tag> nlohmann::json vector_to_json(const Vector<Tag> &v) {
  nlohmann::json out = nlohmann::json::array();
  for (double x : v) out.push_back(x);
  return out;
}

template <typename Tag> Vector<Tag> vector_from_json(const nlohmann::json &j, std::size_t size) {
  if (!j.is_array() || j.size() != size) {
    throw Error(ErrorCode::dimension_mismatch,
                "expected JSON array of length " + std::to_string(size));
  }
  Vector<Tag> out(size);
  for (std::size_t i = 0; i < size; ++i) out[i] = j[i].get<double>();
  return out;
}

} // namespace

nlohmann::json to_json(const NodeVector &v) { return vector_to_json(v); }
nlohmann::json to_json(const EdgeVector &v) { return vector_to_json(v); }

NodeVector node_vector_from_json(const nlohmann::json &j, std::size_t n) {
  return vector_from_json<NodeTag>(j, n);
}
EdgeVector edge_vector_from_json(const nlohmann::json &j, std::size_t m) {
  return vector_from_json<EdgeTag>(j, m);
}

Demand parse_demand(std::string_view text, std::size_t n) {
  Demand d(n);
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream fields(line);
    long long v = 0;
    double value = 0;
    if (!(fields >> v)) continue; // blank line
    if (!(fields >> value)) {
      throw Error(ErrorCode::parse, "demand line " + std::to_string(line_no) + ": expected \"v d_v\"");
    }
    if (v < 1 || static_cast<std::size_t>(v) > n) {
      throw Error(ErrorCode::node_out_of_range,
                  "demand line " + std::to_string(line_no) + ": node id out of range");
    }
    d[static_cast<std::size_t>(v - 1)] += value;
  }
  return d;
}

Demand load_demand(const std::string &path, std::size_t n) { return parse_demand(read_file(path), n); }

std::string read_file(const std::string &path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw Error(ErrorCode::io, "cannot open " + path);
  std::stringstream buffer;
  buffer << file.rdbuf();
  return buffer.str();
}

void write_file(const std::string &path, std::string_view contents) {
  std::ofstream file(path, std::ios::binary);
  if (!file) throw Error(ErrorCode::io, "cannot write " + path);
  file << contents;
}

} // namespace lddflow
