#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lddflow/graph.hpp"

namespace lddflow::cli {

enum class Format { json, csv };

struct RunConfig {
  std::string command;
  std::vector<std::string> inputs;     // edge-list files
  std::vector<std::string> generators; // generator specs
  unsigned repeat = 1;                 // copies of each generator spec with seeds k, k+1, ...
  double eps = 0.1;
  std::uint64_t seed = 1;
  std::optional<double> rho;
  std::optional<unsigned> i_max;
  std::optional<unsigned> g;
  bool oracle = true;
  std::string out;                     // empty: stdout
  Format format = Format::json;
  std::string trace;                   // round trace file, empty: off
  unsigned source = 1;                 // 1-based
  std::string demand;                  // demand file for transship
  unsigned audit_demands = 3;
  bool timing = false;
};

struct Instance {
  std::string name;
  Graph graph;
};

std::vector<Instance> load_instances(const RunConfig &config);

/// One report per instance. `passed` is cleared when a requested check fails.
struct Report {
  nlohmann::json json;
  bool passed = true;
};

Report cmd_sssp(const RunConfig &config, const Instance &instance, std::uint64_t seed, std::ostream *trace);
Report cmd_transship(const RunConfig &config, const Instance &instance, std::uint64_t seed, std::ostream *trace);
Report cmd_route_audit(const RunConfig &config, const Instance &instance, std::uint64_t seed, std::ostream *trace);

/// Scalar columns of a report, in a fixed order per command.
std::vector<std::string> csv_columns(const std::string &command);
std::string csv_row(const std::string &command, const nlohmann::json &report);

} // namespace lddflow::cli
