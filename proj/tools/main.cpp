#include <fstream>
#include <iostream>
#include <memory>

#include <CLI11.hpp>

#include "commands.hpp"
#include "lddflow/generators.hpp"
#include "lddflow/io.hpp"

namespace {

using namespace lddflow;
using namespace lddflow::cli;

constexpr int kExitCheckFailed = 3;
constexpr int kExitUsage = 64;
constexpr int kExitInternal = 70;

/// Module errors exit with 10 + their code, so every class is distinct.
int exit_code(ErrorCode code) { return 10 + static_cast<int>(code); }

void add_instance_options(CLI::App &cmd, RunConfig &config) {
  cmd.add_option("--input", config.inputs, "Edge-list file (repeatable)");
  cmd.add_option("--generate", config.generators, "Generator spec, e.g. er:50:0.2:w1-16:seed7 (repeatable)");
  cmd.add_option("--repeat", config.repeat, "Instances per generator spec, with consecutive seeds")
      ->check(CLI::PositiveNumber);
}

void add_run_options(CLI::App &cmd, RunConfig &config) {
  add_instance_options(cmd, config);
  cmd.add_option("--seed", config.seed, "Master seed; instance k of a batch uses seed + k");
  cmd.add_option("--rho", config.rho, "Level-1 LDD radius");
  cmd.add_option("--imax", config.i_max, "Number of routing levels");
  cmd.add_option("--g", config.g, "LDDs per level");
  cmd.add_flag("!--no-oracle", config.oracle, "Skip comparisons with exact solvers");
  cmd.add_option("--out", config.out, "Report file (default: stdout)");
  cmd.add_option("--format", config.format, "json or csv")
      ->transform(CLI::CheckedTransformer(std::map<std::string, Format>{{"json", Format::json}, {"csv", Format::csv}}));
  cmd.add_option("--trace-rounds", config.trace, "Write one JSON line per round to this file");
  cmd.add_flag("--timing", config.timing, "Add wall-clock seconds to reports (breaks byte-identical reruns)");
}

int run_generate(const RunConfig &config) {
  if (config.generators.size() != 1 || config.repeat != 1) {
    std::cerr << "error: generate takes exactly one --generate spec\n";
    return kExitUsage;
  }
  const std::string text = format_graph(generate(config.generators.front()));
  if (config.out.empty()) std::cout << text;
  else write_file(config.out, text);
  return 0;
}

int run_pipeline(const RunConfig &config) {
  const std::vector<Instance> instances = load_instances(config);
  if (instances.empty()) {
    std::cerr << "error: no instance given (use --input or --generate)\n";
    return kExitUsage;
  }
  std::unique_ptr<std::ofstream> trace;
  if (!config.trace.empty()) {
    trace = std::make_unique<std::ofstream>(config.trace);
    if (!*trace) throw Error(ErrorCode::io, "cannot open " + config.trace);
  }

  bool all_passed = true;
  std::vector<nlohmann::json> reports;
  for (std::size_t k = 0; k < instances.size(); ++k) {
    const std::uint64_t seed = config.seed + k;
    Report r;
    if (config.command == "sssp") r = cmd_sssp(config, instances[k], seed, trace.get());
    else if (config.command == "transship") r = cmd_transship(config, instances[k], seed, trace.get());
    else r = cmd_route_audit(config, instances[k], seed, trace.get());
    all_passed = all_passed && r.passed;
    reports.push_back(std::move(r.json));
  }

  std::string text;
  if (config.format == Format::csv) {
    const auto cols = csv_columns(config.command);
    for (std::size_t i = 0; i < cols.size(); ++i) text += (i ? "," : "") + cols[i];
    text += '\n';
    for (const auto &r : reports) text += csv_row(config.command, r) + '\n';
  } else {
    text = (reports.size() == 1 ? reports.front() : nlohmann::json(reports)).dump(2) + '\n';
  }
  if (config.out.empty()) std::cout << text;
  else write_file(config.out, text);
  return all_passed ? 0 : kExitCheckFailed;
}

} // namespace

int main(int argc, char **argv) {
  RunConfig config;
  CLI::App app{"Distributed transshipment and shortest paths on a simulated minor-aggregation network"};
  app.require_subcommand(1);

  auto *generate_cmd = app.add_subcommand("generate", "Write a generated graph as an edge list");
  generate_cmd->add_option("--generate", config.generators, "Generator spec")->required();
  generate_cmd->add_option("--out", config.out, "Output file (default: stdout)");

  auto *sssp_cmd = app.add_subcommand("sssp", "Approximate shortest-path tree");
  add_run_options(*sssp_cmd, config);
  sssp_cmd->add_option("--eps", config.eps, "Stretch bound 1+eps")->check(CLI::Range(0.0, 1.0));
  sssp_cmd->add_option("--source", config.source, "Source node (1-based)");

  auto *transship_cmd = app.add_subcommand("transship", "Approximate transshipment with a dual certificate");
  add_run_options(*transship_cmd, config);
  transship_cmd->add_option("--eps", config.eps, "Approximation 1+eps")->check(CLI::Range(0.0, 1.0));
  transship_cmd->add_option("--demand", config.demand, "Demand file (default: random integer demand)");

  auto *audit_cmd = app.add_subcommand("route-audit", "Exactness, adjointness, rounds and level potentials of the routing");
  add_run_options(*audit_cmd, config);
  audit_cmd->add_option("--demands", config.audit_demands, "Random demands to audit");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }
  config.command = app.get_subcommands().front()->get_name();
  if (config.command != "generate" && !(config.eps > 0 && config.eps < 1)) {
    std::cerr << "error: --eps must lie in (0, 1)\n";
    return kExitUsage;
  }

  try {
    return config.command == "generate" ? run_generate(config) : run_pipeline(config);
  } catch (const Error &e) {
    std::cerr << "error (" << to_string(e.code()) << "): " << e.what() << '\n';
    return exit_code(e.code());
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInternal;
  }
}
