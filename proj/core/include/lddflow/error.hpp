#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace lddflow {

enum class ErrorCode {
  parse = 1,
  disconnected,
  weight_out_of_range,
  duplicate_edge,
  self_loop,
  node_out_of_range,
  dimension_mismatch,
  invalid_argument,
  improper_demand,
  iteration_cap,
  depth_cap,
  not_a_forest,
  not_functional,
  payload_budget,
  non_associative,
  io,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string &what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const { return code_; }

private:
  ErrorCode code_;
};

} // namespace lddflow
