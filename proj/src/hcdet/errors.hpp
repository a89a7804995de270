#pragma once

#include <stdexcept>
#include <string>

namespace hcdet {

enum class Errc {
  invalid_argument,
  parse,
  io,
  property_violation,  // matrix lacks S_c/S_r, or a pivot would need an interchange
  singular,
  infeasible,
  disconnected,  // graph surgery left a node without in/out arcs or split the graph
  cap_exceeded,
  stall,
  internal,
};

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace hcdet
