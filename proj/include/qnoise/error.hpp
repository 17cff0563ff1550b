#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace qnoise {

enum class ErrorKind {
  invalid_argument,
  config,
  grid_too_small,
  truncation,
  solver_failure,
  not_settled,
  boundary_contamination,
  not_settled_input,
  mismatched_grid,
  mismatched_time,
  negative_probability,
  invalid_probability,
  no_resonance_found,
  nonpositive_energy,
  out_of_arcsin_domain,
  unknown_observable,
  io,
};

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_argument: return "invalid-argument";
    case ErrorKind::config: return "config-error";
    case ErrorKind::grid_too_small: return "grid-too-small";
    case ErrorKind::truncation: return "truncation-error";
    case ErrorKind::solver_failure: return "solver-failure";
    case ErrorKind::not_settled: return "not-settled";
    case ErrorKind::boundary_contamination: return "boundary-contamination";
    case ErrorKind::not_settled_input: return "not-settled-input";
    case ErrorKind::mismatched_grid: return "mismatched-grid";
    case ErrorKind::mismatched_time: return "mismatched-time";
    case ErrorKind::negative_probability: return "negative-probability";
    case ErrorKind::invalid_probability: return "invalid-probability";
    case ErrorKind::no_resonance_found: return "no-resonance-found";
    case ErrorKind::nonpositive_energy: return "nonpositive-energy";
    case ErrorKind::out_of_arcsin_domain: return "out-of-arcsin-domain";
    case ErrorKind::unknown_observable: return "unknown-observable";
    case ErrorKind::io: return "io-error";
  }
  return "unknown";
}

// Configuration-type failures map to CLI exit code 2, everything else to 3.
constexpr bool is_config_error(ErrorKind kind) {
  return kind == ErrorKind::config || kind == ErrorKind::invalid_argument ||
         kind == ErrorKind::unknown_observable || kind == ErrorKind::io;
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind), message_(what) {}

  ErrorKind kind() const noexcept { return kind_; }
  // message without the kind prefix
  const std::string& message() const noexcept { return message_; }

 private:
  ErrorKind kind_;
  std::string message_;
};

inline void require(bool condition, ErrorKind kind, const std::string& what) {
  if (!condition) throw Error(kind, what);
}

}  // namespace qnoise
