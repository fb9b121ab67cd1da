#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace twistlab {

// Base class for everything thrown by this library.
struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Profile input rejected: non-positive bending curvature on its stated
// interval, support leaking outside it, malformed bump parameters.
struct InvalidProfileError : Error {
  using Error::Error;
};

// Grid too coarse or degenerate: no interior nodes, disconnected node graph,
// near-degenerate transverse ground state.
struct DiscretizationError : Error {
  using Error::Error;
};

// Tube fails the immersion condition (h <= 0 at some sampled point).
struct ImmersionError : Error {
  using Error::Error;
};

// Scenario-level inconsistency, e.g. coefficient support touching the
// truncation boundary, or an unparsable config file.
struct ConfigError : Error {
  using Error::Error;
};

// Iterative eigensolver stopped before reaching the requested residual.
struct SolverError : Error {
  SolverError(const std::string& what, std::vector<double> history)
      : Error(what), residual_history(std::move(history)) {}
  std::vector<double> residual_history;
};

}  // namespace twistlab
