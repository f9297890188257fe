#pragma once

// Randomized invariant checks shared by the oracle-check command.

#include <cstdint>
#include <string>
#include <vector>

namespace pdc {

struct ConformanceCheck {
  std::string name;
  double max_error;
  double tolerance;
  [[nodiscard]] bool pass() const { return max_error <= tolerance; }
};

/// Run every closed-form-versus-oracle invariant over `draws` random setups.
std::vector<ConformanceCheck> run_conformance(std::size_t draws, std::uint64_t seed, std::size_t n_grid = 100000);

}  // namespace pdc
