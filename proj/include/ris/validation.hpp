#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace ris {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Quick self-check of the analysis formulas and solver invariants on a few
/// seeded instances. Used by `ris_sim validate`.
std::vector<CheckResult> run_validation(std::uint64_t seed);

}  // namespace ris
