#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace igb::bench {

struct SelftestResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Quick invariant checks over every module; a few seconds on one core.
std::vector<SelftestResult> run_selftest();

// Prints one PASS/FAIL line per check; returns true when all passed.
bool print_selftest(const std::vector<SelftestResult>& results, std::ostream& out);

}  // namespace igb::bench
