#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cartan/io.hpp"

namespace cartan {

struct CheckLine {
  std::string label;
  double value = 0.0;
  double bound = 0.0;
  bool at_most = true;  // value <= bound, otherwise value >= bound
  bool pass = false;
};

struct SuiteResult {
  std::string name;
  std::string title;
  std::vector<CheckLine> checks;
  std::string error;  // set when the suite threw
  bool pass = false;
};

/// Suite names in sorted order.
std::vector<std::string> suite_names();

/// Throws InvalidArgument for an unknown name.
SuiteResult run_suite(const std::string& name, std::uint64_t seed);

/// Runs the suites concurrently; results come back in the order of `names`.
std::vector<SuiteResult> run_suites(const std::vector<std::string>& names, std::uint64_t seed);

Json suite_to_json(const SuiteResult& result);

}  // namespace cartan
