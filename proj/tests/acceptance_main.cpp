// Runs every acceptance check on the default configuration and prints one
// PASS/FAIL line per check. Exits non-zero if any check fails.

#include <filesystem>
#include <iostream>

#include "robustprice/acceptance.hpp"
#include "robustprice/errors.hpp"

int main() {
  namespace rp = robustprice;
  rp::set_warning_handler([](std::string_view) {});
  const auto scratch = std::filesystem::temp_directory_path() / "robustprice_acceptance";
  rp::RunConfig config;
  config.out_dir = scratch / "out";
  bool all = true;
  rp::run_acceptance(config, scratch / "determinism", [&](const rp::CriterionOutcome& o) {
    all = all && o.passed;
    std::cout << rp::format_outcome(o) << std::endl;
  });
  std::cout << (all ? "acceptance: all checks passed" : "acceptance: FAILED") << std::endl;
  return all ? 0 : 1;
}
