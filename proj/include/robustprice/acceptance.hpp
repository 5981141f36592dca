#ifndef ROBUSTPRICE_ACCEPTANCE_HPP_
#define ROBUSTPRICE_ACCEPTANCE_HPP_

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "robustprice/experiments.hpp"

namespace robustprice {

struct CriterionOutcome {
  int id = 0;
  std::string name;
  bool passed = false;
  // Measured values, one line.
  std::string detail;
  double seconds = 0.0;
};

// Runs the acceptance checks. Corpus-based checks use `config` (its corpus,
// cost model, rho and seed); `scratch` receives the two artifact trees
// compared by the determinism check. `on_result` is called after each check.
std::vector<CriterionOutcome> run_acceptance(
    const RunConfig& config, const std::filesystem::path& scratch,
    const std::function<void(const CriterionOutcome&)>& on_result = {});

// "PASS [3] name: detail" / "FAIL [...]".
std::string format_outcome(const CriterionOutcome& outcome);

// Relative paths of all regular files under `dir` except meta/, sorted.
std::vector<std::filesystem::path> result_files(const std::filesystem::path& dir);

// True when both trees hold the same result files with identical bytes.
bool same_results(const std::filesystem::path& a, const std::filesystem::path& b,
                  std::string* first_difference = nullptr);

}  // namespace robustprice

#endif  // ROBUSTPRICE_ACCEPTANCE_HPP_
