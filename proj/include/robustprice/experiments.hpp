#ifndef ROBUSTPRICE_EXPERIMENTS_HPP_
#define ROBUSTPRICE_EXPERIMENTS_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "robustprice/kmeans.hpp"
#include "robustprice/model.hpp"
#include "robustprice/profiles.hpp"
#include "robustprice/robust.hpp"

namespace robustprice {

// Everything a command needs. Loaded from JSON; every field has a default.
//
// `seed` drives both the corpus generator and k-means seeding, and replaces
// any seed given inside `corpus`. When `corpus_csv` is set the profiles are
// read from it instead of being generated.
struct RunConfig {
  CostModel cost;
  double rho = 0.5;
  double theta_max = 0.2;
  double theta_step = 0.005;
  std::vector<double> smoothness_thetas = {0.05, 0.1, 0.2, 0.5};
  std::size_t k = 30;  // from JSON: 24 when the corpus kind is commercial
  Metric kmeans_metric = Metric::kL1;
  std::size_t kmeans_max_iters = 300;
  CorpusSpec corpus = CorpusSpec::residential(7699, 42);
  std::optional<std::filesystem::path> corpus_csv;
  std::uint64_t seed = 42;
  std::filesystem::path out_dir = "out";
  // The aggregate load is rescaled so its peak slot equals this value
  // (0 keeps the raw aggregate).
  double system_peak_load = 1.1e6;
  std::vector<double> rho_grid;  // empty: 20 points 0.1, 0.2, ..., 2.0
  std::vector<double> a_grid;    // empty: {a/2, a, 2a}
  std::vector<std::size_t> sweep_sizes = {1000, 5000, 10000, 50000};
  std::size_t diversity_top = 2;
  std::size_t diversity_k = 4;

  // Throws ValidationError naming the offending field.
  void validate() const;
  std::vector<double> theta_grid() const;
  std::vector<double> effective_rho_grid() const;
  std::vector<double> effective_a_grid() const;
};

// Unknown keys are rejected. Throws ValidationError.
RunConfig run_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const RunConfig& config);
RunConfig load_run_config(const std::filesystem::path& path);

// FNV-1a of the canonical JSON form, excluding out_dir.
std::string config_hash(const RunConfig& config);

// The prepared inputs shared by every command.
struct Workload {
  Population population;
  std::vector<NormalizedProfile> profiles;
  SystemLoad load;
  PriceCurve prices;
  std::vector<double> user_mci;
  std::size_t rejected_rows = 0;
};

// Generates or ingests the corpus, rescales the aggregate and prices it.
Workload prepare_workload(const RunConfig& config);
Workload prepare_workload(const RunConfig& config, Population population);

Clustering baseline_clustering(const RunConfig& config, const Workload& workload,
                               KMeansTrace* trace = nullptr);

enum class ClusterMethod { kProfile, kSkc, kGkc };
ClusterMethod parse_cluster_method(const std::string& name);
std::string to_string(ClusterMethod method);

// Command outputs. Result artifacts go to out_dir; timings and timestamps go
// to out_dir/meta only, so result files are a pure function of the inputs.
struct CommandResult {
  std::vector<std::filesystem::path> artifacts;
  nlohmann::json summary;
};

CommandResult cmd_datagen(const RunConfig& config);
CommandResult cmd_price(const RunConfig& config);
CommandResult cmd_cluster(const RunConfig& config, ClusterMethod method);
CommandResult cmd_vulnerability(const RunConfig& config);
CommandResult cmd_sensitivity(const RunConfig& config);
CommandResult cmd_diversity(const RunConfig& config);

// Runs every command above into out_dir.
CommandResult run_all(const RunConfig& config);

}  // namespace robustprice

#endif  // ROBUSTPRICE_EXPERIMENTS_HPP_
