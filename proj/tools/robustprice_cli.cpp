// Command-line driver: corpus generation, pricing, clustering comparisons,
// vulnerability sweeps, sensitivity and diversity tables, and `verify`.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "robustprice/acceptance.hpp"
#include "robustprice/errors.hpp"
#include "robustprice/experiments.hpp"
#include "robustprice/serialize.hpp"

namespace rp = robustprice;

namespace {

constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;
constexpr int kExitAcceptance = 3;

struct Overrides {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<double> rho;
  std::optional<double> theta_max;
  std::optional<std::size_t> k;
  std::string corpus;
};

rp::RunConfig build_config(const Overrides& o) {
  rp::RunConfig c = o.config.empty() ? rp::RunConfig{} : rp::load_run_config(o.config);
  if (!o.out.empty()) c.out_dir = o.out;
  if (o.seed) {
    c.seed = *o.seed;
    c.corpus.seed = *o.seed;
  }
  if (o.rho) c.rho = *o.rho;
  if (o.theta_max) c.theta_max = *o.theta_max;
  if (o.k) c.k = *o.k;
  if (!o.corpus.empty()) c.corpus_csv = o.corpus;
  c.validate();
  return c;
}

void print_artifacts(const rp::CommandResult& r) {
  for (const auto& p : r.artifacts) std::cout << "wrote " << p.string() << "\n";
  if (!r.summary.empty()) std::cout << r.summary.dump() << "\n";
}

int run_verify(const rp::RunConfig& config) {
  rp::run_all(config);
  const auto outcomes = rp::run_acceptance(
      config, config.out_dir / "meta" / "verify_scratch",
      [](const rp::CriterionOutcome& o) { std::cout << rp::format_outcome(o) << std::endl; });
  auto report = nlohmann::json::array();
  bool all = true;
  for (const auto& o : outcomes) {
    all = all && o.passed;
    report.push_back({{"id", o.id},
                      {"name", o.name},
                      {"passed", o.passed},
                      {"detail", o.detail},
                      {"seconds", o.seconds}});
  }
  rp::write_json(config.out_dir / "meta" / "acceptance.json",
                 {{"config_hash", rp::config_hash(config)}, {"criteria", report}});
  std::cout << (all ? "all acceptance checks passed" : "acceptance checks failed") << "\n";
  return all ? 0 : kExitAcceptance;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Robust cluster-based electricity pricing experiments"};
  app.require_subcommand(1);
  Overrides o;
  std::string method = "gkc";
  app.add_option("--config", o.config, "JSON run configuration")->check(CLI::ExistingFile);
  app.add_option("--out", o.out, "Output directory (default: out)");
  app.add_option("--seed", o.seed, "Seed for corpus generation and k-means");
  app.add_option("--rho", o.rho, "Per-user tolerance between MCI and cluster price");
  app.add_option("--theta-max", o.theta_max, "Largest disguise effort in the theta sweep");
  app.add_option("--k", o.k, "Cluster count of the profile-based baseline");
  app.add_option("--corpus", o.corpus, "Read profiles from this CSV instead of generating");

  auto* datagen = app.add_subcommand("datagen", "Write the synthetic corpus to corpus.csv");
  auto* price = app.add_subcommand("price", "Write t, load, price to prices.csv");
  auto* cluster = app.add_subcommand("cluster", "Cluster users and write prices per user");
  cluster->add_option("--method", method, "profile, skc or gkc")
      ->check(CLI::IsMember({"profile", "skc", "gkc"}));
  auto* vuln = app.add_subcommand("vulnerability", "Strategic-user sweep and smoothness");
  auto* sens = app.add_subcommand("sensitivity", "Cluster count over rho and a");
  auto* div = app.add_subcommand("diversity", "Within-cluster diversity and sub-clusters");
  auto* verify = app.add_subcommand("verify", "Run every command, then the acceptance checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  try {
    const auto config = build_config(o);
    if (*datagen) print_artifacts(rp::cmd_datagen(config));
    if (*price) print_artifacts(rp::cmd_price(config));
    if (*cluster) print_artifacts(rp::cmd_cluster(config, rp::parse_cluster_method(method)));
    if (*vuln) print_artifacts(rp::cmd_vulnerability(config));
    if (*sens) print_artifacts(rp::cmd_sensitivity(config));
    if (*div) print_artifacts(rp::cmd_diversity(config));
    if (*verify) return run_verify(config);
    return 0;
  } catch (const rp::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}
