#include "robustprice/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <numeric>
#include <sstream>

#include "robustprice/errors.hpp"
#include "robustprice/format.hpp"
#include "robustprice/serialize.hpp"
#include "robustprice/vulnerability.hpp"

namespace robustprice {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void require(bool ok, const std::string& message) {
  if (!ok) throw ValidationError(message);
}

bool finite_positive(double v) { return std::isfinite(v) && v > 0.0; }

std::string metric_name(Metric m) {
  return m == Metric::kL1 ? "l1" : "squared_euclidean";
}

Metric parse_metric(const std::string& name) {
  if (name == "l1") return Metric::kL1;
  if (name == "squared_euclidean") return Metric::kSquaredEuclidean;
  throw ValidationError("kmeans_metric must be 'l1' or 'squared_euclidean'");
}

// CSV text with a leading config hash comment.
class CsvText {
 public:
  explicit CsvText(const std::string& hash) { text_ = "# config_hash=" + hash + "\n"; }

  CsvText& header(std::initializer_list<std::string> cols) {
    std::string sep;
    for (const auto& c : cols) {
      text_ += sep + c;
      sep = ",";
    }
    return *this;
  }
  CsvText& col(const std::string& c) {
    text_ += "," + c;
    return *this;
  }
  CsvText& end_row() {
    text_ += "\n";
    first_ = true;
    return *this;
  }
  CsvText& cell(const std::string& v) {
    if (!first_) text_ += ",";
    text_ += v;
    first_ = false;
    return *this;
  }
  CsvText& cell(double v) { return cell(format_number(v)); }
  CsvText& cell(std::size_t v) { return cell(std::to_string(v)); }

  const std::string& str() const { return text_; }

 private:
  std::string text_;
  bool first_ = true;
};

std::filesystem::path prepare_out(const RunConfig& config) {
  std::filesystem::create_directories(config.out_dir / "meta");
  return config.out_dir;
}

void write_meta(const RunConfig& config, const std::string& name, nlohmann::json meta) {
  meta["config_hash"] = config_hash(config);
  meta["seed"] = config.seed;
  meta["finished_at"] = utc_timestamp();
  write_json(config.out_dir / "meta" / (name + ".json"), meta);
}

MciTable named_table(const Workload& w) {
  std::vector<std::string> ids;
  ids.reserve(w.profiles.size());
  for (const auto& p : w.profiles) ids.push_back(p.user_id);
  return MciTable(std::move(ids), w.user_mci);
}

std::string rates_csv(const std::string& hash, const Clustering& clustering,
                      std::span<const double> user_mci) {
  CsvText csv(hash);
  csv.header({"user_id", "cluster", "mci", "price"}).end_row();
  for (std::size_t i = 0; i < clustering.size(); ++i) {
    const std::size_t c = clustering.assignments[i];
    csv.cell(clustering.user_ids[i]).cell(c).cell(user_mci[i]).cell(clustering.prices[c]).end_row();
  }
  return csv.str();
}

std::string sweep_csv(const std::string& hash, const Clustering& clustering,
                      std::span<const DisguiseReport> reports,
                      const std::vector<double>& thetas) {
  CsvText csv(hash);
  csv.header({"theta", "percentage", "total"});
  for (std::size_t j = 0; j < clustering.k; ++j) csv.col("n_" + std::to_string(j));
  csv.end_row();
  for (double theta : thetas) {
    const auto counts = count_disguisers(clustering, reports, theta);
    csv.cell(theta).cell(counts.percentage).cell(counts.total);
    for (std::size_t n : counts.per_cluster) csv.cell(n);
    csv.end_row();
  }
  return csv.str();
}

nlohmann::json smoothness_json(const Clustering& clustering,
                               std::span<const DisguiseReport> reports, double theta,
                               double bound) {
  const auto r = measure_smoothness(clustering, reports, theta, bound);
  double max_benefit = 0.0;
  for (const auto& rep : reports) {
    for (const auto& [target, mu] : rep.mu_per_target) {
      if (mu <= theta) {
        max_benefit = std::max(max_benefit, clustering.prices[rep.own_cluster] -
                                                clustering.prices[target]);
      }
    }
  }
  return {{"delta_observed", json_number(r.delta_observed)},
          {"max_benefit", json_number(max_benefit)},
          {"reachable_pairs", r.reachable_pairs},
          {"pairs_over_bound", r.violations.size()},
          {"within_bound", r.violations.empty()}};
}

}  // namespace

void RunConfig::validate() const {
  cost.validate();
  require(finite_positive(rho), "rho must be finite and > 0");
  require(theta_max >= 0.0 && theta_max < 1.0, "theta_max must lie in [0, 1)");
  require(finite_positive(theta_step), "theta_step must be finite and > 0");
  for (double t : smoothness_thetas) {
    require(t >= 0.0 && t < 1.0, "smoothness_thetas entries must lie in [0, 1)");
  }
  require(k >= 1, "k must be >= 1");
  require(kmeans_max_iters >= 1, "kmeans_max_iters must be >= 1");
  if (!corpus_csv) corpus.validate();
  require(std::isfinite(system_peak_load) && system_peak_load >= 0.0,
          "system_peak_load must be finite and >= 0");
  for (double r : rho_grid) require(finite_positive(r), "rho_grid entries must be > 0");
  for (double a : a_grid) require(finite_positive(a), "a_grid entries must be > 0");
  require(!sweep_sizes.empty(), "sweep_sizes must not be empty");
  for (std::size_t n : sweep_sizes) require(n >= 1, "sweep_sizes entries must be >= 1");
  require(diversity_k >= 1, "diversity_k must be >= 1");
}

std::vector<double> RunConfig::theta_grid() const {
  std::vector<double> out;
  const auto steps = static_cast<std::size_t>(std::floor(theta_max / theta_step + 1e-9));
  for (std::size_t i = 0; i <= steps; ++i) out.push_back(static_cast<double>(i) * theta_step);
  return out;
}

std::vector<double> RunConfig::effective_rho_grid() const {
  if (!rho_grid.empty()) return rho_grid;
  std::vector<double> out;
  for (int i = 1; i <= 20; ++i) out.push_back(0.1 * i);
  return out;
}

std::vector<double> RunConfig::effective_a_grid() const {
  if (!a_grid.empty()) return a_grid;
  return {0.5 * cost.a, cost.a, 2.0 * cost.a};
}

RunConfig run_config_from_json(const nlohmann::json& j) {
  require(j.is_object(), "config must be a JSON object");
  static const char* kKeys[] = {
      "cost",        "rho",           "theta_max",        "theta_step",
      "smoothness_thetas", "k",       "kmeans_metric",    "kmeans_max_iters",
      "corpus",      "corpus_csv",    "seed",             "out_dir",
      "system_peak_load", "rho_grid", "a_grid",           "sweep_sizes",
      "diversity_top", "diversity_k"};
  for (const auto& [key, _] : j.items()) {
    bool known = false;
    for (const char* k : kKeys) known = known || key == k;
    require(known, "unknown config key '" + key + "'");
  }
  RunConfig c;
  try {
    if (j.contains("cost")) {
      const auto& cost = j.at("cost");
      require(cost.is_object(), "cost must be an object with a, b, c");
      for (const auto& [key, _] : cost.items()) {
        require(key == "a" || key == "b" || key == "c", "unknown cost key '" + key + "'");
      }
      c.cost.a = cost.value("a", c.cost.a);
      c.cost.b = cost.value("b", c.cost.b);
      c.cost.c = cost.value("c", c.cost.c);
    }
    c.rho = j.value("rho", c.rho);
    c.theta_max = j.value("theta_max", c.theta_max);
    c.theta_step = j.value("theta_step", c.theta_step);
    c.smoothness_thetas = j.value("smoothness_thetas", c.smoothness_thetas);
    c.kmeans_metric = parse_metric(j.value("kmeans_metric", metric_name(c.kmeans_metric)));
    const auto iters = j.value("kmeans_max_iters", std::int64_t{300});
    require(iters >= 1, "kmeans_max_iters must be >= 1");
    c.kmeans_max_iters = static_cast<std::size_t>(iters);
    c.seed = j.value("seed", c.seed);
    if (j.contains("corpus")) c.corpus = corpus_spec_from_json(j.at("corpus"));
    c.corpus.seed = c.seed;
    // Default k follows the corpus kind: 30 residential, 24 commercial.
    const std::int64_t default_k = c.corpus.kind == CorpusKind::kCommercial ? 24 : 30;
    const auto k = j.value("k", default_k);
    require(k >= 1, "k must be >= 1");
    c.k = static_cast<std::size_t>(k);
    if (j.contains("corpus_csv") && !j.at("corpus_csv").is_null()) {
      c.corpus_csv = j.at("corpus_csv").get<std::string>();
    }
    c.out_dir = j.value("out_dir", c.out_dir.string());
    c.system_peak_load = j.value("system_peak_load", c.system_peak_load);
    c.rho_grid = j.value("rho_grid", c.rho_grid);
    c.a_grid = j.value("a_grid", c.a_grid);
    if (j.contains("sweep_sizes")) {
      c.sweep_sizes.clear();
      for (const auto& n : j.at("sweep_sizes")) {
        const auto v = n.get<std::int64_t>();
        require(v >= 1, "sweep_sizes entries must be >= 1");
        c.sweep_sizes.push_back(static_cast<std::size_t>(v));
      }
    }
    const auto top = j.value("diversity_top", std::int64_t{2});
    require(top >= 0, "diversity_top must be >= 0");
    c.diversity_top = static_cast<std::size_t>(top);
    const auto dk = j.value("diversity_k", std::int64_t{4});
    require(dk >= 1, "diversity_k must be >= 1");
    c.diversity_k = static_cast<std::size_t>(dk);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

nlohmann::json to_json(const RunConfig& c) {
  auto numbers = [](const std::vector<double>& v) {
    auto arr = nlohmann::json::array();
    for (double x : v) arr.push_back(json_number(x));
    return arr;
  };
  nlohmann::json j;
  j["cost"] = {{"a", json_number(c.cost.a)},
               {"b", json_number(c.cost.b)},
               {"c", json_number(c.cost.c)}};
  j["rho"] = json_number(c.rho);
  j["theta_max"] = json_number(c.theta_max);
  j["theta_step"] = json_number(c.theta_step);
  j["smoothness_thetas"] = numbers(c.smoothness_thetas);
  j["k"] = c.k;
  j["kmeans_metric"] = metric_name(c.kmeans_metric);
  j["kmeans_max_iters"] = c.kmeans_max_iters;
  j["corpus"] = to_json(c.corpus);
  j["corpus_csv"] = c.corpus_csv ? nlohmann::json(c.corpus_csv->string()) : nullptr;
  j["seed"] = c.seed;
  j["out_dir"] = c.out_dir.string();
  j["system_peak_load"] = json_number(c.system_peak_load);
  j["rho_grid"] = numbers(c.rho_grid);
  j["a_grid"] = numbers(c.a_grid);
  j["sweep_sizes"] = c.sweep_sizes;
  j["diversity_top"] = c.diversity_top;
  j["diversity_k"] = c.diversity_k;
  return j;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  const std::string text = read_text(path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
  return run_config_from_json(j);
}

std::string config_hash(const RunConfig& config) {
  auto j = to_json(config);
  j.erase("out_dir");
  return fnv1a_hex(j.dump());
}

Workload prepare_workload(const RunConfig& config) {
  config.validate();
  if (config.corpus_csv) {
    auto ingested = ingest_csv(*config.corpus_csv);
    auto w = prepare_workload(config, std::move(ingested.population));
    w.rejected_rows = ingested.rejected_rows + ingested.zero_rows;
    if (w.rejected_rows > 0) {
      warn("dropped " + std::to_string(w.rejected_rows) + " rows from " +
           config.corpus_csv->string());
    }
    return w;
  }
  auto spec = config.corpus;
  spec.seed = config.seed;
  return prepare_workload(config, generate_corpus(spec));
}

Workload prepare_workload(const RunConfig& config, Population population) {
  if (population.empty()) throw EmptyPopulation();
  Workload w;
  w.population = std::move(population);
  w.profiles = normalize_all(w.population);
  w.load = aggregate(w.population);
  if (config.system_peak_load > 0.0) w.load = scale_to_peak(w.load, config.system_peak_load);
  w.prices = price_curve(config.cost, w.load);
  w.user_mci.reserve(w.profiles.size());
  for (const auto& p : w.profiles) w.user_mci.push_back(weighted_price(w.prices, p.weights));
  return w;
}

Clustering baseline_clustering(const RunConfig& config, const Workload& workload,
                               KMeansTrace* trace) {
  KMeansOptions opts;
  opts.k = config.k;
  opts.seed = config.seed;
  opts.max_iters = config.kmeans_max_iters;
  opts.metric = config.kmeans_metric;
  return kmeans_profiles(workload.profiles, workload.prices, opts, trace);
}

ClusterMethod parse_cluster_method(const std::string& name) {
  if (name == "profile") return ClusterMethod::kProfile;
  if (name == "skc") return ClusterMethod::kSkc;
  if (name == "gkc") return ClusterMethod::kGkc;
  throw ValidationError("method must be one of profile, skc, gkc");
}

std::string to_string(ClusterMethod method) {
  switch (method) {
    case ClusterMethod::kProfile:
      return "profile";
    case ClusterMethod::kSkc:
      return "skc";
    case ClusterMethod::kGkc:
      return "gkc";
  }
  return "?";
}

CommandResult cmd_datagen(const RunConfig& config) {
  config.validate();
  const auto out = prepare_out(config);
  const auto start = Clock::now();
  Population pop;
  if (config.corpus_csv) {
    pop = ingest_csv(*config.corpus_csv).population;
  } else {
    auto spec = config.corpus;
    spec.seed = config.seed;
    pop = generate_corpus(spec);
  }
  const auto path = out / "corpus.csv";
  write_csv(pop, path, "config_hash=" + config_hash(config));
  CommandResult r;
  r.artifacts = {path};
  r.summary = {{"users", pop.size()}, {"horizon", pop.horizon()}};
  write_meta(config, "datagen", {{"command", "datagen"}, {"wall_ms", elapsed_ms(start)},
                                 {"summary", r.summary}});
  return r;
}

CommandResult cmd_price(const RunConfig& config) {
  const auto out = prepare_out(config);
  const auto start = Clock::now();
  const auto w = prepare_workload(config);
  CsvText csv(config_hash(config));
  csv.header({"t", "load", "price"}).end_row();
  for (std::size_t t = 0; t < w.load.horizon(); ++t) {
    csv.cell(t).cell(w.load[t]).cell(w.prices[t]).end_row();
  }
  const auto path = out / "prices.csv";
  write_text(path, csv.str());
  CommandResult r;
  r.artifacts = {path};
  r.summary = {{"min_price", json_number(w.prices.min())},
               {"max_price", json_number(w.prices.max())}};
  write_meta(config, "price", {{"command", "price"}, {"wall_ms", elapsed_ms(start)},
                               {"summary", r.summary}});
  return r;
}

CommandResult cmd_cluster(const RunConfig& config, ClusterMethod method) {
  const auto out = prepare_out(config);
  const auto w = prepare_workload(config);
  const std::string hash = config_hash(config);
  const std::string name = to_string(method);
  nlohmann::json body;
  nlohmann::json meta = {{"command", "cluster"}, {"method", name}};
  Clustering view;
  if (method == ClusterMethod::kProfile) {
    const auto start = Clock::now();
    view = baseline_clustering(config, w);
    meta["wall_ms"] = elapsed_ms(start);
    body = to_json(view);
  } else {
    const auto table = named_table(w);
    RobustClustering rc;
    if (method == ClusterMethod::kGkc) {
      const auto start = Clock::now();
      rc = gkc(MciTable::from_values(w.user_mci), config.rho);
      meta["wall_ms"] = elapsed_ms(start);
    } else {
      const auto base_start = Clock::now();
      const auto base = baseline_clustering(config, w);
      meta["base_clustering_ms"] = elapsed_ms(base_start);
      const auto start = Clock::now();
      rc = skc(w.user_mci, config.rho, base);
      meta["wall_ms"] = elapsed_ms(start);
    }
    const auto check = criterion_check(rc, table, config.rho);
    body = to_json(rc, table);
    body["criterion_passed"] = check.passed;
    body["worst_gap"] = json_number(check.worst_gap);
    view = to_clustering(rc, w.profiles, w.prices);
  }
  body["config_hash"] = hash;
  body["method"] = name;
  const auto json_path = out / ("clustering_" + name + ".json");
  const auto csv_path = out / ("rates_" + name + ".csv");
  write_json(json_path, body);
  write_text(csv_path, rates_csv(hash, view, w.user_mci));
  CommandResult r;
  r.artifacts = {json_path, csv_path};
  r.summary = {{"method", name}, {"clusters", view.k}};
  meta["clusters"] = view.k;
  write_meta(config, "cluster_" + name, meta);
  return r;
}

CommandResult cmd_vulnerability(const RunConfig& config) {
  const auto out = prepare_out(config);
  const auto start = Clock::now();
  const auto w = prepare_workload(config);
  const std::string hash = config_hash(config);
  const auto thetas = config.theta_grid();

  const auto base = baseline_clustering(config, w);
  const auto base_reports = disguise_reports(base, w.profiles, config.theta_max);

  const auto rc = gkc(MciTable::from_values(w.user_mci), config.rho);
  const auto robust_view = to_clustering(rc, w.profiles, w.prices);
  const auto robust_reports = disguise_reports(robust_view, w.profiles, config.theta_max,
                                               PriceSwitch{config.rho, w.user_mci});
  const auto robust_geometric = disguise_reports(robust_view, w.profiles, config.theta_max);

  const auto profile_csv = out / "vulnerability_profile.csv";
  const auto gkc_csv = out / "vulnerability_gkc.csv";
  write_text(profile_csv, sweep_csv(hash, base, base_reports, thetas));
  write_text(gkc_csv, sweep_csv(hash, robust_view, robust_reports, thetas));

  auto disguise = to_json(base_reports);
  const auto disguise_path = out / "disguise_profile.json";
  write_json(disguise_path, {{"config_hash", hash}, {"theta", json_number(config.theta_max)},
                             {"users", disguise}});

  auto entries = nlohmann::json::array();
  bool robust_within = true;
  for (double theta : config.smoothness_thetas) {
    const double bound = smoothness_bound(config.rho, theta);
    auto robust = smoothness_json(robust_view, robust_reports, theta, bound);
    robust_within = robust_within && robust["within_bound"].get<bool>();
    entries.push_back({{"theta", json_number(theta)},
                       {"bound", json_number(bound)},
                       {"profile", smoothness_json(base, base_reports, theta, bound)},
                       {"gkc", robust},
                       {"gkc_profile_rule", smoothness_json(robust_view, robust_geometric,
                                                            theta, bound)}});
  }
  const auto smooth_path = out / "smoothness.json";
  write_json(smooth_path, {{"config_hash", hash}, {"rho", json_number(config.rho)},
                           {"entries", entries}});

  CommandResult r;
  r.artifacts = {profile_csv, gkc_csv, disguise_path, smooth_path};
  r.summary = {{"profile_clusters", base.k},
               {"gkc_clusters", rc.size()},
               {"gkc_within_bound", robust_within}};
  write_meta(config, "vulnerability", {{"command", "vulnerability"},
                                       {"wall_ms", elapsed_ms(start)},
                                       {"summary", r.summary}});
  return r;
}

CommandResult cmd_sensitivity(const RunConfig& config) {
  const auto out = prepare_out(config);
  const auto start = Clock::now();
  const auto w = prepare_workload(config);
  CsvText csv(config_hash(config));
  csv.header({"rho", "a", "kappa"}).end_row();
  for (double a : config.effective_a_grid()) {
    CostModel cost = config.cost;
    cost.a = a;
    const auto prices = price_curve(cost, w.load);
    std::vector<double> mci(w.profiles.size());
    for (std::size_t i = 0; i < mci.size(); ++i) {
      mci[i] = weighted_price(prices, w.profiles[i].weights);
    }
    const auto table = MciTable::from_values(mci);
    for (double rho : config.effective_rho_grid()) {
      csv.cell(rho).cell(a).cell(gkc(table, rho).size()).end_row();
    }
  }
  const auto path = out / "sensitivity.csv";
  write_text(path, csv.str());
  CommandResult r;
  r.artifacts = {path};
  r.summary = nlohmann::json::object();
  write_meta(config, "sensitivity", {{"command", "sensitivity"}, {"wall_ms", elapsed_ms(start)}});
  return r;
}

CommandResult cmd_diversity(const RunConfig& config) {
  const auto out = prepare_out(config);
  const auto start = Clock::now();
  const auto w = prepare_workload(config);
  const std::string hash = config_hash(config);
  const auto rc = gkc(MciTable::from_values(w.user_mci), config.rho);
  const auto view = to_clustering(rc, w.profiles, w.prices);
  const auto sig = sigma(view, w.profiles);

  CsvText csv(hash);
  csv.header({"cluster", "size", "min_mci", "max_mci", "price", "sigma"}).end_row();
  for (std::size_t c = 0; c < rc.size(); ++c) {
    const auto& pc = rc.clusters[c];
    csv.cell(c).cell(pc.members.size()).cell(pc.min_mci).cell(pc.max_mci).cell(pc.price)
        .cell(sig[c]).end_row();
  }
  const auto csv_path = out / "diversity.csv";
  write_text(csv_path, csv.str());

  std::vector<std::size_t> order(rc.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return sig[x] > sig[y]; });
  auto subs = nlohmann::json::array();
  for (std::size_t c : order) {
    if (subs.size() >= config.diversity_top) break;
    const auto& members = rc.clusters[c].members;
    std::vector<NormalizedProfile> group;
    group.reserve(members.size());
    for (std::size_t u : members) group.push_back(w.profiles[u]);
    KMeansOptions opts;
    opts.k = std::min(config.diversity_k, group.size());
    opts.seed = config.seed;
    opts.max_iters = config.kmeans_max_iters;
    opts.metric = config.kmeans_metric;
    const auto sub = kmeans_profiles(group, w.prices, opts);
    subs.push_back({{"cluster", c}, {"sigma", json_number(sig[c])}, {"sub_clustering", to_json(sub)}});
  }
  const auto json_path = out / "diversity_subclusters.json";
  write_json(json_path, {{"config_hash", hash}, {"clusters", subs}});

  CommandResult r;
  r.artifacts = {csv_path, json_path};
  r.summary = {{"clusters", rc.size()}};
  write_meta(config, "diversity", {{"command", "diversity"}, {"wall_ms", elapsed_ms(start)}});
  return r;
}

CommandResult run_all(const RunConfig& config) {
  CommandResult all;
  auto add = [&](CommandResult r, const char* name) {
    all.artifacts.insert(all.artifacts.end(), r.artifacts.begin(), r.artifacts.end());
    all.summary[name] = std::move(r.summary);
  };
  add(cmd_datagen(config), "datagen");
  add(cmd_price(config), "price");
  add(cmd_cluster(config, ClusterMethod::kProfile), "cluster_profile");
  add(cmd_cluster(config, ClusterMethod::kSkc), "cluster_skc");
  add(cmd_cluster(config, ClusterMethod::kGkc), "cluster_gkc");
  add(cmd_vulnerability(config), "vulnerability");
  add(cmd_sensitivity(config), "sensitivity");
  add(cmd_diversity(config), "diversity");
  return all;
}

}  // namespace robustprice
