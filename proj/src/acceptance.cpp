#include "robustprice/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iterator>
#include <sstream>

#include "robustprice/errors.hpp"
#include "robustprice/format.hpp"
#include "robustprice/random.hpp"
#include "robustprice/vulnerability.hpp"

namespace robustprice {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

template <typename F>
double median_seconds(std::size_t repeats, F&& f) {
  std::vector<double> t;
  for (std::size_t r = 0; r < repeats; ++r) {
    const auto start = Clock::now();
    f();
    t.push_back(seconds_since(start));
  }
  std::sort(t.begin(), t.end());
  return t[t.size() / 2];
}

template <typename F>
double min_seconds(std::size_t repeats, F&& f) {
  double best = 0.0;
  for (std::size_t r = 0; r < repeats; ++r) {
    const auto start = Clock::now();
    f();
    const double s = seconds_since(start);
    best = r == 0 ? s : std::min(best, s);
  }
  return best;
}

std::string num(double v) { return format_number(v); }

std::string list(const std::vector<std::size_t>& v) {
  std::string s = "{";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s + "}";
}

std::vector<double> random_simplex(Rng& rng, std::size_t t) {
  std::vector<double> v(t);
  double sum = 0.0;
  for (auto& x : v) {
    x = rng.gamma(1.0);
    sum += x;
  }
  for (auto& x : v) x /= sum;
  return v;
}

RunConfig sized(const RunConfig& config, std::size_t n) {
  RunConfig c = config;
  c.corpus.n_users = n;
  c.corpus_csv.reset();
  return c;
}

CriterionOutcome billing_identity(const RunConfig& config) {
  CriterionOutcome o{1, "billing identity", false, "", 0.0};
  Rng rng(config.seed + 1);
  const auto start = Clock::now();
  double worst = 0.0;
  for (int trial = 0; trial < 10000; ++trial) {
    const std::size_t t = 24;
    std::vector<double> p(t);
    std::vector<double> l(t);
    for (auto& x : p) x = -20.0 + 120.0 * rng.uniform();
    for (auto& x : l) x = rng.uniform() < 0.1 ? 0.0 : 5.0 * rng.uniform();
    l[rng.index(t)] += 1.0;
    const PriceCurve curve(p);
    long double bill = 0.0L;
    long double scale = 0.0L;
    long double energy = 0.0L;
    for (std::size_t i = 0; i < t; ++i) {
      bill += static_cast<long double>(p[i]) * l[i];
      scale += std::abs(static_cast<long double>(p[i])) * l[i];
      energy += l[i];
    }
    const long double lhs = static_cast<long double>(mci(curve, l)) * energy;
    worst = std::max(worst, static_cast<double>(std::abs(lhs - bill) / scale));
  }
  const double elapsed = seconds_since(start);
  o.passed = worst <= 1e-9 && elapsed < 1.0;
  o.detail = "10000 pairs, worst relative error " + num(worst) + ", " + num(elapsed) + " s";
  return o;
}

CriterionOutcome gkc_optimality(const RunConfig& config) {
  CriterionOutcome o{2, "GkC uses the minimal cluster count", false, "", 0.0};
  Rng rng(config.seed + 2);
  const auto start = Clock::now();
  std::size_t agree = 0;
  const std::size_t trials = 500;
  for (std::size_t trial = 0; trial < trials; ++trial) {
    const std::size_t n = 1 + rng.index(500);
    const bool grid = trial % 2 == 1;
    std::vector<double> values(n);
    for (auto& v : values) {
      v = 20.0 * rng.uniform();
      if (grid) v = std::round(v * 4.0) / 4.0;
    }
    const double rho = 0.05 + 2.95 * rng.uniform();
    const auto table = MciTable::from_values(values);
    if (gkc(table, rho).size() == minimal_clusters_oracle(table, rho)) ++agree;
  }
  const double elapsed = seconds_since(start);
  o.passed = agree == trials && elapsed < 30.0;
  o.detail = std::to_string(agree) + "/" + std::to_string(trials) + " instances match, " +
             num(elapsed) + " s";
  return o;
}

CriterionOutcome clustering_criterion(const RunConfig& config) {
  CriterionOutcome o{3, "clustering criterion for SkC and GkC", false, "", 0.0};
  Rng rng(config.seed + 3);
  std::size_t passed = 0;
  double worst_excess = -std::numeric_limits<double>::infinity();
  const std::size_t seeds = 100;
  for (std::size_t s = 0; s < seeds; ++s) {
    RunConfig c = sized(config, 600);
    c.seed = config.seed + 1000 + s;
    c.corpus = s % 2 == 0 ? CorpusSpec::residential(600, c.seed)
                          : CorpusSpec::commercial(600, c.seed);
    c.k = 8;
    c.kmeans_metric = Metric::kSquaredEuclidean;
    c.rho = 0.1 + 1.9 * rng.uniform();
    const auto w = prepare_workload(c);
    const auto table = MciTable::from_values(w.user_mci);
    const auto base = baseline_clustering(c, w);
    bool ok = true;
    for (const auto& rc : {gkc(table, c.rho), skc(w.user_mci, c.rho, base)}) {
      const auto check = criterion_check(rc, table, c.rho);
      worst_excess = std::max(worst_excess, check.worst_gap - c.rho);
      ok = ok && check.passed && check.worst_gap <= c.rho + 1e-12;
    }
    if (ok) ++passed;
  }
  o.passed = passed == seeds;
  o.detail = std::to_string(passed) + "/" + std::to_string(seeds) +
             " seeds pass, max(gap - rho) = " + num(worst_excess);
  return o;
}

CriterionOutcome smoothness(const RunConfig& config) {
  CriterionOutcome o{4, "GkC smoothness bound", false, "", 0.0};
  const std::vector<double> thetas = {0.05, 0.1, 0.2, 0.5};
  std::vector<RunConfig> corpora;
  corpora.push_back(config);
  RunConfig commercial = config;
  commercial.corpus = CorpusSpec::commercial(config.corpus.n_users, config.seed);
  commercial.corpus_csv.reset();
  corpora.push_back(commercial);
  for (std::uint64_t s = 1; s <= 3; ++s) {
    RunConfig c = sized(config, 3000);
    c.seed = config.seed + s;
    corpora.push_back(c);
  }
  bool ok = true;
  double worst_ratio = 0.0;
  double geometric_delta = 0.0;
  for (std::size_t i = 0; i < corpora.size(); ++i) {
    const auto& c = corpora[i];
    const auto w = prepare_workload(c);
    const auto rc = gkc(MciTable::from_values(w.user_mci), c.rho);
    const auto view = to_clustering(rc, w.profiles, w.prices);
    const auto reports =
        disguise_reports(view, w.profiles, 0.5, PriceSwitch{c.rho, w.user_mci});
    for (double theta : thetas) {
      const double bound = smoothness_bound(c.rho, theta);
      const auto r = measure_smoothness(view, reports, theta, bound);
      ok = ok && r.delta_observed <= bound;
      worst_ratio = std::max(worst_ratio, r.delta_observed / bound);
    }
    if (i == 0) {
      const auto geometric = disguise_reports(view, w.profiles, 0.05);
      geometric_delta = measure_smoothness(view, geometric, 0.05).delta_observed;
    }
  }
  o.passed = ok;
  o.detail = std::to_string(corpora.size()) + " corpora x 4 thetas, max delta/bound " +
             num(worst_ratio) + " (profile-distance rule, theta 0.05: delta " +
             num(geometric_delta) + ", for information)";
  return o;
}

double grid_effort(const std::vector<double>& d, const std::vector<double>& own,
                   const std::vector<double>& target) {
  // Direct evaluation of the switch margin at mu = i * 1e-5.
  const std::size_t steps = 100000;
  double base = 0.0;
  for (std::size_t t = 0; t < d.size(); ++t) base += std::abs(d[t] - target[t]);
  for (std::size_t i = 0; i <= steps; ++i) {
    const double mu = static_cast<double>(i) / static_cast<double>(steps);
    double dist = 0.0;
    for (std::size_t t = 0; t < d.size(); ++t) {
      dist += std::abs((1.0 - mu) * d[t] + mu * target[t] - own[t]);
    }
    if (dist - (1.0 - mu) * base >= 0.0) return mu;
  }
  return 1.0;
}

CriterionOutcome disguise_effort(const RunConfig& config) {
  CriterionOutcome o{5, "minimal disguise effort", false, "", 0.0};
  Rng rng(config.seed + 5);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t t = 2 + rng.index(23);
    const auto d = random_simplex(rng, t);
    const auto own = random_simplex(rng, t);
    const auto target = random_simplex(rng, t);
    const double mu = min_switch_effort(d, own, target);
    worst = std::max(worst, std::abs(mu - grid_effort(d, own, target)));
  }
  bool centers_exact = true;
  for (int trial = 0; trial < 100; ++trial) {
    const auto own = random_simplex(rng, 24);
    const auto target = random_simplex(rng, 24);
    centers_exact = centers_exact && min_switch_effort(own, own, target) == 0.5;
  }
  o.passed = worst <= 1e-5 && centers_exact;
  o.detail = "1000 triples, worst |mu - grid| " + num(worst) + "; profile at own center " +
             (centers_exact ? "returns exactly 0.5" : "does not return 0.5");
  return o;
}

CriterionOutcome skc_vs_gkc(const RunConfig& config) {
  CriterionOutcome o{6, "SkC vs GkC counts and time", false, "", 0.0};
  const auto c10 = sized(config, 10000);
  const auto w = prepare_workload(c10);
  const auto base = baseline_clustering(c10, w);
  std::size_t gkc_count = 0;
  std::size_t skc_count = 0;
  const double t_gkc = median_seconds(21, [&] {
    gkc_count = gkc(MciTable::from_values(w.user_mci), c10.rho).size();
  });
  const double t_skc = median_seconds(21, [&] {
    skc_count = skc(w.user_mci, c10.rho, base).size();
  });

  std::vector<std::size_t> gkc_counts;
  std::vector<std::size_t> skc_counts;
  for (std::size_t n : {1000, 10000, 50000}) {
    const auto c = sized(config, n);
    const auto wn = prepare_workload(c);
    gkc_counts.push_back(gkc(MciTable::from_values(wn.user_mci), c.rho).size());
    skc_counts.push_back(skc(wn.user_mci, c.rho, baseline_clustering(c, wn)).size());
  }
  const auto [lo, hi] = std::minmax_element(gkc_counts.begin(), gkc_counts.end());
  const double variation = static_cast<double>(*hi - *lo) / static_cast<double>(*lo);
  const bool increasing = skc_counts[0] < skc_counts[1] && skc_counts[1] < skc_counts[2];
  o.passed = skc_count >= gkc_count && t_gkc < t_skc && variation < 0.2 && increasing;
  o.detail = "n=10000: SkC " + std::to_string(skc_count) + " vs GkC " +
             std::to_string(gkc_count) + " clusters, " + num(t_skc * 1e3) + " ms vs " +
             num(t_gkc * 1e3) + " ms; sizes 1e3/1e4/5e4: GkC " + list(gkc_counts) +
             " (variation " + num(variation) + "), SkC " + list(skc_counts);
  return o;
}

CriterionOutcome sensitivity(const RunConfig& config) {
  CriterionOutcome o{7, "cluster count sensitivity", false, "", 0.0};
  const auto w = prepare_workload(config);
  std::vector<double> rhos;
  for (int i = 1; i <= 20; ++i) rhos.push_back(0.1 * i);
  bool monotone = true;
  std::vector<std::size_t> at_rho;
  for (double a : {config.cost.a, 2.0 * config.cost.a, 0.5 * config.cost.a}) {
    CostModel cost = config.cost;
    cost.a = a;
    const auto prices = price_curve(cost, w.load);
    std::vector<double> mci(w.profiles.size());
    for (std::size_t i = 0; i < mci.size(); ++i) {
      mci[i] = weighted_price(prices, w.profiles[i].weights);
    }
    const auto table = MciTable::from_values(mci);
    std::size_t prev = std::numeric_limits<std::size_t>::max();
    for (double rho : rhos) {
      const std::size_t kappa = gkc(table, rho).size();
      monotone = monotone && kappa <= prev;
      prev = kappa;
    }
    at_rho.push_back(gkc(table, config.rho).size());
  }
  const double ratio = static_cast<double>(at_rho[1]) / static_cast<double>(at_rho[0]);
  o.passed = monotone && ratio >= 1.5 && ratio <= 2.5;
  o.detail = std::string("kappa(rho) ") + (monotone ? "non-increasing" : "NOT monotone") +
             " for a/2, a, 2a over 20 rho values; at rho=" + num(config.rho) + ": kappa(a)=" +
             std::to_string(at_rho[0]) + ", kappa(2a)=" + std::to_string(at_rho[1]) +
             ", ratio " + num(ratio);
  return o;
}

CriterionOutcome vulnerability(const RunConfig& config) {
  CriterionOutcome o{8, "strategic-user percentage vs theta", false, "", 0.0};
  const auto w = prepare_workload(config);
  const auto base = baseline_clustering(config, w);
  const auto reports = disguise_reports(base, w.profiles, config.theta_max);
  const auto thetas = config.theta_grid();
  double prev = -1.0;
  bool monotone = true;
  double at_zero = -1.0;
  double at_max = 0.0;
  for (double theta : thetas) {
    const double pct = count_disguisers(base, reports, theta).percentage;
    monotone = monotone && pct >= prev;
    prev = pct;
    if (theta == 0.0) at_zero = pct;
    at_max = pct;
  }
  o.passed = monotone && at_zero == 0.0;
  o.detail = std::to_string(thetas.size()) + " thetas, " +
             (monotone ? "non-decreasing" : "NOT monotone") + ", " + num(at_zero) +
             "% at theta=0, " + num(at_max) + "% at theta=" + num(thetas.back());
  return o;
}

CriterionOutcome scaling(const RunConfig& config) {
  CriterionOutcome o{9, "GkC scaling", false, "", 0.0};
  Rng rng(config.seed + 9);
  std::vector<double> times;
  std::vector<std::size_t> sizes = {10000, 100000, 1000000};
  for (std::size_t n : sizes) {
    std::vector<double> values(n);
    for (auto& v : values) v = 20.0 + 80.0 * rng.uniform();
    times.push_back(min_seconds(7, [&] {
      gkc(MciTable::from_values(values), config.rho);
    }));
  }
  double worst_ratio = 0.0;
  for (std::size_t i = 1; i < times.size(); ++i) {
    worst_ratio = std::max(worst_ratio, times[i] / times[i - 1]);
  }
  o.passed = times.back() < 5.0 && worst_ratio <= 15.0;
  o.detail = "n=1e4/1e5/1e6: " + num(times[0] * 1e3) + "/" + num(times[1] * 1e3) + "/" +
             num(times[2] * 1e3) + " ms, worst 10x ratio " + num(worst_ratio);
  return o;
}

CriterionOutcome determinism(const RunConfig& config, const std::filesystem::path& scratch) {
  CriterionOutcome o{10, "byte-identical reruns", false, "", 0.0};
  std::filesystem::remove_all(scratch);
  RunConfig a = config;
  a.out_dir = scratch / "run_a";
  RunConfig b = config;
  b.out_dir = scratch / "run_b";
  const auto produced = run_all(a).artifacts.size();
  run_all(b);
  std::string diff;
  o.passed = same_results(a.out_dir, b.out_dir, &diff);
  o.detail = std::to_string(produced) + " artifacts " +
             (o.passed ? "identical" : "differ: " + diff);
  return o;
}

}  // namespace

std::vector<CriterionOutcome> run_acceptance(
    const RunConfig& config, const std::filesystem::path& scratch,
    const std::function<void(const CriterionOutcome&)>& on_result) {
  config.validate();
  std::vector<std::function<CriterionOutcome()>> checks = {
      [&] { return billing_identity(config); },
      [&] { return gkc_optimality(config); },
      [&] { return clustering_criterion(config); },
      [&] { return smoothness(config); },
      [&] { return disguise_effort(config); },
      [&] { return skc_vs_gkc(config); },
      [&] { return sensitivity(config); },
      [&] { return vulnerability(config); },
      [&] { return scaling(config); },
      [&] { return determinism(config, scratch); },
  };
  std::vector<CriterionOutcome> out;
  for (std::size_t i = 0; i < checks.size(); ++i) {
    const auto start = Clock::now();
    CriterionOutcome r;
    try {
      r = checks[i]();
    } catch (const std::exception& e) {
      r.id = static_cast<int>(i + 1);
      r.name = "check " + std::to_string(i + 1);
      r.passed = false;
      r.detail = std::string("error: ") + e.what();
    }
    r.seconds = seconds_since(start);
    if (on_result) on_result(r);
    out.push_back(std::move(r));
  }
  return out;
}

std::string format_outcome(const CriterionOutcome& o) {
  std::ostringstream s;
  s << (o.passed ? "PASS" : "FAIL") << " [" << o.id << "] " << o.name << ": " << o.detail;
  return s.str();
}

std::vector<std::filesystem::path> result_files(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> out;
  for (const auto& e : std::filesystem::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    const auto rel = std::filesystem::relative(e.path(), dir);
    if (*rel.begin() == "meta") continue;
    out.push_back(rel);
  }
  std::sort(out.begin(), out.end());
  return out;
}

bool same_results(const std::filesystem::path& a, const std::filesystem::path& b,
                  std::string* first_difference) {
  const auto fa = result_files(a);
  const auto fb = result_files(b);
  auto fail = [&](const std::string& why) {
    if (first_difference) *first_difference = why;
    return false;
  };
  if (fa != fb) return fail("file lists differ");
  for (const auto& rel : fa) {
    std::ifstream ia(a / rel, std::ios::binary);
    std::ifstream ib(b / rel, std::ios::binary);
    const std::string ca((std::istreambuf_iterator<char>(ia)), {});
    const std::string cb((std::istreambuf_iterator<char>(ib)), {});
    if (ca != cb) return fail(rel.string());
  }
  return true;
}

}  // namespace robustprice
