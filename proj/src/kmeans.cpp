#include "robustprice/kmeans.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "robustprice/errors.hpp"
#include "robustprice/random.hpp"

namespace robustprice {

double l1_distance(std::span<const double> x, std::span<const double> y) {
  double s = 0.0;
  for (std::size_t t = 0; t < x.size(); ++t) s += std::abs(x[t] - y[t]);
  return s;
}

double distance(Metric metric, std::span<const double> x, std::span<const double> y) {
  if (metric == Metric::kL1) return l1_distance(x, y);
  double s = 0.0;
  for (std::size_t t = 0; t < x.size(); ++t) {
    const double d = x[t] - y[t];
    s += d * d;
  }
  return s;
}

std::vector<std::vector<std::size_t>> Clustering::members() const {
  std::vector<std::vector<std::size_t>> out(k);
  for (std::size_t i = 0; i < assignments.size(); ++i) out[assignments[i]].push_back(i);
  return out;
}

Clustering clustering_from_assignment(std::span<const NormalizedProfile> profiles,
                                      std::vector<std::size_t> assignments,
                                      std::size_t k, const PriceCurve& prices,
                                      std::vector<double> prices_override) {
  if (assignments.size() != profiles.size()) {
    throw ValidationError("assignment length does not match the profile count");
  }
  if (!prices_override.empty() && prices_override.size() != k) {
    throw ValidationError("price override length does not match k");
  }
  const std::size_t T = profiles.empty() ? prices.horizon() : profiles[0].weights.size();
  Clustering c;
  c.k = k;
  c.assignments = std::move(assignments);
  c.user_ids.reserve(profiles.size());
  c.centers.assign(k, std::vector<double>(T, 0.0));
  std::vector<std::size_t> counts(k, 0);
  for (std::size_t i = 0; i < profiles.size(); ++i) {
    const std::size_t j = c.assignments[i];
    if (j >= k) throw ValidationError("cluster index out of range");
    c.user_ids.push_back(profiles[i].user_id);
    ++counts[j];
    for (std::size_t t = 0; t < T; ++t) c.centers[j][t] += profiles[i].weights[t];
  }
  for (std::size_t j = 0; j < k; ++j) {
    if (counts[j] == 0) continue;
    for (double& v : c.centers[j]) v /= static_cast<double>(counts[j]);
  }
  if (prices_override.empty()) {
    c.prices.reserve(k);
    for (const auto& center : c.centers) c.prices.push_back(weighted_price(prices, center));
  } else {
    c.prices = std::move(prices_override);
  }
  return c;
}

namespace {

using Center = std::vector<double>;

std::size_t nearest(Metric metric, std::span<const double> x,
                    const std::vector<Center>& centers, double* best_out) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < centers.size(); ++j) {
    const double d = distance(metric, x, centers[j]);
    if (d < best_d) {
      best_d = d;
      best = j;
    }
  }
  if (best_out) *best_out = best_d;
  return best;
}

// k-means++ over the canonical order. Returns canonical positions.
std::vector<std::size_t> seed_centers(std::span<const NormalizedProfile> profiles,
                                      const std::vector<std::size_t>& canonical,
                                      std::size_t k, Metric metric, Rng& rng) {
  const std::size_t n = canonical.size();
  std::vector<std::size_t> shuffled(n);
  std::iota(shuffled.begin(), shuffled.end(), 0);
  for (std::size_t i = n; i > 1; --i) std::swap(shuffled[i - 1], shuffled[rng.index(i)]);

  std::vector<std::size_t> chosen;
  chosen.reserve(k);
  chosen.push_back(shuffled[rng.index(n)]);
  std::vector<double> weight(n, std::numeric_limits<double>::infinity());
  while (chosen.size() < k) {
    const auto& last = profiles[canonical[chosen.back()]].weights;
    double total = 0.0;
    for (std::size_t pos = 0; pos < n; ++pos) {
      const double d = distance(metric, profiles[canonical[pos]].weights, last);
      const double w = metric == Metric::kL1 ? d * d : d;
      weight[pos] = std::min(weight[pos], w);
      total += weight[pos];
    }
    std::size_t pick = n;
    if (total > 0.0) {
      double u = rng.uniform() * total;
      // Walk the shuffled order so the draw is tied to the seeded shuffle.
      for (std::size_t s = 0; s < n; ++s) {
        const std::size_t pos = shuffled[s];
        if (weight[pos] <= 0.0) continue;
        u -= weight[pos];
        if (u < 0.0) {
          pick = pos;
          break;
        }
      }
      if (pick == n) {
        for (std::size_t s = n; s-- > 0;) {
          if (weight[shuffled[s]] > 0.0) {
            pick = shuffled[s];
            break;
          }
        }
      }
    } else {
      // Every remaining point coincides with a chosen center.
      pick = shuffled[rng.index(n)];
    }
    chosen.push_back(pick);
  }
  return chosen;
}

}  // namespace

Clustering kmeans_profiles(std::span<const NormalizedProfile> profiles,
                           const PriceCurve& prices, const KMeansOptions& options,
                           KMeansTrace* trace) {
  const std::size_t n = profiles.size();
  const std::size_t k = options.k;
  if (k == 0) throw ValidationError("k must be >= 1");
  if (n == 0) throw EmptyPopulation();
  if (k > n) throw KTooLarge(k, n);
  const std::size_t T = profiles[0].weights.size();

  std::vector<std::size_t> canonical(n);
  std::iota(canonical.begin(), canonical.end(), 0);
  std::stable_sort(canonical.begin(), canonical.end(), [&](std::size_t a, std::size_t b) {
    return profiles[a].user_id < profiles[b].user_id;
  });

  Rng rng(options.seed);
  std::vector<Center> centers;
  centers.reserve(k);
  for (std::size_t pos : seed_centers(profiles, canonical, k, options.metric, rng)) {
    centers.push_back(profiles[canonical[pos]].weights);
  }

  KMeansTrace local;
  KMeansTrace& tr = trace ? *trace : local;
  tr = KMeansTrace{};

  // Assignment per canonical position.
  std::vector<std::size_t> assign(n, k);
  std::vector<double> dist(n, 0.0);
  std::vector<std::size_t> counts(k);
  for (std::size_t iter = 0; iter < options.max_iters; ++iter) {
    bool changed = false;
    for (std::size_t pos = 0; pos < n; ++pos) {
      const std::size_t j =
          nearest(options.metric, profiles[canonical[pos]].weights, centers, &dist[pos]);
      if (j != assign[pos]) {
        assign[pos] = j;
        changed = true;
      }
    }

    std::fill(counts.begin(), counts.end(), 0);
    for (std::size_t pos = 0; pos < n; ++pos) ++counts[assign[pos]];
    for (std::size_t j = 0; j < k; ++j) {
      if (counts[j] != 0) continue;
      // Farthest point among clusters that can spare a member.
      std::size_t far = n;
      for (std::size_t pos = 0; pos < n; ++pos) {
        if (counts[assign[pos]] < 2) continue;
        if (far == n || dist[pos] > dist[far]) far = pos;
      }
      --counts[assign[far]];
      assign[far] = j;
      counts[j] = 1;
      dist[far] = 0.0;
      centers[j] = profiles[canonical[far]].weights;
      changed = true;
      ++tr.empty_repairs;
    }

    double objective = 0.0;
    for (std::size_t pos = 0; pos < n; ++pos) objective += dist[pos];
    tr.objective.push_back(objective);
    tr.iterations = iter + 1;

    std::vector<Center> updated(k, Center(T, 0.0));
    for (std::size_t pos = 0; pos < n; ++pos) {
      const auto& w = profiles[canonical[pos]].weights;
      auto& c = updated[assign[pos]];
      for (std::size_t t = 0; t < T; ++t) c[t] += w[t];
    }
    double movement = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      double sq = 0.0;
      for (std::size_t t = 0; t < T; ++t) {
        updated[j][t] /= static_cast<double>(counts[j]);
        const double d = updated[j][t] - centers[j][t];
        sq += d * d;
      }
      movement = std::max(movement, std::sqrt(sq));
    }
    centers = std::move(updated);
    if (!changed || movement < options.tol) {
      tr.converged = true;
      break;
    }
  }

  std::vector<std::size_t> assignments(n);
  for (std::size_t pos = 0; pos < n; ++pos) assignments[canonical[pos]] = assign[pos];

  Clustering c;
  c.k = k;
  c.assignments = std::move(assignments);
  c.user_ids.reserve(n);
  for (const auto& p : profiles) c.user_ids.push_back(p.user_id);
  c.centers = std::move(centers);
  c.prices.reserve(k);
  for (const auto& center : c.centers) c.prices.push_back(weighted_price(prices, center));
  return c;
}

std::vector<double> sigma(const Clustering& clustering,
                          std::span<const NormalizedProfile> profiles) {
  if (profiles.size() != clustering.size()) {
    throw ValidationError("clustering does not match the profile set");
  }
  std::vector<double> sum(clustering.k, 0.0);
  std::vector<std::size_t> count(clustering.k, 0);
  for (std::size_t i = 0; i < profiles.size(); ++i) {
    const std::size_t j = clustering.assignments[i];
    sum[j] += l1_distance(profiles[i].weights, clustering.centers[j]);
    ++count[j];
  }
  for (std::size_t j = 0; j < clustering.k; ++j) {
    sum[j] = count[j] ? sum[j] / static_cast<double>(count[j]) : 0.0;
  }
  return sum;
}

}  // namespace robustprice
