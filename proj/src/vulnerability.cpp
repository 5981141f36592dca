#include "robustprice/vulnerability.hpp"

#include <algorithm>
#include <cmath>

#include "robustprice/errors.hpp"

namespace robustprice {

NormalizedProfile disguised_profile(const NormalizedProfile& profile,
                                    std::span<const double> target_center, double mu) {
  if (!(mu >= 0.0 && mu <= 1.0)) throw ValidationError("mu must lie in [0, 1]");
  if (target_center.size() != profile.weights.size()) {
    throw ValidationError("target center horizon mismatch");
  }
  NormalizedProfile out{profile.user_id, profile.weights};
  for (std::size_t t = 0; t < out.weights.size(); ++t) {
    out.weights[t] = (1.0 - mu) * profile.weights[t] + mu * target_center[t];
  }
  return out;
}

double switch_margin(std::span<const double> d, std::span<const double> own,
                     std::span<const double> target, double mu) {
  double lhs = 0.0;
  double rhs = 0.0;
  for (std::size_t t = 0; t < d.size(); ++t) {
    const double step = target[t] - d[t];
    lhs += std::abs((d[t] - own[t]) + mu * step);
    rhs += std::abs(step);
  }
  return lhs - (1.0 - mu) * rhs;
}

double min_switch_effort(std::span<const double> d, std::span<const double> own,
                         std::span<const double> target) {
  if (d.size() != own.size() || d.size() != target.size()) {
    throw ValidationError("profile and centers must share a horizon");
  }
  if (std::equal(own.begin(), own.end(), target.begin())) throw DegenerateCenters();

  double f_prev = switch_margin(d, own, target, 0.0);
  if (f_prev >= 0.0) return 0.0;

  // Sign changes of (d - own) + mu (target - d) inside (0, 1).
  std::vector<double> kinks;
  kinks.reserve(d.size() + 1);
  for (std::size_t t = 0; t < d.size(); ++t) {
    const double step = target[t] - d[t];
    if (step == 0.0) continue;
    const double mu = -(d[t] - own[t]) / step;
    if (mu > 0.0 && mu < 1.0) kinks.push_back(mu);
  }
  std::sort(kinks.begin(), kinks.end());
  kinks.push_back(1.0);

  double prev = 0.0;
  for (double mu : kinks) {
    if (mu <= prev) continue;
    const double f = switch_margin(d, own, target, mu);
    if (f == 0.0) return mu;
    if (f > 0.0) {
      // f is linear on [prev, mu]; f_prev < 0 < f.
      const double root = prev + (-f_prev) * (mu - prev) / (f - f_prev);
      return std::clamp(root, prev, mu);
    }
    prev = mu;
    f_prev = f;
  }
  // Only reachable when rounding leaves f(1) <= 0 for nearly equal centers.
  return 1.0;
}

namespace {

double price_switch_effort(double user_mci, double target_price, double rho) {
  const double gap = std::abs(user_mci - target_price);
  if (gap <= rho) return 0.0;
  return 1.0 - rho / gap;
}

double effort_for(std::size_t user, std::size_t own, std::size_t target,
                  const Clustering& clustering, std::span<const NormalizedProfile> profiles,
                  const SwitchRule& rule) {
  if (const auto* price = std::get_if<PriceSwitch>(&rule)) {
    return price_switch_effort(price->user_mci[user], clustering.prices[target], price->rho);
  }
  const auto& d = profiles[user].weights;
  const auto& c_target = clustering.centers[target];
  auto pairwise = [&](std::size_t other) {
    const auto& c_other = clustering.centers[other];
    // Coincident centers leave the user equidistant at every mu, so the
    // pairwise condition holds from the start.
    if (std::equal(c_other.begin(), c_other.end(), c_target.begin())) return 0.0;
    return min_switch_effort(d, c_other, c_target);
  };
  double mu = pairwise(own);
  if (std::get<ProfileSwitch>(rule).strict) {
    // Each pairwise feasible set is [mu_m, 1]; the intersection starts at
    // the largest of them.
    for (std::size_t m = 0; m < clustering.k; ++m) {
      if (m == own || m == target) continue;
      mu = std::max(mu, pairwise(m));
    }
  }
  return mu;
}

void check_rule(const Clustering& clustering, std::span<const NormalizedProfile> profiles,
                const SwitchRule& rule) {
  if (const auto* price = std::get_if<PriceSwitch>(&rule)) {
    if (price->user_mci.size() != clustering.size()) {
      throw ValidationError("price switch rule needs one MCI per user");
    }
    if (!(price->rho > 0.0)) throw ValidationError("rho must be > 0");
  } else if (profiles.size() != clustering.size()) {
    throw ValidationError("clustering does not match the profile set");
  }
}

void check_theta(double theta) {
  if (!(theta >= 0.0 && theta < 1.0)) throw ValidationError("theta must lie in [0, 1)");
}

DisguiseReport cr_unchecked(std::size_t user, const Clustering& clustering,
                            std::span<const NormalizedProfile> profiles, double theta,
                            const SwitchRule& rule) {
  DisguiseReport report;
  const std::size_t own = clustering.assignments[user];
  report.user_id = clustering.user_ids[user];
  report.own_cluster = own;
  const double own_price = clustering.prices[own];
  for (std::size_t n = 0; n < clustering.k; ++n) {
    if (n == own || !(clustering.prices[n] < own_price)) continue;
    const double mu = effort_for(user, own, n, clustering, profiles, rule);
    report.mu_per_target.emplace(n, mu);
    const bool better =
        !report.best_target || mu < report.cr ||
        (mu == report.cr && clustering.prices[n] < clustering.prices[*report.best_target]);
    if (better) {
      report.cr = mu;
      report.best_target = n;
    }
    if (mu <= theta) report.benefit = std::max(report.benefit, own_price - clustering.prices[n]);
  }
  return report;
}

}  // namespace

DisguiseReport cr(std::size_t user, const Clustering& clustering,
                  std::span<const NormalizedProfile> profiles, double theta,
                  const SwitchRule& rule) {
  check_theta(theta);
  check_rule(clustering, profiles, rule);
  if (user >= clustering.size()) throw ValidationError("user index out of range");
  return cr_unchecked(user, clustering, profiles, theta, rule);
}

std::vector<DisguiseReport> disguise_reports(const Clustering& clustering,
                                             std::span<const NormalizedProfile> profiles,
                                             double theta, const SwitchRule& rule) {
  check_theta(theta);
  check_rule(clustering, profiles, rule);
  std::vector<DisguiseReport> out;
  out.reserve(clustering.size());
  for (std::size_t i = 0; i < clustering.size(); ++i) {
    out.push_back(cr_unchecked(i, clustering, profiles, theta, rule));
  }
  return out;
}

DisguiserCounts count_disguisers(const Clustering& clustering,
                                 std::span<const DisguiseReport> reports, double theta) {
  check_theta(theta);
  DisguiserCounts counts;
  counts.theta = theta;
  counts.per_cluster.assign(clustering.k, 0);
  for (const auto& r : reports) {
    if (r.cr <= theta) {
      ++counts.per_cluster[r.own_cluster];
      ++counts.total;
    }
  }
  counts.percentage =
      reports.empty() ? 0.0
                      : 100.0 * static_cast<double>(counts.total) /
                            static_cast<double>(reports.size());
  return counts;
}

DisguiserCounts count_disguisers(const Clustering& clustering,
                                 std::span<const NormalizedProfile> profiles, double theta,
                                 const SwitchRule& rule) {
  const auto reports = disguise_reports(clustering, profiles, theta, rule);
  return count_disguisers(clustering, reports, theta);
}

SmoothnessReport measure_smoothness(const Clustering& clustering,
                                    std::span<const DisguiseReport> reports, double theta,
                                    std::optional<double> delta_bound) {
  check_theta(theta);
  SmoothnessReport out;
  out.theta = theta;
  for (std::size_t i = 0; i < reports.size(); ++i) {
    const auto& r = reports[i];
    const double own_price = clustering.prices[r.own_cluster];
    for (const auto& [target, mu] : r.mu_per_target) {
      if (mu > theta) continue;
      const double gap = std::abs(own_price - clustering.prices[target]);
      ++out.reachable_pairs;
      out.delta_observed = std::max(out.delta_observed, gap);
      if (delta_bound && gap > *delta_bound) out.violations.push_back({i, target, gap});
    }
  }
  return out;
}

SmoothnessReport measure_smoothness(const Clustering& clustering,
                                    std::span<const NormalizedProfile> profiles, double theta,
                                    const SwitchRule& rule, std::optional<double> delta_bound) {
  const auto reports = disguise_reports(clustering, profiles, theta, rule);
  return measure_smoothness(clustering, reports, theta, delta_bound);
}

double smoothness_bound(double rho, double theta) {
  check_theta(theta);
  return rho * (1.0 + 1.0 / (1.0 - theta));
}

}  // namespace robustprice
