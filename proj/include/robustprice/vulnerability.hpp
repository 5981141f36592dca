#ifndef ROBUSTPRICE_VULNERABILITY_HPP_
#define ROBUSTPRICE_VULNERABILITY_HPP_

#include <cstddef>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "robustprice/kmeans.hpp"
#include "robustprice/profiles.hpp"

namespace robustprice {

// Reported effort for a user with no cheaper cluster to move to.
inline constexpr double kNoDisguise = std::numeric_limits<double>::infinity();

// Mixes a normalized profile toward a target center: (1 - mu) d + mu c.
NormalizedProfile disguised_profile(const NormalizedProfile& profile,
                                    std::span<const double> target_center, double mu);

// Switch margin f(mu) = ||(1-mu) d + mu c_target - c_own||_1
//                       - (1-mu) ||d - c_target||_1.
// The user is accepted by the target cluster whenever f(mu) >= 0.
double switch_margin(std::span<const double> profile, std::span<const double> own_center,
                     std::span<const double> target_center, double mu);

// Smallest mu in [0, 1] with switch_margin(mu) >= 0.
//
// f is convex and piecewise linear in mu, with kinks only where a coordinate
// of (1-mu) d + mu c_target - c_own changes sign, and f(1) > 0. The root is
// located by sorting those kinks and interpolating inside the first segment
// whose right end is feasible. Throws DegenerateCenters when the centers are
// equal.
double min_switch_effort(std::span<const double> profile, std::span<const double> own_center,
                         std::span<const double> target_center);

// How a cluster decides to accept a disguised profile.
//
// ProfileSwitch: the pairwise l1 condition above against the user's own
// center; `strict` additionally requires the disguised profile to be at
// least as close to the target as to every other center.
//
// PriceSwitch: for clusterings that assign by MCI. The user mixes toward a
// profile priced at p_n, so the disguised MCI is (1-mu) MCI_i + mu p_n, and
// the target accepts once it lies within `rho` of p_n.
struct ProfileSwitch {
  bool strict = false;
};
struct PriceSwitch {
  double rho = 0.5;
  // MCI of every user, in clustering order.
  std::vector<double> user_mci;
};
using SwitchRule = std::variant<ProfileSwitch, PriceSwitch>;

struct DisguiseReport {
  std::string user_id;
  std::size_t own_cluster = 0;
  // kNoDisguise when no cluster is cheaper than the user's own.
  double cr = kNoDisguise;
  std::optional<std::size_t> best_target;
  // Minimal effort for every cheaper cluster.
  std::map<std::size_t, double> mu_per_target;
  // Largest price saving over targets reachable with effort <= theta.
  double benefit = 0.0;
};

// Minimal disguise effort of one user. Ties on effort go to the cheaper
// target, then to the lower index.
DisguiseReport cr(std::size_t user, const Clustering& clustering,
                  std::span<const NormalizedProfile> profiles, double theta,
                  const SwitchRule& rule = ProfileSwitch{});

std::vector<DisguiseReport> disguise_reports(const Clustering& clustering,
                                             std::span<const NormalizedProfile> profiles,
                                             double theta,
                                             const SwitchRule& rule = ProfileSwitch{});

struct DisguiserCounts {
  double theta = 0.0;
  // N_n(theta) per cluster.
  std::vector<std::size_t> per_cluster;
  std::size_t total = 0;
  // 100 * total / population size.
  double percentage = 0.0;
};

DisguiserCounts count_disguisers(const Clustering& clustering,
                                 std::span<const DisguiseReport> reports, double theta);
DisguiserCounts count_disguisers(const Clustering& clustering,
                                 std::span<const NormalizedProfile> profiles, double theta,
                                 const SwitchRule& rule = ProfileSwitch{});

struct SmoothnessViolation {
  std::size_t user = 0;
  std::size_t target = 0;
  double gap = 0.0;
};

struct SmoothnessReport {
  double theta = 0.0;
  // Largest |p_own - p_target| over users and targets reachable within theta.
  double delta_observed = 0.0;
  std::size_t reachable_pairs = 0;
  // Reachable pairs whose gap exceeds the bound passed in, if any.
  std::vector<SmoothnessViolation> violations;
};

SmoothnessReport measure_smoothness(const Clustering& clustering,
                                    std::span<const DisguiseReport> reports, double theta,
                                    std::optional<double> delta_bound = std::nullopt);
SmoothnessReport measure_smoothness(const Clustering& clustering,
                                    std::span<const NormalizedProfile> profiles, double theta,
                                    const SwitchRule& rule = ProfileSwitch{},
                                    std::optional<double> delta_bound = std::nullopt);

// rho (1 + 1 / (1 - theta)): the smoothness implied by a per-user tolerance.
double smoothness_bound(double rho, double theta);

}  // namespace robustprice

#endif  // ROBUSTPRICE_VULNERABILITY_HPP_
