#ifndef ROBUSTPRICE_KMEANS_HPP_
#define ROBUSTPRICE_KMEANS_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "robustprice/model.hpp"
#include "robustprice/profiles.hpp"

namespace robustprice {

enum class Metric { kSquaredEuclidean, kL1 };

double distance(Metric metric, std::span<const double> x, std::span<const double> y);
double l1_distance(std::span<const double> x, std::span<const double> y);

// A partition of a population into k priced clusters.
//
// `assignments` and `user_ids` follow the population order the clustering was
// built from. Centers live on the simplex when built from normalized profiles.
struct Clustering {
  std::size_t k = 0;
  std::vector<std::string> user_ids;
  std::vector<std::size_t> assignments;
  std::vector<std::vector<double>> centers;
  std::vector<double> prices;

  std::size_t size() const { return assignments.size(); }
  // Member indices of every cluster, ascending.
  std::vector<std::vector<std::size_t>> members() const;
};

// Builds centers as member means. Prices are the weighted price of each
// center unless `prices_override` is non-empty, in which case it is used as
// is (robust schemes price clusters from their MCI range, not their center).
Clustering clustering_from_assignment(std::span<const NormalizedProfile> profiles,
                                      std::vector<std::size_t> assignments,
                                      std::size_t k, const PriceCurve& prices,
                                      std::vector<double> prices_override = {});

struct KMeansOptions {
  std::size_t k = 30;
  std::uint64_t seed = 0;
  std::size_t max_iters = 300;
  // Stop once the largest Euclidean center movement drops below this.
  double tol = 1e-9;
  Metric metric = Metric::kSquaredEuclidean;
};

struct KMeansTrace {
  // Objective (sum of metric distances to the assigned center) after each
  // assignment step.
  std::vector<double> objective;
  std::size_t iterations = 0;
  bool converged = false;
  std::size_t empty_repairs = 0;
};

// Lloyd iteration with k-means++ seeding.
//
// Users are processed in user_id order and seeding draws from a seeded
// shuffle of that order, so the result does not depend on the input order.
// An empty cluster is re-seeded with the point farthest from its current
// center. Throws KTooLarge when k exceeds the population, ValidationError
// when k is zero.
Clustering kmeans_profiles(std::span<const NormalizedProfile> profiles,
                           const PriceCurve& prices, const KMeansOptions& options,
                           KMeansTrace* trace = nullptr);

// Mean l1 distance from members to their center, per cluster (0 when empty).
std::vector<double> sigma(const Clustering& clustering,
                          std::span<const NormalizedProfile> profiles);

}  // namespace robustprice

#endif  // ROBUSTPRICE_KMEANS_HPP_
