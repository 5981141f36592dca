#ifndef ROBUSTPRICE_ROBUST_HPP_
#define ROBUSTPRICE_ROBUST_HPP_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "robustprice/kmeans.hpp"
#include "robustprice/model.hpp"
#include "robustprice/profiles.hpp"

namespace robustprice {

struct MciEntry {
  // Index of the user in the population (or value list) the table was built from.
  std::size_t user = 0;
  double mci = 0.0;
};

// Users sorted by ascending MCI; equal MCIs are ordered by user id.
class MciTable {
 public:
  MciTable() = default;
  // Throws ValidationError on a length mismatch, duplicate ids or a
  // non-finite MCI.
  MciTable(std::vector<std::string> user_ids, std::vector<double> mci);

  // Ids are the value positions; ties keep position order.
  static MciTable from_values(std::span<const double> values);

  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const std::vector<MciEntry>& entries() const { return entries_; }
  const MciEntry& operator[](std::size_t rank) const { return entries_[rank]; }
  // MCI per user index (unsorted).
  const std::vector<double>& user_mci() const { return by_user_; }
  // Positional tables report the index as the id.
  std::string user_id(std::size_t user) const;

 private:
  std::vector<MciEntry> entries_;
  std::vector<double> by_user_;
  std::vector<std::string> ids_;
};

// MCI of every user, sorted. Throws EmptyPopulation or ZeroProfile.
MciTable mci_table(const Population& population, const PriceCurve& prices);
MciTable mci_table(std::span<const NormalizedProfile> profiles, const PriceCurve& prices);

struct PriceCluster {
  // User indices, ascending by MCI.
  std::vector<std::size_t> members;
  double min_mci = 0.0;
  double max_mci = 0.0;
  // Midpoint of [min_mci, max_mci].
  double price = 0.0;
};

// A clustering priced so that every user's MCI is within rho of its price.
struct RobustClustering {
  double rho = 0.0;
  std::vector<PriceCluster> clusters;
  // Cluster index per user index.
  std::vector<std::size_t> assignment;

  std::size_t size() const { return clusters.size(); }
  std::vector<double> prices() const;
};

// Greedy covering of the sorted MCI axis by windows of width 2 rho: each
// cluster starts at the cheapest unassigned user and takes every following
// user with MCI <= start + 2 rho. Uses the fewest clusters any partition
// meeting the tolerance can use. Throws ValidationError for rho <= 0 or an
// empty table.
RobustClustering gkc(const MciTable& table, double rho);

// Supervised bisection inside each cluster of a profile-based clustering:
// a group whose MCI range is below 2 rho is kept, otherwise members are split
// toward the nearer of the group's min and max MCI (ties to the min side) and
// any half still wider than 2 rho is split again. `user_mci` is indexed like
// the base clustering. Throws RecursionDepthExceeded past `max_depth` levels.
RobustClustering skc(std::span<const double> user_mci, double rho,
                     const Clustering& base, std::size_t max_depth = 64);

// Fewest contiguous groups of the sorted MCI list with each range <= 2 rho,
// by dynamic programming over prefix lengths. O(n^2) worst case. Throws
// InstanceTooLarge above `cap` users.
std::size_t minimal_clusters_oracle(const MciTable& table, double rho,
                                    std::size_t cap = 2000);

struct CriterionResult {
  bool passed = false;
  double worst_gap = 0.0;
  std::size_t worst_user = 0;
};

// Checks |MCI_i - p_{u(i)}| <= rho for every user (absolute slack 1e-12).
CriterionResult criterion_check(const RobustClustering& clustering, const MciTable& table,
                                double rho);

// Profile view of a robust clustering: member-mean centers, robust prices.
Clustering to_clustering(const RobustClustering& clustering,
                         std::span<const NormalizedProfile> profiles,
                         const PriceCurve& prices);

}  // namespace robustprice

#endif  // ROBUSTPRICE_ROBUST_HPP_
