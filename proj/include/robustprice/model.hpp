#ifndef ROBUSTPRICE_MODEL_HPP_
#define ROBUSTPRICE_MODEL_HPP_

#include <cstddef>
#include <span>
#include <vector>

namespace robustprice {

// Quadratic acquisition cost C(L) = a/2 L^2 + b L + c per slot.
// Units are abstract but must be consistent between a, b and the loads.
struct CostModel {
  double a = 0.00012;
  double b = -37.38;
  double c = 0.0;

  // Throws ValidationError unless a > 0 and c >= 0 (all finite).
  void validate() const;
};

// Total consumption per slot over the horizon.
class SystemLoad {
 public:
  SystemLoad() = default;
  // Throws ValidationError on an empty horizon or a negative/non-finite slot.
  explicit SystemLoad(std::vector<double> loads);

  std::span<const double> loads() const { return loads_; }
  std::size_t horizon() const { return loads_.size(); }
  double operator[](std::size_t t) const { return loads_[t]; }

 private:
  std::vector<double> loads_;
};

// Marginal-cost price per slot, p(t) = a L_t + b.
class PriceCurve {
 public:
  PriceCurve() = default;
  explicit PriceCurve(std::vector<double> prices);

  std::span<const double> prices() const { return prices_; }
  std::size_t horizon() const { return prices_.size(); }
  double operator[](std::size_t t) const { return prices_[t]; }
  double min() const;
  double max() const;

 private:
  std::vector<double> prices_;
};

// Sum over slots of the quadratic cost.
double total_cost(const CostModel& model, const SystemLoad& load);

// Emits a warning (not an error) when any price is non-positive.
PriceCurve price_curve(const CostModel& model, const SystemLoad& load);

// Marginal system cost impact: the price-weighted average of the profile,
// sum_t p(t) l^t / ||l||_1. Throws ZeroProfile for an all-zero profile and
// ValidationError on a horizon mismatch or a negative entry.
double mci(const PriceCurve& prices, std::span<const double> consumption);

// Dot product of prices with weights that already sum to one. This is the MCI
// of a normalized profile (or of a cluster center) without re-normalizing.
double weighted_price(const PriceCurve& prices, std::span<const double> weights);

// True when billing the profile at its MCI reproduces the real-time bill,
// within 1e-9 relative.
bool billing_identity_check(const PriceCurve& prices,
                            std::span<const double> consumption);

}  // namespace robustprice

#endif  // ROBUSTPRICE_MODEL_HPP_
