#include "robustprice/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "robustprice/errors.hpp"

namespace robustprice {
namespace {

void check_horizon(std::size_t expected, std::size_t got) {
  if (expected != got) {
    throw ValidationError("horizon mismatch: price curve has " +
                          std::to_string(expected) + " slots, profile has " +
                          std::to_string(got));
  }
}

}  // namespace

void CostModel::validate() const {
  if (!std::isfinite(a) || !std::isfinite(b) || !std::isfinite(c)) {
    throw ValidationError("cost coefficients must be finite");
  }
  if (a <= 0.0) throw ValidationError("cost curvature a must be > 0");
  if (c < 0.0) throw ValidationError("fixed cost c must be >= 0");
}

SystemLoad::SystemLoad(std::vector<double> loads) : loads_(std::move(loads)) {
  if (loads_.empty()) throw ValidationError("system load needs at least one slot");
  for (double v : loads_) {
    if (!std::isfinite(v) || v < 0.0) {
      throw ValidationError("system load entries must be finite and >= 0");
    }
  }
}

PriceCurve::PriceCurve(std::vector<double> prices) : prices_(std::move(prices)) {
  if (prices_.empty()) throw ValidationError("price curve needs at least one slot");
}

double PriceCurve::min() const {
  return *std::min_element(prices_.begin(), prices_.end());
}

double PriceCurve::max() const {
  return *std::max_element(prices_.begin(), prices_.end());
}

double total_cost(const CostModel& model, const SystemLoad& load) {
  double total = 0.0;
  for (double l : load.loads()) {
    total += 0.5 * model.a * l * l + model.b * l + model.c;
  }
  return total;
}

PriceCurve price_curve(const CostModel& model, const SystemLoad& load) {
  model.validate();
  std::vector<double> prices;
  prices.reserve(load.horizon());
  std::size_t nonpositive = 0;
  for (double l : load.loads()) {
    const double p = model.a * l + model.b;
    if (p <= 0.0) ++nonpositive;
    prices.push_back(p);
  }
  if (nonpositive > 0) {
    warn(std::to_string(nonpositive) + " of " + std::to_string(prices.size()) +
         " slot prices are non-positive");
  }
  return PriceCurve(std::move(prices));
}

double weighted_price(const PriceCurve& prices, std::span<const double> weights) {
  check_horizon(prices.horizon(), weights.size());
  double acc = 0.0;
  for (std::size_t t = 0; t < weights.size(); ++t) acc += prices[t] * weights[t];
  return acc;
}

double mci(const PriceCurve& prices, std::span<const double> consumption) {
  check_horizon(prices.horizon(), consumption.size());
  double norm = 0.0;
  double bill = 0.0;
  for (std::size_t t = 0; t < consumption.size(); ++t) {
    const double l = consumption[t];
    if (!(l >= 0.0)) throw ValidationError("profile entries must be >= 0");
    norm += l;
    bill += prices[t] * l;
  }
  if (norm <= 0.0) throw ZeroProfile("profile has zero total consumption");
  return bill / norm;
}

bool billing_identity_check(const PriceCurve& prices,
                            std::span<const double> consumption) {
  const double rate = mci(prices, consumption);
  double norm = 0.0;
  double bill = 0.0;
  for (std::size_t t = 0; t < consumption.size(); ++t) {
    norm += consumption[t];
    bill += prices[t] * consumption[t];
  }
  return std::abs(rate * norm - bill) <= 1e-9 * (1.0 + std::abs(bill));
}

}  // namespace robustprice
