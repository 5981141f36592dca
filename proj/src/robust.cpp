#include "robustprice/robust.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cmath>
#include <numeric>
#include <unordered_set>

#include <sys/mman.h>

#include "robustprice/errors.hpp"

namespace robustprice {

MciTable::MciTable(std::vector<std::string> user_ids, std::vector<double> mci)
    : by_user_(std::move(mci)), ids_(std::move(user_ids)) {
  if (ids_.size() != by_user_.size()) {
    throw ValidationError("MCI table needs one id per value");
  }
  std::unordered_set<std::string_view> seen;
  seen.reserve(ids_.size());
  for (const auto& id : ids_) {
    if (!seen.insert(id).second) throw ValidationError("duplicate user id '" + id + "'");
  }
  std::vector<std::size_t> order(ids_.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (by_user_[a] != by_user_[b]) return by_user_[a] < by_user_[b];
    return ids_[a] < ids_[b];
  });
  entries_.reserve(order.size());
  for (std::size_t u : order) {
    if (!std::isfinite(by_user_[u])) throw ValidationError("MCI values must be finite");
    entries_.push_back({u, by_user_[u]});
  }
}

namespace {

// Order-preserving map from double to unsigned key (negative values flip
// all bits, positive values flip the sign bit).
std::uint64_t sort_key(double v) {
  if (v == 0.0) v = 0.0;  // fold -0 onto +0
  const auto bits = std::bit_cast<std::uint64_t>(v);
  return (bits >> 63) ? ~bits : bits ^ (std::uint64_t{1} << 63);
}

// Reserves n elements and, for large buffers, asks the kernel to back the
// untouched allocation with huge pages before it is first written.
template <class T>
void reserve_large(std::vector<T>& v, std::size_t n) {
  v.reserve(n);
  constexpr std::uintptr_t kHuge = std::uintptr_t{2} << 20;
  const auto begin = reinterpret_cast<std::uintptr_t>(v.data());
  const auto end = begin + v.capacity() * sizeof(T);
  const std::uintptr_t first = (begin + kHuge - 1) & ~(kHuge - 1);
  const std::uintptr_t last = end & ~(kHuge - 1);
  if (last > first) madvise(reinterpret_cast<void*>(first), last - first, MADV_HUGEPAGE);
}

bool by_mci_then_user(const MciEntry& x, const MciEntry& y) {
  return x.mci < y.mci || (x.mci == y.mci && x.user < y.user);
}

struct KeyRange {
  std::uint64_t lo;
  int shift;
  std::size_t buckets;
  std::size_t bucket(double v) const {
    return static_cast<std::size_t>((sort_key(v) - lo) >> shift);
  }
};

// Throws ValidationError on a non-finite value.
template <class It, class Mci>
KeyRange key_range(It first, It last, int bits, Mci mci_of) {
  std::uint64_t lo = ~std::uint64_t{0};
  std::uint64_t hi = 0;
  for (It it = first; it != last; ++it) {
    const double v = mci_of(*it);
    if (!std::isfinite(v)) throw ValidationError("MCI values must be finite");
    const std::uint64_t k = sort_key(v);
    lo = std::min(lo, k);
    hi = std::max(hi, k);
  }
  const int width = std::bit_width(hi - lo);
  const int shift = width > bits ? width - bits : 0;
  return {lo, shift, static_cast<std::size_t>((hi - lo) >> shift) + 1};
}

// Counting sort of src[0, m) into dst by bucket; `start` receives the bucket
// offsets.
template <class Src, class Mci, class Make>
void scatter(const Src* src, std::size_t m, const KeyRange& r, MciEntry* dst,
             std::vector<std::size_t>& start, Mci mci_of, Make make) {
  start.assign(r.buckets + 1, 0);
  for (std::size_t i = 0; i < m; ++i) ++start[r.bucket(mci_of(src[i])) + 1];
  for (std::size_t b = 0; b < r.buckets; ++b) start[b + 1] += start[b];
  std::vector<std::size_t> fill(start.begin(), start.end() - 1);
  for (std::size_t i = 0; i < m; ++i) dst[fill[r.bucket(mci_of(src[i]))]++] = make(i, src[i]);
}

// Two counting passes over contiguous key ranges, then a comparison sort
// inside each small bucket. The coarse pass splits the input into at least 256
// ranges in place in the output; each range is then split finely in a small buffer
// and sorted while it is cache resident. The result equals a full sort by
// (mci, user).
std::vector<MciEntry> bucket_sort(std::span<const double> values) {
  const std::size_t n = values.size();
  auto entry_mci = [](const MciEntry& e) { return e.mci; };
  auto value = [](double v) { return v; };
  const int coarse_bits = std::clamp(static_cast<int>(std::bit_width(n / 256)), 8, 16);
  const KeyRange coarse = key_range(values.begin(), values.end(), coarse_bits, value);
  std::vector<MciEntry> out;
  reserve_large(out, n);
  out.resize(n);
  std::vector<std::size_t> start;
  scatter(values.data(), n, coarse, out.data(), start, value,
          [](std::size_t i, double v) { return MciEntry{i, v}; });
  std::size_t widest = 0;
  for (std::size_t b = 0; b < coarse.buckets; ++b) {
    widest = std::max(widest, start[b + 1] - start[b]);
  }
  std::vector<MciEntry> fine(widest);
  std::vector<std::size_t> fine_start;
  for (std::size_t b = 0; b < coarse.buckets; ++b) {
    MciEntry* part = out.data() + start[b];
    const std::size_t m = start[b + 1] - start[b];
    if (m <= 32) {
      std::sort(part, part + m, by_mci_then_user);
      continue;
    }
    const int bits = std::clamp(static_cast<int>(std::bit_width(m / 4)), 1, 16);
    const KeyRange r = key_range(part, part + m, bits, entry_mci);
    scatter(part, m, r, fine.data(), fine_start, entry_mci,
            [](std::size_t, const MciEntry& e) { return e; });
    for (std::size_t f = 0; f < r.buckets; ++f) {
      std::sort(fine.data() + fine_start[f], fine.data() + fine_start[f + 1], by_mci_then_user);
    }
    std::copy(fine.data(), fine.data() + m, part);
  }
  return out;
}

}  // namespace

MciTable MciTable::from_values(std::span<const double> values) {
  MciTable t;
  if (!values.empty()) t.entries_ = bucket_sort(values);
  reserve_large(t.by_user_, values.size());
  t.by_user_.assign(values.begin(), values.end());
  return t;
}

std::string MciTable::user_id(std::size_t user) const {
  if (ids_.empty()) return std::to_string(user);
  return ids_.at(user);
}

MciTable mci_table(const Population& population, const PriceCurve& prices) {
  if (population.empty()) throw EmptyPopulation();
  std::vector<std::string> ids;
  std::vector<double> values;
  ids.reserve(population.size());
  values.reserve(population.size());
  for (const auto& p : population.profiles()) {
    ids.push_back(p.user_id);
    values.push_back(mci(prices, p.consumption));
  }
  return MciTable(std::move(ids), std::move(values));
}

MciTable mci_table(std::span<const NormalizedProfile> profiles, const PriceCurve& prices) {
  if (profiles.empty()) throw EmptyPopulation();
  std::vector<std::string> ids;
  std::vector<double> values;
  ids.reserve(profiles.size());
  values.reserve(profiles.size());
  for (const auto& p : profiles) {
    ids.push_back(p.user_id);
    values.push_back(weighted_price(prices, p.weights));
  }
  return MciTable(std::move(ids), std::move(values));
}

std::vector<double> RobustClustering::prices() const {
  std::vector<double> out;
  out.reserve(clusters.size());
  for (const auto& c : clusters) out.push_back(c.price);
  return out;
}

namespace {

void check_rho(double rho) {
  if (!(rho > 0.0) || !std::isfinite(rho)) throw ValidationError("rho must be finite and > 0");
}

PriceCluster make_cluster(std::vector<std::size_t> members, double lo, double hi) {
  PriceCluster c;
  c.members = std::move(members);
  c.min_mci = lo;
  c.max_mci = hi;
  c.price = 0.5 * (lo + hi);
  return c;
}

}  // namespace

RobustClustering gkc(const MciTable& table, double rho) {
  check_rho(rho);
  if (table.empty()) throw ValidationError("GkC needs a non-empty MCI table");
  const auto& e = table.entries();
  const std::size_t n = e.size();
  RobustClustering out;
  out.rho = rho;
  reserve_large(out.assignment, n);
  out.assignment.assign(n, 0);
  std::size_t i = 0;
  while (i < n) {
    const double lo = e[i].mci;
    const double limit = lo + 2.0 * rho;
    std::size_t j = i;
    while (j + 1 < n && e[j + 1].mci <= limit) ++j;
    std::vector<std::size_t> members;
    members.reserve(j - i + 1);
    for (std::size_t r = i; r <= j; ++r) members.push_back(e[r].user);
    out.clusters.push_back(make_cluster(std::move(members), lo, e[j].mci));
    i = j + 1;
  }
  // Equal MCIs share a cluster, so a user's cluster is the last one starting
  // at or below its MCI. A coarse grid over the MCI range gives a starting
  // guess that the two loops below correct, and users are visited in index
  // order so memory access stays sequential.
  const auto& starts = out.clusters;
  const std::size_t kc = starts.size();
  const double first = e.front().mci;
  const double span = e.back().mci - first;
  const std::size_t cells = 4 * kc;
  const double scale = span > 0.0 ? static_cast<double>(cells) / span : 0.0;
  auto cell_of = [&](double x) {
    const double g = (x - first) * scale;
    return g >= static_cast<double>(cells - 1) ? cells - 1 : static_cast<std::size_t>(g);
  };
  std::vector<std::size_t> guess(cells, 0);
  for (std::size_t g = 0, c = 0; g < cells; ++g) {
    while (c + 1 < kc && cell_of(starts[c + 1].min_mci) <= g) ++c;
    guess[g] = c;
  }
  const auto& by_user = table.user_mci();
  for (std::size_t u = 0; u < n; ++u) {
    const double x = by_user[u];
    std::size_t c = guess[cell_of(x)];
    while (c > 0 && starts[c].min_mci > x) --c;
    while (c + 1 < kc && starts[c + 1].min_mci <= x) ++c;
    out.assignment[u] = c;
  }
  return out;
}

namespace {

struct Bisector {
  std::span<const double> mci;
  double rho;
  std::size_t max_depth;
  std::vector<PriceCluster>* out;

  std::pair<double, double> range(const std::vector<std::size_t>& users) const {
    double lo = mci[users.front()];
    double hi = lo;
    for (std::size_t u : users) {
      lo = std::min(lo, mci[u]);
      hi = std::max(hi, mci[u]);
    }
    return {lo, hi};
  }

  void emit(std::vector<std::size_t> users) const {
    std::stable_sort(users.begin(), users.end(),
                     [&](std::size_t a, std::size_t b) { return mci[a] < mci[b]; });
    const double lo = mci[users.front()];
    const double hi = mci[users.back()];
    out->push_back(make_cluster(std::move(users), lo, hi));
  }

  void run(std::vector<std::size_t> users, std::size_t depth) const {
    if (depth > max_depth) {
      throw RecursionDepthExceeded("SkC bisection exceeded depth " +
                                   std::to_string(max_depth));
    }
    const auto [m, M] = range(users);
    if (M - m < 2.0 * rho) {
      emit(std::move(users));
      return;
    }
    std::vector<std::size_t> low;
    std::vector<std::size_t> high;
    for (std::size_t u : users) {
      if (std::abs(mci[u] - m) <= std::abs(mci[u] - M)) {
        low.push_back(u);
      } else {
        high.push_back(u);
      }
    }
    const auto [lo1, hi1] = range(low);
    const auto [lo2, hi2] = range(high);
    if (std::abs(hi1 - lo1) > 2.0 * rho) {
      run(std::move(low), depth + 1);
    } else {
      emit(std::move(low));
    }
    if (std::abs(hi2 - lo2) > 2.0 * rho) {
      run(std::move(high), depth + 1);
    } else {
      emit(std::move(high));
    }
  }
};

}  // namespace

RobustClustering skc(std::span<const double> user_mci, double rho, const Clustering& base,
                     std::size_t max_depth) {
  check_rho(rho);
  if (user_mci.size() != base.size()) {
    throw ValidationError("SkC needs one MCI per user of the base clustering");
  }
  RobustClustering out;
  out.rho = rho;
  Bisector bisector{user_mci, rho, max_depth, &out.clusters};
  for (auto& members : base.members()) {
    if (members.empty()) continue;
    bisector.run(std::move(members), 0);
  }
  out.assignment.assign(user_mci.size(), 0);
  for (std::size_t c = 0; c < out.clusters.size(); ++c) {
    for (std::size_t u : out.clusters[c].members) out.assignment[u] = c;
  }
  return out;
}

std::size_t minimal_clusters_oracle(const MciTable& table, double rho, std::size_t cap) {
  check_rho(rho);
  const std::size_t n = table.size();
  if (n > cap) throw InstanceTooLarge(n, cap);
  if (n == 0) return 0;
  // best[j]: fewest groups covering the first j sorted users.
  std::vector<std::size_t> best(n + 1, n + 1);
  best[0] = 0;
  for (std::size_t j = 1; j <= n; ++j) {
    const double last = table[j - 1].mci;
    for (std::size_t i = j; i-- > 0;) {
      if (!(last <= table[i].mci + 2.0 * rho)) break;
      best[j] = std::min(best[j], best[i] + 1);
    }
  }
  return best[n];
}

CriterionResult criterion_check(const RobustClustering& clustering, const MciTable& table,
                                double rho) {
  CriterionResult result;
  result.passed = true;
  const auto& mci = table.user_mci();
  if (clustering.assignment.size() != mci.size()) {
    throw ValidationError("clustering does not match the MCI table");
  }
  for (std::size_t u = 0; u < mci.size(); ++u) {
    const double gap = std::abs(mci[u] - clustering.clusters[clustering.assignment[u]].price);
    if (gap > result.worst_gap) {
      result.worst_gap = gap;
      result.worst_user = u;
    }
  }
  result.passed = result.worst_gap <= rho + 1e-12;
  return result;
}

Clustering to_clustering(const RobustClustering& clustering,
                         std::span<const NormalizedProfile> profiles,
                         const PriceCurve& prices) {
  return clustering_from_assignment(profiles, clustering.assignment, clustering.size(), prices,
                                    clustering.prices());
}

}  // namespace robustprice
