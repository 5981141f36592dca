#ifndef ROBUSTPRICE_PROFILES_HPP_
#define ROBUSTPRICE_PROFILES_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "robustprice/model.hpp"

namespace robustprice {

// One user's (or user-day's) raw consumption over the horizon.
struct LoadProfile {
  std::string user_id;
  std::vector<double> consumption;

  double total() const;
};

// A load profile divided by its l1 norm; a point on the probability simplex.
struct NormalizedProfile {
  std::string user_id;
  std::vector<double> weights;
};

// A set of profiles sharing one horizon, with unique user ids.
class Population {
 public:
  Population() = default;
  // Throws ValidationError on mixed horizons, duplicate ids or negative
  // entries. An empty list is allowed here; operations that need users
  // raise EmptyPopulation.
  explicit Population(std::vector<LoadProfile> profiles);

  std::size_t size() const { return profiles_.size(); }
  bool empty() const { return profiles_.empty(); }
  std::size_t horizon() const { return horizon_; }
  const std::vector<LoadProfile>& profiles() const { return profiles_; }
  const LoadProfile& operator[](std::size_t i) const { return profiles_[i]; }

 private:
  std::vector<LoadProfile> profiles_;
  std::size_t horizon_ = 0;
};

// Throws ZeroProfile when the profile sums to zero.
NormalizedProfile normalize(const LoadProfile& profile);
std::vector<NormalizedProfile> normalize_all(const Population& population);

// Per-slot column sums. Throws EmptyPopulation.
SystemLoad aggregate(const Population& population);

// Uniformly rescales a system load so that its peak slot equals `peak`.
// Used to treat a sampled population as representative of a larger system.
SystemLoad scale_to_peak(const SystemLoad& load, double peak);

struct CsvSchema {
  // When set, the header must declare exactly this many slot columns.
  std::optional<std::size_t> horizon;
  char delimiter = ',';
};

struct IngestResult {
  Population population;
  // Rows dropped because of an empty or negative cell.
  std::size_t rejected_rows = 0;
  // Rows dropped because every slot is zero (MCI undefined).
  std::size_t zero_rows = 0;
};

// Reads `user_id,t0,...,t{T-1}` rows. Lines starting with '#' and blank lines
// are skipped. Throws IoError, MalformedRow (unparseable number, duplicate
// id, bad header) or InconsistentHorizon (row width differs from header).
IngestResult ingest_csv(const std::filesystem::path& path,
                        const CsvSchema& schema = {});

// Writes the same format ingest_csv reads. `comment`, when non-empty, is
// emitted as a leading '# ' line.
void write_csv(const Population& population, const std::filesystem::path& path,
               const std::string& comment = {});

enum class CorpusKind { kResidential, kCommercial };

// A daily activity bump centred at `peak_hour` on the 24-hour circle.
struct Archetype {
  std::string name;
  double peak_hour = 0.0;
  double width_hours = 1.0;
  double weight = 1.0;
};

// Parameters of the synthetic corpus generator.
//
// Each user draws archetype weights either from a symmetric-by-weight
// Dirichlet (mixture_concentration > 0) or picks exactly one archetype
// (mixture_concentration == 0). Each bump is shifted by a uniform jitter in
// [-peak_jitter_hours, peak_jitter_hours]. The shape is base_level plus the
// weighted bumps, every slot is multiplied by (1 + noise_scale * u) with u
// uniform on [-1, 1] (clipped at zero), and the result is scaled to a
// lognormal daily energy. Bounded noise keeps the MCI support bounded.
struct CorpusSpec {
  CorpusKind kind = CorpusKind::kResidential;
  std::size_t n_users = 7699;
  std::size_t horizon = 24;
  std::uint64_t seed = 42;
  std::vector<Archetype> archetypes;
  double mixture_concentration = 0.3;
  double base_level = 0.2;
  double noise_scale = 0.15;
  double peak_jitter_hours = 0.5;
  double magnitude_spread = 0.35;
  double mean_daily_energy = 30.0;

  static CorpusSpec residential(std::size_t n_users, std::uint64_t seed);
  static CorpusSpec commercial(std::size_t n_users, std::uint64_t seed);

  // Throws ValidationError.
  void validate() const;
};

struct LabeledCorpus {
  Population population;
  // Index of each user's dominant archetype.
  std::vector<std::size_t> labels;
};

// Deterministic for a fixed spec: the same spec yields bitwise identical
// output on every run.
LabeledCorpus generate_labeled_corpus(const CorpusSpec& spec);
Population generate_corpus(const CorpusSpec& spec);

}  // namespace robustprice

#endif  // ROBUSTPRICE_PROFILES_HPP_
