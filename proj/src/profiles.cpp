#include "robustprice/profiles.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string_view>
#include <unordered_set>

#include "robustprice/errors.hpp"
#include "robustprice/format.hpp"
#include "robustprice/random.hpp"

namespace robustprice {

double LoadProfile::total() const {
  double s = 0.0;
  for (double v : consumption) s += v;
  return s;
}

Population::Population(std::vector<LoadProfile> profiles)
    : profiles_(std::move(profiles)) {
  if (profiles_.empty()) return;
  horizon_ = profiles_.front().consumption.size();
  if (horizon_ == 0) throw ValidationError("profiles need at least one slot");
  std::unordered_set<std::string> seen;
  seen.reserve(profiles_.size());
  for (const auto& p : profiles_) {
    if (p.consumption.size() != horizon_) {
      throw ValidationError("profile '" + p.user_id + "' has horizon " +
                            std::to_string(p.consumption.size()) + ", expected " +
                            std::to_string(horizon_));
    }
    if (!seen.insert(p.user_id).second) {
      throw ValidationError("duplicate user id '" + p.user_id + "'");
    }
    for (double v : p.consumption) {
      if (!std::isfinite(v) || v < 0.0) {
        throw ValidationError("profile '" + p.user_id + "' has a negative entry");
      }
    }
  }
}

NormalizedProfile normalize(const LoadProfile& profile) {
  const double norm = profile.total();
  if (!(norm > 0.0)) {
    throw ZeroProfile("profile '" + profile.user_id + "' has zero consumption");
  }
  NormalizedProfile out{profile.user_id, {}};
  out.weights.reserve(profile.consumption.size());
  for (double v : profile.consumption) out.weights.push_back(v / norm);
  return out;
}

std::vector<NormalizedProfile> normalize_all(const Population& population) {
  std::vector<NormalizedProfile> out;
  out.reserve(population.size());
  for (const auto& p : population.profiles()) out.push_back(normalize(p));
  return out;
}

SystemLoad aggregate(const Population& population) {
  if (population.empty()) throw EmptyPopulation();
  std::vector<double> loads(population.horizon(), 0.0);
  for (const auto& p : population.profiles()) {
    for (std::size_t t = 0; t < loads.size(); ++t) loads[t] += p.consumption[t];
  }
  return SystemLoad(std::move(loads));
}

SystemLoad scale_to_peak(const SystemLoad& load, double peak) {
  if (!(peak > 0.0)) throw ValidationError("target peak load must be > 0");
  const auto loads = load.loads();
  const double current = *std::max_element(loads.begin(), loads.end());
  if (!(current > 0.0)) throw ValidationError("cannot rescale an all-zero load");
  std::vector<double> scaled(loads.begin(), loads.end());
  const double f = peak / current;
  for (double& v : scaled) v *= f;
  return SystemLoad(std::move(scaled));
}

// ---------------------------------------------------------------------------
// CSV

namespace {

std::vector<std::string_view> split(std::string_view line, char delim) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = line.find(delim, start);
    if (pos == std::string_view::npos) {
      cells.push_back(line.substr(start));
      return cells;
    }
    cells.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

}  // namespace

IngestResult ingest_csv(const std::filesystem::path& path, const CsvSchema& schema) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());

  IngestResult result;
  std::vector<LoadProfile> rows;
  std::unordered_set<std::string> ids;
  std::size_t horizon = 0;
  bool have_header = false;
  std::size_t line_no = 0;
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view view = trim(line);
    if (view.empty() || view.front() == '#') continue;
    const auto cells = split(view, schema.delimiter);
    if (!have_header) {
      if (trim(cells.front()) != "user_id") {
        throw MalformedRow(line_no, "header must start with 'user_id'");
      }
      horizon = cells.size() - 1;
      if (horizon == 0) throw MalformedRow(line_no, "header declares no slot columns");
      if (schema.horizon && *schema.horizon != horizon) {
        throw InconsistentHorizon("header declares " + std::to_string(horizon) +
                                  " slots, schema expects " +
                                  std::to_string(*schema.horizon));
      }
      have_header = true;
      continue;
    }
    if (cells.size() != horizon + 1) {
      throw InconsistentHorizon("line " + std::to_string(line_no) + " has " +
                                std::to_string(cells.size() - 1) +
                                " slot values, header declares " +
                                std::to_string(horizon));
    }
    LoadProfile profile;
    profile.user_id = std::string(trim(cells.front()));
    if (profile.user_id.empty()) throw MalformedRow(line_no, "empty user_id");
    profile.consumption.reserve(horizon);
    bool drop = false;
    for (std::size_t c = 1; c < cells.size(); ++c) {
      const std::string_view cell = trim(cells[c]);
      if (cell.empty()) {
        drop = true;
        break;
      }
      double value = 0.0;
      const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
      if (ec != std::errc() || ptr != cell.data() + cell.size() || !std::isfinite(value)) {
        throw MalformedRow(line_no, "cannot parse '" + std::string(cell) + "'");
      }
      if (value < 0.0) {
        drop = true;
        break;
      }
      profile.consumption.push_back(value);
    }
    if (drop) {
      ++result.rejected_rows;
      continue;
    }
    if (!(profile.total() > 0.0)) {
      ++result.zero_rows;
      continue;
    }
    if (!ids.insert(profile.user_id).second) {
      throw MalformedRow(line_no, "duplicate user_id '" + profile.user_id + "'");
    }
    rows.push_back(std::move(profile));
  }
  if (!have_header) throw MalformedRow(line_no, "missing header row");
  result.population = Population(std::move(rows));
  return result;
}

void write_csv(const Population& population, const std::filesystem::path& path,
               const std::string& comment) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  if (!comment.empty()) out << "# " << comment << '\n';
  out << "user_id";
  for (std::size_t t = 0; t < population.horizon(); ++t) out << ",t" << t;
  out << '\n';
  for (const auto& p : population.profiles()) {
    out << p.user_id;
    for (double v : p.consumption) out << ',' << format_number(v);
    out << '\n';
  }
  if (!out) throw IoError("write failed for " + path.string());
}

// ---------------------------------------------------------------------------
// Synthetic corpus

CorpusSpec CorpusSpec::residential(std::size_t n_users, std::uint64_t seed) {
  CorpusSpec s;
  s.kind = CorpusKind::kResidential;
  s.n_users = n_users;
  s.seed = seed;
  s.archetypes = {
      {"morning", 7.5, 1.5, 1.0},
      {"noon", 12.5, 2.0, 1.0},
      {"evening", 19.0, 1.75, 1.0},
      {"night", 23.0, 2.0, 1.0},
  };
  s.mixture_concentration = 0.3;
  s.base_level = 0.2;
  s.noise_scale = 0.15;
  s.peak_jitter_hours = 0.5;
  s.magnitude_spread = 0.4;
  s.mean_daily_energy = 30.0;
  return s;
}

CorpusSpec CorpusSpec::commercial(std::size_t n_users, std::uint64_t seed) {
  CorpusSpec s;
  s.kind = CorpusKind::kCommercial;
  s.n_users = n_users;
  s.seed = seed;
  s.archetypes = {
      {"office", 13.0, 3.0, 2.0},
      {"retail", 15.5, 3.5, 1.0},
  };
  s.mixture_concentration = 12.0;
  s.base_level = 0.25;
  s.noise_scale = 0.08;
  s.peak_jitter_hours = 0.5;
  s.magnitude_spread = 0.6;
  s.mean_daily_energy = 800.0;
  return s;
}

void CorpusSpec::validate() const {
  if (n_users < 1) throw ValidationError("corpus needs n_users >= 1");
  if (horizon < 1) throw ValidationError("corpus needs horizon >= 1");
  if (archetypes.empty()) throw ValidationError("corpus needs at least one archetype");
  for (const auto& a : archetypes) {
    if (!(a.width_hours > 0.0)) throw ValidationError("archetype width must be > 0");
    if (!(a.weight > 0.0)) throw ValidationError("archetype weight must be > 0");
    if (!std::isfinite(a.peak_hour)) throw ValidationError("archetype peak must be finite");
  }
  if (!(mixture_concentration >= 0.0)) {
    throw ValidationError("mixture_concentration must be >= 0");
  }
  if (!(base_level >= 0.0)) throw ValidationError("base_level must be >= 0");
  if (!(noise_scale >= 0.0)) throw ValidationError("noise_scale must be >= 0");
  if (!(peak_jitter_hours >= 0.0)) throw ValidationError("peak_jitter_hours must be >= 0");
  if (!(magnitude_spread >= 0.0)) throw ValidationError("magnitude_spread must be >= 0");
  if (!(mean_daily_energy > 0.0)) throw ValidationError("mean_daily_energy must be > 0");
}

namespace {

// Gaussian bump on the 24-hour circle, truncated at three widths.
double bump(double hour, double peak, double width) {
  double d = std::fmod(std::abs(hour - peak), 24.0);
  d = std::min(d, 24.0 - d);
  if (d > 3.0 * width) return 0.0;
  const double z = d / width;
  return std::exp(-0.5 * z * z);
}

std::size_t pick_weighted(Rng& rng, const std::vector<Archetype>& archetypes) {
  double total = 0.0;
  for (const auto& a : archetypes) total += a.weight;
  double u = rng.uniform() * total;
  for (std::size_t i = 0; i < archetypes.size(); ++i) {
    u -= archetypes[i].weight;
    if (u < 0.0) return i;
  }
  return archetypes.size() - 1;
}

}  // namespace

LabeledCorpus generate_labeled_corpus(const CorpusSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  const std::size_t T = spec.horizon;
  const std::size_t A = spec.archetypes.size();
  const int id_width = static_cast<int>(std::to_string(spec.n_users - 1).size());
  const char* prefix = spec.kind == CorpusKind::kResidential ? "r" : "c";

  double weight_sum = 0.0;
  for (const auto& a : spec.archetypes) weight_sum += a.weight;

  LabeledCorpus out;
  std::vector<LoadProfile> profiles;
  profiles.reserve(spec.n_users);
  out.labels.reserve(spec.n_users);
  std::vector<double> mix(A);
  std::vector<double> shape(T);
  for (std::size_t u = 0; u < spec.n_users; ++u) {
    if (spec.mixture_concentration > 0.0) {
      double s = 0.0;
      for (std::size_t a = 0; a < A; ++a) {
        const double alpha =
            spec.mixture_concentration * A * spec.archetypes[a].weight / weight_sum;
        mix[a] = rng.gamma(alpha);
        s += mix[a];
      }
      for (double& m : mix) m = s > 0.0 ? m / s : 1.0 / A;
    } else {
      std::fill(mix.begin(), mix.end(), 0.0);
      mix[pick_weighted(rng, spec.archetypes)] = 1.0;
    }
    out.labels.push_back(static_cast<std::size_t>(
        std::max_element(mix.begin(), mix.end()) - mix.begin()));

    std::fill(shape.begin(), shape.end(), spec.base_level);
    for (std::size_t a = 0; a < A; ++a) {
      const auto& arch = spec.archetypes[a];
      const double shift = spec.peak_jitter_hours * (2.0 * rng.uniform() - 1.0);
      if (mix[a] == 0.0) continue;
      for (std::size_t t = 0; t < T; ++t) {
        const double hour = (static_cast<double>(t) + 0.5) * 24.0 / static_cast<double>(T);
        shape[t] += mix[a] * bump(hour, arch.peak_hour + shift, arch.width_hours);
      }
    }
    double total = 0.0;
    for (double& v : shape) {
      v *= std::max(0.0, 1.0 + spec.noise_scale * (2.0 * rng.uniform() - 1.0));
      total += v;
    }
    if (!(total > 0.0)) {
      // Every slot clipped: fall back to a flat profile.
      std::fill(shape.begin(), shape.end(), 1.0);
      total = static_cast<double>(T);
    }
    const double sigma = spec.magnitude_spread;
    const double energy =
        sigma > 0.0 ? spec.mean_daily_energy * std::exp(sigma * rng.normal() - 0.5 * sigma * sigma)
                    : spec.mean_daily_energy;

    LoadProfile p;
    std::ostringstream id;
    id << prefix;
    id.width(id_width);
    id.fill('0');
    id << u;
    p.user_id = id.str();
    p.consumption.resize(T);
    for (std::size_t t = 0; t < T; ++t) p.consumption[t] = energy * shape[t] / total;
    profiles.push_back(std::move(p));
  }
  out.population = Population(std::move(profiles));
  return out;
}

Population generate_corpus(const CorpusSpec& spec) {
  return generate_labeled_corpus(spec).population;
}

}  // namespace robustprice
