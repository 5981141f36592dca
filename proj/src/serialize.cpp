#include "robustprice/serialize.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "robustprice/errors.hpp"
#include "robustprice/format.hpp"

namespace robustprice {

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  if (value == 0.0) return "0";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.9g", value);
  return buf;
}

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

nlohmann::json json_number(double value) {
  if (!std::isfinite(value)) return nullptr;
  return std::strtod(format_number(value).c_str(), nullptr);
}

namespace {

nlohmann::json json_vector(std::span<const double> values) {
  auto arr = nlohmann::json::array();
  for (double v : values) arr.push_back(json_number(v));
  return arr;
}

}  // namespace

CorpusSpec corpus_spec_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ValidationError("corpus spec must be a JSON object");
  static const char* kKeys[] = {"kind",          "n_users",           "horizon",
                                "seed",          "archetypes",        "mixture_concentration",
                                "base_level",    "noise_scale",       "peak_jitter_hours",
                                "magnitude_spread", "mean_daily_energy"};
  for (const auto& [key, _] : j.items()) {
    bool known = false;
    for (const char* k : kKeys) known = known || key == k;
    if (!known) throw ValidationError("unknown corpus spec key '" + key + "'");
  }
  try {
    const std::string kind = j.value("kind", std::string("residential"));
    // Validated by CorpusSpec::validate, but a negative JSON integer would wrap.
    const auto n_users = j.value("n_users", std::int64_t{7699});
    if (n_users < 0) throw ValidationError("n_users must be >= 0");
    const auto seed = j.value("seed", std::uint64_t{42});
    CorpusSpec s;
    if (kind == "residential") {
      s = CorpusSpec::residential(static_cast<std::size_t>(n_users), seed);
    } else if (kind == "commercial") {
      s = CorpusSpec::commercial(static_cast<std::size_t>(n_users), seed);
    } else {
      throw ValidationError("corpus kind must be 'residential' or 'commercial'");
    }
    s.horizon = j.value("horizon", s.horizon);
    if (j.contains("archetypes")) {
      s.archetypes.clear();
      for (const auto& a : j.at("archetypes")) {
        Archetype arch;
        arch.name = a.value("name", std::string());
        arch.peak_hour = a.at("peak_hour").get<double>();
        arch.width_hours = a.at("width_hours").get<double>();
        arch.weight = a.value("weight", 1.0);
        s.archetypes.push_back(arch);
      }
    }
    s.mixture_concentration = j.value("mixture_concentration", s.mixture_concentration);
    s.base_level = j.value("base_level", s.base_level);
    s.noise_scale = j.value("noise_scale", s.noise_scale);
    s.peak_jitter_hours = j.value("peak_jitter_hours", s.peak_jitter_hours);
    s.magnitude_spread = j.value("magnitude_spread", s.magnitude_spread);
    s.mean_daily_energy = j.value("mean_daily_energy", s.mean_daily_energy);
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("corpus spec: ") + e.what());
  }
}

nlohmann::json to_json(const CorpusSpec& spec) {
  nlohmann::json j;
  j["kind"] = spec.kind == CorpusKind::kResidential ? "residential" : "commercial";
  j["n_users"] = spec.n_users;
  j["horizon"] = spec.horizon;
  j["seed"] = spec.seed;
  auto arr = nlohmann::json::array();
  for (const auto& a : spec.archetypes) {
    arr.push_back({{"name", a.name},
                   {"peak_hour", json_number(a.peak_hour)},
                   {"width_hours", json_number(a.width_hours)},
                   {"weight", json_number(a.weight)}});
  }
  j["archetypes"] = arr;
  j["mixture_concentration"] = json_number(spec.mixture_concentration);
  j["base_level"] = json_number(spec.base_level);
  j["noise_scale"] = json_number(spec.noise_scale);
  j["peak_jitter_hours"] = json_number(spec.peak_jitter_hours);
  j["magnitude_spread"] = json_number(spec.magnitude_spread);
  j["mean_daily_energy"] = json_number(spec.mean_daily_energy);
  return j;
}

nlohmann::json to_json(const Clustering& clustering) {
  const auto members = clustering.members();
  auto clusters = nlohmann::json::array();
  for (std::size_t j = 0; j < clustering.k; ++j) {
    auto ids = nlohmann::json::array();
    for (std::size_t i : members[j]) ids.push_back(clustering.user_ids[i]);
    clusters.push_back({{"index", j},
                        {"price", json_number(clustering.prices[j])},
                        {"size", members[j].size()},
                        {"center", json_vector(clustering.centers[j])},
                        {"members", ids}});
  }
  return {{"k", clustering.k}, {"clusters", clusters}};
}

nlohmann::json to_json(const RobustClustering& clustering, const MciTable& table) {
  auto clusters = nlohmann::json::array();
  for (std::size_t c = 0; c < clustering.size(); ++c) {
    const auto& pc = clustering.clusters[c];
    auto ids = nlohmann::json::array();
    for (std::size_t u : pc.members) ids.push_back(table.user_id(u));
    clusters.push_back({{"index", c},
                        {"min_mci", json_number(pc.min_mci)},
                        {"max_mci", json_number(pc.max_mci)},
                        {"price", json_number(pc.price)},
                        {"size", pc.members.size()},
                        {"members", ids}});
  }
  return {{"rho", json_number(clustering.rho)}, {"clusters", clusters}};
}

nlohmann::json to_json(std::span<const DisguiseReport> reports) {
  auto arr = nlohmann::json::array();
  for (const auto& r : reports) {
    nlohmann::json mu = nlohmann::json::object();
    for (const auto& [target, value] : r.mu_per_target) {
      mu[std::to_string(target)] = json_number(value);
    }
    arr.push_back({{"user_id", r.user_id},
                   {"cluster", r.own_cluster},
                   {"cr", json_number(r.cr)},
                   {"best_target", r.best_target ? nlohmann::json(*r.best_target) : nullptr},
                   {"benefit", json_number(r.benefit)},
                   {"mu_per_target", mu}});
  }
  return arr;
}

nlohmann::json to_json(const SmoothnessReport& report, const Clustering& clustering) {
  auto violations = nlohmann::json::array();
  for (const auto& v : report.violations) {
    violations.push_back({{"user_id", clustering.user_ids[v.user]},
                          {"target", v.target},
                          {"gap", json_number(v.gap)}});
  }
  return {{"theta", json_number(report.theta)},
          {"delta_observed", json_number(report.delta_observed)},
          {"reachable_pairs", report.reachable_pairs},
          {"violations", violations}};
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  write_text(path, j.dump(2) + "\n");
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace robustprice
