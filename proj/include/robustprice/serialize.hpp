#ifndef ROBUSTPRICE_SERIALIZE_HPP_
#define ROBUSTPRICE_SERIALIZE_HPP_

#include <filesystem>
#include <span>
#include <string>

#include "json.hpp"
#include "robustprice/kmeans.hpp"
#include "robustprice/profiles.hpp"
#include "robustprice/robust.hpp"
#include "robustprice/vulnerability.hpp"

namespace robustprice {

// Rounds to 9 significant digits so the JSON writer emits the same digits
// as format_number. Non-finite values become JSON null.
nlohmann::json json_number(double value);

// Corpus spec keys: kind ("residential" | "commercial"), n_users, horizon,
// seed, archetypes [{name, peak_hour, width_hours, weight}],
// mixture_concentration, base_level, noise_scale, peak_jitter_hours,
// magnitude_spread, mean_daily_energy. Missing keys fall back to the
// defaults of `kind`; unknown keys are rejected.
CorpusSpec corpus_spec_from_json(const nlohmann::json& j);
nlohmann::json to_json(const CorpusSpec& spec);

// {k, clusters: [{index, price, size, center, members}]}
nlohmann::json to_json(const Clustering& clustering);

// {rho, clusters: [{index, min_mci, max_mci, price, size, members}]}
nlohmann::json to_json(const RobustClustering& clustering, const MciTable& table);

// cr is null for users with no cheaper cluster.
nlohmann::json to_json(std::span<const DisguiseReport> reports);
nlohmann::json to_json(const SmoothnessReport& report, const Clustering& clustering);

// Dump with 2-space indent and a trailing newline.
void write_json(const std::filesystem::path& path, const nlohmann::json& j);
void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

}  // namespace robustprice

#endif  // ROBUSTPRICE_SERIALIZE_HPP_
