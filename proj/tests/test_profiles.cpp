#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "robustprice/errors.hpp"
#include "robustprice/profiles.hpp"
#include "robustprice/random.hpp"
#include "robustprice/serialize.hpp"

using namespace robustprice;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const std::string& name, const std::string& content) {
  const auto dir = fs::temp_directory_path() / "robustprice_profiles_test";
  fs::create_directories(dir);
  const auto path = dir / name;
  std::ofstream(path, std::ios::binary) << content;
  return path;
}

std::vector<std::vector<double>> normalized_rows(const Population& pop) {
  std::vector<std::vector<double>> out;
  for (const auto& p : normalize_all(pop)) out.push_back(p.weights);
  return out;
}

}  // namespace

TEST(Normalize, HandExamples) {
  const auto a = normalize({"u", {2.0, 2.0}});
  EXPECT_EQ(a.weights, (std::vector<double>{0.5, 0.5}));
  const auto b = normalize({"u", {0.0, 3.0, 1.0}});
  EXPECT_EQ(b.weights, (std::vector<double>{0.0, 0.75, 0.25}));
  EXPECT_THROW(normalize({"u", {0.0, 0.0}}), ZeroProfile);
}

TEST(Normalize, SumsToOneAndIsIdempotent) {
  Rng rng(11);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<double> l(24);
    for (auto& x : l) x = 10.0 * rng.uniform();
    const auto once = normalize({"u", l});
    double s = 0.0;
    for (double w : once.weights) s += w;
    EXPECT_NEAR(s, 1.0, 1e-12);
    const auto twice = normalize({"u", once.weights});
    for (std::size_t t = 0; t < l.size(); ++t) EXPECT_NEAR(twice.weights[t], once.weights[t], 1e-12);
  }
}

TEST(Population, ValidatesShape) {
  EXPECT_THROW(Population({{"a", {1.0, 2.0}}, {"b", {1.0}}}), ValidationError);
  EXPECT_THROW(Population({{"a", {1.0}}, {"a", {2.0}}}), ValidationError);
  EXPECT_THROW(Population({{"a", {-1.0}}}), ValidationError);
  EXPECT_NO_THROW(Population(std::vector<LoadProfile>{}));
}

TEST(Aggregate, HandExampleAndEmpty) {
  const Population pop({{"a", {1.0, 2.0}}, {"b", {3.0, 4.0}}});
  const auto load = aggregate(pop);
  EXPECT_DOUBLE_EQ(load[0], 4.0);
  EXPECT_DOUBLE_EQ(load[1], 6.0);
  EXPECT_THROW(aggregate(Population{}), EmptyPopulation);
}

TEST(Aggregate, MatchesCompensatedColumnSums) {
  Rng rng(12);
  std::vector<LoadProfile> profiles;
  std::vector<std::vector<double>> rows;
  for (int u = 0; u < 100; ++u) {
    std::vector<double> l(24);
    for (auto& x : l) x = 5.0 * rng.uniform();
    rows.push_back(l);
    profiles.push_back({"u" + std::to_string(u), l});
  }
  const auto load = aggregate(Population(profiles));
  const auto expected = oracle::column_sums(rows);
  double grand = 0.0;
  double users_total = 0.0;
  for (std::size_t t = 0; t < 24; ++t) {
    EXPECT_NEAR(load[t], expected[t], 1e-12 * expected[t]);
    grand += load[t];
  }
  for (const auto& p : profiles) users_total += p.total();
  EXPECT_NEAR(grand, users_total, 1e-9 * users_total);
}

TEST(IngestCsv, WellFormedFile) {
  const auto path = temp_file("ok.csv",
                              "user_id,t0,t1,t2\n"
                              "a,1,2,3\n"
                              "# comment\n"
                              "b,0,0.5,1e-1\n"
                              "\n"
                              "c,4,4,4\n");
  const auto r = ingest_csv(path);
  EXPECT_EQ(r.population.size(), 3u);
  EXPECT_EQ(r.population.horizon(), 3u);
  EXPECT_EQ(r.rejected_rows, 0u);
  EXPECT_DOUBLE_EQ(r.population[1].consumption[2], 0.1);
}

TEST(IngestCsv, DropsRowsWithMissingNegativeOrZeroData) {
  const auto path = temp_file("drop.csv",
                              "user_id,t0,t1\n"
                              "a,1,2\n"
                              "b,,2\n"
                              "c,-1,2\n"
                              "d,0,0\n");
  const auto r = ingest_csv(path);
  EXPECT_EQ(r.population.size(), 1u);
  EXPECT_EQ(r.rejected_rows, 2u);
  EXPECT_EQ(r.zero_rows, 1u);
}

TEST(IngestCsv, Errors) {
  EXPECT_THROW(ingest_csv("/nonexistent/file.csv"), IoError);
  EXPECT_THROW(ingest_csv(temp_file("mixed.csv", "user_id,t0,t1\na,1,2\nb,1,2,3\n")),
               InconsistentHorizon);
  try {
    ingest_csv(temp_file("bad.csv", "user_id,t0\na,1\nb,xyz\n"));
    FAIL() << "expected MalformedRow";
  } catch (const MalformedRow& e) {
    EXPECT_EQ(e.row(), 3u);
  }
  EXPECT_THROW(ingest_csv(temp_file("dup.csv", "user_id,t0\na,1\na,2\n")), MalformedRow);
  EXPECT_THROW(ingest_csv(temp_file("hdr.csv", "name,t0\na,1\n")), MalformedRow);
  CsvSchema schema;
  schema.horizon = 24;
  EXPECT_THROW(ingest_csv(temp_file("short.csv", "user_id,t0\na,1\n"), schema),
               InconsistentHorizon);
}

TEST(IngestCsv, RoundTripsWrittenCorpus) {
  const auto pop = generate_corpus(CorpusSpec::residential(50, 3));
  const auto dir = fs::temp_directory_path() / "robustprice_profiles_test";
  fs::create_directories(dir);
  const auto path = dir / "roundtrip.csv";
  write_csv(pop, path, "generated");
  const auto back = ingest_csv(path).population;
  ASSERT_EQ(back.size(), pop.size());
  for (std::size_t i = 0; i < pop.size(); ++i) {
    EXPECT_EQ(back[i].user_id, pop[i].user_id);
    for (std::size_t t = 0; t < pop.horizon(); ++t) {
      EXPECT_NEAR(back[i].consumption[t], pop[i].consumption[t],
                  1e-8 * pop[i].consumption[t] + 1e-300);
    }
  }
}

TEST(Generator, DeterministicForFixedSeed) {
  const auto spec = CorpusSpec::residential(300, 42);
  const auto a = generate_corpus(spec);
  const auto b = generate_corpus(spec);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].user_id, b[i].user_id);
    EXPECT_EQ(a[i].consumption, b[i].consumption);
  }
  const auto c = generate_corpus(CorpusSpec::residential(300, 43));
  EXPECT_NE(a[0].consumption, c[0].consumption);
}

TEST(Generator, EntriesNonNegativeAndNonZero) {
  for (const auto& spec : {CorpusSpec::residential(500, 1), CorpusSpec::commercial(500, 1)}) {
    const auto pop = generate_corpus(spec);
    EXPECT_EQ(pop.size(), 500u);
    EXPECT_EQ(pop.horizon(), 24u);
    for (const auto& p : pop.profiles()) {
      EXPECT_GT(p.total(), 0.0);
      for (double v : p.consumption) EXPECT_GE(v, 0.0);
    }
  }
}

TEST(Generator, NoNoiseSingleArchetypeGivesIdenticalUsers) {
  auto spec = CorpusSpec::residential(20, 5);
  spec.archetypes = {{"evening", 19.0, 2.0, 1.0}};
  spec.noise_scale = 0.0;
  spec.peak_jitter_hours = 0.0;
  spec.magnitude_spread = 0.0;
  const auto pop = generate_corpus(spec);
  for (const auto& p : pop.profiles()) EXPECT_EQ(p.consumption, pop[0].consumption);
}

TEST(Generator, ResidentialMoreHeterogeneousThanCommercial) {
  const auto res = generate_corpus(CorpusSpec::residential(400, 9));
  const auto com = generate_corpus(CorpusSpec::commercial(400, 9));
  EXPECT_GT(oracle::mean_pairwise_l1(normalized_rows(res)),
            oracle::mean_pairwise_l1(normalized_rows(com)));
}

TEST(Generator, LabelsFollowDominantArchetype) {
  auto spec = CorpusSpec::residential(200, 8);
  spec.mixture_concentration = 0.0;
  const auto corpus = generate_labeled_corpus(spec);
  ASSERT_EQ(corpus.labels.size(), 200u);
  for (std::size_t l : corpus.labels) EXPECT_LT(l, spec.archetypes.size());
}

TEST(Generator, RejectsInvalidSpec) {
  auto spec = CorpusSpec::residential(0, 1);
  EXPECT_THROW(spec.validate(), ValidationError);
  spec = CorpusSpec::residential(10, 1);
  spec.archetypes.clear();
  EXPECT_THROW(generate_corpus(spec), ValidationError);
}

TEST(CorpusSpecJson, RoundTripAndUnknownKeys) {
  const auto spec = CorpusSpec::commercial(77, 5);
  const auto back = corpus_spec_from_json(to_json(spec));
  EXPECT_EQ(back.n_users, 77u);
  EXPECT_EQ(back.kind, CorpusKind::kCommercial);
  EXPECT_EQ(back.archetypes.size(), spec.archetypes.size());
  EXPECT_DOUBLE_EQ(back.noise_scale, spec.noise_scale);
  EXPECT_THROW(corpus_spec_from_json({{"colour", 1}}), ValidationError);
  EXPECT_THROW(corpus_spec_from_json({{"kind", "industrial"}}), ValidationError);
}

TEST(ScaleToPeak, PreservesShape) {
  const auto scaled = scale_to_peak(SystemLoad({1.0, 2.0, 4.0}), 100.0);
  EXPECT_DOUBLE_EQ(scaled[2], 100.0);
  EXPECT_DOUBLE_EQ(scaled[0], 25.0);
  EXPECT_THROW(scale_to_peak(SystemLoad({0.0}), 1.0), ValidationError);
}
