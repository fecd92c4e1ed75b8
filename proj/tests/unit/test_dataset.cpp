#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <set>
#include <sstream>

#include "colortac/dataset.hpp"
#include "colortac/descriptor.hpp"
#include "colortac/errors.hpp"
#include "colortac/hashing.hpp"

using namespace colortac;

namespace {

Dataset sweep(double sigma, int trials = 27, int per_state = 10, std::uint64_t seed = 7, double drift = 0.0) {
  OpticsParams optics;
  optics.noise_sigma = sigma;
  SweepSpec spec;
  spec.n_trials = trials;
  spec.samples_per_state = per_state;
  spec.drift_sigma = drift;
  return generate_sweep(SensorGeometry::standard(), ContactGrid{}, optics, spec, seed);
}

const Dataset& full_noisy() {
  static const Dataset d = sweep(0.01);
  return d;
}

std::string header_with(int n_features) {
  std::string h = "trial,location,depth_level";
  for (int i = 0; i < n_features; ++i) h += (i < 10 ? ",f0" : ",f") + std::to_string(i);
  return h;
}

std::string row(int trial, int loc, int level, int n_features = kFeatures) {
  std::string r = std::to_string(trial) + "," + std::to_string(loc) + "," + std::to_string(level);
  for (int i = 0; i < n_features; ++i) r += ",0.5";
  return r;
}

}  // namespace

TEST_CASE("default sweep counts") {
  const auto& d = full_noisy();
  CHECK(d.size() == 33750);
  CHECK(d.n_trials == 27);
  CHECK(d.samples_per_state == 10);
  for (int c : d.class_counts()) CHECK(c == 270);
  CHECK(d.trials().size() == 27);
  CHECK(SweepSpec{}.total_samples() == 33750);
}

TEST_CASE("canonical ordering") {
  const auto d = sweep(0.01, 2, 3);
  std::size_t i = 0;
  for (int t = 0; t < 2; ++t)
    for (int loc = 0; loc < kLocations; ++loc)
      for (int level = 1; level <= kDepthLevels; ++level)
        for (int s = 0; s < 3; ++s, ++i) {
          CHECK(d.samples[i].trial == t);
          CHECK(d.samples[i].location == loc);
          CHECK(d.samples[i].depth_level == level);
        }
  CHECK(i == d.size());
}

TEST_CASE("noiseless samples equal the clean response") {
  const auto d = sweep(0.0, 3, 4);
  const auto g = SensorGeometry::standard();
  for (const auto& s : d.samples) {
    const auto clean =
        features_from_response(deformed_response(g, OpticsParams{}, ContactState::make({}, s.location, s.depth_level)));
    for (int i = 0; i < kFeatures; ++i) CHECK(s.features[i] == static_cast<float>(clean[i]));
  }
}

TEST_CASE("noisy per-class spread tracks sigma") {
  const auto& d = full_noisy();
  std::vector<std::array<double, kFeatures>> sum(kClasses), sq(kClasses);
  for (auto& a : sum) a.fill(0.0);
  for (auto& a : sq) a.fill(0.0);
  for (const auto& s : d.samples)
    for (int i = 0; i < kFeatures; ++i) {
      sum[s.flat_class()][i] += s.features[i];
      sq[s.flat_class()][i] += double(s.features[i]) * s.features[i];
    }
  double total = 0.0;
  for (int c = 0; c < kClasses; ++c)
    for (int i = 0; i < kFeatures; ++i) {
      const double n = 270.0;
      const double var = (sq[c][i] - sum[c][i] * sum[c][i] / n) / (n - 1);
      total += std::sqrt(std::max(var, 0.0));
    }
  const double mean_std = total / (kClasses * kFeatures);
  CHECK(mean_std > 0.8 * 0.01);
  CHECK(mean_std < 1.2 * 0.01);
}

TEST_CASE("generation is a pure function of its inputs") {
  CHECK(sweep(0.02, 2, 2, 5) == sweep(0.02, 2, 2, 5));
  CHECK_FALSE(sweep(0.02, 2, 2, 5) == sweep(0.02, 2, 2, 6));
  CHECK(sweep(0.02, 2, 2, 5, 0.01) == sweep(0.02, 2, 2, 5, 0.01));
  // Sample seeds depend on the sample's own coordinates only.
  const auto small = sweep(0.02, 2, 2, 5);
  const auto big = sweep(0.02, 3, 2, 5);
  for (std::size_t i = 0; i < small.size(); ++i) CHECK(small.samples[i] == big.samples[i]);
}

TEST_CASE("seed derivation") {
  CHECK(sample_seed(1, 0, 0, 1, 0) == derive_seed(1, {0, 0, 1, 0}));
  std::set<std::uint64_t> seeds;
  for (int t = 0; t < 3; ++t)
    for (int loc = 0; loc < kLocations; ++loc)
      for (int s = 0; s < 10; ++s) seeds.insert(sample_seed(9, t, loc, 3, s));
  CHECK(seeds.size() == 750);
  CHECK(drift_seed(9, 0) != sample_seed(9, 0, 0, 0, 0));
}

TEST_CASE("drift shifts whole trials") {
  const auto plain = sweep(0.0, 3, 1);
  const auto drifted = sweep(0.0, 3, 1, 7, 0.02);
  CHECK_FALSE(plain == drifted);
  // Within a trial the bias is shared across states, so differences to the clean data repeat.
  for (int t = 0; t < 3; ++t) {
    const std::size_t a = t * 125 + 40, b = t * 125 + 90;
    int same = 0;
    for (int i = 0; i < kFeatures; ++i) {
      const double da = drifted.samples[a].features[i] - plain.samples[a].features[i];
      const double db = drifted.samples[b].features[i] - plain.samples[b].features[i];
      if (std::abs(da - db) < 1e-6) ++same;
    }
    CHECK(same > 20);  // a few channels may clamp
  }
}

TEST_CASE("invalid sweeps") {
  SweepSpec s;
  s.n_trials = 0;
  CHECK_THROWS_AS(s.validate(), ConfigError);
  s = {};
  s.samples_per_state = 0;
  CHECK_THROWS_AS(s.validate(), ConfigError);
  s = {};
  s.drift_sigma = -1;
  CHECK_THROWS_AS(s.validate(), ConfigError);
}

TEST_CASE("CSV round trip on the full sweep") {
  const auto& d = full_noisy();
  std::stringstream ss;
  write_dataset_csv(ss, d);
  const std::string text = ss.str();
  CHECK(text.rfind(header_with(27) + "\n", 0) == 0);
  CHECK(text.back() == '\n');
  const auto back = read_dataset_csv(ss);
  CHECK(back == d);
  CHECK(dataset_hash(back) == fnv1a64(text));

  const auto path = std::filesystem::temp_directory_path() / "colortac_dataset_roundtrip.csv";
  save_dataset(d, path);
  CHECK(load_dataset(path) == d);
  std::filesystem::remove(path);
}

TEST_CASE("malformed files") {
  SUBCASE("depth level 6") {
    std::istringstream in(header_with(27) + "\n" + row(0, 3, 2) + "\n" + row(0, 3, 6) + "\n");
    CHECK_THROWS_AS(read_dataset_csv(in), ValidationError);
  }
  SUBCASE("location 25") {
    std::istringstream in(header_with(27) + "\n" + row(0, 25, 1) + "\n");
    CHECK_THROWS_AS(read_dataset_csv(in), ValidationError);
  }
  SUBCASE("26 feature columns in the header") {
    std::istringstream in(header_with(26) + "\n" + row(0, 0, 1, 26) + "\n");
    try {
      read_dataset_csv(in);
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.line() == 1);
    }
  }
  SUBCASE("short row reports its line") {
    std::istringstream in(header_with(27) + "\n" + row(0, 0, 1) + "\n" + row(0, 0, 2, 20) + "\n");
    try {
      read_dataset_csv(in);
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.line() == 3);
    }
  }
  SUBCASE("non-numeric field") {
    std::string r = row(0, 0, 1);
    r.replace(r.size() - 3, 3, "abc");
    std::istringstream in(header_with(27) + "\n" + r + "\n");
    CHECK_THROWS_AS(read_dataset_csv(in), ParseError);
  }
  SUBCASE("feature outside [0, 1]") {
    std::string r = row(0, 0, 1);
    r.replace(r.size() - 3, 3, "1.5");
    std::istringstream in(header_with(27) + "\n" + r + "\n");
    CHECK_THROWS_AS(read_dataset_csv(in), ValidationError);
  }
  SUBCASE("empty file") {
    std::istringstream in("");
    CHECK_THROWS_AS(read_dataset_csv(in), ParseError);
  }
}

TEST_CASE("subset_by_trials keeps order") {
  const auto d = sweep(0.01, 4, 1);
  const auto sub = d.subset_by_trials({3, 1});
  CHECK(sub.size() == 250);
  CHECK(sub.samples.front().trial == 1);
  CHECK(sub.samples.back().trial == 3);
  CHECK(sub.trials() == std::vector<int>{1, 3});
}
