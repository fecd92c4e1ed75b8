#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "colortac/geometry.hpp"
#include "colortac/optics.hpp"

namespace colortac {

struct LabeledSample {
  std::array<float, kFeatures> features{};
  std::int32_t trial = 0;
  std::int32_t location = 0;
  std::int32_t depth_level = 1;

  int flat_class() const { return class_index(location, depth_level); }

  friend bool operator==(const LabeledSample&, const LabeledSample&) = default;
};

/// Labeled samples in canonical order (trial, location, level, sample).
struct Dataset {
  std::vector<LabeledSample> samples;
  int n_trials = 0;
  int samples_per_state = 0;

  std::size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }
  /// Distinct trial ids, ascending.
  std::vector<int> trials() const;
  /// Sample count per flat class (size 125).
  std::array<int, kClasses> class_counts() const;
  /// Samples whose trial is in `trial_ids`, original order preserved.
  Dataset subset_by_trials(const std::vector<int>& trial_ids) const;

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

struct SweepSpec {
  int n_trials = 27;
  int samples_per_state = 10;
  int depth_levels = kDepthLevels;
  /// Std-dev of an optional per-trial, per-channel additive bias. 0 disables drift.
  double drift_sigma = 0.0;

  void validate() const;
  std::size_t total_samples() const {
    return static_cast<std::size_t>(n_trials) * kLocations * depth_levels * samples_per_state;
  }
};

/// Noise seed of one sample: derive_seed(master, {trial, location, level, sample}).
std::uint64_t sample_seed(std::uint64_t master, int trial, int location, int level, int sample);
/// Drift seed of one trial: derive_seed(master, {trial, 2^32}); the tag keeps it apart from sample seeds.
std::uint64_t drift_seed(std::uint64_t master, int trial);

/// Simulates the calibration sweep. Noise uses `optics.noise_sigma`.
Dataset generate_sweep(const SensorGeometry& geometry, const ContactGrid& grid, const OpticsParams& optics,
                       const SweepSpec& spec, std::uint64_t master_seed);

/// CSV with header `trial,location,depth_level,f00,...,f26`, features at 9 significant digits.
void write_dataset_csv(std::ostream& out, const Dataset& dataset);
Dataset read_dataset_csv(std::istream& in);
void save_dataset(const Dataset& dataset, const std::filesystem::path& path);
Dataset load_dataset(const std::filesystem::path& path);

std::string dataset_csv_header();
/// FNV-1a of the dataset's canonical CSV text.
std::uint64_t dataset_hash(const Dataset& dataset);

}  // namespace colortac
