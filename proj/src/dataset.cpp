#include "colortac/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include <fmt/format.h>

#include "colortac/descriptor.hpp"
#include "colortac/errors.hpp"
#include "colortac/hashing.hpp"
#include "csv.hpp"
#include "parallel.hpp"

namespace colortac {

std::string hex64(std::uint64_t v) { return fmt::format("{:016x}", v); }

std::vector<int> Dataset::trials() const {
  std::set<int> ids;
  for (const auto& s : samples) ids.insert(s.trial);
  return {ids.begin(), ids.end()};
}

std::array<int, kClasses> Dataset::class_counts() const {
  std::array<int, kClasses> counts{};
  for (const auto& s : samples) ++counts[s.flat_class()];
  return counts;
}

namespace {

/// Per-(trial, state) count when uniform, otherwise 0.
int uniform_state_count(const std::vector<LabeledSample>& samples) {
  std::map<std::tuple<int, int, int>, int> counts;
  for (const auto& s : samples) ++counts[{s.trial, s.location, s.depth_level}];
  if (counts.empty()) return 0;
  const int first = counts.begin()->second;
  for (const auto& [key, n] : counts)
    if (n != first) return 0;
  return first;
}

}  // namespace

Dataset Dataset::subset_by_trials(const std::vector<int>& trial_ids) const {
  const std::set<int> keep(trial_ids.begin(), trial_ids.end());
  Dataset out;
  for (const auto& s : samples)
    if (keep.contains(s.trial)) out.samples.push_back(s);
  out.n_trials = static_cast<int>(out.trials().size());
  out.samples_per_state = uniform_state_count(out.samples);
  return out;
}

void SweepSpec::validate() const {
  if (n_trials < 1) throw ConfigError("sweep needs at least one trial");
  if (samples_per_state < 1) throw ConfigError("sweep needs at least one sample per state");
  if (depth_levels < 1 || depth_levels > kDepthLevels) throw ConfigError("depth levels must lie in 1..5");
  if (!(drift_sigma >= 0)) throw ConfigError("drift sigma must be non-negative");
}

std::uint64_t sample_seed(std::uint64_t master, int trial, int location, int level, int sample) {
  return derive_seed(master, {static_cast<std::uint64_t>(trial), static_cast<std::uint64_t>(location),
                              static_cast<std::uint64_t>(level), static_cast<std::uint64_t>(sample)});
}

std::uint64_t drift_seed(std::uint64_t master, int trial) {
  return derive_seed(master, {static_cast<std::uint64_t>(trial), std::uint64_t{1} << 32});
}

Dataset generate_sweep(const SensorGeometry& geometry, const ContactGrid& grid, const OpticsParams& optics,
                       const SweepSpec& spec, std::uint64_t master_seed) {
  geometry.validate();
  optics.validate();
  spec.validate();

  const int n_states = kLocations * spec.depth_levels;
  std::vector<ReceiverResponse> clean(n_states);
  for (int loc = 0; loc < kLocations; ++loc)
    for (int lv = 1; lv <= spec.depth_levels; ++lv)
      clean[loc * spec.depth_levels + lv - 1] = deformed_response(geometry, optics, ContactState::make(grid, loc, lv));

  std::vector<std::array<double, kFeatures>> drift(spec.n_trials);
  if (spec.drift_sigma > 0)
    for (int t = 0; t < spec.n_trials; ++t) {
      std::mt19937_64 rng(drift_seed(master_seed, t));
      std::normal_distribution<double> bias(0.0, spec.drift_sigma);
      for (double& b : drift[t]) b = bias(rng);
    }

  Dataset out;
  out.n_trials = spec.n_trials;
  out.samples_per_state = spec.samples_per_state;
  out.samples.resize(spec.total_samples());
  const std::size_t per_trial = static_cast<std::size_t>(n_states) * spec.samples_per_state;

  // One work item per (trial, state); outputs land at canonical offsets.
  detail::parallel_for(static_cast<std::size_t>(spec.n_trials) * n_states, [&](std::size_t item) {
    const int trial = static_cast<int>(item / n_states);
    const int state = static_cast<int>(item % n_states);
    const int loc = state / spec.depth_levels;
    const int lv = state % spec.depth_levels + 1;
    ReceiverResponse biased = clean[state];
    for (int f = 0; f < kFeatures; ++f) biased.values[f] = std::clamp(biased.values[f] + drift[trial][f], 0.0, 1.0);
    for (int k = 0; k < spec.samples_per_state; ++k) {
      const auto noisy = add_noise(biased, optics.noise_sigma, sample_seed(master_seed, trial, loc, lv, k));
      const auto features = features_from_response(noisy);
      LabeledSample& s = out.samples[trial * per_trial + static_cast<std::size_t>(state) * spec.samples_per_state + k];
      s.trial = trial;
      s.location = loc;
      s.depth_level = lv;
      std::transform(features.begin(), features.end(), s.features.begin(),
                     [](double v) { return static_cast<float>(v); });
    }
  });
  return out;
}

std::string dataset_csv_header() {
  std::string h = "trial,location,depth_level";
  for (int f = 0; f < kFeatures; ++f) h += fmt::format(",f{:02d}", f);
  return h;
}

void write_dataset_csv(std::ostream& out, const Dataset& dataset) {
  fmt::memory_buffer buf;
  fmt::format_to(std::back_inserter(buf), "{}\n", dataset_csv_header());
  for (const auto& s : dataset.samples) {
    fmt::format_to(std::back_inserter(buf), "{},{},{}", s.trial, s.location, s.depth_level);
    for (float v : s.features) fmt::format_to(std::back_inserter(buf), ",{:.9g}", v);
    buf.push_back('\n');
  }
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

Dataset read_dataset_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line)) throw ParseError("empty dataset file", 0);
  const auto header = csv::split(csv::trim_cr(line));
  if (header.size() != 3 + kFeatures)
    throw ParseError(fmt::format("header has {} columns, expected {}", header.size(), 3 + kFeatures), line_no);
  if (csv::trim_cr(line) != dataset_csv_header()) throw ParseError("unexpected header column names", line_no);

  Dataset out;
  while (std::getline(in, line)) {
    ++line_no;
    const auto row = csv::trim_cr(line);
    if (row.empty()) continue;
    const auto fields = csv::split(row);
    if (fields.size() != header.size())
      throw ParseError(fmt::format("row has {} columns, expected {}", fields.size(), header.size()), line_no);
    LabeledSample s;
    const auto trial = csv::parse_int(fields[0], line_no);
    const auto location = csv::parse_int(fields[1], line_no);
    const auto level = csv::parse_int(fields[2], line_no);
    if (trial < 0 || trial > 1'000'000)
      throw ValidationError(fmt::format("line {}: trial {} out of range", line_no, trial));
    if (location < 0 || location >= kLocations)
      throw ValidationError(fmt::format("line {}: location {} outside 0..24", line_no, location));
    if (level < 1 || level > kDepthLevels)
      throw ValidationError(fmt::format("line {}: depth_level {} outside 1..5", line_no, level));
    s.trial = static_cast<std::int32_t>(trial);
    s.location = static_cast<std::int32_t>(location);
    s.depth_level = static_cast<std::int32_t>(level);
    for (int f = 0; f < kFeatures; ++f) {
      s.features[f] = csv::parse_float(fields[3 + f], line_no);
      if (!(s.features[f] >= 0.0f && s.features[f] <= 1.0f))
        throw ValidationError(fmt::format("line {}: feature f{:02d} outside [0, 1]", line_no, f));
    }
    out.samples.push_back(s);
  }
  out.n_trials = static_cast<int>(out.trials().size());
  out.samples_per_state = uniform_state_count(out.samples);
  return out;
}

void save_dataset(const Dataset& dataset, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_dataset_csv(out, dataset);
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

Dataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  return read_dataset_csv(in);
}

std::uint64_t dataset_hash(const Dataset& dataset) {
  std::ostringstream out;
  write_dataset_csv(out, dataset);
  return fnv1a64(out.str());
}

}  // namespace colortac
