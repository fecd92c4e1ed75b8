#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "colortac/classify.hpp"
#include "colortac/config.hpp"
#include "json.hpp"

namespace colortac {

// Each cmd_* function implements one CLI subcommand. They write normal output
// to `out`, diagnostics to `err`, and return the process exit code.

struct GenerateOptions {
  std::optional<std::filesystem::path> config;
  std::uint64_t seed = 0;
  std::filesystem::path out;
};

int cmd_generate(const GenerateOptions& options, std::ostream& out, std::ostream& err);

struct TrainEvalOptions {
  std::filesystem::path dataset;
  std::optional<std::filesystem::path> config;
  /// Empty runs all four methods.
  std::vector<Method> methods;
  Mode mode = Mode::flat;
  std::uint64_t seed = 0;
  int train_trials = 20;
  int folds = 5;
  TrainOptions train;
  std::optional<std::filesystem::path> report_out;  // JSON; text goes next to it as .txt
  std::optional<std::filesystem::path> model_out;   // requires a single method
};

struct MethodResult {
  Method method = Method::knn;
  CrossValidation cv;
  double generalization_accuracy = 0.0;
  // Hierarchical mode only.
  std::optional<HierarchicalMetrics> hierarchical;
};

struct TrainEvalReport {
  Mode mode = Mode::flat;
  std::uint64_t seed = 0;
  std::string config_hash;
  std::string dataset_hash;
  std::size_t dataset_samples = 0;
  int folds = 0;
  std::vector<int> train_trials;
  std::vector<int> test_trials;
  std::vector<MethodResult> rows;

  nlohmann::json to_json() const;
  std::string to_text() const;
};

/// Split, grouped CV on the training trials, then a final fit scored on the test trials.
/// If `model_sink` is set it receives the final model of each method.
TrainEvalReport run_train_eval(const Dataset& dataset, const TrainEvalOptions& options, std::uint64_t dataset_hash,
                               std::uint64_t config_hash, nlohmann::json* model_sink = nullptr);

int cmd_train_eval(const TrainEvalOptions& options, std::ostream& out, std::ostream& err);

struct InferOptions {
  std::filesystem::path model;
  std::optional<std::filesystem::path> frame;     // PPM P6
  std::optional<std::filesystem::path> response;  // 27-column CSV
  std::optional<std::filesystem::path> config;
};

struct Inference {
  int location = 0;
  int depth_level = 1;
  double force_n = 0.0;
};

/// Predicts (location, level) with a flat or hierarchical model JSON and maps the level to force.
Inference infer_features(const nlohmann::json& model, const FeatureVector& features, const MechanicsParams& mechanics);

int cmd_infer(const InferOptions& options, std::ostream& out, std::ostream& err);

struct ExportBarsOptions {
  std::filesystem::path dataset;
  std::vector<int> locations;
  std::vector<int> levels;
  std::filesystem::path out;
};

/// Mean feature vector per requested (location, level), location-major.
/// Header `location,depth_level,f00,...,f26`; values at 9 significant digits.
int cmd_export_bars(const ExportBarsOptions& options, std::ostream& out, std::ostream& err);

struct RenderOptions {
  std::optional<std::filesystem::path> config;
  int location = 12;
  int level = 5;
  std::uint64_t seed = 0;
  double noise_sigma = 0.0;
  std::filesystem::path out;                                // PPM
  std::optional<std::filesystem::path> response_out;        // optional CSV of the response
};

int cmd_render(const RenderOptions& options, std::ostream& out, std::ostream& err);

}  // namespace colortac
