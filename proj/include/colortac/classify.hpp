#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "colortac/dataset.hpp"
#include "colortac/geometry.hpp"
#include "json.hpp"

namespace colortac {

enum class Method { lda, qda, svm, knn };
inline constexpr std::array<Method, 4> kAllMethods{Method::lda, Method::qda, Method::svm, Method::knn};

std::string_view to_string(Method m);
Method method_from_string(std::string_view name);

enum class Mode { flat, hierarchical };
std::string_view to_string(Mode m);
/// Accepts "flat", "hier" and "hierarchical".
Mode mode_from_string(std::string_view name);

/// Which label a sample contributes when training or scoring.
struct LabelSelector {
  enum class Kind { flat, location, depth };
  Kind kind = Kind::flat;
  int location = -1;  // only for Kind::depth

  static LabelSelector flat() { return {Kind::flat, -1}; }
  static LabelSelector by_location() { return {Kind::location, -1}; }
  /// Depth level of samples taken at `location`; other samples are skipped.
  static LabelSelector depth_at(int location) { return {Kind::depth, location}; }

  bool selects(const LabeledSample& s) const { return kind != Kind::depth || s.location == location; }
  int label(const LabeledSample& s) const {
    switch (kind) {
      case Kind::flat: return s.flat_class();
      case Kind::location: return s.location;
      case Kind::depth: return s.depth_level;
    }
    return -1;
  }
};

struct TrainOptions {
  int k = 1;               // k-NN neighbours
  double ridge = 1e-6;     // added to covariance diagonals (LDA, QDA)
  double svm_c = 1.0;
  int svm_epochs = 20;
  std::uint64_t seed = 0;  // SVM shuffling
};

/// Rows of the selected samples as doubles, with their labels.
struct LabeledMatrix {
  Eigen::MatrixXd x;
  std::vector<int> y;
};
LabeledMatrix to_matrix(const Dataset& dataset, LabelSelector selector = LabelSelector::flat());

/// A trained single-stage classifier. Immutable once built; copies share state.
///
/// Internally classes are numbered by ascending label, so every argmax or
/// vote tie resolves to the smallest label.
class FlatModel {
 public:
  struct Impl;

  FlatModel() = default;
  explicit FlatModel(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}

  Method method() const;
  const std::vector<int>& labels() const;
  int dimension() const;
  bool valid() const { return impl_ != nullptr; }

  int predict(std::span<const double> features) const;
  std::vector<int> predict(const Eigen::MatrixXd& x) const;

  /// LDA/QDA class scores (rows = samples, cols = classes in label order).
  /// For QDA a score is log N(x; mu_k, Sigma_k) + log prior_k.
  Eigen::MatrixXd discriminants(const Eigen::MatrixXd& x) const;

  std::uint64_t seed() const;
  const std::string& dataset_hash() const;
  FlatModel with_metadata(std::uint64_t seed, std::string dataset_hash) const;

  nlohmann::json to_json() const;
  static FlatModel from_json(const nlohmann::json& j);

 private:
  std::shared_ptr<const Impl> impl_;
};

FlatModel train(Method method, const Eigen::MatrixXd& x, std::span<const int> y, const TrainOptions& options = {});
FlatModel train(Method method, const Dataset& train_set, LabelSelector selector, const TrainOptions& options = {});

/// Stage 1 predicts the location; stage 2 is one depth model per location.
class HierarchicalModel {
 public:
  HierarchicalModel() = default;
  HierarchicalModel(FlatModel stage1, std::vector<FlatModel> stage2);

  const FlatModel& location_model() const { return stage1_; }
  const FlatModel& depth_model(int location) const { return stage2_.at(location); }
  std::size_t depth_model_count() const { return stage2_.size(); }
  Method method() const { return stage1_.method(); }

  LocationDepth predict(std::span<const double> features) const;
  std::vector<LocationDepth> predict(const Eigen::MatrixXd& x) const;

  nlohmann::json to_json() const;
  static HierarchicalModel from_json(const nlohmann::json& j);

 private:
  FlatModel stage1_;
  std::vector<FlatModel> stage2_;
};

HierarchicalModel train_hierarchical(const Dataset& train_set, Method method, const TrainOptions& options = {});

struct ClassMetrics {
  std::vector<int> labels;
  /// confusion[i][j]: samples of labels[i] predicted as labels[j].
  std::vector<std::vector<std::int64_t>> confusion;
  /// NaN where a label has no test samples.
  std::vector<double> per_class_accuracy;
  std::int64_t correct = 0;
  std::int64_t total = 0;
  double accuracy = 0.0;
};

/// Scores predictions against truth over `labels`. Throws DomainError if empty
/// or if a label is outside `labels`.
ClassMetrics score_predictions(std::span<const int> labels, std::span<const int> truth, std::span<const int> predicted);

ClassMetrics evaluate(const FlatModel& model, const Dataset& test_set, LabelSelector selector = LabelSelector::flat());

struct HierarchicalMetrics {
  std::int64_t total = 0;
  std::int64_t location_correct = 0;
  std::int64_t both_correct = 0;
  double location_accuracy = 0.0;
  /// Depth accuracy among samples whose location was predicted correctly.
  double depth_accuracy = 0.0;
  double combined_accuracy = 0.0;
  /// Composed predictions scored as 125 flat classes.
  ClassMetrics flat;
};

HierarchicalMetrics evaluate(const HierarchicalModel& model, const Dataset& test_set);

struct TrialSplit {
  Dataset train;
  Dataset test;
  std::vector<int> train_trials;
  std::vector<int> test_trials;
};

/// Seeded uniform choice of `n_train` whole trials for training; the rest are test.
TrialSplit split_by_trial(const Dataset& dataset, int n_train, std::uint64_t seed);

/// Shuffles `trials` with `seed` and deals them round-robin into `n_folds` groups.
std::vector<std::vector<int>> grouped_folds(std::vector<int> trials, int n_folds, std::uint64_t seed);

struct CrossValidation {
  double mean_accuracy = 0.0;
  std::vector<double> fold_accuracies;
  std::vector<std::vector<int>> fold_trials;
};

/// Trial-grouped k-fold CV. Hierarchical mode scores combined (location AND depth) accuracy.
CrossValidation cross_validate(const Dataset& train_set, Method method, int n_folds, std::uint64_t seed,
                               Mode mode = Mode::flat, const TrainOptions& options = {});

void save_model(const nlohmann::json& model, const std::filesystem::path& path);
nlohmann::json load_model_json(const std::filesystem::path& path);

}  // namespace colortac
