#include "colortac/classify.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numbers>
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <variant>

#include <fmt/format.h>

#include "colortac/errors.hpp"
#include "colortac/hashing.hpp"
#include "parallel.hpp"

namespace colortac {

std::string_view to_string(Method m) {
  switch (m) {
    case Method::lda: return "lda";
    case Method::qda: return "qda";
    case Method::svm: return "svm";
    case Method::knn: return "knn";
  }
  return "?";
}

Method method_from_string(std::string_view name) {
  for (Method m : kAllMethods)
    if (to_string(m) == name) return m;
  throw DomainError("unknown method '" + std::string(name) + "' (expected lda|qda|svm|knn)");
}

std::string_view to_string(Mode m) { return m == Mode::flat ? "flat" : "hier"; }

Mode mode_from_string(std::string_view name) {
  if (name == "flat") return Mode::flat;
  if (name == "hier" || name == "hierarchical") return Mode::hierarchical;
  throw DomainError("unknown mode '" + std::string(name) + "' (expected flat|hier)");
}

LabeledMatrix to_matrix(const Dataset& dataset, LabelSelector selector) {
  std::size_t n = 0;
  for (const auto& s : dataset.samples) n += selector.selects(s);
  LabeledMatrix out{Eigen::MatrixXd(static_cast<Eigen::Index>(n), kFeatures), {}};
  out.y.reserve(n);
  Eigen::Index row = 0;
  for (const auto& s : dataset.samples) {
    if (!selector.selects(s)) continue;
    for (int f = 0; f < kFeatures; ++f) out.x(row, f) = static_cast<double>(s.features[f]);
    out.y.push_back(selector.label(s));
    ++row;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Model state

namespace {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

constexpr Eigen::Index kBlockRows = 256;

struct LdaState {
  Matrix means;       // K x p
  Matrix covariance;  // p x p, pooled and regularized
  Vector log_priors;
  // derived
  Matrix weights;     // p x K, Sigma^-1 mu_k
  Vector offsets;     // -0.5 mu_k' Sigma^-1 mu_k + log prior_k
};

struct QdaState {
  Matrix means;  // K x p
  std::vector<Matrix> covariances;
  Vector log_priors;
  // derived
  std::vector<Matrix> cholesky;  // lower factors
  Vector log_dets;
};

struct SvmState {
  std::vector<std::pair<int, int>> pairs;  // internal class indices, a < b
  Matrix weights;                          // P x p, raw feature space
  Vector bias;
};

struct KnnState {
  int k = 1;
  Matrix points;             // n x p
  std::vector<int> targets;  // internal class indices
  // derived
  Vector squared_norms;
  double max_squared_norm = 0.0;
};

}  // namespace

struct FlatModel::Impl {
  Method method = Method::knn;
  std::vector<int> labels;
  int dimension = 0;
  std::uint64_t seed = 0;
  std::string dataset_hash;
  std::variant<LdaState, QdaState, SvmState, KnnState> state;
};

namespace {

/// Cholesky of `cov`, growing the diagonal ridge until the factorization succeeds.
Eigen::LLT<Matrix> robust_llt(Matrix& cov, double ridge) {
  double extra = std::max(ridge, 1e-12);
  Eigen::LLT<Matrix> llt(cov);
  while (llt.info() != Eigen::Success) {
    cov.diagonal().array() += extra;
    extra *= 10;
    llt.compute(cov);
  }
  return llt;
}

void derive(LdaState& s) {
  Matrix cov = s.covariance;
  const auto llt = robust_llt(cov, 1e-12);
  s.covariance = cov;
  s.weights = llt.solve(s.means.transpose());
  s.offsets.resize(s.means.rows());
  for (Eigen::Index k = 0; k < s.means.rows(); ++k)
    s.offsets(k) = -0.5 * s.means.row(k).dot(s.weights.col(k)) + s.log_priors(k);
}

void derive(QdaState& s) {
  const auto K = static_cast<std::size_t>(s.means.rows());
  s.cholesky.resize(K);
  s.log_dets.resize(static_cast<Eigen::Index>(K));
  for (std::size_t k = 0; k < K; ++k) {
    auto llt = robust_llt(s.covariances[k], 1e-12);
    s.cholesky[k] = llt.matrixL();
    s.log_dets(static_cast<Eigen::Index>(k)) = 2.0 * s.cholesky[k].diagonal().array().log().sum();
  }
}

void derive(KnnState& s) {
  s.squared_norms = s.points.rowwise().squaredNorm();
  s.max_squared_norm = s.points.rows() ? s.squared_norms.maxCoeff() : 0.0;
}

int argmax_first(const Eigen::Ref<const Vector>& v) {
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < v.size(); ++i)
    if (v(i) > v(best)) best = i;
  return static_cast<int>(best);
}

Matrix lda_scores(const LdaState& s, const Matrix& x) {
  Matrix scores = x * s.weights;
  scores.rowwise() += s.offsets.transpose();
  return scores;
}

Matrix qda_scores(const QdaState& s, const Matrix& x) {
  const auto K = s.means.rows();
  const double log_norm = static_cast<double>(x.cols()) * std::log(2.0 * std::numbers::pi);
  Matrix scores(x.rows(), K);
  for (Eigen::Index k = 0; k < K; ++k) {
    Matrix centered = (x.rowwise() - s.means.row(k)).transpose();
    s.cholesky[static_cast<std::size_t>(k)].triangularView<Eigen::Lower>().solveInPlace(centered);
    scores.col(k) = (-0.5 * (centered.colwise().squaredNorm().array() + log_norm + s.log_dets(k)) + s.log_priors(k))
                        .matrix()
                        .transpose();
  }
  return scores;
}

std::vector<int> svm_predict(const SvmState& s, int n_classes, const Matrix& x) {
  std::vector<int> out(static_cast<std::size_t>(x.rows()));
  std::vector<int> votes(static_cast<std::size_t>(n_classes));
  for (Eigen::Index start = 0; start < x.rows(); start += kBlockRows) {
    const auto rows = std::min(kBlockRows, x.rows() - start);
    Matrix decision = x.middleRows(start, rows) * s.weights.transpose();
    decision.rowwise() += s.bias.transpose();
    for (Eigen::Index i = 0; i < rows; ++i) {
      std::fill(votes.begin(), votes.end(), 0);
      for (std::size_t p = 0; p < s.pairs.size(); ++p)
        ++votes[decision(i, static_cast<Eigen::Index>(p)) >= 0.0 ? s.pairs[p].first : s.pairs[p].second];
      out[static_cast<std::size_t>(start + i)] =
          static_cast<int>(std::max_element(votes.begin(), votes.end()) - votes.begin());
    }
  }
  return out;
}

/// Exact k-NN. A GEMM pass bounds the candidates; they are then rescored with
/// the direct squared distance, so results match a brute-force scan.
std::vector<int> knn_predict(const KnnState& s, int n_classes, const Matrix& x) {
  const auto n = s.points.rows();
  const auto p = s.points.cols();
  const Eigen::Index k = std::min<Eigen::Index>(s.k, n);
  std::vector<int> out(static_cast<std::size_t>(x.rows()));
  std::vector<double> row_copy;
  struct Candidate {
    double dist;
    int target;
    Eigen::Index index;
  };
  std::vector<Candidate> candidates;
  std::vector<int> votes(static_cast<std::size_t>(n_classes));

  for (Eigen::Index start = 0; start < x.rows(); start += kBlockRows) {
    const auto rows = std::min(kBlockRows, x.rows() - start);
    const Matrix q = x.middleRows(start, rows);
    // One column per query keeps each scan contiguous.
    Matrix approx = -2.0 * (s.points * q.transpose());
    approx.colwise() += s.squared_norms;
    for (Eigen::Index i = 0; i < rows; ++i) {
      const auto column = approx.col(i);
      const double qn = q.row(i).squaredNorm();
      // Rounding error of |q|^2 + |x|^2 - 2 q.x is far below this bound.
      const double tol = 1e-10 * (qn + s.max_squared_norm) + 1e-300;
      double kth;
      if (k == 1) {
        kth = column.minCoeff();
      } else {
        row_copy.assign(column.data(), column.data() + n);
        std::nth_element(row_copy.begin(), row_copy.begin() + (k - 1), row_copy.end());
        kth = row_copy[static_cast<std::size_t>(k - 1)];
      }
      candidates.clear();
      const double cutoff = kth + 2 * tol;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (column(j) > cutoff) continue;
        double d = 0.0;
        for (Eigen::Index f = 0; f < p; ++f) {
          const double diff = q(i, f) - s.points(j, f);
          d += diff * diff;
        }
        candidates.push_back({d, s.targets[static_cast<std::size_t>(j)], j});
      }
      std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
        if (a.dist != b.dist) return a.dist < b.dist;
        if (a.target != b.target) return a.target < b.target;
        return a.index < b.index;
      });
      std::fill(votes.begin(), votes.end(), 0);
      for (Eigen::Index c = 0; c < k; ++c) ++votes[static_cast<std::size_t>(candidates[static_cast<std::size_t>(c)].target)];
      out[static_cast<std::size_t>(start + i)] =
          static_cast<int>(std::max_element(votes.begin(), votes.end()) - votes.begin());
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Training

struct Encoded {
  std::vector<int> labels;             // ascending
  std::vector<int> targets;            // internal index per sample
  std::vector<std::vector<int>> rows;  // sample rows per class
};

Encoded encode_labels(std::span<const int> y) {
  Encoded e;
  const std::set<int> distinct(y.begin(), y.end());
  e.labels.assign(distinct.begin(), distinct.end());
  std::map<int, int> index;
  for (std::size_t i = 0; i < e.labels.size(); ++i) index[e.labels[i]] = static_cast<int>(i);
  e.rows.resize(e.labels.size());
  e.targets.reserve(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    const int t = index[y[i]];
    e.targets.push_back(t);
    e.rows[static_cast<std::size_t>(t)].push_back(static_cast<int>(i));
  }
  for (std::size_t k = 0; k < e.rows.size(); ++k)
    if (e.rows[k].size() < 2)
      throw TrainingError(fmt::format("class {} has {} sample(s); at least 2 required", e.labels[k], e.rows[k].size()));
  return e;
}

Matrix class_means(const Matrix& x, const Encoded& e) {
  Matrix means = Matrix::Zero(static_cast<Eigen::Index>(e.labels.size()), x.cols());
  for (std::size_t k = 0; k < e.rows.size(); ++k) {
    for (int r : e.rows[k]) means.row(static_cast<Eigen::Index>(k)) += x.row(r);
    means.row(static_cast<Eigen::Index>(k)) /= static_cast<double>(e.rows[k].size());
  }
  return means;
}

Vector log_priors(const Encoded& e, std::size_t n) {
  Vector lp(static_cast<Eigen::Index>(e.labels.size()));
  for (std::size_t k = 0; k < e.rows.size(); ++k)
    lp(static_cast<Eigen::Index>(k)) = std::log(static_cast<double>(e.rows[k].size()) / static_cast<double>(n));
  return lp;
}

Matrix class_scatter(const Matrix& x, const std::vector<int>& rows, const Eigen::Ref<const Eigen::RowVectorXd>& mean) {
  Matrix centered(static_cast<Eigen::Index>(rows.size()), x.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) centered.row(static_cast<Eigen::Index>(i)) = x.row(rows[i]) - mean;
  return centered.transpose() * centered;
}

LdaState train_lda(const Matrix& x, const Encoded& e, const TrainOptions& opt) {
  LdaState s;
  s.means = class_means(x, e);
  s.log_priors = log_priors(e, static_cast<std::size_t>(x.rows()));
  Matrix pooled = Matrix::Zero(x.cols(), x.cols());
  for (std::size_t k = 0; k < e.rows.size(); ++k) pooled += class_scatter(x, e.rows[k], s.means.row(static_cast<Eigen::Index>(k)));
  pooled /= static_cast<double>(x.rows() - static_cast<Eigen::Index>(e.labels.size()));
  pooled.diagonal().array() += opt.ridge;
  s.covariance = pooled;
  derive(s);
  return s;
}

QdaState train_qda(const Matrix& x, const Encoded& e, const TrainOptions& opt) {
  QdaState s;
  s.means = class_means(x, e);
  s.log_priors = log_priors(e, static_cast<std::size_t>(x.rows()));
  s.covariances.resize(e.labels.size());
  for (std::size_t k = 0; k < e.rows.size(); ++k) {
    Matrix cov = class_scatter(x, e.rows[k], s.means.row(static_cast<Eigen::Index>(k)));
    cov /= static_cast<double>(e.rows[k].size() - 1);
    cov.diagonal().array() += opt.ridge;
    s.covariances[k] = std::move(cov);
  }
  derive(s);
  return s;
}

/// Pegasos on z-scored features with an appended constant for the bias.
/// Returns the hyperplane mapped back to raw feature space (p weights, then bias).
Vector pegasos_pair(const Matrix& x, const std::vector<int>& pos, const std::vector<int>& neg, const TrainOptions& opt,
                    std::uint64_t seed) {
  const auto p = x.cols();
  const auto n = static_cast<Eigen::Index>(pos.size() + neg.size());
  Matrix z(p + 1, n);  // one sample per column
  Vector y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const bool is_pos = i < static_cast<Eigen::Index>(pos.size());
    const int row = is_pos ? pos[static_cast<std::size_t>(i)] : neg[static_cast<std::size_t>(i) - pos.size()];
    z.col(i).head(p) = x.row(row).transpose();
    y(i) = is_pos ? 1.0 : -1.0;
  }
  const Vector mean = z.topRows(p).rowwise().mean();
  Vector scale = ((z.topRows(p).colwise() - mean).rowwise().squaredNorm() / static_cast<double>(n)).cwiseSqrt();
  for (Eigen::Index j = 0; j < p; ++j)
    if (!(scale(j) > 1e-12)) scale(j) = 1.0;
  z.topRows(p) = (z.topRows(p).colwise() - mean).array().colwise() / scale.array();
  z.row(p).setOnes();

  const double lambda = 1.0 / (opt.svm_c * static_cast<double>(n));
  const double radius2 = 1.0 / lambda;
  Vector v = Vector::Zero(p + 1);
  double w_scale = 1.0;  // w = w_scale * v
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::uint64_t t = 0;
  for (int epoch = 0; epoch < opt.svm_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (Eigen::Index i : order) {
      ++t;
      const double eta = 1.0 / (lambda * static_cast<double>(t));
      const double margin = y(i) * w_scale * v.dot(z.col(i));
      if (t == 1) {
        v.setZero();
        w_scale = 1.0;
      } else {
        w_scale *= 1.0 - 1.0 / static_cast<double>(t);
      }
      if (margin < 1.0) {
        v.noalias() += (eta * y(i) / w_scale) * z.col(i);
        const double norm2 = w_scale * w_scale * v.squaredNorm();
        if (norm2 > radius2) w_scale *= std::sqrt(radius2 / norm2);
      }
    }
  }
  const Vector w = w_scale * v;
  Vector raw(p + 1);
  raw.head(p) = w.head(p).array() / scale.array();
  raw(p) = w(p) - raw.head(p).dot(mean);
  return raw;
}

SvmState train_svm(const Matrix& x, const Encoded& e, const TrainOptions& opt) {
  if (opt.svm_epochs < 1 || !(opt.svm_c > 0)) throw TrainingError("SVM needs C > 0 and at least one epoch");
  SvmState s;
  const int K = static_cast<int>(e.labels.size());
  for (int a = 0; a < K; ++a)
    for (int b = a + 1; b < K; ++b) s.pairs.emplace_back(a, b);
  s.weights.resize(static_cast<Eigen::Index>(s.pairs.size()), x.cols());
  s.bias.resize(static_cast<Eigen::Index>(s.pairs.size()));
  detail::parallel_for(s.pairs.size(), [&](std::size_t idx) {
    const auto [a, b] = s.pairs[idx];
    const auto seed = derive_seed(opt.seed, {static_cast<std::uint64_t>(e.labels[static_cast<std::size_t>(a)]),
                                             static_cast<std::uint64_t>(e.labels[static_cast<std::size_t>(b)])});
    const Vector h = pegasos_pair(x, e.rows[static_cast<std::size_t>(a)], e.rows[static_cast<std::size_t>(b)], opt, seed);
    s.weights.row(static_cast<Eigen::Index>(idx)) = h.head(x.cols()).transpose();
    s.bias(static_cast<Eigen::Index>(idx)) = h(x.cols());
  });
  return s;
}

KnnState train_knn(const Matrix& x, const Encoded& e, const TrainOptions& opt) {
  if (opt.k < 1) throw TrainingError("k-NN needs k >= 1");
  KnnState s;
  s.k = opt.k;
  s.points = x;
  s.targets = e.targets;
  derive(s);
  return s;
}

const FlatModel::Impl& require(const std::shared_ptr<const FlatModel::Impl>& impl) {
  if (!impl) throw DomainError("model is not trained");
  return *impl;
}

}  // namespace

FlatModel train(Method method, const Eigen::MatrixXd& x, std::span<const int> y, const TrainOptions& options) {
  if (x.rows() != static_cast<Eigen::Index>(y.size())) throw DomainError("feature rows and labels differ in length");
  if (x.cols() < 1) throw DomainError("feature dimension must be positive");
  const Encoded e = encode_labels(y);
  auto impl = std::make_shared<FlatModel::Impl>();
  impl->method = method;
  impl->labels = e.labels;
  impl->dimension = static_cast<int>(x.cols());
  impl->seed = options.seed;
  switch (method) {
    case Method::lda: impl->state = train_lda(x, e, options); break;
    case Method::qda: impl->state = train_qda(x, e, options); break;
    case Method::svm: impl->state = train_svm(x, e, options); break;
    case Method::knn: impl->state = train_knn(x, e, options); break;
  }
  return FlatModel(std::move(impl));
}

FlatModel train(Method method, const Dataset& train_set, LabelSelector selector, const TrainOptions& options) {
  const auto data = to_matrix(train_set, selector);
  if (data.y.empty()) throw TrainingError("no training samples selected");
  return train(method, data.x, data.y, options);
}

Method FlatModel::method() const { return require(impl_).method; }
const std::vector<int>& FlatModel::labels() const { return require(impl_).labels; }
int FlatModel::dimension() const { return require(impl_).dimension; }
std::uint64_t FlatModel::seed() const { return require(impl_).seed; }
const std::string& FlatModel::dataset_hash() const { return require(impl_).dataset_hash; }

FlatModel FlatModel::with_metadata(std::uint64_t seed, std::string dataset_hash) const {
  auto copy = std::make_shared<Impl>(require(impl_));
  copy->seed = seed;
  copy->dataset_hash = std::move(dataset_hash);
  return FlatModel(std::move(copy));
}

std::vector<int> FlatModel::predict(const Eigen::MatrixXd& x) const {
  const Impl& m = require(impl_);
  if (x.cols() != m.dimension)
    throw DomainError(fmt::format("feature dimension {} does not match model dimension {}", x.cols(), m.dimension));
  const int K = static_cast<int>(m.labels.size());
  std::vector<int> internal;
  std::visit(
      [&](const auto& s) {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, LdaState> || std::is_same_v<S, QdaState>) {
          internal.resize(static_cast<std::size_t>(x.rows()));
          for (Eigen::Index start = 0; start < x.rows(); start += kBlockRows) {
            const auto rows = std::min(kBlockRows, x.rows() - start);
            Matrix scores;
            if constexpr (std::is_same_v<S, LdaState>)
              scores = lda_scores(s, x.middleRows(start, rows));
            else
              scores = qda_scores(s, x.middleRows(start, rows));
            for (Eigen::Index i = 0; i < rows; ++i)
              internal[static_cast<std::size_t>(start + i)] = argmax_first(scores.row(i).transpose());
          }
        } else if constexpr (std::is_same_v<S, SvmState>) {
          internal = svm_predict(s, K, x);
        } else {
          internal = knn_predict(s, K, x);
        }
      },
      m.state);
  std::vector<int> out(internal.size());
  std::transform(internal.begin(), internal.end(), out.begin(),
                 [&](int t) { return m.labels[static_cast<std::size_t>(t)]; });
  return out;
}

int FlatModel::predict(std::span<const double> features) const {
  const Eigen::Map<const Eigen::RowVectorXd> row(features.data(), static_cast<Eigen::Index>(features.size()));
  return predict(Matrix(row)).front();
}

Eigen::MatrixXd FlatModel::discriminants(const Eigen::MatrixXd& x) const {
  const Impl& m = require(impl_);
  if (x.cols() != m.dimension) throw DomainError("feature dimension does not match model dimension");
  if (const auto* lda = std::get_if<LdaState>(&m.state)) return lda_scores(*lda, x);
  if (const auto* qda = std::get_if<QdaState>(&m.state)) return qda_scores(*qda, x);
  throw DomainError("discriminants are defined for LDA and QDA models only");
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

using nlohmann::json;

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const json& j, Eigen::Index cols) {
  Matrix m(static_cast<Eigen::Index>(j.size()), cols);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    const auto& row = j.at(static_cast<std::size_t>(i));
    if (static_cast<Eigen::Index>(row.size()) != cols) throw ParseError("model matrix row has wrong length", 0);
    for (Eigen::Index c = 0; c < cols; ++c) m(i, c) = row.at(static_cast<std::size_t>(c)).get<double>();
  }
  return m;
}

json vector_to_json(const Vector& v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

Vector vector_from_json(const json& j) {
  const auto values = j.get<std::vector<double>>();
  return Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

}  // namespace

nlohmann::json FlatModel::to_json() const {
  const Impl& m = require(impl_);
  json params;
  std::visit(
      [&](const auto& s) {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, LdaState>) {
          params = {{"means", matrix_to_json(s.means)},
                    {"covariance", matrix_to_json(s.covariance)},
                    {"log_priors", vector_to_json(s.log_priors)}};
        } else if constexpr (std::is_same_v<S, QdaState>) {
          json covs = json::array();
          for (const auto& c : s.covariances) covs.push_back(matrix_to_json(c));
          params = {{"means", matrix_to_json(s.means)}, {"covariances", covs}, {"log_priors", vector_to_json(s.log_priors)}};
        } else if constexpr (std::is_same_v<S, SvmState>) {
          params = {{"weights", matrix_to_json(s.weights)}, {"bias", vector_to_json(s.bias)}};
        } else {
          params = {{"k", s.k}, {"points", matrix_to_json(s.points)}, {"targets", s.targets}};
        }
      },
      m.state);
  return {{"format", "colortac-model"},
          {"kind", "flat"},
          {"method", to_string(m.method)},
          {"labels", m.labels},
          {"dimension", m.dimension},
          {"params", std::move(params)},
          {"metadata", {{"seed", m.seed}, {"dataset_hash", m.dataset_hash}}}};
}

FlatModel FlatModel::from_json(const nlohmann::json& j) {
  try {
    if (j.at("kind").get<std::string>() != "flat") throw ParseError("not a flat model", 0);
    auto impl = std::make_shared<Impl>();
    impl->method = method_from_string(j.at("method").get<std::string>());
    impl->labels = j.at("labels").get<std::vector<int>>();
    impl->dimension = j.at("dimension").get<int>();
    impl->seed = j.at("metadata").at("seed").get<std::uint64_t>();
    impl->dataset_hash = j.at("metadata").at("dataset_hash").get<std::string>();
    const auto& p = j.at("params");
    const auto dim = static_cast<Eigen::Index>(impl->dimension);
    const auto K = static_cast<Eigen::Index>(impl->labels.size());
    if (K < 1 || !std::is_sorted(impl->labels.begin(), impl->labels.end())) throw ParseError("invalid label space", 0);
    switch (impl->method) {
      case Method::lda: {
        LdaState s;
        s.means = matrix_from_json(p.at("means"), dim);
        s.covariance = matrix_from_json(p.at("covariance"), dim);
        s.log_priors = vector_from_json(p.at("log_priors"));
        if (s.means.rows() != K || s.covariance.rows() != dim || s.log_priors.size() != K)
          throw ParseError("LDA parameter shapes do not match", 0);
        derive(s);
        impl->state = std::move(s);
        break;
      }
      case Method::qda: {
        QdaState s;
        s.means = matrix_from_json(p.at("means"), dim);
        for (const auto& c : p.at("covariances")) s.covariances.push_back(matrix_from_json(c, dim));
        s.log_priors = vector_from_json(p.at("log_priors"));
        if (s.means.rows() != K || static_cast<Eigen::Index>(s.covariances.size()) != K || s.log_priors.size() != K)
          throw ParseError("QDA parameter shapes do not match", 0);
        for (const auto& c : s.covariances)
          if (c.rows() != dim) throw ParseError("QDA covariance has wrong shape", 0);
        derive(s);
        impl->state = std::move(s);
        break;
      }
      case Method::svm: {
        SvmState s;
        for (int a = 0; a < K; ++a)
          for (int b = a + 1; b < K; ++b) s.pairs.emplace_back(a, b);
        s.weights = matrix_from_json(p.at("weights"), dim);
        s.bias = vector_from_json(p.at("bias"));
        if (s.weights.rows() != static_cast<Eigen::Index>(s.pairs.size()) || s.bias.size() != s.weights.rows())
          throw ParseError("SVM parameter shapes do not match", 0);
        impl->state = std::move(s);
        break;
      }
      case Method::knn: {
        KnnState s;
        s.k = p.at("k").get<int>();
        s.points = matrix_from_json(p.at("points"), dim);
        s.targets = p.at("targets").get<std::vector<int>>();
        if (static_cast<Eigen::Index>(s.targets.size()) != s.points.rows() || s.k < 1)
          throw ParseError("k-NN parameter shapes do not match", 0);
        for (int t : s.targets)
          if (t < 0 || t >= K) throw ParseError("k-NN target outside label space", 0);
        derive(s);
        impl->state = std::move(s);
        break;
      }
    }
    return FlatModel(std::move(impl));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed model JSON: ") + e.what(), 0);
  } catch (const DomainError& e) {
    throw ParseError(e.what(), 0);
  }
}

// ---------------------------------------------------------------------------
// Hierarchical model

HierarchicalModel::HierarchicalModel(FlatModel stage1, std::vector<FlatModel> stage2)
    : stage1_(std::move(stage1)), stage2_(std::move(stage2)) {
  if (stage2_.size() != static_cast<std::size_t>(kLocations))
    throw DomainError("hierarchical model needs exactly one depth model per location");
  if (stage1_.labels().size() != static_cast<std::size_t>(kLocations))
    throw DomainError("location model must cover all 25 locations");
}

std::vector<LocationDepth> HierarchicalModel::predict(const Eigen::MatrixXd& x) const {
  const auto locations = stage1_.predict(x);
  std::vector<std::vector<Eigen::Index>> groups(kLocations);
  for (std::size_t i = 0; i < locations.size(); ++i)
    groups[static_cast<std::size_t>(locations[i])].push_back(static_cast<Eigen::Index>(i));
  std::vector<LocationDepth> out(locations.size());
  for (int loc = 0; loc < kLocations; ++loc) {
    const auto& rows = groups[static_cast<std::size_t>(loc)];
    if (rows.empty()) continue;
    Matrix sub(static_cast<Eigen::Index>(rows.size()), x.cols());
    for (std::size_t r = 0; r < rows.size(); ++r) sub.row(static_cast<Eigen::Index>(r)) = x.row(rows[r]);
    const auto depths = stage2_[static_cast<std::size_t>(loc)].predict(sub);
    for (std::size_t r = 0; r < rows.size(); ++r) out[static_cast<std::size_t>(rows[r])] = {loc, depths[r]};
  }
  return out;
}

LocationDepth HierarchicalModel::predict(std::span<const double> features) const {
  const Eigen::Map<const Eigen::RowVectorXd> row(features.data(), static_cast<Eigen::Index>(features.size()));
  return predict(Matrix(row)).front();
}

nlohmann::json HierarchicalModel::to_json() const {
  json stage2 = json::array();
  for (const auto& m : stage2_) stage2.push_back(m.to_json());
  return {{"format", "colortac-model"},
          {"kind", "hierarchical"},
          {"method", to_string(method())},
          {"stage1", stage1_.to_json()},
          {"stage2", std::move(stage2)}};
}

HierarchicalModel HierarchicalModel::from_json(const nlohmann::json& j) {
  try {
    if (j.at("kind").get<std::string>() != "hierarchical") throw ParseError("not a hierarchical model", 0);
    std::vector<FlatModel> stage2;
    for (const auto& m : j.at("stage2")) stage2.push_back(FlatModel::from_json(m));
    return HierarchicalModel(FlatModel::from_json(j.at("stage1")), std::move(stage2));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed model JSON: ") + e.what(), 0);
  } catch (const DomainError& e) {
    throw ParseError(e.what(), 0);
  }
}

HierarchicalModel train_hierarchical(const Dataset& train_set, Method method, const TrainOptions& options) {
  std::array<std::array<bool, kDepthLevels>, kLocations> seen{};
  for (const auto& s : train_set.samples) seen[static_cast<std::size_t>(s.location)][static_cast<std::size_t>(s.depth_level - 1)] = true;
  for (int loc = 0; loc < kLocations; ++loc)
    for (int lv = 1; lv <= kDepthLevels; ++lv)
      if (!seen[static_cast<std::size_t>(loc)][static_cast<std::size_t>(lv - 1)])
        throw TrainingError(fmt::format("training set lacks location {} at depth level {}", loc, lv));

  FlatModel stage1 = train(method, train_set, LabelSelector::by_location(), options);
  std::vector<FlatModel> stage2(kLocations);
  for (int loc = 0; loc < kLocations; ++loc)
    stage2[static_cast<std::size_t>(loc)] = train(method, train_set, LabelSelector::depth_at(loc), options);
  return HierarchicalModel(std::move(stage1), std::move(stage2));
}

// ---------------------------------------------------------------------------
// Evaluation

ClassMetrics score_predictions(std::span<const int> labels, std::span<const int> truth, std::span<const int> predicted) {
  if (truth.empty()) throw DomainError("cannot evaluate on an empty test set");
  if (truth.size() != predicted.size()) throw DomainError("truth and predictions differ in length");
  ClassMetrics m;
  m.labels.assign(labels.begin(), labels.end());
  std::map<int, std::size_t> index;
  for (std::size_t i = 0; i < m.labels.size(); ++i) index[m.labels[i]] = i;
  const auto lookup = [&](int label) {
    const auto it = index.find(label);
    if (it == index.end()) throw DomainError(fmt::format("label {} outside the model's label space", label));
    return it->second;
  };
  m.confusion.assign(m.labels.size(), std::vector<std::int64_t>(m.labels.size(), 0));
  for (std::size_t i = 0; i < truth.size(); ++i) ++m.confusion[lookup(truth[i])][lookup(predicted[i])];
  m.total = static_cast<std::int64_t>(truth.size());
  m.per_class_accuracy.resize(m.labels.size());
  for (std::size_t k = 0; k < m.labels.size(); ++k) {
    const auto row_total = std::accumulate(m.confusion[k].begin(), m.confusion[k].end(), std::int64_t{0});
    m.correct += m.confusion[k][k];
    m.per_class_accuracy[k] = row_total ? static_cast<double>(m.confusion[k][k]) / static_cast<double>(row_total)
                                        : std::numeric_limits<double>::quiet_NaN();
  }
  m.accuracy = static_cast<double>(m.correct) / static_cast<double>(m.total);
  return m;
}

ClassMetrics evaluate(const FlatModel& model, const Dataset& test_set, LabelSelector selector) {
  const auto data = to_matrix(test_set, selector);
  if (data.y.empty()) throw DomainError("cannot evaluate on an empty test set");
  const auto predicted = model.predict(data.x);
  return score_predictions(model.labels(), data.y, predicted);
}

HierarchicalMetrics evaluate(const HierarchicalModel& model, const Dataset& test_set) {
  if (test_set.empty()) throw DomainError("cannot evaluate on an empty test set");
  const auto data = to_matrix(test_set, LabelSelector::flat());
  const auto predicted = model.predict(data.x);
  HierarchicalMetrics m;
  std::vector<int> flat_pred(predicted.size());
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const auto truth = split_class_index(data.y[i]);
    const bool loc_ok = predicted[i].location == truth.location;
    m.location_correct += loc_ok;
    m.both_correct += loc_ok && predicted[i].depth_level == truth.depth_level;
    flat_pred[i] = class_index(predicted[i].location, predicted[i].depth_level);
  }
  m.total = static_cast<std::int64_t>(predicted.size());
  m.location_accuracy = static_cast<double>(m.location_correct) / static_cast<double>(m.total);
  m.combined_accuracy = static_cast<double>(m.both_correct) / static_cast<double>(m.total);
  m.depth_accuracy =
      m.location_correct ? static_cast<double>(m.both_correct) / static_cast<double>(m.location_correct) : 0.0;
  std::vector<int> all_classes(kClasses);
  std::iota(all_classes.begin(), all_classes.end(), 0);
  m.flat = score_predictions(all_classes, data.y, flat_pred);
  return m;
}

// ---------------------------------------------------------------------------
// Splits and cross-validation

TrialSplit split_by_trial(const Dataset& dataset, int n_train, std::uint64_t seed) {
  auto trials = dataset.trials();
  if (n_train < 1 || n_train >= static_cast<int>(trials.size()))
    throw DomainError(fmt::format("n_train = {} must lie in [1, {})", n_train, trials.size()));
  std::mt19937_64 rng(derive_seed(seed, {0x73706c6974ULL}));  // "split"
  std::shuffle(trials.begin(), trials.end(), rng);
  TrialSplit out;
  out.train_trials.assign(trials.begin(), trials.begin() + n_train);
  out.test_trials.assign(trials.begin() + n_train, trials.end());
  std::sort(out.train_trials.begin(), out.train_trials.end());
  std::sort(out.test_trials.begin(), out.test_trials.end());
  out.train = dataset.subset_by_trials(out.train_trials);
  out.test = dataset.subset_by_trials(out.test_trials);
  return out;
}

std::vector<std::vector<int>> grouped_folds(std::vector<int> trials, int n_folds, std::uint64_t seed) {
  if (n_folds < 2) throw DomainError("cross-validation needs at least 2 folds");
  if (n_folds > static_cast<int>(trials.size()))
    throw DomainError(fmt::format("{} folds requested but only {} trials available", n_folds, trials.size()));
  std::sort(trials.begin(), trials.end());
  std::mt19937_64 rng(derive_seed(seed, {0x666f6c6473ULL}));  // "folds"
  std::shuffle(trials.begin(), trials.end(), rng);
  std::vector<std::vector<int>> folds(static_cast<std::size_t>(n_folds));
  for (std::size_t i = 0; i < trials.size(); ++i) folds[i % folds.size()].push_back(trials[i]);
  for (auto& f : folds) std::sort(f.begin(), f.end());
  return folds;
}

CrossValidation cross_validate(const Dataset& train_set, Method method, int n_folds, std::uint64_t seed, Mode mode,
                               const TrainOptions& options) {
  CrossValidation cv;
  cv.fold_trials = grouped_folds(train_set.trials(), n_folds, seed);
  const auto all = train_set.trials();
  for (const auto& held_out : cv.fold_trials) {
    std::vector<int> fit_trials;
    std::set_difference(all.begin(), all.end(), held_out.begin(), held_out.end(), std::back_inserter(fit_trials));
    const Dataset fit = train_set.subset_by_trials(fit_trials);
    const Dataset val = train_set.subset_by_trials(held_out);
    double acc;
    if (mode == Mode::flat)
      acc = evaluate(train(method, fit, LabelSelector::flat(), options), val).accuracy;
    else
      acc = evaluate(train_hierarchical(fit, method, options), val).combined_accuracy;
    cv.fold_accuracies.push_back(acc);
  }
  cv.mean_accuracy = std::accumulate(cv.fold_accuracies.begin(), cv.fold_accuracies.end(), 0.0) /
                     static_cast<double>(cv.fold_accuracies.size());
  return cv;
}

void save_model(const nlohmann::json& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << model.dump() << '\n';
}

nlohmann::json load_model_json(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed model JSON: ") + e.what(), 0);
  }
}

}  // namespace colortac
