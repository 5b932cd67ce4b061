#ifndef ADFSDCA_DATASET_HPP
#define ADFSDCA_DATASET_HPP

#include <Eigen/Core>
#include <Eigen/SparseCore>
#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "adfsdca/errors.hpp"
#include "adfsdca/losses.hpp"

namespace adfsdca {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using IndexVector = Eigen::Matrix<Eigen::Index, Eigen::Dynamic, 1>;

/// Immutable labelled sample matrix with the row/column statistics consumed
/// by the samplers and step-size rules.
///
/// Rows x_i are stored twice: CSR for per-sample access and CSC so that a
/// change of w restricted to supp(x_i) can be pushed to every affected
/// margin without touching the rest of the matrix.
template <typename Scalar_>
class Dataset {
 public:
  using Scalar = Scalar_;
  using RowMatrix = Eigen::SparseMatrix<Scalar, Eigen::RowMajor>;
  using ColMatrix = Eigen::SparseMatrix<Scalar, Eigen::ColMajor>;
  using VectorType = Vector<Scalar>;

  Dataset(RowMatrix rows, VectorType labels)
      : rows_(std::move(rows)), labels_(std::move(labels)) {
    if (rows_.rows() <= 0) throw EmptyInput("dataset has no samples");
    if (rows_.cols() <= 0) throw EmptyInput("dataset has no features");
    if (labels_.size() != rows_.rows()) {
      throw RangeError("label count " + std::to_string(labels_.size()) +
                       " does not match sample count " +
                       std::to_string(rows_.rows()));
    }
    rows_.makeCompressed();
    cols_ = ColMatrix(rows_);
    cols_.makeCompressed();

    sq_norms_.resize(rows_.rows());
    for (Eigen::Index i = 0; i < rows_.rows(); ++i) {
      Scalar acc(0);
      for (typename RowMatrix::InnerIterator it(rows_, i); it; ++it) {
        acc += it.value() * it.value();
      }
      sq_norms_[i] = acc;
    }
    feature_nnz_.resize(cols_.cols());
    for (Eigen::Index f = 0; f < cols_.cols(); ++f) {
      feature_nnz_[f] = cols_.outerIndexPtr()[f + 1] - cols_.outerIndexPtr()[f];
    }
  }

  /// Builds a dataset from a dense design matrix; exact zeros are dropped.
  template <typename Derived, typename LabelDerived>
  static Dataset from_dense(const Eigen::MatrixBase<Derived> &x,
                            const Eigen::MatrixBase<LabelDerived> &labels) {
    RowMatrix rows = x.template cast<Scalar>().sparseView(Scalar(0), Scalar(0));
    return Dataset(std::move(rows), labels.template cast<Scalar>());
  }

  Eigen::Index samples() const { return rows_.rows(); }
  Eigen::Index features() const { return rows_.cols(); }

  const RowMatrix &rows() const { return rows_; }
  const ColMatrix &cols() const { return cols_; }
  const VectorType &labels() const { return labels_; }
  /// v_i = ||x_i||^2, summed in stored index order.
  const VectorType &sq_norms() const { return sq_norms_; }
  /// |J_f|, the number of samples with a nonzero in feature f.
  const IndexVector &feature_nnz() const { return feature_nnz_; }
  Eigen::Index max_feature_nnz() const {
    return feature_nnz_.size() == 0 ? 0 : feature_nnz_.maxCoeff();
  }

 private:
  RowMatrix rows_;
  ColMatrix cols_;
  VectorType labels_;
  VectorType sq_norms_;
  IndexVector feature_nnz_;
};

/// Per-sample ESO constants for fixed-size batches of size b:
/// v'_i = min{b, max_f |J_f|} * v_i.
template <typename Scalar>
Vector<Scalar> eso_constants(const Dataset<Scalar> &ds, Eigen::Index batch) {
  if (batch < 1 || batch > ds.samples()) {
    throw RangeError("batch size " + std::to_string(batch) +
                     " outside [1, " + std::to_string(ds.samples()) + "]");
  }
  const Eigen::Index factor = std::min(batch, ds.max_feature_nnz());
  // An all-zero matrix has max |J_f| = 0; v is zero then and the factor is moot.
  return ds.sq_norms() * static_cast<Scalar>(std::max<Eigen::Index>(factor, 1));
}

/// Which convexity assumption the step-size constants are derived under.
enum class Regime { AllConvex, AverageConvex };

inline std::string_view to_string(Regime r) {
  return r == Regime::AllConvex ? "all" : "average";
}

template <typename Scalar>
struct TheoryConstants {
  Scalar lambda{};
  Regime regime = Regime::AllConvex;
  Eigen::Index samples = 0;
  Eigen::Index batch = 1;
  Scalar loss_constant{};   // Ltilde
  Scalar max_smoothness{};  // L = max_i v_i * Ltilde
  /// lambda * Ltilde (all convex) or (1/n) sum_i L_i^2 (average convex).
  Scalar gamma{};
  Scalar mean_sq_norm{};      // Q
  Scalar mean_eso_norm{};     // Q'
  Scalar variance_constant{};  // M = Q (1 + gamma Q / (lambda^2 n))
  Scalar theta_star{};
};

/// gamma for the given regime: lambda * Ltilde, or the mean of L_i^2.
template <typename Scalar>
Scalar regime_gamma(const Dataset<Scalar> &ds, const LossModel &loss,
                    Scalar lambda, Regime regime) {
  if (regime == Regime::AllConvex) return lambda * loss.smoothness<Scalar>();
  const auto smooth = smoothness_constants(loss, ds.sq_norms());
  return smooth.per_sample.squaredNorm() / static_cast<Scalar>(ds.samples());
}

/// theta* = n lambda^2 b / sum_i (v_i gamma + n lambda^2), with v the plain
/// squared norms for b = 1 and the ESO constants otherwise.
template <typename Derived>
typename Derived::Scalar theta_star(const Eigen::MatrixBase<Derived> &v,
                                    typename Derived::Scalar gamma,
                                    typename Derived::Scalar lambda,
                                    Eigen::Index batch = 1) {
  using Scalar = typename Derived::Scalar;
  const Scalar n = static_cast<Scalar>(v.size());
  const Scalar nl2 = n * lambda * lambda;
  const Scalar denom = (v.array() * gamma + nl2).sum();
  return nl2 * static_cast<Scalar>(batch) / denom;
}

template <typename Scalar>
TheoryConstants<Scalar> theory_constants(const Dataset<Scalar> &ds,
                                         const LossModel &loss, Scalar lambda,
                                         Regime regime, Eigen::Index batch = 1) {
  if (!(lambda > Scalar(0))) {
    throw RangeError("lambda must be positive");
  }
  const Vector<Scalar> vp =
      batch == 1 ? ds.sq_norms() : eso_constants(ds, batch);
  const Scalar n = static_cast<Scalar>(ds.samples());
  const auto smooth = smoothness_constants(loss, ds.sq_norms());

  TheoryConstants<Scalar> tc;
  tc.lambda = lambda;
  tc.regime = regime;
  tc.samples = ds.samples();
  tc.batch = batch;
  tc.loss_constant = smooth.loss_constant;
  tc.max_smoothness = smooth.max;
  tc.gamma = regime_gamma(ds, loss, lambda, regime);
  tc.mean_sq_norm = ds.sq_norms().sum() / n;
  tc.mean_eso_norm = vp.sum() / n;
  tc.variance_constant =
      tc.mean_sq_norm *
      (Scalar(1) + tc.gamma * tc.mean_sq_norm / (lambda * lambda * n));
  tc.theta_star = theta_star(vp, tc.gamma, lambda, batch);
  return tc;
}

/// Iteration count after which E[P(w_T) - P(w*)] <= eps is guaranteed,
/// given the initial potential `initial_potential`. Reporting only.
template <typename Scalar>
Scalar iteration_bound(const TheoryConstants<Scalar> &tc,
                       Scalar initial_potential, Scalar eps) {
  using std::log;
  const Scalar n = static_cast<Scalar>(tc.samples);
  const Scalar b = static_cast<Scalar>(tc.batch);
  const Scalar lam = tc.lambda;
  const Scalar lt = tc.loss_constant;
  const Scalar big_l = tc.max_smoothness;
  if (tc.batch == 1) {
    if (tc.regime == Regime::AllConvex) {
      return (n + lt * tc.mean_sq_norm / lam) *
             log((lam + big_l) * initial_potential / (Scalar(2) * lam * lt * eps));
    }
    return (n + tc.gamma * tc.mean_sq_norm / (lam * lam)) *
           log((lam + big_l) * initial_potential / (Scalar(2) * tc.gamma * eps));
  }
  if (tc.regime == Regime::AllConvex) {
    return (n / b + lt * tc.mean_eso_norm / (b * lam)) *
           log((lam + lt) * initial_potential / (lam * lt * eps));
  }
  return (n / b + tc.mean_eso_norm * tc.gamma / (b * lam)) *
         log((lam + lt) * initial_potential / (tc.gamma * eps));
}

}  // namespace adfsdca

#endif  // ADFSDCA_DATASET_HPP
