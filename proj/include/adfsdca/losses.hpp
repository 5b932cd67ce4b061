#ifndef ADFSDCA_LOSSES_HPP
#define ADFSDCA_LOSSES_HPP

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <string>
#include <string_view>

#include "adfsdca/errors.hpp"

namespace adfsdca {

enum class LossKind { Quadratic, Logistic };

inline std::string_view to_string(LossKind kind) {
  return kind == LossKind::Quadratic ? "quadratic" : "logistic";
}

inline LossKind loss_kind_from_string(std::string_view name) {
  if (name == "quadratic") return LossKind::Quadratic;
  if (name == "logistic") return LossKind::Logistic;
  throw DomainError("unknown loss '" + std::string(name) + "'");
}

/// Smooth per-sample loss phi(z; y) of a margin z = x^T w.
///
/// Both kinds have a globally Lipschitz derivative; the constant is
/// `smoothness()` (1 for the quadratic loss, 1/4 for the logistic loss).
struct LossModel {
  LossKind kind = LossKind::Quadratic;

  template <typename Scalar = double>
  Scalar smoothness() const {
    return kind == LossKind::Quadratic ? Scalar(1) : Scalar(0.25);
  }
};

namespace detail {

// log(1 + exp(t)) without overflow.
template <typename Scalar>
Scalar softplus(Scalar t) {
  using std::exp;
  using std::log1p;
  if (t > Scalar(0)) return t + log1p(exp(-t));
  return log1p(exp(t));
}

// 1 / (1 + exp(t)) without overflow.
template <typename Scalar>
Scalar inv_one_plus_exp(Scalar t) {
  using std::exp;
  if (t >= Scalar(0)) {
    const Scalar e = exp(-t);
    return e / (Scalar(1) + e);
  }
  return Scalar(1) / (Scalar(1) + exp(t));
}

template <typename Scalar>
Scalar xlogx(Scalar x) {
  using std::log;
  return x == Scalar(0) ? Scalar(0) : x * log(x);
}

}  // namespace detail

template <typename Scalar>
Scalar loss_value(const LossModel &model, Scalar margin, Scalar label) {
  if (model.kind == LossKind::Quadratic) {
    const Scalar r = margin - label;
    return Scalar(0.5) * r * r;
  }
  return detail::softplus(-label * margin);
}

template <typename Scalar>
Scalar loss_derivative(const LossModel &model, Scalar margin, Scalar label) {
  if (model.kind == LossKind::Quadratic) return margin - label;
  return -label * detail::inv_one_plus_exp(label * margin);
}

/// Evaluates phi*(-dual), the conjugate at the negated dual variable.
///
/// For the logistic loss the argument s = dual * label must lie in [0, 1];
/// values outside by more than 1e-12 raise DomainError, values within that
/// slack are snapped onto the interval.
template <typename Scalar>
Scalar conjugate_value(const LossModel &model, Scalar dual, Scalar label) {
  if (model.kind == LossKind::Quadratic) {
    return Scalar(0.5) * dual * dual - dual * label;
  }
  Scalar s = dual * label;
  constexpr double tol = 1e-12;
  if (s < Scalar(-tol) || s > Scalar(1 + tol) || std::isnan(s)) {
    throw DomainError("logistic conjugate outside [0,1]: s = " +
                      std::to_string(static_cast<double>(s)));
  }
  s = std::clamp(s, Scalar(0), Scalar(1));
  return detail::xlogx(s) + detail::xlogx(Scalar(1) - s);
}

/// L_i = v_i * Ltilde for every sample, with L = max_i L_i.
template <typename Scalar>
struct SmoothnessConstants {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> per_sample;
  Scalar max = Scalar(0);
  Scalar loss_constant = Scalar(0);
};

template <typename Derived>
SmoothnessConstants<typename Derived::Scalar> smoothness_constants(
    const LossModel &model, const Eigen::MatrixBase<Derived> &sq_norms) {
  using Scalar = typename Derived::Scalar;
  if (sq_norms.size() == 0) throw EmptyInput("smoothness_constants: no samples");
  if ((sq_norms.array() < Scalar(0)).any()) {
    throw DomainError("smoothness_constants: negative squared norm");
  }
  SmoothnessConstants<Scalar> out;
  out.loss_constant = model.smoothness<Scalar>();
  out.per_sample = sq_norms * out.loss_constant;
  out.max = out.per_sample.maxCoeff();
  return out;
}

}  // namespace adfsdca

#endif  // ADFSDCA_LOSSES_HPP
