#ifndef ADFSDCA_ADAPTIVE_HPP
#define ADFSDCA_ADAPTIVE_HPP

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <limits>

#include "adfsdca/errors.hpp"

namespace adfsdca {

/// Largest admissible step strictly below 1.
template <typename Scalar>
constexpr Scalar max_step() {
  return Scalar(1) - std::numeric_limits<Scalar>::epsilon();
}

template <typename Scalar>
Scalar clamp_step(Scalar theta) {
  return std::clamp(theta, std::numeric_limits<Scalar>::min(), max_step<Scalar>());
}

/// Sampling distribution that maximises the admissible step for residue
/// kappa: p_i proportional to sqrt(v_i gamma + n lambda^2) |kappa_i|.
/// Zero exactly where kappa is zero. Throws Converged when kappa == 0 and
/// DomainError when it is not finite.
template <typename DerivedK, typename DerivedV>
Eigen::Matrix<typename DerivedK::Scalar, Eigen::Dynamic, 1> adaptive_probabilities(
    const Eigen::MatrixBase<DerivedK> &kappa, const Eigen::MatrixBase<DerivedV> &v,
    typename DerivedK::Scalar gamma, typename DerivedK::Scalar lambda) {
  using Scalar = typename DerivedK::Scalar;
  const Scalar nl2 = static_cast<Scalar>(kappa.size()) * lambda * lambda;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> p =
      (v.array() * gamma + nl2).sqrt() * kappa.array().abs();
  const Scalar total = p.sum();
  if (!std::isfinite(static_cast<double>(total))) throw DomainError("non-finite residue");
  if (!(total > Scalar(0))) throw Converged();
  p /= total;
  return p;
}

/// Unclamped step bound
///   b n lambda^2 sum_I kappa_i^2 / sum_I (n lambda^2 + v_i gamma) kappa_i^2 / p_i
/// over the support I of kappa; pass ESO constants as v when b > 1.
/// Throws DomainError if p vanishes somewhere on I, Converged if kappa == 0.
template <typename DerivedK, typename DerivedP, typename DerivedV>
typename DerivedK::Scalar theta_bound(const Eigen::MatrixBase<DerivedK> &kappa,
                                      const Eigen::MatrixBase<DerivedP> &p,
                                      const Eigen::MatrixBase<DerivedV> &v,
                                      typename DerivedK::Scalar gamma,
                                      typename DerivedK::Scalar lambda,
                                      Eigen::Index batch = 1) {
  using Scalar = typename DerivedK::Scalar;
  const Scalar nl2 = static_cast<Scalar>(kappa.size()) * lambda * lambda;
  Scalar num(0);
  Scalar den(0);
  for (Eigen::Index i = 0; i < kappa.size(); ++i) {
    const Scalar k2 = kappa[i] * kappa[i];
    if (k2 == Scalar(0)) continue;
    if (!(p[i] > Scalar(0))) {
      throw DomainError("probability vector is not coherent with the residue");
    }
    num += k2;
    den += (nl2 + v[i] * gamma) * k2 / p[i];
  }
  if (num == Scalar(0)) throw Converged();
  return nl2 * static_cast<Scalar>(batch) * num / den;
}

/// theta_bound clamped into (0, 1).
template <typename DerivedK, typename DerivedP, typename DerivedV>
typename DerivedK::Scalar theta(const Eigen::MatrixBase<DerivedK> &kappa,
                                const Eigen::MatrixBase<DerivedP> &p,
                                const Eigen::MatrixBase<DerivedV> &v,
                                typename DerivedK::Scalar gamma,
                                typename DerivedK::Scalar lambda,
                                Eigen::Index batch = 1) {
  return clamp_step(theta_bound(kappa, p, v, gamma, lambda, batch));
}

/// Closed form of theta_bound at the adaptive probabilities:
/// b n lambda^2 sum kappa_i^2 / (sum sqrt(v_i gamma + n lambda^2) |kappa_i|)^2.
template <typename DerivedK, typename DerivedV>
typename DerivedK::Scalar optimal_theta_bound(const Eigen::MatrixBase<DerivedK> &kappa,
                                              const Eigen::MatrixBase<DerivedV> &v,
                                              typename DerivedK::Scalar gamma,
                                              typename DerivedK::Scalar lambda,
                                              Eigen::Index batch = 1) {
  using Scalar = typename DerivedK::Scalar;
  const Scalar nl2 = static_cast<Scalar>(kappa.size()) * lambda * lambda;
  const Scalar num = kappa.squaredNorm();
  if (num == Scalar(0)) throw Converged();
  const Scalar s = ((v.array() * gamma + nl2).sqrt() * kappa.array().abs()).sum();
  return nl2 * static_cast<Scalar>(batch) * num / (s * s);
}

}  // namespace adfsdca

#endif  // ADFSDCA_ADAPTIVE_HPP
