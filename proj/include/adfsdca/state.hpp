#ifndef ADFSDCA_STATE_HPP
#define ADFSDCA_STATE_HPP

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "adfsdca/dataset.hpp"
#include "adfsdca/errors.hpp"
#include "adfsdca/losses.hpp"

namespace adfsdca {

/// The regularised ERM instance: data, loss and regularisation strength.
template <typename Scalar>
struct Problem {
  const Dataset<Scalar> &data;
  LossModel loss;
  Scalar lambda;

  Problem(const Dataset<Scalar> &ds, LossModel l, Scalar lam)
      : data(ds), loss(l), lambda(lam) {
    if (!(lambda > Scalar(0))) throw RangeError("lambda must be positive");
    if (loss.kind == LossKind::Logistic) {
      for (Eigen::Index i = 0; i < ds.samples(); ++i) {
        const Scalar y = ds.labels()[i];
        if (y != Scalar(1) && y != Scalar(-1)) {
          throw RangeError("logistic loss needs labels in {-1, +1}, sample " +
                           std::to_string(i) + " has " + std::to_string(static_cast<double>(y)));
        }
      }
    }
  }

  Eigen::Index samples() const { return data.samples(); }
  Eigen::Index features() const { return data.features(); }
};

/// Iterate of a dual-free run.
///
/// w always equals (1/(lambda n)) sum_i alpha_i x_i, margin[i] caches
/// x_i^T w and residue[i] = alpha_i + phi'(margin[i]); the update routines
/// keep all three consistent.
template <typename Scalar>
struct SolverState {
  Vector<Scalar> w;
  Vector<Scalar> alpha;
  Vector<Scalar> margin;
  Vector<Scalar> residue;
  std::uint64_t iteration = 0;
  /// Passes over the data, t/n for single-coordinate variants and t b/n for
  /// batches.
  double epoch = 0;
};

/// kappa_i = alpha_i + phi'(margin_i), from the cached margins.
template <typename Scalar>
Vector<Scalar> dual_residuals(const SolverState<Scalar> &state, const Problem<Scalar> &pb) {
  Vector<Scalar> kappa(state.alpha.size());
  const auto &y = pb.data.labels();
  for (Eigen::Index i = 0; i < kappa.size(); ++i) {
    kappa[i] = state.alpha[i] + loss_derivative(pb.loss, state.margin[i], y[i]);
  }
  return kappa;
}

/// (1/(lambda n)) X^T alpha.
template <typename Scalar>
Vector<Scalar> mapped_primal(const Vector<Scalar> &alpha, const Problem<Scalar> &pb) {
  return pb.data.cols().transpose() * alpha /
         (pb.lambda * static_cast<Scalar>(pb.samples()));
}

/// State for a given alpha with w, margins and residues computed from scratch.
template <typename Scalar>
SolverState<Scalar> make_state(const Problem<Scalar> &pb, Vector<Scalar> alpha) {
  if (alpha.size() != pb.samples()) throw RangeError("alpha has wrong length");
  SolverState<Scalar> s;
  s.alpha = std::move(alpha);
  s.w = mapped_primal(s.alpha, pb);
  s.margin = pb.data.rows() * s.w;
  s.residue = dual_residuals(s, pb);
  return s;
}

template <typename Scalar>
SolverState<Scalar> make_state(const Problem<Scalar> &pb) {
  return make_state(pb, Vector<Scalar>(Vector<Scalar>::Zero(pb.samples())));
}

/// State carrying an arbitrary (w, alpha) pair, not necessarily mapped;
/// margins and residues are derived from w.
template <typename Scalar>
SolverState<Scalar> make_unmapped_state(const Problem<Scalar> &pb, Vector<Scalar> w,
                                        Vector<Scalar> alpha) {
  SolverState<Scalar> s;
  s.w = std::move(w);
  s.alpha = std::move(alpha);
  s.margin = pb.data.rows() * s.w;
  s.residue = dual_residuals(s, pb);
  return s;
}

namespace detail {
template <typename Scalar>
Scalar relative_gap(const Vector<Scalar> &got, const Vector<Scalar> &want) {
  const Scalar scale = std::max(want.norm(), Scalar(1e-300));
  return (got - want).norm() / scale;
}
}  // namespace detail

/// ||w - (1/(lambda n)) X^T alpha|| / ||(1/(lambda n)) X^T alpha||.
template <typename Scalar>
Scalar mapping_error(const SolverState<Scalar> &state, const Problem<Scalar> &pb) {
  const Vector<Scalar> mapped = mapped_primal(state.alpha, pb);
  if (mapped.norm() == Scalar(0)) return state.w.norm();
  return detail::relative_gap(state.w, mapped);
}

/// ||margin - X w|| / ||X w||.
template <typename Scalar>
Scalar margin_error(const SolverState<Scalar> &state, const Problem<Scalar> &pb) {
  const Vector<Scalar> exact = pb.data.rows() * state.w;
  if (exact.norm() == Scalar(0)) return state.margin.norm();
  return detail::relative_gap(state.margin, exact);
}

}  // namespace adfsdca

#endif  // ADFSDCA_STATE_HPP
