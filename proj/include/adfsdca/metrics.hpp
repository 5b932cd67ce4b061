#ifndef ADFSDCA_METRICS_HPP
#define ADFSDCA_METRICS_HPP

#include <Eigen/Core>
#include <iosfwd>
#include <vector>

#include "adfsdca/losses.hpp"
#include "adfsdca/state.hpp"

namespace adfsdca {

/// One logged point of a run.
struct RunRecord {
  double epoch = 0;
  double primal = 0;
  double dual = 0;
  double gap = 0;
  double residual_sq_norm = 0;
  double theta_used = 0;
  double wall_ms = 0;
};

/// P(w) = (1/n) sum_i phi_i(x_i^T w) + (lambda/2) ||w||^2 from cached margins.
template <typename Scalar>
Scalar primal_objective(const SolverState<Scalar> &state, const Problem<Scalar> &pb) {
  const auto &y = pb.data.labels();
  Scalar acc(0);
  for (Eigen::Index i = 0; i < pb.samples(); ++i) {
    acc += loss_value(pb.loss, state.margin[i], y[i]);
  }
  return acc / static_cast<Scalar>(pb.samples()) +
         pb.lambda / Scalar(2) * state.w.squaredNorm();
}

/// grad P(w) = (1/n) sum_i phi'_i(x_i^T w) x_i + lambda w.
template <typename Scalar>
Vector<Scalar> primal_gradient(const SolverState<Scalar> &state, const Problem<Scalar> &pb) {
  const auto &y = pb.data.labels();
  Vector<Scalar> d(pb.samples());
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    d[i] = loss_derivative(pb.loss, state.margin[i], y[i]);
  }
  return pb.data.cols().transpose() * d / static_cast<Scalar>(pb.samples()) +
         pb.lambda * state.w;
}

/// D(alpha) = -(1/n) sum_i phi_i^*(-alpha_i) - (lambda/2) ||X^T alpha / (lambda n)||^2.
template <typename Scalar>
Scalar dual_objective(const Vector<Scalar> &alpha, const Problem<Scalar> &pb) {
  const auto &y = pb.data.labels();
  Scalar acc(0);
  for (Eigen::Index i = 0; i < pb.samples(); ++i) {
    acc += conjugate_value(pb.loss, alpha[i], y[i]);
  }
  const Vector<Scalar> w = mapped_primal(alpha, pb);
  return -acc / static_cast<Scalar>(pb.samples()) - pb.lambda / Scalar(2) * w.squaredNorm();
}

/// Dual objective at the point alpha_i = -phi'_i(x_i^T w) induced by the
/// current margins. That point is always in the conjugate's domain, so the
/// value is a valid lower bound on min P for any w.
template <typename Scalar>
Scalar dual_objective_mapped(const SolverState<Scalar> &state, const Problem<Scalar> &pb) {
  const auto &y = pb.data.labels();
  Vector<Scalar> alpha(pb.samples());
  for (Eigen::Index i = 0; i < alpha.size(); ++i) {
    alpha[i] = -loss_derivative(pb.loss, state.margin[i], y[i]);
  }
  return dual_objective(alpha, pb);
}

template <typename Scalar>
Scalar duality_gap(const SolverState<Scalar> &state, const Problem<Scalar> &pb) {
  return primal_objective(state, pb) - dual_objective_mapped(state, pb);
}

struct ResidualHistogram {
  double upper = 0;  // bins cover [0, upper]
  std::vector<std::size_t> counts;
};

/// Counts |kappa_i| in `bins` equal-width bins over [0, max |kappa_i|]; the
/// top bin is closed on the right. An all-zero residue lands in bin 0.
template <typename Derived>
ResidualHistogram residual_histogram(const Eigen::MatrixBase<Derived> &kappa,
                                     std::size_t bins) {
  if (bins == 0) throw RangeError("histogram needs at least one bin");
  ResidualHistogram h;
  h.counts.assign(bins, 0);
  h.upper = kappa.size() == 0 ? 0.0 : static_cast<double>(kappa.cwiseAbs().maxCoeff());
  for (Eigen::Index i = 0; i < kappa.size(); ++i) {
    const double a = std::abs(static_cast<double>(kappa[i]));
    std::size_t k = 0;
    if (h.upper > 0) {
      k = static_cast<std::size_t>(a / h.upper * static_cast<double>(bins));
      k = std::min(k, bins - 1);
    }
    ++h.counts[k];
  }
  return h;
}

inline constexpr const char *kRecordCsvHeader =
    "epoch,primal,dual,gap,residual_sq_norm,theta_used,wall_ms";

/// Header plus one row per record, 17 significant digits, '.' decimal point
/// regardless of locale. Throws IoError when the sink fails.
void write_csv(const std::vector<RunRecord> &records, std::ostream &out);

/// Inverse of write_csv. Throws ParseError on malformed input.
std::vector<RunRecord> read_csv(std::istream &in);

/// Formats a double with 17 significant digits, locale independent.
std::string format_real(double value);

}  // namespace adfsdca

#endif  // ADFSDCA_METRICS_HPP
