#ifndef ADFSDCA_SYNTHETIC_HPP
#define ADFSDCA_SYNTHETIC_HPP

#include <Eigen/Core>
#include <cmath>
#include <cstdint>
#include <vector>

#include "adfsdca/dataset.hpp"
#include "adfsdca/errors.hpp"
#include "adfsdca/losses.hpp"
#include "adfsdca/rng.hpp"

namespace adfsdca {

struct SyntheticOptions {
  Eigen::Index samples = 200;
  Eigen::Index features = 20;
  /// Fraction of nonzero entries per row; at least one entry is kept.
  double density = 1.0;
  /// Squared row norms are 10^u with u uniform in [-spread, spread].
  double norm_spread = 1.0;
  double noise = 0.1;
  LossKind loss = LossKind::Quadratic;
  std::uint64_t seed = 1;
};

namespace detail {

// Box-Muller on top of the project generator so datasets are identical
// across standard libraries.
inline double gaussian(Rng &rng) {
  double u1 = rng.uniform();
  while (u1 <= 0.0) u1 = rng.uniform();
  const double u2 = rng.uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
}

}  // namespace detail

/// Random rows with skewed norms and labels from a planted model: real
/// targets x.w + noise for the quadratic loss, signs for the logistic loss.
inline Dataset<double> make_synthetic(const SyntheticOptions &opt) {
  if (opt.samples < 1 || opt.features < 1) throw RangeError("synthetic: empty shape");
  if (!(opt.density > 0.0 && opt.density <= 1.0)) {
    throw RangeError("synthetic: density must be in (0, 1]");
  }
  Rng rng(opt.seed);
  const Eigen::Index n = opt.samples;
  const Eigen::Index d = opt.features;

  Eigen::VectorXd w_true(d);
  for (Eigen::Index j = 0; j < d; ++j) w_true[j] = detail::gaussian(rng);

  Eigen::SparseMatrix<double, Eigen::RowMajor> rows(n, d);
  std::vector<Eigen::Triplet<double>> trips;
  Eigen::VectorXd labels(n);
  std::vector<double> vals(static_cast<std::size_t>(d));
  for (Eigen::Index i = 0; i < n; ++i) {
    std::vector<Eigen::Index> cols;
    for (Eigen::Index j = 0; j < d; ++j) {
      if (opt.density >= 1.0 || rng.uniform() < opt.density) cols.push_back(j);
    }
    if (cols.empty()) cols.push_back(static_cast<Eigen::Index>(rng.below(d)));
    double sq = 0;
    for (std::size_t k = 0; k < cols.size(); ++k) {
      vals[k] = detail::gaussian(rng);
      sq += vals[k] * vals[k];
    }
    if (sq == 0) {
      vals[0] = 1;
      sq = 1;
    }
    const double u = opt.norm_spread * (2.0 * rng.uniform() - 1.0);
    const double scale = std::sqrt(std::pow(10.0, u) / sq);
    double z = 0;
    for (std::size_t k = 0; k < cols.size(); ++k) {
      const double x = vals[k] * scale;
      trips.emplace_back(i, cols[k], x);
      z += x * w_true[cols[k]];
    }
    const double eps = opt.noise * detail::gaussian(rng);
    if (opt.loss == LossKind::Quadratic) {
      labels[i] = z + eps;
    } else {
      labels[i] = z + eps >= 0 ? 1.0 : -1.0;
    }
  }
  rows.setFromTriplets(trips.begin(), trips.end());
  return Dataset<double>(std::move(rows), std::move(labels));
}

}  // namespace adfsdca

#endif  // ADFSDCA_SYNTHETIC_HPP
