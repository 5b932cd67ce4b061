#ifndef ADFSDCA_TEST_SUPPORT_HPP
#define ADFSDCA_TEST_SUPPORT_HPP

#include <Eigen/Core>
#include <cmath>
#include <cstddef>
#include <random>
#include <vector>

namespace adfsdca::testing {

/// Six standard deviations of a binomial(draws, p) count, plus one count of
/// slack so that p = 0 or 1 demand exact hits.
inline double six_sigma(double p, std::size_t draws) {
  return 6.0 * std::sqrt(static_cast<double>(draws) * p * (1.0 - p)) + 1.0;
}

/// Random probability vector with some exact zeros and a wide dynamic range.
inline Eigen::VectorXd random_distribution(std::mt19937_64 &gen, Eigen::Index n,
                                           double zero_fraction = 0.1) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::VectorXd p(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    p[i] = u(gen) < zero_fraction ? 0.0 : std::pow(10.0, -3.0 * u(gen));
  }
  if (p.sum() == 0.0) p[0] = 1.0;
  return p / p.sum();
}

/// Distribution implied by an alias table: column i keeps prob[i]/n and
/// donates (1 - prob[i])/n to alias[i].
template <typename Table>
Eigen::VectorXd alias_reconstruction(const Table &t) {
  const auto n = static_cast<Eigen::Index>(t.size());
  Eigen::VectorXd p = Eigen::VectorXd::Zero(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    p[i] += t.prob()[static_cast<std::size_t>(i)] / static_cast<double>(n);
    p[t.alias()[static_cast<std::size_t>(i)]] +=
        (1.0 - t.prob()[static_cast<std::size_t>(i)]) / static_cast<double>(n);
  }
  return p;
}

}  // namespace adfsdca::testing

#endif  // ADFSDCA_TEST_SUPPORT_HPP
