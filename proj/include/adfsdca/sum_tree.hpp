#ifndef ADFSDCA_SUM_TREE_HPP
#define ADFSDCA_SUM_TREE_HPP

#include <Eigen/Core>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "adfsdca/errors.hpp"
#include "adfsdca/rng.hpp"

namespace adfsdca {

/// Complete binary tree of subtree weight sums over n leaves.
///
/// Sampling draws leaf i with probability w_i / sum(w); a weight change
/// recomputes the O(log n) sums on its root path from the children, so
/// internal nodes never accumulate incremental drift.
template <typename Scalar = double>
class SumTree {
 public:
  SumTree() = default;

  template <typename Derived>
  explicit SumTree(const Eigen::DenseBase<Derived> &weights) {
    const auto n = static_cast<std::size_t>(weights.size());
    if (n == 0) throw DegenerateDistribution("sum tree: no leaves");
    size_ = n;
    leaves_ = 1;
    while (leaves_ < n) leaves_ <<= 1;
    nodes_.assign(2 * leaves_, Scalar(0));
    for (std::size_t i = 0; i < n; ++i) {
      check_weight(static_cast<Scalar>(weights[static_cast<Eigen::Index>(i)]));
      nodes_[leaves_ + i] = static_cast<Scalar>(weights[static_cast<Eigen::Index>(i)]);
    }
    for (std::size_t k = leaves_ - 1; k >= 1; --k) {
      nodes_[k] = nodes_[2 * k] + nodes_[2 * k + 1];
    }
    if (!(total() > Scalar(0))) {
      throw DegenerateDistribution("sum tree: all weights are zero");
    }
  }

  std::size_t size() const { return size_; }
  Scalar total() const { return nodes_.size() > 1 ? nodes_[1] : Scalar(0); }
  Scalar weight(std::size_t i) const { return nodes_[leaves_ + i]; }
  /// Normalised probability of leaf i.
  Scalar probability(std::size_t i) const { return weight(i) / total(); }

  void update(std::size_t i, Scalar w) {
    if (i >= size_) throw RangeError("sum tree: leaf " + std::to_string(i) + " out of range");
    check_weight(w);
    std::size_t k = leaves_ + i;
    nodes_[k] = w;
    for (k >>= 1; k >= 1; k >>= 1) nodes_[k] = nodes_[2 * k] + nodes_[2 * k + 1];
  }

  std::size_t sample(Rng &rng) const {
    if (!(total() > Scalar(0))) {
      throw DegenerateDistribution("sum tree: all weights are zero");
    }
    Scalar u = static_cast<Scalar>(rng.uniform()) * total();
    std::size_t k = 1;
    while (k < leaves_) {
      const Scalar left = nodes_[2 * k];
      const Scalar right = nodes_[2 * k + 1];
      // Rounding can leave u just past a subtree; never descend into a
      // zero-weight branch.
      if ((u < left && left > Scalar(0)) || !(right > Scalar(0))) {
        k = 2 * k;
      } else {
        u -= left;
        k = 2 * k + 1;
      }
    }
    return k - leaves_;
  }

  /// Raw node storage, 1-based heap order; node k has children 2k, 2k+1.
  const std::vector<Scalar> &nodes() const { return nodes_; }
  std::size_t leaf_offset() const { return leaves_; }

 private:
  static void check_weight(Scalar w) {
    if (!(w >= Scalar(0)) || !std::isfinite(static_cast<double>(w))) {
      throw DomainError("sum tree: weights must be finite and >= 0");
    }
  }

  std::size_t size_ = 0;
  std::size_t leaves_ = 0;
  std::vector<Scalar> nodes_;
};

}  // namespace adfsdca

#endif  // ADFSDCA_SUM_TREE_HPP
