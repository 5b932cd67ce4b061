#ifndef ADFSDCA_ALIAS_TABLE_HPP
#define ADFSDCA_ALIAS_TABLE_HPP

#include <Eigen/Core>
#include <cmath>
#include <cstdint>
#include <vector>

#include "adfsdca/errors.hpp"
#include "adfsdca/rng.hpp"

namespace adfsdca {

/// Walker/Vose alias table: O(n) construction, O(1) draws.
///
/// Column k is kept with probability prob[k] and otherwise redirected to
/// alias[k], so P(i) = (prob[i] + sum_{k: alias[k] = i} (1 - prob[k])) / n.
/// Columns with prob[k] == 1 alias themselves.
template <typename Scalar = double>
class AliasTable {
 public:
  AliasTable() = default;

  /// Builds from nonnegative weights; they are renormalised internally.
  template <typename Derived>
  explicit AliasTable(const Eigen::DenseBase<Derived> &p) {
    const Eigen::Index n = p.size();
    if (n == 0) throw DegenerateDistribution("alias table: empty distribution");
    if (static_cast<std::uint64_t>(n) > (std::uint64_t{1} << 32)) {
      throw RangeError("alias table: more than 2^32 outcomes");
    }
    Scalar total(0);
    for (Eigen::Index i = 0; i < n; ++i) {
      const Scalar pi = static_cast<Scalar>(p[i]);
      if (!(pi >= Scalar(0)) || !std::isfinite(static_cast<double>(pi))) {
        throw DomainError("alias table: probabilities must be finite and >= 0");
      }
      total += pi;
    }
    if (!(total > Scalar(0))) {
      throw DegenerateDistribution("alias table: all probabilities are zero");
    }

    prob_.assign(static_cast<std::size_t>(n), Scalar(0));
    alias_.resize(static_cast<std::size_t>(n));
    std::vector<Scalar> scaled(static_cast<std::size_t>(n));
    std::vector<std::uint32_t> small;
    std::vector<std::uint32_t> large;
    small.reserve(static_cast<std::size_t>(n));
    large.reserve(static_cast<std::size_t>(n));
    const Scalar factor = static_cast<Scalar>(n) / total;
    for (Eigen::Index i = 0; i < n; ++i) {
      scaled[i] = static_cast<Scalar>(p[i]) * factor;
      (scaled[i] < Scalar(1) ? small : large).push_back(static_cast<std::uint32_t>(i));
    }
    while (!small.empty() && !large.empty()) {
      const std::uint32_t s = small.back();
      small.pop_back();
      const std::uint32_t l = large.back();
      prob_[s] = scaled[s];
      alias_[s] = l;
      scaled[l] = (scaled[l] + scaled[s]) - Scalar(1);
      if (scaled[l] < Scalar(1)) {
        large.pop_back();
        small.push_back(l);
      }
    }
    // Leftovers carry mass 1 up to rounding.
    for (std::uint32_t l : large) {
      prob_[l] = Scalar(1);
      alias_[l] = l;
    }
    for (std::uint32_t s : small) {
      prob_[s] = Scalar(1);
      alias_[s] = s;
    }
  }

  std::size_t size() const { return prob_.size(); }
  const std::vector<Scalar> &prob() const { return prob_; }
  const std::vector<std::uint32_t> &alias() const { return alias_; }

  /// One 64-bit draw: the high half picks the column, the low half is the
  /// acceptance coin.
  std::size_t sample(Rng &rng) const {
    const std::uint64_t word = rng.next();
    const std::uint64_t hi = word >> 32;
    const std::uint64_t col = (hi * static_cast<std::uint64_t>(prob_.size())) >> 32;
    const double coin = static_cast<double>(word & 0xffffffffULL) * 0x1.0p-32;
    return coin < static_cast<double>(prob_[col]) ? col : alias_[col];
  }

 private:
  std::vector<Scalar> prob_;
  std::vector<std::uint32_t> alias_;
};

template <typename Derived>
AliasTable<typename Derived::Scalar> alias_build(const Eigen::DenseBase<Derived> &p) {
  return AliasTable<typename Derived::Scalar>(p);
}

}  // namespace adfsdca

#endif  // ADFSDCA_ALIAS_TABLE_HPP
