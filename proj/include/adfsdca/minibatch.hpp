#ifndef ADFSDCA_MINIBATCH_HPP
#define ADFSDCA_MINIBATCH_HPP

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "adfsdca/alias_table.hpp"
#include "adfsdca/errors.hpp"
#include "adfsdca/rng.hpp"

namespace adfsdca {

/// One "fixed prefix + uniform block" sampling component.
///
/// Positions refer to the marginals sorted in decreasing order and are
/// 0-based: the component always takes positions [0, first) and draws
/// batch - first further positions uniformly from [first, last].
template <typename Scalar>
struct MixtureComponent {
  Scalar weight;
  Eigen::Index first;
  Eigen::Index last;
};

/// A fixed-size non-uniform batch sampling written as a convex combination
/// of components. `perm[pos]` is the original coordinate at sorted position
/// `pos`.
template <typename Scalar = double>
class BatchMixture {
 public:
  BatchMixture(Eigen::Index batch, std::vector<MixtureComponent<Scalar>> components,
               std::vector<Eigen::Index> perm)
      : batch_(batch), components_(std::move(components)), perm_(std::move(perm)) {
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> weights(
        static_cast<Eigen::Index>(components_.size()));
    for (std::size_t k = 0; k < components_.size(); ++k) {
      weights[static_cast<Eigen::Index>(k)] = components_[k].weight;
    }
    picker_ = AliasTable<Scalar>(weights);
  }

  Eigen::Index batch() const { return batch_; }
  Eigen::Index size() const { return static_cast<Eigen::Index>(perm_.size()); }
  const std::vector<MixtureComponent<Scalar>> &components() const { return components_; }
  const std::vector<Eigen::Index> &perm() const { return perm_; }
  const AliasTable<Scalar> &component_picker() const { return picker_; }

 private:
  Eigen::Index batch_;
  std::vector<MixtureComponent<Scalar>> components_;
  std::vector<Eigen::Index> perm_;
  AliasTable<Scalar> picker_;
};

/// Decomposes target marginals q (each in (0,1), summing to b) into a
/// mixture whose inclusion probabilities are exactly q.
///
/// The peeling loop works on the sorted marginals. At each step the block
/// [first, last] holds every value tied with the b-th largest; the
/// prefix before it is lowered by r and the block by (b-first)/(size)*r,
/// with r the largest weight that keeps the order, until everything is
/// zero. Ties use the tolerance 1e-12 * b. Prefix values are kept lazily
/// as (sorted value - offset), so a step costs O(1) plus its merges.
template <typename Derived>
BatchMixture<typename Derived::Scalar> minibatch_decompose(
    const Eigen::MatrixBase<Derived> &q, Eigen::Index batch) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index n = q.size();
  if (batch < 1 || batch >= n) {
    throw InvalidMarginal("batch size " + std::to_string(batch) +
                          " must satisfy 1 <= b < n = " + std::to_string(n));
  }
  Scalar total(0);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(q[i] > Scalar(0) && q[i] < Scalar(1))) {
      throw InvalidMarginal("marginal q[" + std::to_string(i) + "] = " +
                            std::to_string(static_cast<double>(q[i])) +
                            " not in (0,1)");
    }
    total += q[i];
  }
  if (std::abs(static_cast<double>(total) - static_cast<double>(batch)) > 1e-9) {
    throw InvalidMarginal("marginals sum to " + std::to_string(static_cast<double>(total)) +
                          ", expected " + std::to_string(batch));
  }

  std::vector<Eigen::Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), Eigen::Index(0));
  std::stable_sort(perm.begin(), perm.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return q[a] > q[b]; });
  std::vector<Scalar> sorted(static_cast<std::size_t>(n));
  for (Eigen::Index p = 0; p < n; ++p) sorted[p] = q[perm[p]];

  const Scalar eps = Scalar(1e-12) * static_cast<Scalar>(batch);
  const Scalar b = static_cast<Scalar>(batch);
  Eigen::Index lo = batch - 1;
  Eigen::Index hi = batch - 1;
  Scalar block = sorted[lo];
  Scalar offset(0);

  auto merge = [&]() {
    while (lo > 0 && (sorted[lo - 1] - offset) - block <= eps) --lo;
    while (hi + 1 < n && block - sorted[hi + 1] <= eps) ++hi;
  };
  merge();

  std::vector<MixtureComponent<Scalar>> components;
  for (Eigen::Index step = 0;; ++step) {
    const Scalar top = lo > 0 ? sorted[0] - offset : block;
    if (top <= eps) break;
    if (step > n) {
      throw NonTermination("mini-batch decomposition exceeded n + 1 steps");
    }
    const Scalar i1 = static_cast<Scalar>(lo + 1);  // 1-based first tied position
    const Scalar j1 = static_cast<Scalar>(hi + 1);  // 1-based last tied position
    const Scalar width = j1 - i1 + Scalar(1);
    const Scalar below = hi + 1 < n ? sorted[hi + 1] : Scalar(0);
    Scalar r;
    if (lo > 0) {
      const Scalar above = sorted[lo - 1] - offset;
      const Scalar to_below = width / (b - i1 + Scalar(1)) * (block - below);
      // With last == b the prefix and block fall at the same rate and never meet.
      const Scalar to_above = j1 > b ? width / (j1 - b) * (above - block)
                                     : std::numeric_limits<Scalar>::infinity();
      r = std::min(to_above, to_below);
    } else {
      r = j1 / b * (block - below);
    }
    if (r > Scalar(0)) components.push_back({r, lo, hi});
    offset += r;
    block -= (b - i1 + Scalar(1)) / width * r;
    merge();
  }
  if (components.empty()) {
    throw NonTermination("mini-batch decomposition produced no components");
  }
  Scalar mass(0);
  for (const auto &c : components) mass += c.weight;
  for (auto &c : components) c.weight /= mass;
  return BatchMixture<Scalar>(batch, std::move(components), std::move(perm));
}

/// Inclusion probability of every original coordinate under the mixture:
/// sum_k r_k [pos < first_k] + r_k (b - first_k) / (last_k - first_k + 1)
/// [first_k <= pos <= last_k].
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> mixture_marginals(const BatchMixture<Scalar> &mix) {
  const Eigen::Index n = mix.size();
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> sorted = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>::Zero(n);
  const Scalar b = static_cast<Scalar>(mix.batch());
  for (const auto &c : mix.components()) {
    sorted.head(c.first).array() += c.weight;
    const Scalar share = (b - static_cast<Scalar>(c.first)) /
                         static_cast<Scalar>(c.last - c.first + 1);
    sorted.segment(c.first, c.last - c.first + 1).array() += c.weight * share;
  }
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> out(n);
  for (Eigen::Index p = 0; p < n; ++p) out[mix.perm()[p]] = sorted[p];
  return out;
}

/// Draws the subset of component k only.
template <typename Scalar>
std::vector<Eigen::Index> minibatch_sample_component(const BatchMixture<Scalar> &mix,
                                                     std::size_t k, Rng &rng) {
  const auto &c = mix.components().at(k);
  const Eigen::Index width = c.last - c.first + 1;
  const Eigen::Index draws = mix.batch() - c.first;
  std::vector<Eigen::Index> out;
  out.reserve(static_cast<std::size_t>(mix.batch()));
  for (Eigen::Index p = 0; p < c.first; ++p) out.push_back(mix.perm()[p]);

  std::vector<char> taken(static_cast<std::size_t>(width), 0);
  for (Eigen::Index j = width - draws; j < width; ++j) {
    auto t = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(j + 1)));
    if (taken[t]) t = j;
    taken[t] = 1;
    out.push_back(mix.perm()[c.first + t]);
  }
  std::sort(out.begin(), out.end());
  return out;
}

/// Draws one batch: first the component (one 64-bit word), then the
/// uniform subset of its block (Floyd's algorithm, one bounded draw per
/// chosen position). Returns b distinct original ids in increasing order.
template <typename Scalar>
std::vector<Eigen::Index> minibatch_sample(const BatchMixture<Scalar> &mix, Rng &rng) {
  const auto k = static_cast<std::size_t>(mix.component_picker().sample(rng));
  return minibatch_sample_component(mix, k, rng);
}

/// Turns a probability vector into batch marginals q = b p, water-filling
/// entries above 1 - 1e-9 down to that cap and handing the excess to the
/// uncapped positive entries in proportion to their mass.
///
/// When exactly b entries are positive the only feasible marginal puts
/// q = 1 on each of them, and that is returned.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> clip_marginals(
    const Eigen::MatrixBase<Derived> &p, Eigen::Index batch) {
  using Scalar = typename Derived::Scalar;
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  constexpr double cap_eps = 1e-9;
  const Scalar cap = Scalar(1) - Scalar(cap_eps);
  if (batch < 1) throw InfeasibleMarginal("batch size must be >= 1");
  if ((p.array() < Scalar(0)).any()) throw InvalidMarginal("negative probability");
  const Scalar total = p.sum();
  if (!(total > Scalar(0))) throw InfeasibleMarginal("all probabilities are zero");
  const Eigen::Index positive = (p.array() > Scalar(0)).count();
  if (batch > positive) {
    throw InfeasibleMarginal("batch size " + std::to_string(batch) + " exceeds the " +
                             std::to_string(positive) + " coordinates with p > 0");
  }
  if (batch == positive) return (p.array() > Scalar(0)).select(Vec::Ones(p.size()), Scalar(0));

  Vec q = p * (static_cast<Scalar>(batch) / total);
  std::vector<char> capped(static_cast<std::size_t>(q.size()), 0);
  for (Eigen::Index round = 0; round <= q.size(); ++round) {
    Scalar excess(0);
    for (Eigen::Index i = 0; i < q.size(); ++i) {
      if (!capped[i] && q[i] > cap) {
        excess += q[i] - cap;
        q[i] = cap;
        capped[i] = 1;
      }
    }
    if (excess == Scalar(0)) break;
    Scalar free_mass(0);
    for (Eigen::Index i = 0; i < q.size(); ++i) {
      if (!capped[i]) free_mass += q[i];
    }
    for (Eigen::Index i = 0; i < q.size(); ++i) {
      if (!capped[i]) q[i] += excess * q[i] / free_mass;
    }
  }
  return q;
}

}  // namespace adfsdca

#endif  // ADFSDCA_MINIBATCH_HPP
