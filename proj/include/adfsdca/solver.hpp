#ifndef ADFSDCA_SOLVER_HPP
#define ADFSDCA_SOLVER_HPP

#include <Eigen/Core>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "adfsdca/adaptive.hpp"
#include "adfsdca/alias_table.hpp"
#include "adfsdca/dataset.hpp"
#include "adfsdca/errors.hpp"
#include "adfsdca/metrics.hpp"
#include "adfsdca/minibatch.hpp"
#include "adfsdca/rng.hpp"
#include "adfsdca/state.hpp"
#include "adfsdca/sum_tree.hpp"

namespace adfsdca {

enum class ThetaMode { PerIteration, FixedThetaStar };

/// Adaptive probabilities and step recomputed every iteration.
struct AdfSdca {};
/// Adaptive probabilities rebuilt once per epoch; a sampled coordinate's
/// weight is divided by `shrink` afterwards (shrink == 1 keeps them fixed).
struct AdfSdcaPlus {
  double shrink = 10;
};
/// Fixed-size batches drawn with the adaptive marginals.
struct MiniBatch {
  Eigen::Index batch = 1;
};
/// Uniform sampling with the conservative constant step.
struct UniformBaseline {};

using Variant = std::variant<AdfSdca, AdfSdcaPlus, MiniBatch, UniformBaseline>;

/// Short name used in file names: adfsdca, plus-s10, minibatch-b8, uniform.
std::string variant_label(const Variant &v);

struct SolverConfig {
  double lambda = 1e-3;
  Variant variant = AdfSdca{};
  Regime regime = Regime::AllConvex;
  ThetaMode theta_mode = ThetaMode::PerIteration;
  int epochs = 30;
  std::uint64_t seed = 42;
  /// Stop at the first logged point with gap <= gap_tol; negative disables.
  double gap_tol = 1e-10;
  /// Logged points per pass over the data.
  int checks_per_epoch = 1;
  /// Record wall-clock time; off gives reproducible zero timings.
  bool timing = true;
};

/// Throws RangeError on lambda <= 0, shrink < 1, batch outside [1, n],
/// negative epochs or checks_per_epoch < 1.
void validate(const SolverConfig &cfg, Eigen::Index samples);

enum class SolveStatus { GapReached, EpochBudget, Converged, Diverged };

std::string_view to_string(SolveStatus s);

template <typename Scalar>
struct SolveResult {
  SolverState<Scalar> state;
  std::vector<RunRecord> records;
  SolveStatus status = SolveStatus::EpochBudget;
};

template <typename Scalar>
struct SolveCallbacks {
  std::function<void(const RunRecord &)> on_record;
  /// Invoked after every iteration, with the state already updated.
  std::function<void(const SolverState<Scalar> &)> on_iteration;
};

/// Applies dual-free coordinate steps and keeps w, the margin cache and the
/// residues consistent, touching only samples that share a feature with
/// the updated coordinates.
template <typename Scalar>
class UpdateEngine {
 public:
  explicit UpdateEngine(const Problem<Scalar> &pb)
      : pb_(pb),
        dw_(Vector<Scalar>::Zero(pb.features())),
        feature_mark_(static_cast<std::size_t>(pb.features()), 0),
        sample_mark_(static_cast<std::size_t>(pb.samples()), 0) {}

  /// alpha_i -= theta kappa_i / (c p_i);
  /// w -= theta kappa_i x_i / (n lambda c p_i).
  void apply(SolverState<Scalar> &s, Eigen::Index i, Scalar theta, Scalar p_i,
             Scalar c = Scalar(1)) {
    touched_.clear();
    const Scalar k = s.residue[i];
    if (k == Scalar(0)) return;
    const Scalar step = theta * k / (c * p_i);
    s.alpha[i] -= step;
    touch_sample(s, i);
    const Scalar scale = -step / (pb_.lambda * static_cast<Scalar>(pb_.samples()));
    const auto &rows = pb_.data.rows();
    for (typename Dataset<Scalar>::RowMatrix::InnerIterator it(rows, i); it; ++it) {
      push_feature(s, it.col(), scale * it.value());
    }
    refresh_residues(s);
  }

  /// Simultaneous update of every coordinate in `batch` from the same
  /// residue; `probs[k]` is the single-draw probability of batch[k], so the
  /// coordinate enters with inclusion probability c * probs[k].
  void apply_batch(SolverState<Scalar> &s, const std::vector<Eigen::Index> &batch,
                   const std::vector<Scalar> &probs, Scalar theta, Scalar c) {
    touched_.clear();
    touched_features_.clear();
    const Scalar inv_nl = Scalar(1) / (pb_.lambda * static_cast<Scalar>(pb_.samples()));
    const auto &rows = pb_.data.rows();
    for (std::size_t k = 0; k < batch.size(); ++k) {
      const Eigen::Index i = batch[k];
      const Scalar r = s.residue[i];
      if (r == Scalar(0)) continue;
      const Scalar step = theta * r / (c * probs[k]);
      s.alpha[i] -= step;
      touch_sample(s, i);
      for (typename Dataset<Scalar>::RowMatrix::InnerIterator it(rows, i); it; ++it) {
        const auto f = static_cast<std::size_t>(it.col());
        if (!feature_mark_[f]) {
          feature_mark_[f] = 1;
          touched_features_.push_back(it.col());
        }
        dw_[it.col()] -= step * inv_nl * it.value();
      }
    }
    for (Eigen::Index f : touched_features_) {
      push_feature(s, f, dw_[f]);
      dw_[f] = Scalar(0);
      feature_mark_[static_cast<std::size_t>(f)] = 0;
    }
    refresh_residues(s);
  }

  /// Samples whose residue changed in the last update, with the old value.
  const std::vector<std::pair<Eigen::Index, Scalar>> &touched() const { return touched_; }

 private:
  void touch_sample(const SolverState<Scalar> &s, Eigen::Index j) {
    auto &m = sample_mark_[static_cast<std::size_t>(j)];
    if (!m) {
      m = 1;
      touched_.emplace_back(j, s.residue[j]);
    }
  }

  void push_feature(SolverState<Scalar> &s, Eigen::Index f, Scalar delta) {
    s.w[f] += delta;
    const auto &cols = pb_.data.cols();
    for (typename Dataset<Scalar>::ColMatrix::InnerIterator it(cols, f); it; ++it) {
      s.margin[it.row()] += delta * it.value();
      touch_sample(s, it.row());
    }
  }

  void refresh_residues(SolverState<Scalar> &s) {
    const auto &y = pb_.data.labels();
    for (const auto &entry : touched_) {
      const Eigen::Index j = entry.first;
      s.residue[j] = s.alpha[j] + loss_derivative(pb_.loss, s.margin[j], y[j]);
      sample_mark_[static_cast<std::size_t>(j)] = 0;
    }
  }

  const Problem<Scalar> &pb_;
  Vector<Scalar> dw_;
  std::vector<char> feature_mark_;
  std::vector<char> sample_mark_;
  std::vector<Eigen::Index> touched_features_;
  std::vector<std::pair<Eigen::Index, Scalar>> touched_;
};

/// One dual-free step on coordinate i (c = 1 serial, c = b in a batch).
template <typename Scalar>
void apply_update(SolverState<Scalar> &state, const Problem<Scalar> &pb, Eigen::Index i,
                  Scalar theta, Scalar p_i, Scalar c = Scalar(1)) {
  UpdateEngine<Scalar> engine(pb);
  engine.apply(state, i, theta, p_i, c);
}

/// D = (1/n) ||alpha - alpha*||^2 + gamma ||w - w*||^2. Pass gamma-bar for
/// the average-convex potential.
template <typename Scalar>
Scalar potential(const SolverState<Scalar> &state, const SolverState<Scalar> &ref,
                 Scalar gamma) {
  return (state.alpha - ref.alpha).squaredNorm() / static_cast<Scalar>(state.alpha.size()) +
         gamma * (state.w - ref.w).squaredNorm();
}

/// sum_i p_i * (kappa_i x_i / (n p_i)) over p_i > 0: the mean of the
/// stochastic direction, which equals grad P(w) whenever p is coherent.
template <typename Scalar, typename Derived>
Vector<Scalar> expected_update_direction(const SolverState<Scalar> &state,
                                         const Eigen::MatrixBase<Derived> &p,
                                         const Problem<Scalar> &pb) {
  const Scalar n = static_cast<Scalar>(pb.samples());
  Vector<Scalar> out = Vector<Scalar>::Zero(pb.features());
  const auto &rows = pb.data.rows();
  for (Eigen::Index i = 0; i < pb.samples(); ++i) {
    const Scalar pi = static_cast<Scalar>(p[i]);
    if (!(pi > Scalar(0))) continue;
    const Scalar coef = pi * (state.residue[i] / (n * pi));
    for (typename Dataset<Scalar>::RowMatrix::InnerIterator it(rows, i); it; ++it) {
      out[it.col()] += coef * it.value();
    }
  }
  return out;
}

/// E ||kappa_i x_i / (n p_i)||^2 = sum_i kappa_i^2 v_i / (n^2 p_i), exactly.
template <typename Scalar, typename Derived>
Scalar update_second_moment(const SolverState<Scalar> &state,
                            const Eigen::MatrixBase<Derived> &p,
                            const Problem<Scalar> &pb) {
  const Scalar n = static_cast<Scalar>(pb.samples());
  Scalar acc(0);
  for (Eigen::Index i = 0; i < pb.samples(); ++i) {
    const Scalar k = state.residue[i];
    if (k == Scalar(0)) continue;
    acc += k * k * pb.data.sq_norms()[i] / (n * n * static_cast<Scalar>(p[i]));
  }
  return acc;
}

/// Marginal inclusion probabilities used by a batch-b step for residue
/// kappa, with v the ESO constants: q = clip(b p*) on the support of p*.
/// For b = 1 this is p* itself.
template <typename Scalar>
Vector<Scalar> batch_marginals(const Vector<Scalar> &kappa, const Vector<Scalar> &v,
                               Scalar gamma, Scalar lambda, Eigen::Index batch) {
  Vector<Scalar> p = adaptive_probabilities(kappa, v, gamma, lambda);
  if (batch == 1) return p;
  const Eigen::Index support = (p.array() > Scalar(0)).count();
  if (support <= batch) return (p.array() > Scalar(0)).select(Vector<Scalar>::Ones(p.size()), Scalar(0));
  return clip_marginals(p, batch);
}

namespace detail {

template <typename Scalar>
class Runner {
 public:
  Runner(const Problem<Scalar> &pb, const SolverConfig &cfg, const SolveCallbacks<Scalar> &cb,
         SolverState<Scalar> state)
      : pb_(pb), cfg_(cfg), cb_(cb), engine_(pb), rng_(cfg.seed) {
    result_.state = std::move(state);
    const Eigen::Index n = pb.samples();
    batch_ = std::holds_alternative<MiniBatch>(cfg.variant)
                 ? std::get<MiniBatch>(cfg.variant).batch
                 : 1;
    v_ = batch_ == 1 ? pb.data.sq_norms() : eso_constants(pb.data, batch_);
    gamma_ = static_cast<Scalar>(regime_gamma(pb.data, pb.loss, pb.lambda, cfg.regime));
    theta_star_ = theta_star(v_, gamma_, pb.lambda, batch_);
    const Scalar lt = pb.loss.template smoothness<Scalar>();
    uniform_theta_ = pb.lambda / (pb.lambda * static_cast<Scalar>(n) +
                                  lt * pb.data.sq_norms().maxCoeff());
    n_ = n;
  }

  SolveResult<Scalar> run() {
    auto &s = result_.state;
    const auto total_units = static_cast<std::uint64_t>(cfg_.epochs) *
                             static_cast<std::uint64_t>(n_);
    std::uint64_t units = 0;
    std::uint64_t next_check = 1;
    if (log_point(0.0)) return std::move(result_);

    while (units < total_units) {
      const auto start = std::chrono::steady_clock::now();
      try {
        step();
      } catch (const Converged &) {
        return finish(SolveStatus::Converged);
      } catch (const DomainError &) {
        if (s.residue.allFinite()) throw;
        return finish(SolveStatus::Diverged);
      }
      if (cfg_.timing) {
        elapsed_ms_ += std::chrono::duration<double, std::milli>(
                           std::chrono::steady_clock::now() - start)
                           .count();
      }
      units += static_cast<std::uint64_t>(batch_);
      ++s.iteration;
      s.epoch = static_cast<double>(units) / static_cast<double>(n_);
      if (cb_.on_iteration) cb_.on_iteration(s);

      if (units >= check_units(next_check) || units >= total_units) {
        while (check_units(next_check) <= units) ++next_check;
        if (log_point(s.epoch)) return std::move(result_);
      }
    }
    result_.status = SolveStatus::EpochBudget;
    return std::move(result_);
  }

 private:
  std::uint64_t check_units(std::uint64_t k) const {
    const auto n = static_cast<std::uint64_t>(n_);
    const auto c = static_cast<std::uint64_t>(cfg_.checks_per_epoch);
    return (k * n + c - 1) / c;
  }

  // Ends the run, logging the final point unless it was just logged.
  SolveResult<Scalar> finish(SolveStatus status) {
    const auto &records = result_.records;
    if (records.empty() || records.back().epoch != result_.state.epoch) {
      log_point(result_.state.epoch);
    }
    result_.status = status;
    return std::move(result_);
  }

  // Logs the current point; true when the run should stop.
  bool log_point(double epoch) {
    const auto &s = result_.state;
    RunRecord r;
    r.epoch = epoch;
    if (s.margin.allFinite() && s.w.allFinite()) {
      r.primal = static_cast<double>(primal_objective(s, pb_));
      r.dual = static_cast<double>(dual_objective_mapped(s, pb_));
    } else {
      r.primal = r.dual = std::numeric_limits<double>::quiet_NaN();
    }
    r.gap = r.primal - r.dual;
    r.residual_sq_norm = static_cast<double>(s.residue.squaredNorm());
    r.theta_used = static_cast<double>(last_theta_);
    r.wall_ms = elapsed_ms_;
    result_.records.push_back(r);
    if (cb_.on_record) cb_.on_record(r);
    if (!std::isfinite(r.gap) || !std::isfinite(r.residual_sq_norm)) {
      result_.status = SolveStatus::Diverged;
      return true;
    }
    if (r.residual_sq_norm == 0) {
      result_.status = SolveStatus::Converged;
      return true;
    }
    if (cfg_.gap_tol >= 0 && r.gap <= cfg_.gap_tol) {
      result_.status = SolveStatus::GapReached;
      return true;
    }
    return false;
  }

  void step() {
    std::visit([this](const auto &v) { step_variant(v); }, cfg_.variant);
  }

  void step_variant(const AdfSdca &) { step_adaptive(); }

  void step_variant(const MiniBatch &) {
    if (batch_ == 1) {
      // A batch of one is the singleton mixture over p*.
      step_adaptive();
    } else {
      step_batch();
    }
  }

  void step_adaptive() {
    auto &s = result_.state;
    const Vector<Scalar> p = adaptive_probabilities(s.residue, v_, gamma_, pb_.lambda);
    last_theta_ = cfg_.theta_mode == ThetaMode::FixedThetaStar
                      ? theta_star_
                      : clamp_step(optimal_theta_bound(s.residue, v_, gamma_, pb_.lambda));
    const AliasTable<Scalar> table(p);
    const auto i = static_cast<Eigen::Index>(table.sample(rng_));
    engine_.apply(s, i, last_theta_, p[i]);
  }

  void step_batch() {
    auto &s = result_.state;
    const Scalar b = static_cast<Scalar>(batch_);
    const Vector<Scalar> q = batch_marginals(s.residue, v_, gamma_, pb_.lambda, batch_);

    std::vector<Eigen::Index> support;
    support.reserve(static_cast<std::size_t>(n_));
    for (Eigen::Index j = 0; j < n_; ++j) {
      if (q[j] > Scalar(0)) support.push_back(j);
    }
    std::vector<Eigen::Index> chosen;
    if (static_cast<Eigen::Index>(support.size()) <= batch_) {
      chosen = support;
    } else {
      Vector<Scalar> qs(static_cast<Eigen::Index>(support.size()));
      for (std::size_t k = 0; k < support.size(); ++k) qs[static_cast<Eigen::Index>(k)] = q[support[k]];
      const auto mix = minibatch_decompose(qs, batch_);
      for (Eigen::Index pos : minibatch_sample(mix, rng_)) chosen.push_back(support[pos]);
    }
    const Vector<Scalar> p_eff = q / b;
    last_theta_ = cfg_.theta_mode == ThetaMode::FixedThetaStar
                      ? theta_star_
                      : theta(s.residue, p_eff, v_, gamma_, pb_.lambda, batch_);
    std::vector<Scalar> probs;
    probs.reserve(chosen.size());
    for (Eigen::Index j : chosen) probs.push_back(p_eff[j]);
    engine_.apply_batch(s, chosen, probs, last_theta_, b);
  }

  void step_variant(const UniformBaseline &) {
    auto &s = result_.state;
    const auto i = static_cast<Eigen::Index>(rng_.below(static_cast<std::uint64_t>(n_)));
    last_theta_ = uniform_theta_;
    engine_.apply(s, i, last_theta_, Scalar(1) / static_cast<Scalar>(n_));
  }

  // Probabilities come from a sum tree rebuilt at every epoch boundary and
  // shrunk after each draw. The step is Theta at the normalised tree
  // weights; its two sums follow the residues the engine touched.
  void step_variant(const AdfSdcaPlus &plus) {
    auto &s = result_.state;
    const auto shrink = static_cast<Scalar>(plus.shrink);
    if (s.iteration % static_cast<std::uint64_t>(n_) == 0) {
      const Vector<Scalar> p = adaptive_probabilities(s.residue, v_, gamma_, pb_.lambda);
      tree_ = SumTree<Scalar>(p);
      recompute_plus_sums();
    }
    const auto i = static_cast<Eigen::Index>(tree_.sample(rng_));
    const Scalar w_old = tree_.weight(static_cast<std::size_t>(i));
    const Scalar p_i = w_old / tree_.total();

    if (cfg_.theta_mode == ThetaMode::FixedThetaStar) {
      last_theta_ = theta_star_;
    } else if (plus_num_ > Scalar(0) && plus_den_ > Scalar(0)) {
      last_theta_ = clamp_step(nl2() * plus_num_ / (tree_.total() * plus_den_));
    }

    if (s.residue[i] != Scalar(0)) {
      engine_.apply(s, i, last_theta_, p_i);
      for (const auto &[j, old] : engine_.touched()) {
        const Scalar wj = tree_.weight(static_cast<std::size_t>(j));
        if (!(wj > Scalar(0))) continue;
        const Scalar d2 = s.residue[j] * s.residue[j] - old * old;
        plus_num_ += d2;
        plus_den_ += coef(j) * d2 / wj;
      }
    }
    const Scalar w_new = w_old / shrink;
    const Scalar k2 = s.residue[i] * s.residue[i];
    plus_den_ += coef(i) * k2 * (Scalar(1) / w_new - Scalar(1) / w_old);
    tree_.update(static_cast<std::size_t>(i), w_new);

    if (!(plus_num_ > plus_num_floor_) || !(plus_den_ > Scalar(0))) recompute_plus_sums();
  }

  Scalar nl2() const { return static_cast<Scalar>(n_) * pb_.lambda * pb_.lambda; }
  Scalar coef(Eigen::Index j) const { return nl2() + v_[j] * gamma_; }

  void recompute_plus_sums() {
    const auto &s = result_.state;
    plus_num_ = Scalar(0);
    plus_den_ = Scalar(0);
    for (Eigen::Index j = 0; j < n_; ++j) {
      const Scalar wj = tree_.weight(static_cast<std::size_t>(j));
      if (!(wj > Scalar(0))) continue;
      const Scalar k2 = s.residue[j] * s.residue[j];
      plus_num_ += k2;
      plus_den_ += coef(j) * k2 / wj;
    }
    plus_num_floor_ = plus_num_ * Scalar(1e-8);
  }

  const Problem<Scalar> &pb_;
  const SolverConfig &cfg_;
  const SolveCallbacks<Scalar> &cb_;
  UpdateEngine<Scalar> engine_;
  Rng rng_;
  SolveResult<Scalar> result_;
  Eigen::Index n_ = 0;
  Eigen::Index batch_ = 1;
  Vector<Scalar> v_;
  Scalar gamma_{};
  Scalar theta_star_{};
  Scalar uniform_theta_{};
  Scalar last_theta_{};
  double elapsed_ms_ = 0;

  SumTree<Scalar> tree_;
  Scalar plus_num_{};
  Scalar plus_den_{};
  Scalar plus_num_floor_{};
};

}  // namespace detail

/// Runs the configured variant from alpha = 0 (or `initial_alpha`), logging
/// a RunRecord at epoch 0 and `checks_per_epoch` times per pass, and stops
/// on the epoch budget, on gap <= gap_tol, on a zero residue, or on a
/// non-finite metric.
template <typename Scalar>
SolveResult<Scalar> solve(const Dataset<Scalar> &ds, const LossModel &loss,
                          const SolverConfig &cfg, const SolveCallbacks<Scalar> &cb = {},
                          std::optional<Vector<Scalar>> initial_alpha = std::nullopt) {
  validate(cfg, ds.samples());
  const Problem<Scalar> pb(ds, loss, static_cast<Scalar>(cfg.lambda));
  SolverState<Scalar> state = initial_alpha ? make_state(pb, std::move(*initial_alpha))
                                            : make_state(pb);
  detail::Runner<Scalar> runner(pb, cfg, cb, std::move(state));
  return runner.run();
}

}  // namespace adfsdca

#endif  // ADFSDCA_SOLVER_HPP
