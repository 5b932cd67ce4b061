#include "adfsdca/solver.hpp"

#include <charconv>

namespace adfsdca {

namespace {
std::string short_real(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}
}  // namespace

std::string variant_label(const Variant &v) {
  struct Visitor {
    std::string operator()(const AdfSdca &) const { return "adfsdca"; }
    std::string operator()(const AdfSdcaPlus &p) const { return "plus-s" + short_real(p.shrink); }
    std::string operator()(const MiniBatch &m) const {
      return "minibatch-b" + std::to_string(m.batch);
    }
    std::string operator()(const UniformBaseline &) const { return "uniform"; }
  };
  return std::visit(Visitor{}, v);
}

void validate(const SolverConfig &cfg, Eigen::Index samples) {
  if (!(cfg.lambda > 0)) throw RangeError("lambda must be positive");
  if (cfg.epochs < 0) throw RangeError("epochs must be >= 0");
  if (cfg.checks_per_epoch < 1) throw RangeError("checks_per_epoch must be >= 1");
  if (const auto *plus = std::get_if<AdfSdcaPlus>(&cfg.variant)) {
    if (!(plus->shrink >= 1.0)) throw RangeError("shrink parameter must be >= 1");
  }
  if (const auto *mb = std::get_if<MiniBatch>(&cfg.variant)) {
    if (mb->batch < 1 || mb->batch > samples) {
      throw RangeError("batch size " + std::to_string(mb->batch) + " outside [1, " +
                       std::to_string(samples) + "]");
    }
  }
}

std::string_view to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::GapReached: return "gap_reached";
    case SolveStatus::EpochBudget: return "epoch_budget";
    case SolveStatus::Converged: return "converged";
    case SolveStatus::Diverged: return "diverged";
  }
  return "unknown";
}

}  // namespace adfsdca
