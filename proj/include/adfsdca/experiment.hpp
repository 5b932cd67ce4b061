#ifndef ADFSDCA_EXPERIMENT_HPP
#define ADFSDCA_EXPERIMENT_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "adfsdca/losses.hpp"
#include "adfsdca/solver.hpp"

namespace adfsdca {

struct VariantSpec {
  Variant variant = AdfSdca{};
  ThetaMode theta_mode = ThetaMode::PerIteration;
  Regime regime = Regime::AllConvex;
  /// File-name label, unique within an experiment.
  std::string label;
};

struct ExperimentSpec {
  std::string data_path;
  LossKind loss = LossKind::Quadratic;
  /// Defaults to 1/n once the data is loaded.
  std::optional<double> lambda;
  std::vector<VariantSpec> variants;
  int epochs = 30;
  double gap_tol = 1e-10;
  std::vector<std::uint64_t> seeds{42};
  std::string out_dir = "results";
  std::optional<long long> features;
  int checks_per_epoch = 1;
  bool timing = true;
  int jobs = 1;
};

/// Parses one variant description such as `adfsdca`, `plus:s=10`,
/// `minibatch:b=8,theta=fixed` or `uniform:regime=average`.
VariantSpec parse_variant(const std::string &text, ThetaMode default_theta,
                          Regime default_regime);

/// Parses command-line arguments (without the program name). `--config FILE`
/// reads `key=value` lines using the long flag names; flags given on the
/// command line override the file. Throws UsageError naming the bad flag.
ExperimentSpec parse_args(const std::vector<std::string> &args);

std::string usage();

/// Checks that the input file is readable and the output directory can be
/// created. Throws IoError naming the path.
void validate_paths(const ExperimentSpec &spec);

struct RunSummary {
  std::string variant;
  std::uint64_t seed = 0;
  double epochs_to_tol = 0;  // +inf when the tolerance was never reached
  double final_epoch = 0;
  double final_gap = 0;
  SolveStatus status = SolveStatus::EpochBudget;
};

/// Runs every (variant, seed) pair, writes `<out>/<label>_<seed>.csv` per
/// run and `<out>/summary.csv`, and returns 0, or 1 if any run diverged.
int run_experiment(const ExperimentSpec &spec, std::ostream &log);

/// Entry point of the command-line tool: exit code 0 on success, 1 on run
/// or I/O failure, 2 on usage error.
int cli_main(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);

}  // namespace adfsdca

#endif  // ADFSDCA_EXPERIMENT_HPP
