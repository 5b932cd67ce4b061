#include "adfsdca/experiment.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include "adfsdca/libsvm.hpp"
#include "adfsdca/metrics.hpp"

namespace adfsdca {
namespace {

namespace fs = std::filesystem;

using RawOptions = std::map<std::string, std::vector<std::string>>;

const std::set<std::string> &known_keys() {
  static const std::set<std::string> keys{
      "data", "loss", "lambda", "variant", "epochs", "seed", "gap-tol", "out",
      "features", "checks-per-epoch", "theta", "regime", "no-timing", "jobs"};
  return keys;
}

const std::set<std::string> &repeatable_keys() {
  static const std::set<std::string> keys{"variant", "seed"};
  return keys;
}

std::string trim(const std::string &s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

RawOptions read_config(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw UsageError("--config: cannot read '" + path + "'");
  RawOptions raw;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw UsageError("--config: " + path + ":" + std::to_string(lineno) +
                       ": expected key=value");
    }
    std::string key = trim(line.substr(0, eq));
    if (key.rfind("--", 0) == 0) key = key.substr(2);
    if (!known_keys().count(key)) {
      throw UsageError("--config: " + path + ":" + std::to_string(lineno) +
                       ": unknown key '" + key + "'");
    }
    const std::string value = trim(line.substr(eq + 1));
    auto &slot = raw[key];
    if (!repeatable_keys().count(key)) slot.clear();
    slot.push_back(value);
  }
  return raw;
}

double to_real(const std::string &flag, const std::string &text) {
  double v = 0;
  const char *b = text.data();
  const char *e = b + text.size();
  const auto res = std::from_chars(b, e, v);
  if (res.ec != std::errc() || res.ptr != e || text.empty() || !std::isfinite(v)) {
    throw UsageError("--" + flag + ": expected a real number, got '" + text + "'");
  }
  return v;
}

long long to_integer(const std::string &flag, const std::string &text) {
  long long v = 0;
  const char *b = text.data();
  const char *e = b + text.size();
  const auto res = std::from_chars(b, e, v);
  if (res.ec != std::errc() || res.ptr != e || text.empty()) {
    throw UsageError("--" + flag + ": expected an integer, got '" + text + "'");
  }
  return v;
}

ThetaMode to_theta(const std::string &flag, const std::string &text) {
  if (text == "adaptive") return ThetaMode::PerIteration;
  if (text == "fixed") return ThetaMode::FixedThetaStar;
  throw UsageError("--" + flag + ": theta must be 'adaptive' or 'fixed', got '" + text + "'");
}

Regime to_regime(const std::string &flag, const std::string &text) {
  if (text == "all") return Regime::AllConvex;
  if (text == "average") return Regime::AverageConvex;
  throw UsageError("--" + flag + ": regime must be 'all' or 'average', got '" + text + "'");
}

bool to_bool(const std::string &flag, const std::string &text) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw UsageError("--" + flag + ": expected true/false, got '" + text + "'");
}

const std::string &single(const RawOptions &raw, const std::string &key) {
  return raw.at(key).back();
}

double median(std::vector<double> xs) {
  if (xs.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(xs.begin(), xs.end());
  const std::size_t m = xs.size() / 2;
  if (xs.size() % 2 == 1) return xs[m];
  return 0.5 * (xs[m - 1] + xs[m]);
}

}  // namespace

VariantSpec parse_variant(const std::string &text, ThetaMode default_theta,
                          Regime default_regime) {
  const std::string flag = "variant";
  VariantSpec spec;
  spec.theta_mode = default_theta;
  spec.regime = default_regime;

  const auto colon = text.find(':');
  const std::string name = text.substr(0, colon);
  std::map<std::string, std::string> opts;
  if (colon != std::string::npos) {
    std::stringstream ss(text.substr(colon + 1));
    std::string item;
    while (std::getline(ss, item, ',')) {
      const auto eq = item.find('=');
      if (eq == std::string::npos || eq == 0) {
        throw UsageError("--variant: malformed option '" + item + "' in '" + text + "'");
      }
      opts[item.substr(0, eq)] = item.substr(eq + 1);
    }
  }
  auto take = [&](const std::string &key) -> std::optional<std::string> {
    const auto it = opts.find(key);
    if (it == opts.end()) return std::nullopt;
    std::string v = it->second;
    opts.erase(it);
    return v;
  };

  if (name == "adfsdca") {
    spec.variant = AdfSdca{};
  } else if (name == "plus") {
    const auto s = take("s");
    if (!s) throw UsageError("--variant: plus requires s=<shrink>, e.g. plus:s=10");
    const double shrink = to_real(flag, *s);
    if (!(shrink >= 1.0)) {
      throw UsageError("--variant: shrink parameter s must be at least 1, got " + *s);
    }
    spec.variant = AdfSdcaPlus{shrink};
  } else if (name == "minibatch") {
    const auto b = take("b");
    if (!b) throw UsageError("--variant: minibatch requires b=<batch>, e.g. minibatch:b=8");
    const long long batch = to_integer(flag, *b);
    if (batch < 1) throw UsageError("--variant: batch size must be >= 1, got " + *b);
    spec.variant = MiniBatch{static_cast<Eigen::Index>(batch)};
  } else if (name == "uniform") {
    spec.variant = UniformBaseline{};
  } else {
    throw UsageError("--variant: unknown variant '" + name +
                     "' (expected adfsdca, plus, minibatch or uniform)");
  }
  if (const auto t = take("theta")) spec.theta_mode = to_theta(flag, *t);
  if (const auto r = take("regime")) spec.regime = to_regime(flag, *r);
  if (!opts.empty()) {
    throw UsageError("--variant: unknown option '" + opts.begin()->first + "' for '" +
                     name + "'");
  }

  spec.label = variant_label(spec.variant);
  if (spec.theta_mode == ThetaMode::FixedThetaStar) spec.label += "-fixed";
  if (spec.regime == Regime::AverageConvex) spec.label += "-avg";
  return spec;
}

std::string usage() {
  return "usage: adfsdca --data PATH --variant NAME [--variant NAME ...] [options]\n"
         "\n"
         "  --data PATH             LIBSVM file (.gz accepted)\n"
         "  --loss NAME             quadratic | logistic (default quadratic)\n"
         "  --lambda REAL           regularisation (default 1/n)\n"
         "  --variant NAME          adfsdca | plus:s=S | minibatch:b=B | uniform,\n"
         "                          optionally followed by ,theta=fixed ,regime=average\n"
         "  --epochs INT            passes over the data (default 30)\n"
         "  --seed INT              repeatable; one run per seed (default 42)\n"
         "  --gap-tol REAL          stop once the duality gap is below (default 1e-10)\n"
         "  --out DIR               output directory (default results)\n"
         "  --features INT          feature count override\n"
         "  --checks-per-epoch INT  logged points per pass (default 1)\n"
         "  --theta MODE            adaptive | fixed, default for all variants\n"
         "  --regime NAME           all | average, default for all variants\n"
         "  --no-timing             write wall_ms = 0 for byte-reproducible output\n"
         "  --jobs INT              concurrent runs (default 1)\n"
         "  --config FILE           key=value lines with the long flag names\n";
}

ExperimentSpec parse_args(const std::vector<std::string> &args) {
  CLI::App app{"adfsdca experiment runner"};
  app.set_help_flag();
  app.allow_windows_style_options(false);

  std::map<std::string, std::string> singles;
  std::vector<std::string> variants;
  std::vector<std::string> seeds;
  std::string config_path;
  bool no_timing = false;

  for (const auto &key : known_keys()) {
    if (key == "variant" || key == "seed" || key == "no-timing") continue;
    app.add_option("--" + key, singles[key]);
  }
  app.add_option("--variant", variants);
  app.add_option("--seed", seeds);
  app.add_flag("--no-timing", no_timing);
  app.add_option("--config", config_path);

  std::vector<std::string> argv_rev(args.rbegin(), args.rend());
  try {
    app.parse(argv_rev);
  } catch (const CLI::ParseError &e) {
    throw UsageError(e.what());
  }

  RawOptions raw;
  if (app.count("--config") > 0) raw = read_config(config_path);
  for (const auto &key : known_keys()) {
    if (app.count("--" + key) == 0) continue;
    if (key == "variant") {
      raw[key] = variants;
    } else if (key == "seed") {
      raw[key] = seeds;
    } else if (key == "no-timing") {
      raw[key] = {no_timing ? "true" : "false"};
    } else {
      raw[key] = {singles[key]};
    }
  }

  ExperimentSpec spec;
  if (!raw.count("data")) throw UsageError("--data: required");
  spec.data_path = single(raw, "data");
  if (raw.count("loss")) {
    const auto &l = single(raw, "loss");
    if (l != "quadratic" && l != "logistic") {
      throw UsageError("--loss: expected quadratic or logistic, got '" + l + "'");
    }
    spec.loss = loss_kind_from_string(l);
  }
  if (raw.count("lambda")) {
    const double lam = to_real("lambda", single(raw, "lambda"));
    if (!(lam > 0)) throw UsageError("--lambda: must be positive");
    spec.lambda = lam;
  }
  if (raw.count("epochs")) {
    const long long e = to_integer("epochs", single(raw, "epochs"));
    if (e < 0 || e > std::numeric_limits<int>::max()) throw UsageError("--epochs: out of range");
    spec.epochs = static_cast<int>(e);
  }
  if (raw.count("gap-tol")) spec.gap_tol = to_real("gap-tol", single(raw, "gap-tol"));
  if (raw.count("out")) spec.out_dir = single(raw, "out");
  if (raw.count("features")) {
    const long long f = to_integer("features", single(raw, "features"));
    if (f < 1) throw UsageError("--features: must be >= 1");
    spec.features = f;
  }
  if (raw.count("checks-per-epoch")) {
    const long long c = to_integer("checks-per-epoch", single(raw, "checks-per-epoch"));
    if (c < 1 || c > 1000000) throw UsageError("--checks-per-epoch: must be in [1, 1e6]");
    spec.checks_per_epoch = static_cast<int>(c);
  }
  if (raw.count("jobs")) {
    const long long j = to_integer("jobs", single(raw, "jobs"));
    if (j < 1 || j > 1024) throw UsageError("--jobs: must be in [1, 1024]");
    spec.jobs = static_cast<int>(j);
  }
  if (raw.count("no-timing")) spec.timing = !to_bool("no-timing", single(raw, "no-timing"));

  const ThetaMode theta =
      raw.count("theta") ? to_theta("theta", single(raw, "theta")) : ThetaMode::PerIteration;
  const Regime regime =
      raw.count("regime") ? to_regime("regime", single(raw, "regime")) : Regime::AllConvex;

  if (raw.count("seed")) {
    spec.seeds.clear();
    for (const auto &s : raw.at("seed")) {
      const long long v = to_integer("seed", s);
      if (v < 0) throw UsageError("--seed: must be non-negative, got " + s);
      spec.seeds.push_back(static_cast<std::uint64_t>(v));
    }
  }
  if (!raw.count("variant") || raw.at("variant").empty()) {
    throw UsageError("--variant: at least one variant is required");
  }
  std::set<std::string> labels;
  for (const auto &v : raw.at("variant")) {
    VariantSpec vs = parse_variant(v, theta, regime);
    if (!labels.insert(vs.label).second) {
      throw UsageError("--variant: duplicate variant '" + vs.label + "'");
    }
    spec.variants.push_back(std::move(vs));
  }
  std::set<std::uint64_t> unique_seeds(spec.seeds.begin(), spec.seeds.end());
  if (unique_seeds.size() != spec.seeds.size()) throw UsageError("--seed: duplicate seed");
  return spec;
}

void validate_paths(const ExperimentSpec &spec) {
  std::ifstream in(spec.data_path);
  if (!in) throw IoError("cannot read data file '" + spec.data_path + "'");
  std::error_code ec;
  fs::create_directories(spec.out_dir, ec);
  if (ec || !fs::is_directory(spec.out_dir)) {
    throw IoError("cannot create output directory '" + spec.out_dir + "'");
  }
}

int run_experiment(const ExperimentSpec &spec, std::ostream &log) {
  LibsvmOptions opts;
  if (spec.features) opts.features = static_cast<Eigen::Index>(*spec.features);
  const Dataset<double> ds = [&] {
    try {
      return load_libsvm(spec.data_path, opts);
    } catch (const ParseError &e) {
      throw ParseError(e.line(), spec.data_path + ": " + e.what());
    } catch (const IndexError &e) {
      throw IndexError(e.line(), spec.data_path + ": " + e.what());
    } catch (const IoError &e) {
      throw IoError(spec.data_path + ": " + e.what());
    }
  }();
  const double lambda = spec.lambda.value_or(1.0 / static_cast<double>(ds.samples()));
  const LossModel loss{spec.loss};
  for (const auto &v : spec.variants) {
    SolverConfig cfg;
    cfg.lambda = lambda;
    cfg.variant = v.variant;
    validate(cfg, ds.samples());
  }

  std::error_code ec;
  fs::create_directories(spec.out_dir, ec);
  if (ec) throw IoError("cannot create output directory '" + spec.out_dir + "'");

  log << "data " << spec.data_path << ": n=" << ds.samples() << " d=" << ds.features()
      << " lambda=" << format_real(lambda) << " loss=" << to_string(spec.loss) << '\n';

  struct Job {
    std::size_t variant;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (std::size_t v = 0; v < spec.variants.size(); ++v) {
    for (std::uint64_t seed : spec.seeds) jobs.push_back({v, seed});
  }
  std::vector<RunSummary> summaries(jobs.size());
  std::vector<std::string> failures(jobs.size());
  std::atomic<std::size_t> next{0};
  std::mutex log_mutex;

  auto worker = [&] {
    for (std::size_t k = next++; k < jobs.size(); k = next++) {
      const VariantSpec &vs = spec.variants[jobs[k].variant];
      SolverConfig cfg;
      cfg.lambda = lambda;
      cfg.variant = vs.variant;
      cfg.regime = vs.regime;
      cfg.theta_mode = vs.theta_mode;
      cfg.epochs = spec.epochs;
      cfg.seed = jobs[k].seed;
      cfg.gap_tol = spec.gap_tol;
      cfg.checks_per_epoch = spec.checks_per_epoch;
      cfg.timing = spec.timing;
      try {
        const auto result = solve(ds, loss, cfg);
        const fs::path path =
            fs::path(spec.out_dir) / (vs.label + "_" + std::to_string(cfg.seed) + ".csv");
        std::ofstream out(path);
        if (!out) throw IoError("cannot write '" + path.string() + "'");
        write_csv(result.records, out);

        RunSummary &s = summaries[k];
        s.variant = vs.label;
        s.seed = cfg.seed;
        s.status = result.status;
        s.epochs_to_tol = std::numeric_limits<double>::infinity();
        for (const auto &r : result.records) {
          if (r.gap <= spec.gap_tol) {
            s.epochs_to_tol = r.epoch;
            break;
          }
        }
        s.final_epoch = result.records.back().epoch;
        s.final_gap = result.records.back().gap;
        std::lock_guard<std::mutex> lock(log_mutex);
        log << vs.label << " seed " << cfg.seed << ": " << to_string(result.status)
            << " after " << format_real(s.final_epoch) << " epochs, gap "
            << format_real(s.final_gap) << '\n';
      } catch (const std::exception &e) {
        failures[k] = vs.label + " seed " + std::to_string(jobs[k].seed) + ": " + e.what();
      }
    }
  };
  const int nthreads = std::max(1, std::min<int>(spec.jobs, static_cast<int>(jobs.size())));
  if (nthreads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
    for (auto &t : pool) t.join();
  }
  for (const auto &f : failures) {
    if (!f.empty()) throw IoError(f);
  }

  const fs::path summary_path = fs::path(spec.out_dir) / "summary.csv";
  std::ofstream summary(summary_path);
  if (!summary) throw IoError("cannot write '" + summary_path.string() + "'");
  summary << "variant,seed,epochs_to_tol,final_epoch,final_gap,status\n";
  bool diverged = false;
  for (const auto &s : summaries) {
    summary << s.variant << ',' << s.seed << ',' << format_real(s.epochs_to_tol) << ','
            << format_real(s.final_epoch) << ',' << format_real(s.final_gap) << ','
            << to_string(s.status) << '\n';
    diverged = diverged || s.status == SolveStatus::Diverged;
  }
  for (const auto &vs : spec.variants) {
    std::vector<double> tol, epoch, gap;
    for (const auto &s : summaries) {
      if (s.variant != vs.label) continue;
      tol.push_back(s.epochs_to_tol);
      epoch.push_back(s.final_epoch);
      gap.push_back(s.final_gap);
    }
    summary << vs.label << ",median," << format_real(median(tol)) << ','
            << format_real(median(epoch)) << ',' << format_real(median(gap)) << ",-\n";
  }
  summary.flush();
  if (!summary) throw IoError("failed writing '" + summary_path.string() + "'");
  return diverged ? 1 : 0;
}

int cli_main(const std::vector<std::string> &args, std::ostream &out, std::ostream &err) {
  if (std::find(args.begin(), args.end(), "--help") != args.end() ||
      std::find(args.begin(), args.end(), "-h") != args.end()) {
    out << usage();
    return 0;
  }
  ExperimentSpec spec;
  try {
    spec = parse_args(args);
  } catch (const UsageError &e) {
    err << "error: " << e.what() << "\n\n" << usage();
    return 2;
  }
  try {
    validate_paths(spec);
    return run_experiment(spec, out);
  } catch (const RangeError &e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception &e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace adfsdca
