// Writes a synthetic LIBSVM dataset with row norms spread over a chosen
// number of decades.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "adfsdca/errors.hpp"
#include "adfsdca/libsvm.hpp"
#include "adfsdca/synthetic.hpp"

int main(int argc, char **argv) {
  adfsdca::SyntheticOptions opt;
  std::string out_path;
  std::string loss = "quadratic";
  CLI::App app{"synthetic LIBSVM data generator"};
  app.add_option("-o,--out", out_path, "output file")->required();
  app.add_option("-n,--samples", opt.samples, "rows")->check(CLI::PositiveNumber);
  app.add_option("-d,--features", opt.features, "columns")->check(CLI::PositiveNumber);
  app.add_option("--density", opt.density, "fraction of nonzeros per row")
      ->check(CLI::Range(1e-9, 1.0));
  app.add_option("--spread", opt.norm_spread, "log10 half-range of squared row norms")
      ->check(CLI::NonNegativeNumber);
  app.add_option("--noise", opt.noise, "label noise")->check(CLI::NonNegativeNumber);
  app.add_option("--loss", loss, "quadratic | logistic")
      ->check(CLI::IsMember({"quadratic", "logistic"}));
  app.add_option("--seed", opt.seed, "generator seed");
  CLI11_PARSE(app, argc, argv);

  try {
    opt.loss = adfsdca::loss_kind_from_string(loss);
    const auto ds = adfsdca::make_synthetic(opt);
    std::ofstream out(out_path);
    if (!out) throw adfsdca::IoError("cannot write '" + out_path + "'");
    adfsdca::write_libsvm(out, ds);
    if (!out) throw adfsdca::IoError("failed writing '" + out_path + "'");
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
