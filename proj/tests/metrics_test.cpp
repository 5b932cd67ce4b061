#include "adfsdca/metrics.hpp"

#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <locale>
#include <cmath>
#include <limits>
#include <sstream>

#include "adfsdca/solver.hpp"
#include "adfsdca/synthetic.hpp"

namespace adfsdca {
namespace {

Dataset<double> identity_data() {
  return Dataset<double>::from_dense(Eigen::Matrix2d::Identity(), Eigen::Vector2d(1, 2));
}

TEST(Metrics, PrimalAtTheOrigin) {
  const auto ds = Dataset<double>::from_dense(Eigen::Matrix2d::Identity(), Eigen::Vector2d(1, 1));
  const Problem<double> quad(ds, {LossKind::Quadratic}, 0.3);
  EXPECT_DOUBLE_EQ(primal_objective(make_state(quad), quad), 0.5);
  const Problem<double> logit(ds, {LossKind::Logistic}, 0.3);
  EXPECT_DOUBLE_EQ(primal_objective(make_state(logit), logit), std::log(2.0));
}

TEST(Metrics, DeskInstanceAtTheOrigin) {
  // X = I, y = (1, 2), lambda = 1. P(0) = (1/2)(1/2 + 2) = 1.25; the mapped
  // dual point is alpha = y, giving D = 1.25 - 0.625.
  const auto ds = identity_data();
  const Problem<double> pb(ds, {LossKind::Quadratic}, 1.0);
  const auto s = make_state(pb);
  EXPECT_DOUBLE_EQ(primal_objective(s, pb), 1.25);
  EXPECT_DOUBLE_EQ(dual_objective_mapped(s, pb), 0.625);
  EXPECT_DOUBLE_EQ(duality_gap(s, pb), 0.625);
  EXPECT_DOUBLE_EQ(dual_objective(Eigen::VectorXd(Eigen::Vector2d(1, 2)), pb), 0.625);
}

TEST(Metrics, GapClosesAtTheOptimum) {
  // Per coordinate (w - y)/2 + w = 0, so w* = y/3 and P* = 5/6.
  const auto ds = identity_data();
  const Problem<double> pb(ds, {LossKind::Quadratic}, 1.0);
  const Eigen::Vector2d w_star(1.0 / 3, 2.0 / 3);
  const auto s = make_unmapped_state(pb, Eigen::VectorXd(w_star), Eigen::VectorXd(Eigen::VectorXd::Zero(2)));
  EXPECT_NEAR(primal_objective(s, pb), 5.0 / 6, 1e-15);
  EXPECT_NEAR(dual_objective_mapped(s, pb), 5.0 / 6, 1e-15);
  EXPECT_NEAR(primal_gradient(s, pb).norm(), 0.0, 1e-15);
}

TEST(Metrics, WeakDualityOnRandomPoints) {
  const auto ds = make_synthetic({.samples = 40, .features = 7, .density = 0.6,
                                  .loss = LossKind::Logistic, .seed = 12});
  Rng rng(3);
  for (const LossKind kind : {LossKind::Quadratic, LossKind::Logistic}) {
    const Problem<double> pb(ds, {kind}, 0.05);
    for (int trial = 0; trial < 50; ++trial) {
      Eigen::VectorXd w(7);
      for (auto &x : w) x = 4.0 * (rng.uniform() - 0.5);
      const auto s = make_unmapped_state(pb, w, Eigen::VectorXd(Eigen::VectorXd::Zero(40)));
      EXPECT_GE(duality_gap(s, pb), -1e-12);
    }
  }
}

TEST(Metrics, HistogramExamples) {
  auto h = residual_histogram(Eigen::Vector3d::Zero(), 4);
  EXPECT_EQ(h.upper, 0.0);
  EXPECT_EQ(h.counts, (std::vector<std::size_t>{3, 0, 0, 0}));

  h = residual_histogram(Eigen::Vector3d(1, -1, 1), 3);
  EXPECT_EQ(h.upper, 1.0);
  EXPECT_EQ(h.counts, (std::vector<std::size_t>{0, 0, 3}));

  h = residual_histogram(Eigen::Vector4d(0, 0.5, -1.0, 0.2), 2);
  EXPECT_EQ(h.counts, (std::vector<std::size_t>{2, 2}));

  EXPECT_THROW(residual_histogram(Eigen::Vector3d(1, 2, 3), 0), RangeError);
}

TEST(Metrics, HistogramCountsEverySample) {
  Rng rng(9);
  Eigen::VectorXd kappa(1000);
  for (auto &k : kappa) k = static_cast<double>(rng.below(1000)) - 500.0;
  for (std::size_t bins : {1u, 7u, 64u}) {
    const auto h = residual_histogram(kappa, bins);
    std::size_t total = 0;
    for (auto c : h.counts) total += c;
    EXPECT_EQ(total, 1000u);
  }
}

TEST(Metrics, CsvHeaderOnly) {
  std::ostringstream out;
  write_csv({}, out);
  EXPECT_EQ(out.str(), std::string(kRecordCsvHeader) + "\n");
}

TEST(Metrics, CsvRows) {
  std::ostringstream out;
  write_csv({{0, 1.5, 0.5, 1, 4, 0.25, 0}, {1, 0.75, 0.5, 0.25, 1, 0.125, 2.5}}, out);
  EXPECT_EQ(out.str(), std::string(kRecordCsvHeader) +
                           "\n0,1.5,0.5,1,4,0.25,0\n1,0.75,0.5,0.25,1,0.125,2.5\n");
}

TEST(Metrics, CsvRoundTripIsBitExact) {
  Rng rng(4);
  std::vector<RunRecord> records;
  for (int k = 0; k < 100; ++k) {
    auto r = [&] { return rng.uniform() * (k % 2 ? 1e-300 : 1e200); };
    records.push_back({r(), r(), -r(), r(), r(), r(), r()});
  }
  records.push_back({1, std::numeric_limits<double>::denorm_min(), -0.0, 1e308, 0, 1, 0});
  std::stringstream io;
  write_csv(records, io);
  const auto back = read_csv(io);
  ASSERT_EQ(back.size(), records.size());
  for (std::size_t k = 0; k < records.size(); ++k) {
    EXPECT_EQ(back[k].epoch, records[k].epoch);
    EXPECT_EQ(back[k].primal, records[k].primal);
    EXPECT_EQ(back[k].dual, records[k].dual);
    EXPECT_EQ(back[k].gap, records[k].gap);
    EXPECT_EQ(back[k].residual_sq_norm, records[k].residual_sq_norm);
    EXPECT_EQ(back[k].theta_used, records[k].theta_used);
    EXPECT_EQ(back[k].wall_ms, records[k].wall_ms);
  }
}

struct CommaDecimal : std::numpunct<char> {
  char do_decimal_point() const override { return ','; }
};

TEST(Metrics, CsvIgnoresLocale) {
  const std::locale previous = std::locale::global(std::locale(std::locale::classic(), new CommaDecimal));
  std::ostringstream out;
  out.imbue(std::locale());
  write_csv({{0.5, 1.25, 0, 0, 0, 0, 0}}, out);
  std::istringstream in(out.str());
  in.imbue(std::locale());
  const auto back = read_csv(in);
  std::locale::global(previous);
  EXPECT_EQ(out.str(), std::string(kRecordCsvHeader) + "\n0.5,1.25,0,0,0,0,0\n");
  ASSERT_EQ(back.size(), 1u);
  EXPECT_EQ(back[0].primal, 1.25);
}

TEST(Metrics, ReadCsvRejectsMalformedInput) {
  const std::string h = std::string(kRecordCsvHeader) + "\n";
  for (const std::string &bad : {std::string(""), std::string("epoch,gap\n"),
                                h + "1,2,3\n", h + "1,2,3,4,5,6,x\n", h + "1,2,3,4,5,6,7,8\n"}) {
    std::istringstream in(bad);
    EXPECT_THROW(read_csv(in), ParseError) << bad;
  }
  std::istringstream in(h + "0,1,1,0,0,0,0\n1,2,3,4\n");
  try {
    read_csv(in);
    FAIL();
  } catch (const ParseError &e) {
    EXPECT_EQ(e.line(), 3u);
  }
}

}  // namespace
}  // namespace adfsdca
