#include "adfsdca/alias_table.hpp"

#include <gtest/gtest.h>

#include "adfsdca/errors.hpp"
#include "test_support.hpp"

namespace adfsdca {
namespace {

using testing::alias_reconstruction;
using testing::six_sigma;

TEST(AliasTable, PointMassAlwaysDrawn) {
  const auto t = alias_build(Eigen::Vector3d(1, 0, 0));
  Rng rng(3);
  for (int k = 0; k < 10000; ++k) ASSERT_EQ(t.sample(rng), 0u);
  const auto u = alias_build(Eigen::Vector2d(1, 0));
  for (int k = 0; k < 10000; ++k) ASSERT_EQ(u.sample(rng), 0u);
}

TEST(AliasTable, UniformPairKeepsItsColumns) {
  const auto t = alias_build(Eigen::Vector2d(0.5, 0.5));
  EXPECT_EQ(t.prob()[0], 1.0);
  EXPECT_EQ(t.prob()[1], 1.0);
}

TEST(AliasTable, ReconstructsSmallExample) {
  const Eigen::Vector4d p(0.1, 0.2, 0.3, 0.4);
  const auto t = alias_build(p);
  EXPECT_LE((alias_reconstruction(t) - p).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(AliasTable, ReconstructsRandomDistributions) {
  std::mt19937_64 gen(123);
  for (int trial = 0; trial < 1000; ++trial) {
    const Eigen::Index n = 2 + trial % 63;
    const Eigen::VectorXd p = testing::random_distribution(gen, n);
    const auto t = alias_build(p);
    ASSERT_LE((alias_reconstruction(t) - p).cwiseAbs().maxCoeff(), 1e-12) << "trial " << trial;
    for (std::size_t i = 0; i < t.size(); ++i) {
      ASSERT_GE(t.prob()[i], 0.0);
      ASSERT_LE(t.prob()[i], 1.0);
    }
  }
}

TEST(AliasTable, UnnormalisedWeightsAreAccepted) {
  const auto t = alias_build(Eigen::Vector3d(2, 6, 2));
  EXPECT_LE((alias_reconstruction(t) - Eigen::Vector3d(0.2, 0.6, 0.2)).norm(), 1e-12);
}

TEST(AliasTable, FrequenciesWithinSixSigma) {
  const std::size_t draws = 1000000;
  for (const Eigen::VectorXd &p :
       {Eigen::VectorXd(Eigen::Vector2d(0.5, 0.5)), Eigen::VectorXd(Eigen::Vector2d(0.1, 0.9)),
        Eigen::VectorXd(Eigen::Vector4d(0.1, 0.2, 0.3, 0.4))}) {
    const auto t = alias_build(p);
    Rng rng(99);
    std::vector<std::size_t> counts(t.size(), 0);
    for (std::size_t k = 0; k < draws; ++k) ++counts[t.sample(rng)];
    for (std::size_t i = 0; i < t.size(); ++i) {
      const double expected = p[static_cast<Eigen::Index>(i)] * draws;
      EXPECT_LE(std::abs(counts[i] - expected), six_sigma(p[static_cast<Eigen::Index>(i)], draws))
          << "i=" << i;
    }
  }
}

TEST(AliasTable, ZeroEntriesAreNeverDrawn) {
  std::mt19937_64 gen(5);
  const Eigen::VectorXd p = testing::random_distribution(gen, 50, 0.5);
  const auto t = alias_build(p);
  Rng rng(8);
  for (int k = 0; k < 200000; ++k) ASSERT_GT(p[static_cast<Eigen::Index>(t.sample(rng))], 0.0);
}

TEST(AliasTable, RejectsBadInput) {
  EXPECT_THROW(alias_build(Eigen::VectorXd()), DegenerateDistribution);
  EXPECT_THROW(alias_build(Eigen::Vector2d(0, 0)), DegenerateDistribution);
  EXPECT_THROW(alias_build(Eigen::Vector2d(-0.1, 1.1)), DomainError);
  EXPECT_THROW(alias_build(Eigen::Vector2d(std::nan(""), 1)), DomainError);
}

}  // namespace
}  // namespace adfsdca
