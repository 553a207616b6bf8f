#include "saabo/errors.hpp"
#include "saabo/normal.hpp"
#include "saabo/sampling.hpp"
#include "saabo/sobol.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <set>

using namespace saabo;
using saabo::testing::Gen;

namespace {

double sobol_value(int dim, std::uint64_t index) { return static_cast<double>(sobol_integer(dim, index)) * 0x1.0p-32; }

// The reference tables list points in Gray-code order; the engine uses the
// natural binary order, so point i of the table is our point gray(i).
double gray_sobol_value(int dim, std::uint64_t i) { return sobol_value(dim, i ^ (i >> 1)); }

}  // namespace

TEST(Sobol, MatchesReferenceSequence) {
  // index, then dimensions 0, 1, 2, 5, 11
  const double ref[][6] = {
      {1, 0.5, 0.5, 0.5, 0.5, 0.5},
      {2, 0.75, 0.25, 0.25, 0.75, 0.75},
      {3, 0.25, 0.75, 0.75, 0.25, 0.25},
      {5, 0.875, 0.875, 0.125, 0.625, 0.875},
      {7, 0.125, 0.625, 0.375, 0.375, 0.125},
      {11, 0.4375, 0.5625, 0.1875, 0.0625, 0.3125},
      {15, 0.0625, 0.9375, 0.5625, 0.1875, 0.1875},
  };
  const int dims[] = {0, 1, 2, 5, 11};
  for (const auto& row : ref) {
    for (int j = 0; j < 5; ++j) EXPECT_EQ(gray_sobol_value(dims[j], static_cast<std::uint64_t>(row[0])), row[j + 1]);
  }
}

TEST(Sobol, MatchesReferenceAtHighIndexAndDimension) {
  const double ref[][6] = {
      {37, 0.921875, 0.921875, 0.078125, 0.359375, 0.984375},
      {1000, 0.2197265625, 0.6767578125, 0.2548828125, 0.7685546875, 0.3701171875},
      {1024, 0.00146484375, 0.48681640625, 0.92138671875, 0.67529296875, 0.64306640625},
  };
  const int dims[] = {0, 3, 11, 100, 1110};
  for (const auto& row : ref) {
    for (int j = 0; j < 5; ++j) EXPECT_EQ(gray_sobol_value(dims[j], static_cast<std::uint64_t>(row[0])), row[j + 1]);
  }
}

TEST(Sobol, UnscrambledEngineSkipsOrigin) {
  SobolEngine e(2);
  const MatrixXd P = e.draw(3);
  EXPECT_EQ(P(0, 0), 0.5);
  EXPECT_EQ(P(1, 0), 0.25);
  EXPECT_EQ(P(2, 0), 0.75);
  EXPECT_EQ(P(2, 1), 0.25);
  EXPECT_EQ(e.index(), 3u);
}

TEST(Sobol, DrawsAreContiguous) {
  SobolEngine a(4, 99), b(4, 99);
  const MatrixXd whole = a.draw(20);
  const MatrixXd first = b.draw(7), second = b.draw(13);
  EXPECT_EQ(whole.topRows(7), first);
  EXPECT_EQ(whole.bottomRows(13), second);
}

TEST(Sobol, RejectsTooManyDimensions) {
  EXPECT_THROW({ SobolEngine e(kMaxSobolDimension + 1); }, ConfigError);
  EXPECT_NO_THROW({ SobolEngine e(kMaxSobolDimension); });
}

TEST(Sobol, PropertyScrambledNetHasOnePointPerElementaryInterval) {
  // A scrambled prefix of 2^k points keeps exactly one point per 1/2^k strip
  // in each coordinate.
  Gen g(3);
  for (int t = 0; t < 20; ++t) {
    const int k = static_cast<int>(g.integer(2, 9));
    const Eigen::Index n = Eigen::Index{1} << k;
    SobolEngine e(5, g.seed() | 1);
    const MatrixXd P = e.draw(n);
    for (Eigen::Index j = 0; j < P.cols(); ++j) {
      std::set<long long> cells;
      for (Eigen::Index i = 0; i < n; ++i) {
        ASSERT_GT(P(i, j), 0.0);
        ASSERT_LT(P(i, j), 1.0);
        cells.insert(static_cast<long long>(std::floor(P(i, j) * static_cast<double>(n))));
      }
      EXPECT_EQ(static_cast<Eigen::Index>(cells.size()), n);
    }
  }
}

TEST(Normal, InverseCdfMatchesReference) {
  const double ref[][2] = {
      {1e-300, -37.0470962993612},    {1e-20, -9.262340089798409},   {1e-10, -6.361340902404056},
      {0.001, -3.090232306167813},    {0.02425, -1.972961051311885}, {0.1, -1.2815515655446004},
      {0.5, 0.0},                     {0.7, 0.5244005127080407},     {0.97575, 1.972961051311885},
      {0.999, 3.090232306167813},     {1 - 1e-12, 7.0344869100478356},
  };
  for (const auto& r : ref) EXPECT_NEAR(inverse_normal_cdf(r[0]), r[1], 1e-12 * std::max(1.0, std::abs(r[1])));
}

TEST(Normal, PropertyCdfInvertsQuantile) {
  Gen g(4);
  for (int t = 0; t < 2000; ++t) {
    const double u = g.uniform(1e-12, 1.0 - 1e-12);
    EXPECT_NEAR(normal_cdf(inverse_normal_cdf(u)), u, 1e-14 + 1e-12 * std::min(u, 1.0 - u));
  }
}

TEST(Normal, RejectsOutOfRange) {
  EXPECT_THROW(inverse_normal_cdf(0.0), DomainError);
  EXPECT_THROW(inverse_normal_cdf(1.0), DomainError);
  EXPECT_THROW(inverse_normal_cdf(std::nan("")), DomainError);
}

TEST(BaseSamples, ShapeAndDeterminism) {
  for (SampleMode mode : {SampleMode::iid, SampleMode::rqmc}) {
    const BaseSampleSet a = draw_base_samples(mode, 17, 64, 3, 2);
    const BaseSampleSet b = draw_base_samples(mode, 17, 64, 3, 2);
    EXPECT_EQ(a.num_samples(), 64);
    EXPECT_EQ(a.dim(), 6);
    EXPECT_EQ(a.E(), b.E());
    EXPECT_NE(a.E(), draw_base_samples(mode, 18, 64, 3, 2).E());
    EXPECT_TRUE(a.E().allFinite());
  }
}

TEST(BaseSamples, ColumnsAreNested) {
  for (SampleMode mode : {SampleMode::iid, SampleMode::rqmc}) {
    const MatrixXd small = draw_base_samples(mode, 5, 32, 2).E();
    const MatrixXd big = draw_base_samples(mode, 5, 32, 5).E();
    EXPECT_EQ(big.leftCols(2), small);
  }
}

TEST(BaseSamples, RqmcBeyondSobolCapErrors) {
  EXPECT_THROW(draw_base_samples(SampleMode::rqmc, 1, 4, kMaxSobolDimension + 1), ConfigError);
  EXPECT_NO_THROW(draw_base_samples(SampleMode::iid, 1, 4, kMaxSobolDimension + 1));
}

TEST(BaseSamples, PropertyMomentsAreStandardNormal) {
  // The RQMC mean error over 4096 points is far below the iid error.
  for (SampleMode mode : {SampleMode::iid, SampleMode::rqmc}) {
    const MatrixXd E = draw_base_samples(mode, 9, 4096, 3).E();
    for (Eigen::Index j = 0; j < 3; ++j) {
      const double mean = E.col(j).mean();
      const double var = (E.col(j).array() - mean).square().mean();
      EXPECT_LT(std::abs(mean), mode == SampleMode::iid ? 0.07 : 2e-3);
      EXPECT_NEAR(var, 1.0, mode == SampleMode::iid ? 0.1 : 0.01);
    }
  }
}

TEST(BaseSamples, RqmcIntegrationErrorBeatsIid) {
  // E[max(Z, 0)] = 1/√(2π); spread over 30 independent seeds.
  const double truth = 1.0 / std::sqrt(2.0 * 3.141592653589793);
  double se_iid = 0.0, se_rqmc = 0.0;
  for (std::uint64_t s = 1; s <= 30; ++s) {
    for (SampleMode mode : {SampleMode::iid, SampleMode::rqmc}) {
      const MatrixXd E = draw_base_samples(mode, s, 1024, 1).E();
      const double est = E.col(0).cwiseMax(0.0).mean();
      (mode == SampleMode::iid ? se_iid : se_rqmc) += (est - truth) * (est - truth);
    }
  }
  EXPECT_LT(se_rqmc, 0.01 * se_iid);
}

TEST(Schedule, SizesAreSortedProducts) {
  const std::vector<long long> s = qmc_sample_sizes({2, 3, 4});
  const std::vector<long long> expected{1, 2, 3, 4, 6, 8, 12, 16, 24, 32, 48};
  EXPECT_EQ(s, expected);
  EXPECT_THROW(qmc_sample_sizes({1, 1, 1}), ConfigError);
}

TEST(Reparameterize, AffineInBaseSamples) {
  const VectorXd mu = (VectorXd(2) << 1.0, -2.0).finished();
  MatrixXd L(2, 2);
  L << 2.0, 0.0, 0.5, 1.0;
  const MatrixXd E = (MatrixXd(3, 2) << 0, 0, 1, 0, 0, 1).finished();
  const MatrixXd xi = reparameterize(mu, L, E);
  EXPECT_EQ(xi.row(0), mu.transpose());
  EXPECT_EQ(xi(1, 0), 3.0);
  EXPECT_EQ(xi(1, 1), -1.5);
  EXPECT_EQ(xi(2, 0), 1.0);
  EXPECT_EQ(xi(2, 1), -1.0);
  EXPECT_THROW(reparameterize(mu, L, MatrixXd::Zero(3, 3)), ShapeError);
}
