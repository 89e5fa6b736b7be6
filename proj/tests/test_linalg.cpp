#include <gtest/gtest.h>

#include <cmath>

#include "psc/errors.hpp"
#include "psc/linalg.hpp"
#include "support.hpp"

using namespace psc;
using psc::testing::gram_schmidt;
using psc::testing::jacobi_rank;
using psc::testing::random_matrix;

namespace {

void expect_orthonormal_columns(const Matrix& m, double tol) {
  const Matrix gram = m.transpose() * m;
  EXPECT_LE((gram - Matrix::Identity(m.cols(), m.cols())).norm(), tol);
}

}  // namespace

TEST(SvdThin, IdentityHasUnitSingularValues) {
  const SvdFactors f = svd_thin(Matrix::Identity(2, 2));
  EXPECT_NEAR(f.singular_values(0), 1.0, 1e-15);
  EXPECT_NEAR(f.singular_values(1), 1.0, 1e-15);
}

TEST(SvdThin, DiagonalWithZero) {
  Matrix a = Matrix::Zero(2, 2);
  a(0, 0) = 3.0;
  const SvdFactors f = svd_thin(a);
  EXPECT_NEAR(f.singular_values(0), 3.0, 1e-15);
  EXPECT_NEAR(f.singular_values(1), 0.0, 1e-15);
}

TEST(SvdThin, PermutationIsOrthogonal) {
  Matrix a(2, 2);
  a << 0, 1, 1, 0;
  const SvdFactors f = svd_thin(a);
  EXPECT_NEAR(f.singular_values(0), 1.0, 1e-15);
  EXPECT_NEAR(f.singular_values(1), 1.0, 1e-15);
}

TEST(SvdThin, ReconstructsRandomShapes) {
  Rng rng(11);
  // Covers both the small-matrix and the divide-and-conquer paths.
  const std::pair<int, int> shapes[] = {{1, 1}, {5, 3}, {3, 5}, {20, 10},
                                        {40, 36}, {36, 60}, {100, 2}};
  for (const auto& [r, c] : shapes) {
    const Matrix a = random_matrix(r, c, rng) * 3.0;
    const SvdFactors f = svd_thin(a);
    const Eigen::Index k = std::min(r, c);
    ASSERT_EQ(f.u.rows(), r);
    ASSERT_EQ(f.u.cols(), k);
    ASSERT_EQ(f.v.rows(), c);
    ASSERT_EQ(f.v.cols(), k);
    const double smax = f.singular_values(0);
    EXPECT_LE((f.u * f.singular_values.asDiagonal() * f.v.transpose() - a).norm(),
              1e-10 * std::max(1.0, smax))
        << r << "x" << c;
    for (Eigen::Index i = 0; i + 1 < k; ++i) {
      EXPECT_GE(f.singular_values(i), f.singular_values(i + 1));
    }
    EXPECT_GE(f.singular_values(k - 1), 0.0);
    expect_orthonormal_columns(f.u, 1e-12);
    expect_orthonormal_columns(f.v, 1e-12);
  }
}

TEST(SvdThin, RejectsEmptyAndNonFinite) {
  EXPECT_THROW(svd_thin(Matrix(0, 3)), InvalidArgument);
  Matrix a = Matrix::Ones(2, 2);
  a(1, 0) = std::nan("");
  EXPECT_THROW(svd_thin(a), InvalidArgument);
  a(1, 0) = std::numeric_limits<double>::infinity();
  EXPECT_THROW(svd_thin(a), InvalidArgument);
}

TEST(PolarDecompose, PositiveDiagonalIsItsOwnH) {
  Matrix a = Matrix::Zero(2, 2);
  a(0, 0) = 2.0;
  a(1, 1) = 3.0;
  const PolarFactors p = polar_decompose(a);
  EXPECT_LE((p.u - Matrix::Identity(2, 2)).norm(), 1e-14);
  EXPECT_LE((p.h - a).norm(), 1e-14);
}

TEST(PolarDecompose, RotationHasIdentityH) {
  const double t = 0.7;
  Matrix r(2, 2);
  r << std::cos(t), -std::sin(t), std::sin(t), std::cos(t);
  const PolarFactors p = polar_decompose(r);
  EXPECT_LE((p.u - r).norm(), 1e-14);
  EXPECT_LE((p.h - Matrix::Identity(2, 2)).norm(), 1e-14);
}

TEST(PolarDecompose, ScaledUnitVector) {
  Matrix a(2, 1);
  a << 0.0, 2.0;
  const PolarFactors p = polar_decompose(a);
  EXPECT_NEAR(p.u(0, 0), 0.0, 1e-15);
  EXPECT_NEAR(p.u(1, 0), 1.0, 1e-15);
  EXPECT_NEAR(p.h(0, 0), 2.0, 1e-15);
}

TEST(PolarDecompose, FactorsSatisfyInvariants) {
  Rng rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::Index cols = 1 + static_cast<Eigen::Index>(rng.below(6));
    const Eigen::Index rows = cols + static_cast<Eigen::Index>(rng.below(8));
    const Matrix a = random_matrix(rows, cols, rng);
    if (!rank_is_full(a, 1e-6).full) continue;
    const PolarFactors p = polar_decompose(a);
    expect_orthonormal_columns(p.u, 1e-12);
    EXPECT_LE((p.u * p.h - a).norm(), 1e-10 * a.norm());
    EXPECT_LE((p.h - p.h.transpose()).norm(), 1e-12);
    Eigen::SelfAdjointEigenSolver<Matrix> eig(p.h);
    EXPECT_GE(eig.eigenvalues().minCoeff(), -1e-12);
    // h is the square root of a^T a.
    EXPECT_LE((p.h * p.h - a.transpose() * a).norm(), 1e-10 * (1.0 + a.squaredNorm()));
  }
}

TEST(PolarDecompose, FactorIsNearestOrthonormalMatrix) {
  Rng rng(19);
  for (int trial = 0; trial < 30; ++trial) {
    const Matrix a = random_matrix(6, 3, rng);
    const Matrix u = polar_factor(a);
    const double best = (a - u).norm();
    for (int c = 0; c < 200; ++c) {
      const Matrix q = gram_schmidt(random_matrix(6, 3, rng));
      EXPECT_LE(best, (a - q).norm() + 1e-12);
    }
  }
}

TEST(PolarDecompose, IndependentOfSvdSignChoice) {
  Rng rng(23);
  const Matrix a = random_matrix(7, 3, rng);
  SvdFactors f = svd_thin(a);
  // Flip the sign of one singular pair: still a valid SVD of a.
  f.u.col(1) *= -1.0;
  f.v.col(1) *= -1.0;
  const Matrix pq = f.u * f.v.transpose();
  EXPECT_LE((polar_factor(a) - pq).norm(), 1e-12);
}

TEST(PolarDecompose, RejectsRankDeficientAndWideInput) {
  Matrix a(3, 2);
  a << 1, 2, 2, 4, 3, 6;
  try {
    polar_decompose(a);
    FAIL() << "expected RankDeficiency";
  } catch (const RankDeficiency& e) {
    EXPECT_LE(e.sigma_min(), 1e-10);
  }
  EXPECT_THROW(polar_decompose(Matrix::Zero(3, 1)), RankDeficiency);
  EXPECT_THROW(polar_decompose(Matrix::Ones(2, 3)), InvalidArgument);
}

TEST(RankIsFull, ZeroColumnIsDeficient) {
  const RankTest r = rank_is_full(Matrix::Zero(2, 1), 1e-10);
  EXPECT_FALSE(r.full);
  EXPECT_EQ(r.sigma_min, 0.0);
}

TEST(RankIsFull, IdentityIsFull) {
  const RankTest r = rank_is_full(Matrix::Identity(3, 3), 1e-10);
  EXPECT_TRUE(r.full);
  EXPECT_NEAR(r.sigma_min, 1.0, 1e-15);
}

TEST(RankIsFull, WideMatrixIsNotFullColumnRank) {
  EXPECT_FALSE(rank_is_full(Matrix::Ones(2, 3)).full);
}

TEST(RankIsFull, DeterminantVariantAgreesOnGaussianDraws) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const Matrix a = gaussian_matrix(6, 3, seed);
    const bool oracle = jacobi_rank(a, 1e-10) == 3;
    EXPECT_EQ(rank_is_full(a).full, oracle) << seed;
    EXPECT_EQ(rank_is_full_det(a), oracle) << seed;
  }
}

TEST(RankIsFull, AgreesWithRankCountingOnThousandInstances) {
  Rng rng(101);
  int deficient = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const Eigen::Index cols = 1 + static_cast<Eigen::Index>(rng.below(10));
    const Eigen::Index rows = 1 + static_cast<Eigen::Index>(rng.below(20));
    Matrix a = random_matrix(rows, cols, rng);
    // A third of the instances get an exactly repeated column.
    if (cols >= 2 && trial % 3 == 0) a.col(cols - 1) = a.col(0);
    const bool oracle = jacobi_rank(a, 1e-10) == cols;
    const RankTest r = rank_is_full(a);
    EXPECT_EQ(r.full, oracle) << rows << "x" << cols;
    if (!oracle) ++deficient;
  }
  EXPECT_GT(deficient, 100);
}

TEST(GaussianMatrix, DeterministicPerSeed) {
  const Matrix a = gaussian_matrix(2, 2, 7);
  const Matrix b = gaussian_matrix(2, 2, 7);
  EXPECT_EQ(a, b);
  EXPECT_NE(gaussian_matrix(3, 2, 0), gaussian_matrix(3, 2, 1));
}

TEST(GaussianMatrix, MomentsOfLargeSample) {
  const Matrix a = gaussian_matrix(1000, 1, 1);
  const double mean = a.mean();
  const double var = (a.array() - mean).square().sum() / (a.size() - 1);
  EXPECT_NEAR(mean, 0.0, 0.1);
  EXPECT_NEAR(var, 1.0, 0.1);
}

TEST(NuclearNorm, DiagonalAndStiefel) {
  Matrix d = Matrix::Zero(2, 2);
  d(0, 0) = 1.0;
  d(1, 1) = 2.0;
  EXPECT_NEAR(nuclear_norm(d), 3.0, 1e-14);
  Rng rng(3);
  const Matrix q = gram_schmidt(random_matrix(5, 3, rng));
  EXPECT_NEAR(nuclear_norm(q), 3.0, 1e-12);
}

TEST(NuclearNorm, MatchesTraceOfPolarH) {
  Rng rng(29);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix a = random_matrix(4, 2, rng);
    const double oracle = psc::testing::nuclear_norm_by_eig(a);
    EXPECT_NEAR(nuclear_norm(a), oracle, 1e-10);
    EXPECT_NEAR(polar_decompose(a).h.trace(), oracle, 1e-10);
  }
}

TEST(SkewSym, SplitMatrix) {
  Rng rng(2);
  const Matrix m = random_matrix(4, 4, rng);
  EXPECT_LE((skew(m) + sym(m) - m).norm(), 1e-15);
  EXPECT_LE((skew(m) + skew(m).transpose()).norm(), 1e-15);
  EXPECT_LE((sym(m) - sym(m).transpose()).norm(), 1e-15);
}
