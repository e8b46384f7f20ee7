#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "rdr/linalg.hpp"

using namespace rdr;

TEST(DenseMatrix, RejectsEmptyAndNonFinite) {
  EXPECT_THROW(DenseMatrix(RowMatrix(0, 3)), BadShape);
  RowMatrix bad = RowMatrix::Ones(2, 2);
  bad(1, 0) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(DenseMatrix{bad}, BadShape);
  bad(1, 0) = std::numeric_limits<double>::infinity();
  EXPECT_THROW(DenseMatrix{bad}, BadShape);
  EXPECT_THROW((DenseMatrix{{1.0, 2.0}, {3.0}}), BadShape);
}

TEST(DenseMatrix, RowAccess) {
  const DenseMatrix a{{1, 2, 3}, {4, 5, 6}};
  EXPECT_EQ(a.rows(), 2);
  EXPECT_EQ(a.cols(), 3);
  EXPECT_EQ(a.row(1).size(), 3);
  EXPECT_EQ(a(1, 2), 6.0);
}

TEST(RowGeometry, SmallCases) {
  auto g = row_geometry(DenseMatrix{{3, 4}, {0, 1}}, false);
  EXPECT_EQ(g.row_norms_sq[0], 25.0);
  EXPECT_EQ(g.row_norms_sq[1], 1.0);
  EXPECT_EQ(g.frob_sq, 26.0);
  EXPECT_FALSE(g.gram.has_value());

  g = row_geometry(DenseMatrix{{1, 0}, {0, 1}}, true);
  EXPECT_EQ(g.frob_sq, 2.0);
  EXPECT_TRUE(g.gram->isApprox(Matrix::Identity(2, 2)));

  g = row_geometry(DenseMatrix{{1, 0}, {0, 1}, {1, 1}}, true);
  Matrix expected(3, 3);
  expected << 1, 0, 1, 0, 1, 1, 1, 1, 2;
  EXPECT_EQ(*g.gram, expected);
}

TEST(RowGeometry, FrobeniusMatchesRowSumsAndGramIsSymmetric) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const RowMatrix v = oracle::gaussian(17, 9, s);
    const auto g = row_geometry(DenseMatrix(v), true);
    double sum = 0.0;
    for (Index i = 0; i < v.rows(); ++i) sum += oracle::dot(v, i, i);
    EXPECT_LE(std::abs(g.frob_sq - sum), 8 * kEps * 17 * g.frob_sq);
    for (Index i = 0; i < 17; ++i) {
      EXPECT_EQ((*g.gram)(i, i), g.row_norms_sq[i]);
      for (Index j = 0; j < 17; ++j) EXPECT_EQ((*g.gram)(i, j), (*g.gram)(j, i));
    }
  }
}

TEST(MinNormSolution, Examples) {
  Vector b(3);
  b << 1, 2, 3;
  EXPECT_TRUE(min_norm_solution(DenseMatrix(RowMatrix::Identity(3, 3)), b).isApprox(b, 1e-14));

  Vector b1(1);
  b1 << 2;
  const Vector x1 = min_norm_solution(DenseMatrix{{1, 0}}, b1);
  EXPECT_NEAR(x1[0], 2.0, 1e-14);
  EXPECT_NEAR(x1[1], 0.0, 1e-14);

  Vector b2(2);
  b2 << 2, 4;
  const Vector x2 = min_norm_solution(DenseMatrix{{1, 1}, {2, 2}}, b2);
  EXPECT_NEAR(x2[0], 1.0, 1e-13);
  EXPECT_NEAR(x2[1], 1.0, 1e-13);
}

TEST(MinNormSolution, InconsistentThrows) {
  Vector b(2);
  b << 1, 3;
  EXPECT_THROW(min_norm_solution(DenseMatrix{{1, 1}, {2, 2}}, b), InconsistentSystem);
  EXPECT_THROW(min_norm_solution(DenseMatrix{{1, 1}}, b), BadShape);
}

TEST(MinNormSolution, LiesInRowSpace) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const RowMatrix v = oracle::low_rank(8, 6, 3, s);
    const Vector b = v * oracle::gaussian_vector(6, s + 100);
    const Vector x = min_norm_solution(DenseMatrix(v), b);
    EXPECT_LE((v * x - b).norm(), 1e-10 * std::max(1.0, b.norm()));
    const Matrix null = oracle::null_space(v);
    ASSERT_EQ(null.cols(), 3);
    for (Index k = 0; k < null.cols(); ++k)
      EXPECT_LE(std::abs(null.col(k).dot(x)), 1e-8 * x.norm());
  }
}

TEST(ReferenceSolution, Examples) {
  const DenseMatrix a{{1, 0}};
  Vector b(1);
  b << 1;
  Vector x0(2);
  x0 << 0, 5;
  const Vector r = reference_solution(a, b, x0);
  EXPECT_NEAR(r[0], 1.0, 1e-14);
  EXPECT_NEAR(r[1], 5.0, 1e-14);
  EXPECT_TRUE(reference_solution(a, b, Vector::Zero(2)).isApprox(min_norm_solution(a, b)));
}

TEST(ReferenceSolution, ProjectionOfStartOntoSolutionSet) {
  const RowMatrix v = oracle::low_rank(6, 4, 3, 11);
  const Vector b = v * oracle::gaussian_vector(4, 12);
  const Vector x0 = oracle::gaussian_vector(4, 13);
  const Vector r = reference_solution(DenseMatrix(v), b, x0);
  EXPECT_LE((v * r - b).norm(), 1e-10);
  const Matrix null = oracle::null_space(v);
  for (Index k = 0; k < null.cols(); ++k)
    EXPECT_NEAR(null.col(k).dot(r - x0), 0.0, 1e-10);

  // r is the closest feasible point to x0.
  for (std::uint64_t s = 0; s < 100; ++s) {
    const Vector y = r + null * oracle::gaussian_vector(null.cols(), 500 + s);
    EXPECT_LE((r - x0).norm(), (y - x0).norm() + 1e-10);
  }
}

TEST(SpectralSummary, Examples) {
  auto s = spectral_summary(DenseMatrix(RowMatrix::Identity(4, 4)));
  EXPECT_EQ(s.numeric_rank, 4);
  EXPECT_NEAR(s.sigma_min_nonzero, 1.0, 1e-15);
  for (double sv : s.singular_values) EXPECT_NEAR(sv, 1.0, 1e-15);

  s = spectral_summary(DenseMatrix{{5, 0}, {0, 0}, {0, 0}});
  EXPECT_EQ(s.numeric_rank, 1);
  EXPECT_NEAR(s.sigma_min_nonzero, 5.0, 1e-14);

  s = spectral_summary(DenseMatrix(oracle::low_rank(10, 7, 4, 3)));
  EXPECT_EQ(s.numeric_rank, 4);
  EXPECT_TRUE(std::is_sorted(s.singular_values.rbegin(), s.singular_values.rend()));
}

TEST(PositiveDefinite, Examples) {
  EXPECT_TRUE(is_positive_definite(2.0 * Matrix::Identity(3, 3)));
  Matrix s(2, 2);
  s << 1, 2, 2, 1;
  EXPECT_FALSE(is_positive_definite(s));
  s << 1, 2, 0, 1;
  EXPECT_THROW(is_positive_definite(s), NotSymmetric);
  EXPECT_FALSE(is_positive_definite(Matrix::Zero(2, 2)));
}

TEST(PositiveDefinite, AgreesWithEigenvalueOracle) {
  std::mt19937_64 gen(99);
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> shift(-3.0, 3.0);
  int disagreements = 0, positives = 0;
  for (int t = 0; t < 1000; ++t) {
    Matrix g(6, 6);
    for (Index i = 0; i < 36; ++i) g.data()[i] = nd(gen);
    Matrix s = g * g.transpose() / 6.0 + shift(gen) * Matrix::Identity(6, 6);
    s = 0.5 * (s + s.transpose());
    const double lmin = oracle::min_eigenvalue(s);
    if (std::abs(lmin) < 1e-9) continue;  // too close to call either way
    const bool pd = is_positive_definite(s);
    positives += pd;
    if (pd != (lmin > 0.0)) ++disagreements;
  }
  EXPECT_EQ(disagreements, 0);
  EXPECT_GT(positives, 100);
  EXPECT_LT(positives, 900);
}
