#include <gtest/gtest.h>

#include "oracles.hpp"
#include "rdr/theory.hpp"

using namespace rdr;

namespace {

DenseMatrix identity(Index m) { return DenseMatrix(RowMatrix::Identity(m, m)); }

RowMatrix row_normalized(Index m, Index n, std::uint64_t seed) {
  RowMatrix v = oracle::gaussian(m, n, seed);
  for (Index i = 0; i < m; ++i) v.row(i).normalize();
  return v;
}

// Entrywise Monte Carlo of E[T_j T_i] with exact per-entry standard errors.
struct MonteCarlo {
  Matrix mean, se;
};

MonteCarlo monte_carlo(const RowMatrix& v, SamplerKind kind, int draws, std::uint64_t seed) {
  const DenseMatrix a(v);
  const PairSampler s(a, kind);
  std::vector<Matrix> t;
  for (Index i = 0; i < v.rows(); ++i) t.push_back(oracle::householder(v, i));
  const Index n = v.cols();
  Matrix sum = Matrix::Zero(n, n), sum2 = Matrix::Zero(n, n);
  SeededRng rng(seed);
  for (int k = 0; k < draws; ++k) {
    const auto p = s.sample(rng);
    const Matrix prod = t[p.second] * t[p.first];
    sum += prod;
    sum2 += prod.cwiseProduct(prod);
  }
  MonteCarlo mc;
  mc.mean = sum / draws;
  const Matrix var = (sum2 / draws - mc.mean.cwiseProduct(mc.mean)) * (double(draws) / (draws - 1));
  mc.se = (var.cwiseMax(0.0) / draws).cwiseSqrt();
  return mc;
}

// E[T_j T_i] by summing over every ordered pair with its exact probability.
Matrix exact_expectation(const RowMatrix& v, SamplerKind kind) {
  const PairSampler s(DenseMatrix(v), kind);
  Matrix e = Matrix::Zero(v.cols(), v.cols());
  for (Index i = 0; i < v.rows(); ++i)
    for (Index j = 0; j < v.rows(); ++j) {
      const double pr = s.pair_probability(i, j);
      if (pr > 0.0) e += pr * oracle::householder(v, j) * oracle::householder(v, i);
    }
  return e;
}

}  // namespace

TEST(Delta, IdentityAndDegenerate) {
  EXPECT_DOUBLE_EQ(delta_constant(identity(2)), 2.0);
  EXPECT_NEAR(delta_constant(identity(5)), 5.0 / 4.0, 1e-15);
  EXPECT_THROW(delta_constant(DenseMatrix{{1, 2}, {0, 0}}), DegenerateMatrix);
}

TEST(BuildM, IdentityIsTwoI) {
  EXPECT_TRUE(build_M(identity(2)).isApprox(2.0 * Matrix::Identity(2, 2), 1e-15));
  EXPECT_TRUE(build_M_raw(identity(2)).isApprox(2.0 * Matrix::Identity(2, 2), 1e-15));
}

TEST(BuildM, RowNormalizedClosedForm) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const RowMatrix v = row_normalized(9, 4, seed);
    const double f = v.squaredNorm();
    const Matrix closed = (2.0 * f / (f - 1.0)) * Matrix::Identity(9, 9) -
                          (2.0 / (f - 1.0)) * (v * v.transpose());
    const Matrix m = build_M(DenseMatrix(v));
    EXPECT_LE((m - closed).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(BuildN, OrthonormalRows) {
  EXPECT_TRUE(build_N(identity(2)).isApprox(Matrix::Identity(2, 2), 1e-15));
  const Matrix q = Eigen::HouseholderQR<Matrix>(oracle::gaussian(8, 8, 1)).householderQ();
  const RowMatrix rows = q.topRows(5);
  EXPECT_LE((build_N(DenseMatrix(rows)) - 4.0 * Matrix::Identity(5, 5)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(BuildN, ZeroRowsAndRankOne) {
  const DenseMatrix a{{1, 0}, {0, 0}, {0, 1}};
  const Matrix n = build_N(a);
  EXPECT_TRUE(is_positive_definite(n));
  EXPECT_THROW(build_N(DenseMatrix{{1, 1}, {2, 2}}), DegenerateMatrix);
}

TEST(PositiveDefinite, MAndNOnRandomRankTwoPlus) {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const Index m = 2 + static_cast<Index>(seed % 29);
    const Index n = 2 + static_cast<Index>((seed * 7) % 10);
    const Index r = std::max<Index>(2, std::min(m, n) - static_cast<Index>(seed % 3));
    const RowMatrix v = r < std::min(m, n) ? oracle::low_rank(m, n, r, seed) : oracle::gaussian(m, n, seed);
    const DenseMatrix a(v);
    const Matrix mm = build_M(a), nn = build_N(a);
    EXPECT_GT(oracle::min_eigenvalue(mm), 0.0) << seed;
    EXPECT_GT(oracle::min_eigenvalue(nn), 0.0) << seed;
    EXPECT_TRUE(is_positive_definite(mm)) << seed;
    EXPECT_TRUE(is_positive_definite(nn)) << seed;
  }
}

TEST(Rates, IdentitySpecialCases) {
  for (Index m : {2, 3, 10, 25}) {
    const DenseMatrix a = identity(m);
    const double q = 1.0 - 2.0 / m;
    EXPECT_NEAR(rate_rdr(a), 0.5 + 0.5 * q * q, 1e-12);
    EXPECT_NEAR(rate_prdr(a, 0.5, SamplerKind::WithoutReplacement), q, 1e-12);
    EXPECT_NEAR(rate_prdr(a, 0.5, SamplerKind::Volume), q, 1e-12);
  }
  const auto rep = rate_report(identity(10));
  EXPECT_NEAR(rep.rho_prdr1, 0.8, 1e-12);
  EXPECT_NEAR(rep.rho_prdr2, 0.8, 1e-12);
  EXPECT_NEAR(rep.rho_rdr, 0.82, 1e-12);
  EXPECT_TRUE(rep.M_pd);
  EXPECT_TRUE(rep.N_pd);
}

TEST(Rates, RowNormalizedComparison) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const RowMatrix v = row_normalized(12, 5, 40 + seed);
    const DenseMatrix a(v);
    const double f = v.squaredNorm();
    const double s2 = std::pow(spectral_summary(a).sigma_min_nonzero, 2);
    const double closed = 1.0 - 2.0 * s2 / (f - 1.0) * (1.0 - s2 / f);
    EXPECT_NEAR(rate_prdr(a, 0.5, SamplerKind::WithoutReplacement), closed, 1e-12);
    EXPECT_LE(rate_prdr(a, 0.5, SamplerKind::WithoutReplacement), rate_rdr(a) + 1e-12);
  }
}

TEST(Rates, InUnitIntervalAndRankChecks) {
  const DenseMatrix a(oracle::gaussian(15, 6, 3));
  for (double alpha : {0.1, 0.5, 0.9}) {
    for (auto k : {SamplerKind::WithoutReplacement, SamplerKind::Volume}) {
      const double r = rate_prdr(a, alpha, k);
      EXPECT_GT(r, 0.0);
      EXPECT_LT(r, 1.0);
    }
  }
  EXPECT_THROW(rate_prdr(a, 0.0, SamplerKind::Volume), BadShape);
  EXPECT_THROW(rate_prdr(a, 0.5, SamplerKind::Iid), BadShape);
  EXPECT_THROW(rate_report(DenseMatrix{{1, 1}, {2, 2}, {3, 3}}), DegenerateMatrix);
  EXPECT_THROW(rate_rdr(DenseMatrix{{1, 1}, {2, 2}}), DegenerateMatrix);
}

TEST(Rates, GramIdentity) {
  const RowMatrix v = oracle::gaussian(11, 4, 8);
  const double f = v.squaredNorm();
  EXPECT_NEAR(frob4_minus_gram_frob_sq(DenseMatrix(v)), f * f - (v * v.transpose()).squaredNorm(),
              1e-10 * f * f);
}

TEST(ExpectedOperator, ClosedFormEqualsExactEnumeration) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const RowMatrix v = seed % 2 ? oracle::gaussian(10, 5, seed) : oracle::low_rank(9, 6, 3, seed);
    for (auto kind : {SamplerKind::WithoutReplacement, SamplerKind::Volume}) {
      const Matrix closed = expected_double_reflection(DenseMatrix(v), kind);
      const Matrix exact = exact_expectation(v, kind);
      EXPECT_LE((closed - exact).cwiseAbs().maxCoeff(), 1e-12) << seed << " " << to_string(kind);
    }
  }
}

TEST(ExpectedOperator, IdentityTwoByTwo) {
  const Matrix e = expected_double_reflection(identity(2), SamplerKind::WithoutReplacement);
  EXPECT_LE((e + Matrix::Identity(2, 2)).cwiseAbs().maxCoeff(), 1e-15);
  const Matrix q = Eigen::HouseholderQR<Matrix>(oracle::gaussian(6, 6, 2)).householderQ();
  const RowMatrix rows = q.topRows(4);
  const Matrix ev = expected_double_reflection(DenseMatrix(rows), SamplerKind::Volume);
  const Matrix expect = Matrix::Identity(6, 6) - 1.0 * rows.transpose() * rows;
  EXPECT_LE((ev - expect).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(ExpectedOperator, MonteCarloWithinThreeStandardErrors) {
  const RowMatrix v = oracle::gaussian(10, 5, 123);
  for (auto kind : {SamplerKind::WithoutReplacement, SamplerKind::Volume}) {
    const auto mc = monte_carlo(v, kind, 100000, 77);
    const Matrix closed = expected_double_reflection(DenseMatrix(v), kind);
    EXPECT_LE((mc.mean - closed).norm(), 0.05 * closed.norm());
    int outside = 0;
    for (Index i = 0; i < 5; ++i)
      for (Index j = 0; j < 5; ++j)
        if (std::abs(mc.mean(i, j) - closed(i, j)) > 3.0 * mc.se(i, j) + 1e-15) ++outside;
    EXPECT_EQ(outside, 0) << to_string(kind);
  }
}

TEST(StepDiagnostics, OrthogonalCaseAndRange) {
  // x = (1,1,0), z = (-1,-1,0), d = (0,0,1), x* = 0 -> x_tilde = 0.
  Vector xp(3), x(3), z(3), xs = Vector::Zero(3);
  xp << 1, 1, -1;
  x << 1, 1, 0;
  z << -1, -1, 0;
  const auto d = step_diagnostics(xp, x, z, xs);
  EXPECT_EQ(d.cos2_theta, 0.0);
  EXPECT_NEAR(d.gram_det, 8.0, 1e-14);
  EXPECT_THROW(step_diagnostics(xp, x, x, xs), DegenerateStep);
}

TEST(StepDiagnostics, GammaIdentityAlongAdaptiveRuns) {
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    LinearProblem p = make_consistent(DenseMatrix(oracle::gaussian(14, 6, 900 + seed)), seed);
    attach_reference(p);
    const PairSampler sampler(p.a, SamplerKind::Volume);
    SolverState s(Vector::Zero(6), seed);
    const Vector& xs = *p.x_ref;
    for (int k = 0; k < 150; ++k) {
      const Vector x = s.x_curr, xp = s.x_prev;
      if ((x - xs).norm() < 1e-6 * xs.norm()) break;
      const auto info = amprdr_step(s, sampler, p, 1e-16, 1e-12, 1400);
      ASSERT_EQ(info.outcome, StepOutcome::Advanced);
      if (k == 0 || info.params.guarded) continue;
      const Vector z = x - 2 * info.params.u * p.a.row(info.pair.first).transpose() -
                       2 * info.params.v * p.a.row(info.pair.second).transpose();
      const Vector xt = 0.5 * (x + z);
      const auto diag = step_diagnostics(xp, x, z, xs);
      ASSERT_GE(diag.cos2_theta, 0.0);
      ASSERT_LE(diag.cos2_theta, 1.0 + 1e-10);
      const double lhs = (s.x_curr - xt).squaredNorm();
      const double rhs = diag.cos2_theta * (xt - xs).squaredNorm();
      ASSERT_LE(std::abs(lhs - rhs), 1e-8 * (xt - xs).squaredNorm());
      ASSERT_LE((s.x_curr - xs).squaredNorm(),
                (1.0 - diag.cos2_theta) * (xt - xs).squaredNorm() * (1 + 1e-8));
    }
  }
}

TEST(StepDiagnostics, GammaEnumerationIsAMinimum) {
  LinearProblem p = make_consistent(DenseMatrix(oracle::gaussian(8, 4, 5)), 6);
  attach_reference(p);
  const PairSampler sampler(p.a, SamplerKind::WithoutReplacement);
  SolverState s(Vector::Zero(4), 2);
  for (int k = 0; k < 3; ++k) amprdr_step(s, sampler, p, 1e-16, 1e-12, 800);
  const auto g = gamma_enumerated(s.x_prev, s.x_curr, p, *p.x_ref);
  ASSERT_TRUE(g.has_value());
  EXPECT_GE(*g, 0.0);
  for (Index i = 0; i < 8; ++i)
    for (Index j = 0; j < 8; ++j) {
      if (i == j) continue;
      const auto dr = double_reflect(s.x_curr, {i, j}, p);
      EXPECT_GE(step_diagnostics(s.x_prev, s.x_curr, dr.z, *p.x_ref).cos2_theta, *g - 1e-15);
    }
  const DenseMatrix ai{{1, 2}, {0, 1}, {3, 1}};
  Vector xi(2);
  xi << 2, -1;
  const LinearProblem exact{ai, ai.values() * xi, xi, xi, {}};
  EXPECT_FALSE(gamma_enumerated(xi, xi, exact, xi).has_value());
}

TEST(ExpectedOperator, RawMProductSymmetry) {
  // A^T M_raw A is not symmetric for general A; the raw and symmetrised
  // products agree on the quadratic form only.
  const RowMatrix v = oracle::gaussian(9, 5, 17);
  const DenseMatrix a(v);
  const Matrix raw = v.transpose() * build_M_raw(a) * v;
  const Matrix sym = v.transpose() * build_M(a) * v;
  const Vector x = oracle::gaussian_vector(5, 3);
  EXPECT_NEAR(x.dot(raw * x), x.dot(sym * x), 1e-10 * std::abs(x.dot(sym * x)));
  EXPECT_GT((raw - raw.transpose()).norm(), 1e-6 * raw.norm());
}
