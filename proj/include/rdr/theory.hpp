#pragma once

// Convergence-rate machinery for the two-reflection methods.
//
// With F = ||A||_F^2, n_j = ||a_j||^2 and Delta = sum_j n_j / (F - n_j):
//
//   M = (Delta + 1) I - B,   B_ii = n_i / (F - n_i),  B_ij = 2 <a_i, a_j> / (F - n_j)
//   N_ii = sum_j g_ij n_j,   N_ij = -g_ij <a_i, a_j>,  g_ij = 1 - <a_i, a_j>^2 / (n_i n_j)
//
// and the expected double-reflection operators (T_i = I - 2 a_i a_i^T / n_i)
//
//   without replacement:  E[T_j T_i] = I - (2 / F) A^T M A
//   volume sampling:      E[T_j T_i] = I - 4 / (F^2 - ||AA^T||_F^2) A^T N A
//
// M as written is not symmetric (column-dependent denominators). The raw
// matrix is what the expectation identity needs; spectral quantities use the
// symmetric part, which has the same quadratic form.

#include <optional>
#include <vector>

#include "rdr/errors.hpp"
#include "rdr/linalg.hpp"
#include "rdr/problems.hpp"
#include "rdr/sampling.hpp"
#include "rdr/solvers.hpp"

namespace rdr {

namespace detail {

struct RowData {
  Vector norms;
  double frob_sq;
  Matrix gram;
};

inline RowData row_data(const DenseMatrix& a) {
  RowGeometry g = row_geometry(a, true);
  return {std::move(g.row_norms_sq), g.frob_sq, std::move(*g.gram)};
}

inline void require_rank2(const DenseMatrix& a) {
  if (spectral_summary(a).numeric_rank < 2) throw DegenerateMatrix("rank(A) >= 2 required");
}

}  // namespace detail

/// Delta = sum_j ||a_j||^2 / (||A||_F^2 - ||a_j||^2).
inline double delta_constant(const DenseMatrix& a) {
  const Vector n = a.values().rowwise().squaredNorm();
  const double f = n.sum();
  double delta = 0.0;
  for (Index j = 0; j < n.size(); ++j) {
    const double den = f - n[j];
    if (!(den > 0.0)) throw DegenerateMatrix("a single row carries all of ||A||_F^2");
    delta += n[j] / den;
  }
  return delta;
}

/// M exactly as defined entrywise (not symmetric in general).
inline Matrix build_M_raw(const DenseMatrix& a) {
  const auto rd = detail::row_data(a);
  const Index m = a.rows();
  const double delta = delta_constant(a);
  Matrix mm(m, m);
  for (Index j = 0; j < m; ++j) {
    const double den = rd.frob_sq - rd.norms[j];
    for (Index i = 0; i < m; ++i)
      mm(i, j) = i == j ? delta + 1.0 - rd.norms[j] / den : -2.0 * rd.gram(i, j) / den;
  }
  return mm;
}

/// Symmetric part (M + M^T) / 2.
inline Matrix build_M(const DenseMatrix& a) {
  const Matrix raw = build_M_raw(a);
  return 0.5 * (raw + raw.transpose());
}

inline Matrix build_N(const DenseMatrix& a) {
  const auto rd = detail::row_data(a);
  const Index m = a.rows();
  Matrix nn = Matrix::Zero(m, m);
  double weight = 0.0;
  for (Index i = 0; i < m; ++i) {
    for (Index j = 0; j < m; ++j) {
      if (i == j) continue;
      const double ni = rd.norms[i], nj = rd.norms[j];
      // A zero row has no direction; treat it as orthogonal to every other row.
      const double g = (ni > 0.0 && nj > 0.0)
                           ? std::max(0.0, 1.0 - rd.gram(i, j) * rd.gram(i, j) / (ni * nj))
                           : 1.0;
      nn(i, i) += g * nj;
      nn(i, j) = -g * rd.gram(i, j);
      weight += g * ni * nj;
    }
  }
  if (!(weight > 0.0)) throw DegenerateMatrix("all pair volumes vanish: rank(A) >= 2 required");
  return 0.5 * (nn + nn.transpose());
}

/// ||A||_F^4 - ||AA^T||_F^2, summed pairwise as 2 sum_{i<j} (n_i n_j - <a_i,a_j>^2).
inline double frob4_minus_gram_frob_sq(const DenseMatrix& a) {
  const auto rd = detail::row_data(a);
  double acc = 0.0;
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = i + 1; j < a.rows(); ++j)
      acc += std::max(0.0, rd.norms[i] * rd.norms[j] - rd.gram(i, j) * rd.gram(i, j));
  return 2.0 * acc;
}

/// sigma_min^2(W^{1/2} A) for symmetric positive definite W: the rank(A)-th
/// largest eigenvalue of A^T W A.
inline double sigma_min_sq_weighted(const DenseMatrix& a, const Matrix& w) {
  const Index rank = spectral_summary(a).numeric_rank;
  if (rank < 1) return 0.0;
  const Matrix k = a.values().transpose() * w * a.values();
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (k + k.transpose()), Eigen::EigenvaluesOnly);
  const Vector& ev = es.eigenvalues();  // ascending
  return ev[ev.size() - rank];
}

/// 1/2 + 1/2 (1 - 2 sigma_min^2(A) / ||A||_F^2)^2
inline double rate_rdr(const DenseMatrix& a) {
  const auto ss = spectral_summary(a);
  if (ss.numeric_rank < 2) throw DegenerateMatrix("rank(A) >= 2 required");
  const double f = a.values().squaredNorm();
  const double q = 1.0 - 2.0 * ss.sigma_min_nonzero * ss.sigma_min_nonzero / f;
  return 0.5 + 0.5 * q * q;
}

/// Contraction bound of the relaxed method with parameter alpha:
///   WithoutReplacement: 1 - 4 a (1 - a) sigma_min^2(M^{1/2} A) / ||A||_F^2
///   Volume:             1 - 8 a (1 - a) sigma_min^2(N^{1/2} A) / (||A||_F^4 - ||AA^T||_F^2)
inline double rate_prdr(const DenseMatrix& a, double alpha, SamplerKind strategy) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw BadShape("alpha must lie in (0, 1)");
  detail::require_rank2(a);
  const double aa = alpha * (1.0 - alpha);
  if (strategy == SamplerKind::WithoutReplacement)
    return 1.0 - 4.0 * aa * sigma_min_sq_weighted(a, build_M(a)) / a.values().squaredNorm();
  if (strategy == SamplerKind::Volume)
    return 1.0 - 8.0 * aa * sigma_min_sq_weighted(a, build_N(a)) / frob4_minus_gram_frob_sq(a);
  throw BadShape("rate_prdr: strategy must be without-replacement or volume");
}

/// The sampling-dependent factor of the adaptive-momentum bound, i.e. the
/// bound before the (1 - gamma_k) improvement:
///   WithoutReplacement: 1 - sigma_min^2(M^{1/2} A) / ||A||_F^2
///   Volume:             1 - 2 sigma_min^2(N^{1/2} A) / (||A||_F^4 - ||AA^T||_F^2)
inline double rate_amprdr_base(const DenseMatrix& a, SamplerKind strategy) {
  return rate_prdr(a, 0.5, strategy);
}

/// Closed form of E[T_{i2} T_{i1}] for the given pair law.
inline Matrix expected_double_reflection(const DenseMatrix& a, SamplerKind strategy) {
  detail::require_rank2(a);
  const auto& v = a.values();
  const Index n = a.cols();
  if (strategy == SamplerKind::WithoutReplacement)
    return Matrix::Identity(n, n) - (2.0 / v.squaredNorm()) * v.transpose() * build_M_raw(a) * v;
  if (strategy == SamplerKind::Volume)
    return Matrix::Identity(n, n) -
           (4.0 / frob4_minus_gram_frob_sq(a)) * v.transpose() * build_N(a) * v;
  throw BadShape("expected_double_reflection: strategy must be without-replacement or volume");
}

struct RateReport {
  double alpha = 0.5;
  Index rank = 0;
  double sigma_min = 0.0;
  double delta = 0.0;
  Matrix M, N;
  bool M_pd = false, N_pd = false;
  double frob_sq = 0.0;
  double frob4_minus_gram_frob_sq = 0.0;
  double sigma_min_sq_M_half_A = 0.0;
  double sigma_min_sq_N_half_A = 0.0;
  double rho_rdr = 0.0, rho_prdr1 = 0.0, rho_prdr2 = 0.0;
  double rho_amprdr1_base = 0.0, rho_amprdr2_base = 0.0;
};

inline RateReport rate_report(const DenseMatrix& a, double alpha = 0.5) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw BadShape("alpha must lie in (0, 1)");
  RateReport r;
  const auto ss = spectral_summary(a);
  if (ss.numeric_rank < 2) throw DegenerateMatrix("rank(A) >= 2 required");
  r.alpha = alpha;
  r.rank = ss.numeric_rank;
  r.sigma_min = ss.sigma_min_nonzero;
  r.delta = delta_constant(a);
  r.M = build_M(a);
  r.N = build_N(a);
  r.M_pd = is_positive_definite(r.M);
  r.N_pd = is_positive_definite(r.N);
  r.frob_sq = a.values().squaredNorm();
  r.frob4_minus_gram_frob_sq = frob4_minus_gram_frob_sq(a);
  r.sigma_min_sq_M_half_A = sigma_min_sq_weighted(a, r.M);
  r.sigma_min_sq_N_half_A = sigma_min_sq_weighted(a, r.N);
  const double q = 1.0 - 2.0 * r.sigma_min * r.sigma_min / r.frob_sq;
  r.rho_rdr = 0.5 + 0.5 * q * q;
  const double aa = alpha * (1.0 - alpha);
  r.rho_prdr1 = 1.0 - 4.0 * aa * r.sigma_min_sq_M_half_A / r.frob_sq;
  r.rho_prdr2 = 1.0 - 8.0 * aa * r.sigma_min_sq_N_half_A / r.frob4_minus_gram_frob_sq;
  r.rho_amprdr1_base = 1.0 - r.sigma_min_sq_M_half_A / r.frob_sq;
  r.rho_amprdr2_base = 1.0 - 2.0 * r.sigma_min_sq_N_half_A / r.frob4_minus_gram_frob_sq;
  return r;
}

// ---------------------------------------------------------------------------
// Per-step diagnostics for the adaptive method (need a known solution).

struct StepDiagnostics {
  double cos2_theta = 0.0;  // angle between x_tilde - x_star and zeta
  double gram_det = 0.0;    // det Gram{z - x, x - x_prev}
};

/// zeta = <z - x, d> (z - x) - ||z - x||^2 d with d = x - x_prev, and
/// x_tilde = (x + z) / 2.
inline StepDiagnostics step_diagnostics(ConstVecRef x_prev, ConstVecRef x, ConstVecRef z,
                                        ConstVecRef x_star) {
  const Vector e = z - x;
  const Vector d = x - x_prev;
  const double ee = e.squaredNorm(), dd = d.squaredNorm(), ed = e.dot(d);
  const Vector zeta = ed * e - ee * d;
  const double zz = zeta.squaredNorm();
  if (!(zz > 0.0)) throw DegenerateStep("zeta vanishes: z == x or momentum direction degenerate");
  const Vector t = 0.5 * (x + z) - x_star;
  const double tt = t.squaredNorm();
  StepDiagnostics out;
  out.gram_det = std::max(0.0, ee * dd - ed * ed);
  if (tt > 0.0) {
    const double tz = t.dot(zeta);
    out.cos2_theta = tz * tz / (tt * zz);
  }
  return out;
}

/// gamma_k: infimum of cos^2 theta_k over every ordered pair (i, j) whose
/// double reflection moves x. Enumerates all m^2 pairs; meant for small m.
/// Pairs whose zeta vanishes (z - x parallel to x - x_prev) have no angle and
/// are skipped. Empty when no pair qualifies.
inline std::optional<double> gamma_enumerated(ConstVecRef x_prev, ConstVecRef x,
                                              const LinearProblem& p, ConstVecRef x_star,
                                              double zero_tol = 1e-16) {
  std::optional<double> best;
  for (Index i = 0; i < p.a.rows(); ++i) {
    for (Index j = 0; j < p.a.rows(); ++j) {
      if (p.a.row(i).squaredNorm() == 0.0 || p.a.row(j).squaredNorm() == 0.0) continue;
      const auto dr = double_reflect(x, {i, j}, p);
      if (!((dr.z - x).norm() > zero_tol)) continue;
      try {
        const double c2 = step_diagnostics(x_prev, x, dr.z, x_star).cos2_theta;
        if (!best || c2 < *best) best = c2;
      } catch (const DegenerateStep&) {
      }
    }
  }
  return best;
}

}  // namespace rdr
