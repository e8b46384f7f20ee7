#pragma once

// Independent reference computations used by the tests. Nothing here calls
// into the library code paths it is used to check.

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <utility>
#include <vector>

#include "rdr/linalg.hpp"

namespace oracle {

using rdr::Index;
using rdr::Matrix;
using rdr::RowMatrix;
using rdr::Vector;

inline RowMatrix gaussian(Index m, Index n, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> nd;
  RowMatrix a(m, n);
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < n; ++j) a(i, j) = nd(gen);
  return a;
}

inline Vector gaussian_vector(Index n, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> nd;
  Vector v(n);
  for (Index i = 0; i < n; ++i) v[i] = nd(gen);
  return v;
}

/// Product of an m x r and an r x n Gaussian matrix: rank r almost surely.
inline RowMatrix low_rank(Index m, Index n, Index r, std::uint64_t seed) {
  return gaussian(m, r, seed) * gaussian(r, n, seed + 7919);
}

inline double dot(const RowMatrix& a, Index i, Index j) {
  double s = 0.0;
  for (Index k = 0; k < a.cols(); ++k) s += a(i, k) * a(j, k);
  return s;
}

/// Unordered-pair volume-sampling law by explicit 2x2 determinants of
/// A_S A_S^T, normalised over all pairs. Key (i, j) with i < j.
inline std::map<std::pair<Index, Index>, double> volume_law(const RowMatrix& a) {
  std::map<std::pair<Index, Index>, double> law;
  double total = 0.0;
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = i + 1; j < a.rows(); ++j) {
      const double g11 = dot(a, i, i), g12 = dot(a, i, j), g22 = dot(a, j, j);
      const double det = g11 * g22 - g12 * g12;
      law[{i, j}] = det;
      total += det;
    }
  for (auto& kv : law) kv.second /= total;
  return law;
}

/// Orthonormal basis of null(A) from a full SVD.
inline Matrix null_space(const RowMatrix& a) {
  Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  const double cut = std::max(a.rows(), a.cols()) * s[0] * 1e-15 * 10;
  Index rank = 0;
  while (rank < s.size() && s[rank] > cut) ++rank;
  return svd.matrixV().rightCols(a.cols() - rank);
}

inline double min_eigenvalue(const Matrix& s) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (s + s.transpose()), Eigen::EigenvaluesOnly);
  return es.eigenvalues()[0];
}

/// argmin over (alpha, beta) of || x - alpha (x - z) + beta d - target ||
/// by the 2x2 normal equations.
inline std::pair<double, double> two_direction_least_squares(const Vector& x, const Vector& z,
                                                             const Vector& d,
                                                             const Vector& target) {
  const Vector p = z - x;  // alpha direction
  const Vector e = target - x;
  const double pp = p.dot(p), pd = p.dot(d), dd = d.dot(d);
  const double rp = e.dot(p), rd = e.dot(d);
  const double det = pp * dd - pd * pd;
  return {(rp * dd - rd * pd) / det, (pp * rd - pd * rp) / det};
}

/// T_i = I - 2 a_i a_i^T / ||a_i||^2 as a dense matrix.
inline Matrix householder(const RowMatrix& a, Index i) {
  const Vector ai = a.row(i).transpose();
  return Matrix::Identity(a.cols(), a.cols()) - 2.0 * ai * ai.transpose() / ai.squaredNorm();
}

}  // namespace oracle
