#pragma once

// Dense real linear algebra shared by every other part of the library:
// storage with cached row access, row geometry, minimum-norm solutions,
// spectral summaries and positive-definiteness tests.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "rdr/errors.hpp"

namespace rdr {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using RowMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline constexpr double kEps = std::numeric_limits<double>::epsilon();

/// Row-major m x n matrix with finite entries. Rows are contiguous, which is
/// what the row-action solvers touch on every iteration.
class DenseMatrix {
 public:
  explicit DenseMatrix(RowMatrix values) : values_(std::move(values)) {
    if (values_.rows() < 1 || values_.cols() < 1)
      throw BadShape("matrix must have at least one row and one column");
    if (!values_.allFinite())
      throw BadShape("matrix entries must be finite");
  }

  DenseMatrix(std::initializer_list<std::initializer_list<double>> rows)
      : DenseMatrix(from_rows(rows)) {}

  Index rows() const { return values_.rows(); }
  Index cols() const { return values_.cols(); }
  double operator()(Index i, Index j) const { return values_(i, j); }
  auto row(Index i) const { return values_.row(i); }
  const RowMatrix& values() const { return values_; }

 private:
  static RowMatrix from_rows(
      std::initializer_list<std::initializer_list<double>> rows) {
    const auto m = static_cast<Index>(rows.size());
    const auto n = m ? static_cast<Index>(rows.begin()->size()) : 0;
    RowMatrix out(m, n);
    Index i = 0;
    for (const auto& r : rows) {
      if (static_cast<Index>(r.size()) != n)
        throw BadShape("ragged initializer for DenseMatrix");
      Index j = 0;
      for (double v : r) out(i, j++) = v;
      ++i;
    }
    return out;
  }

  RowMatrix values_;
};

/// Squared row norms, squared Frobenius norm and (optionally) the Gram
/// matrix AA^T of a matrix.
struct RowGeometry {
  Vector row_norms_sq;
  double frob_sq = 0.0;
  std::optional<Matrix> gram;
};

inline RowGeometry row_geometry(const DenseMatrix& a, bool with_gram) {
  RowGeometry g;
  g.row_norms_sq = a.values().rowwise().squaredNorm();
  g.frob_sq = g.row_norms_sq.sum();
  if (with_gram) {
    Matrix gram = a.values() * a.values().transpose();
    // Exact symmetry and an exact diagonal, independent of GEMM blocking.
    for (Index i = 0; i < gram.rows(); ++i) {
      gram(i, i) = g.row_norms_sq[i];
      for (Index j = 0; j < i; ++j) gram(j, i) = gram(i, j);
    }
    g.gram = std::move(gram);
  }
  return g;
}

/// ||A A^T||_F^2, evaluated through whichever of AA^T / A^TA is smaller.
inline double gram_frobenius_sq(const DenseMatrix& a) {
  const auto& v = a.values();
  if (a.rows() <= a.cols()) return (v * v.transpose()).squaredNorm();
  return (v.transpose() * v).squaredNorm();
}

/// Relative cutoff below which singular values count as zero.
inline double rank_cutoff(Index m, Index n, double sigma_max) {
  return static_cast<double>(std::max(m, n)) * sigma_max * kEps;
}

struct SpectralSummary {
  std::vector<double> singular_values;  // nonincreasing
  Index numeric_rank = 0;
  double sigma_min_nonzero = 0.0;
};

inline SpectralSummary spectral_summary(const RowMatrix& b) {
  Eigen::JacobiSVD<Matrix> svd(b);
  const Vector& s = svd.singularValues();
  SpectralSummary out;
  out.singular_values.assign(s.data(), s.data() + s.size());
  if (s.size() == 0 || s[0] == 0.0) return out;
  const double cut = rank_cutoff(b.rows(), b.cols(), s[0]);
  for (Index i = 0; i < s.size() && s[i] > cut; ++i) out.numeric_rank = i + 1;
  out.sigma_min_nonzero = s[out.numeric_rank - 1];
  return out;
}

inline SpectralSummary spectral_summary(const DenseMatrix& b) {
  return spectral_summary(b.values());
}

namespace detail {

inline Vector pinv_apply(const RowMatrix& a, const Vector& rhs) {
  Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& s = svd.singularValues();
  if (s.size() == 0 || s[0] == 0.0) return Vector::Zero(a.cols());
  const double cut = rank_cutoff(a.rows(), a.cols(), s[0]);
  Vector coeff = svd.matrixU().transpose() * rhs;
  for (Index i = 0; i < s.size(); ++i) coeff[i] = s[i] > cut ? coeff[i] / s[i] : 0.0;
  return svd.matrixV() * coeff;
}

inline void check_consistent(const RowMatrix& a, const Vector& x, const Vector& b) {
  const double res = (a * x - b).norm();
  const double tol = 1e-8 * std::max(1.0, b.norm());
  if (!(res <= tol))
    throw InconsistentSystem("residual " + std::to_string(res) +
                             " exceeds consistency tolerance " + std::to_string(tol));
}

}  // namespace detail

/// Minimum-norm solution A^+ b of a consistent system.
inline Vector min_norm_solution(const DenseMatrix& a, const Vector& b) {
  if (b.size() != a.rows()) throw BadShape("right-hand side length != rows");
  Vector x = detail::pinv_apply(a.values(), b);
  detail::check_consistent(a.values(), x, b);
  return x;
}

/// Orthogonal projection of x0 onto {x : Ax = b}, i.e. A^+ b + (I - A^+ A) x0.
inline Vector reference_solution(const DenseMatrix& a, const Vector& b, const Vector& x0) {
  if (b.size() != a.rows() || x0.size() != a.cols())
    throw BadShape("reference_solution: dimension mismatch");
  Vector r = x0 + detail::pinv_apply(a.values(), b - a.values() * x0);
  detail::check_consistent(a.values(), r, b);
  return r;
}

/// True iff a pivoted LDL^T factorization of S has all pivots above
/// pd_tol * max|diag(S)|.
inline bool is_positive_definite(const Matrix& s, double pd_tol = 1e-12) {
  if (s.rows() != s.cols()) throw BadShape("is_positive_definite: matrix not square");
  const double scale = s.cwiseAbs().maxCoeff();
  if ((s - s.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw NotSymmetric("is_positive_definite: matrix is not symmetric");
  const double max_diag = s.diagonal().maxCoeff();
  if (!(max_diag > 0.0)) return false;
  Eigen::LDLT<Matrix> ldlt(s);
  if (ldlt.info() != Eigen::Success) return false;
  return (ldlt.vectorD().array() > pd_tol * max_diag).all();
}

}  // namespace rdr
