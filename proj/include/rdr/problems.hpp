#pragma once

// Test-problem construction: spectrally controlled and uniform random
// matrices, consistent right-hand sides, and reference solutions.

#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <variant>

#include "rdr/errors.hpp"
#include "rdr/linalg.hpp"
#include "rdr/rng.hpp"

namespace rdr {

struct SpectralSource {
  Index m, n, r;
  double sigma1, delta;
  std::uint64_t seed;
};
struct UniformSource {
  Index m, n;
  double t;
  std::uint64_t seed;
};
struct FileSource {
  std::string path;
};
using Provenance = std::variant<std::monostate, SpectralSource, UniformSource, FileSource>;

inline std::string describe(const Provenance& p) {
  std::ostringstream os;
  os.precision(17);
  std::visit(
      [&os](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, SpectralSource>)
          os << "SPECTRAL(m=" << s.m << ",n=" << s.n << ",r=" << s.r << ",sigma1=" << s.sigma1
             << ",delta=" << s.delta << ",seed=" << s.seed << ")";
        else if constexpr (std::is_same_v<T, UniformSource>)
          os << "UNIFORM(m=" << s.m << ",n=" << s.n << ",t=" << s.t << ",seed=" << s.seed << ")";
        else if constexpr (std::is_same_v<T, FileSource>)
          os << "FILE(" << s.path << ")";
        else
          os << "USER";
      },
      p);
  return os.str();
}

/// A consistent system Ax = b. x_star is the generating solution when known;
/// x_ref, when attached, is the projection of the starting point onto the
/// solution set and is what relative solution errors are measured against.
struct LinearProblem {
  DenseMatrix a;
  Vector b;
  std::optional<Vector> x_star;
  std::optional<Vector> x_ref;
  Provenance provenance;
};

/// Attach x_ref = A^+ b + (I - A^+ A) x0 (for x0 = 0 this is A^+ b).
inline void attach_reference(LinearProblem& p, const Vector& x0) {
  p.x_ref = reference_solution(p.a, p.b, x0);
}
inline void attach_reference(LinearProblem& p) {
  attach_reference(p, Vector::Zero(p.a.cols()));
}

namespace detail {

inline Matrix gaussian(Index rows, Index cols, SeededRng& rng) {
  Matrix g(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) g(i, j) = rng.normal();
  return g;
}

/// Thin Q factor (first `cols` columns) of a Householder QR.
inline Matrix orthonormal_columns(const Matrix& g) {
  Eigen::HouseholderQR<Matrix> qr(g);
  return qr.householderQ() * Matrix::Identity(g.rows(), g.cols());
}

}  // namespace detail

/// A = U D V^T with U (m x r), V (n x r) orthonormal columns from QR of
/// standard-normal matrices, D = diag(sigma1, delta, ..., delta).
inline DenseMatrix gen_spectral(Index m, Index n, Index r, double sigma1, double delta,
                                std::uint64_t seed) {
  if (m < 1 || n < 1) throw BadShape("gen_spectral: m and n must be positive");
  if (r < 2 || r > std::min(m, n)) throw BadShape("gen_spectral: need 2 <= r <= min(m, n)");
  if (!(delta > 0.0) || !(sigma1 >= delta))
    throw BadShape("gen_spectral: need sigma1 >= delta > 0");
  SeededRng rng(seed);
  const Matrix u = detail::orthonormal_columns(detail::gaussian(m, r, rng));
  const Matrix v = detail::orthonormal_columns(detail::gaussian(n, r, rng));
  Vector d = Vector::Constant(r, delta);
  d[0] = sigma1;
  RowMatrix a = u * d.asDiagonal() * v.transpose();
  return DenseMatrix(std::move(a));
}

/// Entries i.i.d. uniform on [t, 1).
inline DenseMatrix gen_uniform(Index m, Index n, double t, std::uint64_t seed) {
  if (m < 1 || n < 1) throw BadShape("gen_uniform: m and n must be positive");
  if (!(t >= 0.0 && t < 1.0)) throw BadShape("gen_uniform: need 0 <= t < 1");
  SeededRng rng(seed);
  RowMatrix a(m, n);
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < n; ++j) a(i, j) = t + (1.0 - t) * rng.uniform();
  return DenseMatrix(std::move(a));
}

/// x_star ~ N(0, I), b = A x_star.
inline LinearProblem make_consistent(DenseMatrix a, std::uint64_t seed,
                                     Provenance provenance = {}) {
  SeededRng rng(seed);
  Vector x_star(a.cols());
  for (Index j = 0; j < x_star.size(); ++j) x_star[j] = rng.normal();
  Vector b = a.values() * x_star;
  return LinearProblem{std::move(a), std::move(b), std::move(x_star), std::nullopt,
                       std::move(provenance)};
}

}  // namespace rdr
