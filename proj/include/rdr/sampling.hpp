#pragma once

// Index-pair selection for the two-reflection solvers.
//
//   Iid                 i1, i2 independent, each with probability ||a_i||^2 / ||A||_F^2
//   WithoutReplacement  i1 as above, then i2 != i1 renormalised over the rest
//   Volume              unordered {i, j} with probability proportional to
//                       det(A_S A_S^T) = ||a_i||^2 ||a_j||^2 - <a_i, a_j>^2,
//                       emitted in a uniformly random order
//
// Every sampler can report the exact probability of any ordered draw, which
// is what the statistical tests and the expected-operator checks compare
// against.

#include <algorithm>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "rdr/errors.hpp"
#include "rdr/linalg.hpp"
#include "rdr/rng.hpp"

namespace rdr {

enum class SamplerKind { Iid, WithoutReplacement, Volume };

inline std::string_view to_string(SamplerKind k) {
  switch (k) {
    case SamplerKind::Iid: return "IID";
    case SamplerKind::WithoutReplacement: return "STRATEGY_I";
    case SamplerKind::Volume: return "STRATEGY_II";
  }
  return "?";
}

struct IndexPair {
  Index first;
  Index second;
  friend bool operator==(const IndexPair&, const IndexPair&) = default;
};

class PairSampler {
 public:
  PairSampler(const DenseMatrix& a, SamplerKind kind) : kind_(kind), m_(a.rows()) {
    const RowGeometry g = row_geometry(a, kind == SamplerKind::Volume);
    row_norms_sq_ = g.row_norms_sq;
    frob_sq_ = g.frob_sq;

    row_cum_.resize(static_cast<std::size_t>(m_));
    double acc = 0.0;
    Index nonzero = 0;
    for (Index i = 0; i < m_; ++i) {
      acc += row_norms_sq_[i];
      row_cum_[static_cast<std::size_t>(i)] = acc;
      if (row_norms_sq_[i] > 0.0) ++nonzero;
    }
    if (nonzero < 2)
      throw DegenerateMatrix("at least two rows with nonzero norm are required");

    if (kind == SamplerKind::Volume) build_pair_table(*g.gram);
  }

  SamplerKind kind() const { return kind_; }
  Index rows() const { return m_; }
  double frob_sq() const { return frob_sq_; }
  const Vector& row_norms_sq() const { return row_norms_sq_; }

  /// det(A_S A_S^T) for S = {i, j}; zero on the diagonal. Volume sampler only.
  double pair_weight(Index i, Index j) const {
    return i == j ? 0.0 : pair_weights_(i, j);
  }
  /// Sum of pair weights over i < j, i.e. (||A||_F^4 - ||AA^T||_F^2) / 2.
  double pair_weight_total() const { return pair_total_; }

  /// Single row with probability ||a_i||^2 / ||A||_F^2 (used by Kaczmarz).
  Index sample_row(SeededRng& rng) const { return draw_row(rng); }

  IndexPair sample(SeededRng& rng) const {
    switch (kind_) {
      case SamplerKind::Iid:
        return {draw_row(rng), draw_row(rng)};
      case SamplerKind::WithoutReplacement: {
        const Index i = draw_row(rng);
        return {i, draw_row_excluding(rng, i)};
      }
      case SamplerKind::Volume: {
        const double u = rng.uniform() * pair_total_;
        auto it = std::upper_bound(pair_cum_.begin(), pair_cum_.end(), u);
        std::size_t k = static_cast<std::size_t>(it - pair_cum_.begin());
        if (k >= pair_cum_.size()) k = last_positive_pair_;
        const Index i = pair_i_[k], j = pair_j_[k];
        return rng.coin() ? IndexPair{j, i} : IndexPair{i, j};
      }
    }
    return {0, 0};
  }

  /// Exact probability of the ordered draw (i1, i2).
  double pair_probability(Index i1, Index i2) const {
    switch (kind_) {
      case SamplerKind::Iid:
        return row_norms_sq_[i1] / frob_sq_ * (row_norms_sq_[i2] / frob_sq_);
      case SamplerKind::WithoutReplacement:
        if (i1 == i2) return 0.0;
        return row_norms_sq_[i1] / frob_sq_ *
               (row_norms_sq_[i2] / (frob_sq_ - row_norms_sq_[i1]));
      case SamplerKind::Volume:
        if (i1 == i2) return 0.0;
        return 0.5 * pair_weights_(i1, i2) / pair_total_;
    }
    return 0.0;
  }

 private:
  Index draw_row(SeededRng& rng) const {
    const double u = rng.uniform() * frob_sq_;
    auto it = std::upper_bound(row_cum_.begin(), row_cum_.end(), u);
    return clamp_row(static_cast<Index>(it - row_cum_.begin()));
  }

  // Inverse-CDF draw over all rows except `skip`: map u in
  // [0, F - w_skip) onto the cumulative table with the skipped mass removed.
  Index draw_row_excluding(SeededRng& rng, Index skip) const {
    const double w = row_norms_sq_[skip];
    const double before = skip > 0 ? row_cum_[static_cast<std::size_t>(skip - 1)] : 0.0;
    const double u = rng.uniform() * (frob_sq_ - w);
    if (u < before) {
      auto end = row_cum_.begin() + skip;
      auto it = std::upper_bound(row_cum_.begin(), end, u);
      if (it != end) return static_cast<Index>(it - row_cum_.begin());
    }
    auto it = std::upper_bound(row_cum_.begin() + skip + 1, row_cum_.end(), u + w);
    Index r = static_cast<Index>(it - row_cum_.begin());
    if (r >= m_) {
      // Rounding pushed u past the end: take the last positive row != skip.
      for (r = m_ - 1; r >= 0 && (r == skip || row_norms_sq_[r] == 0.0); --r) {}
    }
    return r;
  }

  Index clamp_row(Index r) const {
    if (r < m_) return r;
    for (r = m_ - 1; row_norms_sq_[r] == 0.0; --r) {}
    return r;
  }

  void build_pair_table(const Matrix& gram) {
    pair_weights_ = Matrix::Zero(m_, m_);
    const std::size_t npairs = static_cast<std::size_t>(m_ * (m_ - 1) / 2);
    pair_cum_.reserve(npairs);
    pair_i_.reserve(npairs);
    pair_j_.reserve(npairs);
    double acc = 0.0;
    for (Index i = 0; i < m_; ++i) {
      for (Index j = i + 1; j < m_; ++j) {
        const double ni = row_norms_sq_[i], nj = row_norms_sq_[j];
        double w = ni * nj - gram(i, j) * gram(i, j);
        // Below this level the weight is rounding noise of colinear rows.
        if (w <= 8.0 * kEps * ni * nj) w = 0.0;
        pair_weights_(i, j) = pair_weights_(j, i) = w;
        acc += w;
        if (w > 0.0) last_positive_pair_ = pair_cum_.size();
        pair_cum_.push_back(acc);
        pair_i_.push_back(static_cast<std::uint32_t>(i));
        pair_j_.push_back(static_cast<std::uint32_t>(j));
      }
    }
    pair_total_ = acc;
    if (!(pair_total_ > 0.0))
      throw DegenerateMatrix("all pair volumes vanish: rank(A) >= 2 required");
  }

  SamplerKind kind_;
  Index m_;
  Vector row_norms_sq_;
  double frob_sq_ = 0.0;
  std::vector<double> row_cum_;

  Matrix pair_weights_;
  std::vector<double> pair_cum_;
  std::vector<std::uint32_t> pair_i_, pair_j_;
  std::size_t last_positive_pair_ = 0;
  double pair_total_ = 0.0;
};

}  // namespace rdr
