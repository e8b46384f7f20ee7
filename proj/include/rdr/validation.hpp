#pragma once

// Self-checks on a user matrix: expected-operator Monte Carlo, sampler
// goodness of fit, adaptive parameters against a known-solution least-squares
// fit, and positive definiteness of M and N.

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rdr/errors.hpp"
#include "rdr/problems.hpp"
#include "rdr/sampling.hpp"
#include "rdr/solvers.hpp"
#include "rdr/theory.hpp"

namespace rdr {

enum class CheckStatus { Pass, Fail, Skipped };

inline std::string_view to_string(CheckStatus s) {
  switch (s) {
    case CheckStatus::Pass: return "pass";
    case CheckStatus::Fail: return "fail";
    case CheckStatus::Skipped: return "skipped";
  }
  return "?";
}

struct CheckResult {
  std::string name;
  CheckStatus status = CheckStatus::Skipped;
  std::string detail;
  nlohmann::json metrics = nlohmann::json::object();
};

struct ValidationOptions {
  std::uint64_t samples = 100000;
  std::uint64_t seed = 0;
  double significance = 1e-3;
  unsigned adaptive_systems = 20;
  /// Test hook: rewrites every sampled pair before it is counted.
  std::function<IndexPair(IndexPair, SeededRng&)> tamper;
};

struct ChiSquare {
  double statistic = 0.0;
  double critical = 0.0;
  int dof = 0;
};

/// Pearson chi-square of observed counts against expected counts, merging
/// the smallest-expectation bins until every bin expects at least 5.
inline ChiSquare chi_square(std::vector<double> expected, std::vector<double> observed,
                            double significance) {
  std::vector<std::size_t> idx(expected.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return expected[a] < expected[b]; });
  std::vector<double> e, o;
  double pe = 0.0, po = 0.0;
  for (std::size_t i : idx) {
    pe += expected[i];
    po += observed[i];
    if (pe >= 5.0) {
      e.push_back(pe);
      o.push_back(po);
      pe = po = 0.0;
    }
  }
  if (pe > 0.0 || po > 0.0) {
    if (e.empty()) {
      e.push_back(pe);
      o.push_back(po);
    } else {
      e.back() += pe;
      o.back() += po;
    }
  }
  ChiSquare c;
  for (std::size_t k = 0; k < e.size(); ++k) c.statistic += (o[k] - e[k]) * (o[k] - e[k]) / e[k];
  c.dof = static_cast<int>(e.size()) - 1;
  if (c.dof < 1) return c;
  c.critical = boost::math::quantile(boost::math::chi_squared(c.dof), 1.0 - significance);
  return c;
}

namespace detail {

inline IndexPair draw(const PairSampler& s, SeededRng& rng, const ValidationOptions& o) {
  const IndexPair p = s.sample(rng);
  return o.tamper ? o.tamper(p, rng) : p;
}

// T_j T_i = I - 2 u u^T - 2 w w^T + 4 <w, u> w u^T with unit rows u, w.
inline Matrix householder_product(const DenseMatrix& a, IndexPair p) {
  const Index n = a.cols();
  const Vector u = a.row(p.first).transpose().normalized();
  const Vector w = a.row(p.second).transpose().normalized();
  Matrix t = Matrix::Identity(n, n);
  t.noalias() -= 2.0 * u * u.transpose();
  t.noalias() -= 2.0 * w * w.transpose();
  t.noalias() += (4.0 * w.dot(u)) * w * u.transpose();
  return t;
}

inline CheckResult check_expected_operator(const DenseMatrix& a, SamplerKind kind,
                                           const ValidationOptions& o) {
  CheckResult r;
  r.name = std::string("expected_operator_") + std::string(to_string(kind));
  const PairSampler s(a, kind);
  const Index n = a.cols();
  Matrix sum = Matrix::Zero(n, n), sum2 = Matrix::Zero(n, n);
  SeededRng rng(o.seed + 11);
  for (std::uint64_t k = 0; k < o.samples; ++k) {
    const Matrix t = householder_product(a, draw(s, rng, o));
    sum += t;
    sum2 += t.cwiseProduct(t);
  }
  const double N = static_cast<double>(o.samples);
  const Matrix mean = sum / N;
  const Matrix se =
      ((sum2 / N - mean.cwiseProduct(mean)).cwiseMax(0.0) * (N / (N - 1.0)) / N).cwiseSqrt();
  const Matrix closed = expected_double_reflection(a, kind);
  const double rel_frob = (mean - closed).norm() / closed.norm();
  double max_z = 0.0;
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) {
      const double diff = std::abs(mean(i, j) - closed(i, j));
      if (se(i, j) > 0.0) max_z = std::max(max_z, diff / se(i, j));
      else if (diff > 1e-12) max_z = INFINITY;
    }
  // Two-sided Bonferroni bound over the n^2 entries.
  const double z_crit = boost::math::quantile(
      boost::math::complement(boost::math::normal(), o.significance / (2.0 * n * n)));
  r.metrics = {{"relative_frobenius_error", rel_frob}, {"max_abs_z", max_z},
               {"z_critical", z_crit}, {"samples", o.samples}};
  r.status = rel_frob <= 0.05 && max_z <= z_crit ? CheckStatus::Pass : CheckStatus::Fail;
  r.detail = "Monte Carlo mean of T_j T_i vs closed form";
  return r;
}

inline CheckResult check_sampler_fit(const DenseMatrix& a, SamplerKind kind, const ValidationOptions& o) {
  CheckResult r;
  r.name = std::string("sampler_chi_square_") + std::string(to_string(kind));
  const PairSampler s(a, kind);
  const Index m = a.rows();
  std::vector<double> observed(static_cast<std::size_t>(m * m), 0.0);
  SeededRng rng(o.seed + 23);
  for (std::uint64_t k = 0; k < o.samples; ++k) {
    const IndexPair p = draw(s, rng, o);
    observed[static_cast<std::size_t>(p.first * m + p.second)] += 1.0;
  }
  double impossible = 0.0;
  std::vector<double> e, obs;
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < m; ++j) {
      const std::size_t k = static_cast<std::size_t>(i * m + j);
      const double p = s.pair_probability(i, j);
      if (p > 0.0) {
        e.push_back(p * static_cast<double>(o.samples));
        obs.push_back(observed[k]);
      } else {
        impossible += observed[k];
      }
    }
  const ChiSquare c = chi_square(e, obs, o.significance);
  r.metrics = {{"statistic", c.statistic}, {"critical", c.critical}, {"dof", c.dof},
               {"draws_outside_support", impossible}, {"samples", o.samples}};
  r.status = impossible == 0.0 && c.statistic <= c.critical ? CheckStatus::Pass : CheckStatus::Fail;
  r.detail = "Pearson chi-square at significance " + std::to_string(o.significance);
  return r;
}

inline CheckResult check_adaptive_params(const DenseMatrix& a, const ValidationOptions& o) {
  CheckResult r;
  r.name = "adaptive_parameters";
  unsigned compared = 0;
  double worst = 0.0;
  for (unsigned t = 0; t < o.adaptive_systems; ++t) {
    LinearProblem p = make_consistent(a, o.seed + 1000 + t);
    attach_reference(p);
    const SamplerKind kind = t % 2 ? SamplerKind::Volume : SamplerKind::WithoutReplacement;
    const PairSampler s(a, kind);
    SolverState st(Vector::Zero(a.cols()), o.seed + t);
    for (int k = 0; k < 3; ++k)
      if (amprdr_step(st, s, p, 1e-16, 1e-12, 100 * a.rows()).outcome != StepOutcome::Advanced) break;
    if (st.iteration < 3) continue;
    const IndexPair pair = s.sample(st.rng);
    const auto dr = double_reflect(st.x_curr, pair, p);
    const Vector e = dr.z - st.x_curr, d = st.x_curr - st.x_prev;
    const double ee = e.squaredNorm(), dd = d.squaredNorm(), ed = e.dot(d);
    if (!(std::sqrt(ee) > 1e-16) || ee * dd - ed * ed <= 1e-10 * ee * dd) continue;
    const StepParams sp = amprdr_params(st.x_curr, st.x_prev, dr, pair, p);
    // argmin || x + alpha e + beta d - x_ref || via the 2x2 normal equations.
    const Vector g = *p.x_ref - st.x_curr;
    const double ge = g.dot(e), gd = g.dot(d), det = ee * dd - ed * ed;
    const double alpha = (ge * dd - gd * ed) / det, beta = (ee * gd - ed * ge) / det;
    const double scale = std::max(std::abs(alpha), std::abs(beta));
    worst = std::max({worst, std::abs(sp.alpha - alpha) / scale, std::abs(sp.beta - beta) / scale});
    ++compared;
  }
  r.metrics = {{"systems_compared", compared}, {"max_relative_error", worst}};
  if (compared == 0) {
    r.status = CheckStatus::Skipped;
    r.detail = "no non-degenerate step to compare";
  } else {
    r.status = worst <= 1e-8 ? CheckStatus::Pass : CheckStatus::Fail;
    r.detail = "closed-form (alpha, beta) vs least squares with the known solution";
  }
  return r;
}

inline CheckResult check_pd(const std::string& name, const Matrix& s) {
  CheckResult r;
  r.name = name;
  Eigen::SelfAdjointEigenSolver<Matrix> es(s, Eigen::EigenvaluesOnly);
  const bool pd = is_positive_definite(s);
  r.metrics = {{"min_eigenvalue", es.eigenvalues()[0]}, {"factorization_pd", pd}};
  r.status = pd && es.eigenvalues()[0] > 0.0 ? CheckStatus::Pass : CheckStatus::Fail;
  r.detail = "pivoted LDL^T and symmetric eigenvalues";
  return r;
}

}  // namespace detail

inline std::vector<CheckResult> run_validation(const DenseMatrix& a, const ValidationOptions& o = {}) {
  static const char* kNames[] = {"expected_operator_STRATEGY_I", "expected_operator_STRATEGY_II",
                                 "sampler_chi_square_IID", "sampler_chi_square_STRATEGY_I",
                                 "sampler_chi_square_STRATEGY_II", "adaptive_parameters",
                                 "M_positive_definite", "N_positive_definite"};
  std::vector<CheckResult> out;
  const Index rank = spectral_summary(a).numeric_rank;
  if (rank < 2) {
    for (const char* n : kNames)
      out.push_back({n, CheckStatus::Skipped, "rank(A) >= 2 required (numeric rank " +
                                                  std::to_string(rank) + ")", nlohmann::json::object()});
    return out;
  }
  auto guarded = [&](const char* name, auto&& fn) {
    try {
      out.push_back(fn());
    } catch (const Error& e) {
      out.push_back({name, CheckStatus::Skipped, e.what(), nlohmann::json::object()});
    }
  };
  guarded(kNames[0], [&] { return detail::check_expected_operator(a, SamplerKind::WithoutReplacement, o); });
  guarded(kNames[1], [&] { return detail::check_expected_operator(a, SamplerKind::Volume, o); });
  guarded(kNames[2], [&] { return detail::check_sampler_fit(a, SamplerKind::Iid, o); });
  guarded(kNames[3], [&] { return detail::check_sampler_fit(a, SamplerKind::WithoutReplacement, o); });
  guarded(kNames[4], [&] { return detail::check_sampler_fit(a, SamplerKind::Volume, o); });
  guarded(kNames[5], [&] { return detail::check_adaptive_params(a, o); });
  guarded(kNames[6], [&] { return detail::check_pd(kNames[6], build_M(a)); });
  guarded(kNames[7], [&] { return detail::check_pd(kNames[7], build_N(a)); });
  return out;
}

inline nlohmann::json to_json(const std::vector<CheckResult>& checks) {
  nlohmann::json arr = nlohmann::json::array();
  bool ok = true;
  for (const auto& c : checks) {
    arr.push_back({{"name", c.name}, {"status", to_string(c.status)}, {"detail", c.detail},
                   {"metrics", c.metrics}});
    if (c.status == CheckStatus::Fail) ok = false;
  }
  return {{"passed", ok}, {"checks", arr}};
}

}  // namespace rdr
