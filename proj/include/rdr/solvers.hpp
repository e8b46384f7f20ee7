#pragma once

// Row-action solvers for consistent systems Ax = b built on hyperplane
// reflections:
//
//   RK         x <- P_i(x)                                  (one row per iteration)
//   RDR        x <- (x + R_j R_i x) / 2,   i, j i.i.d. by squared row norm
//   PRDR-I/II  x <- (1 - a) x + a R_j R_i x, pairs without replacement / by volume
//   mRDR       PRDR update with i.i.d. pairs plus b (x - x_prev)
//   AmPRDR-I/II  relaxation a_k and momentum b_k chosen each step so that the
//              new iterate is the projection of the solution onto
//              x + span{z - x, x - x_prev}; computable without the solution
//              because <a_i, x*> = b_i and the previous step leaves
//              x - x* orthogonal to x - x_prev.
//
// One iteration is one double reflection (two row operations); RK counts one
// projection per iteration.

#include <array>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rdr/errors.hpp"
#include "rdr/linalg.hpp"
#include "rdr/problems.hpp"
#include "rdr/rng.hpp"
#include "rdr/sampling.hpp"

namespace rdr {

enum class Method { Rk, Rdr, PrdrI, PrdrII, Mrdr, AmprdrI, AmprdrII };

inline constexpr std::array<Method, 7> kAllMethods = {
    Method::Rk, Method::Rdr, Method::PrdrI, Method::PrdrII,
    Method::Mrdr, Method::AmprdrI, Method::AmprdrII};

inline std::string_view to_string(Method m) {
  switch (m) {
    case Method::Rk: return "RK";
    case Method::Rdr: return "RDR";
    case Method::PrdrI: return "PRDR-I";
    case Method::PrdrII: return "PRDR-II";
    case Method::Mrdr: return "mRDR";
    case Method::AmprdrI: return "AmPRDR-I";
    case Method::AmprdrII: return "AmPRDR-II";
  }
  return "?";
}

/// Case-insensitive; '_' and '-' are interchangeable ("PRDR_I" == "prdr-i").
inline std::optional<Method> parse_method(std::string_view name) {
  auto canon = [](std::string_view s) {
    std::string out;
    for (char c : s) out.push_back(c == '_' ? '-' : static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
    return out;
  };
  const std::string key = canon(name);
  for (Method m : kAllMethods)
    if (canon(to_string(m)) == key) return m;
  return std::nullopt;
}

inline SamplerKind sampler_kind(Method m) {
  switch (m) {
    case Method::PrdrI:
    case Method::AmprdrI: return SamplerKind::WithoutReplacement;
    case Method::PrdrII:
    case Method::AmprdrII: return SamplerKind::Volume;
    default: return SamplerKind::Iid;
  }
}

inline bool is_adaptive(Method m) { return m == Method::AmprdrI || m == Method::AmprdrII; }

using ConstVecRef = Eigen::Ref<const Vector>;

// ---------------------------------------------------------------------------
// Primitives

inline Vector project_hyperplane(ConstVecRef x, ConstVecRef a, double bi) {
  const double nrm = a.squaredNorm();
  if (!(nrm > 0.0)) throw ZeroRow("projection onto a zero row");
  return x - ((a.dot(x) - bi) / nrm) * a;
}

inline Vector reflect_hyperplane(ConstVecRef x, ConstVecRef a, double bi) {
  const double nrm = a.squaredNorm();
  if (!(nrm > 0.0)) throw ZeroRow("reflection across a zero row");
  return x - (2.0 * (a.dot(x) - bi) / nrm) * a;
}

/// z = R_{i2}(R_{i1}(x)) together with the coefficients of
/// z = x - 2u a_{i1} - 2v a_{i2}.
struct DoubleReflection {
  Vector z;
  double u = 0.0;
  double v = 0.0;
};

inline DoubleReflection double_reflect(ConstVecRef x, IndexPair pair, const LinearProblem& p) {
  const auto a1 = p.a.row(pair.first).transpose();
  const auto a2 = p.a.row(pair.second).transpose();
  const double n1 = a1.squaredNorm(), n2 = a2.squaredNorm();
  if (!(n1 > 0.0) || !(n2 > 0.0)) throw ZeroRow("double reflection uses a zero row");
  DoubleReflection out;
  out.u = (a1.dot(x) - p.b[pair.first]) / n1;
  const Vector y = x - 2.0 * out.u * a1;
  out.v = (a2.dot(y) - p.b[pair.second]) / n2;
  out.z = y - 2.0 * out.v * a2;
  return out;
}

inline Vector prdr_step(ConstVecRef x, IndexPair pair, double alpha, const LinearProblem& p) {
  const DoubleReflection dr = double_reflect(x, pair, p);
  return (1.0 - alpha) * x + alpha * dr.z;
}

inline Vector mrdr_step(ConstVecRef x, ConstVecRef x_prev, IndexPair pair, double alpha,
                        double beta, const LinearProblem& p) {
  return prdr_step(x, pair, alpha, p) + beta * (x - x_prev);
}

struct StepParams {
  double alpha = 0.5;
  double beta = 0.0;
  double u = 0.0;
  double v = 0.0;
  bool guarded = false;  // Gram determinant fell below the guard; (1/2, 0) used
};

/// Relative guard on det Gram{z - x, x - x_prev}.
inline constexpr double kDenomGuard = 1e-14;

namespace detail {

// alpha_k, beta_k from w = u a1 + v a2, d = x - x_prev and the residual
// combination c = u (<a1,x> - b1) + v (<a2,x> - b2).
inline StepParams adaptive_params(double u, double v, double c, double ww, double dd, double wd) {
  StepParams sp;
  sp.u = u;
  sp.v = v;
  const double denom = dd * ww - wd * wd;
  if (!(denom > kDenomGuard * dd * ww)) {
    sp.guarded = true;
    return sp;
  }
  sp.alpha = dd * c / (2.0 * denom);
  sp.beta = wd * c / denom;
  return sp;
}

}  // namespace detail

/// Adaptive relaxation and momentum for the step from x along z - x and
/// x - x_prev. Uses only rows and right-hand side entries of the sampled pair.
inline StepParams amprdr_params(ConstVecRef x, ConstVecRef x_prev, const DoubleReflection& dr,
                                IndexPair pair, const LinearProblem& p, double zero_tol = 1e-16) {
  const auto a1 = p.a.row(pair.first).transpose();
  const auto a2 = p.a.row(pair.second).transpose();
  const Vector w = dr.u * a1 + dr.v * a2;
  if (!(2.0 * w.norm() > zero_tol)) throw DegenerateStep("z coincides with x; resample the pair");
  const Vector d = x - x_prev;
  const double c = dr.u * (a1.dot(x) - p.b[pair.first]) + dr.v * (a2.dot(x) - p.b[pair.second]);
  return detail::adaptive_params(dr.u, dr.v, c, w.squaredNorm(), d.squaredNorm(), w.dot(d));
}

// ---------------------------------------------------------------------------
// Driver

enum class Stopping { Rse, Residual };
enum class Termination { Converged, MaxIters, Stalled };

inline std::string_view to_string(Termination t) {
  switch (t) {
    case Termination::Converged: return "Converged";
    case Termination::MaxIters: return "MaxItersExceeded";
    case Termination::Stalled: return "StalledAtNonSolution";
  }
  return "?";
}

struct SolveOptions {
  Method method = Method::PrdrI;
  double alpha = 0.5;             // PRDR / mRDR relaxation; RDR always uses 1/2
  double beta = 0.0;              // mRDR momentum
  double rse_tol = 1e-12;
  std::uint64_t max_iters = 10'000'000;
  double zero_tol = 1e-16;        // ||z - x||_2 below this counts as z == x
  std::uint64_t seed = 0;
  std::uint64_t trace_stride = 10;
  Stopping stopping = Stopping::Rse;
  bool record_time = true;        // false writes 0 seconds (bitwise-reproducible traces)
  std::optional<Vector> x0;       // defaults to 0
};

struct TracePoint {
  std::uint64_t iteration;
  double rse;      // relative solution error, or relative residual under Stopping::Residual
  double seconds;
};

struct SolverState {
  SolverState(Vector x0, std::uint64_t seed)
      : x_curr(x0), x_prev(std::move(x0)), rng(seed) {}

  Vector x_curr;
  Vector x_prev;  // x^{-1} := x^0
  std::uint64_t iteration = 0;
  SeededRng rng;
  std::vector<TracePoint> trace;
  // Scratch buffers reused across iterations.
  Vector w, d;
};

struct SolveResult {
  Vector x;
  std::uint64_t iterations = 0;
  std::vector<TracePoint> trace;
  Termination termination = Termination::MaxIters;
  double final_rse = 0.0;
  std::uint64_t guard_triggers = 0;  // adaptive steps that fell back to (1/2, 0)
  std::uint64_t resamples = 0;       // adaptive pairs rejected because z == x
  double seconds = 0.0;
};

enum class StepOutcome { Advanced, Converged, Stalled };

struct AdaptiveStepInfo {
  StepOutcome outcome = StepOutcome::Advanced;
  IndexPair pair{0, 0};
  StepParams params;
  std::uint64_t resamples = 0;
};

namespace detail {

struct PairTerms {
  double r1, r2, u, v;
};

inline PairTerms pair_terms(const LinearProblem& p, const Vector& row_norms_sq, const Vector& x,
                            IndexPair pair) {
  const auto a1 = p.a.row(pair.first);
  const auto a2 = p.a.row(pair.second);
  PairTerms t;
  t.r1 = a1.dot(x.transpose()) - p.b[pair.first];
  t.u = t.r1 / row_norms_sq[pair.first];
  t.r2 = a2.dot(x.transpose()) - p.b[pair.second];
  const double g12 = pair.first == pair.second ? row_norms_sq[pair.first] : a1.dot(a2);
  t.v = (t.r2 - 2.0 * t.u * g12) / row_norms_sq[pair.second];
  return t;
}

inline bool residual_small(const LinearProblem& p, const Vector& x, double rse_tol) {
  const double scale = std::max(p.b.norm(), 1e-300);
  return (p.a.values() * x - p.b).norm() <= std::sqrt(rse_tol) * scale;
}

}  // namespace detail

/// One AmPRDR step on `state` (Algorithm-style: the first step is the plain
/// midpoint x^1 = (x^0 + z^0) / 2). Pairs with z == x are redrawn; after
/// resample_limit consecutive redraws the residual decides between
/// Converged and Stalled.
inline AdaptiveStepInfo amprdr_step(SolverState& s, const PairSampler& sampler,
                                    const LinearProblem& p, double zero_tol, double rse_tol,
                                    std::uint64_t resample_limit) {
  AdaptiveStepInfo info;
  const Vector& norms = sampler.row_norms_sq();
  s.w.resize(s.x_curr.size());
  s.d.resize(s.x_curr.size());
  for (;;) {
    info.pair = sampler.sample(s.rng);
    const auto t = detail::pair_terms(p, norms, s.x_curr, info.pair);
    const auto a1 = p.a.row(info.pair.first).transpose();
    const auto a2 = p.a.row(info.pair.second).transpose();
    s.w.noalias() = t.u * a1 + t.v * a2;
    const double ww = s.w.squaredNorm();
    if (!(2.0 * std::sqrt(ww) > zero_tol)) {
      if (++info.resamples >= resample_limit) {
        info.outcome = detail::residual_small(p, s.x_curr, rse_tol) ? StepOutcome::Converged
                                                                     : StepOutcome::Stalled;
        return info;
      }
      continue;
    }
    s.d.noalias() = s.x_curr - s.x_prev;
    if (s.iteration == 0) {
      info.params.u = t.u;
      info.params.v = t.v;
    } else {
      const double c = t.u * t.r1 + t.v * t.r2;
      info.params = detail::adaptive_params(t.u, t.v, c, ww, s.d.squaredNorm(), s.w.dot(s.d));
    }
    s.x_prev = s.x_curr;
    s.x_curr.noalias() -= (2.0 * info.params.alpha) * s.w;
    if (info.params.beta != 0.0) s.x_curr.noalias() += info.params.beta * s.d;
    ++s.iteration;
    return info;
  }
}

inline void validate(const SolveOptions& o) {
  if (!(o.rse_tol > 0.0)) throw BadShape("rse_tol must be positive");
  if (!(o.zero_tol >= 0.0)) throw BadShape("zero_tol must be nonnegative");
  const bool relaxed = o.method == Method::PrdrI || o.method == Method::PrdrII ||
                       o.method == Method::Mrdr;
  if (relaxed && !(o.alpha > 0.0 && o.alpha < 1.0))
    throw BadShape("alpha must lie in (0, 1)");
  if (o.method == Method::Mrdr && !(o.beta >= 0.0)) throw BadShape("beta must be >= 0");
}

/// Run `o.method` from x0 until the stopping rule fires or max_iters.
/// The sampler must match sampler_kind(o.method) (any kind works for RK).
inline SolveResult solve(const LinearProblem& p, const SolveOptions& o, const PairSampler& sampler) {
  validate(o);
  if (o.method != Method::Rk && sampler.kind() != sampler_kind(o.method))
    throw BadShape(std::string("sampler kind ") + std::string(to_string(sampler.kind())) +
                   " does not match method " + std::string(to_string(o.method)));
  const Index n = p.a.cols();
  Vector x0 = o.x0 ? *o.x0 : Vector::Zero(n);
  if (x0.size() != n) throw BadShape("x0 has wrong length");

  Vector x_ref;
  double ref_sq = 1.0;
  if (o.stopping == Stopping::Rse) {
    x_ref = p.x_ref ? *p.x_ref : reference_solution(p.a, p.b, x0);
    ref_sq = x_ref.squaredNorm();
    if (!(ref_sq > 0.0)) ref_sq = 1.0;
  }
  const double b_norm = std::max(p.b.norm(), 1e-300);
  const double residual_tol = std::sqrt(o.rse_tol);
  const std::uint64_t stride = std::max<std::uint64_t>(o.trace_stride, 1);

  SolverState s(std::move(x0), o.seed);
  const Vector& norms = sampler.row_norms_sq();
  const auto t0 = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    if (!o.record_time) return 0.0;
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  };
  auto error = [&]() -> double {
    if (o.stopping == Stopping::Rse) return (s.x_curr - x_ref).squaredNorm() / ref_sq;
    return (p.a.values() * s.x_curr - p.b).norm() / b_norm;
  };
  auto converged = [&](double e) {
    return o.stopping == Stopping::Rse ? e <= o.rse_tol : e <= residual_tol;
  };

  SolveResult res;
  const std::uint64_t resample_limit = 100 * static_cast<std::uint64_t>(p.a.rows());
  double err = error();
  s.trace.push_back({0, err, elapsed()});
  if (converged(err)) res.termination = Termination::Converged;

  const double alpha = o.method == Method::Rdr ? 0.5 : o.alpha;
  const bool momentum = o.method == Method::Mrdr && o.beta != 0.0;
  if (momentum) s.d.resize(n);

  while (res.termination != Termination::Converged && s.iteration < o.max_iters) {
    if (o.method == Method::Rk) {
      const Index i = sampler.sample_row(s.rng);
      const auto a = p.a.row(i);
      const double r = a.dot(s.x_curr.transpose()) - p.b[i];
      s.x_curr.noalias() -= (r / norms[i]) * a.transpose();
      ++s.iteration;
    } else if (is_adaptive(o.method)) {
      const auto info = amprdr_step(s, sampler, p, o.zero_tol, o.rse_tol, resample_limit);
      res.resamples += info.resamples;
      if (info.outcome == StepOutcome::Converged) {
        res.termination = Termination::Converged;
        break;
      }
      if (info.outcome == StepOutcome::Stalled) {
        res.termination = Termination::Stalled;
        break;
      }
      if (info.params.guarded && s.iteration > 1) ++res.guard_triggers;
    } else {
      const IndexPair pair = sampler.sample(s.rng);
      const auto t = detail::pair_terms(p, norms, s.x_curr, pair);
      if (momentum) {
        s.d.noalias() = s.x_curr - s.x_prev;
        s.x_prev = s.x_curr;
      }
      s.x_curr.noalias() -= (2.0 * alpha * t.u) * p.a.row(pair.first).transpose();
      s.x_curr.noalias() -= (2.0 * alpha * t.v) * p.a.row(pair.second).transpose();
      if (momentum) s.x_curr.noalias() += o.beta * s.d;
      ++s.iteration;
    }

    const bool on_stride = s.iteration % stride == 0;
    if (o.stopping == Stopping::Rse || on_stride) {
      err = error();
      if (converged(err)) res.termination = Termination::Converged;
    }
    if (on_stride) s.trace.push_back({s.iteration, err, elapsed()});
  }

  if (o.stopping == Stopping::Residual || res.termination != Termination::MaxIters) err = error();
  if (s.trace.back().iteration != s.iteration) s.trace.push_back({s.iteration, err, elapsed()});
  res.x = std::move(s.x_curr);
  res.iterations = s.iteration;
  res.trace = std::move(s.trace);
  res.final_rse = err;
  res.seconds = elapsed();
  return res;
}

inline SolveResult solve(const LinearProblem& p, const SolveOptions& o) {
  const PairSampler sampler(p.a, sampler_kind(o.method));
  return solve(p, o, sampler);
}

}  // namespace rdr
