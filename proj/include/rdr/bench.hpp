#pragma once

// Seeded multi-trial benchmark runs.
//
// The matrix is fixed for a configuration; trial t draws x* (and so b) and
// the solver stream from seed base_seed + t, so every method sees the same
// right-hand sides. Samplers are built once per kind and shared by all trials.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "rdr/errors.hpp"
#include "rdr/matrix_market.hpp"
#include "rdr/problems.hpp"
#include "rdr/sampling.hpp"
#include "rdr/solvers.hpp"

namespace rdr {

struct MethodRun {
  std::string label;  // column value in the CSV files; defaults to the method name
  SolveOptions options;
};

inline MethodRun method_run(Method m, double alpha = 0.5, double beta = 0.0) {
  MethodRun r;
  r.label = std::string(to_string(m));
  r.options.method = m;
  r.options.alpha = alpha;
  r.options.beta = beta;
  return r;
}

struct ExperimentConfig {
  Provenance problem;  // SpectralSource, UniformSource or FileSource
  std::vector<MethodRun> methods;
  unsigned trials = 20;
  std::uint64_t base_seed = 0;
  double rse_tol = 1e-12;
  std::uint64_t max_iters = 10'000'000;
  std::uint64_t trace_stride = 10;
  unsigned workers = 1;
  bool include_preprocess = false;
  bool record_time = true;
  std::string output_dir;
};

struct TrialRecord {
  std::string method;
  unsigned trial = 0;
  std::uint64_t iterations = 0;
  double wall_seconds = 0.0;
  double final_rse = 0.0;
  std::string terminated;
  std::uint64_t guard_triggers = 0;
  std::uint64_t resamples = 0;
  std::vector<TracePoint> trace;
};

struct PreprocessRecord {
  SamplerKind kind;
  double seconds = 0.0;
};

struct ExperimentResult {
  Index m = 0, n = 0;
  std::string problem;
  std::vector<TrialRecord> records;  // method order of the config, then trial
  std::vector<PreprocessRecord> preprocess;
};

struct SummaryRow {
  std::string method;
  double median_iters = 0.0;
  double mean_iters = 0.0;
  double mean_seconds = 0.0;
  double success_rate = 0.0;
};

inline DenseMatrix load_problem_matrix(const Provenance& p) {
  if (const auto* s = std::get_if<SpectralSource>(&p))
    return gen_spectral(s->m, s->n, s->r, s->sigma1, s->delta, s->seed);
  if (const auto* u = std::get_if<UniformSource>(&p)) return gen_uniform(u->m, u->n, u->t, u->seed);
  if (const auto* f = std::get_if<FileSource>(&p)) return read_matrix_market(f->path);
  throw BadShape("experiment has no problem source");
}

inline void validate(const ExperimentConfig& c) {
  if (c.trials < 1) throw BadShape("trials must be >= 1");
  if (c.methods.empty()) throw BadShape("no methods selected");
  for (const auto& m : c.methods) {
    SolveOptions o = m.options;
    o.rse_tol = c.rse_tol;
    validate(o);
  }
}

inline ExperimentResult run_experiment(const ExperimentConfig& c, const DenseMatrix& a) {
  validate(c);
  ExperimentResult out;
  out.m = a.rows();
  out.n = a.cols();
  out.problem = describe(c.problem);

  std::map<SamplerKind, PairSampler> samplers;
  std::map<SamplerKind, double> prep;
  for (const auto& m : c.methods) {
    const SamplerKind k = sampler_kind(m.options.method);
    if (samplers.count(k)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    samplers.emplace(k, PairSampler(a, k));
    prep[k] = c.record_time
                  ? std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()
                  : 0.0;
    out.preprocess.push_back({k, prep[k]});
  }

  std::vector<LinearProblem> problems;
  problems.reserve(c.trials);
  for (unsigned t = 0; t < c.trials; ++t) {
    LinearProblem p = make_consistent(a, c.base_seed + t, c.problem);
    attach_reference(p);
    problems.push_back(std::move(p));
  }

  const std::size_t jobs = c.methods.size() * c.trials;
  out.records.resize(jobs);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t j; (j = next.fetch_add(1)) < jobs;) {
      const MethodRun& mr = c.methods[j / c.trials];
      const unsigned t = static_cast<unsigned>(j % c.trials);
      TrialRecord& rec = out.records[j];
      rec.method = mr.label;
      rec.trial = t;
      SolveOptions o = mr.options;
      o.rse_tol = c.rse_tol;
      o.max_iters = c.max_iters;
      o.trace_stride = c.trace_stride;
      o.record_time = c.record_time;
      o.seed = c.base_seed + t;
      o.stopping = Stopping::Rse;
      const SamplerKind k = sampler_kind(o.method);
      try {
        SolveResult r = solve(problems[t], o, samplers.at(k));
        const double offset = c.include_preprocess ? prep.at(k) : 0.0;
        for (auto& tp : r.trace) tp.seconds += offset;
        rec.iterations = r.iterations;
        rec.wall_seconds = r.trace.back().seconds;
        rec.final_rse = r.final_rse;
        rec.terminated = std::string(to_string(r.termination));
        rec.guard_triggers = r.guard_triggers;
        rec.resamples = r.resamples;
        rec.trace = std::move(r.trace);
      } catch (const Error& e) {
        rec.terminated = std::string("Error: ") + e.what();
      }
    }
  };
  const unsigned nw = std::max(1u, std::min<unsigned>(c.workers, static_cast<unsigned>(jobs)));
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < nw; ++w) pool.emplace_back(work);
  work();
  for (auto& th : pool) th.join();
  return out;
}

inline ExperimentResult run_experiment(const ExperimentConfig& c) {
  return run_experiment(c, load_problem_matrix(c.problem));
}

/// Success means the final RSE reached the tolerance; trials that raised an
/// error count as failures and are left out of the iteration statistics.
inline std::vector<SummaryRow> summarize(const ExperimentResult& r, double rse_tol) {
  std::vector<std::string> order;
  for (const auto& rec : r.records)
    if (std::find(order.begin(), order.end(), rec.method) == order.end()) order.push_back(rec.method);
  std::vector<SummaryRow> rows;
  for (const auto& name : order) {
    std::vector<double> its, secs;
    unsigned total = 0, ok = 0;
    for (const auto& rec : r.records) {
      if (rec.method != name) continue;
      ++total;
      if (rec.trace.empty()) continue;
      its.push_back(static_cast<double>(rec.iterations));
      secs.push_back(rec.wall_seconds);
      if (rec.final_rse <= rse_tol) ++ok;
    }
    SummaryRow row;
    row.method = name;
    if (!its.empty()) {
      std::vector<double> sorted = its;
      std::sort(sorted.begin(), sorted.end());
      const std::size_t k = sorted.size();
      row.median_iters = k % 2 ? sorted[k / 2] : 0.5 * (sorted[k / 2 - 1] + sorted[k / 2]);
      row.mean_iters = std::accumulate(its.begin(), its.end(), 0.0) / static_cast<double>(k);
      row.mean_seconds = std::accumulate(secs.begin(), secs.end(), 0.0) / static_cast<double>(k);
    }
    row.success_rate = total ? static_cast<double>(ok) / total : 0.0;
    rows.push_back(row);
  }
  return rows;
}

namespace detail {

inline std::ofstream open_out(const std::string& path) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot write '" + path + "'");
  f << std::setprecision(17);
  return f;
}

}  // namespace detail

/// method,trial,iteration,rse,seconds sorted by (method, trial, iteration).
inline void write_trace_csv(std::ostream& out, const ExperimentResult& r) {
  std::vector<const TrialRecord*> recs;
  for (const auto& rec : r.records) recs.push_back(&rec);
  std::stable_sort(recs.begin(), recs.end(), [](const TrialRecord* a, const TrialRecord* b) {
    return a->method != b->method ? a->method < b->method : a->trial < b->trial;
  });
  out << std::setprecision(17) << "method,trial,iteration,rse,seconds\n";
  for (const auto* rec : recs)
    for (const auto& tp : rec->trace)
      out << rec->method << ',' << rec->trial << ',' << tp.iteration << ',' << tp.rse << ','
          << tp.seconds << '\n';
}

inline void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows) {
  out << std::setprecision(17) << "method,median_iters,mean_iters,mean_seconds,success_rate\n";
  for (const auto& row : rows)
    out << row.method << ',' << row.median_iters << ',' << row.mean_iters << ','
        << row.mean_seconds << ',' << row.success_rate << '\n';
}

inline void write_trials_csv(std::ostream& out, const ExperimentResult& r) {
  out << std::setprecision(17)
      << "method,trial,iterations,wall_seconds,final_rse,terminated,guard_triggers,resamples\n";
  for (const auto& rec : r.records)
    out << rec.method << ',' << rec.trial << ',' << rec.iterations << ',' << rec.wall_seconds << ','
        << rec.final_rse << ",\"" << rec.terminated << "\"," << rec.guard_triggers << ','
        << rec.resamples << '\n';
}

inline void write_preprocess_csv(std::ostream& out, const ExperimentResult& r) {
  out << std::setprecision(17) << "sampler,seconds\n";
  for (const auto& p : r.preprocess) out << to_string(p.kind) << ',' << p.seconds << '\n';
}

/// trace.csv, summary.csv, trials.csv and preprocess.csv under dir.
inline std::vector<SummaryRow> write_outputs(const std::string& dir, const ExperimentResult& r,
                                             double rse_tol) {
  const auto rows = summarize(r, rse_tol);
  auto trace = detail::open_out(dir + "/trace.csv");
  write_trace_csv(trace, r);
  auto summary = detail::open_out(dir + "/summary.csv");
  write_summary_csv(summary, rows);
  auto trials = detail::open_out(dir + "/trials.csv");
  write_trials_csv(trials, r);
  auto prep = detail::open_out(dir + "/preprocess.csv");
  write_preprocess_csv(prep, r);
  if (!trace || !summary || !trials || !prep) throw IoError("write failed under '" + dir + "'");
  return rows;
}

// ---------------------------------------------------------------------------
// trace.csv reader (used by plotting and by consistency checks)

struct TraceRow {
  std::string method;
  unsigned trial;
  std::uint64_t iteration;
  double rse;
  double seconds;
};

inline std::vector<TraceRow> read_trace_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty trace file");
  if (line != "method,trial,iteration,rse,seconds") throw ParseError("unexpected trace header: " + line);
  std::vector<TraceRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream s(line);
    TraceRow r;
    std::string field;
    try {
      std::getline(s, r.method, ',');
      std::getline(s, field, ',');
      r.trial = static_cast<unsigned>(std::stoul(field));
      std::getline(s, field, ',');
      r.iteration = std::stoull(field);
      std::getline(s, field, ',');
      r.rse = std::stod(field);
      std::getline(s, field);
      r.seconds = std::stod(field);
    } catch (const std::exception&) {
      throw ParseError("malformed trace row: " + line);
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

inline std::vector<TraceRow> read_trace_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  return read_trace_csv(in);
}

}  // namespace rdr
