// rdr: generate problems, run benchmarks, report rates, validate, plot.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "rdr/rdr.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

enum Exit { kOk = 0, kUsage = 2, kData = 3, kNumeric = 4 };

int exit_code(const rdr::Error& e) {
  switch (e.kind()) {
    case rdr::ErrorKind::Usage: return kUsage;
    case rdr::ErrorKind::Data: return kData;
    case rdr::ErrorKind::Numeric: return kNumeric;
  }
  return 1;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

// `key = value` lines become `--key value` arguments unless the flag is
// already on the command line. `true`/`false` toggle bare flags.
std::vector<std::string> config_args(const std::string& path, const std::vector<std::string>& argv) {
  std::ifstream in(path);
  if (!in) throw rdr::IoError("cannot open config '" + path + "'");
  auto given = [&](const std::string& key) {
    for (const auto& a : argv)
      if (a == "--" + key || a.rfind("--" + key + "=", 0) == 0) return true;
    return false;
  };
  std::vector<std::string> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line.substr(0, line.find('#')));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw rdr::ParseError(path + ":" + std::to_string(lineno) + ": expected key = value");
    std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
    for (char& c : key)
      if (c == '_') c = '-';
    if (key == "config" || given(key)) continue;
    if (value == "true") {
      out.push_back("--" + key);
    } else if (value != "false") {
      out.push_back("--" + key);
      out.push_back(value);
    }
  }
  return out;
}

struct SourceFlags {
  std::string matrix;
  std::string generator;
  long m = 0, n = 0, r = 0;
  double sigma1 = 100.0, delta = 1.0, t = 0.0;
  std::uint64_t matrix_seed = 0;
  bool matrix_seed_set = false;
};

void add_source_flags(CLI::App* c, SourceFlags& s) {
  c->add_option("--matrix", s.matrix, "Matrix Market file");
  c->add_option("--generator", s.generator, "spectral or uniform")
      ->check(CLI::IsMember({"spectral", "uniform"}));
  c->add_option("--m", s.m, "rows")->check(CLI::PositiveNumber);
  c->add_option("--n", s.n, "columns")->check(CLI::PositiveNumber);
  c->add_option("--r", s.r, "rank (spectral)")->check(CLI::PositiveNumber);
  c->add_option("--sigma1", s.sigma1, "largest singular value (spectral)");
  c->add_option("--delta", s.delta, "smallest singular value (spectral)");
  c->add_option("--t", s.t, "lower entry bound (uniform)");
  c->add_option("--matrix-seed", s.matrix_seed, "generator seed (defaults to --seed)")
      ->each([&](const std::string&) { s.matrix_seed_set = true; });
}

rdr::Provenance make_source(const SourceFlags& s, std::uint64_t seed) {
  const std::uint64_t ms = s.matrix_seed_set ? s.matrix_seed : seed;
  if (!s.matrix.empty()) {
    if (!s.generator.empty()) throw rdr::BadShape("--matrix and --generator are exclusive");
    return rdr::FileSource{s.matrix};
  }
  if (s.generator.empty()) throw rdr::BadShape("need --matrix FILE or --generator spectral|uniform");
  if (s.m <= 0 || s.n <= 0) throw rdr::BadShape("--m and --n are required");
  if (s.generator == "spectral") {
    if (s.r <= 0) throw rdr::BadShape("--r is required for spectral");
    return rdr::SpectralSource{s.m, s.n, s.r, s.sigma1, s.delta, ms};
  }
  return rdr::UniformSource{s.m, s.n, s.t, ms};
}

json provenance_json(const rdr::Provenance& p) {
  json j;
  if (const auto* s = std::get_if<rdr::SpectralSource>(&p))
    j = {{"generator", "spectral"}, {"m", s->m}, {"n", s->n}, {"r", s->r},
         {"sigma1", s->sigma1}, {"delta", s->delta}, {"seed", s->seed}};
  else if (const auto* u = std::get_if<rdr::UniformSource>(&p))
    j = {{"generator", "uniform"}, {"m", u->m}, {"n", u->n}, {"t", u->t}, {"seed", u->seed}};
  else if (const auto* f = std::get_if<rdr::FileSource>(&p))
    j = {{"file", f->path}};
  return j;
}

void ensure_dir(const std::string& dir) {
  if (dir.empty()) return;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw rdr::IoError("cannot create '" + dir + "': " + ec.message());
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path);
  if (!f || !(f << text)) throw rdr::IoError("cannot write '" + path + "'");
}

// ---------------------------------------------------------------------------

int cmd_generate(const std::string& kind, const SourceFlags& s, std::uint64_t seed,
                 const std::string& out) {
  SourceFlags g = s;
  g.generator = kind;
  g.matrix.clear();
  const rdr::Provenance p = make_source(g, seed);
  const rdr::DenseMatrix a = rdr::load_problem_matrix(p);

  fs::path file = out.empty() ? fs::path(".") : fs::path(out);
  if (file.extension() != ".mtx") {
    std::ostringstream name;
    name << kind << '_' << g.m << 'x' << g.n << "_seed" << (g.matrix_seed_set ? g.matrix_seed : seed)
         << ".mtx";
    file /= name.str();
  }
  if (file.has_parent_path()) ensure_dir(file.parent_path().string());
  rdr::write_matrix_market(file.string(), a, rdr::describe(p));

  json meta = {{"provenance", provenance_json(p)},
               {"describe", rdr::describe(p)},
               {"seed", g.matrix_seed_set ? g.matrix_seed : seed},
               {"rng", "splitmix64"},
               {"rows", a.rows()},
               {"cols", a.cols()}};
  fs::path side = file;
  side.replace_extension(".json");
  write_text(side.string(), meta.dump(2) + "\n");
  std::cout << file.string() << '\n';
  return kOk;
}

struct BenchFlags {
  std::string methods = "RDR,PRDR-I,PRDR-II,mRDR,AmPRDR-I,AmPRDR-II";
  unsigned trials = 20;
  double alpha = 0.5;
  double beta = 0.05;
  double rse_tol = 1e-12;
  std::uint64_t max_iters = 10'000'000;
  std::uint64_t trace_stride = 10;
  unsigned workers = 1;
  bool include_preprocess = false;
  bool no_timing = false;
};

int cmd_bench(const SourceFlags& s, const BenchFlags& b, std::uint64_t seed, const std::string& out) {
  rdr::ExperimentConfig c;
  c.problem = make_source(s, seed);
  std::stringstream list(b.methods);
  for (std::string name; std::getline(list, name, ',');) {
    name = trim(name);
    if (name.empty()) continue;
    const auto m = rdr::parse_method(name);
    if (!m) throw rdr::BadShape("unknown method '" + name + "'");
    c.methods.push_back(rdr::method_run(*m, b.alpha, *m == rdr::Method::Mrdr ? b.beta : 0.0));
  }
  c.trials = b.trials;
  c.base_seed = seed;
  c.rse_tol = b.rse_tol;
  c.max_iters = b.max_iters;
  c.trace_stride = b.trace_stride;
  c.workers = b.workers;
  c.include_preprocess = b.include_preprocess;
  c.record_time = !b.no_timing;
  c.output_dir = out.empty() ? "." : out;
  rdr::validate(c);

  const rdr::ExperimentResult r = rdr::run_experiment(c);
  ensure_dir(c.output_dir);
  const auto rows = rdr::write_outputs(c.output_dir, r, c.rse_tol);

  std::cout << r.problem << "  (" << r.m << " x " << r.n << ", " << c.trials << " trials)\n";
  std::cout << std::left << std::setw(12) << "method" << std::right << std::setw(14) << "median_iters"
            << std::setw(14) << "mean_iters" << std::setw(14) << "mean_seconds" << std::setw(10)
            << "success" << '\n';
  for (const auto& row : rows)
    std::cout << std::left << std::setw(12) << row.method << std::right << std::setw(14)
              << row.median_iters << std::setw(14) << row.mean_iters << std::setw(14)
              << std::setprecision(4) << row.mean_seconds << std::setw(10) << row.success_rate
              << std::setprecision(6) << '\n';
  for (const auto& p : r.preprocess)
    std::cout << "preprocess " << rdr::to_string(p.kind) << ": " << p.seconds << " s\n";
  return kOk;
}

int cmd_rates(const SourceFlags& s, double alpha, bool as_json, std::uint64_t seed,
              const std::string& out) {
  const rdr::DenseMatrix a = rdr::load_problem_matrix(make_source(s, seed));
  const rdr::RateReport r = rdr::rate_report(a, alpha);
  const auto g = rdr::row_geometry(a, false);
  const double nmin = g.row_norms_sq.minCoeff(), nmax = g.row_norms_sq.maxCoeff();
  const bool normalized = nmax - nmin <= 1e-12 * nmax;

  json j = {{"delta", r.delta},
            {"M_pd", r.M_pd},
            {"N_pd", r.N_pd},
            {"rho_rdr", r.rho_rdr},
            {"rho_prdr1", r.rho_prdr1},
            {"rho_prdr2", r.rho_prdr2},
            {"alpha", r.alpha},
            {"rank", r.rank},
            {"sigma_min", r.sigma_min},
            {"rho_amprdr1_base", r.rho_amprdr1_base},
            {"rho_amprdr2_base", r.rho_amprdr2_base},
            {"row_normalized", normalized}};
  if (normalized) j["prdr1_le_rdr"] = r.rho_prdr1 <= r.rho_rdr;

  std::ostringstream text;
  text << std::setprecision(12);
  auto line = [&](const std::string& k, const auto& v) {
    text << std::left << std::setw(18) << k << ' ' << v << '\n';
  };
  line("rows x cols", std::to_string(a.rows()) + " x " + std::to_string(a.cols()));
  line("rank", r.rank);
  line("sigma_min", r.sigma_min);
  line("delta", r.delta);
  line("M_pd", r.M_pd ? "yes" : "no");
  line("N_pd", r.N_pd ? "yes" : "no");
  line("alpha", r.alpha);
  line("rho_rdr", r.rho_rdr);
  line("rho_prdr1", r.rho_prdr1);
  line("rho_prdr2", r.rho_prdr2);
  line("rho_amprdr1_base", r.rho_amprdr1_base);
  line("rho_amprdr2_base", r.rho_amprdr2_base);
  if (normalized) line("prdr1 <= rdr", r.rho_prdr1 <= r.rho_rdr ? "yes" : "no");

  std::cout << (as_json ? j.dump(2) + "\n" : text.str());
  if (!out.empty()) {
    ensure_dir(out);
    write_text(out + "/rates.json", j.dump(2) + "\n");
    write_text(out + "/rates.txt", text.str());
  }
  return kOk;
}

int cmd_validate(const SourceFlags& s, std::uint64_t samples, double significance, bool tamper,
                 std::uint64_t seed, const std::string& out) {
  const rdr::DenseMatrix a = rdr::load_problem_matrix(make_source(s, seed));
  rdr::ValidationOptions o;
  o.samples = samples;
  o.seed = seed;
  o.significance = significance;
  if (tamper)
    o.tamper = [](rdr::IndexPair p, rdr::SeededRng& rng) {
      return rng.coin() ? rdr::IndexPair{0, 1} : p;
    };
  const json j = rdr::to_json(rdr::run_validation(a, o));
  std::cout << j.dump(2) << '\n';
  if (!out.empty()) {
    ensure_dir(out);
    write_text(out + "/validation.json", j.dump(2) + "\n");
  }
  return kOk;
}

int cmd_plot(const std::string& trace, const std::string& out) {
  const std::string dir = out.empty() ? fs::path(trace).parent_path().string() : out;
  ensure_dir(dir);
  for (const auto& p : rdr::plot_trace(trace, dir.empty() ? "." : dir)) std::cout << p << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Randomized Douglas-Rachford solvers: generate, bench, rates, validate, plot"};
  app.require_subcommand(1);
  app.fallthrough();

  std::uint64_t seed = 0;
  std::string out, config;
  app.add_option("--seed", seed, "base seed");
  app.add_option("-o,--out", out, "output file (generate) or directory");
  app.add_option("--config", config, "file of `key = value` lines mirroring the flags");

  SourceFlags src;

  auto* gen = app.add_subcommand("generate", "write a synthetic matrix (.mtx + .json sidecar)");
  gen->require_subcommand(1);
  auto* spectral = gen->add_subcommand("spectral", "A = U diag(sigma) V^T");
  auto* uniform = gen->add_subcommand("uniform", "entries uniform in [t, 1]");
  for (auto* c : {spectral, uniform}) {
    c->add_option("--m", src.m, "rows")->required()->check(CLI::PositiveNumber);
    c->add_option("--n", src.n, "columns")->required()->check(CLI::PositiveNumber);
  }
  spectral->add_option("--r", src.r, "rank")->required()->check(CLI::PositiveNumber);
  spectral->add_option("--sigma1", src.sigma1, "largest singular value")->capture_default_str();
  spectral->add_option("--delta", src.delta, "smallest singular value")->capture_default_str();
  uniform->add_option("--t", src.t, "lower entry bound")->capture_default_str();

  BenchFlags bf;
  auto* bench = app.add_subcommand("bench", "seeded multi-trial benchmark; writes CSV files to --out");
  add_source_flags(bench, src);
  bench->add_option("--methods", bf.methods, "comma-separated method names")->capture_default_str();
  bench->add_option("--trials", bf.trials)->capture_default_str()->check(CLI::PositiveNumber);
  bench->add_option("--alpha", bf.alpha)->capture_default_str();
  bench->add_option("--beta", bf.beta, "momentum for mRDR")->capture_default_str();
  bench->add_option("--rse-tol", bf.rse_tol)->capture_default_str();
  bench->add_option("--max-iters", bf.max_iters)->capture_default_str();
  bench->add_option("--trace-stride", bf.trace_stride)->capture_default_str();
  bench->add_option("--workers", bf.workers)->capture_default_str()->check(CLI::PositiveNumber);
  bench->add_flag("--include-preprocess", bf.include_preprocess, "add sampler setup time to trace seconds");
  bench->add_flag("--no-timing", bf.no_timing, "record zero seconds (bitwise-reproducible traces)");

  double alpha = 0.5;
  bool as_json = false;
  auto* rates = app.add_subcommand("rates", "contraction factors and PD checks");
  add_source_flags(rates, src);
  rates->add_option("--alpha", alpha)->capture_default_str();
  rates->add_flag("--json", as_json, "print JSON instead of text");

  std::uint64_t samples = 100000;
  double significance = 1e-3;
  bool tamper = false;
  auto* val = app.add_subcommand("validate", "Monte Carlo and oracle checks; JSON report");
  add_source_flags(val, src);
  val->add_option("--samples", samples)->capture_default_str();
  val->add_option("--significance", significance)->capture_default_str();
  val->add_flag("--tamper-sampler", tamper)->group("");

  std::string trace;
  auto* plot = app.add_subcommand("plot", "SVG plots of trace.csv");
  plot->add_option("trace,--trace", trace, "trace.csv")->required();

  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  try {
    for (std::size_t i = 0; i + 1 < args.size(); ++i)
      if (args[i] == "--config") {
        auto extra = config_args(args[i + 1], args);
        args.insert(args.end(), extra.begin(), extra.end());
        break;
      } else if (args[i].rfind("--config=", 0) == 0) {
        auto extra = config_args(args[i].substr(9), args);
        args.insert(args.end(), extra.begin(), extra.end());
        break;
      }
  } catch (const rdr::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code(e);
  }

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (spectral->parsed()) return cmd_generate("spectral", src, seed, out);
    if (uniform->parsed()) return cmd_generate("uniform", src, seed, out);
    if (bench->parsed()) return cmd_bench(src, bf, seed, out);
    if (rates->parsed()) return cmd_rates(src, alpha, as_json, seed, out);
    if (val->parsed()) return cmd_validate(src, samples, significance, tamper, seed, out);
    if (plot->parsed()) return cmd_plot(trace, out);
  } catch (const rdr::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code(e);
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kData;
  }
  return kUsage;
}
