#pragma once

// Command-line front end: solve, bench, trace, oracle and gen subcommands.
//
// Exit codes: 0 success, 1 usage or parse error, 2 solver hit max_iters
// without converging, 3 oracle found no solution within k_max.

#include <cstdint>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "iroa/baselines.hpp"
#include "iroa/bench.hpp"
#include "iroa/ensemble.hpp"
#include "iroa/model.hpp"
#include "iroa/reweighted_operator.hpp"
#include "iroa/svg.hpp"
#include "iroa/version.hpp"

namespace iroa::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kNotConverged = 2, kNotFound = 3 };

class UsageError : public Error {
 public:
  using Error::Error;
};

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::stringstream ss(s);
  while (std::getline(ss, cur, sep)) out.push_back(cur);
  return out;
}

inline long long parse_int(const std::string& tok, const std::string& what) {
  std::size_t pos = 0;
  long long v = 0;
  try {
    v = std::stoll(tok, &pos);
  } catch (const std::exception&) {
    throw UsageError("invalid " + what + ": '" + tok + "'");
  }
  if (pos != tok.size()) throw UsageError("invalid " + what + ": '" + tok + "'");
  return v;
}

// "2,4,6" or "start:stop:step" (inclusive).
inline std::vector<Index> parse_k_list(const std::string& spec) {
  std::vector<Index> out;
  if (spec.find(':') != std::string::npos) {
    auto parts = split(spec, ':');
    if (parts.size() != 3) throw UsageError("invalid k-list range '" + spec + "'");
    const long long a = parse_int(parts[0], "k-list");
    const long long b = parse_int(parts[1], "k-list");
    const long long s = parse_int(parts[2], "k-list");
    if (s < 1 || a > b) throw UsageError("invalid k-list range '" + spec + "'");
    for (long long k = a; k <= b; k += s) out.push_back(static_cast<Index>(k));
  } else {
    for (const auto& tok : split(spec, ',')) {
      out.push_back(static_cast<Index>(parse_int(tok, "k-list")));
    }
  }
  if (out.empty()) throw UsageError("empty k-list");
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (out[i] < 1) throw UsageError("k-list values must be >= 1");
    if (i > 0 && out[i] <= out[i - 1]) throw UsageError("k-list must be strictly increasing");
  }
  return out;
}

inline std::vector<int> parse_schedule(const std::string& spec) {
  std::vector<int> out;
  for (const auto& tok : split(spec, ',')) out.push_back(static_cast<int>(parse_int(tok, "schedule")));
  if (out.empty()) throw UsageError("empty schedule");
  return out;
}

struct IroaFlags {
  int p = 2;
  double mu = 1e-6;
  double epsilon = 1e-3;
  double tau = 1e-4;
  std::size_t max_iters = 100;
  std::string schedule;

  void add(CLI::App* app) {
    app->add_option("--p", p, "Reweight exponent p (>= 1)")->capture_default_str();
    app->add_option("--mu", mu, "Ridge weight mu (> 0)")->capture_default_str();
    app->add_option("--epsilon", epsilon, "Stop when relative change < epsilon/100")
        ->capture_default_str();
    app->add_option("--tau", tau, "Relative pruning threshold (0 disables)")
        ->capture_default_str();
    app->add_option("--max-iters", max_iters, "Iteration cap")->capture_default_str();
  }

  IroaConfig config() const {
    IroaConfig c;
    c.p = p;
    c.mu = mu;
    c.epsilon = epsilon;
    c.prune_tau = tau;
    c.max_iters = max_iters;
    if (!schedule.empty()) c.p_schedule = parse_schedule(schedule);
    c.validate();
    return c;
  }
};

struct GenFlags {
  Index m = 50;
  Index n = 200;
  Index k = 9;
  std::uint64_t seed = 1;
  std::size_t trial = 0;
  std::string sign_mode = "pm1";
  bool nonnegative = false;

  void add(CLI::App* app, bool with_trial) {
    app->add_option("--m", m, "Rows")->capture_default_str();
    app->add_option("--n", n, "Columns")->capture_default_str();
    app->add_option("--k", k, "Sparsity")->capture_default_str();
    app->add_option("--seed", seed, "Ensemble seed")->capture_default_str();
    if (with_trial) app->add_option("--trial", trial, "Trial index")->capture_default_str();
    app->add_option("--sign-mode", sign_mode, "Amplitudes: pm1 or gaussian")
        ->capture_default_str();
    app->add_flag("--nonnegative", nonnegative, "Use |amplitude|");
  }

  Problem problem() const {
    EnsembleSpec spec;
    spec.m = m;
    spec.n = n;
    spec.k = k;
    spec.seed = seed;
    spec.trials = trial + 1;
    spec.sign_mode = sign_mode_from_string(sign_mode);
    spec.nonnegative = nonnegative;
    return make_problem(spec, trial);
  }
};

inline void write_vector(const std::string& path, const Vector& v) {
  std::ofstream out(path);
  if (!out) throw FileError("cannot open for writing", path);
  for (Index i = 0; i < v.size(); ++i) out << detail::format_double(v[i]) << '\n';
  if (!out) throw FileError("write failed", path);
}

inline void print_summary(std::ostream& out, const Problem& problem, const SolveResult& r) {
  const double b_norm = problem.b().norm();
  std::vector<Index> support;
  for (Index i = 0; i < r.x_hat.size(); ++i) {
    if (r.x_hat[i] != 0.0 && std::abs(r.x_hat[i]) > 1e-9 * r.x_hat.cwiseAbs().maxCoeff()) {
      support.push_back(i);
    }
  }
  out << "converged: " << (r.converged ? "yes" : "no") << '\n';
  out << "iterations: " << r.iterations << '\n';
  out << "residual: " << std::setprecision(6) << std::scientific << r.residual_norm;
  if (b_norm > 0.0) out << " (relative " << r.residual_norm / b_norm << ")";
  out << '\n' << std::defaultfloat;
  out << "support size: " << support.size() << '\n';
  out << "support:";
  for (Index i : support) out << ' ' << i;
  out << '\n';
  out << "values:";
  for (Index i : support) out << ' ' << std::setprecision(10) << r.x_hat[i];
  out << '\n' << std::setprecision(6);
  if (problem.ground_truth()) {
    out << "relative error vs truth: " << std::scientific
        << relative_error(r.x_hat, *problem.ground_truth()) << std::defaultfloat << '\n';
  }
}

inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Sparse recovery by iteratively reweighed operators"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  // solve
  auto* solve_cmd = app.add_subcommand("solve", "Recover a sparse signal from a problem file");
  std::string solve_file;
  std::string solver_name = "iroa";
  IroaFlags solve_iroa;
  Index solve_k = 0;
  std::string solve_out;
  solve_cmd->add_option("problem", solve_file, "Problem file")->required();
  solve_cmd->add_option("--solver", solver_name, "iroa, iht, irls or ista")
      ->check(CLI::IsMember({"iroa", "iht", "irls", "ista"}))
      ->capture_default_str();
  solve_iroa.add(solve_cmd);
  solve_cmd->add_option("--k", solve_k, "Target sparsity (required for iht)");
  solve_cmd->add_option("--schedule", solve_iroa.schedule, "Increasing p schedule, e.g. 1,2,3");
  solve_cmd->add_option("--out", solve_out, "Write x_hat here, one value per line");

  // bench
  auto* bench_cmd = app.add_subcommand("bench", "Recovery frequency sweep over K");
  EnsembleSpec bench_spec;
  bench_spec.seed = 1;
  std::string k_list = "2:30:2";
  std::string solvers = "iroa,iht,irls,ista";
  std::string sign_mode = "pm1";
  double tol = 1e-3;
  std::string csv_path = "recovery.csv";
  std::string svg_path;
  std::string manifest_path;
  bool timing = false;
  std::size_t workers = 0;
  int bench_p = 2;
  bench_cmd->add_option("--m", bench_spec.m, "Rows")->capture_default_str();
  bench_cmd->add_option("--n", bench_spec.n, "Columns")->capture_default_str();
  bench_cmd->add_option("--trials", bench_spec.trials, "Trials per K")->capture_default_str();
  bench_cmd->add_option("--seed", bench_spec.seed, "Ensemble seed")->capture_default_str();
  bench_cmd->add_option("--k-list", k_list, "K values: 2,4,6 or start:stop:step")
      ->capture_default_str();
  bench_cmd->add_option("--solvers", solvers, "Comma-separated solver names")
      ->capture_default_str();
  bench_cmd->add_option("--tol", tol, "Success threshold on relative error")
      ->capture_default_str();
  bench_cmd->add_option("--csv", csv_path, "Curve CSV output")->capture_default_str();
  bench_cmd->add_option("--svg", svg_path, "Curve SVG output");
  bench_cmd->add_option("--manifest", manifest_path, "Run manifest (default: <csv>.manifest)");
  bench_cmd->add_option("--sign-mode", sign_mode, "Amplitudes: pm1 or gaussian")
      ->check(CLI::IsMember({"pm1", "gaussian"}))
      ->capture_default_str();
  bench_cmd->add_option("--p", bench_p, "IROA reweight exponent")->capture_default_str();
  bench_cmd->add_option("--workers", workers, "Worker threads (0: all cores)");
  bench_cmd->add_flag("--timing", timing, "Fill the mean_wall_time_s CSV column");

  // trace
  auto* trace_cmd = app.add_subcommand("trace", "Per-iteration IROA signal estimates");
  std::string trace_file;
  IroaFlags trace_iroa;
  GenFlags trace_gen;
  std::string trace_csv;
  std::string trace_svg;
  trace_cmd->add_option("problem", trace_file, "Problem file (omit to generate one)");
  trace_iroa.add(trace_cmd);
  trace_cmd->add_option("--schedule", trace_iroa.schedule, "Increasing p schedule");
  trace_gen.add(trace_cmd, true);
  trace_cmd->add_option("--csv", trace_csv, "Trace CSV output");
  trace_cmd->add_option("--svg", trace_svg, "Trace SVG output");

  // oracle
  auto* oracle_cmd = app.add_subcommand("oracle", "Exhaustive sparsest solution (N <= 32)");
  std::string oracle_file;
  Index k_max = 3;
  oracle_cmd->add_option("problem", oracle_file, "Problem file")->required();
  oracle_cmd->add_option("--k-max", k_max, "Largest support size to try (<= 4)")
      ->capture_default_str();

  // gen
  auto* gen_cmd = app.add_subcommand("gen", "Write an ensemble problem in text format");
  GenFlags gen;
  std::string gen_out;
  gen.add(gen_cmd, true);
  gen_cmd->add_option("--out", gen_out, "Output file (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*solve_cmd) {
      if (solver_name == "iht" && solve_k < 1) throw UsageError("iht requires --k");
      if (!solve_iroa.schedule.empty() && solver_name != "iroa") {
        throw UsageError("--schedule applies to --solver iroa only");
      }
      const Problem problem = load_problem(solve_file);
      SolverSpec spec = solver_from_name(solver_name);
      if (solver_name == "iroa") spec.options = solve_iroa.config();
      if (solver_name == "ista" && solve_cmd->get_option("--mu")->count() > 0) {
        std::get<IstaConfig>(spec.options).mu = solve_iroa.mu;
      }
      const SolveResult r = run_solver(spec, problem, solve_k);
      out << "solver: " << solver_name;
      if (solver_name == "iroa" && !solve_iroa.schedule.empty()) {
        out << " (schedule " << solve_iroa.schedule << ")";
      }
      out << '\n';
      print_summary(out, problem, r);
      if (!solve_out.empty()) write_vector(solve_out, r.x_hat);
      return r.converged ? kOk : kNotConverged;
    }

    if (*bench_cmd) {
      BenchConfig cfg;
      cfg.spec = bench_spec;
      cfg.spec.sign_mode = sign_mode_from_string(sign_mode);
      cfg.k_values = parse_k_list(k_list);
      if (cfg.k_values.back() > cfg.spec.n) throw UsageError("k-list exceeds n");
      cfg.success_tol = tol;
      cfg.workers = workers;
      for (const auto& name : split(solvers, ',')) {
        SolverSpec s = solver_from_name(name);
        if (name == "iroa") std::get<IroaConfig>(s.options).p = bench_p;
        cfg.solvers.push_back(std::move(s));
      }
      cfg.validate();
      const RecoveryCurve curve = run_experiment(cfg);
      export_csv(curve, csv_path, timing);
      if (!svg_path.empty()) export_svg(curve, svg_path);
      write_manifest(manifest_path.empty() ? csv_path + ".manifest" : manifest_path, cfg, curve,
                     {{"csv", csv_path}, {"svg", svg_path}});
      out << std::left << std::setw(8) << "solver" << std::setw(6) << "k" << std::setw(12)
          << "successes" << std::setw(11) << "frequency" << "mean_iters\n";
      for (const auto& c : curve.cells) {
        out << std::setw(8) << c.solver << std::setw(6) << c.k << std::setw(12)
            << (std::to_string(c.successes) + "/" + std::to_string(c.trials)) << std::setw(11)
            << detail::fixed6(c.frequency()) << detail::fixed6(c.mean_iterations) << '\n';
      }
      for (const auto& line : curve.log) err << "solver failure: " << line << '\n';
      return kOk;
    }

    if (*trace_cmd) {
      const Problem problem = trace_file.empty() ? trace_gen.problem() : load_problem(trace_file);
      const TraceTable table = run_trace(problem, trace_iroa.config());
      out << "iteration  active  relative_error\n";
      for (std::size_t r = 0; r < table.rows.size(); ++r) {
        out << std::setw(9) << (r + 1) << "  " << std::setw(6)
            << (r < table.active_sizes.size() ? table.active_sizes[r] : 0) << "  ";
        if (table.relative_errors) {
          out << std::scientific << std::setprecision(4) << (*table.relative_errors)[r]
              << std::defaultfloat;
        } else {
          out << "-";
        }
        out << '\n';
      }
      if (!trace_csv.empty()) export_trace_csv(table, trace_csv);
      if (!trace_svg.empty()) export_svg(table, trace_svg);
      return table.result.converged ? kOk : kNotConverged;
    }

    if (*oracle_cmd) {
      if (k_max < 1 || k_max > 4) throw UsageError("--k-max must be in [1, 4]");
      const Problem problem = load_problem(oracle_file);
      if (problem.n() > 32) throw UsageError("oracle requires N <= 32");
      const OracleResult r = brute_force_sparsest(problem, k_max);
      if (!r.found) {
        out << "not found: no support of size <= " << k_max << " fits b\n";
        return kNotFound;
      }
      out << "size: " << r.size << '\n';
      out << "unique: " << (r.unique ? "yes" : "no") << '\n';
      out << "support:";
      for (Index i : r.support) out << ' ' << i;
      out << '\n' << "values:";
      for (Index i : r.support) out << ' ' << std::setprecision(10) << r.signal[i];
      out << '\n';
      return kOk;
    }

    if (*gen_cmd) {
      const Problem problem = gen.problem();
      if (gen_out.empty()) {
        write_problem(out, problem);
      } else {
        save_problem(problem, gen_out);
      }
      return kOk;
    }
  } catch (const ParseError& e) {
    err << "parse error: " << (*solve_cmd ? solve_file : *trace_cmd ? trace_file : oracle_file)
        << ": " << e.what() << '\n';
    return kUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}

}  // namespace iroa::cli
