#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <ctime>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <variant>
#include <vector>

#include "iroa/baselines.hpp"
#include "iroa/ensemble.hpp"
#include "iroa/model.hpp"
#include "iroa/reweighted_operator.hpp"
#include "iroa/version.hpp"

namespace iroa {

using SolverOptions = std::variant<IroaConfig, IhtConfig, IrlsConfig, IstaConfig>;

struct SolverSpec {
  std::string name;
  SolverOptions options;
};

inline SolverSpec iroa_solver(IroaConfig cfg = {}, std::string name = "iroa") {
  return {std::move(name), std::move(cfg)};
}
inline SolverSpec iht_solver(IhtConfig cfg = {}, std::string name = "iht") {
  return {std::move(name), cfg};
}
inline SolverSpec irls_solver(IrlsConfig cfg = {}, std::string name = "irls") {
  return {std::move(name), cfg};
}
// Plain ISTA stalls far from the minimizer at small mu within any sensible
// budget, so the harness runs it with penalty continuation.
inline IstaConfig bench_ista_config() {
  IstaConfig c;
  c.continuation = true;
  return c;
}

inline SolverSpec ista_solver(IstaConfig cfg = bench_ista_config(), std::string name = "ista") {
  return {std::move(name), cfg};
}

inline SolverSpec solver_from_name(const std::string& name) {
  if (name == "iroa") return iroa_solver();
  if (name == "iht") return iht_solver();
  if (name == "irls") return irls_solver();
  if (name == "ista") return ista_solver();
  throw InputError("unknown solver '" + name + "' (expected iroa, iht, irls or ista)");
}

// Runs one solver. IHT takes its sparsity from `k` when k > 0.
inline SolveResult run_solver(const SolverSpec& spec, const Problem& problem, Index k = 0) {
  return std::visit(
      [&](const auto& cfg) -> SolveResult {
        using T = std::decay_t<decltype(cfg)>;
        if constexpr (std::is_same_v<T, IroaConfig>) {
          return solve(problem, cfg);
        } else if constexpr (std::is_same_v<T, IhtConfig>) {
          IhtConfig c = cfg;
          if (k > 0) c.sparsity_k = k;
          return iht_solve(problem, c);
        } else if constexpr (std::is_same_v<T, IrlsConfig>) {
          return irls_solve(problem, cfg);
        } else {
          return ista_solve(problem, cfg);
        }
      },
      spec.options);
}

// FNV-1a over the raw bytes of phi and b.
inline std::uint64_t problem_fingerprint(const Problem& p) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto feed = [&h](const double* data, Index count) {
    const auto* bytes = reinterpret_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < static_cast<std::size_t>(count) * sizeof(double); ++i) {
      h ^= bytes[i];
      h *= 0x100000001b3ULL;
    }
  };
  feed(p.phi().data(), p.phi().size());
  feed(p.b().data(), p.b().size());
  return h;
}

struct SolveEvent {
  std::string solver;
  Index k = 0;
  std::size_t trial = 0;
  std::uint64_t problem_hash = 0;
};

struct BenchConfig {
  EnsembleSpec spec;  // k is overwritten per sweep point
  std::vector<Index> k_values;
  std::vector<SolverSpec> solvers;
  double success_tol = 1e-3;
  std::size_t workers = 0;  // 0: hardware concurrency
  std::function<void(const SolveEvent&)> observer;

  void validate() const {
    if (k_values.empty()) throw InputError("bench: k_values is empty");
    for (std::size_t i = 0; i < k_values.size(); ++i) {
      if (k_values[i] < 1) throw InputError("bench: k values must be >= 1");
      if (i > 0 && k_values[i] <= k_values[i - 1]) {
        throw InputError("bench: k_values must be strictly increasing");
      }
    }
    if (k_values.back() > spec.n) throw InputError("bench: k exceeds n");
    if (solvers.empty()) throw InputError("bench: no solvers");
    if (!(success_tol > 0.0)) throw InputError("bench: success_tol must be > 0");
    EnsembleSpec s = spec;
    s.k = k_values.front();
    s.validate();
  }
};

struct CellStats {
  std::string solver;
  Index k = 0;
  std::size_t trials = 0;
  std::size_t successes = 0;
  std::size_t failures = 0;  // solver threw
  double mean_iterations = 0.0;
  double mean_wall_time = 0.0;  // seconds

  double frequency() const {
    return trials == 0 ? 0.0 : static_cast<double>(successes) / static_cast<double>(trials);
  }
};

struct RecoveryCurve {
  std::vector<CellStats> cells;  // sorted by (solver, k)
  std::vector<std::string> log;  // one line per failed solve
  double total_wall_time = 0.0;

  const CellStats* find(const std::string& solver, Index k) const {
    for (const auto& c : cells) {
      if (c.solver == solver && c.k == k) return &c;
    }
    return nullptr;
  }

  std::vector<std::string> solvers() const {
    std::vector<std::string> out;
    for (const auto& c : cells) {
      if (std::find(out.begin(), out.end(), c.solver) == out.end()) out.push_back(c.solver);
    }
    return out;
  }

  // Cells of one solver in increasing k.
  std::vector<CellStats> series(const std::string& solver) const {
    std::vector<CellStats> out;
    for (const auto& c : cells) {
      if (c.solver == solver) out.push_back(c);
    }
    return out;
  }

  void sort_cells() {
    std::sort(cells.begin(), cells.end(), [](const CellStats& a, const CellStats& b) {
      return a.solver != b.solver ? a.solver < b.solver : a.k < b.k;
    });
  }
};

namespace detail {

struct TrialOutcome {
  bool success = false;
  bool failed = false;
  std::size_t iterations = 0;
  double seconds = 0.0;
  std::string error;
};

inline std::size_t worker_count(std::size_t requested, std::size_t units) {
  std::size_t w = requested;
  if (w == 0) w = std::max<std::size_t>(1, std::thread::hardware_concurrency());
  return std::max<std::size_t>(1, std::min(w, units));
}

}  // namespace detail

// Recovery-frequency sweep. Every (k, trial) pair builds one problem that all
// solvers share. Results are reduced in (solver, k, trial) order, so the
// curve does not depend on scheduling.
inline RecoveryCurve run_experiment(const BenchConfig& config) {
  config.validate();
  const std::size_t n_k = config.k_values.size();
  const std::size_t n_trials = config.spec.trials;
  const std::size_t n_solvers = config.solvers.size();
  const std::size_t units = n_k * n_trials;

  std::vector<detail::TrialOutcome> outcomes(units * n_solvers);
  std::atomic<std::size_t> next{0};
  std::mutex observer_mutex;
  const auto sweep_start = std::chrono::steady_clock::now();

  auto work = [&] {
    for (std::size_t unit = next++; unit < units; unit = next++) {
      const std::size_t ki = unit / n_trials;
      const std::size_t trial = unit % n_trials;
      EnsembleSpec spec = config.spec;
      spec.k = config.k_values[ki];
      const Problem problem = make_problem(spec, trial);
      const std::uint64_t hash = config.observer ? problem_fingerprint(problem) : 0;
      for (std::size_t s = 0; s < n_solvers; ++s) {
        auto& out = outcomes[unit * n_solvers + s];
        const auto& solver = config.solvers[s];
        if (config.observer) {
          std::lock_guard lock(observer_mutex);
          config.observer(SolveEvent{solver.name, spec.k, trial, hash});
        }
        const auto t0 = std::chrono::steady_clock::now();
        try {
          const SolveResult r = run_solver(solver, problem, spec.k);
          out.iterations = r.iterations;
          out.success = r.x_hat.allFinite() &&
                        relative_error(r.x_hat, *problem.ground_truth()) < config.success_tol;
        } catch (const std::exception& e) {
          out.failed = true;
          out.error = e.what();
        }
        out.seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      }
    }
  };

  const std::size_t n_workers = detail::worker_count(config.workers, units);
  if (n_workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(n_workers);
    for (std::size_t w = 0; w < n_workers; ++w) pool.emplace_back(work);
  }

  RecoveryCurve curve;
  for (std::size_t s = 0; s < n_solvers; ++s) {
    for (std::size_t ki = 0; ki < n_k; ++ki) {
      CellStats cell;
      cell.solver = config.solvers[s].name;
      cell.k = config.k_values[ki];
      cell.trials = n_trials;
      double iters = 0.0;
      double secs = 0.0;
      for (std::size_t t = 0; t < n_trials; ++t) {
        const auto& o = outcomes[(ki * n_trials + t) * n_solvers + s];
        cell.successes += o.success ? 1 : 0;
        cell.failures += o.failed ? 1 : 0;
        iters += static_cast<double>(o.iterations);
        secs += o.seconds;
        if (o.failed) {
          curve.log.push_back(cell.solver + " k=" + std::to_string(cell.k) +
                              " trial=" + std::to_string(t) + ": " + o.error);
        }
      }
      cell.mean_iterations = iters / static_cast<double>(n_trials);
      cell.mean_wall_time = secs / static_cast<double>(n_trials);
      curve.cells.push_back(std::move(cell));
    }
  }
  curve.sort_cells();
  curve.total_wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - sweep_start).count();
  return curve;
}

// ---------------------------------------------------------------------------
// Per-iteration trace

struct TraceTable {
  // Row r is the signal estimate x = lambda .* v after iteration r + 1.
  std::vector<Vector> rows;
  std::optional<std::vector<double>> relative_errors;
  std::vector<std::size_t> active_sizes;
  SolveResult result;
};

inline constexpr const char* kTraceQuantity = "x = lambda .* v (reweighted ridge solution)";

inline TraceTable run_trace(const Problem& problem, IroaConfig config) {
  config.record_trace = true;
  TraceTable table;
  auto observer = [&](const IroaState& s) { table.active_sizes.push_back(s.active.size()); };
  table.result = config.p_schedule ? iroa_solve_schedule(problem, config, observer)
                                   : iroa_solve(problem, config, observer);
  table.rows = *table.result.trace;
  if (problem.ground_truth()) {
    std::vector<double> errs;
    errs.reserve(table.rows.size());
    for (const auto& row : table.rows) errs.push_back(relative_error(row, *problem.ground_truth()));
    table.relative_errors = std::move(errs);
  }
  return table;
}

// ---------------------------------------------------------------------------
// CSV export

inline constexpr const char* kCurveCsvHeader =
    "solver,k,trials,successes,frequency,mean_iterations,mean_wall_time_s";

namespace detail {

inline std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

}  // namespace detail

// Rows ordered by solver name then k. The timing column is left empty unless
// requested, which keeps the file byte-reproducible.
inline void write_curve_csv(std::ostream& os, const RecoveryCurve& curve,
                            bool include_timing = false) {
  RecoveryCurve sorted = curve;
  sorted.sort_cells();
  os << kCurveCsvHeader << '\n';
  for (const auto& c : sorted.cells) {
    os << c.solver << ',' << c.k << ',' << c.trials << ',' << c.successes << ','
       << detail::fixed6(c.frequency()) << ',' << detail::fixed6(c.mean_iterations) << ',';
    if (include_timing) os << detail::fixed6(c.mean_wall_time);
    os << '\n';
  }
}

inline void export_csv(const RecoveryCurve& curve, const std::string& path,
                       bool include_timing = false) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FileError("cannot open for writing", path);
  write_curve_csv(out, curve, include_timing);
  out.flush();
  if (!out) throw FileError("write failed", path);
}

inline RecoveryCurve read_curve_csv(std::istream& is) {
  RecoveryCurve curve;
  std::string line;
  std::size_t no = 0;
  if (!std::getline(is, line) || line != kCurveCsvHeader) {
    throw ParseError("missing or unexpected CSV header", 1);
  }
  ++no;
  while (std::getline(is, line)) {
    ++no;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) f.push_back(field);
    if (line.back() == ',') f.emplace_back();
    if (f.size() != 7) throw ParseError("expected 7 fields", no);
    try {
      CellStats c;
      c.solver = f[0];
      c.k = static_cast<Index>(std::stoll(f[1]));
      c.trials = static_cast<std::size_t>(std::stoull(f[2]));
      c.successes = static_cast<std::size_t>(std::stoull(f[3]));
      c.mean_iterations = std::stod(f[5]);
      c.mean_wall_time = f[6].empty() ? 0.0 : std::stod(f[6]);
      curve.cells.push_back(std::move(c));
    } catch (const std::logic_error&) {
      throw ParseError("malformed number", no);
    }
  }
  return curve;
}

inline RecoveryCurve import_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FileError("cannot open", path);
  return read_curve_csv(in);
}

inline void write_trace_csv(std::ostream& os, const TraceTable& table) {
  const Index n = table.rows.empty() ? 0 : table.rows.front().size();
  os << "# quantity: " << kTraceQuantity << '\n';
  os << "iteration,relative_error,active";
  for (Index j = 0; j < n; ++j) os << ",x" << j;
  os << '\n';
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    os << (r + 1) << ',';
    if (table.relative_errors) os << detail::format_double((*table.relative_errors)[r]);
    os << ',';
    if (r < table.active_sizes.size()) os << table.active_sizes[r];
    for (Index j = 0; j < n; ++j) os << ',' << detail::format_double(table.rows[r][j]);
    os << '\n';
  }
}

inline void export_trace_csv(const TraceTable& table, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FileError("cannot open for writing", path);
  write_trace_csv(out, table);
  out.flush();
  if (!out) throw FileError("write failed", path);
}

// ---------------------------------------------------------------------------
// Run manifest: key = value lines. The timestamp and wall time live here and
// nowhere else.

inline std::string describe(const SolverSpec& s) {
  std::ostringstream os;
  os << s.name << ":";
  std::visit(
      [&](const auto& c) {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, IroaConfig>) {
          os << " iroa p=" << c.p << " mu=" << c.mu << " epsilon=" << c.epsilon
             << " tau=" << c.prune_tau << " max_iters=" << c.max_iters;
          if (c.p_schedule) {
            os << " schedule=";
            for (std::size_t i = 0; i < c.p_schedule->size(); ++i) {
              os << (i ? "," : "") << (*c.p_schedule)[i];
            }
          }
        } else if constexpr (std::is_same_v<T, IhtConfig>) {
          os << " iht k=<per cell> max_iters=" << c.max_iters << " tol=" << c.tol;
        } else if constexpr (std::is_same_v<T, IrlsConfig>) {
          os << " irls p_norm=" << c.p_norm << " eps=" << c.eps_smooth
             << " eps_floor=" << c.eps_floor << " max_iters=" << c.max_iters;
        } else {
          os << " ista mu=" << c.mu << " max_iters=" << c.max_iters << " tol=" << c.tol;
          if (c.continuation) os << " continuation_rho=" << c.continuation_rho;
        }
      },
      s.options);
  return os.str();
}

inline void write_manifest(const std::string& path, const BenchConfig& config,
                           const RecoveryCurve& curve,
                           const std::vector<std::pair<std::string, std::string>>& extra = {}) {
  std::ofstream out(path);
  if (!out) throw FileError("cannot open for writing", path);
  const std::time_t now = std::time(nullptr);
  char stamp[64];
  std::strftime(stamp, sizeof(stamp), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  out << "version = " << kVersion << '\n';
  out << "timestamp = " << stamp << '\n';
  out << "seed = " << config.spec.seed << '\n';
  out << "m = " << config.spec.m << '\n';
  out << "n = " << config.spec.n << '\n';
  out << "trials = " << config.spec.trials << '\n';
  out << "sign_mode = " << to_string(config.spec.sign_mode) << '\n';
  out << "nonnegative = " << (config.spec.nonnegative ? "true" : "false") << '\n';
  out << "k_values = ";
  for (std::size_t i = 0; i < config.k_values.size(); ++i) {
    out << (i ? "," : "") << config.k_values[i];
  }
  out << '\n';
  out << "success_tol = " << config.success_tol << '\n';
  for (const auto& s : config.solvers) out << "solver = " << describe(s) << '\n';
  for (const auto& [k, v] : extra) out << k << " = " << v << '\n';
  out << "total_wall_time_s = " << detail::fixed6(curve.total_wall_time) << '\n';
  for (const auto& c : curve.cells) {
    out << "wall_time_s[" << c.solver << ",k=" << c.k
        << "] = " << detail::fixed6(c.mean_wall_time) << '\n';
  }
  for (const auto& line : curve.log) out << "failure = " << line << '\n';
  if (!out) throw FileError("write failed", path);
}

}  // namespace iroa
