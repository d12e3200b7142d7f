#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "iroa/model.hpp"
#include "iroa/ridge.hpp"

// Iteratively reweighed operator algorithm.
//
// Each iteration solves the ridge problem
//
//     min_v ||phi * diag(lambda) * v - b||^2 + mu ||v||^2,   lambda_i = u_i^p
//
// on the columns still in the active set. The signal consistent with b is
// x = diag(lambda) * v. The next iterate is the signed (p+1)-th root of x,
// so that x = u^(p+1) holds at every step, not only at the fixed point.
// Starting from u = 1 the first step is a plain ridge solve; later steps
// concentrate weight on the columns that carry the signal. Columns whose
// iterate falls below prune_tau * max|u| are dropped for good.

namespace iroa {

struct IroaConfig {
  int p = 2;
  double mu = 1e-6;
  double epsilon = 1e-3;  // stop when relative change < epsilon / 100
  std::size_t max_iters = 100;
  double prune_tau = 1e-4;  // 0 disables pruning
  std::optional<std::vector<int>> p_schedule;
  bool record_trace = false;

  void validate() const {
    if (p < 1) throw InputError("iroa: p must be >= 1");
    if (!(mu > 0.0) || !std::isfinite(mu)) throw InputError("iroa: mu must be > 0");
    if (!(epsilon > 0.0)) throw InputError("iroa: epsilon must be > 0");
    if (max_iters < 1) throw InputError("iroa: max_iters must be >= 1");
    if (!(prune_tau >= 0.0) || !std::isfinite(prune_tau)) {
      throw InputError("iroa: prune_tau must be >= 0");
    }
    if (p_schedule) {
      if (p_schedule->empty()) throw InputError("iroa: p_schedule is empty");
      for (std::size_t i = 0; i < p_schedule->size(); ++i) {
        if ((*p_schedule)[i] < 1) throw InputError("iroa: p_schedule entries must be >= 1");
        if (i > 0 && (*p_schedule)[i] < (*p_schedule)[i - 1]) {
          throw InputError("iroa: p_schedule must be nondecreasing");
        }
      }
    }
  }
};

struct IroaState {
  Vector u;                   // current iterate, zero off the active set
  Vector lambda;              // reweight diagonal, lambda_i = u_i^p
  std::vector<Index> active;  // sorted, shrinks monotonically
  std::size_t iter = 0;
  Vector x;                   // signal estimate produced by the last step
};

// Signed integer power.
inline Vector reweight(const Vector& u, int p) {
  if (p < 1) throw InputError("reweight: p must be >= 1");
  if (!u.allFinite()) throw InputError("reweight: non-finite input");
  Vector out(u.size());
  for (Index i = 0; i < u.size(); ++i) {
    double v = u[i];
    for (int k = 1; k < p; ++k) v *= u[i];
    out[i] = v;
  }
  return out;
}

// x_i = lambda_i * v_i: the signal actually fit to b by the ridge step.
inline Vector estimate_signal(const Vector& prev_lambda, const Vector& u_next) {
  detail::require_same_length(prev_lambda, u_next, "estimate_signal");
  return prev_lambda.cwiseProduct(u_next);
}

// sgn(x) |x|^(1/order)
inline Vector signed_root(const Vector& x, int order) {
  if (order < 1) throw InputError("signed_root: order must be >= 1");
  Vector out(x.size());
  const double inv = 1.0 / order;
  for (Index i = 0; i < x.size(); ++i) {
    const double a = std::abs(x[i]);
    double r = order == 1 ? a : order == 3 ? std::cbrt(a) : std::pow(a, inv);
    out[i] = std::copysign(r, x[i]);
    if (x[i] == 0.0) out[i] = 0.0;
  }
  return out;
}

// Drops active indices with |u_i| < tau * max_active |u_j|. A zero maximum
// empties the set.
inline IroaState prune(IroaState state, double tau) {
  if (tau == 0.0) return state;
  if (!(tau > 0.0)) throw InputError("prune: tau must be >= 0");
  double max_abs = 0.0;
  for (Index i : state.active) max_abs = std::max(max_abs, std::abs(state.u[i]));
  const double threshold = tau * max_abs;
  std::vector<Index> kept;
  kept.reserve(state.active.size());
  for (Index i : state.active) {
    if (max_abs > 0.0 && std::abs(state.u[i]) >= threshold) {
      kept.push_back(i);
    } else {
      state.u[i] = 0.0;
      state.lambda[i] = 0.0;
      if (state.x.size() == state.u.size()) state.x[i] = 0.0;
    }
  }
  state.active = std::move(kept);
  return state;
}

inline bool has_converged(const Vector& u_prev, const Vector& u_next, double epsilon) {
  detail::require_same_length(u_prev, u_next, "has_converged");
  const double base = u_prev.norm();
  if (base == 0.0) return u_next.isZero(0.0);
  return (u_next - u_prev).norm() / base < epsilon / 100.0;
}

// u = 1, lambda = 1, everything active.
inline IroaState initial_state(Index n, int p) {
  IroaState s;
  s.u = Vector::Ones(n);
  s.lambda = reweight(s.u, p);
  s.active.resize(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) s.active[static_cast<std::size_t>(i)] = i;
  s.x = Vector::Zero(n);
  return s;
}

// Warm start from a signal estimate: u = signed (p+1)-th root of x; the
// active set is the support of x.
inline IroaState warm_state(const Vector& x, int p) {
  IroaState s;
  s.u = signed_root(x, p + 1);
  s.lambda = reweight(s.u, p);
  for (Index i = 0; i < x.size(); ++i) {
    if (s.u[i] != 0.0) s.active.push_back(i);
  }
  s.x = x;
  return s;
}

using StepObserver = std::function<void(const IroaState&)>;

namespace detail {

inline IroaState iroa_step_impl(const Problem& problem, IroaState state,
                                const IroaConfig& config, bool apply_prune) {
  if (state.active.empty()) {
    throw DegenerateStateError("iroa_step: active set is empty");
  }
  if (state.u.size() != problem.n() || state.lambda.size() != problem.n()) {
    throw DimensionError("iroa_step: state length does not match problem");
  }
  const auto s = static_cast<Index>(state.active.size());
  const Matrix& phi = problem.phi();
  Matrix a(problem.m(), s);
  Vector lambda_active(s);
  for (Index j = 0; j < s; ++j) {
    const Index col = state.active[static_cast<std::size_t>(j)];
    lambda_active[j] = state.lambda[col];
    a.col(j) = phi.col(col) * lambda_active[j];
  }
  const Vector v = ridge_solve(a, problem.b(), config.mu);
  const Vector x_active = estimate_signal(lambda_active, v);
  const Vector u_active = signed_root(x_active, config.p + 1);
  const Vector l_active = reweight(u_active, config.p);

  state.x = Vector::Zero(problem.n());
  state.u = Vector::Zero(problem.n());
  state.lambda = Vector::Zero(problem.n());
  for (Index j = 0; j < s; ++j) {
    const Index col = state.active[static_cast<std::size_t>(j)];
    state.x[col] = x_active[j];
    state.u[col] = u_active[j];
    state.lambda[col] = l_active[j];
  }
  if (apply_prune) state = prune(std::move(state), config.prune_tau);
  ++state.iter;
  return state;
}

inline SolveResult finish(const Problem& problem, const IroaState& state,
                          std::size_t iterations, bool converged,
                          std::optional<std::vector<Vector>> trace) {
  SolveResult r;
  r.x_hat = state.x;
  r.u_final = state.u;
  r.iterations = iterations;
  r.converged = converged;
  r.residual_norm = residual_norm(problem, r.x_hat);
  r.trace = std::move(trace);
  return r;
}

inline SolveResult solve_from(const Problem& problem, const IroaConfig& config,
                              IroaState state, bool apply_prune,
                              const StepObserver& observer) {
  std::optional<std::vector<Vector>> trace;
  if (config.record_trace) trace.emplace();
  if (state.active.empty()) {
    state.x = Vector::Zero(problem.n());
    return finish(problem, state, 0, true, std::move(trace));
  }
  const std::size_t start_iter = state.iter;
  bool converged = false;
  while (state.iter - start_iter < config.max_iters) {
    Vector u_prev = state.u;
    state = iroa_step_impl(problem, std::move(state), config, apply_prune);
    if (trace) trace->push_back(state.x);
    if (observer) observer(state);
    if (state.active.empty()) {
      state.x.setZero();
      if (trace) trace->back().setZero();
      converged = true;
      break;
    }
    if (has_converged(u_prev, state.u, config.epsilon)) {
      converged = true;
      break;
    }
  }
  return finish(problem, state, state.iter - start_iter, converged, std::move(trace));
}

}  // namespace detail

// One reweighed ridge step followed by pruning.
inline IroaState iroa_step(const Problem& problem, IroaState state,
                           const IroaConfig& config) {
  return detail::iroa_step_impl(problem, std::move(state), config, true);
}

inline SolveResult iroa_solve(const Problem& problem, const IroaConfig& config,
                              const StepObserver& observer = {}) {
  config.validate();
  return detail::solve_from(problem, config, initial_state(problem.n(), config.p),
                            true, observer);
}

// Runs iroa_solve stage by stage over an increasing p schedule. Each stage
// warm-starts from the previous stage's signal estimate on its surviving
// support. Iteration counts and traces accumulate across stages.
inline SolveResult iroa_solve_schedule(const Problem& problem, const IroaConfig& config,
                                       const StepObserver& observer = {}) {
  config.validate();
  if (!config.p_schedule) throw InputError("iroa_solve_schedule: no p_schedule");
  const auto& schedule = *config.p_schedule;

  SolveResult total;
  std::optional<std::vector<Vector>> trace;
  if (config.record_trace) trace.emplace();
  std::size_t iterations = 0;
  for (std::size_t stage = 0; stage < schedule.size(); ++stage) {
    IroaConfig cfg = config;
    cfg.p = schedule[stage];
    cfg.p_schedule.reset();
    IroaState start = stage == 0 ? initial_state(problem.n(), cfg.p)
                                 : warm_state(total.x_hat, cfg.p);
    total = detail::solve_from(problem, cfg, std::move(start), true, observer);
    iterations += total.iterations;
    if (trace && total.trace) {
      trace->insert(trace->end(), total.trace->begin(), total.trace->end());
    }
    if (total.x_hat.isZero(0.0)) break;
  }
  total.iterations = iterations;
  total.trace = std::move(trace);
  return total;
}

// Uses the schedule when one is configured.
inline SolveResult solve(const Problem& problem, const IroaConfig& config) {
  return config.p_schedule ? iroa_solve_schedule(problem, config)
                           : iroa_solve(problem, config);
}

}  // namespace iroa
