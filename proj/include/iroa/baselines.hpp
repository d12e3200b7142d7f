#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <vector>

#include "iroa/model.hpp"
#include "iroa/ridge.hpp"

// Comparison solvers: normalized iterative hard thresholding, IRLS for
// equality-constrained lp minimization, ISTA for l1-regularized least squares,
// and an exhaustive sparsest-solution oracle for small problems.

namespace iroa {

// ---------------------------------------------------------------------------
// Normalized IHT

struct IhtConfig {
  Index sparsity_k = 1;
  std::size_t max_iters = 500;
  double tol = 1e-6;  // on ||b - phi x|| / ||b||
  bool record_trace = false;
};

// Keeps the k largest-magnitude entries (ties to the lower index).
inline Vector hard_threshold(const Vector& v, Index k) {
  Vector out = Vector::Zero(v.size());
  for (Index i : top_k_support(v, k)) out[i] = v[i];
  return out;
}

inline SolveResult iht_solve(const Problem& problem, const IhtConfig& config) {
  if (config.sparsity_k < 1 || config.sparsity_k > problem.n()) {
    throw InputError("iht: sparsity_k must be in [1, N]");
  }
  const Matrix& phi = problem.phi();
  const Vector& b = problem.b();
  const double b_norm = b.norm();
  // Step-size shrink parameters of the normalized variant.
  constexpr double kappa = 2.0;
  constexpr double c = 0.01;

  SolveResult r;
  if (config.record_trace) r.trace.emplace();
  Vector x = Vector::Zero(problem.n());
  std::vector<Index> support = top_k_support(phi.transpose() * b, config.sparsity_k);

  if (b_norm == 0.0) {
    r.x_hat = x;
    r.u_final = x;
    r.converged = true;
    return r;
  }

  bool converged = false;
  std::size_t it = 0;
  while (it < config.max_iters) {
    const Vector g = phi.transpose() * (b - phi * x);
    Vector g_t = Vector::Zero(g.size());
    for (Index i : support) g_t[i] = g[i];
    const double num = g_t.squaredNorm();
    const double den = (phi * g_t).squaredNorm();
    if (num == 0.0 || den == 0.0) {
      converged = true;
      break;
    }
    double step = num / den;
    Vector x_new;
    std::vector<Index> new_support;
    for (int guard = 0; guard < 64; ++guard) {
      const Vector proposal = x + step * g;
      new_support = top_k_support(proposal, config.sparsity_k);
      x_new = Vector::Zero(x.size());
      for (Index i : new_support) x_new[i] = proposal[i];
      if (new_support == support) break;
      const Vector dx = x_new - x;
      const double dphi = (phi * dx).squaredNorm();
      const double omega = dphi > 0.0 ? (1.0 - c) * dx.squaredNorm() / dphi : step;
      if (step <= omega) break;
      step /= kappa * (1.0 - c);
    }
    x = std::move(x_new);
    support = std::move(new_support);
    ++it;
    if (r.trace) r.trace->push_back(x);
    if ((b - phi * x).norm() < config.tol * b_norm) {
      converged = true;
      break;
    }
  }
  r.x_hat = x;
  r.u_final = x;
  r.iterations = it;
  r.converged = converged;
  r.residual_norm = residual_norm(problem, x);
  return r;
}

// ---------------------------------------------------------------------------
// IRLS for  min ||u||_p^p  s.t.  phi u = b

struct IrlsConfig {
  double p_norm = 1.0;
  double eps_smooth = 1.0;
  double eps_floor = 1e-8;
  std::size_t max_iters = 200;
  bool record_trace = false;
};

namespace detail {

// u = Q phi^T (phi Q phi^T)^{-1} b  with Q = diag(q). One refinement sweep
// keeps the equality residual at rounding level when Q is badly scaled.
inline Vector weighted_min_norm(const Matrix& phi, const Vector& q, const Vector& b) {
  const Matrix pq = phi * q.asDiagonal();
  Matrix g = pq * phi.transpose();
  g = 0.5 * (g + g.transpose());
  Matrix l;
  try {
    l = cholesky_lower(g);
  } catch (const NumericError& e) {
    throw NumericError(std::string("irls: rank-deficient weighted Gram: ") + e.what(),
                       e.pivot());
  }
  Vector y = cholesky_solve(l, b);
  Vector u = pq.transpose() * y;
  const Vector res = b - phi * u;
  y = cholesky_solve(l, res);
  u += pq.transpose() * y;
  return u;
}

}  // namespace detail

inline SolveResult irls_solve(const Problem& problem, const IrlsConfig& config) {
  if (!(config.p_norm > 0.0 && config.p_norm <= 1.0)) {
    throw InputError("irls: p_norm must be in (0, 1]");
  }
  if (!(config.eps_floor > 0.0 && config.eps_floor < config.eps_smooth)) {
    throw InputError("irls: need 0 < eps_floor < eps_smooth");
  }
  if (problem.m() >= problem.n()) throw InputError("irls: requires M < N");

  const Matrix& phi = problem.phi();
  const Vector& b = problem.b();
  SolveResult r;
  if (config.record_trace) r.trace.emplace();

  if (b.isZero(0.0)) {
    r.x_hat = Vector::Zero(problem.n());
    r.u_final = r.x_hat;
    r.converged = true;
    return r;
  }

  Vector u = detail::weighted_min_norm(phi, Vector::Ones(problem.n()), b);
  double eps = config.eps_smooth;
  const double exponent = 1.0 - config.p_norm / 2.0;
  bool converged = false;
  std::size_t it = 0;
  while (it < config.max_iters) {
    const Vector q = (u.array().square() + eps * eps).pow(exponent).matrix();
    Vector u_new = detail::weighted_min_norm(phi, q, b);
    const double change = (u_new - u).norm() / std::max(u.norm(), 1e-300);
    u = std::move(u_new);
    ++it;
    if (r.trace) r.trace->push_back(u);
    if (eps <= config.eps_floor && change < 1e-8) {
      converged = true;
      break;
    }
    if (change < std::sqrt(eps)) eps = std::max(eps / 10.0, config.eps_floor);
  }
  r.x_hat = u;
  r.u_final = u;
  r.iterations = it;
  r.converged = converged;
  r.residual_norm = residual_norm(problem, u);
  return r;
}

// ---------------------------------------------------------------------------
// ISTA for  min mu ||u||_1 + ||phi u - b||^2

struct IstaConfig {
  double mu = 1e-4;
  std::size_t max_iters = 5000;
  double tol = 1e-10;  // on relative objective decrease
  bool record_trace = false;
  // Warm-started stages with penalty max(mu, ||2 phi^T b||_inf * rho^j),
  // sharing the max_iters budget. Only the last stage uses mu itself.
  bool continuation = false;
  double continuation_rho = 0.2;
  double stage_tol = 1e-6;
};

inline double ista_objective(const Problem& problem, const Vector& u, double mu) {
  return mu * u.lpNorm<1>() + (problem.phi() * u - problem.b()).squaredNorm();
}

inline Vector soft_threshold(const Vector& v, double theta) {
  return v.unaryExpr([theta](double x) {
    const double m = std::abs(x) - theta;
    return m > 0.0 ? std::copysign(m, x) : 0.0;
  });
}

// 50 power iterations on phi^T phi, inflated by 1%.
inline double lipschitz_bound(const Matrix& phi) {
  Vector v = Vector::Ones(phi.cols()) / std::sqrt(static_cast<double>(phi.cols()));
  double estimate = 0.0;
  for (int i = 0; i < 50; ++i) {
    Vector w = phi.transpose() * (phi * v);
    estimate = w.norm();
    if (estimate == 0.0) break;
    v = w / estimate;
  }
  return 1.01 * estimate;
}

inline SolveResult ista_solve(const Problem& problem, const IstaConfig& config) {
  if (!(config.mu > 0.0) || !std::isfinite(config.mu)) {
    throw InputError("ista: mu must be > 0");
  }
  const Matrix& phi = problem.phi();
  const Vector& b = problem.b();
  SolveResult r;
  if (config.record_trace) r.trace.emplace();

  const double lip = lipschitz_bound(phi);
  Vector u = Vector::Zero(problem.n());
  if (lip == 0.0) {
    r.x_hat = u;
    r.u_final = u;
    r.converged = true;
    r.residual_norm = residual_norm(problem, u);
    return r;
  }
  const double t = 1.0 / lip;
  std::vector<double> stages;
  if (config.continuation) {
    if (!(config.continuation_rho > 0.0 && config.continuation_rho < 1.0)) {
      throw InputError("ista: continuation_rho must be in (0, 1)");
    }
    // Above 2 ||phi^T b||_inf the minimizer is zero.
    for (double level = 2.0 * (phi.transpose() * b).cwiseAbs().maxCoeff() *
                        config.continuation_rho;
         level > config.mu; level *= config.continuation_rho) {
      stages.push_back(level);
    }
  }
  stages.push_back(config.mu);

  bool converged = false;
  std::size_t it = 0;
  for (std::size_t s = 0; s < stages.size() && it < config.max_iters; ++s) {
    const double mu = stages[s];
    const bool last = s + 1 == stages.size();
    const double tol = last ? config.tol : config.stage_tol;
    double objective = ista_objective(problem, u, mu);
    while (it < config.max_iters) {
      u = soft_threshold(u - t * (phi.transpose() * (phi * u - b)), t * mu / 2.0);
      ++it;
      if (r.trace) r.trace->push_back(u);
      const double next = ista_objective(problem, u, mu);
      const double decrease = objective - next;
      const bool stalled = objective == 0.0 || decrease <= tol * objective;
      objective = next;
      if (stalled) {
        converged = last;
        break;
      }
    }
  }
  r.x_hat = u;
  r.u_final = u;
  r.iterations = it;
  r.converged = converged;
  r.residual_norm = residual_norm(problem, u);
  return r;
}

// ---------------------------------------------------------------------------
// Exhaustive sparsest-solution oracle

struct OracleResult {
  bool found = false;
  Vector signal;
  std::vector<Index> support;
  Index size = 0;
  bool unique = false;
  std::size_t fitting_supports = 0;  // supports of minimal size within tolerance
};

namespace detail {

// Calls fn(support) for every k-subset of {0..n-1} in lexicographic order.
template <typename Fn>
void for_each_subset(Index n, Index k, Fn&& fn) {
  std::vector<Index> s(static_cast<std::size_t>(k));
  for (Index i = 0; i < k; ++i) s[static_cast<std::size_t>(i)] = i;
  while (true) {
    fn(s);
    Index i = k - 1;
    while (i >= 0 && s[static_cast<std::size_t>(i)] == n - k + i) --i;
    if (i < 0) return;
    ++s[static_cast<std::size_t>(i)];
    for (Index j = i + 1; j < k; ++j) {
      s[static_cast<std::size_t>(j)] = s[static_cast<std::size_t>(j - 1)] + 1;
    }
  }
}

}  // namespace detail

// Enumerates supports of size 1..k_max and returns the smallest size at
// which some support reproduces b to 1e-9 relative.
inline OracleResult brute_force_sparsest(const Problem& problem, Index k_max) {
  if (problem.n() > 32) throw InputError("oracle: N must be <= 32");
  if (k_max < 1 || k_max > 4) throw InputError("oracle: k_max must be in [1, 4]");

  const Matrix& phi = problem.phi();
  const Vector& b = problem.b();
  const double tol = 1e-9 * b.norm();
  OracleResult out;
  if (b.isZero(0.0)) {
    out.found = true;
    out.signal = Vector::Zero(problem.n());
    out.unique = true;
    out.fitting_supports = 1;
    return out;
  }

  for (Index k = 1; k <= std::min(k_max, problem.n()); ++k) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t fits = 0;
    Vector best_signal;
    std::vector<Index> best_support;
    Matrix sub(problem.m(), k);
    detail::for_each_subset(problem.n(), k, [&](const std::vector<Index>& s) {
      for (Index j = 0; j < k; ++j) sub.col(j) = phi.col(s[static_cast<std::size_t>(j)]);
      const Vector coef = sub.colPivHouseholderQr().solve(b);
      const double res = (sub * coef - b).norm();
      if (res <= tol) {
        ++fits;
        if (res < best) {
          best = res;
          best_support = s;
          best_signal = Vector::Zero(problem.n());
          for (Index j = 0; j < k; ++j) {
            best_signal[s[static_cast<std::size_t>(j)]] = coef[j];
          }
        }
      }
    });
    if (fits > 0) {
      out.found = true;
      out.signal = std::move(best_signal);
      out.support = std::move(best_support);
      out.size = k;
      out.unique = fits == 1;
      out.fitting_supports = fits;
      return out;
    }
  }
  return out;
}

}  // namespace iroa
