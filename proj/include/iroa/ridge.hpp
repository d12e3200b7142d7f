#pragma once

#include <cmath>
#include <string>

#include "iroa/model.hpp"

namespace iroa {

// In-place Cholesky factorization G = L L^T of a symmetric positive-definite
// matrix. Only the lower triangle of `g` is read. Throws NumericError naming
// the first non-positive pivot.
inline Matrix cholesky_lower(const Matrix& g) {
  const Index n = g.rows();
  Matrix l = Matrix::Zero(n, n);
  for (Index j = 0; j < n; ++j) {
    double d = g(j, j) - l.row(j).head(j).squaredNorm();
    if (!(d > 0.0) || !std::isfinite(d)) {
      throw NumericError("spd_solve: non-positive pivot " + std::to_string(j) +
                             " (value " + std::to_string(d) + ")",
                         static_cast<std::size_t>(j));
    }
    const double ljj = std::sqrt(d);
    l(j, j) = ljj;
    for (Index i = j + 1; i < n; ++i) {
      l(i, j) = (g(i, j) - l.row(i).head(j).dot(l.row(j).head(j))) / ljj;
    }
  }
  return l;
}

// Forward then backward substitution with a lower Cholesky factor.
inline Vector cholesky_solve(const Matrix& l, const Vector& rhs) {
  const Index n = l.rows();
  Vector y(n);
  for (Index i = 0; i < n; ++i) {
    y[i] = (rhs[i] - l.row(i).head(i).dot(y.head(i))) / l(i, i);
  }
  Vector x(n);
  for (Index i = n - 1; i >= 0; --i) {
    x[i] = (y[i] - l.col(i).tail(n - 1 - i).dot(x.tail(n - 1 - i))) / l(i, i);
  }
  return x;
}

// Solves g y = rhs for symmetric positive-definite g.
inline Vector spd_solve(const Matrix& g, const Vector& rhs) {
  if (g.rows() != g.cols()) {
    throw DimensionError("spd_solve: matrix is " + std::to_string(g.rows()) + "x" +
                         std::to_string(g.cols()));
  }
  if (rhs.size() != g.rows()) {
    throw DimensionError("spd_solve: rhs length " + std::to_string(rhs.size()) +
                         " vs order " + std::to_string(g.rows()));
  }
  if (!g.allFinite() || !rhs.allFinite()) {
    throw InputError("spd_solve: non-finite input");
  }
  const double scale = g.cwiseAbs().maxCoeff();
  if ((g - g.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw InputError("spd_solve: matrix is not symmetric");
  }
  return cholesky_solve(cholesky_lower(g), rhs);
}

// Inner subproblem  min_u ||A u - b||^2 + mu ||u||^2.
struct RidgeInput {
  Matrix a;
  Vector b;
  double mu = 0.0;
};

namespace detail {

inline void check_ridge(const Matrix& a, const Vector& b, double mu) {
  if (a.cols() < 1 || a.rows() < 1) throw DimensionError("ridge: empty operator");
  if (b.size() != a.rows()) {
    throw DimensionError("ridge: b length " + std::to_string(b.size()) + " vs " +
                         std::to_string(a.rows()) + " rows");
  }
  if (!(mu > 0.0) || !std::isfinite(mu)) {
    throw InputError("ridge: mu must be positive and finite");
  }
  if (!a.allFinite() || !b.allFinite()) throw InputError("ridge: non-finite input");
}

}  // namespace detail

// Both paths factor their Gram matrix once in double precision and then
// apply residual-correction sweeps. The residual is formed from A itself in
// extended precision, and the iterate is carried in extended precision, so
// the result does not inherit the conditioning of the explicit Gram product.
// This matters when a path is used outside its natural regime (primal with
// S > M or dual with S < M) with a small mu.
inline constexpr int kRidgeRefinements = 3;

namespace detail {
using LongMatrix = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
using LongVector = Eigen::Matrix<long double, Eigen::Dynamic, 1>;
}  // namespace detail

// (A^T A + mu I) u = A^T b, an S x S system.
inline Vector ridge_solve_primal(const Matrix& a, const Vector& b, double mu) {
  detail::check_ridge(a, b, mu);
  Matrix g = a.transpose() * a;
  g.diagonal().array() += mu;
  const Matrix l = cholesky_lower(g);
  const detail::LongMatrix al = a.cast<long double>();
  const detail::LongVector bl = b.cast<long double>();
  const long double mul = mu;
  detail::LongVector u = cholesky_solve(l, a.transpose() * b).cast<long double>();
  for (int i = 0; i < kRidgeRefinements; ++i) {
    const detail::LongVector r = al.transpose() * (bl - al * u) - mul * u;
    u += cholesky_solve(l, r.cast<double>()).cast<long double>();
  }
  return u.cast<double>();
}

// u = A^T (A A^T + mu I)^{-1} b, an M x M system.
inline Vector ridge_solve_dual(const Matrix& a, const Vector& b, double mu) {
  detail::check_ridge(a, b, mu);
  Matrix g = a * a.transpose();
  g.diagonal().array() += mu;
  const Matrix l = cholesky_lower(g);
  const detail::LongMatrix al = a.cast<long double>();
  const detail::LongVector bl = b.cast<long double>();
  const long double mul = mu;
  detail::LongVector y = cholesky_solve(l, b).cast<long double>();
  for (int i = 0; i < kRidgeRefinements; ++i) {
    const detail::LongVector r = bl - al * (al.transpose() * y) - mul * y;
    y += cholesky_solve(l, r.cast<double>()).cast<long double>();
  }
  return (al.transpose() * y).cast<double>();
}

// Picks the smaller factorization: primal when S <= M, dual otherwise.
inline Vector ridge_solve(const Matrix& a, const Vector& b, double mu) {
  return a.cols() <= a.rows() ? ridge_solve_primal(a, b, mu)
                              : ridge_solve_dual(a, b, mu);
}

inline Vector ridge_solve(const RidgeInput& in) { return ridge_solve(in.a, in.b, in.mu); }

}  // namespace iroa
