#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "iroa/model.hpp"

// Seeded random problem family: Gaussian measurement matrices with unit-norm
// columns and planted K-sparse signals.

namespace iroa {

using Rng = std::mt19937_64;

// How the nonzero amplitudes of a planted signal are drawn.
enum class SignMode {
  pm1,       // +/-1, sign of a standard normal draw
  gaussian,  // standard normal values
};

inline std::string to_string(SignMode mode) {
  return mode == SignMode::pm1 ? "pm1" : "gaussian";
}

inline SignMode sign_mode_from_string(const std::string& s) {
  if (s == "pm1") return SignMode::pm1;
  if (s == "gaussian") return SignMode::gaussian;
  throw InputError("unknown sign mode '" + s + "' (expected pm1 or gaussian)");
}

struct EnsembleSpec {
  Index m = 50;
  Index n = 200;
  Index k = 1;
  std::size_t trials = 100;
  std::uint64_t seed = 0;
  SignMode sign_mode = SignMode::pm1;
  bool nonnegative = false;  // take |value| of every planted amplitude

  void validate() const {
    if (m < 1 || n < 1) throw InputError("ensemble: m and n must be >= 1");
    if (m > n) throw InputError("ensemble: m must be <= n");
    if (k < 1 || k > n) throw InputError("ensemble: k must be in [1, n]");
    if (trials < 1) throw InputError("ensemble: trials must be >= 1");
  }
};

// SplitMix64 finalizer.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Per-trial generator seed: mix(seed) xor'ed with the trial index, mixed again.
inline std::uint64_t trial_seed(std::uint64_t seed, std::uint64_t trial_index) {
  return mix64(mix64(seed) ^ (trial_index * 0xd1b54a32d192ed03ULL));
}

// i.i.d. N(0, 1) entries, filled column by column.
inline Matrix gaussian_entries(Index m, Index n, Rng& rng) {
  if (m < 1 || n < 1) throw InputError("gaussian_matrix: m and n must be >= 1");
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix a(m, n);
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < m; ++i) a(i, j) = normal(rng);
  }
  return a;
}

// Gaussian matrix with every column scaled to unit 2-norm. An all-zero column
// is redrawn.
inline Matrix gaussian_matrix(Index m, Index n, Rng& rng) {
  Matrix a = gaussian_entries(m, n, rng);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (Index j = 0; j < n; ++j) {
    double norm = a.col(j).norm();
    while (norm == 0.0) {
      for (Index i = 0; i < m; ++i) a(i, j) = normal(rng);
      norm = a.col(j).norm();
    }
    a.col(j) /= norm;
  }
  return a;
}

inline SparseSignal sparse_signal(Index n, Index k, Rng& rng,
                                  SignMode mode = SignMode::pm1,
                                  bool nonnegative = false) {
  if (k < 1 || k > n) throw InputError("sparse_signal: k must be in [1, n]");
  // Partial Fisher-Yates for a uniform k-subset.
  std::vector<Index> perm(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) perm[static_cast<std::size_t>(i)] = i;
  for (Index i = 0; i < k; ++i) {
    std::uniform_int_distribution<Index> pick(i, n - 1);
    std::swap(perm[static_cast<std::size_t>(i)],
              perm[static_cast<std::size_t>(pick(rng))]);
  }
  std::vector<Index> support(perm.begin(), perm.begin() + k);
  std::sort(support.begin(), support.end());

  std::normal_distribution<double> normal(0.0, 1.0);
  Vector values = Vector::Zero(n);
  for (Index i : support) {
    double v = 0.0;
    while (v == 0.0) {
      const double g = normal(rng);
      v = mode == SignMode::pm1 ? (g < 0.0 ? -1.0 : g > 0.0 ? 1.0 : 0.0) : g;
    }
    values[i] = nonnegative ? std::abs(v) : v;
  }
  SparseSignal s;
  s.values = std::move(values);
  s.support = std::move(support);
  s.sparsity_k = k;
  return s;
}

// Problem for one trial. The matrix is drawn first, then the signal, from a
// generator seeded with trial_seed(spec.seed, trial_index).
inline Problem make_problem(const EnsembleSpec& spec, std::size_t trial_index) {
  spec.validate();
  if (trial_index >= spec.trials) {
    throw InputError("make_problem: trial index " + std::to_string(trial_index) +
                     " out of range");
  }
  Rng rng(trial_seed(spec.seed, trial_index));
  Matrix phi = gaussian_matrix(spec.m, spec.n, rng);
  SparseSignal signal = sparse_signal(spec.n, spec.k, rng, spec.sign_mode, spec.nonnegative);
  Vector b = phi * signal.values;
  std::string label = "seed=" + std::to_string(spec.seed) +
                      " trial=" + std::to_string(trial_index) +
                      " m=" + std::to_string(spec.m) + " n=" + std::to_string(spec.n) +
                      " k=" + std::to_string(spec.k);
  return Problem(std::move(phi), std::move(b), std::move(signal.values), std::move(label));
}

}  // namespace iroa
