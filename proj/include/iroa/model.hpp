#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "iroa/errors.hpp"

namespace iroa {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

namespace detail {

inline bool all_finite(const Matrix& m) { return m.allFinite(); }
inline bool all_finite(const Vector& v) { return v.allFinite(); }

inline void require_same_length(const Vector& a, const Vector& b,
                                const char* what) {
  if (a.size() != b.size()) {
    throw DimensionError(std::string(what) + ": length " +
                         std::to_string(a.size()) + " vs " +
                         std::to_string(b.size()));
  }
}

}  // namespace detail

// A linear inverse problem phi * x = b, optionally with the planted x.
class Problem {
 public:
  Problem(Matrix phi, Vector b, std::optional<Vector> ground_truth = {},
          std::string label = {})
      : phi_(std::move(phi)),
        b_(std::move(b)),
        truth_(std::move(ground_truth)),
        label_(std::move(label)) {
    if (phi_.rows() < 1 || phi_.cols() < 1) {
      throw DimensionError("problem: phi must be at least 1x1");
    }
    if (b_.size() != phi_.rows()) {
      throw DimensionError("problem: b has length " + std::to_string(b_.size()) +
                           ", phi has " + std::to_string(phi_.rows()) + " rows");
    }
    if (truth_ && truth_->size() != phi_.cols()) {
      throw DimensionError("problem: ground truth has length " +
                           std::to_string(truth_->size()) + ", phi has " +
                           std::to_string(phi_.cols()) + " columns");
    }
    if (!detail::all_finite(phi_) || !detail::all_finite(b_) ||
        (truth_ && !detail::all_finite(*truth_))) {
      throw InputError("problem: non-finite entry");
    }
  }

  const Matrix& phi() const noexcept { return phi_; }
  const Vector& b() const noexcept { return b_; }
  const std::optional<Vector>& ground_truth() const noexcept { return truth_; }
  const std::string& label() const noexcept { return label_; }

  Index m() const noexcept { return phi_.rows(); }
  Index n() const noexcept { return phi_.cols(); }

 private:
  Matrix phi_;
  Vector b_;
  std::optional<Vector> truth_;
  std::string label_;
};

struct SparseSignal {
  Vector values;
  std::vector<Index> support;  // sorted
  Index sparsity_k = 0;
};

inline SparseSignal make_sparse_signal(Vector values) {
  SparseSignal s;
  for (Index i = 0; i < values.size(); ++i) {
    if (values[i] != 0.0) s.support.push_back(i);
  }
  s.sparsity_k = static_cast<Index>(s.support.size());
  s.values = std::move(values);
  return s;
}

struct SolveResult {
  Vector x_hat;
  Vector u_final;
  std::size_t iterations = 0;
  bool converged = false;
  double residual_norm = 0.0;
  // Per-iteration signal estimates, when requested.
  std::optional<std::vector<Vector>> trace;
};

inline double residual_norm(const Problem& problem, const Vector& x) {
  return (problem.phi() * x - problem.b()).norm();
}

// ||x_hat - x_true|| / ||x_true||; falls back to ||x_hat|| for an all-zero truth.
inline double relative_error(const Vector& x_hat, const Vector& x_true) {
  detail::require_same_length(x_hat, x_true, "relative_error");
  const double denom = x_true.norm();
  if (denom == 0.0) return x_hat.norm();
  return (x_hat - x_true).norm() / denom;
}

// Indices of the k largest |x_i|, ties to the lower index, returned sorted.
inline std::vector<Index> top_k_support(const Vector& x, Index k) {
  std::vector<Index> idx(static_cast<std::size_t>(x.size()));
  for (Index i = 0; i < x.size(); ++i) idx[static_cast<std::size_t>(i)] = i;
  k = std::clamp<Index>(k, 0, x.size());
  std::stable_sort(idx.begin(), idx.end(), [&](Index a, Index b) {
    return std::abs(x[a]) > std::abs(x[b]);
  });
  idx.resize(static_cast<std::size_t>(k));
  std::sort(idx.begin(), idx.end());
  return idx;
}

// ---------------------------------------------------------------------------
// Plain-text problem format:
//
//   M N
//   <M lines of N decimals: phi>
//   <1 line of M decimals: b>
//   [truth: <N decimals>]
//
// Values are written in shortest round-trip form.

namespace detail {

inline std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

inline double parse_double(std::string_view tok, std::size_t line) {
  double v = 0.0;
  auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (res.ec != std::errc() || res.ptr != tok.data() + tok.size()) {
    throw ParseError("not a number: '" + std::string(tok) + "'", line);
  }
  if (!std::isfinite(v)) {
    throw ParseError("non-finite value: '" + std::string(tok) + "'", line);
  }
  return v;
}

inline Index parse_dim(std::string_view tok, std::size_t line) {
  long long v = 0;
  auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (res.ec != std::errc() || res.ptr != tok.data() + tok.size() || v < 1) {
    throw ParseError("bad dimension: '" + std::string(tok) + "'", line);
  }
  return static_cast<Index>(v);
}

inline void write_row(std::ostream& os, const auto& row) {
  for (Index j = 0; j < row.size(); ++j) {
    if (j) os << ' ';
    os << format_double(row[j]);
  }
  os << '\n';
}

}  // namespace detail

inline void write_problem(std::ostream& os, const Problem& p) {
  os << p.m() << ' ' << p.n() << '\n';
  for (Index i = 0; i < p.m(); ++i) detail::write_row(os, p.phi().row(i));
  detail::write_row(os, p.b());
  if (p.ground_truth()) {
    os << "truth:";
    for (Index j = 0; j < p.n(); ++j) {
      os << ' ' << detail::format_double((*p.ground_truth())[j]);
    }
    os << '\n';
  }
}

inline std::string problem_to_string(const Problem& p) {
  std::ostringstream os;
  write_problem(os, p);
  return os.str();
}

inline Problem read_problem(std::istream& is, std::string label = {}) {
  std::vector<std::pair<std::size_t, std::string>> lines;
  {
    std::string line;
    std::size_t no = 0;
    while (std::getline(is, line)) {
      ++no;
      if (detail::split_ws(line).empty()) continue;
      lines.emplace_back(no, std::move(line));
    }
  }
  std::size_t cursor = 0;
  auto next = [&](const char* what) -> const std::pair<std::size_t, std::string>& {
    if (cursor >= lines.size()) {
      std::size_t last = lines.empty() ? 1 : lines.back().first + 1;
      throw ParseError(std::string("unexpected end of input, expected ") + what, last);
    }
    return lines[cursor++];
  };

  const auto& header = next("header 'M N'");
  auto htoks = detail::split_ws(header.second);
  if (htoks.size() != 2) throw ParseError("header must be 'M N'", header.first);
  const Index m = detail::parse_dim(htoks[0], header.first);
  const Index n = detail::parse_dim(htoks[1], header.first);

  auto read_values = [&](std::span<const std::string_view> toks, Index expect,
                         std::size_t line_no, auto&& sink) {
    if (static_cast<Index>(toks.size()) != expect) {
      throw ParseError("expected " + std::to_string(expect) + " values, got " +
                           std::to_string(toks.size()),
                       line_no);
    }
    for (Index j = 0; j < expect; ++j) {
      sink(j, detail::parse_double(toks[static_cast<std::size_t>(j)], line_no));
    }
  };

  Matrix phi(m, n);
  for (Index i = 0; i < m; ++i) {
    const auto& l = next("matrix row");
    auto toks = detail::split_ws(l.second);
    read_values(toks, n, l.first, [&](Index j, double v) { phi(i, j) = v; });
  }
  Vector b(m);
  {
    const auto& l = next("observation row b");
    auto toks = detail::split_ws(l.second);
    read_values(toks, m, l.first, [&](Index j, double v) { b[j] = v; });
  }
  std::optional<Vector> truth;
  if (cursor < lines.size()) {
    const auto& l = next("truth");
    auto toks = detail::split_ws(l.second);
    if (toks.empty() || toks.front().substr(0, 6) != "truth:") {
      throw ParseError("expected 'truth:' line", l.first);
    }
    // Accept both "truth: v..." and "truth:v...".
    std::string_view rest = toks.front().substr(6);
    std::vector<std::string_view> vals;
    if (!rest.empty()) vals.push_back(rest);
    vals.insert(vals.end(), toks.begin() + 1, toks.end());
    Vector t(n);
    read_values(vals, n, l.first, [&](Index j, double v) { t[j] = v; });
    truth = std::move(t);
    if (cursor < lines.size()) {
      throw ParseError("trailing content after truth line", lines[cursor].first);
    }
  }
  return Problem(std::move(phi), std::move(b), std::move(truth), std::move(label));
}

inline Problem load_problem(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FileError("cannot open problem file", path);
  return read_problem(in, path);
}

inline void save_problem(const Problem& p, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw FileError("cannot write problem file", path);
  write_problem(out, p);
  if (!out) throw FileError("write failed", path);
}

}  // namespace iroa
