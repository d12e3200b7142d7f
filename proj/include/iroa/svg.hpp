#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "iroa/bench.hpp"

// Minimal standalone SVG plots for recovery curves and iteration traces.

namespace iroa {

namespace svg_detail {

inline constexpr double kWidth = 720.0;
inline constexpr double kHeight = 480.0;
inline constexpr double kLeft = 70.0;
inline constexpr double kRight = 170.0;
inline constexpr double kTop = 40.0;
inline constexpr double kBottom = 60.0;

inline const char* color(std::size_t i) {
  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                  "#9467bd", "#8c564b", "#e377c2", "#17becf"};
  return palette[i % (sizeof(palette) / sizeof(palette[0]))];
}

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

inline std::string label_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

inline std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Frame {
  double x_min, x_max, y_min, y_max;

  double px(double x) const {
    const double span = x_max > x_min ? x_max - x_min : 1.0;
    return kLeft + (x - x_min) / span * (kWidth - kLeft - kRight);
  }
  double py(double y) const {
    const double span = y_max > y_min ? y_max - y_min : 1.0;
    return kHeight - kBottom - (y - y_min) / span * (kHeight - kTop - kBottom);
  }
};

inline void open(std::ostream& os, const std::string& title) {
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
     << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
     << kHeight << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\">\n"
     << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
     << "<text x=\"" << num(kWidth / 2) << "\" y=\"24\" text-anchor=\"middle\" "
     << "font-family=\"sans-serif\" font-size=\"16\">" << escape(title) << "</text>\n";
}

inline void axes(std::ostream& os, const Frame& f, const std::string& x_label,
                 const std::string& y_label, int x_ticks, int y_ticks) {
  const double x0 = f.px(f.x_min), x1 = f.px(f.x_max);
  const double y0 = f.py(f.y_min), y1 = f.py(f.y_max);
  os << "<g class=\"axes\" stroke=\"black\" stroke-width=\"1\">\n"
     << "<line x1=\"" << num(x0) << "\" y1=\"" << num(y0) << "\" x2=\"" << num(x1)
     << "\" y2=\"" << num(y0) << "\"/>\n"
     << "<line x1=\"" << num(x0) << "\" y1=\"" << num(y0) << "\" x2=\"" << num(x0)
     << "\" y2=\"" << num(y1) << "\"/>\n"
     << "</g>\n";
  os << "<g font-family=\"sans-serif\" font-size=\"11\">\n";
  for (int i = 0; i <= x_ticks; ++i) {
    const double v = f.x_min + (f.x_max - f.x_min) * i / std::max(1, x_ticks);
    os << "<line x1=\"" << num(f.px(v)) << "\" y1=\"" << num(y0) << "\" x2=\""
       << num(f.px(v)) << "\" y2=\"" << num(y0 + 5) << "\" stroke=\"black\"/>\n"
       << "<text x=\"" << num(f.px(v)) << "\" y=\"" << num(y0 + 18)
       << "\" text-anchor=\"middle\">" << label_num(v) << "</text>\n";
  }
  for (int i = 0; i <= y_ticks; ++i) {
    const double v = f.y_min + (f.y_max - f.y_min) * i / std::max(1, y_ticks);
    os << "<line x1=\"" << num(x0 - 5) << "\" y1=\"" << num(f.py(v)) << "\" x2=\""
       << num(x0) << "\" y2=\"" << num(f.py(v)) << "\" stroke=\"black\"/>\n"
       << "<text x=\"" << num(x0 - 8) << "\" y=\"" << num(f.py(v) + 4)
       << "\" text-anchor=\"end\">" << label_num(v) << "</text>\n";
  }
  os << "</g>\n";
  os << "<text x=\"" << num((x0 + x1) / 2) << "\" y=\"" << num(kHeight - 15)
     << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">"
     << escape(x_label) << "</text>\n";
  os << "<text x=\"18\" y=\"" << num((y0 + y1) / 2)
     << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
     << "transform=\"rotate(-90 18 " << num((y0 + y1) / 2) << ")\">" << escape(y_label)
     << "</text>\n";
}

inline void legend(std::ostream& os, const std::vector<std::string>& names) {
  const double x = kWidth - kRight + 20;
  os << "<g class=\"legend\" font-family=\"sans-serif\" font-size=\"12\">\n";
  for (std::size_t i = 0; i < names.size(); ++i) {
    const double y = kTop + 20 + 20.0 * static_cast<double>(i);
    os << "<line x1=\"" << num(x) << "\" y1=\"" << num(y) << "\" x2=\"" << num(x + 24)
       << "\" y2=\"" << num(y) << "\" stroke=\"" << color(i) << "\" stroke-width=\"2\"/>\n"
       << "<text x=\"" << num(x + 30) << "\" y=\"" << num(y + 4) << "\">" << escape(names[i])
       << "</text>\n";
  }
  os << "</g>\n";
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FileError("cannot open for writing", path);
  out << content;
  out.flush();
  if (!out) throw FileError("write failed", path);
}

}  // namespace svg_detail

// Recovery frequency (0..1) against K, one polyline per solver.
inline std::string curve_svg(const RecoveryCurve& curve) {
  using namespace svg_detail;
  if (curve.cells.empty()) throw InputError("export_svg: empty curve");
  double k_min = static_cast<double>(curve.cells.front().k);
  double k_max = k_min;
  for (const auto& c : curve.cells) {
    k_min = std::min(k_min, static_cast<double>(c.k));
    k_max = std::max(k_max, static_cast<double>(c.k));
  }
  if (k_max == k_min) {
    k_min -= 1.0;
    k_max += 1.0;
  }
  const Frame f{k_min, k_max, 0.0, 1.0};
  std::ostringstream os;
  open(os, "Recovery frequency vs sparsity");
  axes(os, f, "sparsity K", "recovery frequency", 5, 5);
  const auto names = curve.solvers();
  for (std::size_t s = 0; s < names.size(); ++s) {
    const auto series = curve.series(names[s]);
    os << "<g class=\"series\" data-solver=\"" << escape(names[s]) << "\">\n";
    if (series.size() >= 2) {
      os << "<polyline fill=\"none\" stroke=\"" << color(s) << "\" stroke-width=\"2\" points=\"";
      for (std::size_t i = 0; i < series.size(); ++i) {
        os << (i ? " " : "") << num(f.px(static_cast<double>(series[i].k))) << ','
           << num(f.py(series[i].frequency()));
      }
      os << "\"/>\n";
    }
    for (const auto& c : series) {
      os << "<circle cx=\"" << num(f.px(static_cast<double>(c.k))) << "\" cy=\""
         << num(f.py(c.frequency())) << "\" r=\"3\" fill=\"" << color(s) << "\"/>\n";
    }
    os << "</g>\n";
  }
  legend(os, names);
  os << "</svg>\n";
  return os.str();
}

// |x_i| against index i, one series per iteration; later iterations darker.
inline std::string trace_svg(const TraceTable& table) {
  using namespace svg_detail;
  if (table.rows.empty()) throw InputError("export_svg: empty trace");
  const Index n = table.rows.front().size();
  double y_max = 0.0;
  for (const auto& r : table.rows) y_max = std::max(y_max, r.cwiseAbs().maxCoeff());
  if (y_max == 0.0) y_max = 1.0;
  const Frame f{0.0, static_cast<double>(std::max<Index>(1, n - 1)), 0.0, y_max};
  std::ostringstream os;
  open(os, "Signal estimate per iteration");
  axes(os, f, "index i", "|x_i|", 5, 4);
  const std::size_t count = table.rows.size();
  for (std::size_t r = 0; r < count; ++r) {
    const double shade = count == 1 ? 0.0 : 0.85 * (1.0 - static_cast<double>(r) / (count - 1));
    const int g = static_cast<int>(std::lround(255.0 * shade));
    char stroke[16];
    std::snprintf(stroke, sizeof(stroke), "#%02x%02x%02x", g, g, 255);
    os << "<polyline class=\"iteration\" data-iteration=\"" << (r + 1)
       << "\" fill=\"none\" stroke=\"" << stroke << "\" stroke-width=\"1\" points=\"";
    for (Index i = 0; i < n; ++i) {
      os << (i ? " " : "") << num(f.px(static_cast<double>(i))) << ','
         << num(f.py(std::abs(table.rows[r][i])));
    }
    os << "\"/>\n";
  }
  legend(os, {"iteration 1", "iteration " + std::to_string(count)});
  os << "</svg>\n";
  return os.str();
}

inline void export_svg(const RecoveryCurve& curve, const std::string& path) {
  svg_detail::write_file(path, curve_svg(curve));
}

inline void export_svg(const TraceTable& table, const std::string& path) {
  svg_detail::write_file(path, trace_svg(table));
}

}  // namespace iroa
