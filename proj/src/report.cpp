#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>

#include <fmt/core.h>
#include <fmt/ostream.h>

#include "sicae/scenario.hpp"

namespace sicae {

namespace {

constexpr double kWidth = 720.0;
constexpr double kHeight = 420.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 20.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 55.0;
constexpr std::size_t kMaxPoints = 2000;

std::string escape_xml(const std::string& s) {
  std::string out;
  out.reserve(s.size());
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

/// Round step for roughly `target` ticks over [lo, hi].
double tick_step(double lo, double hi, int target) {
  const double raw = (hi - lo) / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    if (raw <= m * mag) return m * mag;
  }
  return 10.0 * mag;
}

}  // namespace

void write_svg_plot(const std::filesystem::path& path, const std::string& title, const std::string& x_label,
                    const std::string& y_label, const std::vector<PlotSeries>& series) {
  double x_lo = std::numeric_limits<double>::infinity();
  double x_hi = -x_lo;
  double y_lo = 0.0;
  double y_hi = -std::numeric_limits<double>::infinity();
  for (const auto& s : series) {
    for (double v : s.x) {
      x_lo = std::min(x_lo, v);
      x_hi = std::max(x_hi, v);
    }
    for (double v : s.y) {
      if (!std::isfinite(v)) continue;
      y_lo = std::min(y_lo, v);
      y_hi = std::max(y_hi, v);
    }
  }
  if (!std::isfinite(x_lo) || x_hi <= x_lo) {
    x_lo = 0.0;
    x_hi = 1.0;
  }
  if (!std::isfinite(y_hi) || y_hi <= y_lo) y_hi = y_lo + 1.0;
  y_hi += 0.05 * (y_hi - y_lo);

  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  auto px = [&](double x) { return kLeft + (x - x_lo) / (x_hi - x_lo) * plot_w; };
  auto py = [&](double y) { return kTop + plot_h - (y - y_lo) / (y_hi - y_lo) * plot_h; };

  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  fmt::print(out,
             "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" viewBox=\"0 0 {0} {1}\" "
             "font-family=\"sans-serif\" font-size=\"12\">\n",
             kWidth, kHeight);
  fmt::print(out, "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
  fmt::print(out, "<text x=\"{}\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">{}</text>\n", kWidth / 2,
             escape_xml(title));

  const double xs = tick_step(x_lo, x_hi, 8);
  for (double v = std::ceil(x_lo / xs) * xs; v <= x_hi + 1e-9 * xs; v += xs) {
    fmt::print(out, "<line x1=\"{0:.2f}\" y1=\"{1:.2f}\" x2=\"{0:.2f}\" y2=\"{2:.2f}\" stroke=\"#ddd\"/>\n", px(v), kTop,
               kTop + plot_h);
    fmt::print(out, "<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"middle\">{:g}</text>\n", px(v), kTop + plot_h + 16,
               v);
  }
  const double ys = tick_step(y_lo, y_hi, 6);
  for (double v = std::ceil(y_lo / ys) * ys; v <= y_hi + 1e-9 * ys; v += ys) {
    fmt::print(out, "<line x1=\"{0:.2f}\" y1=\"{1:.2f}\" x2=\"{2:.2f}\" y2=\"{1:.2f}\" stroke=\"#ddd\"/>\n", kLeft, py(v),
               kLeft + plot_w);
    fmt::print(out, "<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"end\">{:g}</text>\n", kLeft - 6, py(v) + 4, v);
  }
  fmt::print(out, "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>\n", kLeft, kTop,
             plot_w, plot_h);
  fmt::print(out, "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n", kLeft + plot_w / 2, kHeight - 12,
             escape_xml(x_label));
  fmt::print(out, "<text x=\"16\" y=\"{0}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {0})\">{1}</text>\n",
             kTop + plot_h / 2, escape_xml(y_label));

  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};
  for (std::size_t s = 0; s < series.size(); ++s) {
    const auto& ser = series[s];
    const std::size_t n = std::min(ser.x.size(), ser.y.size());
    const std::size_t stride = std::max<std::size_t>(1, n / kMaxPoints);
    fmt::print(out, "<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\" points=\"", colors[s % 5]);
    for (std::size_t k = 0; k < n; k += stride) fmt::print(out, "{:.2f},{:.2f} ", px(ser.x[k]), py(ser.y[k]));
    if (n > 0 && (n - 1) % stride != 0) fmt::print(out, "{:.2f},{:.2f}", px(ser.x[n - 1]), py(ser.y[n - 1]));
    fmt::print(out, "\"/>\n");
    if (series.size() > 1) {
      fmt::print(out, "<text x=\"{}\" y=\"{}\" fill=\"{}\">{}</text>\n", kLeft + plot_w - 80,
                 kTop + 16 + 14 * static_cast<double>(s), colors[s % 5], escape_xml(ser.label));
    }
  }
  fmt::print(out, "</svg>\n");
}

namespace {

std::array<double, 7> columns(const RunSummary& r) {
  return {r.T_e, r.J_u_plus_I, r.J_I, r.J_te, r.I_at_Te, r.max_Su, r.u_max_observed};
}

constexpr std::array<const char*, 7> kColumnNames{"Te", "J_uI", "J_I", "J_te", "I_Te", "max_Su", "u_max"};

}  // namespace

std::string format_comparison(const std::vector<RunSummary>& rows, std::size_t reference) {
  if (rows.empty()) return "(no runs)\n";
  if (reference >= rows.size()) throw std::out_of_range("comparison reference row out of range");
  std::size_t name_w = 4;
  for (const auto& r : rows) name_w = std::max(name_w, r.case_name.size());

  std::string out = fmt::format("{:<{}}", "case", name_w);
  for (const char* c : kColumnNames) out += fmt::format(" {:>11}", c);
  out += "\n";
  for (const auto& r : rows) {
    const auto v = columns(r);
    out += fmt::format("{:<{}}", r.case_name, name_w);
    out += fmt::format(" {:>11.1f} {:>11.4g} {:>11.4g} {:>11.4g} {:>11.2f} {:>11.0f} {:>11.2f}\n", v[0], v[1], v[2],
                       v[3], v[4], v[5], v[6]);
  }
  out += fmt::format("\ndifference to '{}'\n", rows[reference].case_name);
  const auto ref = columns(rows[reference]);
  for (const auto& r : rows) {
    const auto v = columns(r);
    out += fmt::format("{:<{}}", r.case_name, name_w);
    for (std::size_t i = 0; i < v.size(); ++i) out += fmt::format(" {:>+11.4g}", v[i] - ref[i]);
    out += "\n";
  }
  return out;
}

void write_comparison_csv(std::ostream& out, const std::vector<RunSummary>& rows, std::size_t reference) {
  out << kSummaryHeader;
  for (const char* c : kColumnNames) out << ",d_" << c;
  out << '\n';
  if (rows.empty()) return;
  if (reference >= rows.size()) throw std::out_of_range("comparison reference row out of range");
  const auto ref = columns(rows[reference]);
  for (const auto& r : rows) {
    const auto v = columns(r);
    out << r.case_name;
    for (double x : v) fmt::print(out, ",{:.17g}", x);
    for (std::size_t i = 0; i < v.size(); ++i) fmt::print(out, ",{:.17g}", v[i] - ref[i]);
    out << '\n';
  }
}

}  // namespace sicae
