#include "rlsched/plot.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <fstream>

#include "rlsched/errors.hpp"

namespace rlsched {

namespace {

constexpr double kWidth = 720, kHeight = 420;
constexpr double kLeft = 70, kRight = 160, kTop = 40, kBottom = 50;
constexpr const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                                    "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

std::string escape(const std::string& s) {
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

struct Axis {
  double lo, hi;
  double map(double v, double pix_lo, double pix_hi) const {
    const double span = hi > lo ? hi - lo : 1.0;
    return pix_lo + (v - lo) / span * (pix_hi - pix_lo);
  }
};

Axis padded(double lo, double hi) {
  if (!(hi > lo)) return {lo - 1.0, hi + 1.0};
  const double pad = 0.05 * (hi - lo);
  return {lo - pad, hi + pad};
}

void frame(std::ostringstream& svg, const std::string& title, const std::string& x_label,
           const std::string& y_label, const Axis& y) {
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
      << kHeight << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">"
      << escape(title) << "</text>\n";
  const double x0 = kLeft, x1 = kWidth - kRight, y0 = kHeight - kBottom, y1 = kTop;
  svg << "<line x1=\"" << x0 << "\" y1=\"" << y0 << "\" x2=\"" << x1 << "\" y2=\"" << y0
      << "\" stroke=\"black\"/>\n"
      << "<line x1=\"" << x0 << "\" y1=\"" << y0 << "\" x2=\"" << x0 << "\" y2=\"" << y1
      << "\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double v = y.lo + (y.hi - y.lo) * k / 4.0;
    const double py = y.map(v, y0, y1);
    svg << "<text x=\"" << x0 - 6 << "\" y=\"" << py + 4
        << "\" text-anchor=\"end\" font-size=\"11\">" << format_number(std::round(v * 1000) / 1000)
        << "</text>\n";
  }
  svg << "<text x=\"" << (x0 + x1) / 2 << "\" y=\"" << kHeight - 12
      << "\" text-anchor=\"middle\" font-size=\"12\">" << escape(x_label) << "</text>\n"
      << "<text transform=\"translate(16," << (y0 + y1) / 2
      << ") rotate(-90)\" text-anchor=\"middle\" font-size=\"12\">" << escape(y_label)
      << "</text>\n";
}

void legend(std::ostringstream& svg, const std::vector<std::string>& labels) {
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const double y = kTop + 14 + 18.0 * static_cast<double>(i);
    const double x = kWidth - kRight + 12;
    svg << "<rect x=\"" << x << "\" y=\"" << y - 9 << "\" width=\"12\" height=\"12\" fill=\""
        << kPalette[i % std::size(kPalette)] << "\"/>\n"
        << "<text x=\"" << x + 18 << "\" y=\"" << y + 1 << "\" font-size=\"11\">"
        << escape(labels[i]) << "</text>\n";
  }
}

}  // namespace

std::vector<std::pair<double, double>> band_outline(const LineSeries& s) {
  std::vector<std::pair<double, double>> pts;
  if (s.x.size() < 2 || s.std.size() != s.mean.size()) return pts;
  for (std::size_t i = 0; i < s.x.size(); ++i) pts.emplace_back(s.x[i], s.mean[i] + s.std[i]);
  for (std::size_t i = s.x.size(); i-- > 0;) pts.emplace_back(s.x[i], s.mean[i] - s.std[i]);
  return pts;
}

std::string render_line_chart(const std::vector<LineSeries>& series, const std::string& title,
                              const std::string& x_label, const std::string& y_label) {
  double xlo = std::numeric_limits<double>::infinity(), xhi = -xlo;
  double ylo = xlo, yhi = -xlo;
  for (const LineSeries& s : series) {
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      const double sd = s.std.size() == s.mean.size() ? s.std[i] : 0.0;
      xlo = std::min(xlo, s.x[i]);
      xhi = std::max(xhi, s.x[i]);
      ylo = std::min(ylo, s.mean[i] - sd);
      yhi = std::max(yhi, s.mean[i] + sd);
    }
  }
  if (!std::isfinite(xlo)) xlo = xhi = ylo = yhi = 0.0;
  const Axis x = padded(xlo, xhi), y = padded(ylo, yhi);
  const double px0 = kLeft, px1 = kWidth - kRight, py0 = kHeight - kBottom, py1 = kTop;

  std::ostringstream svg;
  frame(svg, title, x_label, y_label, y);
  std::vector<std::string> labels;
  for (std::size_t k = 0; k < series.size(); ++k) {
    const LineSeries& s = series[k];
    const char* color = kPalette[k % std::size(kPalette)];
    labels.push_back(s.label);
    if (const auto band = band_outline(s); !band.empty()) {
      svg << "<polygon class=\"band\" fill=\"" << color << "\" fill-opacity=\"0.2\" points=\"";
      for (const auto& [bx, by] : band)
        svg << x.map(bx, px0, px1) << ',' << y.map(by, py0, py1) << ' ';
      svg << "\"/>\n";
    }
    if (s.x.size() == 1) {
      svg << "<circle class=\"point\" cx=\"" << x.map(s.x[0], px0, px1) << "\" cy=\""
          << y.map(s.mean[0], py0, py1) << "\" r=\"3\" fill=\"" << color << "\"/>\n";
      continue;
    }
    svg << "<polyline class=\"mean\" fill=\"none\" stroke=\"" << color
        << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i)
      svg << x.map(s.x[i], px0, px1) << ',' << y.map(s.mean[i], py0, py1) << ' ';
    svg << "\"/>\n";
  }
  legend(svg, labels);
  svg << "</svg>\n";
  return svg.str();
}

std::vector<int> bar_chart_order(const std::vector<BarSeries>& series) {
  std::set<int> ids;
  for (const BarSeries& s : series) ids.insert(s.scenarios.begin(), s.scenarios.end());
  return {ids.begin(), ids.end()};
}

std::string render_bar_chart(const std::vector<BarSeries>& series, const std::string& title,
                             const std::string& y_label) {
  const std::vector<int> order = bar_chart_order(series);
  double yhi = 0.0;
  for (const BarSeries& s : series)
    for (std::size_t i = 0; i < s.mean.size(); ++i)
      yhi = std::max(yhi, s.mean[i] + (i < s.std.size() ? s.std[i] : 0.0));
  const Axis y{0.0, yhi > 0.0 ? yhi * 1.05 : 1.0};
  const double px0 = kLeft, px1 = kWidth - kRight, py0 = kHeight - kBottom, py1 = kTop;

  std::ostringstream svg;
  frame(svg, title, "scenario", y_label, y);
  const double group = (px1 - px0) / std::max<double>(1.0, static_cast<double>(order.size()));
  const double bar = 0.8 * group / std::max<double>(1.0, static_cast<double>(series.size()));
  std::vector<std::string> labels;
  for (std::size_t g = 0; g < order.size(); ++g) {
    const double gx = px0 + group * static_cast<double>(g) + 0.1 * group;
    svg << "<text class=\"group\" x=\"" << gx + 0.4 * group << "\" y=\"" << py0 + 16
        << "\" text-anchor=\"middle\" font-size=\"11\">" << order[g] << "</text>\n";
    for (std::size_t k = 0; k < series.size(); ++k) {
      const BarSeries& s = series[k];
      const auto it = std::find(s.scenarios.begin(), s.scenarios.end(), order[g]);
      if (it == s.scenarios.end()) continue;
      const auto i = static_cast<std::size_t>(it - s.scenarios.begin());
      const double bx = gx + bar * static_cast<double>(k);
      const double top = y.map(s.mean[i], py0, py1);
      svg << "<rect class=\"bar\" data-scenario=\"" << order[g] << "\" x=\"" << bx << "\" y=\""
          << top << "\" width=\"" << bar << "\" height=\"" << py0 - top << "\" fill=\""
          << kPalette[k % std::size(kPalette)] << "\"/>\n";
      if (i < s.std.size() && s.std[i] > 0.0) {
        const double cx = bx + bar / 2;
        svg << "<line class=\"err\" x1=\"" << cx << "\" x2=\"" << cx << "\" y1=\""
            << y.map(s.mean[i] - s.std[i], py0, py1) << "\" y2=\""
            << y.map(s.mean[i] + s.std[i], py0, py1) << "\" stroke=\"black\"/>\n";
      }
    }
  }
  for (const BarSeries& s : series) labels.push_back(s.label);
  legend(svg, labels);
  svg << "</svg>\n";
  return svg.str();
}

LineSeries line_series_from_csv(const CsvTable& table, const std::string& label) {
  LineSeries s;
  s.label = label;
  s.x = table.numbers("step");
  if (table.has_column("mean")) {
    s.mean = table.numbers("mean");
    if (table.has_column("std")) s.std = table.numbers("std");
  } else {
    s.mean = table.numbers("mean_return");
  }
  return s;
}

std::vector<BarSeries> bar_series_from_csv(const CsvTable& table) {
  const std::size_t pc = table.column("policy");
  const auto ids = table.numbers("scenario");
  const auto means = table.numbers("mean_slowdown");
  const auto stds = table.numbers("std_slowdown");
  std::map<std::string, BarSeries> by_policy;
  std::vector<std::string> order;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const std::string& policy = table.rows[r].at(pc);
    if (!by_policy.count(policy)) order.push_back(policy);
    BarSeries& s = by_policy[policy];
    s.label = policy;
    s.scenarios.push_back(static_cast<int>(ids[r]));
    s.mean.push_back(means[r]);
    s.std.push_back(stds[r]);
  }
  std::vector<BarSeries> out;
  for (const auto& p : order) out.push_back(by_policy[p]);
  return out;
}

std::vector<std::filesystem::path> emit_plots(const std::vector<std::filesystem::path>& inputs,
                                              const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  std::vector<std::filesystem::path> written;
  for (const auto& input : inputs) {
    const CsvTable table = read_csv(input);
    const std::string stem = input.stem().string();
    std::string svg;
    if (table.has_column("mean_slowdown")) {
      svg = render_bar_chart(bar_series_from_csv(table), "Average slowdown", "mean slowdown");
    } else if (table.has_column("step")) {
      svg = render_line_chart({line_series_from_csv(table, stem)}, "Learning curve",
                              "agent steps", "moving-average episodic return");
    } else {
      throw FormatError(input.string() +
                        ": expected a curve (step, mean_return | mean, std) or an evaluation "
                        "report (scenario, policy, mean_slowdown, std_slowdown)");
    }
    const auto path = out_dir / (stem + ".svg");
    std::ofstream(path) << svg;
    written.push_back(path);
  }
  return written;
}

}  // namespace rlsched
