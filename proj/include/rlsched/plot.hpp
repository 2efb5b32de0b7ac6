#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "rlsched/experiments.hpp"

namespace rlsched {

struct LineSeries {
  std::string label;
  std::vector<double> x, mean, std;  // std empty or same length as mean
};

struct BarSeries {
  std::string label;                 // policy
  std::vector<int> scenarios;        // category keys
  std::vector<double> mean, std;
};

// Upper edge left to right, then lower edge right to left. Empty when the
// series has fewer than two points or no std column.
std::vector<std::pair<double, double>> band_outline(const LineSeries& series);

std::string render_line_chart(const std::vector<LineSeries>& series, const std::string& title,
                              const std::string& x_label, const std::string& y_label);

// Groups bars by scenario id in ascending order.
std::string render_bar_chart(const std::vector<BarSeries>& series, const std::string& title,
                             const std::string& y_label);

// Order of scenario groups in a bar chart.
std::vector<int> bar_chart_order(const std::vector<BarSeries>& series);

LineSeries line_series_from_csv(const CsvTable& table, const std::string& label);
std::vector<BarSeries> bar_series_from_csv(const CsvTable& table);

// Renders each CSV to <out_dir>/<stem>.svg: curve and aggregate files as line
// charts, evaluation reports as bar charts. Throws FormatError for files
// missing the needed columns.
std::vector<std::filesystem::path> emit_plots(const std::vector<std::filesystem::path>& inputs,
                                              const std::filesystem::path& out_dir);

}  // namespace rlsched
