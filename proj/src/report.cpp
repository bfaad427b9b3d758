#include "cablesim/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace cablesim {

double round_half_away(double value, int decimals) {
  const double scale = std::pow(10.0, decimals);
  return std::round(value * scale) / scale;
}

double percent_error(double sim, double real) {
  if (real == 0.0)
    throw std::domain_error("percent_error: undefined for real = 0");
  return std::abs(sim - real) / std::abs(real) * 100.0;
}

double ComparisonReport::max_percent_error() const {
  double max = 0.0;
  for (const ReportRow& row : rows)
    if (row.percent_defined) max = std::max(max, row.percent);
  return max;
}

ComparisonReport build_report(const std::vector<double>& sim,
                              const std::vector<double>& real,
                              const std::vector<std::string>& labels,
                              const ReportMeta& meta) {
  if (sim.size() != real.size() || sim.size() != labels.size())
    throw std::invalid_argument("build_report: sim, real and labels must have equal length");
  ComparisonReport report;
  report.meta = meta;
  report.rows.reserve(sim.size());
  for (size_t i = 0; i < sim.size(); ++i) {
    ReportRow row;
    row.label = labels[i];
    row.sim = sim[i];
    row.real = real[i];
    row.difference = sim[i] - real[i];
    row.percent_defined = real[i] != 0.0;
    row.percent = row.percent_defined ? percent_error(sim[i], real[i]) : 0.0;
    report.rows.push_back(row);
  }
  return report;
}

namespace {

std::string fixed(double value, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, round_half_away(value, decimals));
  return buf;
}

}  // namespace

std::string render_text(const ComparisonReport& report) {
  std::ostringstream out;
  if (!report.meta.experiment.empty()) out << report.meta.experiment << "\n";
  size_t width = 5;
  for (const ReportRow& row : report.rows) width = std::max(width, row.label.size());

  auto pad = [&](const std::string& text, size_t w) {
    std::string padded = text;
    padded.resize(std::max(w, text.size()), ' ');
    return padded;
  };
  out << pad("label", width) << "  " << pad("sim", 10) << pad("real", 10)
      << pad("difference", 12) << "percent error\n";
  for (const ReportRow& row : report.rows) {
    out << pad(row.label, width) << "  " << pad(fixed(row.sim, 3), 10)
        << pad(fixed(row.real, 3), 10) << pad(fixed(row.difference, 3), 12);
    if (row.percent_defined)
      out << fixed(row.percent, 2) << "%";
    else
      out << "undefined";
    out << "\n";
  }
  return out.str();
}

std::string render_csv(const ComparisonReport& report) {
  std::ostringstream out;
  out << "label,sim,real,difference,percent_error\n";
  for (const ReportRow& row : report.rows) {
    out << row.label << "," << fixed(row.sim, 9) << "," << fixed(row.real, 9) << ","
        << fixed(row.difference, 9) << ",";
    if (row.percent_defined) out << fixed(row.percent, 2);
    out << "\n";
  }
  return out.str();
}

}  // namespace cablesim
