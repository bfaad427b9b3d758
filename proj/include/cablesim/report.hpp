#pragma once

#include <string>
#include <vector>

namespace cablesim {

/// Rounds half away from zero at the given number of decimals.
double round_half_away(double value, int decimals);

/// |sim - real| / |real| * 100. Throws std::domain_error when real is zero.
double percent_error(double sim, double real);

struct ReportRow {
  std::string label;
  double sim = 0.0;
  double real = 0.0;
  double difference = 0.0;       // sim - real
  double percent = 0.0;          // percent error, meaningful when defined
  bool percent_defined = true;   // false when real is zero
};

struct ReportMeta {
  std::string experiment;
  int fixed_link = -1;        // -1 when not applicable
  double tip_mass_kg = 0.0;
};

struct ComparisonReport {
  std::vector<ReportRow> rows;
  ReportMeta meta;

  double max_percent_error() const;
};

/// Per-row difference and percent error of equal-length sim/real columns.
/// Rows with real = 0 are kept with the percent flagged undefined.
ComparisonReport build_report(const std::vector<double>& sim,
                              const std::vector<double>& real,
                              const std::vector<std::string>& labels,
                              const ReportMeta& meta = {});

/// Aligned text table: differences at 3 decimals, percent errors at 2.
std::string render_text(const ComparisonReport& report);

/// CSV: label,sim,real,difference,percent_error (undefined percent empty).
std::string render_csv(const ComparisonReport& report);

}  // namespace cablesim
