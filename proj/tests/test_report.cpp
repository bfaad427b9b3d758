#include <doctest.h>

#include "cablesim/report.hpp"

using namespace cablesim;

TEST_CASE("percent error against measured values") {
  CHECK(round_half_away(percent_error(0.560, 0.565), 2) == doctest::Approx(0.88));
  CHECK(round_half_away(percent_error(1.181, 1.176), 2) == doctest::Approx(0.43));
  CHECK(percent_error(0.37, 0.37) == 0.0);
  CHECK_THROWS_AS(percent_error(1.0, 0.0), std::domain_error);
}

TEST_CASE("rounding is half away from zero") {
  CHECK(round_half_away(0.005, 2) == doctest::Approx(0.01));
  CHECK(round_half_away(-0.005, 2) == doctest::Approx(-0.01));
  CHECK(round_half_away(2.675, 2) == doctest::Approx(2.68));
  CHECK(round_half_away(1.2344, 2) == doctest::Approx(1.23));
}

TEST_CASE("report rows carry difference and percent error") {
  const std::vector<double> sim = {0.560, 0.387, 0.168, 0.098};
  const std::vector<double> real = {0.565, 0.383, 0.171, 0.100};
  const std::vector<std::string> labels = {"joint 4", "joint 3", "joint 2", "joint 1"};
  const ComparisonReport report =
      build_report(sim, real, labels, {"fixed link 5, no load", 5, 0.0});

  const std::vector<double> diffs = {-0.005, 0.004, -0.003, -0.002};
  const std::vector<double> percents = {0.88, 1.04, 1.75, 2.00};
  REQUIRE(report.rows.size() == 4);
  for (size_t i = 0; i < 4; ++i) {
    CHECK(report.rows[i].difference == doctest::Approx(diffs[i]));
    CHECK(round_half_away(report.rows[i].percent, 2) == doctest::Approx(percents[i]));
    CHECK(report.rows[i].percent_defined);
  }
  CHECK(round_half_away(report.max_percent_error(), 2) == doctest::Approx(2.00));
  CHECK(report.meta.fixed_link == 5);
}

TEST_CASE("empty and mismatched inputs") {
  const ComparisonReport empty = build_report({}, {}, {});
  CHECK(empty.rows.empty());
  CHECK(empty.max_percent_error() == 0.0);
  CHECK_THROWS_AS(build_report({1.0}, {1.0, 2.0}, {"a"}), std::invalid_argument);
}

TEST_CASE("zero measured value flags the percent cell") {
  const ComparisonReport report = build_report({0.1}, {0.0}, {"joint"});
  REQUIRE(report.rows.size() == 1);
  CHECK(!report.rows[0].percent_defined);
  CHECK(report.rows[0].difference == doctest::Approx(0.1));
  CHECK(render_text(report).find("undefined") != std::string::npos);
  CHECK(render_csv(report).find(",0.100000000,\n") != std::string::npos);
}

TEST_CASE("renders align and round to the presentation digits") {
  const ComparisonReport report =
      build_report({1.181, 1.009}, {1.176, 0.976}, {"5/5", "4/4"}, {"sagging", -1, 0.0});
  const std::string text = render_text(report);
  CHECK(text.find("sagging") != std::string::npos);
  CHECK(text.find("0.005") != std::string::npos);
  CHECK(text.find("0.43%") != std::string::npos);
  CHECK(text.find("3.38%") != std::string::npos);

  const std::string csv = render_csv(report);
  CHECK(csv.find("label,sim,real,difference,percent_error") == 0);
  CHECK(csv.find("5/5,") != std::string::npos);
  CHECK(csv.find(",0.43\n") != std::string::npos);
}
