#include <gtest/gtest.h>

#include <fstream>
#include <regex>
#include <sstream>

#include "../temp_dir.hpp"
#include "biomauth/errors.hpp"
#include "biomauth/report.hpp"

using namespace biomauth;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

AggregateReport full_report() {
  AggregateReport report;
  double v = 0.0;
  for (auto mask : enumerate_masks()) {
    for (auto kind : kAllKinds) {
      AggregateRow row;
      row.mask = mask;
      row.kind = kind;
      row.mean.accuracy = v;
      row.mean.eer = 1.0 - v;
      row.cells = 51;
      report.rows.push_back(row);
      v += 1.0 / 128.0;
    }
  }
  return report;
}

struct Bar {
  std::string mask;
  std::string kind;
  std::string value;
  double height;
};

std::vector<Bar> bars(const std::string& svg) {
  static const std::regex re(
      R"re(<rect class="bar" data-mask="([^"]+)" data-kind="([^"]+)" data-value="([^"]+)"[^>]* height="([^"]+)")re");
  std::vector<Bar> out;
  for (auto it = std::sregex_iterator(svg.begin(), svg.end(), re); it != std::sregex_iterator(); ++it) {
    out.push_back({(*it)[1], (*it)[2], (*it)[3], std::stod((*it)[4])});
  }
  return out;
}

}  // namespace

TEST(Report, FormatPercent) {
  EXPECT_EQ(format_percent(0.863), "86.3%");
  EXPECT_EQ(format_percent(1.0), "100.0%");
  EXPECT_EQ(format_percent(0.0), "0.0%");
  EXPECT_EQ(format_percent(0.0004), "0.0%");
}

TEST(Report, MetricNamesAndValues) {
  MetricReport m{0.1, 0.2, 0.3, 0.4, 0.5};
  const std::vector<std::string> names = {"accuracy", "precision", "recall", "f1", "eer"};
  for (std::size_t i = 0; i < kAllMetrics.size(); ++i) {
    EXPECT_EQ(metric_name(kAllMetrics[i]), names[i]);
    EXPECT_DOUBLE_EQ(metric_value(m, kAllMetrics[i]), 0.1 * static_cast<double>(i + 1));
  }
}

TEST(Report, SingleBarHeightMatchesValue) {
  TempDir dir;
  AggregateReport report;
  AggregateRow row;
  row.mask = FeatureMask::full();
  row.kind = ClassifierKind::kRF;
  row.mean.accuracy = 0.863;
  row.cells = 51;
  report.rows.push_back(row);
  const auto files = emit_plots(report, 10, dir.path());
  EXPECT_EQ(files.size(), 10u);  // 5 metrics x (svg + csv), population "all" only
  const auto svg = slurp(dir / "accuracy_all.svg");
  const auto b = bars(svg);
  ASSERT_EQ(b.size(), 1u);
  EXPECT_EQ(b[0].height, 0.863 * kBarScale);
  EXPECT_EQ(b[0].mask, "touch+acc+gyro+mag");
  EXPECT_EQ(b[0].kind, "RF");
  EXPECT_NE(svg.find("86.3%"), std::string::npos);
  EXPECT_FALSE(std::filesystem::exists(dir / "accuracy_sample10.svg"));
}

TEST(Report, FullGridPlotsEveryBarAndSidecarAgrees) {
  TempDir dir;
  auto report = full_report();
  const auto sample_rows = report.rows;
  for (auto row : sample_rows) {
    row.population = Population::kSample;
    row.cells = 10;
    report.rows.push_back(row);
  }
  const auto files = emit_plots(report, 10, dir.path());
  EXPECT_EQ(files.size(), 20u);
  for (const std::string pop : {"all", "sample10"}) {
    for (auto metric : kAllMetrics) {
      const auto stem = std::string(metric_name(metric)) + "_" + pop;
      const auto svg = slurp(dir / (stem + ".svg"));
      const auto b = bars(svg);
      ASSERT_EQ(b.size(), 105u) << stem;

      std::istringstream csv(slurp(dir / (stem + ".csv")));
      std::string line;
      std::getline(csv, line);
      EXPECT_EQ(line, "mask,kind,value,label");
      std::size_t i = 0;
      while (std::getline(csv, line)) {
        ASSERT_LT(i, b.size());
        std::vector<std::string> parts;
        std::stringstream fields(line);
        for (std::string f; std::getline(fields, f, ',');) parts.push_back(f);
        ASSERT_EQ(parts.size(), 4u);
        EXPECT_EQ(parts[0], b[i].mask);
        EXPECT_EQ(parts[1], b[i].kind);
        EXPECT_EQ(parts[2], b[i].value);
        EXPECT_EQ(b[i].height, std::stod(parts[2]) * kBarScale);
        EXPECT_EQ(parts[3], format_percent(std::stod(parts[2])));
        ++i;
      }
      EXPECT_EQ(i, 105u);
    }
  }
}

TEST(Report, EmptyReportIsAnError) {
  TempDir dir;
  EXPECT_THROW(emit_plots(AggregateReport{}, 10, dir.path()), DataError);
}

TEST(Report, UnwritableDirectoryIsAnError) {
  TempDir dir;
  std::ofstream(dir / "blocker") << "x";
  EXPECT_THROW(emit_plots(full_report(), 10, dir / "blocker" / "plots"), DataError);
}
