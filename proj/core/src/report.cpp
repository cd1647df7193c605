#include "biomauth/report.hpp"

#include <cmath>
#include <fstream>
#include <map>

#include <fmt/format.h>

#include "biomauth/errors.hpp"
#include "csv.hpp"

namespace biomauth {

std::string_view metric_name(Metric metric) {
  switch (metric) {
    case Metric::kAccuracy: return "accuracy";
    case Metric::kPrecision: return "precision";
    case Metric::kRecall: return "recall";
    case Metric::kF1: return "f1";
    case Metric::kEer: return "eer";
  }
  return "?";
}

double metric_value(const MetricReport& report, Metric metric) {
  switch (metric) {
    case Metric::kAccuracy: return report.accuracy;
    case Metric::kPrecision: return report.precision;
    case Metric::kRecall: return report.recall;
    case Metric::kF1: return report.f1;
    case Metric::kEer: return report.eer;
  }
  return 0.0;
}

std::string format_percent(double fraction) { return fmt::format("{:.1f}%", fraction * 100.0); }

namespace {

constexpr double kBarWidth = 14.0;
constexpr double kGroupGap = 18.0;
constexpr double kLeft = 60.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 110.0;

std::string_view kind_colour(ClassifierKind kind) {
  switch (kind) {
    case ClassifierKind::kRF: return "#1b9e77";
    case ClassifierKind::kSVM: return "#d95f02";
    case ClassifierKind::kKNN: return "#7570b3";
    case ClassifierKind::kNB: return "#e7298a";
    case ClassifierKind::kLR: return "#66a61e";
    case ClassifierKind::kMLP: return "#e6ab02";
    case ClassifierKind::kLSTM: return "#a6761d";
  }
  return "#999999";
}

struct Bar {
  FeatureMask mask;
  ClassifierKind kind;
  double value;
};

void write_chart(std::ostream& svg, std::string_view title, const std::vector<Bar>& bars) {
  std::vector<FeatureMask> masks;
  std::vector<ClassifierKind> kinds;
  for (const auto& b : bars) {
    if (std::find(masks.begin(), masks.end(), b.mask) == masks.end()) masks.push_back(b.mask);
    if (std::find(kinds.begin(), kinds.end(), b.kind) == kinds.end()) kinds.push_back(b.kind);
  }
  std::sort(kinds.begin(), kinds.end());

  const double group_width = static_cast<double>(kinds.size()) * kBarWidth;
  const double width = kLeft + static_cast<double>(masks.size()) * (group_width + kGroupGap) + 120.0;
  const double height = kTop + kBarScale + kBottom;
  const double baseline = kTop + kBarScale;

  svg << fmt::format(R"svg(<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" viewBox="0 0 {} {}">)svg",
                     width, height, width, height)
      << '\n';
  svg << fmt::format(R"svg(<text x="{}" y="20" font-family="sans-serif" font-size="14">{}</text>)svg", kLeft, title)
      << '\n';
  for (int tick = 0; tick <= 10; ++tick) {
    const double y = baseline - kBarScale * tick / 10.0;
    svg << fmt::format(R"svg(<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="#ddd"/>)svg", kLeft, y, width - 120.0, y)
        << fmt::format(R"svg(<text x="{}" y="{}" font-family="sans-serif" font-size="9" text-anchor="end">{}%</text>)svg",
                       kLeft - 4, y + 3, tick * 10)
        << '\n';
  }

  for (const auto& b : bars) {
    const auto g = static_cast<double>(std::find(masks.begin(), masks.end(), b.mask) - masks.begin());
    const auto k = static_cast<double>(std::find(kinds.begin(), kinds.end(), b.kind) - kinds.begin());
    const double x = kLeft + g * (group_width + kGroupGap) + k * kBarWidth;
    const double h = b.value * kBarScale;
    svg << fmt::format(
               R"svg(<rect class="bar" data-mask="{}" data-kind="{}" data-value="{}" x="{}" y="{}" width="{}" height="{}" fill="{}"/>)svg",
               b.mask.name(), kind_name(b.kind), detail::format_double(b.value), x, baseline - h, kBarWidth - 1.0,
               detail::format_double(h), kind_colour(b.kind))
        << '\n';
    svg << fmt::format(
               R"svg(<text class="label" x="{}" y="{}" font-family="sans-serif" font-size="7" transform="rotate(-90 {} {})">{}</text>)svg",
               x + 9.0, baseline - h - 3.0, x + 9.0, baseline - h - 3.0, format_percent(b.value))
        << '\n';
  }
  for (std::size_t g = 0; g < masks.size(); ++g) {
    const double cx = kLeft + static_cast<double>(g) * (group_width + kGroupGap) + group_width / 2.0;
    svg << fmt::format(
               R"svg(<text x="{}" y="{}" font-family="sans-serif" font-size="10" text-anchor="end" transform="rotate(-40 {} {})">{}</text>)svg",
               cx, baseline + 14.0, cx, baseline + 14.0, masks[g].name())
        << '\n';
  }
  for (std::size_t k = 0; k < kinds.size(); ++k) {
    const double y = kTop + 16.0 * static_cast<double>(k);
    svg << fmt::format(R"svg(<rect x="{}" y="{}" width="10" height="10" fill="{}"/>)svg", width - 110.0, y,
                       kind_colour(kinds[k]))
        << fmt::format(R"svg(<text x="{}" y="{}" font-family="sans-serif" font-size="11">{}</text>)svg", width - 95.0,
                       y + 9.0, kind_name(kinds[k]))
        << '\n';
  }
  svg << "</svg>\n";
}

}  // namespace

std::vector<std::filesystem::path> emit_plots(const AggregateReport& report, std::size_t sample_size,
                                              const std::filesystem::path& out_dir) {
  if (report.rows.empty()) throw DataError("no aggregate rows to plot");
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw DataError(fmt::format("cannot create '{}': {}", out_dir.string(), ec.message()));

  std::vector<std::filesystem::path> written;
  for (auto population : {Population::kAll, Population::kSample}) {
    std::vector<const AggregateRow*> rows;
    for (const auto& r : report.rows) {
      if (r.population == population) rows.push_back(&r);
    }
    if (rows.empty()) continue;
    const auto pop = population_name(population, sample_size);
    for (auto metric : kAllMetrics) {
      std::vector<Bar> bars;
      for (const auto* r : rows) bars.push_back({r->mask, r->kind, metric_value(r->mean, metric)});

      const auto stem = fmt::format("{}_{}", metric_name(metric), pop);
      const auto svg_path = out_dir / (stem + ".svg");
      const auto csv_path = out_dir / (stem + ".csv");
      std::ofstream svg(svg_path);
      std::ofstream csv(csv_path);
      if (!svg || !csv) throw DataError(fmt::format("cannot write plots into '{}'", out_dir.string()));

      const auto title = fmt::format("Average {} ({} users)", metric_name(metric),
                                     population == Population::kAll ? "all" : std::to_string(sample_size));
      write_chart(svg, title, bars);
      csv << "mask,kind,value,label\n";
      for (const auto& b : bars) {
        csv << b.mask.name() << ',' << kind_name(b.kind) << ',' << detail::format_double(b.value) << ','
            << format_percent(b.value) << '\n';
      }
      written.push_back(svg_path);
      written.push_back(csv_path);
    }
  }
  return written;
}

}  // namespace biomauth
