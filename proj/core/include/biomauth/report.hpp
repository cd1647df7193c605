#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "biomauth/experiment.hpp"

namespace biomauth {

enum class Metric : std::uint8_t { kAccuracy, kPrecision, kRecall, kF1, kEer };

inline constexpr std::array<Metric, 5> kAllMetrics = {Metric::kAccuracy, Metric::kPrecision, Metric::kRecall,
                                                      Metric::kF1, Metric::kEer};

std::string_view metric_name(Metric metric);
double metric_value(const MetricReport& report, Metric metric);

/// One decimal place: 0.863 -> "86.3%".
std::string format_percent(double fraction);

/// Pixel height of a bar at value 1.0; a bar's height attribute is value * kBarScale.
inline constexpr double kBarScale = 400.0;

/// Writes one grouped-bar SVG per metric and population (bars grouped by
/// mask, coloured by classifier) plus a CSV sidecar holding exactly the
/// plotted numbers. Returns the paths written. Throws DataError when the
/// directory cannot be created or written.
std::vector<std::filesystem::path> emit_plots(const AggregateReport& report, std::size_t sample_size,
                                              const std::filesystem::path& out_dir);

}  // namespace biomauth
