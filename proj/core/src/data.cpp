#include "biomauth/data.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <random>
#include <unordered_map>

#include <fmt/format.h>

#include "biomauth/errors.hpp"
#include "csv.hpp"

namespace biomauth {

std::string_view feature_name(std::size_t index) {
  if (index < kTouchFeatureCount) return kTouchColumns[index];
  if (index < kFeatureCount) return kSensorColumns[index - kTouchFeatureCount];
  throw std::out_of_range(fmt::format("feature index {} out of range", index));
}

void validate(const TouchStrokeRecord& record) {
  for (std::size_t i = 0; i < kTouchFeatureCount; ++i) {
    if (!std::isfinite(record.values[i])) {
      throw ValidationError(fmt::format("user {}: {} is not finite", record.user_id,
                                        kTouchColumns[i]));
    }
  }
  if (record.direct_end_to_end_distance() > record.length_of_trajectory()) {
    throw ValidationError(fmt::format(
        "user {}: direct_end_to_end_distance {} exceeds length_of_trajectory {}",
        record.user_id, record.direct_end_to_end_distance(), record.length_of_trajectory()));
  }
}

void validate(const SensorRecord& record) {
  for (std::size_t i = 0; i < kSensorFeatureCount; ++i) {
    if (!std::isfinite(record.values[i])) {
      throw ValidationError(fmt::format("user {}: {} is not finite", record.user_id,
                                        kSensorColumns[i]));
    }
  }
}

Dataset::Dataset(std::vector<FusedSample> samples) : samples_(std::move(samples)) {
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    for (double v : samples_[i].features) {
      if (!std::isfinite(v)) {
        throw ValidationError(fmt::format("sample {} of user {} has a non-finite feature", i,
                                          samples_[i].user_id));
      }
    }
    index_[samples_[i].user_id].push_back(i);
  }
}

std::vector<UserId> Dataset::users() const {
  std::vector<UserId> out;
  out.reserve(index_.size());
  for (const auto& [user, positions] : index_) out.push_back(user);
  return out;
}

std::span<const std::size_t> Dataset::positions(UserId user) const {
  const auto it = index_.find(user);
  if (it == index_.end()) return {};
  return it->second;
}

std::uint64_t Dataset::content_hash() const {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  const auto mix = [&hash](std::uint64_t word) {
    for (int byte = 0; byte < 8; ++byte) {
      hash ^= (word >> (8 * byte)) & 0xffU;
      hash *= 0x100000001b3ULL;
    }
  };
  for (const auto& s : samples_) {
    mix(static_cast<std::uint64_t>(s.user_id));
    for (double v : s.features) mix(std::bit_cast<std::uint64_t>(v));
  }
  return hash;
}

namespace {

template <std::size_t N>
struct ParsedRow {
  UserId user_id;
  std::array<double, N> values;
};

template <std::size_t N>
std::vector<ParsedRow<N>> parse_schema(std::istream& in, std::string_view source,
                                       const std::array<std::string_view, N>& columns,
                                       const WarningSink& warn) {
  std::string line;
  if (!std::getline(in, line)) {
    throw SchemaError(fmt::format("{}: missing header row", source), std::string(kUserIdColumn));
  }
  const auto header = detail::split_csv_line(line);
  std::unordered_map<std::string, std::size_t> position;
  for (std::size_t i = 0; i < header.size(); ++i) {
    position.emplace(std::string(detail::trim(header[i])), i);
  }

  const auto require = [&](std::string_view name) {
    const auto it = position.find(std::string(name));
    if (it == position.end()) {
      throw SchemaError(fmt::format("{}: missing required column '{}'", source, name),
                        std::string(name));
    }
    return it->second;
  };
  const std::size_t user_col = require(kUserIdColumn);
  std::array<std::size_t, N> value_cols{};
  for (std::size_t j = 0; j < N; ++j) value_cols[j] = require(columns[j]);

  for (const auto& [name, index] : position) {
    const bool known = name == kUserIdColumn ||
                       std::find(columns.begin(), columns.end(), name) != columns.end();
    if (!known) {
      detail::emit_warning(warn, fmt::format("{}: ignoring unknown column '{}'", source, name));
    }
  }

  std::vector<ParsedRow<N>> rows;
  std::size_t row_number = 0;
  while (std::getline(in, line)) {
    if (detail::trim(line).empty()) continue;
    ++row_number;
    const auto cells = detail::split_csv_line(line);
    const auto cell = [&](std::size_t col, std::string_view name) -> std::string_view {
      if (col >= cells.size()) {
        throw ParseError(fmt::format("{}: row {}: missing value for '{}'", source, row_number, name),
                         row_number, std::string(name));
      }
      return cells[col];
    };

    ParsedRow<N> row{};
    const auto user = detail::parse_integer(cell(user_col, kUserIdColumn));
    if (!user) {
      throw ParseError(fmt::format("{}: row {}: '{}' is not an integer user id", source,
                                   row_number, kUserIdColumn),
                       row_number, std::string(kUserIdColumn));
    }
    row.user_id = *user;
    for (std::size_t j = 0; j < N; ++j) {
      const auto text = cell(value_cols[j], columns[j]);
      const auto value = detail::parse_double(text);
      if (!value) {
        throw ParseError(fmt::format("{}: row {}: column '{}' value '{}' is not numeric", source,
                                     row_number, columns[j], detail::trim(text)),
                         row_number, std::string(columns[j]));
      }
      row.values[j] = *value;
    }
    rows.push_back(row);
  }
  return rows;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError(fmt::format("cannot open '{}'", path.string()));
  return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError(fmt::format("cannot write '{}'", path.string()));
  return out;
}

template <std::size_t N>
void write_schema(std::ostream& out, const std::array<std::string_view, N>& columns,
                  const auto& records) {
  out << kUserIdColumn;
  for (auto name : columns) out << ',' << name;
  out << '\n';
  for (const auto& r : records) {
    out << r.user_id;
    for (double v : r.values) out << ',' << detail::format_double(v);
    out << '\n';
  }
}

}  // namespace

std::vector<TouchStrokeRecord> parse_touch_csv(std::istream& in, std::string_view source,
                                               const WarningSink& warn) {
  const auto rows = parse_schema(in, source, kTouchColumns, warn);
  std::vector<TouchStrokeRecord> records;
  records.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    TouchStrokeRecord r{rows[i].user_id, rows[i].values};
    try {
      validate(r);
    } catch (const ValidationError& e) {
      throw ValidationError(fmt::format("{}: row {}: {}", source, i + 1, e.what()));
    }
    records.push_back(r);
  }
  return records;
}

std::vector<SensorRecord> parse_sensor_csv(std::istream& in, std::string_view source,
                                           const WarningSink& warn) {
  const auto rows = parse_schema(in, source, kSensorColumns, warn);
  std::vector<SensorRecord> records;
  records.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    SensorRecord r{rows[i].user_id, rows[i].values};
    try {
      validate(r);
    } catch (const ValidationError& e) {
      throw ValidationError(fmt::format("{}: row {}: {}", source, i + 1, e.what()));
    }
    records.push_back(r);
  }
  return records;
}

std::vector<TouchStrokeRecord> parse_touch_csv(const std::filesystem::path& path,
                                               const WarningSink& warn) {
  auto in = open_input(path);
  return parse_touch_csv(in, path.string(), warn);
}

std::vector<SensorRecord> parse_sensor_csv(const std::filesystem::path& path,
                                           const WarningSink& warn) {
  auto in = open_input(path);
  return parse_sensor_csv(in, path.string(), warn);
}

void write_touch_csv(std::ostream& out, std::span<const TouchStrokeRecord> records) {
  write_schema(out, kTouchColumns, records);
}

void write_sensor_csv(std::ostream& out, std::span<const SensorRecord> records) {
  write_schema(out, kSensorColumns, records);
}

void write_touch_csv(const std::filesystem::path& path,
                     std::span<const TouchStrokeRecord> records) {
  auto out = open_output(path);
  write_touch_csv(out, records);
}

void write_sensor_csv(const std::filesystem::path& path, std::span<const SensorRecord> records) {
  auto out = open_output(path);
  write_sensor_csv(out, records);
}

std::vector<TouchStrokeRecord> touch_records(const Dataset& dataset) {
  std::vector<TouchStrokeRecord> out;
  out.reserve(dataset.size());
  for (const auto& s : dataset.samples()) {
    TouchStrokeRecord r{s.user_id, {}};
    std::copy_n(s.features.begin(), kTouchFeatureCount, r.values.begin());
    out.push_back(r);
  }
  return out;
}

std::vector<SensorRecord> sensor_records(const Dataset& dataset) {
  std::vector<SensorRecord> out;
  out.reserve(dataset.size());
  for (const auto& s : dataset.samples()) {
    SensorRecord r{s.user_id, {}};
    std::copy_n(s.features.begin() + kTouchFeatureCount, kSensorFeatureCount, r.values.begin());
    out.push_back(r);
  }
  return out;
}

void write_fused_csv(const std::filesystem::path& path, const Dataset& dataset) {
  auto out = open_output(path);
  out << kUserIdColumn;
  for (std::size_t j = 0; j < kFeatureCount; ++j) out << ',' << feature_name(j);
  out << '\n';
  for (const auto& s : dataset.samples()) {
    out << s.user_id;
    for (double v : s.features) out << ',' << detail::format_double(v);
    out << '\n';
  }
}

Dataset fuse(std::span<const TouchStrokeRecord> touch, std::span<const SensorRecord> sensors,
             std::size_t samples_per_user, const WarningSink& warn) {
  if (samples_per_user == 0) throw ConfigError("samples_per_user must be at least 1");

  std::map<UserId, std::vector<const TouchStrokeRecord*>> touch_by_user;
  std::map<UserId, std::vector<const SensorRecord*>> sensor_by_user;
  for (const auto& r : touch) touch_by_user[r.user_id].push_back(&r);
  for (const auto& r : sensors) sensor_by_user[r.user_id].push_back(&r);

  std::map<UserId, bool> all_users;
  for (const auto& [u, rows] : touch_by_user) all_users[u] = true;
  for (const auto& [u, rows] : sensor_by_user) all_users[u] = true;

  std::vector<FusedSample> samples;
  std::size_t retained = 0;
  for (const auto& [user, unused] : all_users) {
    const auto t = touch_by_user.find(user);
    const auto s = sensor_by_user.find(user);
    const std::size_t n_touch = t == touch_by_user.end() ? 0 : t->second.size();
    const std::size_t n_sensor = s == sensor_by_user.end() ? 0 : s->second.size();
    if (n_touch < samples_per_user || n_sensor < samples_per_user) {
      detail::emit_warning(warn, fmt::format("dropping user {}: {} touch rows, {} sensor rows, "
                                             "{} required",
                                             user, n_touch, n_sensor, samples_per_user));
      continue;
    }
    ++retained;
    for (std::size_t i = 0; i < samples_per_user; ++i) {
      FusedSample fused{user, {}};
      std::copy(t->second[i]->values.begin(), t->second[i]->values.end(), fused.features.begin());
      std::copy(s->second[i]->values.begin(), s->second[i]->values.end(),
                fused.features.begin() + kTouchFeatureCount);
      samples.push_back(fused);
    }
  }
  if (retained < 2) {
    throw InsufficientDataError(
        fmt::format("fusion retained {} user(s); at least 2 are required", retained));
  }
  return Dataset(std::move(samples));
}

Dataset generate_synthetic(const SyntheticSpec& spec) {
  if (spec.n_users < 2) throw ConfigError("synthetic dataset needs at least 2 users");
  if (spec.samples_per_user < 2) throw ConfigError("synthetic dataset needs at least 2 samples per user");
  if (!(spec.separation >= 0.0) || !std::isfinite(spec.separation)) {
    throw ConfigError("separation must be finite and non-negative");
  }

  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> standard(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> code(0, kStrokeDirectionCodes.size() - 1);

  std::vector<FusedSample> samples;
  samples.reserve(spec.n_users * spec.samples_per_user);
  for (std::size_t u = 0; u < spec.n_users; ++u) {
    const auto user = static_cast<UserId>(u + 1);
    std::array<double, kFeatureCount> mean{};
    for (double& m : mean) m = spec.separation * standard(rng);
    for (std::size_t i = 0; i < spec.samples_per_user; ++i) {
      FusedSample s{user, {}};
      for (std::size_t j = 0; j < kFeatureCount; ++j) s.features[j] = mean[j] + standard(rng);
      s.features[touch::kUpDownLeftRight] = kStrokeDirectionCodes[code(rng)];
      auto& path = s.features[touch::kLengthOfTrajectory];
      path = std::max(path, s.features[touch::kDirectEndToEndDistance]);
      samples.push_back(s);
    }
  }
  return Dataset(std::move(samples));
}

}  // namespace biomauth
