#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace biomauth {

using UserId = std::int64_t;

/// Receives non-fatal diagnostics (dropped users, ignored columns).
/// A null sink writes to stderr.
using WarningSink = std::function<void(std::string_view)>;

inline constexpr std::size_t kTouchFeatureCount = 15;
inline constexpr std::size_t kSensorFeatureCount = 9;
inline constexpr std::size_t kFeatureCount = kTouchFeatureCount + kSensorFeatureCount;

/// Column names of the touch-stroke schema, in canonical order, excluding
/// `user_id`. Fused feature columns 0..14 follow this order.
inline constexpr std::array<std::string_view, kTouchFeatureCount> kTouchColumns = {
    "stroke_duration",
    "start_x",
    "start_y",
    "stop_x",
    "stop_y",
    "direct_end_to_end_distance",
    "mean_resultant_length",
    "up_down_left_right",
    "direction_of_end_to_end_line",
    "largest_deviation_from_end_to_end",
    "average_direction",
    "length_of_trajectory",
    "average_velocity",
    "mid_stroke_pressure",
    "mid_stroke_area_covered",
};

/// Sensor axes in canonical order; fused feature columns 15..23.
inline constexpr std::array<std::string_view, kSensorFeatureCount> kSensorColumns = {
    "acc_x", "acc_y", "acc_z", "gyro_x", "gyro_y", "gyro_z", "mag_x", "mag_y", "mag_z",
};

inline constexpr std::string_view kUserIdColumn = "user_id";

namespace touch {
inline constexpr std::size_t kDirectEndToEndDistance = 5;
inline constexpr std::size_t kUpDownLeftRight = 7;
inline constexpr std::size_t kLengthOfTrajectory = 11;
}  // namespace touch

/// Categorical codes used for `up_down_left_right`.
inline constexpr std::array<int, 4> kStrokeDirectionCodes = {1, 2, 3, 4};

/// Name of fused column `index` (0..23).
std::string_view feature_name(std::size_t index);

struct TouchStrokeRecord {
  UserId user_id = 0;
  std::array<double, kTouchFeatureCount> values{};

  double direct_end_to_end_distance() const { return values[touch::kDirectEndToEndDistance]; }
  double length_of_trajectory() const { return values[touch::kLengthOfTrajectory]; }

  friend bool operator==(const TouchStrokeRecord&, const TouchStrokeRecord&) = default;
};

struct SensorRecord {
  UserId user_id = 0;
  std::array<double, kSensorFeatureCount> values{};

  friend bool operator==(const SensorRecord&, const SensorRecord&) = default;
};

/// One authentication sample: touch features 0..14 then acc, gyro, mag triples.
struct FusedSample {
  UserId user_id = 0;
  std::array<double, kFeatureCount> features{};

  friend bool operator==(const FusedSample&, const FusedSample&) = default;
};

/// Throws ValidationError if any value is non-finite or the stroke chord
/// exceeds the trajectory length.
void validate(const TouchStrokeRecord& record);
void validate(const SensorRecord& record);

/// Immutable collection of fused samples indexed by user.
class Dataset {
 public:
  Dataset() = default;
  explicit Dataset(std::vector<FusedSample> samples);

  std::span<const FusedSample> samples() const { return samples_; }
  const FusedSample& sample(std::size_t index) const { return samples_.at(index); }
  std::size_t size() const { return samples_.size(); }

  /// Users in ascending id order.
  std::vector<UserId> users() const;
  std::size_t user_count() const { return index_.size(); }
  bool contains(UserId user) const { return index_.contains(user); }

  /// Positions in samples() belonging to `user`, in dataset order.
  std::span<const std::size_t> positions(UserId user) const;

  /// FNV-1a over user ids and the raw bits of every feature value.
  std::uint64_t content_hash() const;

  friend bool operator==(const Dataset& a, const Dataset& b) { return a.samples_ == b.samples_; }

 private:
  std::vector<FusedSample> samples_;
  std::map<UserId, std::vector<std::size_t>> index_;
};

struct SyntheticSpec {
  std::size_t n_users = 51;
  std::size_t samples_per_user = 100;
  /// Standard deviation of per-user feature means, in units of the
  /// within-user standard deviation (which is 1).
  double separation = 1.0;
  std::uint64_t seed = 0;
};

std::vector<TouchStrokeRecord> parse_touch_csv(const std::filesystem::path& path,
                                               const WarningSink& warn = {});
std::vector<SensorRecord> parse_sensor_csv(const std::filesystem::path& path,
                                           const WarningSink& warn = {});

/// Stream variants used by the file overloads; `source` names the input in messages.
std::vector<TouchStrokeRecord> parse_touch_csv(std::istream& in, std::string_view source,
                                               const WarningSink& warn = {});
std::vector<SensorRecord> parse_sensor_csv(std::istream& in, std::string_view source,
                                           const WarningSink& warn = {});

void write_touch_csv(std::ostream& out, std::span<const TouchStrokeRecord> records);
void write_sensor_csv(std::ostream& out, std::span<const SensorRecord> records);
void write_touch_csv(const std::filesystem::path& path, std::span<const TouchStrokeRecord> records);
void write_sensor_csv(const std::filesystem::path& path, std::span<const SensorRecord> records);

/// Splits a dataset back into the two source schemas.
std::vector<TouchStrokeRecord> touch_records(const Dataset& dataset);
std::vector<SensorRecord> sensor_records(const Dataset& dataset);

/// Writes the fused table: user_id followed by the 24 feature columns.
void write_fused_csv(const std::filesystem::path& path, const Dataset& dataset);

/// Pairs the i-th touch row of a user with the i-th sensor row of the same
/// user, for i < samples_per_user. Users short of rows in either input are
/// dropped with a warning; surplus rows are discarded from the tail.
Dataset fuse(std::span<const TouchStrokeRecord> touch, std::span<const SensorRecord> sensors,
             std::size_t samples_per_user = 100, const WarningSink& warn = {});

Dataset generate_synthetic(const SyntheticSpec& spec);

}  // namespace biomauth
