#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <initializer_list>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "biomauth/data.hpp"

namespace biomauth {

enum class FeatureGroup : std::uint8_t { kTouch = 0, kAcc = 1, kGyro = 2, kMag = 3 };

inline constexpr std::array<FeatureGroup, 4> kAllGroups = {
    FeatureGroup::kTouch, FeatureGroup::kAcc, FeatureGroup::kGyro, FeatureGroup::kMag};

std::string_view group_name(FeatureGroup group);

/// First fused column and width of a group.
struct ColumnRange {
  std::size_t first;
  std::size_t count;
};
ColumnRange group_columns(FeatureGroup group);

/// Non-empty subset of feature groups. Projection keeps canonical column
/// order regardless of how the mask was spelled.
class FeatureMask {
 public:
  /// Throws ConfigError when `groups` is empty.
  FeatureMask(std::initializer_list<FeatureGroup> groups);
  static FeatureMask from_bits(std::uint8_t bits);
  static FeatureMask full() { return from_bits(0b1111); }

  /// Parses "touch+acc", "mag", or "all" (case-insensitive).
  static FeatureMask parse(std::string_view text);

  bool contains(FeatureGroup group) const {
    return (bits_ >> static_cast<unsigned>(group)) & 1U;
  }
  std::uint8_t bits() const { return bits_; }
  std::size_t dimension() const;

  /// Canonical name, groups joined with '+' in Touch, Acc, Gyro, Mag order.
  std::string name() const;

  /// Fused column indices selected by this mask, ascending.
  std::vector<std::size_t> columns() const;

  friend bool operator==(FeatureMask, FeatureMask) = default;

 private:
  explicit FeatureMask(std::uint8_t bits) : bits_(bits) {}
  std::uint8_t bits_;
};

/// All 15 masks: the four singletons, six pairs, four triples, then the full set.
std::vector<FeatureMask> enumerate_masks();

/// Position of `mask` in enumerate_masks().
std::size_t mask_ordinal(FeatureMask mask);

std::vector<double> project(const FusedSample& sample, FeatureMask mask);

/// Percentages of genuine samples assigned to training and testing.
struct SplitRatio {
  int train = 80;
  int test = 20;

  /// Parses "80/20". Both parts must be positive.
  static SplitRatio parse(std::string_view text);
  std::string str() const;
  friend bool operator==(SplitRatio, SplitRatio) = default;
};

struct SplitEntry {
  std::size_t sample_index;  // position in Dataset::samples()
  UserId source_user;
  int label;  // 1 genuine, 0 impostor

  friend bool operator==(const SplitEntry&, const SplitEntry&) = default;
};

/// Train/test partition for authenticating one target user.
struct UserSplit {
  UserId target_user = 0;
  std::vector<SplitEntry> train;
  std::vector<SplitEntry> test;

  friend bool operator==(const UserSplit&, const UserSplit&) = default;
};

/// Genuine samples are shuffled and cut by `ratio`; impostor training
/// samples come from a round-robin pass over the shuffled other users, one
/// unused sample per visit, until as many impostors as genuine training
/// samples are drawn (never fewer than one per other user). Every other
/// user also contributes exactly one unused sample to the test set.
UserSplit build_user_split(const Dataset& dataset, UserId target_user, std::uint64_t rng_seed,
                           SplitRatio ratio = {});

/// Rows of projected features, labels as 0/1, and source users.
struct SplitMatrix {
  Eigen::MatrixXd features;
  std::vector<int> labels;
  std::vector<UserId> sources;
};
SplitMatrix materialize(const Dataset& dataset, std::span<const SplitEntry> entries,
                        FeatureMask mask);

/// Audit dump: target_user,set,sample_index,source_user,label.
void write_split_csv_header(std::ostream& out);
void write_split_csv_rows(std::ostream& out, const UserSplit& split);

/// Per-feature min-max scaling fit on training rows only.
struct ScalerParams {
  Eigen::VectorXd min;
  Eigen::VectorXd max;

  std::size_t dimension() const { return static_cast<std::size_t>(min.size()); }
};

inline constexpr double kScaledLow = -0.5;
inline constexpr double kScaledHigh = 1.5;

/// Rows are samples. Requires at least one row.
ScalerParams fit_scaler(const Eigen::MatrixXd& train);

/// Constant features map to 0; out-of-range values are clamped to [-0.5, 1.5].
Eigen::VectorXd apply_scaler(const ScalerParams& params, const Eigen::Ref<const Eigen::VectorXd>& x);
Eigen::MatrixXd apply_scaler_rows(const ScalerParams& params, const Eigen::MatrixXd& rows);

}  // namespace biomauth
