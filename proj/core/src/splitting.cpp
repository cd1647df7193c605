#include "biomauth/splitting.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <charconv>
#include <ostream>
#include <random>

#include <fmt/format.h>

#include "biomauth/errors.hpp"

namespace biomauth {

std::string_view group_name(FeatureGroup group) {
  switch (group) {
    case FeatureGroup::kTouch: return "touch";
    case FeatureGroup::kAcc: return "acc";
    case FeatureGroup::kGyro: return "gyro";
    case FeatureGroup::kMag: return "mag";
  }
  return "?";
}

ColumnRange group_columns(FeatureGroup group) {
  switch (group) {
    case FeatureGroup::kTouch: return {0, kTouchFeatureCount};
    case FeatureGroup::kAcc: return {kTouchFeatureCount, 3};
    case FeatureGroup::kGyro: return {kTouchFeatureCount + 3, 3};
    case FeatureGroup::kMag: return {kTouchFeatureCount + 6, 3};
  }
  return {0, 0};
}

FeatureMask::FeatureMask(std::initializer_list<FeatureGroup> groups) : bits_(0) {
  for (auto g : groups) bits_ |= static_cast<std::uint8_t>(1U << static_cast<unsigned>(g));
  if (bits_ == 0) throw ConfigError("feature mask must select at least one group");
}

FeatureMask FeatureMask::from_bits(std::uint8_t bits) {
  if (bits == 0 || bits > 0b1111) {
    throw ConfigError(fmt::format("invalid feature mask bits {}", bits));
  }
  return FeatureMask(bits);
}

FeatureMask FeatureMask::parse(std::string_view text) {
  std::string lowered;
  for (char c : text) {
    if (!std::isspace(static_cast<unsigned char>(c))) {
      lowered.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
  }
  if (lowered == "all" || lowered == "full") return full();
  std::uint8_t bits = 0;
  std::string_view rest = lowered;
  while (!rest.empty()) {
    const auto plus = rest.find('+');
    const auto token = rest.substr(0, plus);
    bool matched = false;
    for (auto g : kAllGroups) {
      if (token == group_name(g)) {
        bits |= static_cast<std::uint8_t>(1U << static_cast<unsigned>(g));
        matched = true;
      }
    }
    if (!matched) throw ConfigError(fmt::format("unknown feature group '{}' in mask '{}'", token, text));
    if (plus == std::string_view::npos) break;
    rest.remove_prefix(plus + 1);
  }
  if (bits == 0) throw ConfigError(fmt::format("empty feature mask '{}'", text));
  return FeatureMask(bits);
}

std::size_t FeatureMask::dimension() const {
  std::size_t d = 0;
  for (auto g : kAllGroups) {
    if (contains(g)) d += group_columns(g).count;
  }
  return d;
}

std::string FeatureMask::name() const {
  std::string out;
  for (auto g : kAllGroups) {
    if (!contains(g)) continue;
    if (!out.empty()) out += '+';
    out += group_name(g);
  }
  return out;
}

std::vector<std::size_t> FeatureMask::columns() const {
  std::vector<std::size_t> cols;
  cols.reserve(dimension());
  for (auto g : kAllGroups) {
    if (!contains(g)) continue;
    const auto range = group_columns(g);
    for (std::size_t j = 0; j < range.count; ++j) cols.push_back(range.first + j);
  }
  return cols;
}

std::vector<FeatureMask> enumerate_masks() {
  std::vector<FeatureMask> masks;
  for (int size = 1; size <= 4; ++size) {
    // Within a size, lexicographic over (Touch, Acc, Gyro, Mag) positions.
    std::vector<std::uint8_t> bucket;
    for (unsigned bits = 1; bits < 16; ++bits) {
      if (std::popcount(bits) == size) bucket.push_back(static_cast<std::uint8_t>(bits));
    }
    std::sort(bucket.begin(), bucket.end(), [](std::uint8_t a, std::uint8_t b) {
      for (unsigned g = 0; g < 4; ++g) {
        const bool in_a = (a >> g) & 1U;
        const bool in_b = (b >> g) & 1U;
        if (in_a != in_b) return in_a;
      }
      return false;
    });
    for (auto bits : bucket) masks.push_back(FeatureMask::from_bits(bits));
  }
  return masks;
}

std::size_t mask_ordinal(FeatureMask mask) {
  static const auto table = [] {
    std::array<std::size_t, 16> ordinal{};
    const auto masks = enumerate_masks();
    for (std::size_t i = 0; i < masks.size(); ++i) ordinal[masks[i].bits()] = i;
    return ordinal;
  }();
  return table[mask.bits()];
}

std::vector<double> project(const FusedSample& sample, FeatureMask mask) {
  std::vector<double> out;
  out.reserve(mask.dimension());
  for (auto col : mask.columns()) out.push_back(sample.features[col]);
  return out;
}

SplitRatio SplitRatio::parse(std::string_view text) {
  const auto slash = text.find('/');
  const auto parse_part = [&](std::string_view part) {
    int value = 0;
    const auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), value);
    if (ec != std::errc{} || ptr != part.data() + part.size() || value <= 0) {
      throw ConfigError(fmt::format("invalid split ratio '{}', expected A/B with A,B > 0", text));
    }
    return value;
  };
  if (slash == std::string_view::npos) {
    throw ConfigError(fmt::format("invalid split ratio '{}', expected A/B", text));
  }
  return {parse_part(text.substr(0, slash)), parse_part(text.substr(slash + 1))};
}

std::string SplitRatio::str() const { return fmt::format("{}/{}", train, test); }

UserSplit build_user_split(const Dataset& dataset, UserId target_user, std::uint64_t rng_seed,
                           SplitRatio ratio) {
  if (ratio.train <= 0 || ratio.test <= 0) throw ConfigError("split ratio parts must be positive");
  if (!dataset.contains(target_user)) {
    throw InsufficientDataError(fmt::format("user {} is not in the dataset", target_user));
  }
  std::mt19937_64 rng(rng_seed);

  std::vector<std::size_t> genuine(dataset.positions(target_user).begin(),
                                   dataset.positions(target_user).end());
  if (genuine.size() < 2) {
    throw InsufficientDataError(
        fmt::format("user {} has {} sample(s); at least 2 are required", target_user, genuine.size()));
  }
  std::shuffle(genuine.begin(), genuine.end(), rng);
  const std::size_t total = static_cast<std::size_t>(ratio.train + ratio.test);
  std::size_t n_train = genuine.size() * static_cast<std::size_t>(ratio.train) / total;
  n_train = std::clamp<std::size_t>(n_train, 1, genuine.size() - 1);

  std::vector<UserId> others;
  for (auto u : dataset.users()) {
    if (u != target_user) others.push_back(u);
  }
  if (others.empty()) throw InsufficientDataError("no impostor users available");
  std::shuffle(others.begin(), others.end(), rng);

  const std::size_t n_impostor_train = std::max(n_train, others.size());
  const std::size_t base = n_impostor_train / others.size();
  const std::size_t extra = n_impostor_train % others.size();

  std::vector<std::vector<std::size_t>> pools(others.size());
  for (std::size_t p = 0; p < others.size(); ++p) {
    const auto positions = dataset.positions(others[p]);
    const std::size_t needed = base + (p < extra ? 1 : 0) + 1;
    if (positions.size() < needed) {
      throw InsufficientDataError(fmt::format(
          "user {} has {} sample(s) but {} are needed for impostor draws against user {}",
          others[p], positions.size(), needed, target_user));
    }
    pools[p].assign(positions.begin(), positions.end());
    std::shuffle(pools[p].begin(), pools[p].end(), rng);
  }

  UserSplit split;
  split.target_user = target_user;
  split.train.reserve(n_train + n_impostor_train);
  split.test.reserve(genuine.size() - n_train + others.size());

  for (std::size_t i = 0; i < genuine.size(); ++i) {
    auto& dest = i < n_train ? split.train : split.test;
    dest.push_back({genuine[i], target_user, 1});
  }

  // Slot 0 of each pool is that user's test impostor.
  std::vector<std::size_t> cursor(others.size(), 1);
  for (std::size_t drawn = 0, p = 0; drawn < n_impostor_train; ++drawn, p = (p + 1) % others.size()) {
    split.train.push_back({pools[p][cursor[p]++], others[p], 0});
  }

  std::vector<std::size_t> by_user(others.size());
  for (std::size_t p = 0; p < others.size(); ++p) by_user[p] = p;
  std::sort(by_user.begin(), by_user.end(),
            [&](std::size_t a, std::size_t b) { return others[a] < others[b]; });
  for (auto p : by_user) split.test.push_back({pools[p][0], others[p], 0});
  return split;
}

SplitMatrix materialize(const Dataset& dataset, std::span<const SplitEntry> entries,
                        FeatureMask mask) {
  const auto cols = mask.columns();
  SplitMatrix out;
  out.features.resize(static_cast<Eigen::Index>(entries.size()), static_cast<Eigen::Index>(cols.size()));
  out.labels.reserve(entries.size());
  out.sources.reserve(entries.size());
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto& sample = dataset.sample(entries[i].sample_index);
    for (std::size_t j = 0; j < cols.size(); ++j) {
      out.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = sample.features[cols[j]];
    }
    out.labels.push_back(entries[i].label);
    out.sources.push_back(entries[i].source_user);
  }
  return out;
}

void write_split_csv_header(std::ostream& out) {
  out << "target_user,set,sample_index,source_user,label\n";
}

void write_split_csv_rows(std::ostream& out, const UserSplit& split) {
  for (const auto& e : split.train) {
    out << split.target_user << ",train," << e.sample_index << ',' << e.source_user << ',' << e.label << '\n';
  }
  for (const auto& e : split.test) {
    out << split.target_user << ",test," << e.sample_index << ',' << e.source_user << ',' << e.label << '\n';
  }
}

ScalerParams fit_scaler(const Eigen::MatrixXd& train) {
  if (train.rows() == 0) throw DimensionError("cannot fit a scaler on zero rows");
  return {train.colwise().minCoeff().transpose(), train.colwise().maxCoeff().transpose()};
}

Eigen::VectorXd apply_scaler(const ScalerParams& params, const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (x.size() != params.min.size()) {
    throw DimensionError(fmt::format("scaler expects {} features, got {}", params.min.size(), x.size()));
  }
  Eigen::VectorXd out(x.size());
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    const double span = params.max[j] - params.min[j];
    out[j] = span > 0.0 ? std::clamp((x[j] - params.min[j]) / span, kScaledLow, kScaledHigh) : 0.0;
  }
  return out;
}

Eigen::MatrixXd apply_scaler_rows(const ScalerParams& params, const Eigen::MatrixXd& rows) {
  Eigen::MatrixXd out(rows.rows(), rows.cols());
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    const Eigen::VectorXd row = rows.row(i).transpose();
    out.row(i) = apply_scaler(params, row).transpose();
  }
  return out;
}

}  // namespace biomauth
