#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "biomauth/classifiers.hpp"
#include "biomauth/data.hpp"
#include "biomauth/metrics.hpp"
#include "biomauth/splitting.hpp"

namespace biomauth {

struct CsvSource {
  std::filesystem::path touch;
  std::filesystem::path sensors;
};

using DataSource = std::variant<SyntheticSpec, CsvSource>;

struct ExperimentConfig {
  DataSource source = SyntheticSpec{};
  /// Rows kept per user when fusing CSV inputs.
  std::size_t samples_per_user = 100;
  std::vector<FeatureMask> masks = enumerate_masks();
  std::vector<ClassifierKind> kinds{kAllKinds.begin(), kAllKinds.end()};
  HyperParams hyper;
  std::uint64_t global_seed = 42;
  std::size_t sample_size = 10;
  SplitRatio split_ratio;
  /// 0 selects the hardware concurrency. BIOMAUTH_THREADS caps either choice.
  std::size_t threads = 0;
  bool keep_going = false;

  /// Throws ConfigError for empty mask/kind lists, sample_size larger than
  /// `user_count`, or invalid hyperparameters.
  void validate(std::size_t user_count) const;
};

Dataset load_dataset(const ExperimentConfig& config, const WarningSink& warn = {});

std::size_t resolve_thread_count(std::size_t requested);

/// Stable seed derivation, independent of execution order.
std::uint64_t derive_seed(std::uint64_t global_seed, UserId user);
std::uint64_t derive_seed(std::uint64_t global_seed, UserId user, FeatureMask mask, ClassifierKind kind);

struct CellSeeds {
  std::uint64_t split;  // shared by every cell of the same user
  std::uint64_t model;
};

struct CellResult {
  UserId user_id = 0;
  FeatureMask mask = FeatureMask::full();
  ClassifierKind kind = ClassifierKind::kRF;
  MetricReport metrics;
  double duration_ms = 0.0;
};

struct FailedCell {
  UserId user_id = 0;
  FeatureMask mask = FeatureMask::full();
  ClassifierKind kind = ClassifierKind::kRF;
  std::string message;
};

/// Called with each fitted model; may run on worker threads concurrently.
using ModelSink = std::function<void(UserId, FeatureMask, ClassifierKind, const TrainedModel&)>;

/// Projects the split by `mask`, fits `kind` (user labels for multiclass
/// kinds, genuine bits for LSTM), scores every test sample, and computes
/// all five metrics. Errors are rethrown as CellError naming the cell.
CellResult run_cell(const Dataset& dataset, const UserSplit& split, FeatureMask mask, ClassifierKind kind,
                    const HyperParams& hyper, std::uint64_t model_seed, const ModelSink& on_model = {});

/// Builds the split from `seeds.split`, then runs the cell.
CellResult run_cell(const Dataset& dataset, UserId target_user, FeatureMask mask, ClassifierKind kind,
                    const HyperParams& hyper, const CellSeeds& seeds, SplitRatio ratio = {});

/// Seeded draw without replacement; returned in ascending order.
std::vector<UserId> sample_users(std::vector<UserId> users, std::size_t sample_size, std::uint64_t global_seed);

enum class Population : std::uint8_t { kAll, kSample };

struct AggregateRow {
  FeatureMask mask = FeatureMask::full();
  ClassifierKind kind = ClassifierKind::kRF;
  Population population = Population::kAll;
  MetricReport mean;  // undefined flags are never set on means
  std::size_t cells = 0;
};

struct AggregateReport {
  std::vector<AggregateRow> rows;  // ordered by mask, kind, population
  std::vector<UserId> sampled_users;

  /// Row lookup; nullptr when the combination has no cells.
  const AggregateRow* find(FeatureMask mask, ClassifierKind kind, Population population) const;
};

/// Deterministic fold over `cells` (any order): per (mask, kind), the mean
/// over every user and over `sampled_users`.
AggregateReport aggregate(std::span<const CellResult> cells, std::vector<UserId> sampled_users);

struct GridHooks {
  /// Receives each user's split before its cells run.
  std::function<void(const UserSplit&)> on_split;
  ModelSink on_model;
};

struct GridResult {
  std::vector<CellResult> cells;  // ordered by mask ordinal, kind, user
  std::vector<FailedCell> failed;
  AggregateReport aggregate;
  std::size_t threads_used = 1;
};

/// Runs every (user, mask, kind) cell. Any failure aborts with CellError
/// unless config.keep_going, in which case failed cells are listed and left
/// out of the averages.
GridResult run_grid(const Dataset& dataset, const ExperimentConfig& config, const GridHooks& hooks = {},
                    const WarningSink& warn = {});

std::string population_name(Population population, std::size_t sample_size);

/// user_id,mask,kind,accuracy,precision,recall,f1,eer,duration_ms,flags
/// With include_timing false the duration column is written as 0 so runs
/// can be compared byte for byte.
void write_results_csv(std::ostream& out, const GridResult& result, bool include_timing = true);
std::vector<CellResult> read_results_csv(std::istream& in);

/// mask,kind,population,accuracy,precision,recall,f1,eer,cells
void write_aggregate_csv(std::ostream& out, const AggregateReport& report, std::size_t sample_size);

using Manifest = std::map<std::string, std::string>;

/// key=value lines describing configuration, seed, and dataset hash.
Manifest build_manifest(const ExperimentConfig& config, const Dataset& dataset, const GridResult& result);
void write_manifest(std::ostream& out, const Manifest& manifest);
Manifest read_manifest(std::istream& in);

}  // namespace biomauth
