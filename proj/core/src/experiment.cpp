#include "biomauth/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <istream>
#include <mutex>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <thread>
#include <tuple>

#include <fmt/format.h>

#include "biomauth/errors.hpp"
#include "csv.hpp"

namespace biomauth {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

auto cell_key(const CellResult& c) {
  return std::make_tuple(mask_ordinal(c.mask), static_cast<int>(c.kind), c.user_id);
}

std::string cell_label(UserId user, FeatureMask mask, ClassifierKind kind) {
  return fmt::format("cell (user={}, mask={}, kind={})", user, mask.name(), kind_name(kind));
}

}  // namespace

void ExperimentConfig::validate(std::size_t user_count) const {
  if (masks.empty()) throw ConfigError("at least one feature mask is required");
  if (kinds.empty()) throw ConfigError("at least one classifier kind is required");
  if (sample_size > user_count) {
    throw ConfigError(fmt::format("sample size {} exceeds the {} available users", sample_size, user_count));
  }
  if (split_ratio.train <= 0 || split_ratio.test <= 0) throw ConfigError("split ratio parts must be positive");
  hyper.validate();
}

Dataset load_dataset(const ExperimentConfig& config, const WarningSink& warn) {
  if (const auto* synthetic = std::get_if<SyntheticSpec>(&config.source)) {
    return generate_synthetic(*synthetic);
  }
  const auto& csv = std::get<CsvSource>(config.source);
  const auto touch = parse_touch_csv(csv.touch, warn);
  const auto sensors = parse_sensor_csv(csv.sensors, warn);
  return fuse(touch, sensors, config.samples_per_user, warn);
}

std::size_t resolve_thread_count(std::size_t requested) {
  std::size_t n = requested > 0 ? requested : std::max(1U, std::thread::hardware_concurrency());
  if (const char* cap = std::getenv("BIOMAUTH_THREADS")) {
    const auto parsed = detail::parse_integer(cap);
    if (parsed && *parsed > 0) n = std::min(n, static_cast<std::size_t>(*parsed));
  }
  return n;
}

std::uint64_t derive_seed(std::uint64_t global_seed, UserId user) {
  return splitmix64(splitmix64(global_seed) ^ static_cast<std::uint64_t>(user));
}

std::uint64_t derive_seed(std::uint64_t global_seed, UserId user, FeatureMask mask, ClassifierKind kind) {
  std::uint64_t h = splitmix64(derive_seed(global_seed, user) ^ 0x6d61736bULL);
  h = splitmix64(h ^ mask.bits());
  return splitmix64(h ^ (static_cast<std::uint64_t>(kind) + 1));
}

CellResult run_cell(const Dataset& dataset, const UserSplit& split, FeatureMask mask, ClassifierKind kind,
                    const HyperParams& hyper, std::uint64_t model_seed, const ModelSink& on_model) {
  const auto start = std::chrono::steady_clock::now();
  const UserId user = split.target_user;
  try {
    const auto train = materialize(dataset, split.train, mask);
    const auto test = materialize(dataset, split.test, mask);

    std::vector<Label> labels;
    labels.reserve(train.labels.size());
    if (is_multiclass(kind)) {
      labels.assign(train.sources.begin(), train.sources.end());
    } else {
      labels.assign(train.labels.begin(), train.labels.end());
    }

    HyperParams cell_hyper = hyper;
    cell_hyper.seed = model_seed;
    const auto model = fit(kind, train.features, labels, cell_hyper);
    if (on_model) on_model(user, mask, kind, model);

    std::vector<ScoredPrediction> preds;
    preds.reserve(test.labels.size());
    std::vector<double> row(static_cast<std::size_t>(test.features.cols()));
    for (Eigen::Index i = 0; i < test.features.rows(); ++i) {
      for (Eigen::Index j = 0; j < test.features.cols(); ++j) row[static_cast<std::size_t>(j)] = test.features(i, j);
      auto p = predict(model, row, user);
      p.truth = test.labels[static_cast<std::size_t>(i)] == 1;
      preds.push_back(p);
    }

    CellResult result;
    result.user_id = user;
    result.mask = mask;
    result.kind = kind;
    result.metrics = evaluate_predictions(preds);
    result.duration_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return result;
  } catch (const CellError&) {
    throw;
  } catch (const std::exception& e) {
    throw CellError(fmt::format("{}: {}", cell_label(user, mask, kind), e.what()), std::current_exception());
  }
}

CellResult run_cell(const Dataset& dataset, UserId target_user, FeatureMask mask, ClassifierKind kind,
                    const HyperParams& hyper, const CellSeeds& seeds, SplitRatio ratio) {
  UserSplit split;
  try {
    split = build_user_split(dataset, target_user, seeds.split, ratio);
  } catch (const std::exception& e) {
    throw CellError(fmt::format("{}: {}", cell_label(target_user, mask, kind), e.what()),
                    std::current_exception());
  }
  return run_cell(dataset, split, mask, kind, hyper, seeds.model);
}

std::vector<UserId> sample_users(std::vector<UserId> users, std::size_t sample_size, std::uint64_t global_seed) {
  if (sample_size > users.size()) {
    throw ConfigError(fmt::format("cannot sample {} of {} users", sample_size, users.size()));
  }
  std::sort(users.begin(), users.end());
  std::mt19937_64 rng(splitmix64(global_seed ^ 0x73616d706c65ULL));
  for (std::size_t i = 0; i < sample_size; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, users.size() - 1);
    std::swap(users[i], users[pick(rng)]);
  }
  users.resize(sample_size);
  std::sort(users.begin(), users.end());
  return users;
}

const AggregateRow* AggregateReport::find(FeatureMask mask, ClassifierKind kind, Population population) const {
  for (const auto& row : rows) {
    if (row.mask == mask && row.kind == kind && row.population == population) return &row;
  }
  return nullptr;
}

AggregateReport aggregate(std::span<const CellResult> cells, std::vector<UserId> sampled_users) {
  std::sort(sampled_users.begin(), sampled_users.end());
  std::vector<const CellResult*> sorted;
  sorted.reserve(cells.size());
  for (const auto& c : cells) sorted.push_back(&c);
  std::sort(sorted.begin(), sorted.end(), [](const CellResult* a, const CellResult* b) {
    return cell_key(*a) < cell_key(*b);
  });

  AggregateReport report;
  report.sampled_users = sampled_users;

  struct Accumulator {
    double sums[5] = {0, 0, 0, 0, 0};
    double lows[5] = {1, 1, 1, 1, 1};
    double highs[5] = {0, 0, 0, 0, 0};
    std::size_t count = 0;

    void add(const MetricReport& m) {
      const double values[5] = {m.accuracy, m.precision, m.recall, m.f1, m.eer};
      for (int i = 0; i < 5; ++i) {
        sums[i] += values[i];
        lows[i] = std::min(lows[i], values[i]);
        highs[i] = std::max(highs[i], values[i]);
      }
      ++count;
    }
    // Clamped so rounding never pushes a mean outside its contributors.
    MetricReport mean() const {
      double v[5];
      for (int i = 0; i < 5; ++i) v[i] = std::clamp(sums[i] / static_cast<double>(count), lows[i], highs[i]);
      MetricReport m;
      m.accuracy = v[0];
      m.precision = v[1];
      m.recall = v[2];
      m.f1 = v[3];
      m.eer = v[4];
      return m;
    }
  };

  std::size_t i = 0;
  while (i < sorted.size()) {
    const auto mask = sorted[i]->mask;
    const auto kind = sorted[i]->kind;
    Accumulator all;
    Accumulator sample;
    for (; i < sorted.size() && sorted[i]->mask == mask && sorted[i]->kind == kind; ++i) {
      all.add(sorted[i]->metrics);
      if (std::binary_search(sampled_users.begin(), sampled_users.end(), sorted[i]->user_id)) {
        sample.add(sorted[i]->metrics);
      }
    }
    report.rows.push_back({mask, kind, Population::kAll, all.mean(), all.count});
    if (sample.count > 0) report.rows.push_back({mask, kind, Population::kSample, sample.mean(), sample.count});
  }
  return report;
}

GridResult run_grid(const Dataset& dataset, const ExperimentConfig& config, const GridHooks& hooks,
                    const WarningSink& warn) {
  const auto users = dataset.users();
  config.validate(users.size());

  std::vector<std::optional<UserSplit>> splits(users.size());
  std::vector<std::exception_ptr> split_failures(users.size());
  for (std::size_t u = 0; u < users.size(); ++u) {
    try {
      splits[u] = build_user_split(dataset, users[u], derive_seed(config.global_seed, users[u]), config.split_ratio);
    } catch (const DataError&) {
      if (!config.keep_going) throw;
      split_failures[u] = std::current_exception();
      continue;
    }
    if (hooks.on_split) hooks.on_split(*splits[u]);
  }

  std::vector<FeatureMask> masks = config.masks;
  std::sort(masks.begin(), masks.end(), [](FeatureMask a, FeatureMask b) { return mask_ordinal(a) < mask_ordinal(b); });
  masks.erase(std::unique(masks.begin(), masks.end()), masks.end());
  std::vector<ClassifierKind> kinds = config.kinds;
  std::sort(kinds.begin(), kinds.end());
  kinds.erase(std::unique(kinds.begin(), kinds.end()), kinds.end());

  struct Task {
    std::size_t user_index;
    FeatureMask mask;
    ClassifierKind kind;
  };
  std::vector<Task> tasks;
  tasks.reserve(users.size() * masks.size() * kinds.size());
  for (auto mask : masks) {
    for (auto kind : kinds) {
      for (std::size_t u = 0; u < users.size(); ++u) tasks.push_back({u, mask, kind});
    }
  }

  std::vector<std::optional<CellResult>> results(tasks.size());
  std::vector<std::exception_ptr> failures(tasks.size());
  std::vector<std::string> errors(tasks.size());
  std::atomic<std::size_t> next{0};
  std::atomic<bool> abort{false};

  const auto worker = [&] {
    for (;;) {
      if (abort.load()) return;
      const std::size_t t = next.fetch_add(1);
      if (t >= tasks.size()) return;
      const auto& task = tasks[t];
      const UserId user = users[task.user_index];
      try {
        if (split_failures[task.user_index]) {
          try {
            std::rethrow_exception(split_failures[task.user_index]);
          } catch (const std::exception& e) {
            throw CellError(fmt::format("{}: {}", cell_label(user, task.mask, task.kind), e.what()),
                            std::current_exception());
          }
        }
        results[t] = run_cell(dataset, *splits[task.user_index], task.mask, task.kind, config.hyper,
                              derive_seed(config.global_seed, user, task.mask, task.kind), hooks.on_model);
      } catch (const std::exception& e) {
        failures[t] = std::current_exception();
        errors[t] = e.what();
        if (!config.keep_going) abort.store(true);
      }
    }
  };

  GridResult out;
  out.threads_used = std::min(resolve_thread_count(config.threads), std::max<std::size_t>(tasks.size(), 1));
  {
    std::vector<std::jthread> pool;
    for (std::size_t i = 1; i < out.threads_used; ++i) pool.emplace_back(worker);
    worker();
  }

  for (std::size_t t = 0; t < tasks.size(); ++t) {
    if (failures[t]) {
      if (!config.keep_going) std::rethrow_exception(failures[t]);
      out.failed.push_back({users[tasks[t].user_index], tasks[t].mask, tasks[t].kind, errors[t]});
      detail::emit_warning(warn, fmt::format("excluding failed {}", errors[t]));
    } else if (results[t]) {
      out.cells.push_back(std::move(*results[t]));
    }
  }
  out.aggregate = aggregate(out.cells, sample_users(users, config.sample_size, config.global_seed));
  return out;
}

std::string population_name(Population population, std::size_t sample_size) {
  return population == Population::kAll ? "all" : fmt::format("sample{}", sample_size);
}

namespace {

std::string flags_of(const MetricReport& m) {
  std::string flags;
  if (m.precision_undefined) flags = "precision_undefined";
  if (m.recall_undefined) flags += flags.empty() ? "recall_undefined" : "|recall_undefined";
  return flags;
}

using detail::format_double;

}  // namespace

void write_results_csv(std::ostream& out, const GridResult& result, bool include_timing) {
  out << "user_id,mask,kind,accuracy,precision,recall,f1,eer,duration_ms,flags\n";
  for (const auto& c : result.cells) {
    const auto& m = c.metrics;
    out << c.user_id << ',' << c.mask.name() << ',' << kind_name(c.kind) << ',' << format_double(m.accuracy)
        << ',' << format_double(m.precision) << ',' << format_double(m.recall) << ',' << format_double(m.f1)
        << ',' << format_double(m.eer) << ',' << (include_timing ? fmt::format("{:.3f}", c.duration_ms) : "0")
        << ',' << flags_of(m) << '\n';
  }
  for (const auto& f : result.failed) {
    out << f.user_id << ',' << f.mask.name() << ',' << kind_name(f.kind) << ",,,,,,,failed\n";
  }
}

std::vector<CellResult> read_results_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("results file is empty");
  const auto header = detail::split_csv_line(line);
  const std::vector<std::string> expected = {"user_id", "mask", "kind", "accuracy", "precision",
                                             "recall",  "f1",   "eer",  "duration_ms", "flags"};
  std::vector<std::string> trimmed;
  for (const auto& h : header) trimmed.emplace_back(detail::trim(h));
  if (trimmed != expected) throw SchemaError("results file header does not match the results schema", "header");

  std::vector<CellResult> cells;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (detail::trim(line).empty()) continue;
    ++row;
    const auto cols = detail::split_csv_line(line);
    if (cols.size() != expected.size()) {
      throw ParseError(fmt::format("results row {}: expected {} columns", row, expected.size()), row, "");
    }
    if (detail::trim(cols[9]).find("failed") != std::string_view::npos) continue;
    CellResult c;
    const auto user = detail::parse_integer(cols[0]);
    if (!user) throw ParseError(fmt::format("results row {}: bad user_id", row), row, "user_id");
    c.user_id = *user;
    c.mask = FeatureMask::parse(cols[1]);
    c.kind = parse_kind(detail::trim(cols[2]));
    double* targets[] = {&c.metrics.accuracy, &c.metrics.precision, &c.metrics.recall, &c.metrics.f1,
                         &c.metrics.eer, &c.duration_ms};
    for (std::size_t k = 0; k < 6; ++k) {
      const auto v = detail::parse_double(cols[3 + k]);
      if (!v) throw ParseError(fmt::format("results row {}: bad {}", row, expected[3 + k]), row, expected[3 + k]);
      *targets[k] = *v;
    }
    const std::string flags(detail::trim(cols[9]));
    c.metrics.precision_undefined = flags.find("precision_undefined") != std::string::npos;
    c.metrics.recall_undefined = flags.find("recall_undefined") != std::string::npos;
    cells.push_back(c);
  }
  return cells;
}

void write_aggregate_csv(std::ostream& out, const AggregateReport& report, std::size_t sample_size) {
  out << "mask,kind,population,accuracy,precision,recall,f1,eer,cells\n";
  for (const auto& r : report.rows) {
    const auto& m = r.mean;
    out << r.mask.name() << ',' << kind_name(r.kind) << ',' << population_name(r.population, sample_size) << ','
        << format_double(m.accuracy) << ',' << format_double(m.precision) << ',' << format_double(m.recall)
        << ',' << format_double(m.f1) << ',' << format_double(m.eer) << ',' << r.cells << '\n';
  }
}

Manifest build_manifest(const ExperimentConfig& config, const Dataset& dataset, const GridResult& result) {
  Manifest m;
  m["format"] = "biomauth-manifest 1";
  m["global_seed"] = std::to_string(config.global_seed);
  m["dataset_hash"] = fmt::format("{:016x}", dataset.content_hash());
  m["dataset_users"] = std::to_string(dataset.user_count());
  m["dataset_samples"] = std::to_string(dataset.size());
  if (const auto* s = std::get_if<SyntheticSpec>(&config.source)) {
    m["source"] = "synthetic";
    m["synthetic_users"] = std::to_string(s->n_users);
    m["synthetic_samples_per_user"] = std::to_string(s->samples_per_user);
    m["synthetic_separation"] = format_double(s->separation);
    m["synthetic_seed"] = std::to_string(s->seed);
  } else {
    const auto& csv = std::get<CsvSource>(config.source);
    m["source"] = "csv";
    m["touch_csv"] = csv.touch.string();
    m["sensor_csv"] = csv.sensors.string();
    m["samples_per_user"] = std::to_string(config.samples_per_user);
  }
  std::string masks;
  for (auto mask : config.masks) masks += (masks.empty() ? "" : ",") + mask.name();
  m["masks"] = masks;
  std::string kinds;
  for (auto kind : config.kinds) kinds += (kinds.empty() ? "" : ",") + std::string(kind_name(kind));
  m["kinds"] = kinds;
  m["split_ratio"] = config.split_ratio.str();
  m["sample_size"] = std::to_string(config.sample_size);
  std::string sampled;
  for (auto u : result.aggregate.sampled_users) sampled += (sampled.empty() ? "" : ",") + std::to_string(u);
  m["sampled_users"] = sampled;
  m["keep_going"] = config.keep_going ? "true" : "false";
  m["cells_completed"] = std::to_string(result.cells.size());
  m["cells_failed"] = std::to_string(result.failed.size());

  const auto& h = config.hyper;
  m["hyper.knn_k"] = std::to_string(h.knn_k);
  m["hyper.rf_trees"] = std::to_string(h.rf_trees);
  m["hyper.rf_max_depth"] = h.rf_max_depth ? std::to_string(*h.rf_max_depth) : "unlimited";
  m["hyper.svm_regularization"] = format_double(h.svm_regularization);
  m["hyper.svm_epochs"] = std::to_string(h.svm_epochs);
  m["hyper.lr_threshold"] = format_double(h.lr_threshold);
  m["hyper.learning_rate"] = format_double(h.learning_rate);
  std::string hidden;
  for (auto n : h.mlp_hidden) hidden += (hidden.empty() ? "" : ",") + std::to_string(n);
  m["hyper.mlp_hidden"] = hidden;
  m["hyper.lstm_hidden"] = std::to_string(h.lstm_hidden);
  m["hyper.nn_epochs"] = std::to_string(h.nn_epochs);
  m["hyper.batch_size"] = std::to_string(h.batch_size);
  m["hyper.nb_var_smoothing"] = format_double(h.nb_var_smoothing);
  m["hyper.scale_inputs"] = h.scale_inputs ? "true" : "false";
  return m;
}

void write_manifest(std::ostream& out, const Manifest& manifest) {
  out << "# biomauth run manifest: key=value per line\n";
  for (const auto& [key, value] : manifest) out << key << '=' << value << '\n';
}

Manifest read_manifest(std::istream& in) {
  Manifest m;
  std::string line;
  while (std::getline(in, line)) {
    const auto t = detail::trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string_view::npos) throw DataError(fmt::format("manifest line without '=': {}", t));
    m[std::string(t.substr(0, eq))] = std::string(t.substr(eq + 1));
  }
  return m;
}

}  // namespace biomauth
