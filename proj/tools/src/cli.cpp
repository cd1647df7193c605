#include "biomauth/cli.hpp"

#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include "biomauth/report.hpp"
#include "biomauth/selfcheck.hpp"

namespace biomauth::cli {

namespace {

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (!item.empty()) parts.push_back(item);
  }
  return parts;
}

std::vector<FeatureMask> parse_masks(const std::string& text) {
  if (text == "all") return enumerate_masks();
  std::vector<FeatureMask> masks;
  for (const auto& item : split_list(text)) {
    const auto mask = FeatureMask::parse(item);
    if (std::find(masks.begin(), masks.end(), mask) == masks.end()) masks.push_back(mask);
  }
  if (masks.empty()) throw UsageError("--masks needs at least one mask");
  std::sort(masks.begin(), masks.end(),
            [](FeatureMask a, FeatureMask b) { return mask_ordinal(a) < mask_ordinal(b); });
  return masks;
}

std::vector<ClassifierKind> parse_kinds(const std::string& text) {
  if (text == "all") return {kAllKinds.begin(), kAllKinds.end()};
  std::vector<ClassifierKind> kinds;
  for (const auto& item : split_list(text)) {
    const auto kind = parse_kind(item);
    if (std::find(kinds.begin(), kinds.end(), kind) == kinds.end()) kinds.push_back(kind);
  }
  if (kinds.empty()) throw UsageError("--kinds needs at least one classifier");
  std::sort(kinds.begin(), kinds.end());
  return kinds;
}

// Config-level parse failures inside option values are usage errors here.
template <typename F>
auto as_usage(F&& f) {
  try {
    return f();
  } catch (const ConfigError& e) {
    throw UsageError(e.what());
  }
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError(fmt::format("cannot write {}", path.string()));
  out << text;
  if (!out) throw DataError(fmt::format("failed writing {}", path.string()));
}

std::string model_file_name(UserId user, FeatureMask mask, ClassifierKind kind) {
  return fmt::format("user{}_{}_{}.model", user, mask.name(), kind_name(kind));
}

int run_command(const RunCommand& cmd, std::ostream& log) {
  std::mutex log_mutex;
  const WarningSink warn = [&](std::string_view message) {
    std::lock_guard lock(log_mutex);
    log << "warning: " << message << '\n';
  };

  const auto dataset = load_dataset(cmd.config, warn);
  cmd.config.validate(dataset.user_count());
  std::filesystem::create_directories(cmd.out);

  std::vector<UserSplit> splits;
  std::mutex split_mutex;
  GridHooks hooks;
  if (cmd.dump_splits) {
    hooks.on_split = [&](const UserSplit& split) {
      std::lock_guard lock(split_mutex);
      splits.push_back(split);
    };
  }
  const auto model_dir = cmd.out / "models";
  if (cmd.save_models) {
    std::filesystem::create_directories(model_dir);
    hooks.on_model = [&](UserId user, FeatureMask mask, ClassifierKind kind, const TrainedModel& model) {
      std::ostringstream text;
      save_model(text, model);
      write_text(model_dir / model_file_name(user, mask, kind), text.str());
    };
  }

  log << fmt::format("running {} users x {} masks x {} classifiers\n", dataset.user_count(),
                     cmd.config.masks.size(), cmd.config.kinds.size());
  const auto result = run_grid(dataset, cmd.config, hooks, warn);

  std::ostringstream results;
  write_results_csv(results, result, cmd.include_timing);
  write_text(cmd.out / "results.csv", results.str());

  std::ostringstream aggregate;
  write_aggregate_csv(aggregate, result.aggregate, cmd.config.sample_size);
  write_text(cmd.out / "aggregate.csv", aggregate.str());

  std::ostringstream manifest;
  write_manifest(manifest, build_manifest(cmd.config, dataset, result));
  write_text(cmd.out / "manifest.txt", manifest.str());

  if (cmd.dump_splits) {
    std::sort(splits.begin(), splits.end(),
              [](const UserSplit& a, const UserSplit& b) { return a.target_user < b.target_user; });
    std::ostringstream text;
    write_split_csv_header(text);
    for (const auto& split : splits) write_split_csv_rows(text, split);
    write_text(cmd.out / "splits.csv", text.str());
  }

  if (cmd.plots && !result.aggregate.rows.empty()) {
    const auto files = emit_plots(result.aggregate, cmd.config.sample_size, cmd.out / "plots");
    log << fmt::format("wrote {} plot files\n", files.size());
  }
  log << fmt::format("{} cells completed, {} failed, {} threads; results in {}\n", result.cells.size(),
                     result.failed.size(), result.threads_used, cmd.out.string());
  return kExitSuccess;
}

int report_command(const ReportCommand& cmd, std::ostream& log) {
  std::ifstream results_in(cmd.in / "results.csv");
  if (!results_in) throw DataError(fmt::format("cannot read {}", (cmd.in / "results.csv").string()));
  const auto cells = read_results_csv(results_in);

  std::ifstream manifest_in(cmd.in / "manifest.txt");
  if (!manifest_in) throw DataError(fmt::format("cannot read {}", (cmd.in / "manifest.txt").string()));
  const auto manifest = read_manifest(manifest_in);

  std::vector<UserId> sampled;
  std::size_t sample_size = 0;
  if (auto it = manifest.find("sampled_users"); it != manifest.end()) {
    for (const auto& item : split_list(it->second)) sampled.push_back(std::stoll(item));
  }
  if (auto it = manifest.find("sample_size"); it != manifest.end()) sample_size = std::stoull(it->second);

  const auto report = aggregate(cells, sampled);
  if (report.rows.empty()) throw DataError("results file holds no completed cells");
  const auto out_dir = cmd.out.empty() ? cmd.in / "plots" : cmd.out;
  const auto files = emit_plots(report, sample_size, out_dir);
  for (const auto& f : files) log << f.string() << '\n';
  return kExitSuccess;
}

int selftest_command(std::ostream& log) {
  bool ok = true;
  for (const auto& suite : selfcheck::run_all()) {
    log << fmt::format("{:<18} {}  checks={} worst={:.3g} time={:.2f}s\n", suite.name,
                       suite.passed ? "PASS" : "FAIL", suite.checks, suite.worst, suite.seconds);
    for (const auto& f : suite.failures) log << "  " << f << '\n';
    ok = ok && suite.passed;
  }
  return ok ? kExitSuccess : kExitInternal;
}

}  // namespace

CliCommand parse_args(std::span<const std::string> args) {
  CLI::App app{"Multi-modal behavioural biometric authentication experiments", "biomauth"};
  app.require_subcommand(1, 1);
  app.fallthrough(false);

  FuseCommand fuse_cmd;
  auto* fuse_app = app.add_subcommand("fuse", "Fuse touch and sensor CSVs into one table");
  fuse_app->add_option("--touch", fuse_cmd.touch, "Touch-stroke CSV")->required();
  fuse_app->add_option("--sensors", fuse_cmd.sensors, "Sensor CSV")->required();
  fuse_app->add_option("--samples", fuse_cmd.samples_per_user, "Samples kept per user")->check(CLI::PositiveNumber);
  fuse_app->add_option("--out", fuse_cmd.out, "Output CSV path");

  SynthCommand synth_cmd;
  auto* synth_app = app.add_subcommand("synth", "Write a synthetic dataset as touch and sensor CSVs");
  synth_app->add_option("--users", synth_cmd.spec.n_users, "Number of users")->check(CLI::Range(2, 1000000));
  synth_app->add_option("--samples", synth_cmd.spec.samples_per_user, "Samples per user")
      ->check(CLI::Range(2, 100000000));
  synth_app->add_option("--separation", synth_cmd.spec.separation, "Between-user spread")
      ->check(CLI::NonNegativeNumber);
  synth_app->add_option("--seed", synth_cmd.spec.seed, "Generator seed");
  synth_app->add_option("--out", synth_cmd.out, "Output directory");

  RunCommand run_cmd;
  SyntheticSpec spec;
  std::filesystem::path touch;
  std::filesystem::path sensors;
  std::size_t samples = 100;
  std::string masks = "all";
  std::string kinds = "all";
  std::string ratio;
  auto* run_app = app.add_subcommand("run", "Run the evaluation grid");
  auto* touch_opt = run_app->add_option("--touch", touch, "Touch-stroke CSV");
  auto* sensors_opt = run_app->add_option("--sensors", sensors, "Sensor CSV");
  touch_opt->needs(sensors_opt);
  sensors_opt->needs(touch_opt);
  auto* synthetic_flag = run_app->add_flag("--synthetic", "Use a generated dataset");
  synthetic_flag->excludes(touch_opt)->excludes(sensors_opt);
  auto* users_opt = run_app->add_option("--users", spec.n_users, "Synthetic users")->check(CLI::Range(2, 1000000));
  users_opt->needs(synthetic_flag);
  run_app->add_option("--samples", samples, "Samples per user")->check(CLI::Range(2, 100000000));
  auto* separation_opt =
      run_app->add_option("--separation", spec.separation, "Synthetic between-user spread")->check(CLI::NonNegativeNumber);
  separation_opt->needs(synthetic_flag);
  run_app->add_option("--seed", run_cmd.config.global_seed, "Global seed (also seeds synthetic data)");
  run_app->add_option("--masks", masks, "Comma-separated masks such as touch,acc+mag, or all");
  run_app->add_option("--kinds", kinds, "Comma-separated classifiers such as RF,KNN, or all");
  run_app->add_option("--sample-size", run_cmd.config.sample_size, "Users in the sampled population");
  run_app->add_option("--split-ratio", ratio, "Genuine train/test percentages, e.g. 80/20");
  run_app->add_flag("--scale-all", run_cmd.config.hyper.scale_inputs, "Min-max scale inputs for every classifier");
  run_app->add_option("--out", run_cmd.out, "Output directory");
  run_app->add_flag("--dump-splits", run_cmd.dump_splits, "Write splits.csv");
  run_app->add_flag("--save-models", run_cmd.save_models, "Write every fitted model under models/");
  run_app->add_flag("--keep-going", run_cmd.config.keep_going, "Record failed cells instead of aborting");
  run_app->add_option("--threads", run_cmd.config.threads, "Worker threads (0 = all cores)");
  bool no_timing = false;
  run_app->add_flag("--no-timing", no_timing, "Write duration_ms as 0 for byte-comparable results");
  bool no_plots = false;
  run_app->add_flag("--no-plots", no_plots, "Skip SVG plots");

  ReportCommand report_cmd;
  auto* report_app = app.add_subcommand("report", "Render plots from a finished run directory");
  report_app->add_option("--in", report_cmd.in, "Run output directory")->required();
  report_app->add_option("--out", report_cmd.out, "Plot directory (default <in>/plots)");

  auto* selftest_app = app.add_subcommand("selftest", "Run the metric, gradient, and split self-checks");

  // CLI11 consumes arguments in reverse order.
  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    std::ostringstream text;
    app.exit(e, text, text);
    return HelpCommand{text.str()};
  } catch (const CLI::CallForAllHelp& e) {
    std::ostringstream text;
    app.exit(e, text, text);
    return HelpCommand{text.str()};
  } catch (const CLI::ParseError& e) {
    throw UsageError(e.what());
  }

  if (fuse_app->parsed()) return fuse_cmd;
  if (synth_app->parsed()) return synth_cmd;
  if (report_app->parsed()) return report_cmd;
  if (selftest_app->parsed()) return SelftestCommand{};

  const bool csv = !touch.empty();
  if (!csv && synthetic_flag->count() == 0) throw UsageError("run needs --synthetic or --touch with --sensors");
  if (csv) {
    run_cmd.config.source = CsvSource{touch, sensors};
    run_cmd.config.samples_per_user = samples;
  } else {
    spec.samples_per_user = samples;
    spec.seed = run_cmd.config.global_seed;
    run_cmd.config.source = spec;
  }
  run_cmd.config.masks = as_usage([&] { return parse_masks(masks); });
  run_cmd.config.kinds = as_usage([&] { return parse_kinds(kinds); });
  if (!ratio.empty()) run_cmd.config.split_ratio = as_usage([&] { return SplitRatio::parse(ratio); });
  run_cmd.include_timing = !no_timing;
  run_cmd.plots = !no_plots;
  if (run_cmd.config.sample_size == 0) throw UsageError("--sample-size must be at least 1");
  if (const auto* s = std::get_if<SyntheticSpec>(&run_cmd.config.source);
      s != nullptr && run_cmd.config.sample_size > s->n_users) {
    throw UsageError(fmt::format("--sample-size {} exceeds --users {}", run_cmd.config.sample_size, s->n_users));
  }
  return run_cmd;
}

CliCommand parse_args(int argc, const char* const* argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return parse_args(args);
}

int execute(const CliCommand& command, std::ostream& log) {
  return std::visit(
      [&](const auto& cmd) -> int {
        using T = std::decay_t<decltype(cmd)>;
        if constexpr (std::is_same_v<T, HelpCommand>) {
          log << cmd.text;
          return kExitSuccess;
        } else if constexpr (std::is_same_v<T, FuseCommand>) {
          const WarningSink warn = [&](std::string_view m) { log << "warning: " << m << '\n'; };
          const auto dataset = fuse(parse_touch_csv(cmd.touch, warn), parse_sensor_csv(cmd.sensors, warn),
                                    cmd.samples_per_user, warn);
          write_fused_csv(cmd.out, dataset);
          log << fmt::format("fused {} users, {} samples into {}\n", dataset.user_count(), dataset.size(),
                             cmd.out.string());
          return kExitSuccess;
        } else if constexpr (std::is_same_v<T, SynthCommand>) {
          const auto dataset = generate_synthetic(cmd.spec);
          std::filesystem::create_directories(cmd.out);
          write_touch_csv(cmd.out / "touch.csv", touch_records(dataset));
          write_sensor_csv(cmd.out / "sensors.csv", sensor_records(dataset));
          log << fmt::format("wrote {} samples for {} users to {}\n", dataset.size(), dataset.user_count(),
                             cmd.out.string());
          return kExitSuccess;
        } else if constexpr (std::is_same_v<T, RunCommand>) {
          return run_command(cmd, log);
        } else if constexpr (std::is_same_v<T, ReportCommand>) {
          return report_command(cmd, log);
        } else {
          return selftest_command(log);
        }
      },
      command);
}

int run_main(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
  try {
    return execute(parse_args(args), out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\nRun with --help for usage.\n";
    return kExitUsage;
  } catch (const ConfigError& e) {
    err << "configuration error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const CellError& e) {
    // A cell wraps its cause; classify by what actually failed.
    try {
      std::rethrow_exception(e.cause());
    } catch (const DataError&) {
      err << "data error: " << e.what() << '\n';
      return kExitData;
    } catch (const ConfigError&) {
      err << "configuration error: " << e.what() << '\n';
      return kExitUsage;
    } catch (...) {
      err << "error: " << e.what() << '\n';
      return kExitInternal;
    }
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitInternal;
  }
}

}  // namespace biomauth::cli
