#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "../temp_dir.hpp"
#include "biomauth/cli.hpp"

using namespace biomauth;
using namespace biomauth::cli;

namespace {

CliCommand parse(std::vector<std::string> args) { return parse_args(args); }

int run(std::vector<std::string> args, std::string* out_text = nullptr, std::string* err_text = nullptr) {
  std::ostringstream out, err;
  const int code = run_main(args, out, err);
  if (out_text) *out_text = out.str();
  if (err_text) *err_text = err.str();
  return code;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST(CliParse, SyntheticRun) {
  const auto cmd = parse({"run", "--synthetic", "--users", "51", "--samples", "100", "--seed", "42"});
  const auto& r = std::get<RunCommand>(cmd);
  const auto& spec = std::get<SyntheticSpec>(r.config.source);
  EXPECT_EQ(spec.n_users, 51u);
  EXPECT_EQ(spec.samples_per_user, 100u);
  EXPECT_EQ(spec.seed, 42u);
  EXPECT_EQ(r.config.global_seed, 42u);
  EXPECT_EQ(r.config.masks.size(), 15u);
  EXPECT_EQ(r.config.kinds.size(), 7u);
  EXPECT_EQ(r.config.split_ratio, (SplitRatio{80, 20}));
  EXPECT_TRUE(r.plots);
  EXPECT_TRUE(r.include_timing);
}

TEST(CliParse, RunOptions) {
  const auto cmd = parse({"run", "--synthetic", "--masks", "mag,touch+acc", "--kinds", "rf,knn", "--split-ratio",
                          "30/70", "--scale-all", "--keep-going", "--no-timing", "--no-plots", "--dump-splits",
                          "--save-models", "--threads", "2", "--sample-size", "5", "--out", "x"});
  const auto& r = std::get<RunCommand>(cmd);
  ASSERT_EQ(r.config.masks.size(), 2u);
  EXPECT_EQ(r.config.masks[1].name(), "touch+acc");
  EXPECT_EQ(r.config.kinds, (std::vector<ClassifierKind>{ClassifierKind::kRF, ClassifierKind::kKNN}));
  EXPECT_EQ(r.config.split_ratio, (SplitRatio{30, 70}));
  EXPECT_TRUE(r.config.hyper.scale_inputs);
  EXPECT_TRUE(r.config.keep_going);
  EXPECT_FALSE(r.include_timing);
  EXPECT_FALSE(r.plots);
  EXPECT_TRUE(r.dump_splits);
  EXPECT_TRUE(r.save_models);
  EXPECT_EQ(r.config.threads, 2u);
  EXPECT_EQ(r.config.sample_size, 5u);
  EXPECT_EQ(r.out, "x");
}

TEST(CliParse, CsvRun) {
  const auto cmd = parse({"run", "--touch", "t.csv", "--sensors", "s.csv", "--samples", "50"});
  const auto& r = std::get<RunCommand>(cmd);
  const auto& src = std::get<CsvSource>(r.config.source);
  EXPECT_EQ(src.touch, "t.csv");
  EXPECT_EQ(src.sensors, "s.csv");
  EXPECT_EQ(r.config.samples_per_user, 50u);
}

TEST(CliParse, UsageErrors) {
  try {
    parse({"run", "--touch", "t.csv"});
    FAIL();
  } catch (const UsageError& e) {
    EXPECT_NE(std::string(e.what()).find("--sensors"), std::string::npos);
  }
  EXPECT_THROW(parse({"run", "--synthetic", "--touch", "t.csv", "--sensors", "s.csv"}), UsageError);
  EXPECT_THROW(parse({"run"}), UsageError);
  EXPECT_THROW(parse({"run", "--synthetic", "--bogus"}), UsageError);
  EXPECT_THROW(parse({"run", "--synthetic", "--masks", "nose"}), UsageError);
  EXPECT_THROW(parse({"run", "--synthetic", "--kinds", "xgb"}), UsageError);
  EXPECT_THROW(parse({"run", "--synthetic", "--split-ratio", "80"}), UsageError);
  EXPECT_THROW(parse({"run", "--synthetic", "--users", "5", "--sample-size", "6"}), UsageError);
  EXPECT_THROW(parse({"run", "--touch", "t", "--sensors", "s", "--users", "5"}), UsageError);
  EXPECT_THROW(parse({"frobnicate"}), UsageError);
  EXPECT_THROW(parse({}), UsageError);
}

TEST(CliParse, OtherCommands) {
  EXPECT_TRUE(std::holds_alternative<SelftestCommand>(parse({"selftest"})));
  const auto report = std::get<ReportCommand>(parse({"report", "--in", "r"}));
  EXPECT_EQ(report.in, "r");
  const auto fuse_cmd = std::get<FuseCommand>(parse({"fuse", "--touch", "a", "--sensors", "b"}));
  EXPECT_EQ(fuse_cmd.samples_per_user, 100u);
  const auto synth = std::get<SynthCommand>(parse({"synth", "--users", "4", "--seed", "3"}));
  EXPECT_EQ(synth.spec.n_users, 4u);
  EXPECT_EQ(synth.spec.seed, 3u);
}

TEST(CliMain, HelpExitsZero) {
  std::string out;
  EXPECT_EQ(run({"--help"}, &out), kExitSuccess);
  EXPECT_NE(out.find("run"), std::string::npos);
  EXPECT_EQ(run({"run", "--help"}, &out), kExitSuccess);
  EXPECT_NE(out.find("--split-ratio"), std::string::npos);
}

TEST(CliMain, ExitCodes) {
  std::string err;
  EXPECT_EQ(run({"run", "--touch", "t.csv"}, nullptr, &err), kExitUsage);
  EXPECT_NE(err.find("--sensors"), std::string::npos);

  TempDir dir;
  EXPECT_EQ(run({"run", "--touch", (dir / "missing.csv").string(), "--sensors", (dir / "none.csv").string(), "--out",
                 (dir / "o").string()}),
            kExitData);

  std::ofstream(dir / "touch.csv") << "user_id,stroke_duration\n1,2\n";
  std::ofstream(dir / "sensors.csv") << "user_id,acc_x\n1,0\n";
  EXPECT_EQ(run({"fuse", "--touch", (dir / "touch.csv").string(), "--sensors", (dir / "sensors.csv").string(),
                 "--out", (dir / "f.csv").string()}),
            kExitData);
  EXPECT_EQ(run({"report", "--in", (dir / "nothing").string()}), kExitData);
}

TEST(CliMain, SmallRunWritesOutputs) {
  TempDir dir;
  const auto out = dir / "run";
  std::string log;
  ASSERT_EQ(run({"run", "--synthetic", "--users", "6", "--samples", "20", "--seed", "3", "--masks", "mag,acc", "--kinds",
                 "knn,nb", "--sample-size", "2", "--split-ratio", "30/70", "--dump-splits", "--save-models", "--out",
                 out.string()},
                &log),
            kExitSuccess)
      << log;
  for (const char* f : {"results.csv", "aggregate.csv", "manifest.txt", "splits.csv", "plots/accuracy_all.svg",
                        "plots/eer_sample2.csv", "models/user1_mag_KNN.model"}) {
    EXPECT_TRUE(std::filesystem::exists(out / f)) << f;
  }
  const auto manifest = slurp(out / "manifest.txt");
  EXPECT_NE(manifest.find("split_ratio=30/70\n"), std::string::npos);
  EXPECT_NE(manifest.find("global_seed=3\n"), std::string::npos);

  const auto plots = dir / "replot";
  ASSERT_EQ(run({"report", "--in", out.string(), "--out", plots.string()}), kExitSuccess);
  EXPECT_EQ(slurp(plots / "accuracy_all.csv"), slurp(out / "plots" / "accuracy_all.csv"));
  EXPECT_EQ(slurp(plots / "f1_sample2.svg"), slurp(out / "plots" / "f1_sample2.svg"));
}

TEST(CliMain, NoTimingRunsAreByteIdentical) {
  TempDir dir;
  const auto go = [&](const std::string& name, const std::string& threads) {
    return run({"run", "--synthetic", "--users", "6", "--samples", "20", "--masks", "gyro", "--kinds", "knn,lr",
                "--sample-size", "2", "--no-timing", "--no-plots", "--threads", threads, "--out", (dir / name).string()});
  };
  ASSERT_EQ(go("a", "1"), kExitSuccess);
  ASSERT_EQ(go("b", "2"), kExitSuccess);
  EXPECT_EQ(slurp(dir / "a" / "results.csv"), slurp(dir / "b" / "results.csv"));
  EXPECT_FALSE(std::filesystem::exists(dir / "a" / "plots"));
}

TEST(CliMain, SynthThenCsvRun) {
  TempDir dir;
  ASSERT_EQ(run({"synth", "--users", "5", "--samples", "12", "--seed", "2", "--out", (dir / "data").string()}),
            kExitSuccess);
  ASSERT_EQ(run({"fuse", "--touch", (dir / "data" / "touch.csv").string(), "--sensors",
                 (dir / "data" / "sensors.csv").string(), "--samples", "10", "--out", (dir / "fused.csv").string()}),
            kExitSuccess);
  EXPECT_TRUE(std::filesystem::exists(dir / "fused.csv"));
  ASSERT_EQ(run({"run", "--touch", (dir / "data" / "touch.csv").string(), "--sensors",
                 (dir / "data" / "sensors.csv").string(), "--samples", "10", "--masks", "touch", "--kinds", "knn",
                 "--sample-size", "2", "--no-plots", "--out", (dir / "r").string()}),
            kExitSuccess);
  EXPECT_NE(slurp(dir / "r" / "manifest.txt").find("source=csv"), std::string::npos);
}
