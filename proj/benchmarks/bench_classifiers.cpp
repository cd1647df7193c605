#include <benchmark/benchmark.h>

#include "biomauth/experiment.hpp"

using namespace biomauth;

namespace {

struct CellData {
  SplitMatrix train;
  SplitMatrix test;
  std::vector<Label> user_labels;
  std::vector<Label> bit_labels;
  UserId target = 0;
};

const CellData& cell_data() {
  static const CellData data = [] {
    const auto d = generate_synthetic({.n_users = 51, .samples_per_user = 100, .separation = 1.0, .seed = 1});
    const UserId target = d.users().front();
    const auto split = build_user_split(d, target, derive_seed(1, target));
    CellData c;
    c.target = target;
    c.train = materialize(d, split.train, FeatureMask::full());
    c.test = materialize(d, split.test, FeatureMask::full());
    c.user_labels.assign(c.train.sources.begin(), c.train.sources.end());
    c.bit_labels.assign(c.train.labels.begin(), c.train.labels.end());
    return c;
  }();
  return data;
}

void BM_Fit(benchmark::State& state) {
  const auto kind = static_cast<ClassifierKind>(state.range(0));
  const auto& c = cell_data();
  const auto& labels = is_multiclass(kind) ? c.user_labels : c.bit_labels;
  HyperParams h;
  h.seed = 7;
  for (auto _ : state) benchmark::DoNotOptimize(fit(kind, c.train.features, labels, h));
  state.SetLabel(std::string(kind_name(kind)));
}

void BM_Predict(benchmark::State& state) {
  const auto kind = static_cast<ClassifierKind>(state.range(0));
  const auto& c = cell_data();
  HyperParams h;
  h.seed = 7;
  const auto model = fit(kind, c.train.features, is_multiclass(kind) ? c.user_labels : c.bit_labels, h);
  const Label target = is_multiclass(kind) ? c.target : 1;
  std::vector<double> row(static_cast<std::size_t>(c.test.features.cols()));
  for (auto _ : state) {
    for (Eigen::Index i = 0; i < c.test.features.rows(); ++i) {
      for (Eigen::Index j = 0; j < c.test.features.cols(); ++j) row[static_cast<std::size_t>(j)] = c.test.features(i, j);
      benchmark::DoNotOptimize(predict(model, row, target));
    }
  }
  state.SetItemsProcessed(state.iterations() * c.test.features.rows());
  state.SetLabel(std::string(kind_name(kind)));
}

void AllKinds(benchmark::internal::Benchmark* b) {
  for (auto kind : kAllKinds) b->Arg(static_cast<int>(kind));
}

}  // namespace

BENCHMARK(BM_Fit)->Apply(AllKinds)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Predict)->Apply(AllKinds)->Unit(benchmark::kMicrosecond);
