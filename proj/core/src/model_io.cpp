// Model text format, version 1. Whitespace-separated tokens:
//
//   biomauth-model 1
//   kind <RF|SVM|KNN|NB|LR|MLP|LSTM>
//   input_dimension <d>
//   classes <n> <label>...
//   threshold <t>
//   scaler 0                      | scaler 1 <vector min> <vector max>
//   <kind-specific block>
//   end
//
// where <vector> is "<n> v..." and <matrix> is "<rows> <cols> v..." in
// row-major order. Reals are written in shortest round-trip form.
//
//   RF   trees <T> then per tree: tree <N> and N x (feature threshold left right leaf_class)
//   SVM  weights <matrix>
//   KNN  k <k> points <matrix> class_index <n> <i>...
//   NB   means <matrix> variances <matrix> log_priors <vector>
//   LR   params <vector>
//   MLP  hidden <L> <h>... params <vector>
//   LSTM hidden <H> params <vector>

#include <charconv>
#include <istream>
#include <ostream>
#include <string>

#include <fmt/format.h>

#include "biomauth/classifiers.hpp"
#include "biomauth/errors.hpp"
#include "csv.hpp"

namespace biomauth {

namespace {

constexpr std::string_view kMagic = "biomauth-model";
constexpr int kVersion = 1;

void write_real(std::ostream& out, double v) { out << ' ' << detail::format_double(v); }

void write_vector(std::ostream& out, std::string_view name, const Eigen::VectorXd& v) {
  out << name << ' ' << v.size();
  for (Eigen::Index i = 0; i < v.size(); ++i) write_real(out, v[i]);
  out << '\n';
}

void write_matrix(std::ostream& out, std::string_view name, const Eigen::MatrixXd& m) {
  out << name << ' ' << m.rows() << ' ' << m.cols();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) write_real(out, m(i, j));
  }
  out << '\n';
}

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  std::string token() {
    std::string t;
    if (!(in_ >> t)) throw FormatError("model file ended unexpectedly");
    return t;
  }

  void expect(std::string_view keyword) {
    const auto t = token();
    if (t != keyword) throw FormatError(fmt::format("expected '{}' in model file, found '{}'", keyword, t));
  }

  double real() {
    const auto t = token();
    const auto v = detail::parse_double(t);
    if (!v) throw FormatError(fmt::format("bad number '{}' in model file", t));
    return *v;
  }

  template <typename Int>
  Int integer() {
    const auto t = token();
    Int v{};
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc{} || ptr != t.data() + t.size()) {
      throw FormatError(fmt::format("bad integer '{}' in model file", t));
    }
    return v;
  }

  Eigen::VectorXd vector(std::string_view name) {
    expect(name);
    const auto n = integer<Eigen::Index>();
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = real();
    return v;
  }

  Eigen::MatrixXd matrix(std::string_view name) {
    expect(name);
    const auto rows = integer<Eigen::Index>();
    const auto cols = integer<Eigen::Index>();
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
      for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = real();
    }
    return m;
  }

 private:
  std::istream& in_;
};

struct ParamWriter {
  std::ostream& out;

  void operator()(const RandomForestParams& p) const {
    out << "trees " << p.trees.size() << '\n';
    for (const auto& tree : p.trees) {
      out << "tree " << tree.size() << '\n';
      for (const auto& node : tree) {
        out << node.feature;
        write_real(out, node.threshold);
        out << ' ' << node.left << ' ' << node.right << ' ' << node.leaf_class << '\n';
      }
    }
  }
  void operator()(const LinearSvmParams& p) const { write_matrix(out, "weights", p.weights); }
  void operator()(const KnnParams& p) const {
    out << "k " << p.k << '\n';
    write_matrix(out, "points", p.points);
    out << "class_index " << p.class_index.size();
    for (int c : p.class_index) out << ' ' << c;
    out << '\n';
  }
  void operator()(const NaiveBayesParams& p) const {
    write_matrix(out, "means", p.means);
    write_matrix(out, "variances", p.variances);
    write_vector(out, "log_priors", p.log_priors);
  }
  void operator()(const LogisticParams& p) const { write_vector(out, "params", p.params); }
  void operator()(const MlpParams& p) const {
    out << "hidden " << p.hidden.size();
    for (auto h : p.hidden) out << ' ' << h;
    out << '\n';
    write_vector(out, "params", p.params);
  }
  void operator()(const LstmParams& p) const {
    out << "hidden " << p.hidden << '\n';
    write_vector(out, "params", p.params);
  }
};

ModelParams read_params(Reader& r, ClassifierKind kind) {
  switch (kind) {
    case ClassifierKind::kRF: {
      RandomForestParams p;
      r.expect("trees");
      p.trees.resize(r.integer<std::size_t>());
      for (auto& tree : p.trees) {
        r.expect("tree");
        tree.resize(r.integer<std::size_t>());
        for (auto& node : tree) {
          node.feature = r.integer<int>();
          node.threshold = r.real();
          node.left = r.integer<int>();
          node.right = r.integer<int>();
          node.leaf_class = r.integer<int>();
        }
      }
      return p;
    }
    case ClassifierKind::kSVM:
      return LinearSvmParams{r.matrix("weights")};
    case ClassifierKind::kKNN: {
      KnnParams p;
      r.expect("k");
      p.k = r.integer<std::size_t>();
      p.points = r.matrix("points");
      r.expect("class_index");
      p.class_index.resize(r.integer<std::size_t>());
      for (auto& c : p.class_index) c = r.integer<int>();
      return p;
    }
    case ClassifierKind::kNB: {
      NaiveBayesParams p;
      p.means = r.matrix("means");
      p.variances = r.matrix("variances");
      p.log_priors = r.vector("log_priors");
      return p;
    }
    case ClassifierKind::kLR:
      return LogisticParams{r.vector("params")};
    case ClassifierKind::kMLP: {
      MlpParams p;
      r.expect("hidden");
      p.hidden.resize(r.integer<std::size_t>());
      for (auto& h : p.hidden) h = r.integer<Eigen::Index>();
      p.params = r.vector("params");
      return p;
    }
    case ClassifierKind::kLSTM: {
      LstmParams p;
      r.expect("hidden");
      p.hidden = r.integer<Eigen::Index>();
      p.params = r.vector("params");
      return p;
    }
  }
  throw FormatError("unknown model kind");
}

}  // namespace

void save_model(std::ostream& out, const TrainedModel& model) {
  out << kMagic << ' ' << kVersion << '\n';
  out << "kind " << kind_name(model.kind()) << '\n';
  out << "input_dimension " << model.input_dimension() << '\n';
  out << "classes " << model.classes().size();
  for (auto c : model.classes()) out << ' ' << c;
  out << '\n';
  out << "threshold";
  write_real(out, model.decision_threshold());
  out << '\n';
  if (model.scaler()) {
    out << "scaler 1\n";
    write_vector(out, "min", model.scaler()->min);
    write_vector(out, "max", model.scaler()->max);
  } else {
    out << "scaler 0\n";
  }
  std::visit(ParamWriter{out}, model.params());
  out << "end\n";
}

TrainedModel load_model(std::istream& in) {
  Reader r(in);
  r.expect(kMagic);
  const int version = r.integer<int>();
  if (version != kVersion) throw FormatError(fmt::format("unsupported model format version {}", version));
  r.expect("kind");
  ClassifierKind kind;
  try {
    kind = parse_kind(r.token());
  } catch (const ConfigError& e) {
    throw FormatError(e.what());
  }
  r.expect("input_dimension");
  const auto dimension = r.integer<std::size_t>();
  r.expect("classes");
  std::vector<Label> classes(r.integer<std::size_t>());
  for (auto& c : classes) c = r.integer<Label>();
  r.expect("threshold");
  const double threshold = r.real();
  r.expect("scaler");
  std::optional<ScalerParams> scaler;
  if (r.integer<int>() == 1) {
    ScalerParams s;
    s.min = r.vector("min");
    s.max = r.vector("max");
    scaler = std::move(s);
  }
  auto params = read_params(r, kind);
  r.expect("end");
  return TrainedModel(kind, std::move(classes), dimension, std::move(scaler), threshold, std::move(params));
}

}  // namespace biomauth
