#include "sgc/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <ostream>
#include <set>

namespace sgc {

using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double number_or_inf(const json& j) {
  return j.is_null() ? std::numeric_limits<double>::infinity() : j.get<double>();
}

}  // namespace

ClassifierKind parse_classifier(std::string_view name) {
  if (name == "nrbfn") return ClassifierKind::Nrbfn;
  if (name == "lrc") return ClassifierKind::Lrc;
  if (name == "knn" || name == "knn-baseline") return ClassifierKind::Knn;
  fail(ErrorKind::InvalidArgument, "unknown classifier '" + std::string(name) + "' (nrbfn, lrc, knn)");
}

std::string_view to_string(ClassifierKind k) {
  switch (k) {
    case ClassifierKind::Nrbfn: return "nrbfn";
    case ClassifierKind::Lrc: return "lrc";
    case ClassifierKind::Knn: return "knn";
  }
  return "?";
}

std::vector<double> default_lambda_grid(ClassifierKind k) {
  switch (k) {
    case ClassifierKind::Nrbfn: return {1e-5, 1e-9, 1e-13};
    case ClassifierKind::Lrc: {
      std::vector<double> g;
      for (int e = -13; e <= -2; ++e) g.push_back(std::pow(10.0, e));
      return g;
    }
    case ClassifierKind::Knn: return {0.0};
  }
  return {};
}

std::vector<double> ExperimentConfig::effective_grid() const {
  return lambda_grid.empty() ? default_lambda_grid(classifier) : lambda_grid;
}

// ---------------------------------------------------------------- config

ExperimentConfig config_from_json(const json& j, const std::filesystem::path& base_dir) {
  static const std::set<std::string> known = {"name",     "data",      "test_data",   "format",     "label_column",
                                              "header",   "delimiter", "feature_count", "split",    "classifier",
                                              "k",        "t",         "basis_size",  "lambda",     "cv_folds",
                                              "seed",     "preprocess", "diagnostics", "output"};
  if (!j.is_object()) fail(ErrorKind::InvalidArgument, "config: expected a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (!known.count(key)) fail(ErrorKind::InvalidArgument, "config: unknown key '" + key + "'");
  }
  auto resolve = [&](const std::string& p) {
    if (p.empty()) return p;
    const std::filesystem::path path(p);
    return (path.is_absolute() || base_dir.empty() ? path : base_dir / path).lexically_normal().string();
  };

  ExperimentConfig c;
  try {
    c.name = j.value("name", std::string());
    if (!j.contains("data")) fail(ErrorKind::InvalidArgument, "config: 'data' is required");
    c.data_path = resolve(j.at("data").get<std::string>());
    c.test_path = resolve(j.value("test_data", std::string()));
    c.load.format = parse_data_format(j.value("format", std::string("csv")));
    c.load.label_column = j.value("label_column", 0);
    if (j.contains("header")) c.load.header = j.at("header").get<bool>();
    if (j.contains("delimiter")) {
      const auto d = j.at("delimiter").get<std::string>();
      if (d.size() != 1) fail(ErrorKind::InvalidArgument, "config: delimiter must be one character");
      c.load.delimiter = d[0];
    }
    if (j.contains("feature_count")) c.load.feature_count = j.at("feature_count").get<Index>();
    c.seed = j.value("seed", std::uint64_t{0});
    c.split.seed = c.seed;
    if (j.contains("split")) {
      const json& s = j.at("split");
      c.split.scheme = parse_split_scheme(s.value("scheme", std::string("first-half")));
      c.split.seed = s.value("seed", c.seed);
      c.split.train_fraction = s.value("train_fraction", 0.5);
      c.split.index_file = resolve(s.value("index_file", std::string()));
    }
    c.classifier = parse_classifier(j.value("classifier", std::string("nrbfn")));
    c.k = j.value("k", Index{20});
    c.t = j.value("t", 0.9);
    if (j.contains("basis_size") && !j.at("basis_size").is_null()) c.basis_size = j.at("basis_size").get<Index>();
    if (j.contains("lambda")) {
      const json& l = j.at("lambda");
      if (l.is_number()) {
        c.lambda = l.get<double>();
      } else if (l.is_array()) {
        c.lambda_grid = l.get<std::vector<double>>();
        if (c.lambda_grid.empty()) fail(ErrorKind::InvalidArgument, "config: empty lambda grid");
      } else if (!(l.is_string() && l.get<std::string>() == "cv")) {
        fail(ErrorKind::InvalidArgument, "config: lambda must be a number, a list or \"cv\"");
      }
    }
    c.cv_folds = j.value("cv_folds", 5);
    if (j.contains("preprocess")) {
      const json& p = j.at("preprocess");
      c.preprocess.mean_remove = p.value("mean_remove", false);
      c.preprocess.unit_length = p.value("unit_length", false);
    }
    c.diagnostics = j.value("diagnostics", true);
    c.output_path = resolve(j.value("output", std::string()));
  } catch (const json::exception& e) {
    fail(ErrorKind::InvalidArgument, std::string("config: ") + e.what());
  }
  if (c.k < 1) fail(ErrorKind::InvalidArgument, "config: k must be >= 1");
  if (!(c.t > 0 && c.t <= 1)) fail(ErrorKind::InvalidArgument, "config: t must lie in (0, 1]");
  if (c.cv_folds < 2) fail(ErrorKind::InvalidArgument, "config: cv_folds must be >= 2");
  if (c.lambda && !(*c.lambda >= 0)) fail(ErrorKind::InvalidArgument, "config: lambda must be >= 0");
  for (const double l : c.lambda_grid) {
    if (!(l >= 0)) fail(ErrorKind::InvalidArgument, "config: lambda grid values must be >= 0");
  }
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::IoError, "cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    fail(ErrorKind::ParseError, path.string() + ": " + e.what());
  }
  return config_from_json(j, path.parent_path());
}

json to_json(const ExperimentConfig& c) {
  json j;
  j["name"] = c.name;
  j["data"] = c.data_path;
  if (!c.test_path.empty()) j["test_data"] = c.test_path;
  j["format"] = std::string(to_string(c.load.format));
  j["label_column"] = c.load.label_column;
  if (c.load.header) j["header"] = *c.load.header;
  j["delimiter"] = std::string(1, c.load.delimiter);
  if (c.load.feature_count) j["feature_count"] = *c.load.feature_count;
  j["split"] = {{"scheme", std::string(to_string(c.split.scheme))},
                {"seed", c.split.seed},
                {"train_fraction", c.split.train_fraction}};
  if (!c.split.index_file.empty()) j["split"]["index_file"] = c.split.index_file;
  j["classifier"] = std::string(to_string(c.classifier));
  j["k"] = c.k;
  j["t"] = c.t;
  j["basis_size"] = c.basis_size ? json(*c.basis_size) : json(nullptr);
  j["lambda"] = c.lambda ? json(*c.lambda) : json(c.effective_grid());
  j["cv_folds"] = c.cv_folds;
  j["seed"] = c.seed;
  j["preprocess"] = {{"mean_remove", c.preprocess.mean_remove}, {"unit_length", c.preprocess.unit_length}};
  j["diagnostics"] = c.diagnostics;
  if (!c.output_path.empty()) j["output"] = c.output_path;
  return j;
}

// ---------------------------------------------------------------- knn

KnnModel knn_train(const Eigen::MatrixXd& A, std::span<const int> labels, Index k) {
  if (static_cast<Index>(labels.size()) != A.cols()) {
    fail(ErrorKind::DimensionMismatch, "knn_train: labels do not match sample count");
  }
  if (k < 1 || k > A.cols()) {
    fail(ErrorKind::KTooLarge, "knn_train: k = " + std::to_string(k) + " with " + std::to_string(A.cols()) +
                                   " training samples");
  }
  require_finite(A, "training data");
  KnnModel m;
  m.reference = A;
  m.labels.assign(labels.begin(), labels.end());
  m.class_count = class_count(labels);
  m.k = k;
  return m;
}

Prediction<double> knn_predict(const KnnModel& model, const Eigen::MatrixXd& B) {
  if (B.rows() != model.reference.rows()) {
    fail(ErrorKind::DimensionMismatch, "knn: expected " + std::to_string(model.reference.rows()) + " features, got " +
                                           std::to_string(B.rows()));
  }
  require_finite(B, "input data");
  const auto nn = knn_query(model.reference, B, model.k);
  Prediction<double> out;
  out.scores = Eigen::MatrixXd::Zero(model.class_count, B.cols());
  for (Index j = 0; j < B.cols(); ++j) {
    for (Index i = 0; i < model.k; ++i) {
      out.scores(model.labels[static_cast<std::size_t>(nn.indices(i, j))] - 1, j) += 1.0;
    }
  }
  out.scores /= static_cast<double>(model.k);
  out.labels = argmax_labels(out.scores);
  return out;
}

// ---------------------------------------------------------------- training

double TrainedModel::lambda() const {
  return std::visit(
      [](const auto& m) -> double {
        if constexpr (std::is_same_v<std::decay_t<decltype(m)>, KnnModel>) {
          return 0.0;
        } else {
          return m.lambda;
        }
      },
      model);
}

namespace {

NrbfnOptions nrbfn_options(const ExperimentConfig& cfg) {
  NrbfnOptions o;
  o.sknn.k = cfg.k;
  o.sknn.t = cfg.t;
  o.sknn.basis_size = cfg.basis_size;
  return o;
}

/// One fitted model per lambda on preprocessed features.
std::vector<AnyModel> fit_path(const ExperimentConfig& cfg, const Eigen::MatrixXd& A, std::span<const int> labels,
                               std::span<const double> lambdas) {
  std::vector<AnyModel> out;
  switch (cfg.classifier) {
    case ClassifierKind::Nrbfn:
      for (auto& m : nrbfn_train_path(A, labels, lambdas, nrbfn_options(cfg))) out.emplace_back(std::move(m));
      break;
    case ClassifierKind::Lrc:
      for (const double l : lambdas) out.emplace_back(lrc_train(A, labels, l));
      break;
    case ClassifierKind::Knn: {
      const KnnModel m = knn_train(A, labels, cfg.k);
      for (std::size_t i = 0; i < lambdas.size(); ++i) out.emplace_back(m);
      break;
    }
  }
  return out;
}

Prediction<double> predict_any(const AnyModel& model, const Eigen::MatrixXd& B) {
  return std::visit(
      [&](const auto& m) -> Prediction<double> {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, NrbfnModel<double>>) {
          return nrbfn_predict(m, B);
        } else if constexpr (std::is_same_v<M, LrcModel<double>>) {
          return lrc_predict(m, B);
        } else {
          return knn_predict(m, B);
        }
      },
      model);
}

}  // namespace

std::vector<int> stratified_folds(std::span<const int> labels, int K, int folds, std::uint64_t seed) {
  if (folds < 1) fail(ErrorKind::InvalidArgument, "stratified_folds: folds must be >= 1");
  std::vector<std::vector<Index>> members(static_cast<std::size_t>(K));
  for (std::size_t j = 0; j < labels.size(); ++j) {
    const int y = labels[j];
    if (y < 1 || y > K) fail(ErrorKind::LabelOutOfRange, "stratified_folds: label outside 1..K");
    members[static_cast<std::size_t>(y - 1)].push_back(static_cast<Index>(j));
  }
  std::vector<int> fold(labels.size(), 0);
  Index offset = 0;
  for (std::size_t c = 0; c < members.size(); ++c) {
    const auto& m = members[c];
    const auto perm = seeded_permutation(static_cast<Index>(m.size()), seed + c);
    for (std::size_t i = 0; i < m.size(); ++i) {
      fold[static_cast<std::size_t>(m[static_cast<std::size_t>(perm[i])])] =
          static_cast<int>((offset + static_cast<Index>(i)) % folds);
    }
    offset += static_cast<Index>(m.size());
  }
  return fold;
}

CvResult cross_validate(const LabeledDataset& train, const ExperimentConfig& cfg) {
  if (cfg.cv_folds < 2) fail(ErrorKind::InvalidArgument, "cross_validate: cv_folds must be >= 2");
  const int K = train.class_count;
  const auto counts = count_per_class(train.labels, K);
  const Index smallest = *std::min_element(counts.begin(), counts.end());
  const int folds = static_cast<int>(std::min<Index>(cfg.cv_folds, smallest));
  if (folds < 2) {
    fail(ErrorKind::TooFewSamplesPerClass, "cross_validate: a class has " + std::to_string(smallest) +
                                               " training sample(s), at least 2 are needed");
  }

  CvResult cv;
  cv.grid = cfg.effective_grid();
  cv.folds = folds;
  cv.seed = cfg.seed;
  cv.fold_errors.assign(cv.grid.size(), std::vector<double>(static_cast<std::size_t>(folds), 0.0));
  const auto fold = stratified_folds(train.labels, K, folds, cfg.seed);

  for (int f = 0; f < folds; ++f) {
    std::vector<Index> tr, va;
    for (std::size_t j = 0; j < fold.size(); ++j) (fold[j] == f ? va : tr).push_back(static_cast<Index>(j));
    const LabeledDataset fit_part = subset(train, tr);
    const LabeledDataset val_part = subset(train, va);
    const PreprocessState pre = fit_preprocess(fit_part, cfg.preprocess);
    const Eigen::MatrixXd A = apply_preprocess(pre, fit_part.features);
    const Eigen::MatrixXd B = apply_preprocess(pre, val_part.features);
    std::vector<AnyModel> models;
    try {
      models = fit_path(cfg, A, fit_part.labels, cv.grid);
    } catch (const Error& e) {
      fail(e.kind(), "cross-validation fold " + std::to_string(f + 1) + ": " + e.what());
    }
    for (std::size_t g = 0; g < models.size(); ++g) {
      cv.fold_errors[g][static_cast<std::size_t>(f)] = error_percent(predict_any(models[g], B).labels, val_part.labels);
    }
  }

  cv.mean_errors.resize(cv.grid.size());
  for (std::size_t g = 0; g < cv.grid.size(); ++g) {
    double s = 0;
    for (const double e : cv.fold_errors[g]) s += e;
    cv.mean_errors[g] = s / folds;
  }
  const double best = *std::min_element(cv.mean_errors.begin(), cv.mean_errors.end());
  cv.chosen = std::numeric_limits<double>::infinity();
  for (std::size_t g = 0; g < cv.grid.size(); ++g) {
    if (cv.mean_errors[g] <= best + 1e-9) cv.chosen = std::min(cv.chosen, cv.grid[g]);
  }
  return cv;
}

TrainedModel train_model(const LabeledDataset& train, const ExperimentConfig& cfg) {
  TrainedModel m;
  m.kind = cfg.classifier;
  m.label_names = train.label_names;
  double lambda = kDefaultLambda;
  if (cfg.lambda) {
    lambda = *cfg.lambda;
  } else if (cfg.classifier != ClassifierKind::Knn) {
    m.cv = cross_validate(train, cfg);
    lambda = m.cv->chosen;
  }
  m.preprocess = fit_preprocess(train, cfg.preprocess);
  const Eigen::MatrixXd A = apply_preprocess(m.preprocess, train.features);
  const double grid[1] = {lambda};
  m.model = std::move(fit_path(cfg, A, train.labels, grid).front());
  return m;
}

Prediction<double> predict(const TrainedModel& model, const Eigen::MatrixXd& raw_features) {
  return predict_any(model.model, apply_preprocess(model.preprocess, raw_features));
}

LabeledDataset align_labels(const LabeledDataset& ds, const std::vector<std::string>& names) {
  std::map<std::string, int> id;
  for (std::size_t i = 0; i < names.size(); ++i) id.emplace(names[i], static_cast<int>(i) + 1);
  LabeledDataset out = ds;
  for (std::size_t j = 0; j < ds.labels.size(); ++j) {
    const std::string& raw = ds.label_names.at(static_cast<std::size_t>(ds.labels[j] - 1));
    const auto it = id.find(raw);
    if (it == id.end()) {
      fail(ErrorKind::LabelOutOfRange, "sample " + std::to_string(j + 1) + " has label '" + raw +
                                           "' unknown to the model");
    }
    out.labels[j] = it->second;
  }
  out.label_names = names;
  out.class_count = static_cast<int>(names.size());
  return out;
}

// ---------------------------------------------------------------- benchmark

namespace {

struct Prepared {
  LabeledDataset train, test;
};

Prepared prepare(const ExperimentConfig& cfg) {
  if (cfg.data_path.empty()) fail(ErrorKind::InvalidArgument, "no data path configured");
  LabeledDataset ds = load_dataset(cfg.data_path, cfg.load);
  if (!cfg.test_path.empty()) {
    LoadOptions lo = cfg.load;
    if (lo.format == DataFormat::Libsvm && !lo.feature_count) lo.feature_count = ds.dimension();
    LabeledDataset test = align_labels(load_dataset(cfg.test_path, lo), ds.label_names);
    if (test.dimension() != ds.dimension()) {
      fail(ErrorKind::InconsistentDimension, "test data has " + std::to_string(test.dimension()) +
                                                 " features, training data " + std::to_string(ds.dimension()));
    }
    return {std::move(ds), std::move(test)};
  }
  auto sp = split(ds, cfg.split);
  return {std::move(sp.train), std::move(sp.test)};
}

struct Run {
  BenchmarkReport report;
  TrainedModel model;
};

Run execute(const ExperimentConfig& cfg, const Prepared& data) {
  Run run;
  BenchmarkReport& r = run.report;
  r.config = cfg;
  r.train_size = data.train.size();
  r.test_size = data.test.size();
  r.dimension = data.train.dimension();
  r.class_count = data.train.class_count;

  ExperimentConfig fixed = cfg;
  auto t0 = Clock::now();
  if (!cfg.lambda && cfg.classifier != ClassifierKind::Knn) {
    r.cv = cross_validate(data.train, cfg);
    fixed.lambda = r.cv->chosen;
  }
  r.timing.cv_seconds = seconds_since(t0);
  t0 = Clock::now();
  run.model = train_model(data.train, fixed);
  run.model.cv = r.cv;
  r.timing.train_seconds = seconds_since(t0);
  r.chosen_lambda = run.model.lambda();

  t0 = Clock::now();
  const auto pred = predict(run.model, data.test.features);
  r.timing.predict_seconds = seconds_since(t0);
  r.test_error_percent = error_percent(pred.labels, data.test.labels);
  r.train_error_percent = error_percent(predict(run.model, data.train.features).labels, data.train.labels);

  if (const auto* nm = std::get_if<NrbfnModel<double>>(&run.model.model)) {
    r.basis_size = nm->basis_size();
    r.basis_fraction_percent = 100.0 * static_cast<double>(nm->basis_size()) / static_cast<double>(r.train_size);
  }
  if (cfg.diagnostics && cfg.classifier != ClassifierKind::Knn) r.diagnostics = diagnose(run.model, data.train);
  return run;
}

}  // namespace

BenchmarkReport run_benchmark(const ExperimentConfig& cfg) { return execute(cfg, prepare(cfg)).report; }

json to_json(const CvResult& cv) {
  return {{"grid", cv.grid},   {"fold_errors", cv.fold_errors}, {"mean_errors", cv.mean_errors},
          {"chosen", cv.chosen}, {"folds", cv.folds},           {"seed", cv.seed}};
}

namespace {

CvResult cv_from_json(const json& j) {
  CvResult cv;
  cv.grid = j.at("grid").get<std::vector<double>>();
  cv.fold_errors = j.at("fold_errors").get<std::vector<std::vector<double>>>();
  cv.mean_errors = j.at("mean_errors").get<std::vector<double>>();
  cv.chosen = j.at("chosen").get<double>();
  cv.folds = j.at("folds").get<int>();
  cv.seed = j.at("seed").get<std::uint64_t>();
  return cv;
}

}  // namespace

json to_json(const BenchmarkReport& r) {
  json j;
  j["schema_version"] = kReportSchemaVersion;
  j["library_version"] = std::string(kLibraryVersion);
  j["seed"] = r.config.seed;
  j["split_seed"] = r.config.split.seed;
  j["config"] = to_json(r.config);
  j["dataset"] = {{"train_size", r.train_size},
                  {"test_size", r.test_size},
                  {"dimension", r.dimension},
                  {"class_count", r.class_count}};
  j["chosen_lambda"] = r.chosen_lambda;
  j["cv"] = r.cv ? to_json(*r.cv) : json(nullptr);
  j["test_error_percent"] = r.test_error_percent;
  j["train_error_percent"] = r.train_error_percent;
  j["basis_size"] = r.basis_size ? json(*r.basis_size) : json(nullptr);
  j["basis_fraction_percent"] = r.basis_fraction_percent ? json(*r.basis_fraction_percent) : json(nullptr);
  j["timing"] = {{"cv_seconds", r.timing.cv_seconds},
                 {"train_seconds", r.timing.train_seconds},
                 {"predict_seconds", r.timing.predict_seconds},
                 {"total_seconds", r.timing.total_seconds()}};
  j["diagnostics"] = r.diagnostics;
  return j;
}

BenchmarkReport report_from_json(const json& j) {
  try {
    if (j.at("schema_version").get<int>() != kReportSchemaVersion) {
      fail(ErrorKind::ParseError, "report: unsupported schema version");
    }
    BenchmarkReport r;
    r.config = config_from_json(j.at("config"));
    const json& d = j.at("dataset");
    r.train_size = d.at("train_size").get<Index>();
    r.test_size = d.at("test_size").get<Index>();
    r.dimension = d.at("dimension").get<Index>();
    r.class_count = d.at("class_count").get<int>();
    r.chosen_lambda = j.at("chosen_lambda").get<double>();
    if (!j.at("cv").is_null()) r.cv = cv_from_json(j.at("cv"));
    r.test_error_percent = j.at("test_error_percent").get<double>();
    r.train_error_percent = j.at("train_error_percent").get<double>();
    if (!j.at("basis_size").is_null()) r.basis_size = j.at("basis_size").get<Index>();
    if (!j.at("basis_fraction_percent").is_null()) r.basis_fraction_percent = j.at("basis_fraction_percent").get<double>();
    const json& t = j.at("timing");
    r.timing.cv_seconds = t.at("cv_seconds").get<double>();
    r.timing.train_seconds = t.at("train_seconds").get<double>();
    r.timing.predict_seconds = t.at("predict_seconds").get<double>();
    r.diagnostics = j.at("diagnostics");
    return r;
  } catch (const json::exception& e) {
    fail(ErrorKind::ParseError, std::string("report: ") + e.what());
  }
}

// ---------------------------------------------------------------- sweeps

SweepAxis parse_sweep_axis(std::string_view name) {
  if (name == "lambda") return SweepAxis::Lambda;
  if (name == "t") return SweepAxis::T;
  if (name == "k") return SweepAxis::K;
  fail(ErrorKind::InvalidArgument, "unknown sweep axis '" + std::string(name) + "' (lambda, t, k)");
}

std::string_view to_string(SweepAxis a) {
  switch (a) {
    case SweepAxis::Lambda: return "lambda";
    case SweepAxis::T: return "t";
    case SweepAxis::K: return "k";
  }
  return "?";
}

std::vector<SweepRow> parameter_sweep(const ExperimentConfig& cfg, SweepAxis axis, const std::vector<double>& values) {
  if (values.empty()) fail(ErrorKind::InvalidArgument, "sweep: no values");
  const Prepared data = prepare(cfg);
  std::vector<SweepRow> rows;
  for (const double v : values) {
    ExperimentConfig c = cfg;
    c.diagnostics = false;
    c.lambda = cfg.lambda.value_or(kDefaultLambda);
    switch (axis) {
      case SweepAxis::Lambda: c.lambda = v; break;
      case SweepAxis::T: c.t = v; break;
      case SweepAxis::K:
        if (v < 1 || v != std::floor(v)) fail(ErrorKind::InvalidArgument, "sweep: k values must be positive integers");
        c.k = static_cast<Index>(v);
        break;
    }
    const auto t0 = Clock::now();
    const Run run = execute(c, data);
    SweepRow row;
    row.value = v;
    row.test_error = run.report.test_error_percent;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    row.epsilon = row.gamma = row.basis_fraction = nan;
    if (const auto* nm = std::get_if<NrbfnModel<double>>(&run.model.model)) {
      row.epsilon = nm->training_diagnostics.epsilon;
      row.gamma = nm->training_diagnostics.gamma_infinite ? std::numeric_limits<double>::infinity()
                                                          : nm->training_diagnostics.gamma;
      row.basis_fraction = *run.report.basis_fraction_percent;
    } else if (const auto* lm = std::get_if<LrcModel<double>>(&run.model.model)) {
      const Eigen::MatrixXd A = apply_preprocess(run.model.preprocess, data.train.features);
      const auto rep = risk_report(to_indicator<double>(data.train.labels, lm->class_count), lrc_design(*lm, A),
                                   lm->lambda, {}, &lm->D);
      row.epsilon = rep.epsilon;
      row.gamma = rep.gamma_infinite ? std::numeric_limits<double>::infinity() : rep.gamma;
    }
    const double lambda = run.model.lambda();
    row.lambda_gamma = lambda * row.gamma;
    row.tradeoff = row.epsilon + row.lambda_gamma;
    row.seconds = seconds_since(t0);
    rows.push_back(row);
  }
  return rows;
}

void write_sweep_csv(std::ostream& out, SweepAxis axis, const std::vector<SweepRow>& rows) {
  out << to_string(axis) << ",test_error,epsilon,gamma,lambda_gamma,epsilon_plus_lambda_gamma,basis_fraction,seconds\n";
  const auto old = out.precision(17);
  for (const auto& r : rows) {
    out << r.value << ',' << r.test_error << ',' << r.epsilon << ',' << r.gamma << ',' << r.lambda_gamma << ','
        << r.tradeoff << ',' << r.basis_fraction << ',' << r.seconds << '\n';
  }
  out.precision(old);
}

// ---------------------------------------------------------------- diagnostics json

json to_json(const RiskReport<double>& r) {
  json j = {{"f", r.f},
            {"epsilon", r.epsilon},
            {"alpha", r.alpha},
            {"gamma", r.gamma_infinite ? json(nullptr) : finite_or_null(r.gamma)},
            {"gamma_infinite", r.gamma_infinite},
            {"lambda", r.lambda},
            {"lambda_prime", r.lambda_prime},
            {"fit_norm_sq", r.fit_norm_sq},
            {"objective", r.objective},
            {"tradeoff_value", finite_or_null(r.tradeoff_value)},
            {"identity_residual_abs", finite_or_null(r.identity_residual_abs)},
            {"identity_residual_rel", finite_or_null(r.identity_residual_rel)}};
  if (r.unregularized_reading) {
    j["unregularized_reading"] = {{"lhs", finite_or_null(r.unregularized_reading->lhs)},
                                  {"rhs", finite_or_null(r.unregularized_reading->rhs)}};
  } else {
    j["unregularized_reading"] = nullptr;
  }
  return j;
}

namespace {

RiskReport<double> risk_from_json(const json& j) {
  RiskReport<double> r;
  r.f = j.at("f").get<double>();
  r.epsilon = j.at("epsilon").get<double>();
  r.alpha = j.at("alpha").get<double>();
  r.gamma_infinite = j.at("gamma_infinite").get<bool>();
  r.gamma = number_or_inf(j.at("gamma"));
  r.lambda = j.at("lambda").get<double>();
  r.lambda_prime = j.at("lambda_prime").get<double>();
  r.fit_norm_sq = j.at("fit_norm_sq").get<double>();
  r.objective = j.at("objective").get<double>();
  r.tradeoff_value = number_or_inf(j.at("tradeoff_value"));
  r.identity_residual_abs = number_or_inf(j.at("identity_residual_abs"));
  r.identity_residual_rel = number_or_inf(j.at("identity_residual_rel"));
  if (!j.at("unregularized_reading").is_null()) {
    const json& u = j.at("unregularized_reading");
    r.unregularized_reading = UnregularizedReading<double>{number_or_inf(u.at("lhs")), number_or_inf(u.at("rhs"))};
  }
  return r;
}

json to_json(const BoundCheck<double>& b) {
  return {{"measured", finite_or_null(b.measured)},
          {"bound", finite_or_null(b.bound)},
          {"slack", finite_or_null(b.slack)},
          {"holds", b.holds}};
}

json to_json(const IdealCheck<double>& c) {
  return {{"ideal", c.ideal}, {"max_violation", c.max_violation}};
}

}  // namespace

json to_json(const NrbfnDiagnosis<double>& d) {
  json j;
  j["kind"] = "nrbfn";
  j["risk"] = to_json(d.report);
  j["ideal_condition"] = to_json(d.ideal);
  j["class_counts"] = d.class_counts;
  j["basis_counts"] = d.basis_counts;
  j["ideal_bounds"] = {{"lower", d.ideal_bounds.lower},
                       {"upper", d.ideal_bounds.upper},
                       {"applicable", d.ideal.ideal},
                       {"hold", d.ideal_bounds_hold}};
  if (d.perturbation) {
    const auto& p = *d.perturbation;
    j["perturbation"] = {{"xi", finite_or_null(p.stats.xi)},
                         {"delta", finite_or_null(p.stats.delta)},
                         {"n_rho", p.stats.n_rho},
                         {"r_rho", p.stats.r_rho},
                         {"condition_met", p.stats.condition_met},
                         {"ideal_gamma", finite_or_null(p.ideal_gamma)},
                         {"epsilon", to_json(p.epsilon)},
                         {"gamma", to_json(p.gamma)}};
  } else {
    j["perturbation"] = nullptr;
  }
  j["perturbation_note"] = d.perturbation_note;
  return j;
}

json to_json(const LrcDiagnosis<double>& d) {
  json j;
  j["kind"] = "lrc";
  j["risk"] = to_json(d.report);
  j["beta"] = d.beta;
  j["ideal_condition"] = to_json(d.ideal);
  if (d.ideal_risk) {
    const auto& r = *d.ideal_risk;
    j["ideal_risk"] = {{"gamma", r.gamma},         {"lower", r.lower},       {"upper", r.upper},
                       {"zeta_bar", r.zeta_bar},   {"beta", r.beta},         {"zeta_rho", r.zeta_rho},
                       {"cos_theta_u", r.cos_theta_u}};
  } else {
    j["ideal_risk"] = nullptr;
  }
  return j;
}

json diagnose(const TrainedModel& model, const LabeledDataset& data, bool unregularized_reading) {
  if (data.class_count != model.class_count()) {
    fail(ErrorKind::LabelOutOfRange, "diagnose: data has " + std::to_string(data.class_count) +
                                         " classes, the model " + std::to_string(model.class_count()));
  }
  const Eigen::MatrixXd A = apply_preprocess(model.preprocess, data.features);
  RiskOptions opt;
  opt.unregularized_reading = unregularized_reading;
  if (const auto* nm = std::get_if<NrbfnModel<double>>(&model.model)) {
    return to_json(nrbfn_risk_report(*nm, A, data.labels, opt));
  }
  if (const auto* lm = std::get_if<LrcModel<double>>(&model.model)) {
    return to_json(lrc_risk_report(*lm, A, data.labels, opt));
  }
  fail(ErrorKind::InvalidArgument, "diagnose: the knn baseline has no risk report");
}

// ---------------------------------------------------------------- model files

namespace {

constexpr char kMagic[8] = {'S', 'G', 'C', 'M', 'O', 'D', 'E', 'L'};
constexpr std::uint32_t kModelFormatVersion = 1;

void put_u64(std::ostream& out, std::uint64_t v) {
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  out.write(b, 8);
}

void put_u32(std::ostream& out, std::uint32_t v) {
  char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  out.write(b, 4);
}

std::uint64_t get_uint(std::istream& in, int bytes) {
  unsigned char b[8] = {};
  if (!in.read(reinterpret_cast<char*>(b), bytes)) fail(ErrorKind::ModelFormat, "model file truncated");
  std::uint64_t v = 0;
  for (int i = bytes - 1; i >= 0; --i) v = (v << 8) | b[i];
  return v;
}

void put_matrix(std::ostream& out, const Eigen::MatrixXd& m) {
  put_u64(out, static_cast<std::uint64_t>(m.rows()));
  put_u64(out, static_cast<std::uint64_t>(m.cols()));
  for (Index i = 0; i < m.size(); ++i) put_u64(out, std::bit_cast<std::uint64_t>(m.data()[i]));
}

Eigen::MatrixXd get_matrix(std::istream& in) {
  const std::uint64_t rows = get_uint(in, 8), cols = get_uint(in, 8);
  if (rows > (1u << 30) || cols > (1u << 30) || (rows * cols) > (std::uint64_t{1} << 31)) {
    fail(ErrorKind::ModelFormat, "model file: implausible matrix size");
  }
  Eigen::MatrixXd m(static_cast<Index>(rows), static_cast<Index>(cols));
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = std::bit_cast<double>(get_uint(in, 8));
  return m;
}

std::uint32_t kind_code(ClassifierKind k) { return static_cast<std::uint32_t>(k); }

}  // namespace

void write_model(const TrainedModel& model, std::ostream& out) {
  json meta;
  meta["library_version"] = std::string(kLibraryVersion);
  meta["kind"] = std::string(to_string(model.kind));
  meta["label_names"] = model.label_names;
  meta["lambda"] = model.lambda();
  meta["preprocess"] = {{"mean_remove", model.preprocess.options.mean_remove},
                        {"unit_length", model.preprocess.options.unit_length}};
  meta["cv"] = model.cv ? to_json(*model.cv) : json(nullptr);
  std::vector<Eigen::MatrixXd> mats;
  std::visit(
      [&](const auto& m) {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, NrbfnModel<double>>) {
          meta["matrices"] = {"G", "X"};
          meta["sigma"] = m.sigma;
          meta["class_count"] = m.class_count;
          meta["k"] = m.k;
          meta["t"] = m.t;
          meta["training_size"] = m.training_size;
          meta["basis_labels"] = m.basis_labels;
          meta["basis_indices"] = m.basis_indices;
          meta["training_diagnostics"] = to_json(m.training_diagnostics);
          mats = {m.G, m.X};
        } else if constexpr (std::is_same_v<M, LrcModel<double>>) {
          meta["matrices"] = {"D", "mean"};
          meta["class_count"] = m.class_count;
          mats = {m.D, Eigen::MatrixXd(m.mean)};
        } else {
          meta["matrices"] = {"reference"};
          meta["class_count"] = m.class_count;
          meta["k"] = m.k;
          meta["labels"] = m.labels;
          mats = {m.reference};
        }
      },
      model.model);
  meta["matrices"].push_back("preprocess_mean");
  mats.emplace_back(model.preprocess.mean);

  const std::string text = meta.dump();
  out.write(kMagic, sizeof kMagic);
  put_u32(out, kModelFormatVersion);
  put_u32(out, kind_code(model.kind));
  put_u64(out, text.size());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  put_u32(out, static_cast<std::uint32_t>(mats.size()));
  for (const auto& m : mats) put_matrix(out, m);
  if (!out) fail(ErrorKind::IoError, "failed writing model");
}

TrainedModel read_model(std::istream& in) {
  char magic[8];
  if (!in.read(magic, 8) || !std::equal(magic, magic + 8, kMagic)) {
    fail(ErrorKind::ModelFormat, "not a model file (bad magic)");
  }
  const auto version = get_uint(in, 4);
  if (version != kModelFormatVersion) {
    fail(ErrorKind::ModelFormat, "unsupported model format version " + std::to_string(version));
  }
  const auto code = get_uint(in, 4);
  if (code > 2) fail(ErrorKind::ModelFormat, "unknown classifier code " + std::to_string(code));
  const auto len = get_uint(in, 8);
  if (len > (std::uint64_t{1} << 32)) fail(ErrorKind::ModelFormat, "implausible metadata length");
  std::string text(static_cast<std::size_t>(len), '\0');
  if (!in.read(text.data(), static_cast<std::streamsize>(len))) fail(ErrorKind::ModelFormat, "model file truncated");
  const auto count = get_uint(in, 4);
  if (count > 16) fail(ErrorKind::ModelFormat, "implausible matrix count");
  std::vector<Eigen::MatrixXd> mats;
  for (std::uint64_t i = 0; i < count; ++i) mats.push_back(get_matrix(in));

  TrainedModel m;
  try {
    const json meta = json::parse(text);
    m.kind = static_cast<ClassifierKind>(code);
    if (parse_classifier(meta.at("kind").get<std::string>()) != m.kind) {
      fail(ErrorKind::ModelFormat, "classifier kind mismatch between header and metadata");
    }
    m.label_names = meta.at("label_names").get<std::vector<std::string>>();
    m.preprocess.options.mean_remove = meta.at("preprocess").at("mean_remove").get<bool>();
    m.preprocess.options.unit_length = meta.at("preprocess").at("unit_length").get<bool>();
    if (!meta.at("cv").is_null()) m.cv = cv_from_json(meta.at("cv"));
    const auto names = meta.at("matrices").get<std::vector<std::string>>();
    if (names.size() != mats.size()) fail(ErrorKind::ModelFormat, "matrix count does not match metadata");
    auto mat = [&](const std::string& name) -> const Eigen::MatrixXd& {
      const auto it = std::find(names.begin(), names.end(), name);
      if (it == names.end()) fail(ErrorKind::ModelFormat, "missing matrix " + name);
      return mats[static_cast<std::size_t>(it - names.begin())];
    };
    m.preprocess.mean = mat("preprocess_mean");
    switch (m.kind) {
      case ClassifierKind::Nrbfn: {
        NrbfnModel<double> n;
        n.G = mat("G");
        n.X = mat("X");
        n.sigma = meta.at("sigma").get<double>();
        n.lambda = meta.at("lambda").get<double>();
        n.class_count = meta.at("class_count").get<int>();
        n.k = meta.at("k").get<Index>();
        n.t = meta.at("t").get<double>();
        n.training_size = meta.at("training_size").get<Index>();
        n.basis_labels = meta.at("basis_labels").get<std::vector<int>>();
        n.basis_indices = meta.at("basis_indices").get<std::vector<Index>>();
        n.training_diagnostics = risk_from_json(meta.at("training_diagnostics"));
        if (n.X.rows() != n.class_count || n.X.cols() != n.G.cols() ||
            static_cast<Index>(n.basis_labels.size()) != n.G.cols()) {
          fail(ErrorKind::ModelFormat, "inconsistent nrbfn shapes");
        }
        m.model = std::move(n);
        break;
      }
      case ClassifierKind::Lrc: {
        LrcModel<double> l;
        l.D = mat("D");
        const Eigen::MatrixXd& mean = mat("mean");
        if (mean.cols() != 1) fail(ErrorKind::ModelFormat, "lrc mean must be a column");
        l.mean = mean.col(0);
        l.lambda = meta.at("lambda").get<double>();
        l.class_count = meta.at("class_count").get<int>();
        if (l.D.rows() != l.class_count || l.D.cols() != l.mean.size() + 1) {
          fail(ErrorKind::ModelFormat, "inconsistent lrc shapes");
        }
        m.model = std::move(l);
        break;
      }
      case ClassifierKind::Knn: {
        KnnModel k;
        k.reference = mat("reference");
        k.labels = meta.at("labels").get<std::vector<int>>();
        k.class_count = meta.at("class_count").get<int>();
        k.k = meta.at("k").get<Index>();
        if (static_cast<Index>(k.labels.size()) != k.reference.cols()) {
          fail(ErrorKind::ModelFormat, "inconsistent knn shapes");
        }
        m.model = std::move(k);
        break;
      }
    }
  } catch (const json::exception& e) {
    fail(ErrorKind::ModelFormat, std::string("model metadata: ") + e.what());
  }
  if (m.class_count() < 1) fail(ErrorKind::ModelFormat, "model has no classes");
  return m;
}

void save_model(const TrainedModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::IoError, "cannot write " + path.string());
  write_model(model, out);
}

TrainedModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::IoError, "cannot open model " + path.string());
  return read_model(in);
}

}  // namespace sgc
