#pragma once

// Experiment orchestration: configuration, cross-validation over lambda,
// benchmark runs, parameter sweeps, the KNN reference classifier and model
// persistence.

#include <cstdint>
#include <filesystem>
#include <bit>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "json.hpp"
#include "sgc/data_io.hpp"
#include "sgc/lrc.hpp"
#include "sgc/model_diagnostics.hpp"
#include "sgc/nrbfn.hpp"

namespace sgc {

inline constexpr std::string_view kLibraryVersion = "0.1.0";
inline constexpr int kReportSchemaVersion = 1;
inline constexpr double kDefaultLambda = 1e-13;

enum class ClassifierKind { Nrbfn, Lrc, Knn };

ClassifierKind parse_classifier(std::string_view name);
std::string_view to_string(ClassifierKind k);

/// {1e-5, 1e-9, 1e-13} for nRBFN, 10^{-13..-2} for LRC, {0} (unused) for KNN.
std::vector<double> default_lambda_grid(ClassifierKind k);

struct ExperimentConfig {
  std::string name;
  std::string data_path;
  std::string test_path;  // optional separate test file; the split is skipped when set
  LoadOptions load;
  SplitSpec split;
  ClassifierKind classifier = ClassifierKind::Nrbfn;
  Index k = 20;
  double t = 0.9;
  std::optional<Index> basis_size;
  std::optional<double> lambda;     // fixed value; cross-validated over lambda_grid when unset
  std::vector<double> lambda_grid;  // empty = default grid for the classifier
  int cv_folds = 5;
  std::uint64_t seed = 0;
  PreprocessOptions preprocess;
  bool diagnostics = true;  // attach the model risk report to benchmark results
  std::string output_path;

  std::vector<double> effective_grid() const;
};

ExperimentConfig config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);
nlohmann::json to_json(const ExperimentConfig& cfg);

struct KnnModel {
  Eigen::MatrixXd reference;  // p x n training samples
  std::vector<int> labels;
  int class_count = 0;
  Index k = 20;
};

KnnModel knn_train(const Eigen::MatrixXd& A, std::span<const int> labels, Index k);
/// Majority vote over the k nearest training samples; ties go to the smallest
/// class. Scores are vote fractions.
Prediction<double> knn_predict(const KnnModel& model, const Eigen::MatrixXd& B);

using AnyModel = std::variant<NrbfnModel<double>, LrcModel<double>, KnnModel>;

struct CvResult {
  std::vector<double> grid;
  std::vector<std::vector<double>> fold_errors;  // [lambda][fold], percent
  std::vector<double> mean_errors;
  double chosen = 0;
  int folds = 0;
  std::uint64_t seed = 0;
};

struct TrainedModel {
  ClassifierKind kind = ClassifierKind::Nrbfn;
  AnyModel model;
  PreprocessState preprocess;
  std::vector<std::string> label_names;
  std::optional<CvResult> cv;

  int class_count() const { return static_cast<int>(label_names.size()); }
  double lambda() const;
};

/// Stratified fold id (0-based) per sample; deterministic in seed.
std::vector<int> stratified_folds(std::span<const int> labels, int class_count, int folds, std::uint64_t seed);

/// Picks the grid value with the lowest mean fold error, ties to the smaller
/// lambda. Folds are reduced to the smallest class size when needed.
CvResult cross_validate(const LabeledDataset& train, const ExperimentConfig& cfg);

/// Fits preprocessing on `train`, runs CV when no fixed lambda is set, trains.
TrainedModel train_model(const LabeledDataset& train, const ExperimentConfig& cfg);

/// Applies the stored preprocessing to raw features and predicts.
Prediction<double> predict(const TrainedModel& model, const Eigen::MatrixXd& raw_features);

/// Renumbers ds labels so that class k carries model name names[k - 1].
LabeledDataset align_labels(const LabeledDataset& ds, const std::vector<std::string>& names);

struct Timing {
  double cv_seconds = 0;
  double train_seconds = 0;
  double predict_seconds = 0;
  double total_seconds() const { return cv_seconds + train_seconds + predict_seconds; }
};

struct BenchmarkReport {
  ExperimentConfig config;
  Index train_size = 0, test_size = 0, dimension = 0;
  int class_count = 0;
  double chosen_lambda = 0;
  std::optional<CvResult> cv;
  double test_error_percent = 0;
  double train_error_percent = 0;
  std::optional<Index> basis_size;
  std::optional<double> basis_fraction_percent;
  Timing timing;
  nlohmann::json diagnostics;  // null unless requested and applicable
};

/// The load / split / preprocess / train / predict / diagnose pipeline.
BenchmarkReport run_benchmark(const ExperimentConfig& cfg);
nlohmann::json to_json(const BenchmarkReport& r);
/// Inverse of to_json; the diagnostics object is carried through verbatim.
BenchmarkReport report_from_json(const nlohmann::json& j);

enum class SweepAxis { Lambda, T, K };
SweepAxis parse_sweep_axis(std::string_view name);
std::string_view to_string(SweepAxis a);

struct SweepRow {
  double value = 0;
  double test_error = 0;
  double epsilon = 0;
  double gamma = 0;
  double lambda_gamma = 0;
  double tradeoff = 0;  // eps + lambda gamma
  double basis_fraction = 0;
  double seconds = 0;
};

/// One run per value; the lambda of non-lambda sweeps is cfg.lambda or 1e-13.
std::vector<SweepRow> parameter_sweep(const ExperimentConfig& cfg, SweepAxis axis, const std::vector<double>& values);
void write_sweep_csv(std::ostream& out, SweepAxis axis, const std::vector<SweepRow>& rows);

nlohmann::json to_json(const RiskReport<double>& r);
nlohmann::json to_json(const NrbfnDiagnosis<double>& d);
nlohmann::json to_json(const LrcDiagnosis<double>& d);
nlohmann::json to_json(const CvResult& cv);

/// Diagnosis of a trained model on labelled data (raw features).
nlohmann::json diagnose(const TrainedModel& model, const LabeledDataset& data, bool unregularized_reading = true);

/// Versioned binary container: magic, format version, classifier kind,
/// length-prefixed JSON metadata, then the matrices.
void save_model(const TrainedModel& model, const std::filesystem::path& path);
TrainedModel load_model(const std::filesystem::path& path);
void write_model(const TrainedModel& model, std::ostream& out);
TrainedModel read_model(std::istream& in);

}  // namespace sgc
