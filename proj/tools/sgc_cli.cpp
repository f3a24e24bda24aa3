#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "sgc/harness.hpp"

namespace {

using nlohmann::json;

sgc::DataFormat guess_format(const std::string& path, const std::string& flag) {
  if (!flag.empty()) return sgc::parse_data_format(flag);
  const auto ext = std::filesystem::path(path).extension().string();
  return ext == ".csv" ? sgc::DataFormat::Csv : sgc::DataFormat::Libsvm;
}

std::vector<double> parse_values(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      sgc::fail(sgc::ErrorKind::InvalidArgument, "cannot parse value '" + item + "'");
    }
  }
  if (out.empty()) sgc::fail(sgc::ErrorKind::InvalidArgument, "no values given");
  return out;
}

void emit(const json& j, const std::string& path) {
  if (path.empty()) {
    std::cout << j.dump(2) << '\n';
    return;
  }
  std::ofstream out(path);
  if (!out) sgc::fail(sgc::ErrorKind::IoError, "cannot write " + path);
  out << j.dump(2) << '\n';
}

struct DataArgs {
  std::string path, format;
  int label_column = 0;
};

void add_data_options(CLI::App* cmd, DataArgs& d) {
  cmd->add_option("--data", d.path, "dataset file")->required();
  cmd->add_option("--format", d.format, "csv or libsvm (default: by extension)");
  cmd->add_option("--label-column", d.label_column, "csv label column, -1 = last");
}

sgc::LabeledDataset load(const DataArgs& d, std::optional<Eigen::Index> feature_count = {}) {
  sgc::LoadOptions lo;
  lo.format = guess_format(d.path, d.format);
  lo.label_column = d.label_column;
  if (lo.format == sgc::DataFormat::Libsvm) lo.feature_count = feature_count;
  return sgc::load_dataset(d.path, lo);
}

Eigen::Index model_dimension(const sgc::TrainedModel& m) {
  return std::visit(
      [](const auto& x) -> Eigen::Index {
        if constexpr (std::is_same_v<std::decay_t<decltype(x)>, sgc::KnnModel>) {
          return x.reference.rows();
        } else {
          return x.dimension();
        }
      },
      m.model);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral graph classifiers: nRBFN, LRC and risk diagnostics"};
  app.require_subcommand(1);
  app.fallthrough();
  std::uint64_t seed = 0;
  bool seed_set = false;
  app.add_option_function<std::uint64_t>(
         "--seed", [&](std::uint64_t s) { seed = s, seed_set = true; }, "seed for random splits and CV folds")
      ->configurable();
  app.set_version_flag("--version", std::string(sgc::kLibraryVersion));

  // train
  auto* train = app.add_subcommand("train", "train a model on a whole dataset");
  DataArgs train_data;
  add_data_options(train, train_data);
  std::string model_out, classifier = "nrbfn";
  double lambda = sgc::kDefaultLambda, t = 0.9;
  Eigen::Index k = 20;
  std::optional<Eigen::Index> basis_size;
  bool use_cv = false, mean_remove = false, unit_length = false;
  int folds = 5;
  train->add_option("--model-out", model_out, "output model file")->required();
  auto* lambda_opt = train->add_option("--lambda", lambda, "fixed regularization (default 1e-13)");
  train->add_flag("--cv", use_cv, "cross-validate lambda over the default grid")->excludes(lambda_opt);
  train->add_option("--t", t, "soft-KNN confidence threshold");
  train->add_option("--k", k, "neighbours for soft-KNN or the knn baseline");
  train->add_option("--basis-size", basis_size, "fixed number of basis vectors");
  train->add_option("--classifier", classifier, "nrbfn, lrc or knn");
  train->add_option("--folds", folds, "cross-validation folds");
  train->add_flag("--mean-remove", mean_remove, "subtract the training mean");
  train->add_flag("--unit-length", unit_length, "scale samples to unit length");

  // predict
  auto* pred = app.add_subcommand("predict", "predict labels with a saved model");
  DataArgs pred_data;
  add_data_options(pred, pred_data);
  std::string model_in, pred_out;
  pred->add_option("--model", model_in, "model file")->required();
  pred->add_option("--out", pred_out, "predictions csv")->required();

  // bench
  auto* bench = app.add_subcommand("bench", "run a benchmark from a JSON config");
  std::string config_path, bench_out;
  bench->add_option("--config", config_path, "experiment config")->required()->check(CLI::ExistingFile);
  bench->add_option("--out", bench_out, "report path (default: config output or stdout)");

  // sweep
  auto* sweep = app.add_subcommand("sweep", "vary one parameter and record error and risk");
  std::string axis, values, sweep_config, sweep_out;
  sweep->add_option("--axis", axis, "lambda, t or k")->required();
  sweep->add_option("--values", values, "comma separated values")->required();
  sweep->add_option("--config", sweep_config, "experiment config")->required()->check(CLI::ExistingFile);
  sweep->add_option("--out", sweep_out, "csv path (default stdout)");

  // diagnose
  auto* diag = app.add_subcommand("diagnose", "risk report and bound checks of a model on labelled data");
  DataArgs diag_data;
  add_data_options(diag, diag_data);
  std::string diag_model, diag_out;
  diag->add_option("--model", diag_model, "model file")->required();
  diag->add_option("--out", diag_out, "report path (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train) {
      sgc::ExperimentConfig cfg;
      cfg.data_path = train_data.path;
      cfg.classifier = sgc::parse_classifier(classifier);
      cfg.k = k;
      cfg.t = t;
      cfg.basis_size = basis_size;
      cfg.cv_folds = folds;
      cfg.seed = seed;
      cfg.preprocess = {mean_remove, unit_length};
      if (!use_cv) cfg.lambda = lambda;
      const auto ds = load(train_data);
      const auto model = sgc::train_model(ds, cfg);
      sgc::save_model(model, model_out);
      json summary = {{"classifier", std::string(sgc::to_string(model.kind))},
                      {"lambda", model.lambda()},
                      {"training_size", ds.size()},
                      {"class_count", model.class_count()},
                      {"model", model_out}};
      if (model.cv) summary["cv"] = sgc::to_json(*model.cv);
      if (const auto* nm = std::get_if<sgc::NrbfnModel<double>>(&model.model)) {
        summary["basis_size"] = nm->basis_size();
        summary["sigma"] = nm->sigma;
      }
      std::cout << summary.dump(2) << '\n';
    } else if (*pred) {
      const auto model = sgc::load_model(model_in);
      const auto ds = load(pred_data, model_dimension(model));
      const auto p = sgc::predict(model, ds.features);
      std::ofstream out(pred_out);
      if (!out) sgc::fail(sgc::ErrorKind::IoError, "cannot write " + pred_out);
      out.precision(17);
      out << "index,label";
      for (int c = 1; c <= model.class_count(); ++c) out << ",score_" << c;
      out << '\n';
      for (std::size_t j = 0; j < p.labels.size(); ++j) {
        out << j + 1 << ',' << model.label_names[static_cast<std::size_t>(p.labels[j] - 1)];
        for (Eigen::Index c = 0; c < p.scores.rows(); ++c) out << ',' << p.scores(c, static_cast<Eigen::Index>(j));
        out << '\n';
      }
      json summary = {{"samples", ds.size()}, {"predictions", pred_out}};
      try {
        const auto aligned = sgc::align_labels(ds, model.label_names);
        summary["error_percent"] = sgc::error_percent(p.labels, aligned.labels);
      } catch (const sgc::Error&) {
        summary["error_percent"] = nullptr;
      }
      std::cout << summary.dump(2) << '\n';
    } else if (*bench) {
      auto cfg = sgc::load_config(config_path);
      if (seed_set) cfg.seed = cfg.split.seed = seed;
      const auto report = sgc::run_benchmark(cfg);
      const json j = sgc::to_json(report);
      emit(j, bench_out.empty() ? cfg.output_path : bench_out);
      if (bench_out.empty() && !cfg.output_path.empty()) std::cout << j.dump(2) << '\n';
    } else if (*sweep) {
      auto cfg = sgc::load_config(sweep_config);
      if (seed_set) cfg.seed = cfg.split.seed = seed;
      const auto rows = sgc::parameter_sweep(cfg, sgc::parse_sweep_axis(axis), parse_values(values));
      if (sweep_out.empty()) {
        sgc::write_sweep_csv(std::cout, sgc::parse_sweep_axis(axis), rows);
      } else {
        std::ofstream out(sweep_out);
        if (!out) sgc::fail(sgc::ErrorKind::IoError, "cannot write " + sweep_out);
        sgc::write_sweep_csv(out, sgc::parse_sweep_axis(axis), rows);
      }
    } else if (*diag) {
      const auto model = sgc::load_model(diag_model);
      const auto ds = sgc::align_labels(load(diag_data, model_dimension(model)), model.label_names);
      emit(sgc::diagnose(model, ds), diag_out);
    }
  } catch (const sgc::Error& e) {
    std::cerr << json{{"error", std::string(sgc::to_string(e.kind()))}, {"message", e.what()}}.dump() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << json{{"error", "Internal"}, {"message", e.what()}}.dump() << '\n';
    return 3;
  }
  return 0;
}
