#pragma once

// Dataset loading (dense CSV, sparse libsvm), train/test splits and
// preprocessing. Features are stored with samples as columns.

#include <cstdint>
#include <filesystem>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "sgc/errors.hpp"

namespace sgc {

enum class DataFormat { Csv, Libsvm };

DataFormat parse_data_format(std::string_view name);
std::string_view to_string(DataFormat f);

struct LoadOptions {
  DataFormat format = DataFormat::Csv;
  int label_column = 0;             // csv: column holding the label; -1 = last
  std::optional<bool> header;       // csv: auto-detected when unset
  char delimiter = ',';
  std::optional<Eigen::Index> feature_count;  // libsvm: fix p instead of the largest index seen
  Eigen::Index max_entries = 100'000'000;     // p * n cap for densified input
};

struct LabeledDataset {
  Eigen::MatrixXd features;  // p x n
  std::vector<int> labels;   // 1..K
  int class_count = 0;
  std::vector<std::string> label_names;  // label_names[k - 1] is the raw label of class k
  std::string source_path;
  std::vector<std::string> preprocessing_applied;

  Eigen::Index size() const { return features.cols(); }
  Eigen::Index dimension() const { return features.rows(); }
};

LabeledDataset load_dataset(const std::filesystem::path& path, const LoadOptions& options = {});
LabeledDataset parse_csv(std::istream& in, const LoadOptions& options = {});
LabeledDataset parse_libsvm(std::istream& in, const LoadOptions& options = {});

/// Columns `idx` of ds, keeping the class numbering and label names.
LabeledDataset subset(const LabeledDataset& ds, const std::vector<Eigen::Index>& idx);

enum class SplitScheme { FirstHalfPerClass, SeededStratified, ExplicitFile };

SplitScheme parse_split_scheme(std::string_view name);
std::string_view to_string(SplitScheme s);

struct SplitSpec {
  SplitScheme scheme = SplitScheme::FirstHalfPerClass;
  std::uint64_t seed = 0;
  double train_fraction = 0.5;
  std::string index_file;  // explicit scheme: 1-based training sample numbers
};

struct SplitResult {
  LabeledDataset train;
  LabeledDataset test;
  std::vector<Eigen::Index> train_indices;  // 0-based, ascending
  std::vector<Eigen::Index> test_indices;
};

SplitResult split(const LabeledDataset& ds, const SplitSpec& spec);

/// Deterministic permutation of 0..n-1 (Fisher-Yates on mt19937_64).
std::vector<Eigen::Index> seeded_permutation(Eigen::Index n, std::uint64_t seed);

struct PreprocessOptions {
  bool mean_remove = false;
  bool unit_length = false;
};

/// Statistics fitted on training data and replayed on any other data.
struct PreprocessState {
  PreprocessOptions options;
  Eigen::VectorXd mean;  // empty unless mean_remove
};

/// Unit length is applied per column before the mean is taken.
PreprocessState fit_preprocess(const LabeledDataset& train, const PreprocessOptions& options);
void apply_preprocess(const PreprocessState& state, LabeledDataset& ds);
Eigen::MatrixXd apply_preprocess(const PreprocessState& state, const Eigen::MatrixXd& features);

/// fit_preprocess + apply_preprocess on the same data.
std::pair<LabeledDataset, PreprocessState> preprocess(const LabeledDataset& ds, const PreprocessOptions& options);

}  // namespace sgc
