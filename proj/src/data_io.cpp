#include "sgc/data_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <unordered_map>

namespace sgc {

using Eigen::Index;

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  s = s.substr(b, e - b + 1);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return s;
}

std::optional<double> to_double(std::string_view s) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

std::string where(std::size_t line) { return "line " + std::to_string(line); }

double parse_value(std::string_view field, std::size_t line) {
  const auto v = to_double(field);
  if (!v) fail(ErrorKind::ParseError, where(line) + ": cannot parse '" + std::string(field) + "' as a number");
  if (!std::isfinite(*v)) fail(ErrorKind::ParseError, where(line) + ": non-finite value '" + std::string(field) + "'");
  return *v;
}

std::vector<std::string_view> split_fields(std::string_view line, char delim) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(delim, start);
    out.push_back(trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

bool blank_or_comment(std::string_view line) {
  const auto t = trim(line);
  return t.empty() || t.front() == '#';
}

/// Maps raw label strings to 1..K in order of first appearance.
class LabelMap {
 public:
  int operator()(std::string_view raw) {
    auto [it, inserted] = ids_.try_emplace(std::string(raw), static_cast<int>(names_.size()) + 1);
    if (inserted) names_.emplace_back(raw);
    return it->second;
  }
  std::vector<std::string> names() const { return names_; }

 private:
  std::unordered_map<std::string, int> ids_;
  std::vector<std::string> names_;
};

void check_size(Index p, Index n, const LoadOptions& opt) {
  if (n == 0) fail(ErrorKind::EmptyDataset, "no samples found");
  if (p == 0) fail(ErrorKind::EmptyDataset, "no features found");
  if (static_cast<double>(p) * static_cast<double>(n) > static_cast<double>(opt.max_entries)) {
    fail(ErrorKind::DatasetTooLarge, std::to_string(p) + " x " + std::to_string(n) + " exceeds the dense limit of " +
                                         std::to_string(opt.max_entries) + " entries");
  }
}

void finish(LabeledDataset& ds, LabelMap& map) {
  ds.label_names = map.names();
  ds.class_count = static_cast<int>(ds.label_names.size());
  if (ds.class_count < 2) fail(ErrorKind::InvalidArgument, "dataset has fewer than two classes");
}

}  // namespace

DataFormat parse_data_format(std::string_view name) {
  if (name == "csv") return DataFormat::Csv;
  if (name == "libsvm") return DataFormat::Libsvm;
  fail(ErrorKind::InvalidArgument, "unknown data format '" + std::string(name) + "' (expected csv or libsvm)");
}

std::string_view to_string(DataFormat f) { return f == DataFormat::Csv ? "csv" : "libsvm"; }

LabeledDataset parse_csv(std::istream& in, const LoadOptions& opt) {
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  LabelMap map;
  std::string line;
  std::size_t lineno = 0, width = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++lineno;
    if (blank_or_comment(line)) continue;
    const auto fields = split_fields(line, opt.delimiter);
    const int lc = opt.label_column < 0 ? static_cast<int>(fields.size()) - 1 : opt.label_column;
    if (lc < 0 || lc >= static_cast<int>(fields.size())) {
      fail(ErrorKind::ParseError, where(lineno) + ": label column " + std::to_string(opt.label_column) + " out of range");
    }
    if (first) {
      first = false;
      bool is_header = opt.header.value_or(false);
      if (!opt.header) {
        for (std::size_t i = 0; i < fields.size(); ++i) {
          if (static_cast<int>(i) != lc && !to_double(fields[i])) is_header = true;
        }
      }
      width = fields.size();
      if (is_header) continue;
    }
    if (fields.size() != width) {
      fail(ErrorKind::InconsistentDimension, where(lineno) + ": expected " + std::to_string(width) + " fields, found " +
                                                 std::to_string(fields.size()));
    }
    std::vector<double> row;
    row.reserve(fields.size() - 1);
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (static_cast<int>(i) == lc) continue;
      row.push_back(parse_value(fields[i], lineno));
    }
    if (fields[static_cast<std::size_t>(lc)].empty()) fail(ErrorKind::ParseError, where(lineno) + ": empty label");
    labels.push_back(map(fields[static_cast<std::size_t>(lc)]));
    rows.push_back(std::move(row));
  }
  const Index n = static_cast<Index>(rows.size());
  const Index p = width > 0 ? static_cast<Index>(width) - 1 : 0;
  check_size(p, n, opt);
  LabeledDataset ds;
  ds.features.resize(p, n);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < p; ++i) ds.features(i, j) = rows[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)];
  ds.labels = std::move(labels);
  finish(ds, map);
  return ds;
}

LabeledDataset parse_libsvm(std::istream& in, const LoadOptions& opt) {
  struct Entry {
    Index row;
    double value;
  };
  std::vector<std::vector<Entry>> cols;
  std::vector<int> labels;
  LabelMap map;
  std::string line;
  std::size_t lineno = 0;
  Index max_index = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view view(line);
    if (const auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    if (trim(view).empty()) continue;
    std::istringstream tokens{std::string(view)};
    std::string tok;
    tokens >> tok;
    labels.push_back(map(tok));
    std::vector<Entry> col;
    while (tokens >> tok) {
      const auto colon = tok.find(':');
      if (colon == std::string::npos) fail(ErrorKind::ParseError, where(lineno) + ": expected index:value, got '" + tok + "'");
      const std::string_view idx_s(tok.data(), colon);
      long long idx = 0;
      const auto [ptr, ec] = std::from_chars(idx_s.data(), idx_s.data() + idx_s.size(), idx);
      if (ec != std::errc() || ptr != idx_s.data() + idx_s.size() || idx < 1) {
        fail(ErrorKind::ParseError, where(lineno) + ": bad feature index '" + std::string(idx_s) + "'");
      }
      const double v = parse_value(std::string_view(tok).substr(colon + 1), lineno);
      col.push_back({static_cast<Index>(idx - 1), v});
      max_index = std::max(max_index, static_cast<Index>(idx));
    }
    std::sort(col.begin(), col.end(), [](const Entry& a, const Entry& b) { return a.row < b.row; });
    for (std::size_t i = 1; i < col.size(); ++i) {
      if (col[i].row == col[i - 1].row) {
        fail(ErrorKind::ParseError, where(lineno) + ": duplicate feature index " + std::to_string(col[i].row + 1));
      }
    }
    cols.push_back(std::move(col));
  }
  Index p = max_index;
  if (opt.feature_count) {
    if (*opt.feature_count < max_index) {
      fail(ErrorKind::InconsistentDimension, "feature index " + std::to_string(max_index) + " exceeds the declared " +
                                                 std::to_string(*opt.feature_count) + " features");
    }
    p = *opt.feature_count;
  }
  const Index n = static_cast<Index>(cols.size());
  check_size(p, n, opt);
  LabeledDataset ds;
  ds.features = Eigen::MatrixXd::Zero(p, n);
  for (Index j = 0; j < n; ++j)
    for (const auto& e : cols[static_cast<std::size_t>(j)]) ds.features(e.row, j) = e.value;
  ds.labels = std::move(labels);
  finish(ds, map);
  return ds;
}

LabeledDataset load_dataset(const std::filesystem::path& path, const LoadOptions& opt) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::IoError, "cannot open " + path.string());
  LabeledDataset ds = opt.format == DataFormat::Csv ? parse_csv(in, opt) : parse_libsvm(in, opt);
  ds.source_path = path.string();
  return ds;
}

LabeledDataset subset(const LabeledDataset& ds, const std::vector<Index>& idx) {
  LabeledDataset out;
  out.features = ds.features(Eigen::all, idx);
  out.labels.reserve(idx.size());
  for (const Index j : idx) out.labels.push_back(ds.labels[static_cast<std::size_t>(j)]);
  out.class_count = ds.class_count;
  out.label_names = ds.label_names;
  out.source_path = ds.source_path;
  out.preprocessing_applied = ds.preprocessing_applied;
  return out;
}

SplitScheme parse_split_scheme(std::string_view name) {
  if (name == "first-half") return SplitScheme::FirstHalfPerClass;
  if (name == "seeded") return SplitScheme::SeededStratified;
  if (name == "explicit") return SplitScheme::ExplicitFile;
  fail(ErrorKind::InvalidArgument, "unknown split scheme '" + std::string(name) + "' (first-half, seeded, explicit)");
}

std::string_view to_string(SplitScheme s) {
  switch (s) {
    case SplitScheme::FirstHalfPerClass: return "first-half";
    case SplitScheme::SeededStratified: return "seeded";
    case SplitScheme::ExplicitFile: return "explicit";
  }
  return "unknown";
}

std::vector<Index> seeded_permutation(Index n, std::uint64_t seed) {
  std::vector<Index> perm(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) perm[static_cast<std::size_t>(i)] = i;
  std::mt19937_64 rng(seed);
  for (Index i = n - 1; i > 0; --i) {
    const auto j = static_cast<Index>(rng() % static_cast<std::uint64_t>(i + 1));
    std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
  }
  return perm;
}

SplitResult split(const LabeledDataset& ds, const SplitSpec& spec) {
  const Index n = ds.size();
  std::vector<std::vector<Index>> by_class(static_cast<std::size_t>(ds.class_count));
  for (Index j = 0; j < n; ++j) by_class[static_cast<std::size_t>(ds.labels[static_cast<std::size_t>(j)] - 1)].push_back(j);
  for (std::size_t k = 0; k < by_class.size(); ++k) {
    if (by_class[k].size() < 2) {
      fail(ErrorKind::TooFewSamples, "class '" + ds.label_names[k] + "' has " + std::to_string(by_class[k].size()) +
                                         " samples; a split needs at least 2");
    }
  }
  if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0)) {
    fail(ErrorKind::InvalidArgument, "train fraction must lie in (0, 1)");
  }

  std::vector<char> in_train(static_cast<std::size_t>(n), 0);
  switch (spec.scheme) {
    case SplitScheme::FirstHalfPerClass:
      for (const auto& members : by_class) {
        const auto take = (members.size() + 1) / 2;
        for (std::size_t i = 0; i < take; ++i) in_train[static_cast<std::size_t>(members[i])] = 1;
      }
      break;
    case SplitScheme::SeededStratified:
      for (std::size_t k = 0; k < by_class.size(); ++k) {
        const auto& members = by_class[k];
        const auto nk = static_cast<Index>(members.size());
        const auto perm = seeded_permutation(nk, spec.seed + k);
        Index take = static_cast<Index>(std::ceil(spec.train_fraction * static_cast<double>(nk)));
        take = std::clamp<Index>(take, 1, nk - 1);
        for (Index i = 0; i < take; ++i) in_train[static_cast<std::size_t>(members[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])])] = 1;
      }
      break;
    case SplitScheme::ExplicitFile: {
      std::ifstream in(spec.index_file);
      if (!in) fail(ErrorKind::IoError, "cannot open split file " + spec.index_file);
      long long id = 0;
      while (in >> id) {
        if (id < 1 || id > n) fail(ErrorKind::ParseError, "split file: sample number " + std::to_string(id) + " outside 1.." + std::to_string(n));
        in_train[static_cast<std::size_t>(id - 1)] = 1;
      }
      if (!in.eof()) fail(ErrorKind::ParseError, "split file: non-integer entry");
      break;
    }
  }

  SplitResult out;
  for (Index j = 0; j < n; ++j) (in_train[static_cast<std::size_t>(j)] ? out.train_indices : out.test_indices).push_back(j);
  if (out.train_indices.empty() || out.test_indices.empty()) {
    fail(ErrorKind::TooFewSamples, "split leaves the training or test set empty");
  }
  out.train = subset(ds, out.train_indices);
  out.test = subset(ds, out.test_indices);
  return out;
}

PreprocessState fit_preprocess(const LabeledDataset& train, const PreprocessOptions& options) {
  PreprocessState state;
  state.options = options;
  if (options.mean_remove) {
    PreprocessState unit_only{{false, options.unit_length}, {}};
    state.mean = apply_preprocess(unit_only, train.features).rowwise().mean();
  }
  return state;
}

Eigen::MatrixXd apply_preprocess(const PreprocessState& state, const Eigen::MatrixXd& features) {
  Eigen::MatrixXd out = features;
  if (state.options.unit_length) {
    for (Index j = 0; j < out.cols(); ++j) {
      const double nrm = out.col(j).norm();
      if (!(nrm > 0.0)) fail(ErrorKind::ZeroVector, "sample " + std::to_string(j) + " is all zero; cannot scale to unit length");
      out.col(j) /= nrm;
    }
  }
  if (state.options.mean_remove) {
    if (state.mean.size() != out.rows()) fail(ErrorKind::DimensionMismatch, "stored mean has the wrong length");
    out.colwise() -= state.mean;
  }
  return out;
}

void apply_preprocess(const PreprocessState& state, LabeledDataset& ds) {
  ds.features = apply_preprocess(state, ds.features);
  if (state.options.unit_length) ds.preprocessing_applied.emplace_back("unit_length");
  if (state.options.mean_remove) ds.preprocessing_applied.emplace_back("mean_remove");
}

std::pair<LabeledDataset, PreprocessState> preprocess(const LabeledDataset& ds, const PreprocessOptions& options) {
  auto state = fit_preprocess(ds, options);
  LabeledDataset out = ds;
  apply_preprocess(state, out);
  return {std::move(out), std::move(state)};
}

}  // namespace sgc
