#ifndef MIXCRAFT_DATA_HPP
#define MIXCRAFT_DATA_HPP

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "mixcraft/error.hpp"
#include "mixcraft/matrix.hpp"
#include "mixcraft/rng.hpp"

namespace mixcraft {

/// n×d observation matrix, one observation per row.
struct Dataset {
  std::string name;
  Matrix values;

  Dataset() = default;
  Dataset(std::string dataset_name, Matrix rows) : name(std::move(dataset_name)), values(std::move(rows)) {
    if (values.rows() < 1 || values.cols() < 1) throw Error(ErrorCode::InvalidArgument, "dataset must have n >= 1 and d >= 1");
    if (!values.allFinite()) throw Error(ErrorCode::InvalidArgument, "dataset contains non-finite values");
  }

  Eigen::Index n() const noexcept { return values.rows(); }
  Eigen::Index d() const noexcept { return values.cols(); }
  Vector row(Eigen::Index j) const { return values.row(j).transpose(); }
};

/// Dataset plus 1-based class or cluster ids forming the range 1..s.
struct LabeledDataset {
  Dataset data;
  std::vector<int> labels;

  LabeledDataset() = default;
  LabeledDataset(Dataset d, std::vector<int> ids) : data(std::move(d)), labels(std::move(ids)) {
    if (static_cast<Eigen::Index>(labels.size()) != data.n()) {
      throw Error(ErrorCode::LengthMismatch, "label count differs from row count");
    }
  }

  int class_count() const { return labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()); }

  /// Rows of each class in original order, index s-1 for class s.
  std::vector<Dataset> by_class() const {
    const int s = class_count();
    std::vector<std::vector<Eigen::Index>> rows(static_cast<std::size_t>(s));
    for (std::size_t j = 0; j < labels.size(); ++j) rows[static_cast<std::size_t>(labels[j] - 1)].push_back(static_cast<Eigen::Index>(j));
    std::vector<Dataset> out;
    for (int c = 0; c < s; ++c) {
      const auto& idx = rows[static_cast<std::size_t>(c)];
      Matrix m(static_cast<Eigen::Index>(idx.size()), data.d());
      for (std::size_t r = 0; r < idx.size(); ++r) m.row(static_cast<Eigen::Index>(r)) = data.values.row(idx[r]);
      out.emplace_back(data.name + "_class" + std::to_string(c + 1), std::move(m));
    }
    return out;
  }
};

/// Checks that ids are positive and every id in 1..max occurs.
inline void validate_labels(const std::vector<int>& labels) {
  if (labels.empty()) throw Error(ErrorCode::InvalidArgument, "no labels");
  const int s = *std::max_element(labels.begin(), labels.end());
  std::vector<bool> seen(static_cast<std::size_t>(std::max(s, 0)) + 1, false);
  for (int id : labels) {
    if (id < 1) throw Error(ErrorCode::InvalidArgument, "labels must be positive integers");
    seen[static_cast<std::size_t>(id)] = true;
  }
  for (int id = 1; id <= s; ++id) {
    if (!seen[static_cast<std::size_t>(id)]) throw Error(ErrorCode::InvalidArgument, "label ids are not contiguous: missing " + std::to_string(id));
  }
}

namespace detail {

inline std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

inline std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

inline std::optional<double> parse_double(const std::string& raw) {
  const std::string s = trim(raw);
  if (s.empty()) return std::nullopt;
  double value = 0.0;
  const char* begin = s.data();
  if (*begin == '+') ++begin;
  const auto [ptr, ec] = std::from_chars(begin, s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(value)) return std::nullopt;
  return value;
}

inline std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    lines.push_back(line);
  }
  return lines;
}

inline std::string stem(const std::string& path) {
  const auto slash = path.find_last_of("/\\");
  std::string base = slash == std::string::npos ? path : path.substr(slash + 1);
  const auto dot = base.find_last_of('.');
  return dot == std::string::npos ? base : base.substr(0, dot);
}

}  // namespace detail

/// True when the first non-blank line holds a non-numeric field.
inline bool csv_has_header(const std::string& path) {
  const auto lines = detail::read_lines(path);
  if (lines.empty()) return false;
  for (const auto& f : detail::split_fields(lines.front())) {
    if (!detail::parse_double(f)) return true;
  }
  return false;
}

/// Numeric CSV with an optional single header row. Row order is preserved.
inline Matrix load_csv_matrix(const std::string& path, bool has_header) {
  const auto lines = detail::read_lines(path);
  const std::size_t first = has_header ? 1 : 0;
  if (lines.size() <= first) throw Error(ErrorCode::ParseError, path + ": no data rows (row 0, col 0)");
  std::vector<std::vector<double>> rows;
  std::size_t width = 0;
  for (std::size_t r = first; r < lines.size(); ++r) {
    const auto fields = detail::split_fields(lines[r]);
    if (r == first) width = fields.size();
    if (fields.size() != width) {
      throw Error(ErrorCode::RaggedRows, path + ": row " + std::to_string(r + 1) + " has " + std::to_string(fields.size()) +
                                             " fields, expected " + std::to_string(width));
    }
    std::vector<double> row;
    row.reserve(width);
    for (std::size_t c = 0; c < fields.size(); ++c) {
      const auto v = detail::parse_double(fields[c]);
      if (!v) throw Error(ErrorCode::ParseError, path + ": row " + std::to_string(r + 1) + ", col " + std::to_string(c + 1));
      row.push_back(*v);
    }
    rows.push_back(std::move(row));
  }
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(width));
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < width; ++c) m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
  return m;
}

inline Dataset load_csv(const std::string& path, bool has_header) {
  return Dataset(detail::stem(path), load_csv_matrix(path, has_header));
}

/// Loads a CSV whose column `class_col` (1-based) holds class ids and
/// removes that column from the features.
inline LabeledDataset load_labeled_csv(const std::string& path, bool has_header, int class_col) {
  Matrix m = load_csv_matrix(path, has_header);
  if (class_col < 1 || class_col > m.cols()) throw Error(ErrorCode::InvalidArgument, "class column out of range");
  if (m.cols() < 2) throw Error(ErrorCode::InvalidArgument, "labeled CSV needs at least one feature column");
  const Eigen::Index cc = class_col - 1;
  std::vector<int> labels(static_cast<std::size_t>(m.rows()));
  Matrix features(m.rows(), m.cols() - 1);
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    const double id = m(r, cc);
    if (id != std::floor(id)) throw Error(ErrorCode::ParseError, path + ": non-integer class id at row " + std::to_string(r + 1));
    labels[static_cast<std::size_t>(r)] = static_cast<int>(id);
    Eigen::Index out = 0;
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      if (c != cc) features(r, out++) = m(r, c);
  }
  validate_labels(labels);
  return LabeledDataset(Dataset(detail::stem(path), std::move(features)), std::move(labels));
}

inline std::vector<int> load_labels(const std::string& path) {
  const Matrix m = load_csv_matrix(path, csv_has_header(path));
  if (m.cols() != 1) throw Error(ErrorCode::ParseError, path + ": label file must have exactly one column");
  std::vector<int> labels;
  for (Eigen::Index r = 0; r < m.rows(); ++r) labels.push_back(static_cast<int>(m(r, 0)));
  validate_labels(labels);
  return labels;
}

/// Shortest decimal text that parses back to the same double.
inline std::string format_double(double x) {
  char buf[32];
  for (int precision = 6; precision <= 17; ++precision) {
    std::snprintf(buf, sizeof buf, "%.*g", precision, x);
    if (std::strtod(buf, nullptr) == x) break;
  }
  return buf;
}

/// Writes rows, optionally inserting a label column at position class_col.
inline void write_csv(const std::string& path, const Matrix& values, const std::vector<std::string>& header,
                      const std::vector<int>* labels = nullptr, int class_col = 1) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path);
  if (!header.empty()) {
    for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
    out << '\n';
  }
  for (Eigen::Index r = 0; r < values.rows(); ++r) {
    bool first = true;
    auto emit = [&](const std::string& s) {
      out << (first ? "" : ",") << s;
      first = false;
    };
    Eigen::Index c = 0;
    for (int col = 1; col <= values.cols() + (labels ? 1 : 0); ++col) {
      if (labels && col == class_col) {
        emit(std::to_string((*labels)[static_cast<std::size_t>(r)]));
      } else {
        emit(format_double(values(r, c++)));
      }
    }
    out << '\n';
  }
}

/// Stratified train/test partition. Only a single chunk is supported.
struct SplitResult {
  std::vector<LabeledDataset> train;
  Dataset test;
  std::vector<int> test_labels;
  double p = 0.0;
};

inline long round_half_up(double x) { return static_cast<long>(std::floor(x + 0.5)); }

inline SplitResult split(const LabeledDataset& data, double p, SeededGenerator& rng, int chunks = 1) {
  if (!(p > 0.0 && p < 1.0)) throw Error(ErrorCode::InvalidArgument, "p must lie in (0, 1)");
  if (chunks != 1) throw Error(ErrorCode::Unsupported, "only a single chunk (o = 1) is supported");
  validate_labels(data.labels);
  const int s = data.class_count();
  std::vector<std::vector<Eigen::Index>> members(static_cast<std::size_t>(s));
  for (std::size_t j = 0; j < data.labels.size(); ++j)
    members[static_cast<std::size_t>(data.labels[j] - 1)].push_back(static_cast<Eigen::Index>(j));

  std::vector<bool> to_train(data.labels.size(), false);
  for (int c = 0; c < s; ++c) {
    auto& rows = members[static_cast<std::size_t>(c)];
    if (rows.size() < 2) throw Error(ErrorCode::ClassTooSmall, "class " + std::to_string(c + 1) + " has fewer than 2 members");
    // Fisher-Yates on the class's row indices
    for (std::size_t i = rows.size() - 1; i > 0; --i) std::swap(rows[i], rows[rng.below(i + 1)]);
    const auto ntrain = static_cast<std::size_t>(round_half_up(p * static_cast<double>(rows.size())));
    for (std::size_t i = 0; i < ntrain; ++i) to_train[static_cast<std::size_t>(rows[i])] = true;
  }

  const auto count_train = static_cast<Eigen::Index>(std::count(to_train.begin(), to_train.end(), true));
  Matrix train(count_train, data.data.d());
  Matrix test(data.data.n() - count_train, data.data.d());
  std::vector<int> train_labels, test_labels;
  Eigen::Index tr = 0, te = 0;
  for (Eigen::Index j = 0; j < data.data.n(); ++j) {
    if (to_train[static_cast<std::size_t>(j)]) {
      train.row(tr++) = data.data.values.row(j);
      train_labels.push_back(data.labels[static_cast<std::size_t>(j)]);
    } else {
      test.row(te++) = data.data.values.row(j);
      test_labels.push_back(data.labels[static_cast<std::size_t>(j)]);
    }
  }
  SplitResult result;
  result.p = p;
  result.train.emplace_back(Dataset(data.data.name + "_train", std::move(train)), std::move(train_labels));
  if (te > 0) result.test = Dataset(data.data.name + "_test", std::move(test));
  result.test_labels = std::move(test_labels);
  return result;
}

}  // namespace mixcraft

#endif  // MIXCRAFT_DATA_HPP
