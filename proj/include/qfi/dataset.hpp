#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "qfi/errors.hpp"
#include "qfi/matrix.hpp"
#include "qfi/prng.hpp"

namespace qfi {

struct Dataset {
  std::vector<std::string> feature_names;
  Matrix X;
  std::vector<int> y;

  std::size_t n_rows() const { return X.rows(); }
  std::size_t n_features() const { return X.cols(); }

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

inline double parse_double(const std::string& s, int line_no, const std::string& column) {
  const char* begin = s.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (end == begin || end != begin + s.size())
    throw IngestionError("line " + std::to_string(line_no) + ", column '" + column +
                         "': cannot parse '" + s + "' as a number");
  if (!std::isfinite(v))
    throw IngestionError("line " + std::to_string(line_no) + ", column '" + column +
                         "': non-finite value '" + s + "'");
  return v;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

inline std::vector<std::string> read_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::string line;
  std::istringstream in(text);
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

}  // namespace detail

// CSV with a header row; the label column is named "label" and must hold 0/1.
// Rows with unparseable or non-finite values are rejected with their line
// number.
inline Dataset load_dataset(const std::filesystem::path& path) {
  const std::vector<std::string> lines = detail::read_lines(detail::read_file(path));
  if (lines.empty()) throw IngestionError(path.string() + ": empty file");

  const std::vector<std::string> header = detail::split_csv_line(lines[0]);
  std::size_t label_col = header.size();
  for (std::size_t c = 0; c < header.size(); ++c)
    if (header[c] == "label") {
      if (label_col != header.size())
        throw IngestionError(path.string() + ": multiple 'label' columns");
      label_col = c;
    }
  if (label_col == header.size())
    throw IngestionError(path.string() + ": no 'label' column in header");
  std::set<std::string> unique(header.begin(), header.end());
  if (unique.size() != header.size())
    throw IngestionError(path.string() + ": duplicate column names in header");

  Dataset ds;
  for (std::size_t c = 0; c < header.size(); ++c)
    if (c != label_col) ds.feature_names.push_back(header[c]);
  const std::size_t d = ds.feature_names.size();
  if (d == 0) throw IngestionError(path.string() + ": no feature columns");

  std::vector<double> values;
  std::size_t n_rows = 0;
  for (std::size_t li = 1; li < lines.size(); ++li) {
    if (lines[li].empty()) continue;
    const int line_no = static_cast<int>(li) + 1;
    const std::vector<std::string> fields = detail::split_csv_line(lines[li]);
    if (fields.size() != header.size())
      throw IngestionError("line " + std::to_string(line_no) + ": expected " +
                           std::to_string(header.size()) + " fields, got " +
                           std::to_string(fields.size()));
    std::size_t feature = 0;
    for (std::size_t c = 0; c < fields.size(); ++c) {
      const double v = detail::parse_double(fields[c], line_no, header[c]);
      if (c == label_col) {
        if (v != 0.0 && v != 1.0)
          throw IngestionError("line " + std::to_string(line_no) +
                               ": label must be 0 or 1, got '" + fields[c] + "'");
        ds.y.push_back(static_cast<int>(v));
      } else {
        values.push_back(v);
        ++feature;
      }
    }
    ++n_rows;
  }
  if (n_rows == 0) throw IngestionError(path.string() + ": no data rows");
  ds.X = Matrix(n_rows, d);
  ds.X.data() = std::move(values);
  return ds;
}

inline void save_dataset(const Dataset& ds, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  for (std::size_t c = 0; c < ds.feature_names.size(); ++c) out << ds.feature_names[c] << ',';
  out << "label\n";
  char buf[64];
  for (std::size_t r = 0; r < ds.n_rows(); ++r) {
    for (std::size_t c = 0; c < ds.n_features(); ++c) {
      std::snprintf(buf, sizeof(buf), "%.17g", ds.X(r, c));
      out << buf << ',';
    }
    out << ds.y[r] << '\n';
  }
  if (!out) throw IoError("failed writing dataset to " + path.string());
}

// CSV with columns feature_name,rank; ranks are positive integers, duplicate
// names and duplicate ranks are rejected.
inline std::map<std::string, int> load_sme_ranks(const std::filesystem::path& path) {
  const std::vector<std::string> lines = detail::read_lines(detail::read_file(path));
  if (lines.empty()) throw IngestionError(path.string() + ": empty file");
  if (lines[0] != "feature_name,rank")
    throw IngestionError(path.string() + ": header must be 'feature_name,rank'");
  std::map<std::string, int> ranks;
  std::set<int> used;
  for (std::size_t li = 1; li < lines.size(); ++li) {
    if (lines[li].empty()) continue;
    const int line_no = static_cast<int>(li) + 1;
    const auto comma = lines[li].find(',');
    if (comma == std::string::npos)
      throw IngestionError("line " + std::to_string(line_no) + ": missing comma");
    const std::string name = lines[li].substr(0, comma);
    const std::string rank_text = lines[li].substr(comma + 1);
    int rank = 0;
    try {
      std::size_t used_chars = 0;
      rank = std::stoi(rank_text, &used_chars);
      if (used_chars != rank_text.size()) throw std::invalid_argument("trailing characters");
    } catch (const std::exception&) {
      throw IngestionError("line " + std::to_string(line_no) + ": bad rank '" + rank_text + "'");
    }
    if (rank < 1)
      throw IngestionError("line " + std::to_string(line_no) + ": rank must be positive");
    if (ranks.count(name))
      throw IngestionError("line " + std::to_string(line_no) + ": duplicate feature '" + name +
                           "'");
    if (!used.insert(rank).second)
      throw IngestionError("line " + std::to_string(line_no) + ": duplicate rank " +
                           std::to_string(rank));
    ranks[name] = rank;
  }
  if (ranks.empty()) throw IngestionError(path.string() + ": no rank rows");
  return ranks;
}

// Stand-in for the proprietary source data: balanced binary labels,
// class-conditional unit-variance Gaussians on the first n_informative
// features with means +-mu_j decaying geometrically (mu_0 = 1, factor 0.8),
// independent noise elsewhere. Row order is shuffled. Deterministic per seed.
inline Dataset synth_dataset(std::size_t n_rows, std::size_t n_features,
                             std::size_t n_informative, std::uint64_t seed) {
  if (n_rows < 2) throw ValidationError("synthetic dataset needs at least 2 rows");
  if (n_features < 1) throw ValidationError("synthetic dataset needs at least 1 feature");
  if (n_informative > n_features)
    throw ValidationError("n_informative cannot exceed n_features");

  Rng rng(derive_seed(seed, 0x53594E54ULL));
  Dataset ds;
  ds.feature_names.reserve(n_features);
  for (std::size_t j = 0; j < n_features; ++j) ds.feature_names.push_back("f" + std::to_string(j));

  const std::size_t n_class1 = n_rows / 2;
  std::vector<int> labels(n_rows, 0);
  for (std::size_t i = n_rows - n_class1; i < n_rows; ++i) labels[i] = 1;
  rng.shuffle(labels);

  std::vector<double> mu(n_informative);
  for (std::size_t j = 0; j < n_informative; ++j) mu[j] = std::pow(0.8, static_cast<double>(j));

  ds.X = Matrix(n_rows, n_features);
  ds.y = std::move(labels);
  for (std::size_t r = 0; r < n_rows; ++r) {
    const double sign = ds.y[r] == 1 ? 1.0 : -1.0;
    for (std::size_t j = 0; j < n_features; ++j) {
      const double mean = j < n_informative ? sign * mu[j] : 0.0;
      ds.X(r, j) = mean + rng.normal();
    }
  }
  return ds;
}

}  // namespace qfi
