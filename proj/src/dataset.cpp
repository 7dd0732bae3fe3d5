#include "knng/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "knng/errors.hpp"
#include "knng/rng.hpp"

namespace knng {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      cells.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  cells.push_back(cur);
  return cells;
}

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

bool parse_double(const std::string& cell, double* out) {
  const std::string t = trim(cell);
  if (t.empty()) return false;
  const char* begin = t.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (end != begin + t.size()) return false;
  *out = v;
  return true;
}

}  // namespace

void Dataset::validate() const {
  if (n < 2) throw DataError("dataset needs at least 2 samples, got " + std::to_string(n));
  if (d < 1) throw DataError("dataset needs at least 1 feature dimension");
  if (c < 1) throw DataError("dataset needs at least 1 class");
  if (labels.size() != n) {
    throw DataError("label count " + std::to_string(labels.size()) +
                    " does not match sample count " + std::to_string(n));
  }
  if (features.size() != n * d) {
    throw DataError("feature buffer size does not match n x d");
  }
  std::vector<char> seen(static_cast<std::size_t>(c), 0);
  for (std::size_t i = 0; i < n; ++i) {
    const int y = labels[i];
    if (y < 0 || y >= c) {
      throw DataError("label out of range at row " + std::to_string(i));
    }
    seen[static_cast<std::size_t>(y)] = 1;
  }
  for (int k = 0; k < c; ++k) {
    if (!seen[static_cast<std::size_t>(k)]) {
      throw DataError("class id " + std::to_string(k) + " has no samples");
    }
  }
  for (std::size_t i = 0; i < features.size(); ++i) {
    if (!std::isfinite(features[i])) {
      throw DataError("non-finite feature value at row " + std::to_string(i / d) +
                      ", column " + std::to_string(i % d));
    }
  }
}

Dataset load_csv(const std::string& path, const CsvOptions& opts) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open file: " + path);

  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() && in.peek() == EOF) break;  // trailing newline
    lines.push_back(line);
  }
  if (lines.empty()) throw DataError("empty file: " + path);

  // Strip a UTF-8 BOM if present.
  if (lines[0].size() >= 3 && lines[0].compare(0, 3, "\xEF\xBB\xBF") == 0) {
    lines[0].erase(0, 3);
  }

  const std::vector<std::string> header = split_line(lines[0]);
  const std::size_t ncols = header.size();
  if (ncols < 2) throw DataError("need at least one feature column and a label column");

  // Resolve the label column first; the label cell is a string either way,
  // so header detection must only look at the feature cells.
  std::size_t label_col;
  bool has_header;
  if (opts.label_column == "last" ||
      (!opts.label_column.empty() &&
       opts.label_column.find_first_not_of("0123456789") == std::string::npos)) {
    if (opts.label_column == "last") {
      label_col = ncols - 1;
    } else {
      label_col = static_cast<std::size_t>(std::stoul(opts.label_column));
      if (label_col >= ncols) {
        throw DataError("label column index " + opts.label_column + " out of range (file has " +
                        std::to_string(ncols) + " columns)");
      }
    }
    has_header = false;
    for (std::size_t cidx = 0; cidx < ncols; ++cidx) {
      if (cidx == label_col) continue;
      double v;
      if (!parse_double(header[cidx], &v)) {
        has_header = true;
        break;
      }
    }
  } else {
    auto it = std::find(header.begin(), header.end(), opts.label_column);
    if (it == header.end()) {
      throw DataError("label column '" + opts.label_column + "' not found in header");
    }
    label_col = static_cast<std::size_t>(it - header.begin());
    has_header = true;
  }

  Dataset ds;
  ds.d = ncols - 1;
  std::unordered_map<std::string, int> class_ids;

  const std::size_t first_row = has_header ? 1 : 0;
  for (std::size_t r = first_row; r < lines.size(); ++r) {
    if (lines[r].empty()) {
      throw DataError("empty row " + std::to_string(r + 1) + " in " + path);
    }
    const auto cells = split_line(lines[r]);
    if (cells.size() != ncols) {
      throw DataError("ragged row " + std::to_string(r + 1) + ": expected " +
                      std::to_string(ncols) + " columns, got " + std::to_string(cells.size()));
    }
    for (std::size_t cidx = 0; cidx < ncols; ++cidx) {
      if (cidx == label_col) continue;
      double v;
      if (!parse_double(cells[cidx], &v)) {
        throw DataError("cannot parse value '" + cells[cidx] + "' at row " +
                        std::to_string(r + 1) + ", column " + std::to_string(cidx + 1));
      }
      if (!std::isfinite(v)) {
        throw DataError("non-finite value at row " + std::to_string(r + 1) + ", column " +
                        std::to_string(cidx + 1));
      }
      ds.features.push_back(v);
    }
    const std::string label = trim(cells[label_col]);
    auto [it, inserted] = class_ids.emplace(label, static_cast<int>(ds.class_names.size()));
    if (inserted) ds.class_names.push_back(label);
    ds.labels.push_back(it->second);
  }

  ds.n = ds.labels.size();
  ds.c = static_cast<int>(ds.class_names.size());
  if (ds.n == 0) throw DataError("no data rows in " + path);

  // Encoding by first appearance cannot produce an empty class.
  for (int k = 0; k < ds.c; ++k) {
    if (std::count(ds.labels.begin(), ds.labels.end(), k) == 0) {
      throw InternalError("label encoding produced an empty class");
    }
  }
  ds.validate();
  return ds;
}

void write_csv(const Dataset& ds, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write file: " + path);
  for (std::size_t j = 0; j < ds.d; ++j) out << "f" << j << ",";
  out << "label\n";
  char buf[32];
  for (std::size_t i = 0; i < ds.n; ++i) {
    const double* x = ds.row(i);
    for (std::size_t j = 0; j < ds.d; ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", x[j]);
      out << buf << ",";
    }
    out << ds.class_names[static_cast<std::size_t>(ds.labels[i])] << "\n";
  }
  if (!out) throw DataError("write failed: " + path);
}

FoldAssignment stratified_folds(const Dataset& ds, int folds, std::uint64_t seed) {
  if (folds < 2) throw DataError("fold count must be at least 2");
  if (static_cast<std::size_t>(folds) > ds.n) {
    throw DataError("fold count " + std::to_string(folds) + " exceeds sample count " +
                    std::to_string(ds.n));
  }

  std::vector<std::vector<int>> by_class(static_cast<std::size_t>(ds.c));
  for (std::size_t i = 0; i < ds.n; ++i) {
    by_class[static_cast<std::size_t>(ds.labels[i])].push_back(static_cast<int>(i));
  }

  FoldAssignment fa;
  fa.folds = folds;
  fa.fold_of.assign(ds.n, -1);

  Rng rng(seed);
  std::size_t dealt = 0;
  for (auto& members : by_class) {
    rng.shuffle(members);
    // Rotate the starting fold across classes so remainders spread out.
    const std::size_t start = dealt % static_cast<std::size_t>(folds);
    for (std::size_t t = 0; t < members.size(); ++t) {
      fa.fold_of[static_cast<std::size_t>(members[t])] =
          static_cast<int>((start + t) % static_cast<std::size_t>(folds));
    }
    dealt += members.size();
  }
  return fa;
}

Dataset subset(const Dataset& ds, const std::vector<char>& keep) {
  if (keep.size() != ds.n) throw InternalError("subset mask size mismatch");
  Dataset out;
  out.d = ds.d;
  out.c = ds.c;
  out.class_names = ds.class_names;
  for (std::size_t i = 0; i < ds.n; ++i) {
    if (!keep[i]) continue;
    const double* x = ds.row(i);
    out.features.insert(out.features.end(), x, x + ds.d);
    out.labels.push_back(ds.labels[i]);
  }
  out.n = out.labels.size();
  return out;
}

std::vector<double> load_query_matrix(const std::string& path, std::size_t expected_d,
                                      const std::string& label_column) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open file: " + path);

  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() && in.peek() == EOF) break;
    lines.push_back(line);
  }
  if (lines.empty()) return {};
  if (lines[0].size() >= 3 && lines[0].compare(0, 3, "\xEF\xBB\xBF") == 0) {
    lines[0].erase(0, 3);
  }

  std::vector<std::string> header = split_line(lines[0]);
  const std::size_t ncols = header.size();

  std::size_t drop_col = ncols;  // ncols means "keep all"
  bool name_lookup = false;
  if (label_column == "none") {
    if (ncols != expected_d) {
      throw DataError("query file has " + std::to_string(ncols) +
                      " feature columns but the model expects " + std::to_string(expected_d));
    }
  } else if (label_column == "auto") {
    if (ncols == expected_d + 1) {
      drop_col = ncols - 1;
    } else if (ncols != expected_d) {
      throw DataError("query file has " + std::to_string(ncols) +
                      " columns but the model expects " + std::to_string(expected_d) +
                      " feature dimensions");
    }
  } else {
    if (label_column == "last") {
      drop_col = ncols - 1;
    } else if (label_column.find_first_not_of("0123456789") == std::string::npos) {
      drop_col = std::stoul(label_column);
      if (drop_col >= ncols) throw DataError("label column index out of range");
    } else {
      auto it = std::find(header.begin(), header.end(), label_column);
      if (it == header.end()) throw DataError("label column '" + label_column + "' not found");
      drop_col = static_cast<std::size_t>(it - header.begin());
      name_lookup = true;
    }
    if (ncols - 1 != expected_d) {
      throw DataError("query file has " + std::to_string(ncols - 1) +
                      " feature columns but the model expects " + std::to_string(expected_d));
    }
  }

  bool has_header = name_lookup;
  if (!has_header) {
    for (std::size_t cidx = 0; cidx < ncols; ++cidx) {
      if (cidx == drop_col) continue;
      double v;
      if (!parse_double(header[cidx], &v)) {
        has_header = true;
        break;
      }
    }
  }

  std::vector<double> out;
  for (std::size_t r = has_header ? 1 : 0; r < lines.size(); ++r) {
    const auto cells = split_line(lines[r]);
    if (cells.size() != ncols) {
      throw DataError("ragged row " + std::to_string(r + 1) + " in " + path);
    }
    for (std::size_t cidx = 0; cidx < ncols; ++cidx) {
      if (cidx == drop_col) continue;
      double v;
      if (!parse_double(cells[cidx], &v) || !std::isfinite(v)) {
        throw DataError("cannot parse value '" + cells[cidx] + "' at row " +
                        std::to_string(r + 1) + ", column " + std::to_string(cidx + 1));
      }
      out.push_back(v);
    }
  }
  return out;
}

std::pair<std::vector<double>, std::vector<double>> zscore(Dataset& ds) {
  std::vector<double> mean(ds.d, 0.0), stddev(ds.d, 0.0);
  for (std::size_t i = 0; i < ds.n; ++i) {
    const double* x = ds.row(i);
    for (std::size_t j = 0; j < ds.d; ++j) mean[j] += x[j];
  }
  for (std::size_t j = 0; j < ds.d; ++j) mean[j] /= static_cast<double>(ds.n);
  for (std::size_t i = 0; i < ds.n; ++i) {
    const double* x = ds.row(i);
    for (std::size_t j = 0; j < ds.d; ++j) {
      const double t = x[j] - mean[j];
      stddev[j] += t * t;
    }
  }
  for (std::size_t j = 0; j < ds.d; ++j) {
    stddev[j] = std::sqrt(stddev[j] / static_cast<double>(ds.n));
    if (stddev[j] == 0.0) stddev[j] = 1.0;
  }
  apply_zscore(ds.features, ds.d, mean, stddev);
  return {mean, stddev};
}

void apply_zscore(std::vector<double>& rows, std::size_t d,
                  const std::vector<double>& mean, const std::vector<double>& stddev) {
  if (d == 0 || mean.size() != d || stddev.size() != d) {
    throw InternalError("z-score parameter size mismatch");
  }
  const std::size_t n = rows.size() / d;
  for (std::size_t i = 0; i < n; ++i) {
    double* x = rows.data() + i * d;
    for (std::size_t j = 0; j < d; ++j) x[j] = (x[j] - mean[j]) / stddev[j];
  }
}

}  // namespace knng
