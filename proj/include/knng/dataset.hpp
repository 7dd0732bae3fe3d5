#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace knng {

// Labeled numeric dataset. Labels are dense class ids in [0, c), encoded by
// first appearance; the original strings live in class_names so predictions
// can be written back in the input vocabulary.
struct Dataset {
  std::vector<double> features;  // row-major, n x d
  std::vector<int> labels;       // n entries in [0, c)
  std::size_t n = 0;
  std::size_t d = 0;
  int c = 0;
  std::vector<std::string> class_names;  // id -> original label string

  const double* row(std::size_t i) const { return features.data() + i * d; }

  // Throws DataError when any structural invariant is broken: label range,
  // empty classes, non-finite features, n >= 2, d >= 1.
  void validate() const;
};

struct FoldAssignment {
  std::vector<int> fold_of;  // n entries in [0, folds)
  int folds = 0;
};

struct CsvOptions {
  // Label column: 0-based index, a header name, or "last".
  std::string label_column = "last";
};

// UTF-8, comma-separated, '.' decimal point. A non-numeric first row is
// treated as a header. Parse failures name the offending row and column.
Dataset load_csv(const std::string& path, const CsvOptions& opts = {});

// Writes feature columns f0..f{d-1} plus a final label column holding the
// original label strings. Values round-trip bit-exactly.
void write_csv(const Dataset& ds, const std::string& path);

// Per-class shuffle + round-robin dealing: per-class fold counts differ by
// at most one. Deterministic for a fixed seed.
FoldAssignment stratified_folds(const Dataset& ds, int folds, std::uint64_t seed);

// Rows with keep[i] != 0, original order, global label space preserved.
Dataset subset(const Dataset& ds, const std::vector<char>& keep);

// Loads a numeric query matrix with expected_d feature columns. label_column
// "auto" drops a trailing extra column when the file has expected_d + 1
// columns (so a training CSV can be replayed as queries), "none" treats every
// column as a feature, and an index / name / "last" forces the dropped
// column. An empty file yields zero rows. Any other width mismatch raises a
// DataError naming both dimensionalities.
std::vector<double> load_query_matrix(const std::string& path, std::size_t expected_d,
                                      const std::string& label_column = "auto");

// In-place per-dimension z-scoring; returns (mean, stddev). Constant
// dimensions get stddev 1 so they map to zero instead of dividing by zero.
std::pair<std::vector<double>, std::vector<double>> zscore(Dataset& ds);

// Applies a stored z-scoring to row-major query data.
void apply_zscore(std::vector<double>& rows, std::size_t d,
                  const std::vector<double>& mean,
                  const std::vector<double>& stddev);

}  // namespace knng
