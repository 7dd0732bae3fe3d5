#pragma once

#include <cstdint>
#include <vector>

#include "knng/dataset.hpp"

namespace knng {

struct BlobSpec {
  std::size_t n = 1000;
  std::size_t d = 10;
  int classes = 3;
  double stddev = 1.0;
  double center_scale = 1.0;  // centers drawn from N(0, center_scale^2)
  std::uint64_t seed = 0;
};

// Gaussian blobs, one center per class, classes assigned round-robin so any
// prefix is balanced. Fully deterministic for a fixed spec.
Dataset make_blobs(const BlobSpec& spec);

// Fresh draws from the same mixture (same centers as make_blobs for an
// identical spec), row-major n x d, plus the class each query was drawn from.
struct QuerySet {
  std::vector<double> points;
  std::vector<int> source_class;
  std::size_t n = 0;
  std::size_t d = 0;
  const double* row(std::size_t i) const { return points.data() + i * d; }
};

QuerySet make_queries(const BlobSpec& spec, std::size_t count, std::uint64_t query_seed);

}  // namespace knng
