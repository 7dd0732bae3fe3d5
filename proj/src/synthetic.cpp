#include "knng/synthetic.hpp"

#include <string>

#include "knng/errors.hpp"
#include "knng/rng.hpp"

namespace knng {

namespace {

std::vector<double> draw_centers(const BlobSpec& spec) {
  Rng rng(spec.seed);
  std::vector<double> centers(static_cast<std::size_t>(spec.classes) * spec.d);
  for (auto& v : centers) v = spec.center_scale * rng.next_gaussian();
  return centers;
}

}  // namespace

Dataset make_blobs(const BlobSpec& spec) {
  if (spec.n < 2 || spec.d < 1 || spec.classes < 1) {
    throw DataError("blob spec needs n >= 2, d >= 1, classes >= 1");
  }
  const auto centers = draw_centers(spec);
  Rng rng(spec.seed + 1);

  Dataset ds;
  ds.n = spec.n;
  ds.d = spec.d;
  ds.c = spec.classes;
  ds.features.resize(spec.n * spec.d);
  ds.labels.resize(spec.n);
  for (int k = 0; k < spec.classes; ++k) ds.class_names.push_back(std::to_string(k));

  for (std::size_t i = 0; i < spec.n; ++i) {
    const int cls = static_cast<int>(i % static_cast<std::size_t>(spec.classes));
    ds.labels[i] = cls;
    const double* mu = centers.data() + static_cast<std::size_t>(cls) * spec.d;
    double* x = ds.features.data() + i * spec.d;
    for (std::size_t j = 0; j < spec.d; ++j) {
      x[j] = mu[j] + spec.stddev * rng.next_gaussian();
    }
  }
  return ds;
}

QuerySet make_queries(const BlobSpec& spec, std::size_t count, std::uint64_t query_seed) {
  const auto centers = draw_centers(spec);
  Rng rng(query_seed);

  QuerySet qs;
  qs.n = count;
  qs.d = spec.d;
  qs.points.resize(count * spec.d);
  qs.source_class.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    const int cls = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(spec.classes)));
    qs.source_class[i] = cls;
    const double* mu = centers.data() + static_cast<std::size_t>(cls) * spec.d;
    double* x = qs.points.data() + i * spec.d;
    for (std::size_t j = 0; j < spec.d; ++j) {
      x[j] = mu[j] + spec.stddev * rng.next_gaussian();
    }
  }
  return qs;
}

}  // namespace knng
