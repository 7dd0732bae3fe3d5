#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "knng/errors.hpp"
#include "knng/kernel.hpp"
#include "knng/rng.hpp"
#include "knng/synthetic.hpp"

using namespace knng;

namespace {

Dataset two_points(double distance) {
  Dataset ds;
  ds.n = 2;
  ds.d = 1;
  ds.c = 2;
  ds.class_names = {"0", "1"};
  ds.features = {0.0, distance};
  ds.labels = {0, 1};
  return ds;
}

}  // namespace

TEST_CASE("sigma of a single pair is its distance") {
  CHECK(resolve_sigma(two_points(4.0)) == doctest::Approx(4.0));
}

TEST_CASE("sigma falls back to 1 on identical points") {
  Dataset ds = two_points(0.0);
  ds.features = {3.0, 3.0};
  CHECK(resolve_sigma(ds) == 1.0);
}

TEST_CASE("sigma ignores zero distances when duplicates dominate") {
  Dataset ds;
  ds.n = 3;
  ds.d = 1;
  ds.c = 2;
  ds.class_names = {"0", "1"};
  ds.features = {1.0, 1.0, 5.0};
  ds.labels = {0, 0, 1};
  // Pair distances: 0, 4, 4 -> median (upper) is 4; were it 0, the mean
  // nonzero fallback would also yield 4.
  CHECK(resolve_sigma(ds) == doctest::Approx(4.0));
}

TEST_CASE("sigma matches the exhaustive pairwise median oracle") {
  BlobSpec spec;
  spec.n = 1000;
  spec.d = 10;
  spec.classes = 1;
  spec.stddev = 1.0;
  spec.center_scale = 0.0;
  spec.seed = 77;
  const Dataset ds = make_blobs(spec);

  // Oracle: median over all pairs, computed independently.
  std::vector<double> all;
  for (std::size_t a = 0; a + 1 < ds.n; ++a) {
    for (std::size_t b = a + 1; b < ds.n; ++b) {
      double sq = 0.0;
      for (std::size_t j = 0; j < ds.d; ++j) {
        const double t = ds.row(a)[j] - ds.row(b)[j];
        sq += t * t;
      }
      all.push_back(std::sqrt(sq));
    }
  }
  std::sort(all.begin(), all.end());
  const double oracle = all[all.size() / 2];

  const double sigma = resolve_sigma(ds);
  CHECK(std::abs(sigma - oracle) / oracle < 0.05);
}

TEST_CASE("kernel formula matches scalar evaluation") {
  KernelParams p;
  p.alpha = 0.5;
  p.gamma = 0.1;
  p.sigma = 2.0;

  SUBCASE("same point, same class") {
    Dataset ds = two_points(0.0);
    ds.labels = {0, 0};
    ds.c = 1;
    ds.class_names = {"0"};
    const KernelMatrix K = build_kernel(ds, p);
    CHECK(K.at(0, 1) == doctest::Approx(1.0));
    CHECK(K.at(0, 0) == 1.0);
  }

  SUBCASE("same point, different class") {
    const KernelMatrix K = build_kernel(two_points(0.0), p);
    CHECK(K.at(0, 1) == doctest::Approx(0.5 + 0.5 * 0.1));
  }

  SUBCASE("distance sigma*sqrt(2), same class") {
    Dataset ds = two_points(p.sigma * std::sqrt(2.0));
    ds.labels = {0, 0};
    ds.c = 1;
    ds.class_names = {"0"};
    const KernelMatrix K = build_kernel(ds, p);
    CHECK(K.at(0, 1) == doctest::Approx(0.5 * std::exp(-1.0) + 0.5).epsilon(1e-12));
  }
}

TEST_CASE("kernel is symmetric with unit diagonal and entries in (0,1]") {
  BlobSpec spec;
  spec.n = 200;
  spec.d = 6;
  spec.classes = 4;
  spec.seed = 5;
  const Dataset ds = make_blobs(spec);
  KernelParams p;
  p.sigma = resolve_sigma(ds);
  const KernelMatrix K = build_kernel(ds, p);
  for (std::size_t i = 0; i < K.n; ++i) {
    CHECK(K.at(i, i) == 1.0);
    for (std::size_t j = 0; j < K.n; ++j) {
      CHECK(K.at(i, j) == K.at(j, i));
      CHECK(K.at(i, j) > 0.0);
      CHECK(K.at(i, j) <= 1.0);
    }
  }
}

TEST_CASE("kernel never increases with distance when labels are fixed") {
  Rng rng(31);
  Dataset ds;
  ds.n = 40;
  ds.d = 3;
  ds.c = 2;
  ds.class_names = {"0", "1"};
  for (std::size_t i = 0; i < ds.n; ++i) {
    for (std::size_t j = 0; j < ds.d; ++j) ds.features.push_back(rng.next_gaussian());
    ds.labels.push_back(static_cast<int>(i % 2));
  }
  KernelParams p;
  p.sigma = 1.3;
  const KernelMatrix K = build_kernel(ds, p);

  auto sqdist = [&](std::size_t a, std::size_t b) {
    double s = 0.0;
    for (std::size_t j = 0; j < ds.d; ++j) {
      const double t = ds.row(a)[j] - ds.row(b)[j];
      s += t * t;
    }
    return s;
  };
  for (std::size_t a = 0; a < ds.n; ++a) {
    for (std::size_t b = 0; b < ds.n; ++b) {
      for (std::size_t c2 = 0; c2 < ds.n; ++c2) {
        if (ds.labels[b] != ds.labels[c2]) continue;
        if (sqdist(a, b) < sqdist(a, c2)) {
          CHECK(K.at(a, b) >= K.at(a, c2));
        }
      }
    }
  }
}

TEST_CASE("alpha endpoints reduce to the pure kernels") {
  BlobSpec spec;
  spec.n = 30;
  spec.d = 4;
  spec.classes = 3;
  spec.seed = 13;
  const Dataset ds = make_blobs(spec);

  KernelParams p;
  p.sigma = 2.5;
  p.gamma = 0.1;

  p.alpha = 1.0;
  const KernelMatrix pure_gauss = build_kernel(ds, p);
  p.alpha = 0.0;
  const KernelMatrix pure_class = build_kernel(ds, p);

  for (std::size_t i = 0; i < ds.n; ++i) {
    for (std::size_t j = 0; j < ds.n; ++j) {
      double sq = 0.0;
      for (std::size_t k = 0; k < ds.d; ++k) {
        const double t = ds.row(i)[k] - ds.row(j)[k];
        sq += t * t;
      }
      const double gauss = i == j ? 1.0 : std::exp(-sq / (2.0 * p.sigma * p.sigma));
      const double cls = ds.labels[i] == ds.labels[j] ? 1.0 : p.gamma;
      CHECK(pure_gauss.at(i, j) == doctest::Approx(gauss).epsilon(1e-15));
      CHECK(pure_class.at(i, j) == cls);
    }
  }
}

TEST_CASE("kernel params are validated") {
  KernelParams p;
  p.sigma = 0.0;
  CHECK_THROWS_AS(p.validate(), DataError);
  p.sigma = 1.0;
  p.alpha = 1.5;
  CHECK_THROWS_AS(p.validate(), DataError);
  p.alpha = 0.5;
  p.gamma = 1.0;
  CHECK_THROWS_AS(p.validate(), DataError);
}
