#include <doctest.h>

#include <cmath>

#include "knng/classifier.hpp"
#include "knng/errors.hpp"
#include "knng/evaluation.hpp"
#include "knng/rng.hpp"
#include "knng/synthetic.hpp"

using namespace knng;

namespace {

// Naive per-class loop, written independently of the library path.
void metrics_oracle(const ConfusionMatrix& cm, double* precision, double* recall, double* f1,
                    double* acc) {
  double sp = 0.0, sr = 0.0;
  std::uint64_t correct = 0, total = 0;
  for (int k = 0; k < cm.c; ++k) {
    std::uint64_t tp = cm.at(k, k), row = 0, col = 0;
    for (int o = 0; o < cm.c; ++o) {
      row += cm.at(k, o);
      col += cm.at(o, k);
      total += cm.at(k, o);
    }
    correct += tp;
    sp += col > 0 ? static_cast<double>(tp) / static_cast<double>(col) : 0.0;
    sr += row > 0 ? static_cast<double>(tp) / static_cast<double>(row) : 0.0;
  }
  *precision = sp / cm.c;
  *recall = sr / cm.c;
  *f1 = *precision + *recall > 0 ? 2.0 * *precision * *recall / (*precision + *recall) : 0.0;
  *acc = static_cast<double>(correct) / static_cast<double>(total);
}

ConfusionMatrix random_cm(Rng& rng, int c) {
  ConfusionMatrix cm(c);
  for (int t = 0; t < c; ++t) {
    for (int p = 0; p < c; ++p) {
      for (std::uint64_t reps = rng.next_below(20); reps > 0; --reps) cm.add(t, p);
    }
  }
  if (cm.total() == 0) cm.add(0, 0);
  return cm;
}

}  // namespace

TEST_CASE("perfect predictions score 1 everywhere") {
  ConfusionMatrix cm(3);
  cm.add(0, 0);
  cm.add(1, 1);
  cm.add(2, 2);
  const MacroMetrics m = macro_metrics(cm);
  CHECK(m.precision == 1.0);
  CHECK(m.recall == 1.0);
  CHECK(m.f1 == 1.0);
  CHECK(accuracy(cm) == 1.0);
}

TEST_CASE("worked two-class example") {
  // counts [[3,1],[2,4]]: P = [3/5, 4/5], R = [3/4, 4/6].
  ConfusionMatrix cm(2);
  for (int i = 0; i < 3; ++i) cm.add(0, 0);
  cm.add(0, 1);
  for (int i = 0; i < 2; ++i) cm.add(1, 0);
  for (int i = 0; i < 4; ++i) cm.add(1, 1);
  const MacroMetrics m = macro_metrics(cm);
  CHECK(m.precision == doctest::Approx(0.7).epsilon(1e-12));
  CHECK(m.recall == doctest::Approx((0.75 + 4.0 / 6.0) / 2.0).epsilon(1e-12));
  CHECK(m.f1 == doctest::Approx(2.0 * m.precision * m.recall / (m.precision + m.recall))
                    .epsilon(1e-12));
  CHECK(m.f1 == doctest::Approx(0.70415).epsilon(1e-4));
}

TEST_CASE("macro metrics match the naive oracle on random matrices") {
  Rng rng(1001);
  for (int trial = 0; trial < 1000; ++trial) {
    const int c = 2 + static_cast<int>(rng.next_below(6));
    const ConfusionMatrix cm = random_cm(rng, c);
    const MacroMetrics m = macro_metrics(cm);
    double p, r, f1, acc;
    metrics_oracle(cm, &p, &r, &f1, &acc);
    CHECK(std::abs(m.precision - p) <= 1e-12);
    CHECK(std::abs(m.recall - r) <= 1e-12);
    CHECK(std::abs(m.f1 - f1) <= 1e-12);
    CHECK(std::abs(accuracy(cm) - acc) <= 1e-12);
  }
}

TEST_CASE("balanced test sets align accuracy with macro-recall") {
  Rng rng(2002);
  for (int trial = 0; trial < 200; ++trial) {
    const int c = 2 + static_cast<int>(rng.next_below(4));
    const std::uint64_t per_class = 1 + rng.next_below(30);
    ConfusionMatrix cm(c);
    for (int t = 0; t < c; ++t) {
      for (std::uint64_t i = 0; i < per_class; ++i) {
        cm.add(t, static_cast<int>(rng.next_below(static_cast<std::uint64_t>(c))));
      }
    }
    CHECK(std::abs(accuracy(cm) - macro_metrics(cm).recall) <= 1e-12);
  }
}

TEST_CASE("per-class F1 variant differs from the harmonic-mean form") {
  ConfusionMatrix cm(2);
  for (int i = 0; i < 9; ++i) cm.add(0, 0);
  cm.add(0, 1);
  for (int i = 0; i < 4; ++i) cm.add(1, 0);
  cm.add(1, 1);
  const MacroMetrics harmonic = macro_metrics(cm, false);
  const MacroMetrics per_class = macro_metrics(cm, true);
  // Both are valid definitions; they must both be in range and disagree here.
  CHECK(harmonic.f1 > 0.0);
  CHECK(per_class.f1 > 0.0);
  CHECK(harmonic.f1 != per_class.f1);
}

TEST_CASE("zero-denominator classes score zero") {
  ConfusionMatrix cm(3);
  cm.add(0, 0);
  cm.add(1, 0);  // class 2 never appears
  const MacroMetrics m = macro_metrics(cm);
  CHECK(m.precision == doctest::Approx((0.5 + 0.0 + 0.0) / 3.0));
  CHECK(m.recall == doctest::Approx((1.0 + 0.0 + 0.0) / 3.0));
  ConfusionMatrix empty(2);
  CHECK_THROWS_AS(static_cast<void>(macro_metrics(empty)), DataError);
}

TEST_CASE("cross-validation is deterministic and exact on separable data") {
  BlobSpec spec;
  spec.n = 80;
  spec.d = 4;
  spec.classes = 2;
  spec.stddev = 0.05;  // far-apart tight blobs: trivially separable
  spec.seed = 71;
  const Dataset ds = make_blobs(spec);
  RunConfig cfg;
  cfg.folds = 4;
  cfg.seed = 5;
  const EvalReport a = cross_validate(ds, cfg, true);
  const EvalReport b = cross_validate(ds, cfg, true);
  CHECK(a.to_json() == b.to_json());
  CHECK(a.methods.size() == 3);
  for (const auto& m : a.methods) {
    CHECK(m.accuracy == 1.0);
    CHECK(m.per_fold.size() == 4);
  }
}

TEST_CASE("a fold that empties a class is reported actionably") {
  Dataset ds;
  ds.n = 8;
  ds.d = 1;
  ds.c = 2;
  ds.class_names = {"common", "rare"};
  for (int i = 0; i < 7; ++i) {
    ds.features.push_back(i);
    ds.labels.push_back(0);
  }
  ds.features.push_back(100.0);
  ds.labels.push_back(1);
  RunConfig cfg;
  cfg.folds = 2;
  CHECK_THROWS_WITH_AS(static_cast<void>(cross_validate(ds, cfg, false)),
                       doctest::Contains("fewer folds"), DataError);
}

TEST_CASE("bench counters scale exactly with brute-force training size") {
  BlobSpec spec;
  spec.n = 400;
  spec.d = 5;
  spec.classes = 2;
  spec.stddev = 1.0;
  spec.seed = 13;
  const Dataset small = make_blobs(spec);
  spec.n = 800;
  const Dataset big = make_blobs(spec);
  const QuerySet qs = make_queries(spec, 50, 9);

  std::vector<BenchModel> models;
  models.push_back({"brute-small", [&](const double* q) {
                      return baseline_bruteforce_knn(small, q, 3);
                    }});
  models.push_back({"brute-big", [&](const double* q) {
                      return baseline_bruteforce_knn(big, q, 3);
                    }});
  const auto rows = bench_inference(models, qs.points, qs.d, 3);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].distance_evals_per_query == 400.0);
  CHECK(rows[1].distance_evals_per_query == 800.0);
  CHECK(rows[1].distance_evals_per_query == 2.0 * rows[0].distance_evals_per_query);

  CHECK_THROWS_AS(static_cast<void>(bench_inference(models, qs.points, qs.d, 2)), DataError);
}
