#include "knng/evaluation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

#include <json.hpp>

#include "knng/classifier.hpp"
#include "knng/distance.hpp"
#include "knng/errors.hpp"
#include "knng/rng.hpp"

namespace knng {

using nlohmann::json;

std::uint64_t ConfusionMatrix::total() const {
  std::uint64_t t = 0;
  for (auto v : counts) t += v;
  return t;
}

MacroMetrics macro_metrics(const ConfusionMatrix& cm, bool f1_per_class) {
  if (cm.c < 1 || cm.total() == 0) throw DataError("empty confusion matrix");
  double sum_p = 0.0, sum_r = 0.0, sum_f1 = 0.0;
  for (int k = 0; k < cm.c; ++k) {
    const double tp = static_cast<double>(cm.at(k, k));
    double fp = 0.0, fn = 0.0;
    for (int other = 0; other < cm.c; ++other) {
      if (other == k) continue;
      fp += static_cast<double>(cm.at(other, k));
      fn += static_cast<double>(cm.at(k, other));
    }
    const double p = tp + fp > 0.0 ? tp / (tp + fp) : 0.0;
    const double r = tp + fn > 0.0 ? tp / (tp + fn) : 0.0;
    sum_p += p;
    sum_r += r;
    sum_f1 += p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
  }
  MacroMetrics m;
  const double c = static_cast<double>(cm.c);
  m.precision = sum_p / c;
  m.recall = sum_r / c;
  m.f1 = f1_per_class ? sum_f1 / c
                      : (m.precision + m.recall > 0.0
                             ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
                             : 0.0);
  return m;
}

double accuracy(const ConfusionMatrix& cm) {
  const std::uint64_t total = cm.total();
  if (total == 0) throw DataError("empty confusion matrix");
  std::uint64_t correct = 0;
  for (int k = 0; k < cm.c; ++k) correct += cm.at(k, k);
  return static_cast<double>(correct) / static_cast<double>(total);
}

void MethodReport::finalize() {
  const double f = static_cast<double>(per_fold.size());
  accuracy = macro_precision = macro_recall = macro_f1 = 0.0;
  mean_distance_evals_per_query = 0.0;
  total_train_seconds = total_predict_seconds = 0.0;
  std::uint64_t evals = 0, tests = 0;
  for (const auto& fold : per_fold) {
    accuracy += fold.accuracy;
    macro_precision += fold.macro_precision;
    macro_recall += fold.macro_recall;
    macro_f1 += fold.macro_f1;
    evals += fold.distance_evals;
    tests += fold.test_count;
    total_train_seconds += fold.train_seconds;
    total_predict_seconds += fold.predict_seconds;
  }
  accuracy /= f;
  macro_precision /= f;
  macro_recall /= f;
  macro_f1 /= f;
  mean_distance_evals_per_query =
      tests > 0 ? static_cast<double>(evals) / static_cast<double>(tests) : 0.0;
}

namespace {

FoldMetrics fold_metrics_from(const ConfusionMatrix& cm, bool f1_per_class) {
  FoldMetrics fm;
  const MacroMetrics m = macro_metrics(cm, f1_per_class);
  fm.accuracy = accuracy(cm);
  fm.macro_precision = m.precision;
  fm.macro_recall = m.recall;
  fm.macro_f1 = m.f1;
  fm.test_count = cm.total();
  return fm;
}

}  // namespace

EvalReport cross_validate(const Dataset& ds, const RunConfig& cfg, bool with_baselines) {
  cfg.validate();
  ds.validate();
  if (static_cast<std::size_t>(cfg.folds) > ds.n) {
    throw DataError("more folds than samples");
  }

  const FoldAssignment fa = stratified_folds(ds, cfg.folds, cfg.seed + kFoldSeedOffset);

  EvalReport report;
  report.folds = cfg.folds;
  report.seed = cfg.seed;
  MethodReport proposed{.name = "knn-graph"};
  MethodReport brute{.name = "bruteforce-knn"};
  MethodReport stat{.name = "static-hnsw"};

  for (int fold = 0; fold < cfg.folds; ++fold) {
    std::vector<char> keep_train(ds.n), keep_test(ds.n);
    for (std::size_t i = 0; i < ds.n; ++i) {
      const bool held_out = fa.fold_of[i] == fold;
      keep_train[i] = held_out ? 0 : 1;
      keep_test[i] = held_out ? 1 : 0;
    }
    const Dataset train_set = subset(ds, keep_train);
    const Dataset test_set = subset(ds, keep_test);
    if (test_set.n == 0) continue;

    std::vector<char> class_present(static_cast<std::size_t>(ds.c), 0);
    for (int y : train_set.labels) class_present[static_cast<std::size_t>(y)] = 1;
    for (int k = 0; k < ds.c; ++k) {
      if (!class_present[static_cast<std::size_t>(k)]) {
        throw DataError("fold " + std::to_string(fold) + " leaves class '" +
                        ds.class_names[static_cast<std::size_t>(k)] +
                        "' without training samples; use fewer folds or more data");
      }
    }

    // Proposed method.
    {
      const auto t0 = std::chrono::steady_clock::now();
      const TrainedModel model = train(train_set, cfg);
      const auto t1 = std::chrono::steady_clock::now();
      ConfusionMatrix cm(ds.c);
      const std::uint64_t evals0 = distance_evals();
      for (std::size_t i = 0; i < test_set.n; ++i) {
        cm.add(test_set.labels[i], model.predict(test_set.row(i)));
      }
      const auto t2 = std::chrono::steady_clock::now();
      FoldMetrics fm = fold_metrics_from(cm, cfg.f1_per_class);
      fm.distance_evals = distance_evals() - evals0;
      fm.train_seconds = std::chrono::duration<double>(t1 - t0).count();
      fm.predict_seconds = std::chrono::duration<double>(t2 - t1).count();
      proposed.per_fold.push_back(fm);
    }

    if (with_baselines) {
      {
        ConfusionMatrix cm(ds.c);
        const auto t1 = std::chrono::steady_clock::now();
        const std::uint64_t evals0 = distance_evals();
        for (std::size_t i = 0; i < test_set.n; ++i) {
          cm.add(test_set.labels[i],
                 baseline_bruteforce_knn(train_set, test_set.row(i), cfg.baseline_k));
        }
        const auto t2 = std::chrono::steady_clock::now();
        FoldMetrics fm = fold_metrics_from(cm, cfg.f1_per_class);
        fm.distance_evals = distance_evals() - evals0;
        fm.predict_seconds = std::chrono::duration<double>(t2 - t1).count();
        brute.per_fold.push_back(fm);
      }
      {
        const auto t0 = std::chrono::steady_clock::now();
        const StaticHnswBaseline baseline(train_set, index_params_from_config(cfg));
        const auto t1 = std::chrono::steady_clock::now();
        ConfusionMatrix cm(ds.c);
        const std::uint64_t evals0 = distance_evals();
        for (std::size_t i = 0; i < test_set.n; ++i) {
          cm.add(test_set.labels[i],
                 baseline.predict(test_set.row(i), cfg.baseline_k, cfg.baseline_ef));
        }
        const auto t2 = std::chrono::steady_clock::now();
        FoldMetrics fm = fold_metrics_from(cm, cfg.f1_per_class);
        fm.distance_evals = distance_evals() - evals0;
        fm.train_seconds = std::chrono::duration<double>(t1 - t0).count();
        fm.predict_seconds = std::chrono::duration<double>(t2 - t1).count();
        stat.per_fold.push_back(fm);
      }
    }
  }

  proposed.finalize();
  report.methods.push_back(std::move(proposed));
  if (with_baselines) {
    brute.finalize();
    stat.finalize();
    report.methods.push_back(std::move(brute));
    report.methods.push_back(std::move(stat));
  }
  return report;
}

std::string EvalReport::to_json() const {
  json j;
  j["folds"] = folds;
  j["seed"] = seed;
  j["methods"] = json::array();
  for (const auto& m : methods) {
    json jm;
    jm["name"] = m.name;
    jm["accuracy"] = m.accuracy;
    jm["macro_precision"] = m.macro_precision;
    jm["macro_recall"] = m.macro_recall;
    jm["macro_f1"] = m.macro_f1;
    jm["mean_distance_evals_per_query"] = m.mean_distance_evals_per_query;
    jm["per_fold"] = json::array();
    for (const auto& fold : m.per_fold) {
      json jf;
      jf["accuracy"] = fold.accuracy;
      jf["macro_precision"] = fold.macro_precision;
      jf["macro_recall"] = fold.macro_recall;
      jf["macro_f1"] = fold.macro_f1;
      jf["distance_evals"] = fold.distance_evals;
      jf["test_count"] = fold.test_count;
      jm["per_fold"].push_back(jf);
    }
    j["methods"].push_back(jm);
  }
  return j.dump(2);
}

std::string EvalReport::to_csv() const {
  std::ostringstream out;
  out << "method,fold,accuracy,macro_precision,macro_recall,macro_f1,"
         "distance_evals,test_count,train_seconds,predict_seconds\n";
  char buf[64];
  for (const auto& m : methods) {
    for (std::size_t f = 0; f < m.per_fold.size(); ++f) {
      const auto& fold = m.per_fold[f];
      out << m.name << "," << f << ",";
      std::snprintf(buf, sizeof(buf), "%.6f,%.6f,%.6f,%.6f,", fold.accuracy,
                    fold.macro_precision, fold.macro_recall, fold.macro_f1);
      out << buf << fold.distance_evals << "," << fold.test_count << ",";
      std::snprintf(buf, sizeof(buf), "%.6f,%.6f\n", fold.train_seconds, fold.predict_seconds);
      out << buf;
    }
  }
  return out.str();
}

std::string EvalReport::to_table() const {
  std::ostringstream out;
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%-16s %9s %9s %9s %9s %14s %11s\n", "method", "acc",
                "macro-P", "macro-R", "macro-F1", "dist-evals/q", "predict-s");
  out << buf;
  for (const auto& m : methods) {
    std::snprintf(buf, sizeof(buf), "%-16s %9.4f %9.4f %9.4f %9.4f %14.1f %11.4f\n",
                  m.name.c_str(), m.accuracy, m.macro_precision, m.macro_recall, m.macro_f1,
                  m.mean_distance_evals_per_query, m.total_predict_seconds);
    out << buf;
  }
  return out.str();
}

std::vector<BenchRow> bench_inference(const std::vector<BenchModel>& models,
                                      const std::vector<double>& queries, std::size_t d,
                                      int repeats) {
  if (repeats < 3) throw DataError("bench needs at least 3 repeats");
  if (d == 0 || queries.size() % d != 0) throw DataError("query block size mismatch");
  const std::size_t nq = queries.size() / d;

  std::vector<BenchRow> rows;
  for (const auto& model : models) {
    BenchRow row;
    row.name = model.name;
    row.queries = nq;

    const std::uint64_t evals0 = distance_evals();
    for (std::size_t i = 0; i < nq; ++i) {
      (void)model.predict(queries.data() + i * d);
    }
    row.distance_evals_per_query =
        static_cast<double>(distance_evals() - evals0) / static_cast<double>(nq);

    std::vector<double> times(static_cast<std::size_t>(repeats));
    for (int r = 0; r < repeats; ++r) {
      const auto t0 = std::chrono::steady_clock::now();
      for (std::size_t i = 0; i < nq; ++i) {
        (void)model.predict(queries.data() + i * d);
      }
      const auto t1 = std::chrono::steady_clock::now();
      times[static_cast<std::size_t>(r)] = std::chrono::duration<double>(t1 - t0).count();
    }
    std::sort(times.begin(), times.end());
    row.total_seconds = times[times.size() / 2];
    row.median_seconds_per_query = row.total_seconds / static_cast<double>(nq);
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string bench_csv(const std::vector<BenchRow>& rows) {
  std::ostringstream out;
  out << "method,queries,distance_evals_per_query,median_seconds_per_query,total_seconds\n";
  char buf[96];
  for (const auto& r : rows) {
    out << r.name << "," << r.queries << ",";
    std::snprintf(buf, sizeof(buf), "%.2f,%.9f,%.6f\n", r.distance_evals_per_query,
                  r.median_seconds_per_query, r.total_seconds);
    out << buf;
  }
  return out.str();
}

}  // namespace knng
