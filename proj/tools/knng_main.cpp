// knng: train / predict / evaluate / bench / inspect for the adaptive
// neighborhood graph classifier.
//
// Exit codes: 0 success, 1 usage error, 2 data/configuration error,
// 3 internal invariant violation.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "knng/classifier.hpp"
#include "knng/config.hpp"
#include "knng/dataset.hpp"
#include "knng/errors.hpp"
#include "knng/evaluation.hpp"
#include "knng/model_io.hpp"
#include "knng/rng.hpp"
#include "knng/synthetic.hpp"

namespace {

using namespace knng;

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write file: " + path);
  out << content;
  if (!out) throw DataError("write failed: " + path);
}

// The config file is applied before flag parsing so that flags override it.
RunConfig base_config_from_argv(int argc, char** argv) {
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--config" && i + 1 < argc) {
      return RunConfig::from_json_file(argv[i + 1]);
    }
    if (arg.rfind("--config=", 0) == 0) {
      return RunConfig::from_json_file(arg.substr(9));
    }
  }
  return RunConfig{};
}

void add_config_options(CLI::App* cmd, RunConfig& cfg) {
  cmd->add_option("--config", "JSON config file; explicit flags override its values")
      ->type_name("FILE");
  cmd->add_option("--alpha", cfg.alpha, "kernel mixing weight in [0,1]");
  cmd->add_option("--sigma", cfg.sigma, "Gaussian bandwidth (0 = median heuristic)");
  cmd->add_option("--gamma", cfg.gamma, "class-mismatch discount in [0,1)");
  cmd->add_option("--density-scales", cfg.density_scales,
                  "neighborhood sizes for the density estimate")
      ->delimiter(',');
  cmd->add_option("--lambda-min", cfg.lambda_min, "lower regularization bound (0 = auto)");
  cmd->add_option("--lambda-max", cfg.lambda_max, "upper regularization bound (0 = auto)");
  cmd->add_option("--tol", cfg.tol, "solver convergence tolerance");
  cmd->add_option("--max-sweeps", cfg.max_sweeps, "solver sweep cap");
  cmd->add_option("--self-weight-scale", cfg.self_weight_scale,
                  "multiplier on the consensus self-reinforcement weight");
  cmd->add_option("--M", cfg.M, "upper-layer degree cap");
  cmd->add_option("--max-degree0", cfg.max_degree0, "layer-0 degree cap (0 = 2M)");
  cmd->add_option("--ef-construction", cfg.ef_construction, "build-time candidate pool");
  cmd->add_option("--ef-search", cfg.ef_search, "query-time candidate pool");
  cmd->add_option("--folds", cfg.folds, "cross-validation folds");
  cmd->add_option("--seed", cfg.seed, "master random seed");
  cmd->add_flag("--normalize,!--no-normalize", cfg.normalize,
                "z-score features per dimension before training");
  cmd->add_option("--threads", cfg.threads, "worker cap for parallel stages (0 = all cores)");
  cmd->add_option("--kernel-budget-gib", cfg.kernel_budget_gib,
                  "memory budget for kernel + Gram (0 = 70% of available RAM)");
  cmd->add_option("--baseline-k", cfg.baseline_k, "k for the in-repo baselines");
  cmd->add_option("--baseline-ef", cfg.baseline_ef, "ef for the static-HNSW baseline");
  cmd->add_flag("--f1-per-class", cfg.f1_per_class,
                "macro-F1 as the mean of per-class F1 instead of the harmonic mean "
                "of macro-P and macro-R");
}

void write_trace_csv(const SolveTrace& trace, const std::string& path) {
  std::ostringstream out;
  out << "sweep,objective\n";
  char buf[48];
  for (std::size_t s = 0; s < trace.objective_per_sweep.size(); ++s) {
    std::snprintf(buf, sizeof(buf), "%zu,%.12g\n", s, trace.objective_per_sweep[s]);
    out << buf;
  }
  write_text_file(path, out.str());
}

int run_train(const std::string& data_path, const std::string& label_col,
              const std::string& out_path, const std::string& trace_path, RunConfig& cfg) {
  CsvOptions csv;
  csv.label_column = label_col;
  const Dataset ds = load_csv(data_path, csv);

  const TrainedModel model = train(ds, cfg);
  save_model(model.to_file(), out_path);
  if (!trace_path.empty()) write_trace_csv(model.trace, trace_path);

  std::printf("trained on %zu samples, d=%zu, c=%d\n", ds.n, ds.d, ds.c);
  std::printf("mean K_j: %.3f   avg layer-0 degree: %.2f   top level: %d\n",
              model.stats.mean_kj, model.index.avg_degree, model.index.top_level);
  std::printf("solver sweeps: %d (%s)   sigma: %.6g   lambda: [%.6g, %.6g]\n",
              model.stats.trace_sweeps, model.stats.all_converged ? "converged" : "hit cap",
              model.config.resolved_sigma, model.config.resolved_lambda_min,
              model.config.resolved_lambda_max);
  std::printf("build time: %.2f s   model: %s\n", model.stats.build_seconds, out_path.c_str());
  return 0;
}

int run_predict(const std::string& model_path, const std::string& query_path,
                const std::string& label_col, const std::string& out_path) {
  const TrainedModel model = model_from_file(load_model(model_path));
  std::vector<double> queries = load_query_matrix(query_path, model.index.d, label_col);
  const std::size_t nq = model.index.d > 0 ? queries.size() / model.index.d : 0;

  std::ostringstream out;
  const auto t0 = std::chrono::steady_clock::now();
  for (std::size_t i = 0; i < nq; ++i) {
    const int cls = model.predict(queries.data() + i * model.index.d);
    out << model.class_names[static_cast<std::size_t>(cls)] << "\n";
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_text_file(out_path, out.str());

  if (nq > 0) {
    std::printf("%zu predictions -> %s (%.2f us/query)\n", nq, out_path.c_str(),
                1e6 * secs / static_cast<double>(nq));
  } else {
    std::printf("0 predictions -> %s\n", out_path.c_str());
  }
  return 0;
}

int run_evaluate(const std::string& data_path, const std::string& label_col,
                 bool with_baselines, const std::string& json_path,
                 const std::string& csv_path, RunConfig& cfg) {
  CsvOptions csv;
  csv.label_column = label_col;
  const Dataset ds = load_csv(data_path, csv);
  const EvalReport report = cross_validate(ds, cfg, with_baselines);
  std::cout << report.to_table();
  for (const auto& m : report.methods) {
    std::printf("%-16s total train %.2f s, total predict %.4f s\n", m.name.c_str(),
                m.total_train_seconds, m.total_predict_seconds);
  }
  if (!json_path.empty()) write_text_file(json_path, report.to_json());
  if (!csv_path.empty()) write_text_file(csv_path, report.to_csv());
  return 0;
}

int run_bench(const std::vector<std::size_t>& sizes, std::size_t n_queries, int repeats,
              std::size_t dims, int classes, double blob_std, const std::string& out_path,
              const std::string& dump_dir, RunConfig& cfg) {
  std::ostringstream all_csv;
  all_csv << "n,method,queries,distance_evals_per_query,median_seconds_per_query,total_seconds\n";

  for (const std::size_t n : sizes) {
    BlobSpec spec;
    spec.n = n;
    spec.d = dims;
    spec.classes = classes;
    spec.stddev = blob_std;
    spec.seed = cfg.seed + kDataSeedOffset;
    const Dataset ds = make_blobs(spec);
    const QuerySet qs = make_queries(spec, n_queries, cfg.seed + kQuerySeedOffset);
    if (!dump_dir.empty()) {
      write_csv(ds, dump_dir + "/blobs_" + std::to_string(n) + ".csv");
    }

    std::vector<BenchModel> models;

    models.push_back({"bruteforce-knn", [&ds, &cfg](const double* q) {
                        return baseline_bruteforce_knn(ds, q, cfg.baseline_k);
                      }});

    const StaticHnswBaseline stat(ds, index_params_from_config(cfg));
    models.push_back({"static-hnsw", [&stat, &cfg](const double* q) {
                        return stat.predict(q, cfg.baseline_k, cfg.baseline_ef);
                      }});

    TrainedModel proposed;
    bool have_proposed = true;
    try {
      proposed = train(ds, cfg);
    } catch (const DataError& e) {
      have_proposed = false;
      std::fprintf(stderr, "warning: skipping knn-graph at n=%zu: %s\n", n, e.what());
    }
    if (have_proposed) {
      models.push_back({"knn-graph", [&proposed](const double* q) {
                          return proposed.predict(q);
                        }});
    }

    std::printf("-- n=%zu (d=%zu, %d classes, %zu queries, %d repeats)\n", n, dims, classes,
                n_queries, repeats);
    const auto rows = bench_inference(models, qs.points, dims, repeats);
    for (const auto& r : rows) {
      std::printf("%-16s %12.1f dist-evals/q %14.3f us/q\n", r.name.c_str(),
                  r.distance_evals_per_query, 1e6 * r.median_seconds_per_query);
      char buf[96];
      all_csv << n << "," << r.name << "," << r.queries << ",";
      std::snprintf(buf, sizeof(buf), "%.2f,%.9f,%.6f\n", r.distance_evals_per_query,
                    r.median_seconds_per_query, r.total_seconds);
      all_csv << buf;
    }
  }

  if (!out_path.empty()) write_text_file(out_path, all_csv.str());
  return 0;
}

int run_inspect(const std::string& model_path, bool config_only) {
  const ModelInfo info = inspect_model(model_path);
  if (!config_only) {
    std::printf("format: KNNG v%u\n", info.version);
    std::printf("n: %llu   d: %u   c: %u\n", static_cast<unsigned long long>(info.n), info.d,
                info.c);
    std::printf("layers: %u   avg layer-0 degree: %.2f\n", info.top_level + 1, info.avg_degree);
    std::printf("M: %d   max_degree0: %d   ef_construction: %d   ef_search: %d\n", info.params.M,
                info.params.max_degree0, info.params.ef_construction, info.params.ef_search);
    std::printf("level_norm: %.6f   level seed: %llu\n", info.params.level_norm,
                static_cast<unsigned long long>(info.params.seed));
    std::printf("config:\n");
  }
  std::printf("%s\n", info.metadata_json.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"adaptive neighborhood graph classifier"};
  app.require_subcommand(1);

  RunConfig cfg;
  try {
    cfg = base_config_from_argv(argc, argv);
  } catch (const DataError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }

  std::string data_path, model_path, query_path, out_path, trace_path;
  std::string json_path, csv_path, dump_dir;
  std::string label_col = "last";
  std::string query_label_col = "auto";
  bool with_baselines = false;
  bool config_only = false;
  std::vector<std::size_t> sizes = {2048, 8192, 32768};
  std::size_t n_queries = 1000;
  int repeats = 5;
  std::size_t dims = 10;
  int classes = 3;
  double blob_std = 1.0;

  auto* train_cmd = app.add_subcommand("train", "learn neighborhoods and build the model file");
  train_cmd->add_option("--data", data_path, "training CSV")->required();
  train_cmd->add_option("--label-col", label_col, "label column: index, name, or 'last'");
  train_cmd->add_option("--out", out_path, "output model file")->required();
  train_cmd->add_option("--trace-out", trace_path, "write per-sweep objective CSV");
  add_config_options(train_cmd, cfg);

  auto* predict_cmd = app.add_subcommand("predict", "label queries with a trained model");
  predict_cmd->add_option("--model", model_path, "model file")->required();
  predict_cmd->add_option("--queries", query_path, "query CSV")->required();
  predict_cmd->add_option("--label-col", query_label_col,
                          "query label column to drop: auto, none, index, name, or 'last'");
  predict_cmd->add_option("--out", out_path, "output predictions file")->required();

  auto* eval_cmd = app.add_subcommand("evaluate", "stratified cross-validation report");
  eval_cmd->add_option("--data", data_path, "dataset CSV")->required();
  eval_cmd->add_option("--label-col", label_col, "label column: index, name, or 'last'");
  eval_cmd->add_flag("--with-baselines", with_baselines,
                     "also run brute-force kNN and static-HNSW voting on identical folds");
  eval_cmd->add_option("--report-json", json_path, "write the deterministic report as JSON");
  eval_cmd->add_option("--report-csv", csv_path, "write per-fold metrics and timings as CSV");
  add_config_options(eval_cmd, cfg);

  auto* bench_cmd = app.add_subcommand("bench", "inference latency and operation-count harness");
  bench_cmd->add_option("--sizes", sizes, "training set sizes")->delimiter(',');
  bench_cmd->add_option("--queries", n_queries, "queries per size");
  bench_cmd->add_option("--repeats", repeats, "timing repeats (median reported)");
  bench_cmd->add_option("--dims", dims, "synthetic dimensionality");
  bench_cmd->add_option("--classes", classes, "synthetic class count");
  bench_cmd->add_option("--blob-std", blob_std, "synthetic blob standard deviation");
  bench_cmd->add_option("--out", out_path, "write combined results CSV");
  bench_cmd->add_option("--dump-data", dump_dir, "write generated datasets into this directory");
  add_config_options(bench_cmd, cfg);

  auto* inspect_cmd = app.add_subcommand("inspect", "print a model file's header and config");
  inspect_cmd->add_option("--model", model_path, "model file")->required();
  inspect_cmd->add_flag("--config-only", config_only, "print only the embedded config JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (train_cmd->parsed()) return run_train(data_path, label_col, out_path, trace_path, cfg);
    if (predict_cmd->parsed()) return run_predict(model_path, query_path, query_label_col, out_path);
    if (eval_cmd->parsed()) {
      return run_evaluate(data_path, label_col, with_baselines, json_path, csv_path, cfg);
    }
    if (bench_cmd->parsed()) {
      return run_bench(sizes, n_queries, repeats, dims, classes, blob_std, out_path, dump_dir, cfg);
    }
    if (inspect_cmd->parsed()) return run_inspect(model_path, config_only);
  } catch (const DataError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const InternalError& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return 3;
  }
  return 1;
}
