#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "knng/dataset.hpp"
#include "knng/model_io.hpp"
#include "knng/synthetic.hpp"

using namespace knng;

namespace {

const char* cli = KNNG_CLI_PATH;

struct RunResult {
  int exit_code;
  std::string output;  // stdout + stderr
};

RunResult run(const std::string& args) {
  const std::string log = "/tmp/knng_cli_out.txt";
  const std::string cmd = std::string(cli) + " " + args + " > " + log + " 2>&1";
  const int status = std::system(cmd.c_str());
  std::ifstream in(log);
  std::stringstream buf;
  buf << in.rdbuf();
  return {WEXITSTATUS(status), buf.str()};
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void make_blob_csv(const std::string& path, std::size_t n = 200, std::uint64_t seed = 42) {
  BlobSpec spec;
  spec.n = n;
  spec.d = 5;
  spec.classes = 3;
  spec.stddev = 0.9;
  spec.seed = seed;
  write_csv(make_blobs(spec), path);
}

}  // namespace

TEST_CASE("train then inspect works end to end") {
  make_blob_csv("/tmp/knng_cli_blobs.csv");
  const RunResult trained = run(
      "train --data /tmp/knng_cli_blobs.csv --out /tmp/knng_cli_model.kng "
      "--trace-out /tmp/knng_cli_trace.csv --seed 7");
  CHECK(trained.exit_code == 0);
  CHECK(trained.output.find("mean K_j") != std::string::npos);

  const RunResult inspected = run("inspect --model /tmp/knng_cli_model.kng");
  CHECK(inspected.exit_code == 0);
  CHECK(inspected.output.find("KNNG v1") != std::string::npos);
  CHECK(inspected.output.find("n: 200") != std::string::npos);

  // The trace CSV's objective column must be non-increasing.
  std::ifstream trace("/tmp/knng_cli_trace.csv");
  std::string line;
  std::getline(trace, line);
  CHECK(line == "sweep,objective");
  double prev = 1e300;
  int rows = 0;
  while (std::getline(trace, line)) {
    const double obj = std::stod(line.substr(line.find(',') + 1));
    CHECK(obj <= prev);
    prev = obj;
    ++rows;
  }
  CHECK(rows >= 2);
}

TEST_CASE("precondition violations exit with the data error code") {
  make_blob_csv("/tmp/knng_cli_blobs.csv");
  const RunResult r = run(
      "train --data /tmp/knng_cli_blobs.csv --out /tmp/knng_cli_bad.kng "
      "--lambda-min 1e9 --lambda-max 2e9");
  CHECK(r.exit_code == 2);
  CHECK(r.output.find("precondition") != std::string::npos);
}

TEST_CASE("predict writes original label strings and mean latency") {
  make_blob_csv("/tmp/knng_cli_blobs.csv");
  REQUIRE(run("train --data /tmp/knng_cli_blobs.csv --out /tmp/knng_cli_model.kng --seed 7")
              .exit_code == 0);
  // Replaying the training file as queries exercises the label-column drop.
  const RunResult r = run(
      "predict --model /tmp/knng_cli_model.kng --queries /tmp/knng_cli_blobs.csv "
      "--out /tmp/knng_cli_preds.txt");
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("us/query") != std::string::npos);

  // Training rows are distinct points, so each prediction is the stored
  // consensus label of its own node.
  const ModelFile model = load_model("/tmp/knng_cli_model.kng");
  std::ifstream preds("/tmp/knng_cli_preds.txt");
  std::string line;
  std::size_t row = 0;
  while (std::getline(preds, line)) {
    REQUIRE(row < model.index.n);
    CHECK(line ==
          model.class_names[static_cast<std::size_t>(
              model.index.node_label[row])]);
    ++row;
  }
  CHECK(row == model.index.n);
}

TEST_CASE("predict rejects dimension mismatches with both sizes named") {
  make_blob_csv("/tmp/knng_cli_blobs.csv");
  REQUIRE(run("train --data /tmp/knng_cli_blobs.csv --out /tmp/knng_cli_model.kng")
              .exit_code == 0);
  {
    std::ofstream bad("/tmp/knng_cli_badq.csv");
    bad << "1,2,3\n";
  }
  const RunResult r = run(
      "predict --model /tmp/knng_cli_model.kng --queries /tmp/knng_cli_badq.csv "
      "--out /tmp/knng_cli_badq_preds.txt");
  CHECK(r.exit_code == 2);
  CHECK(r.output.find("3") != std::string::npos);
  CHECK(r.output.find("5") != std::string::npos);
}

TEST_CASE("predicting an empty query file yields empty output and success") {
  make_blob_csv("/tmp/knng_cli_blobs.csv");
  REQUIRE(run("train --data /tmp/knng_cli_blobs.csv --out /tmp/knng_cli_model.kng")
              .exit_code == 0);
  {
    std::ofstream empty("/tmp/knng_cli_emptyq.csv");
  }
  const RunResult r = run(
      "predict --model /tmp/knng_cli_model.kng --queries /tmp/knng_cli_emptyq.csv "
      "--out /tmp/knng_cli_empty_preds.txt");
  CHECK(r.exit_code == 0);
  CHECK(slurp("/tmp/knng_cli_empty_preds.txt").empty());
}

TEST_CASE("evaluate emits identical reports across runs") {
  make_blob_csv("/tmp/knng_cli_blobs.csv", 150, 3);
  const std::string args =
      "evaluate --data /tmp/knng_cli_blobs.csv --folds 5 --seed 7 --with-baselines "
      "--report-json ";
  CHECK(run(args + "/tmp/knng_cli_r1.json").exit_code == 0);
  CHECK(run(args + "/tmp/knng_cli_r2.json").exit_code == 0);
  const std::string r1 = slurp("/tmp/knng_cli_r1.json");
  CHECK(!r1.empty());
  CHECK(r1 == slurp("/tmp/knng_cli_r2.json"));
  CHECK(r1.find("knn-graph") != std::string::npos);
  CHECK(r1.find("bruteforce-knn") != std::string::npos);
  CHECK(r1.find("static-hnsw") != std::string::npos);
}

TEST_CASE("config files merge under explicit flags") {
  make_blob_csv("/tmp/knng_cli_blobs.csv");
  {
    std::ofstream cfg("/tmp/knng_cli_cfg.json");
    cfg << "{\"seed\": 123, \"ef_search\": 4}";
  }
  const RunResult ok = run(
      "train --data /tmp/knng_cli_blobs.csv --out /tmp/knng_cli_cfgmodel.kng "
      "--config /tmp/knng_cli_cfg.json");
  CHECK(ok.exit_code == 0);
  const ModelInfo info = inspect_model("/tmp/knng_cli_cfgmodel.kng");
  CHECK(info.params.ef_search == 4);
  CHECK(info.metadata_json.find("\"seed\": 123") != std::string::npos);

  {
    std::ofstream cfg("/tmp/knng_cli_cfg_bad.json");
    cfg << "{\"not_a_key\": 1}";
  }
  const RunResult bad = run(
      "train --data /tmp/knng_cli_blobs.csv --out /tmp/knng_cli_x.kng "
      "--config /tmp/knng_cli_cfg_bad.json");
  CHECK(bad.exit_code == 2);
  CHECK(bad.output.find("unknown config key") != std::string::npos);
}

TEST_CASE("usage errors exit with code 1") {
  CHECK(run("").exit_code == 1);
  CHECK(run("train").exit_code == 1);  // missing required options
  CHECK(run("no-such-command").exit_code == 1);
}

TEST_CASE("bench runs a small matrix and writes the CSV") {
  const RunResult r = run(
      "bench --sizes 256,512 --queries 40 --repeats 3 --dims 4 --classes 2 "
      "--blob-std 0.8 --seed 11 --out /tmp/knng_cli_bench.csv");
  CHECK(r.exit_code == 0);
  const std::string csv = slurp("/tmp/knng_cli_bench.csv");
  CHECK(csv.find("n,method,queries") != std::string::npos);
  CHECK(csv.find("256,bruteforce-knn") != std::string::npos);
  CHECK(csv.find("512,knn-graph") != std::string::npos);
}
