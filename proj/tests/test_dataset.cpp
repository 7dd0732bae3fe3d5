#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <set>

#include "knng/dataset.hpp"
#include "knng/errors.hpp"
#include "knng/synthetic.hpp"

using namespace knng;

namespace {

std::string temp_path(const std::string& name) {
  return std::string("/tmp/knng_test_") + name;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  out << content;
}

}  // namespace

TEST_CASE("load_csv encodes labels by first appearance") {
  const auto path = temp_path("basic.csv");
  write_file(path, "1.0,2.0,a\n3.0,4.0,b\n5.0,6.0,a\n");
  const Dataset ds = load_csv(path);
  CHECK(ds.n == 3);
  CHECK(ds.d == 2);
  CHECK(ds.c == 2);
  CHECK(ds.labels == std::vector<int>{0, 1, 0});
  CHECK(ds.class_names == std::vector<std::string>{"a", "b"});
  CHECK(ds.row(1)[0] == 3.0);
}

TEST_CASE("load_csv detects headers and honors named label columns") {
  const auto path = temp_path("header.csv");
  write_file(path, "x,y,target\n1,2,red\n3,4,blue\n");
  CsvOptions opts;
  opts.label_column = "target";
  const Dataset ds = load_csv(path, opts);
  CHECK(ds.n == 2);
  CHECK(ds.class_names == std::vector<std::string>{"red", "blue"});
}

TEST_CASE("load_csv reports bad cells with row and column") {
  const auto path = temp_path("nan.csv");
  write_file(path, "1.0,nan,a\n2.0,3.0,b\n");
  CHECK_THROWS_WITH_AS(static_cast<void>(load_csv(path)),
                       doctest::Contains("row 1"), DataError);

  const auto ragged = temp_path("ragged.csv");
  write_file(ragged, "1.0,2.0,a\n3.0,b\n");
  CHECK_THROWS_AS(static_cast<void>(load_csv(ragged)), DataError);

  const auto empty = temp_path("empty.csv");
  write_file(empty, "");
  CHECK_THROWS_AS(static_cast<void>(load_csv(empty)), DataError);
}

TEST_CASE("load_csv keeps one sample per class") {
  const auto path = temp_path("four.csv");
  write_file(path, "0,0,w\n1,0,x\n0,1,y\n1,1,z\n");
  const Dataset ds = load_csv(path);
  CHECK(ds.n == 4);
  CHECK(ds.c == 4);
}

TEST_CASE("csv round-trip reproduces the dataset exactly") {
  BlobSpec spec;
  spec.n = 60;
  spec.d = 4;
  spec.classes = 3;
  spec.seed = 7;
  const Dataset original = make_blobs(spec);
  const auto path = temp_path("roundtrip.csv");
  write_csv(original, path);
  const Dataset reloaded = load_csv(path);
  CHECK(reloaded.n == original.n);
  CHECK(reloaded.d == original.d);
  CHECK(reloaded.c == original.c);
  CHECK(reloaded.labels == original.labels);
  CHECK(reloaded.features == original.features);  // bitwise via %.17g
  CHECK(reloaded.class_names == original.class_names);
}

TEST_CASE("stratified folds balance every class") {
  BlobSpec spec;
  spec.n = 100;
  spec.d = 3;
  spec.classes = 2;
  spec.seed = 3;
  const Dataset ds = make_blobs(spec);

  const FoldAssignment fa = stratified_folds(ds, 10, 99);
  std::vector<std::vector<int>> count(10, std::vector<int>(2, 0));
  for (std::size_t i = 0; i < ds.n; ++i) {
    count[static_cast<std::size_t>(fa.fold_of[i])][static_cast<std::size_t>(ds.labels[i])]++;
  }
  for (int f = 0; f < 10; ++f) {
    CHECK(count[static_cast<std::size_t>(f)][0] == 5);
    CHECK(count[static_cast<std::size_t>(f)][1] == 5);
  }

  const FoldAssignment again = stratified_folds(ds, 10, 99);
  CHECK(again.fold_of == fa.fold_of);
}

TEST_CASE("stratified folds spread a tiny class one per fold") {
  Dataset ds;
  ds.n = 10;
  ds.d = 1;
  ds.c = 1;
  ds.class_names = {"only"};
  ds.labels.assign(10, 0);
  for (int i = 0; i < 10; ++i) ds.features.push_back(i);
  const FoldAssignment fa = stratified_folds(ds, 10, 1);
  std::set<int> folds(fa.fold_of.begin(), fa.fold_of.end());
  CHECK(folds.size() == 10);
}

TEST_CASE("stratified fold counts per class differ by at most one") {
  BlobSpec spec;
  spec.n = 157;  // awkward sizes exercise the remainder handling
  spec.d = 2;
  spec.classes = 4;
  spec.seed = 11;
  const Dataset ds = make_blobs(spec);
  const int F = 7;
  const FoldAssignment fa = stratified_folds(ds, F, 5);
  for (int cls = 0; cls < ds.c; ++cls) {
    int lo = 1 << 30, hi = 0;
    for (int f = 0; f < F; ++f) {
      int cnt = 0;
      for (std::size_t i = 0; i < ds.n; ++i) {
        if (ds.labels[i] == cls && fa.fold_of[i] == f) ++cnt;
      }
      lo = std::min(lo, cnt);
      hi = std::max(hi, cnt);
    }
    CHECK(hi - lo <= 1);
  }
}

TEST_CASE("stratified_folds rejects bad fold counts") {
  BlobSpec spec;
  spec.n = 6;
  spec.d = 1;
  spec.classes = 2;
  const Dataset ds = make_blobs(spec);
  CHECK_THROWS_AS(static_cast<void>(stratified_folds(ds, 1, 0)), DataError);
  CHECK_THROWS_AS(static_cast<void>(stratified_folds(ds, 7, 0)), DataError);
}

TEST_CASE("zscore centers and scales each dimension") {
  BlobSpec spec;
  spec.n = 50;
  spec.d = 3;
  spec.classes = 2;
  spec.seed = 21;
  Dataset ds = make_blobs(spec);
  const auto [mean, stddev] = zscore(ds);
  for (std::size_t j = 0; j < ds.d; ++j) {
    double m = 0.0;
    for (std::size_t i = 0; i < ds.n; ++i) m += ds.row(i)[j];
    CHECK(std::abs(m / static_cast<double>(ds.n)) < 1e-9);
    CHECK(stddev[j] > 0.0);
  }
}

TEST_CASE("load_query_matrix handles labeled files, bare files, and empties") {
  const auto labeled = temp_path("q_labeled.csv");
  write_file(labeled, "1,2,a\n3,4,b\n");
  CHECK(load_query_matrix(labeled, 2) == std::vector<double>{1, 2, 3, 4});

  const auto bare = temp_path("q_bare.csv");
  write_file(bare, "1,2\n3,4\n");
  CHECK(load_query_matrix(bare, 2) == std::vector<double>{1, 2, 3, 4});

  const auto empty = temp_path("q_empty.csv");
  write_file(empty, "");
  CHECK(load_query_matrix(empty, 2).empty());

  const auto wrong = temp_path("q_wrong.csv");
  write_file(wrong, "1,2,3,4\n");
  CHECK_THROWS_WITH_AS(static_cast<void>(load_query_matrix(wrong, 2)),
                       doctest::Contains("expects 2"), DataError);
}
