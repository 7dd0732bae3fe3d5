#include "knng/model_io.hpp"

#include <cstring>
#include <fstream>

#include "knng/errors.hpp"

namespace knng {

namespace {

class Writer {
 public:
  explicit Writer(const std::string& path) : out_(path, std::ios::binary) {
    if (!out_) throw DataError("cannot write file: " + path);
  }
  void bytes(const void* p, std::size_t len) {
    out_.write(static_cast<const char*>(p), static_cast<std::streamsize>(len));
  }
  void u32(std::uint32_t v) {
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    bytes(b, 4);
  }
  void u64(std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    bytes(b, 8);
  }
  void f64(double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    u64(bits);
  }
  void str(const std::string& s) {
    u32(static_cast<std::uint32_t>(s.size()));
    bytes(s.data(), s.size());
  }
  bool ok() const { return static_cast<bool>(out_); }

 private:
  std::ofstream out_;
};

class Reader {
 public:
  explicit Reader(const std::string& path) : in_(path, std::ios::binary), path_(path) {
    if (!in_) throw DataError("cannot open file: " + path);
  }
  void bytes(void* p, std::size_t len) {
    in_.read(static_cast<char*>(p), static_cast<std::streamsize>(len));
    if (!in_) throw DataError("truncated or corrupt model file: " + path_);
  }
  std::uint32_t u32() {
    unsigned char b[4];
    bytes(b, 4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    unsigned char b[8];
    bytes(b, 8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
  }
  double f64() {
    const std::uint64_t bits = u64();
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
  }
  std::string str() {
    const std::uint32_t len = u32();
    std::string s(len, '\0');
    if (len > 0) bytes(s.data(), len);
    return s;
  }

 private:
  std::ifstream in_;
  std::string path_;
};

void read_header(Reader& r, ModelInfo& info) {
  char magic[4];
  r.bytes(magic, 4);
  if (std::memcmp(magic, kModelMagic, 4) != 0) {
    throw DataError("not a model file (bad magic)");
  }
  info.version = r.u32();
  if (info.version != kModelVersion) {
    throw DataError("unsupported model format version " + std::to_string(info.version));
  }
  info.metadata_json = [&] {
    const std::uint64_t len = r.u64();
    std::string s(len, '\0');
    if (len > 0) r.bytes(s.data(), len);
    return s;
  }();
  info.n = r.u64();
  info.d = r.u32();
  info.c = r.u32();
  info.params.M = static_cast<int>(r.u32());
  info.params.max_degree0 = static_cast<int>(r.u32());
  info.params.ef_construction = static_cast<int>(r.u32());
  info.params.ef_search = static_cast<int>(r.u32());
  info.params.level_norm = r.f64();
  info.params.seed = r.u64();
  info.top_level = r.u32();
}

}  // namespace

void save_model(const ModelFile& model, const std::string& path) {
  const GraphIndex& idx = model.index;
  if (model.class_names.size() != static_cast<std::size_t>(idx.c)) {
    throw InternalError("class name count does not match class count");
  }
  Writer w(path);
  w.bytes(kModelMagic, 4);
  w.u32(kModelVersion);
  w.u64(model.metadata_json.size());
  w.bytes(model.metadata_json.data(), model.metadata_json.size());
  w.u64(idx.n);
  w.u32(static_cast<std::uint32_t>(idx.d));
  w.u32(static_cast<std::uint32_t>(idx.c));
  w.u32(static_cast<std::uint32_t>(idx.params.M));
  w.u32(static_cast<std::uint32_t>(idx.params.max_degree0));
  w.u32(static_cast<std::uint32_t>(idx.params.ef_construction));
  w.u32(static_cast<std::uint32_t>(idx.params.ef_search));
  w.f64(idx.params.level_norm);
  w.u64(idx.params.seed);
  w.u32(static_cast<std::uint32_t>(idx.top_level));
  w.u32(static_cast<std::uint32_t>(idx.entry_point));
  for (std::size_t u = 0; u < idx.n; ++u) {
    w.u32(static_cast<std::uint32_t>(idx.level[u]));
  }
  for (int layer = 0; layer <= idx.top_level; ++layer) {
    for (std::size_t u = 0; u < idx.n; ++u) {
      if (idx.level[u] < layer) continue;
      const auto& list = idx.links[u][static_cast<std::size_t>(layer)];
      w.u32(static_cast<std::uint32_t>(list.size()));
      for (int v : list) w.u32(static_cast<std::uint32_t>(v));
    }
  }
  for (double v : idx.features) w.f64(v);
  for (int label : idx.node_label) w.u32(static_cast<std::uint32_t>(label));
  w.u32(static_cast<std::uint32_t>(model.class_names.size()));
  for (const auto& name : model.class_names) w.str(name);
  if (!w.ok()) throw DataError("write failed: " + path);
}

ModelFile load_model(const std::string& path) {
  Reader r(path);
  ModelInfo info;
  read_header(r, info);

  ModelFile model;
  model.metadata_json = info.metadata_json;
  GraphIndex& idx = model.index;
  idx.n = info.n;
  idx.d = info.d;
  idx.c = static_cast<int>(info.c);
  idx.params = info.params;
  idx.top_level = static_cast<int>(info.top_level);
  idx.entry_point = static_cast<int>(r.u32());

  idx.level.resize(idx.n);
  idx.links.resize(idx.n);
  for (std::size_t u = 0; u < idx.n; ++u) {
    idx.level[u] = static_cast<int>(r.u32());
    idx.links[u].resize(static_cast<std::size_t>(idx.level[u]) + 1);
  }
  for (int layer = 0; layer <= idx.top_level; ++layer) {
    for (std::size_t u = 0; u < idx.n; ++u) {
      if (idx.level[u] < layer) continue;
      const std::uint32_t count = r.u32();
      auto& list = idx.links[u][static_cast<std::size_t>(layer)];
      list.resize(count);
      for (std::uint32_t i = 0; i < count; ++i) list[i] = static_cast<int>(r.u32());
    }
  }
  idx.features.resize(idx.n * idx.d);
  for (auto& v : idx.features) v = r.f64();
  idx.node_label.resize(idx.n);
  for (auto& label : idx.node_label) label = static_cast<int>(r.u32());
  const std::uint32_t names = r.u32();
  if (names != info.c) throw DataError("corrupt model file: label mapping size mismatch");
  for (std::uint32_t i = 0; i < names; ++i) model.class_names.push_back(r.str());

  double total = 0.0;
  for (std::size_t u = 0; u < idx.n; ++u) total += static_cast<double>(idx.links[u][0].size());
  idx.avg_degree = idx.n > 0 ? total / static_cast<double>(idx.n) : 0.0;
  return model;
}

ModelInfo inspect_model(const std::string& path) {
  const ModelFile model = load_model(path);
  ModelInfo info;
  info.version = kModelVersion;
  info.n = model.index.n;
  info.d = static_cast<std::uint32_t>(model.index.d);
  info.c = static_cast<std::uint32_t>(model.index.c);
  info.top_level = static_cast<std::uint32_t>(model.index.top_level);
  info.avg_degree = model.index.avg_degree;
  info.params = model.index.params;
  info.metadata_json = model.metadata_json;
  return info;
}

}  // namespace knng
