#include "knng/config.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "knng/errors.hpp"

namespace knng {

using nlohmann::json;

void RunConfig::validate() const {
  if (alpha < 0.0 || alpha > 1.0) throw DataError("alpha must be in [0, 1]");
  if (sigma < 0.0) throw DataError("sigma must be positive or 0 (auto)");
  if (gamma < 0.0 || gamma >= 1.0) throw DataError("gamma must be in [0, 1)");
  if (density_scales.empty()) throw DataError("density_scales must not be empty");
  for (int s : density_scales) {
    if (s < 1) throw DataError("density scales must be >= 1");
  }
  if (lambda_min < 0.0 || lambda_max < 0.0) {
    throw DataError("lambda bounds must be positive or 0 (auto)");
  }
  if (lambda_min > 0.0 && lambda_max > 0.0 && lambda_min >= lambda_max) {
    throw DataError("need lambda_min < lambda_max");
  }
  if ((lambda_min > 0.0) != (lambda_max > 0.0)) {
    throw DataError("lambda_min and lambda_max must be set together");
  }
  if (!(tol > 0.0)) throw DataError("tol must be positive");
  if (max_sweeps < 1) throw DataError("max_sweeps must be >= 1");
  if (self_weight_scale < 0.0) throw DataError("self_weight_scale must be nonnegative");
  if (M < 2) throw DataError("M must be at least 2");
  if (max_degree0 < 0) throw DataError("max_degree0 must be nonnegative");
  if (ef_construction < M) throw DataError("ef_construction must be >= M");
  if (ef_search < 1) throw DataError("ef_search must be >= 1");
  if (folds < 2) throw DataError("folds must be >= 2");
  if (kernel_budget_gib < 0.0) throw DataError("kernel_budget_gib must be nonnegative");
  if (baseline_k < 1) throw DataError("baseline_k must be >= 1");
  if (baseline_ef < 1) throw DataError("baseline_ef must be >= 1");
}

std::string RunConfig::to_json() const {
  json j;
  j["alpha"] = alpha;
  j["sigma"] = sigma;
  j["gamma"] = gamma;
  j["density_scales"] = density_scales;
  j["lambda_min"] = lambda_min;
  j["lambda_max"] = lambda_max;
  j["tol"] = tol;
  j["max_sweeps"] = max_sweeps;
  j["self_weight_scale"] = self_weight_scale;
  j["M"] = M;
  j["max_degree0"] = max_degree0;
  j["ef_construction"] = ef_construction;
  j["ef_search"] = ef_search;
  j["folds"] = folds;
  j["seed"] = seed;
  j["normalize"] = normalize;
  j["threads"] = threads;
  j["kernel_budget_gib"] = kernel_budget_gib;
  j["baseline_k"] = baseline_k;
  j["baseline_ef"] = baseline_ef;
  j["f1_per_class"] = f1_per_class;
  j["resolved_sigma"] = resolved_sigma;
  j["resolved_lambda_min"] = resolved_lambda_min;
  j["resolved_lambda_max"] = resolved_lambda_max;
  j["normalize_mean"] = normalize_mean;
  j["normalize_stddev"] = normalize_stddev;
  return j.dump(2);
}

RunConfig RunConfig::from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw DataError(std::string("invalid config JSON: ") + e.what());
  }
  if (!j.is_object()) throw DataError("config JSON must be an object");

  RunConfig cfg;
  for (const auto& [key, value] : j.items()) {
    try {
      if (key == "alpha") cfg.alpha = value.get<double>();
      else if (key == "sigma") cfg.sigma = value.get<double>();
      else if (key == "gamma") cfg.gamma = value.get<double>();
      else if (key == "density_scales") cfg.density_scales = value.get<std::vector<int>>();
      else if (key == "lambda_min") cfg.lambda_min = value.get<double>();
      else if (key == "lambda_max") cfg.lambda_max = value.get<double>();
      else if (key == "tol") cfg.tol = value.get<double>();
      else if (key == "max_sweeps") cfg.max_sweeps = value.get<int>();
      else if (key == "self_weight_scale") cfg.self_weight_scale = value.get<double>();
      else if (key == "M") cfg.M = value.get<int>();
      else if (key == "max_degree0") cfg.max_degree0 = value.get<int>();
      else if (key == "ef_construction") cfg.ef_construction = value.get<int>();
      else if (key == "ef_search") cfg.ef_search = value.get<int>();
      else if (key == "folds") cfg.folds = value.get<int>();
      else if (key == "seed") cfg.seed = value.get<std::uint64_t>();
      else if (key == "normalize") cfg.normalize = value.get<bool>();
      else if (key == "threads") cfg.threads = value.get<unsigned>();
      else if (key == "kernel_budget_gib") cfg.kernel_budget_gib = value.get<double>();
      else if (key == "baseline_k") cfg.baseline_k = value.get<int>();
      else if (key == "baseline_ef") cfg.baseline_ef = value.get<int>();
      else if (key == "f1_per_class") cfg.f1_per_class = value.get<bool>();
      else if (key == "resolved_sigma") cfg.resolved_sigma = value.get<double>();
      else if (key == "resolved_lambda_min") cfg.resolved_lambda_min = value.get<double>();
      else if (key == "resolved_lambda_max") cfg.resolved_lambda_max = value.get<double>();
      else if (key == "normalize_mean") cfg.normalize_mean = value.get<std::vector<double>>();
      else if (key == "normalize_stddev") cfg.normalize_stddev = value.get<std::vector<double>>();
      else throw DataError("unknown config key: " + key);
    } catch (const json::exception& e) {
      throw DataError("bad value for config key '" + key + "': " + e.what());
    }
  }
  cfg.validate();
  return cfg;
}

RunConfig RunConfig::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return from_json(buf.str());
}

std::size_t resolve_kernel_budget_bytes(double budget_gib) {
  if (budget_gib > 0.0) {
    return static_cast<std::size_t>(budget_gib * 1024.0 * 1024.0 * 1024.0);
  }
  // 70% of available physical memory, 1 GiB floor.
  std::size_t avail_kib = 0;
  std::ifstream meminfo("/proc/meminfo");
  std::string key;
  while (meminfo >> key) {
    if (key == "MemAvailable:") {
      meminfo >> avail_kib;
      break;
    }
    std::string rest;
    std::getline(meminfo, rest);
  }
  if (avail_kib == 0) avail_kib = 4ull * 1024 * 1024;  // unknown: assume 4 GiB
  const std::size_t budget = avail_kib * 1024 * 7 / 10;
  return std::max<std::size_t>(budget, 1ull << 30);
}

}  // namespace knng
