#include "knng/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "knng/distance.hpp"
#include "knng/errors.hpp"
#include "knng/rng.hpp"
#include "knng/threading.hpp"

namespace knng {

void KernelParams::validate() const {
  if (alpha < 0.0 || alpha > 1.0) throw DataError("alpha must be in [0, 1]");
  if (!(sigma > 0.0)) throw DataError("sigma must be resolved to a positive value");
  if (gamma < 0.0 || gamma >= 1.0) throw DataError("gamma must be in [0, 1)");
}

double resolve_sigma(const Dataset& ds, std::uint64_t seed) {
  if (ds.n < 2) throw DataError("sigma resolution needs at least 2 samples");

  const std::size_t m = std::min<std::size_t>(ds.n, 1000);
  std::vector<std::size_t> idx(ds.n);
  std::iota(idx.begin(), idx.end(), 0);
  if (m < ds.n) {
    Rng rng(seed);
    rng.shuffle(idx);
    idx.resize(m);
  }

  std::vector<double> dist;
  dist.reserve(m * (m - 1) / 2);
  for (std::size_t a = 0; a + 1 < m; ++a) {
    for (std::size_t b = a + 1; b < m; ++b) {
      dist.push_back(l2(ds.row(idx[a]), ds.row(idx[b]), ds.d));
    }
  }

  const std::size_t mid = dist.size() / 2;
  std::nth_element(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(mid), dist.end());
  double sigma = dist[mid];
  if (sigma > 0.0) return sigma;

  double sum = 0.0;
  std::size_t nonzero = 0;
  for (double v : dist) {
    if (v > 0.0) {
      sum += v;
      ++nonzero;
    }
  }
  return nonzero > 0 ? sum / static_cast<double>(nonzero) : 1.0;
}

KernelMatrix build_kernel(const Dataset& ds, const KernelParams& p, unsigned threads) {
  p.validate();
  const std::size_t n = ds.n;
  KernelMatrix K;
  K.n = n;
  K.values.assign(n * n, 0.0);

  const double inv_two_sigma_sq = 1.0 / (2.0 * p.sigma * p.sigma);
  const double alpha = p.alpha;
  const double beta = 1.0 - p.alpha;
  const double gamma = p.gamma;
  double* out = K.values.data();

  parallel_for(0, n, threads, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      out[i * n + i] = 1.0;
      for (std::size_t j = i + 1; j < n; ++j) {
        const double sq = squared_l2(ds.row(i), ds.row(j), ds.d);
        const double cls = ds.labels[i] == ds.labels[j] ? 1.0 : gamma;
        const double v = alpha * std::exp(-sq * inv_two_sigma_sq) + beta * cls;
        out[i * n + j] = v;
        out[j * n + i] = v;
      }
    }
  });
  return K;
}

std::vector<double> column_squared_norms(const KernelMatrix& K) {
  std::vector<double> norms(K.n, 0.0);
  for (std::size_t j = 0; j < K.n; ++j) {
    const double* col = K.column(j);
    double s = 0.0;
    for (std::size_t i = 0; i < K.n; ++i) s += col[i] * col[i];
    norms[j] = s;
  }
  return norms;
}

std::size_t kernel_memory_bytes(std::size_t n) {
  return 2 * n * n * sizeof(double);
}

}  // namespace knng
