#include "volfeed/moments.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "volfeed/errors.hpp"
#include "volfeed/numerics.hpp"

namespace volfeed {

GaussianConstants gaussian_constants() {
  const double pi = std::numbers::pi;
  GaussianConstants c;
  c.e_plus = 1.0 / std::sqrt(2.0 * pi);
  c.e_plus_sq = 0.5;
  c.e_plus_cu = std::sqrt(2.0 / pi);
  c.var_half = 0.5 * (1.0 - 1.0 / pi);
  c.cross_half = 1.0 / (2.0 * pi);
  return c;
}

double gaussian_even_moment(int n) {
  if (n < 2 || n > 20 || n % 2 != 0)
    throw ConfigError("gaussian_even_moment: n must be even in [2, 20], got " +
                      std::to_string(n));
  double m = 1.0;
  for (int k = 3; k < n; k += 2) m *= k;  // (n-1)!!
  return m;
}

namespace {

// Nine running sums per chunk: r, r^2, r^4, ..., r^10, r_+, r_-, |r|.
struct ChunkSums {
  std::array<double, 9> sums{};
};

constexpr std::size_t kChunk = 8192;

ChunkSums accumulate_chunk(const double* r, std::size_t count) {
  std::array<NeumaierSum, 9> acc;
  for (std::size_t i = 0; i < count; ++i) {
    const double x = r[i];
    const double x2 = x * x;
    const double x4 = x2 * x2;
    acc[0].add(x);
    acc[1].add(x2);
    acc[2].add(x4);
    acc[3].add(x4 * x2);
    acc[4].add(x4 * x4);
    acc[5].add(x4 * x4 * x2);
    acc[6].add(x > 0.0 ? x : 0.0);
    acc[7].add(x < 0.0 ? x : 0.0);
    acc[8].add(std::abs(x));
  }
  ChunkSums out;
  for (std::size_t j = 0; j < 9; ++j) out.sums[j] = acc[j].value();
  return out;
}

}  // namespace

SampleMoments sample_moments(const ReturnSeries& series, Exec policy) {
  const std::size_t n = series.returns.size();
  if (n == 0) throw InputError(series.symbol + ": empty return series");
  if (n < 100)
    warn(series.symbol + ": only " + std::to_string(n) +
         " returns, moments will be noisy");

  // Fixed-size chunks, combined in chunk order: the reduction is associative
  // by construction, so thread count cannot change the result.
  const std::size_t n_chunks = (n + kChunk - 1) / kChunk;
  std::vector<ChunkSums> partial(n_chunks);
  const double* r = series.returns.data();
  parallel_for(n_chunks, policy, [&](std::size_t c) {
    const std::size_t begin = c * kChunk;
    const std::size_t count = std::min(kChunk, n - begin);
    partial[c] = accumulate_chunk(r + begin, count);
  });

  std::array<NeumaierSum, 9> total;
  for (const ChunkSums& cs : partial)
    for (std::size_t j = 0; j < 9; ++j) total[j].add(cs.sums[j]);

  SampleMoments m;
  m.n = n;
  const double inv_n = 1.0 / static_cast<double>(n);
  m.mean = total[0].value() * inv_n;
  m.variance = total[1].value() * inv_n;
  m.mean_plus = total[6].value() * inv_n;
  m.mean_minus = total[7].value() * inv_n;
  m.mean_abs = total[8].value() * inv_n;

  const double central = m.variance - m.mean * m.mean;
  if (!(central > 0.0))
    throw NumericalError(series.symbol + ": degenerate series (zero variance)");
  m.sigma = std::sqrt(m.variance);

  m.even_moments[2] = 1.0;  // by construction of the normalization
  double scale = m.variance * m.variance;
  m.even_moments[4] = total[2].value() * inv_n / scale;
  scale *= m.variance;
  m.even_moments[6] = total[3].value() * inv_n / scale;
  scale *= m.variance;
  m.even_moments[8] = total[4].value() * inv_n / scale;
  scale *= m.variance;
  m.even_moments[10] = total[5].value() * inv_n / scale;
  return m;
}

}  // namespace volfeed
