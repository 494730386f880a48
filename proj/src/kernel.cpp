#include "volfeed/kernel.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <string>

#include "volfeed/csv.hpp"
#include "volfeed/errors.hpp"
#include "volfeed/numerics.hpp"

namespace volfeed {

namespace {

constexpr double kPerturbativeLimit = 0.6;

void finish_derived(KernelEstimate& ke) {
  const std::size_t n = ke.k_plus.size();
  ke.k_v.resize(n);
  ke.k_l.resize(n);
  double max_abs = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    ke.k_v[i] = 0.5 * (ke.k_plus[i] - ke.k_minus[i]);
    ke.k_l[i] = 0.5 * (ke.k_plus[i] + ke.k_minus[i]);
    max_abs = std::max(max_abs, std::abs(ke.k_plus[i]));
    max_abs = std::max(max_abs, std::abs(ke.k_minus[i]));
  }
  ke.beyond_perturbative = max_abs > kPerturbativeLimit;
}

}  // namespace

KernelEstimate invert_observables(const ObservableSet& obs) {
  if (obs.lags.empty()) throw InputError("no observables to invert");
  const double pi = std::numbers::pi;
  double denom = pi - 2.0;
  if (!obs.normalized) {
    if (!(obs.sigma > 0.0))
      throw NumericalError("cannot invert observables with sigma = 0");
    denom *= obs.sigma * obs.sigma * obs.sigma;
  }

  KernelEstimate ke;
  ke.lags = obs.lags;
  ke.sigma = obs.sigma;
  const std::size_t n = obs.lags.size();
  ke.k_plus.resize(n);
  ke.k_minus.resize(n);
  ke.se_k_plus.resize(n);
  ke.se_k_minus.resize(n);
  ke.se_k_v.resize(n);
  ke.se_k_l.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double lp = obs.l_plus[i];
    const double lm = obs.l_minus[i];
    ke.k_plus[i] = ((pi - 1.0) * lp - lm) / denom;
    ke.k_minus[i] = -(lp - (pi - 1.0) * lm) / denom;
    // independent-error propagation through the same linear map
    const double sp = obs.se_l_plus[i];
    const double sm = obs.se_l_minus[i];
    ke.se_k_plus[i] = std::hypot((pi - 1.0) * sp, sm) / denom;
    ke.se_k_minus[i] = std::hypot(sp, (pi - 1.0) * sm) / denom;
    // k_v = pi (l_plus - l_minus) / (2 sigma^3 (pi - 2)), k_l = (l_plus +
    // l_minus) / (2 sigma^3); propagate through those forms directly since
    // the k_plus/k_minus errors are correlated.
    ke.se_k_v[i] = pi * std::hypot(sp, sm) / (2.0 * denom);
    ke.se_k_l[i] = (pi - 2.0) * std::hypot(sp, sm) / (2.0 * denom);
  }
  finish_derived(ke);
  return ke;
}

KernelEstimate make_kernels(std::vector<double> k_plus,
                            std::vector<double> k_minus, double sigma) {
  if (k_plus.size() != k_minus.size())
    throw ConfigError("k_plus and k_minus must have equal length");
  if (k_plus.empty()) throw ConfigError("kernels must have at least one lag");
  if (!(sigma > 0.0)) throw ConfigError("sigma must be positive");
  KernelEstimate ke;
  const std::size_t n = k_plus.size();
  ke.lags.resize(n);
  for (std::size_t i = 0; i < n; ++i) ke.lags[i] = static_cast<int>(i + 1);
  ke.k_plus = std::move(k_plus);
  ke.k_minus = std::move(k_minus);
  ke.se_k_plus.assign(n, 0.0);
  ke.se_k_minus.assign(n, 0.0);
  ke.se_k_v.assign(n, 0.0);
  ke.se_k_l.assign(n, 0.0);
  ke.sigma = sigma;
  finish_derived(ke);
  return ke;
}

ForwardObservables forward_observables(const KernelEstimate& kernels) {
  const double pi = std::numbers::pi;
  const double s3 = kernels.sigma * kernels.sigma * kernels.sigma;
  ForwardObservables out;
  const std::size_t n = kernels.k_plus.size();
  out.l_plus.resize(n);
  out.l_minus.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double kp = kernels.k_plus[i];
    const double km = kernels.k_minus[i];
    out.l_plus[i] = s3 * ((1.0 - 1.0 / pi) * kp + (1.0 / pi) * km);
    out.l_minus[i] = s3 * ((1.0 / pi) * kp + (1.0 - 1.0 / pi) * km);
  }
  return out;
}

std::vector<double> forward_leverage(const KernelEstimate& kernels) {
  const double s3 = kernels.sigma * kernels.sigma * kernels.sigma;
  std::vector<double> out(kernels.k_l.size());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = 2.0 * s3 * kernels.k_l[i];
  return out;
}

std::vector<double> forward_volatility(const KernelEstimate& kernels) {
  const double s4 = kernels.sigma * kernels.sigma * kernels.sigma * kernels.sigma;
  const double front = 2.0 * std::sqrt(2.0 / std::numbers::pi);
  std::vector<double> out(kernels.k_v.size());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = front * s4 * kernels.k_v[i];
  return out;
}

double delta_correction(const KernelEstimate& kernels) {
  const double pi = std::numbers::pi;
  NeumaierSum sq, cross;
  for (std::size_t i = 0; i < kernels.k_plus.size(); ++i) {
    const double sum = kernels.k_plus[i] + kernels.k_minus[i];
    sq.add(sum * sum);
    cross.add(kernels.k_plus[i] * kernels.k_minus[i]);
  }
  return 0.5 * (1.0 - 1.0 / pi) * sq.value() +
         (2.0 / pi - 1.0) * cross.value();
}

double variance_inflation(const KernelEstimate& kernels) {
  return 1.0 + delta_correction(kernels);
}

std::map<int, double> predict_even_moments(const KernelEstimate& kernels,
                                           int n_max) {
  if (n_max < 2 || n_max > 20 || n_max % 2 != 0)
    throw ConfigError("predict_even_moments: n_max must be even in [2, 20]");
  const double delta = delta_correction(kernels);
  std::map<int, double> out;
  for (int n = 2; n <= n_max; n += 2) {
    double gaussian = 1.0;
    for (int k = 3; k < n; k += 2) gaussian *= k;
    out[n] = gaussian * (1.0 + 0.5 * n * (n - 2) * delta);
  }
  return out;
}

QarchKernels to_qarch(const KernelEstimate& kernels) {
  const std::size_t n = kernels.k_l.size();
  QarchKernels q;
  q.lags = kernels.lags;
  q.linear.resize(n);
  q.quadratic = DenseMatrix(n);
  for (std::size_t i = 0; i < n; ++i)
    q.linear[i] = 2.0 * kernels.sigma * kernels.k_l[i];
  // rank-one term k_l k_l^T plus diag(k_v^2): symmetric and PSD by shape
  double diag_sum = 0.0, off_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double value = kernels.k_l[i] * kernels.k_l[j];
      if (i == j) value += kernels.k_v[i] * kernels.k_v[i];
      q.quadratic.at(i, j) = value;
      if (i == j)
        diag_sum += value;
      else
        off_sum += std::abs(value);
    }
  }
  if (n > 1 && off_sum > 0.0) {
    const double mean_diag = diag_sum / static_cast<double>(n);
    const double mean_off = off_sum / static_cast<double>(n * (n - 1));
    q.diagonal_dominance = mean_diag / mean_off;
  } else {
    q.diagonal_dominance = std::numeric_limits<double>::infinity();
  }
  return q;
}

void write_kernels_csv(const std::string& path, const KernelEstimate& ke) {
  std::ofstream outf(path, std::ios::binary);
  if (!outf) throw InputError("cannot write " + path);
  outf << "tau,k_plus,k_minus,k_v,k_l,se_k_plus,se_k_minus\n";
  for (std::size_t i = 0; i < ke.lags.size(); ++i) {
    outf << ke.lags[i] << ',' << format_double(ke.k_plus[i]) << ','
         << format_double(ke.k_minus[i]) << ',' << format_double(ke.k_v[i])
         << ',' << format_double(ke.k_l[i]) << ','
         << format_double(ke.se_k_plus[i]) << ','
         << format_double(ke.se_k_minus[i]) << '\n';
  }
}

void write_qarch_matrix_csv(const std::string& path, const QarchKernels& q) {
  std::ofstream outf(path, std::ios::binary);
  if (!outf) throw InputError("cannot write " + path);
  const std::size_t n = q.quadratic.n;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (j) outf << ',';
      outf << format_double(q.quadratic.at(i, j));
    }
    outf << '\n';
  }
}

void write_qarch_linear_csv(const std::string& path, const QarchKernels& q) {
  std::ofstream outf(path, std::ios::binary);
  if (!outf) throw InputError("cannot write " + path);
  outf << "tau,linear\n";
  for (std::size_t i = 0; i < q.lags.size(); ++i)
    outf << q.lags[i] << ',' << format_double(q.linear[i]) << '\n';
}

}  // namespace volfeed
