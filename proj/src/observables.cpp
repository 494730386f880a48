#include "volfeed/observables.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>
#include <vector>

#include "volfeed/csv.hpp"
#include "volfeed/errors.hpp"
#include "volfeed/numerics.hpp"

namespace volfeed {

namespace {

constexpr std::size_t kAutocorrLags = 50;

struct SeriesMeans {
  double m2 = 0.0;  // E[r^2]
  double mp = 0.0;  // E[r_+]
  double mm = 0.0;  // E[r_-]
};

SeriesMeans series_means(const std::vector<double>& r) {
  NeumaierSum s2, sp, sm;
  for (double x : r) {
    s2.add(x * x);
    sp.add(x > 0.0 ? x : 0.0);
    sm.add(x < 0.0 ? x : 0.0);
  }
  const double inv_n = 1.0 / static_cast<double>(r.size());
  return SeriesMeans{s2.value() * inv_n, sp.value() * inv_n, sm.value() * inv_n};
}

// 1 + 2 sum_{k=1}^{50} rho_k for the squared-return series, floored at 1.
// This deflates the effective sample size when volatility is clustered.
double autocorr_factor(const std::vector<double>& r2, double m2, Exec policy) {
  const std::size_t n = r2.size();
  if (n < 3) return 1.0;
  NeumaierSum den;
  for (double x : r2) {
    const double d = x - m2;
    den.add(d * d);
  }
  const double denom = den.value();
  if (!(denom > 0.0)) return 1.0;

  const std::size_t kmax = std::min(kAutocorrLags, n - 2);
  std::vector<double> rho(kmax, 0.0);
  parallel_for(kmax, policy, [&](std::size_t i) {
    const std::size_t k = i + 1;
    NeumaierSum num;
    for (std::size_t t = k; t < n; ++t)
      num.add((r2[t] - m2) * (r2[t - k] - m2));
    rho[i] = num.value() / denom;
  });
  NeumaierSum total;
  for (double x : rho) total.add(x);
  return std::max(1.0, 1.0 + 2.0 * total.value());
}

struct LagResult {
  double lp = 0, lm = 0, v = 0;
  double se_lp = 0, se_lm = 0, se_lt = 0, se_v = 0;
};

// All four product series for one lag in a single pass. Value sums are
// compensated; the squared sums only feed standard errors and keep plain
// accumulation for speed.
LagResult compute_lag(const double* r, const double* r2, std::size_t n,
                      std::size_t tau, const SeriesMeans& mu, double gamma) {
  const double mr = mu.mp + mu.mm;
  NeumaierSum syp, sym, syv;
  double s2p = 0, s2m = 0, s2t = 0, s2v = 0;
  for (std::size_t t = tau; t < n; ++t) {
    const double c = r2[t] - mu.m2;
    const double past = r[t - tau];
    const double xp = (past > 0.0 ? past : 0.0) - mu.mp;
    const double xm = (past < 0.0 ? past : 0.0) - mu.mm;
    const double xv = r2[t - tau] - mu.m2;
    const double xt = past - mr;
    const double yp = c * xp;
    const double ym = c * xm;
    const double yv = c * xv;
    const double yt = c * xt;
    syp.add(yp);
    sym.add(ym);
    syv.add(yv);
    s2p += yp * yp;
    s2m += ym * ym;
    s2t += yt * yt;
    s2v += yv * yv;
  }
  const std::size_t m = n - tau;
  const double inv_m = 1.0 / static_cast<double>(m);
  LagResult out;
  out.lp = syp.value() * inv_m;
  out.lm = sym.value() * inv_m;
  out.v = syv.value() * inv_m;
  const double bessel =
      m > 1 ? static_cast<double>(m) / static_cast<double>(m - 1) : 1.0;
  auto se = [&](double sumsq, double mean) {
    const double var = std::max(0.0, sumsq * inv_m - mean * mean) * bessel;
    return std::sqrt(var * gamma * inv_m);
  };
  out.se_lp = se(s2p, out.lp);
  out.se_lm = se(s2m, out.lm);
  out.se_lt = se(s2t, out.lp + out.lm);
  out.se_v = se(s2v, out.v);
  return out;
}

// A constant series (zero demeaned variance) leaves every covariance in
// the set 0/0-undefined; reject it the same way the moment module does.
void check_not_degenerate(const SeriesMeans& mu, const std::string& symbol) {
  const double mean = mu.mp + mu.mm;
  if (!(mu.m2 - mean * mean > 0.0))
    throw NumericalError(symbol + ": degenerate series (zero variance)");
}

void check_preconditions(const ReturnSeries& series, std::size_t tau_max) {
  const std::size_t n = series.returns.size();
  if (tau_max < 1) throw ConfigError("tau_max must be at least 1");
  if (tau_max >= n)
    throw ConfigError("tau_max " + std::to_string(tau_max) +
                      " must be smaller than the series length " +
                      std::to_string(n));
  if (n < 10 * tau_max)
    warn(series.symbol + ": only " + std::to_string(n) + " returns for tau_max " +
         std::to_string(tau_max) + ", estimates will be noisy");
}

}  // namespace

ObservableSet estimate_observables(const ReturnSeries& series,
                                   std::size_t tau_max, Exec policy) {
  check_preconditions(series, tau_max);
  const std::size_t n = series.returns.size();
  const double* r = series.returns.data();

  std::vector<double> r2(n);
  for (std::size_t t = 0; t < n; ++t) r2[t] = r[t] * r[t];

  const SeriesMeans mu = series_means(series.returns);
  check_not_degenerate(mu, series.symbol);
  const double gamma = autocorr_factor(r2, mu.m2, policy);

  ObservableSet obs;
  obs.lags.resize(tau_max);
  obs.l_plus.resize(tau_max);
  obs.l_minus.resize(tau_max);
  obs.l_total.resize(tau_max);
  obs.v.resize(tau_max);
  obs.se_l_plus.resize(tau_max);
  obs.se_l_minus.resize(tau_max);
  obs.se_l_total.resize(tau_max);
  obs.se_v.resize(tau_max);
  obs.sigma = std::sqrt(mu.m2);
  obs.n_samples = n;
  obs.autocorr_factor = gamma;

  parallel_for(tau_max, policy, [&](std::size_t i) {
    const LagResult lr = compute_lag(r, r2.data(), n, i + 1, mu, gamma);
    obs.lags[i] = static_cast<int>(i + 1);
    obs.l_plus[i] = lr.lp;
    obs.l_minus[i] = lr.lm;
    obs.l_total[i] = lr.lp + lr.lm;  // exact sum, kept as an invariant
    obs.v[i] = lr.v;
    obs.se_l_plus[i] = lr.se_lp;
    obs.se_l_minus[i] = lr.se_lm;
    obs.se_l_total[i] = lr.se_lt;
    obs.se_v[i] = lr.se_v;
  });
  return obs;
}

ObservableSet estimate_observables_serial(const ReturnSeries& series,
                                          std::size_t tau_max) {
  check_preconditions(series, tau_max);
  const std::size_t n = series.returns.size();
  const std::vector<double>& r = series.returns;

  // Plain textbook sums throughout; this is the baseline the blocked kernel
  // is validated against.
  double m2 = 0, mp = 0, mm = 0;
  for (double x : r) {
    m2 += x * x;
    mp += x > 0.0 ? x : 0.0;
    mm += x < 0.0 ? x : 0.0;
  }
  m2 /= static_cast<double>(n);
  mp /= static_cast<double>(n);
  mm /= static_cast<double>(n);
  check_not_degenerate(SeriesMeans{m2, mp, mm}, series.symbol);

  double den = 0;
  for (double x : r) {
    const double d = x * x - m2;
    den += d * d;
  }
  double rho_sum = 0;
  const std::size_t kmax = n >= 3 ? std::min(kAutocorrLags, n - 2) : 0;
  for (std::size_t k = 1; k <= kmax; ++k) {
    double num = 0;
    for (std::size_t t = k; t < n; ++t)
      num += (r[t] * r[t] - m2) * (r[t - k] * r[t - k] - m2);
    if (den > 0.0) rho_sum += num / den;
  }
  const double gamma = std::max(1.0, 1.0 + 2.0 * rho_sum);

  ObservableSet obs;
  obs.sigma = std::sqrt(m2);
  obs.n_samples = n;
  obs.autocorr_factor = gamma;
  const double mr = mp + mm;
  for (std::size_t tau = 1; tau <= tau_max; ++tau) {
    double syp = 0, sym = 0, syv = 0;
    double s2p = 0, s2m = 0, s2t = 0, s2v = 0;
    for (std::size_t t = tau; t < n; ++t) {
      const double c = r[t] * r[t] - m2;
      const double past = r[t - tau];
      const double yp = c * ((past > 0.0 ? past : 0.0) - mp);
      const double ym = c * ((past < 0.0 ? past : 0.0) - mm);
      const double yv = c * (past * past - m2);
      const double yt = c * (past - mr);
      syp += yp;
      sym += ym;
      syv += yv;
      s2p += yp * yp;
      s2m += ym * ym;
      s2t += yt * yt;
      s2v += yv * yv;
    }
    const std::size_t m = n - tau;
    const double inv_m = 1.0 / static_cast<double>(m);
    const double lp = syp * inv_m;
    const double lm = sym * inv_m;
    const double v = syv * inv_m;
    const double bessel =
        m > 1 ? static_cast<double>(m) / static_cast<double>(m - 1) : 1.0;
    auto se = [&](double sumsq, double mean) {
      const double var = std::max(0.0, sumsq * inv_m - mean * mean) * bessel;
      return std::sqrt(var * gamma * inv_m);
    };
    obs.lags.push_back(static_cast<int>(tau));
    obs.l_plus.push_back(lp);
    obs.l_minus.push_back(lm);
    obs.l_total.push_back(lp + lm);
    obs.v.push_back(v);
    obs.se_l_plus.push_back(se(s2p, lp));
    obs.se_l_minus.push_back(se(s2m, lm));
    obs.se_l_total.push_back(se(s2t, lp + lm));
    obs.se_v.push_back(se(s2v, v));
  }
  return obs;
}

ObservableSet normalized(const ObservableSet& obs) {
  if (obs.normalized) return obs;
  if (!(obs.sigma > 0.0))
    throw NumericalError("cannot normalize observables with sigma = 0");
  ObservableSet out = obs;
  const double s3 = obs.sigma * obs.sigma * obs.sigma;
  const double s4 = s3 * obs.sigma;
  for (std::size_t i = 0; i < obs.lags.size(); ++i) {
    out.l_plus[i] = obs.l_plus[i] / s3;
    out.l_minus[i] = obs.l_minus[i] / s3;
    // summed after scaling so l_total == l_plus + l_minus stays exact
    out.l_total[i] = out.l_plus[i] + out.l_minus[i];
    out.v[i] = obs.v[i] / s4;
    out.se_l_plus[i] = obs.se_l_plus[i] / s3;
    out.se_l_minus[i] = obs.se_l_minus[i] / s3;
    out.se_l_total[i] = obs.se_l_total[i] / s3;
    out.se_v[i] = obs.se_v[i] / s4;
  }
  out.normalized = true;
  return out;
}

LaggedStat anticipatory_leverage(const ReturnSeries& series,
                                 std::size_t tau_max) {
  check_preconditions(series, tau_max);
  const std::size_t n = series.returns.size();
  const std::vector<double>& r = series.returns;

  std::vector<double> r2(n);
  for (std::size_t t = 0; t < n; ++t) r2[t] = r[t] * r[t];
  const SeriesMeans mu = series_means(series.returns);
  const double mr = mu.mp + mu.mm;
  const double gamma = autocorr_factor(r2, mu.m2, Exec::parallel);

  LaggedStat out;
  for (std::size_t tau = 1; tau <= tau_max; ++tau) {
    NeumaierSum sy;
    double s2 = 0;
    const std::size_t m = n - tau;
    for (std::size_t t = 0; t < m; ++t) {
      const double y = (r2[t] - mu.m2) * (r[t + tau] - mr);
      sy.add(y);
      s2 += y * y;
    }
    const double inv_m = 1.0 / static_cast<double>(m);
    const double mean = sy.value() * inv_m;
    const double bessel =
        m > 1 ? static_cast<double>(m) / static_cast<double>(m - 1) : 1.0;
    const double var = std::max(0.0, s2 * inv_m - mean * mean) * bessel;
    out.lags.push_back(static_cast<int>(tau));
    out.value.push_back(mean);
    out.se.push_back(std::sqrt(var * gamma * inv_m));
  }
  return out;
}

LaggedStat return_autocorrelation(const ReturnSeries& series,
                                  std::size_t tau_max) {
  check_preconditions(series, tau_max);
  const std::size_t n = series.returns.size();
  const std::vector<double>& r = series.returns;
  const double mean_r = compensated_mean(series.returns);

  NeumaierSum svar;
  for (double x : r) svar.add((x - mean_r) * (x - mean_r));
  const double var = svar.value() / static_cast<double>(n);
  if (!(var > 0.0))
    throw NumericalError(series.symbol + ": zero variance, cannot estimate");

  LaggedStat out;
  for (std::size_t tau = 1; tau <= tau_max; ++tau) {
    NeumaierSum sy;
    double s2 = 0;
    const std::size_t m = n - tau;
    for (std::size_t t = tau; t < n; ++t) {
      const double y = (r[t] - mean_r) * (r[t - tau] - mean_r);
      sy.add(y);
      s2 += y * y;
    }
    const double inv_m = 1.0 / static_cast<double>(m);
    const double mean = sy.value() * inv_m;
    const double bessel =
        m > 1 ? static_cast<double>(m) / static_cast<double>(m - 1) : 1.0;
    const double vy = std::max(0.0, s2 * inv_m - mean * mean) * bessel;
    out.lags.push_back(static_cast<int>(tau));
    out.value.push_back(mean / var);
    // product-series SE, robust to volatility clustering
    out.se.push_back(std::sqrt(vy * inv_m) / var);
  }
  return out;
}

void write_observables_csv(const std::string& path, const ObservableSet& obs) {
  std::ofstream outf(path, std::ios::binary);
  if (!outf) throw InputError("cannot write " + path);
  outf << "tau,l_plus,l_minus,l,v,se_l_plus,se_l_minus,se_v\n";
  for (std::size_t i = 0; i < obs.lags.size(); ++i) {
    outf << obs.lags[i] << ',' << format_double(obs.l_plus[i]) << ','
         << format_double(obs.l_minus[i]) << ',' << format_double(obs.l_total[i])
         << ',' << format_double(obs.v[i]) << ','
         << format_double(obs.se_l_plus[i]) << ','
         << format_double(obs.se_l_minus[i]) << ','
         << format_double(obs.se_v[i]) << '\n';
  }
}

}  // namespace volfeed
