#include "volfeed/rolling.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numbers>
#include <string>

#include "volfeed/csv.hpp"
#include "volfeed/errors.hpp"

namespace volfeed {

void RollingConfig::validate() const {
  if (lag_average < 1) throw ConfigError("lag_average must be at least 1");
  if (step < 1) throw ConfigError("step must be at least 1");
  if (window < 10 * lag_average)
    throw ConfigError("window " + std::to_string(window) +
                      " must be at least 10 * lag_average = " +
                      std::to_string(10 * lag_average));
}

namespace {

constexpr std::size_t kAutocorrLags = 50;

struct WindowResult {
  double l_bar_plus = 0, l_bar_minus = 0;
  double k_bar_plus = 0, k_bar_minus = 0;
  double k_bar_v = 0, k_bar_l = 0;
  double se_k_bar_v = 0;
  bool degenerate = false;
};

// One window, fully self-contained: means, the per-lag observables, the
// first-order inversion, and the lag average all use only w[0..len).
WindowResult analyze_window(const double* w, std::size_t len,
                            std::size_t lag_average) {
  const double pi = std::numbers::pi;
  double m1 = 0, m2 = 0, mp = 0, mm = 0;
  for (std::size_t t = 0; t < len; ++t) {
    m1 += w[t];
    m2 += w[t] * w[t];
    mp += w[t] > 0.0 ? w[t] : 0.0;
    mm += w[t] < 0.0 ? w[t] : 0.0;
  }
  const double inv_len = 1.0 / static_cast<double>(len);
  m1 *= inv_len;
  m2 *= inv_len;
  mp *= inv_len;
  mm *= inv_len;

  WindowResult out;
  if (!(m2 - m1 * m1 > 0.0)) {
    out.degenerate = true;
    return out;
  }

  double den = 0;
  for (std::size_t t = 0; t < len; ++t) {
    const double d = w[t] * w[t] - m2;
    den += d * d;
  }
  double rho_sum = 0;
  const std::size_t kmax = len >= 3 ? std::min(kAutocorrLags, len - 2) : 0;
  if (den > 0.0) {
    for (std::size_t k = 1; k <= kmax; ++k) {
      double num = 0;
      for (std::size_t t = k; t < len; ++t)
        num += (w[t] * w[t] - m2) * (w[t - k] * w[t - k] - m2);
      rho_sum += num / den;
    }
  }
  const double gamma = std::max(1.0, 1.0 + 2.0 * rho_sum);

  const double sigma = std::sqrt(m2);
  const double s3 = sigma * sigma * sigma;
  const double denom = s3 * (pi - 2.0);
  double sum_kp = 0, sum_km = 0, sum_lp = 0, sum_lm = 0, sum_var_kv = 0;
  for (std::size_t tau = 1; tau <= lag_average; ++tau) {
    double syp = 0, sym = 0, s2p = 0, s2m = 0;
    for (std::size_t t = tau; t < len; ++t) {
      const double c = w[t] * w[t] - m2;
      const double past = w[t - tau];
      const double yp = c * ((past > 0.0 ? past : 0.0) - mp);
      const double ym = c * ((past < 0.0 ? past : 0.0) - mm);
      syp += yp;
      sym += ym;
      s2p += yp * yp;
      s2m += ym * ym;
    }
    const std::size_t m = len - tau;
    const double inv_m = 1.0 / static_cast<double>(m);
    const double lp = syp * inv_m;
    const double lm = sym * inv_m;
    const double bessel =
        m > 1 ? static_cast<double>(m) / static_cast<double>(m - 1) : 1.0;
    const double se_lp =
        std::sqrt(std::max(0.0, s2p * inv_m - lp * lp) * bessel * gamma * inv_m);
    const double se_lm =
        std::sqrt(std::max(0.0, s2m * inv_m - lm * lm) * bessel * gamma * inv_m);
    sum_lp += lp;
    sum_lm += lm;
    sum_kp += ((pi - 1.0) * lp - lm) / denom;
    sum_km += -(lp - (pi - 1.0) * lm) / denom;
    const double se_kv = pi * std::hypot(se_lp, se_lm) / (2.0 * denom);
    sum_var_kv += se_kv * se_kv;
  }
  const double inv_lags = 1.0 / static_cast<double>(lag_average);
  out.l_bar_plus = sum_lp * inv_lags;
  out.l_bar_minus = sum_lm * inv_lags;
  out.k_bar_plus = sum_kp * inv_lags;
  out.k_bar_minus = sum_km * inv_lags;
  out.k_bar_v = 0.5 * (out.k_bar_plus - out.k_bar_minus);
  out.k_bar_l = 0.5 * (out.k_bar_plus + out.k_bar_minus);
  out.se_k_bar_v = std::sqrt(sum_var_kv) * inv_lags;
  return out;
}

}  // namespace

RollingIndicator rolling_indicators(const ReturnSeries& series,
                                    const RollingConfig& config, Exec policy) {
  config.validate();
  const std::size_t n = series.returns.size();
  if (n < config.window)
    throw InputError(series.symbol + ": " + std::to_string(n) +
                     " returns is shorter than the window " +
                     std::to_string(config.window));
  const bool dated = !series.dates.empty();
  if (dated && series.dates.size() != n)
    throw InputError(series.symbol + ": dates do not align with returns");

  const std::size_t n_evals = (n - config.window) / config.step + 1;
  std::vector<WindowResult> results(n_evals);
  const double* r = series.returns.data();
  parallel_for(n_evals, policy, [&](std::size_t i) {
    const std::size_t end = config.window - 1 + i * config.step;
    results[i] = analyze_window(r + end + 1 - config.window, config.window,
                                config.lag_average);
  });

  for (std::size_t i = 0; i < n_evals; ++i)
    if (results[i].degenerate) {
      const std::size_t end = config.window - 1 + i * config.step;
      throw NumericalError(series.symbol + ": degenerate window ending at index " +
                           std::to_string(end) + " (zero variance)");
    }

  RollingIndicator out;
  out.indices.resize(n_evals);
  if (dated) out.dates.resize(n_evals);
  out.l_bar_plus.resize(n_evals);
  out.l_bar_minus.resize(n_evals);
  out.k_bar_plus.resize(n_evals);
  out.k_bar_minus.resize(n_evals);
  out.k_bar_v.resize(n_evals);
  out.k_bar_l.resize(n_evals);
  out.se_k_bar_v.resize(n_evals);
  out.n_stocks.assign(n_evals, 1);
  for (std::size_t i = 0; i < n_evals; ++i) {
    const std::size_t end = config.window - 1 + i * config.step;
    out.indices[i] = end;
    if (dated) out.dates[i] = series.dates[end];
    out.l_bar_plus[i] = results[i].l_bar_plus;
    out.l_bar_minus[i] = results[i].l_bar_minus;
    out.k_bar_plus[i] = results[i].k_bar_plus;
    out.k_bar_minus[i] = results[i].k_bar_minus;
    out.k_bar_v[i] = results[i].k_bar_v;
    out.k_bar_l[i] = results[i].k_bar_l;
    out.se_k_bar_v[i] = results[i].se_k_bar_v;
  }
  return out;
}

RollingIndicator market_average(const std::vector<RollingIndicator>& indicators) {
  if (indicators.empty()) throw InputError("no indicators to average");
  const bool dated = !indicators.front().dates.empty();
  for (const RollingIndicator& ind : indicators)
    if (!ind.dates.empty() != dated)
      throw InputError("cannot mix dated and undated indicators");

  // alignment key: evaluation date when available, else evaluation index
  auto key_count = [&](const RollingIndicator& ind) {
    return dated ? ind.dates.size() : ind.indices.size();
  };

  std::map<Date, std::vector<std::pair<std::size_t, std::size_t>>> by_date;
  for (std::size_t s = 0; s < indicators.size(); ++s) {
    const RollingIndicator& ind = indicators[s];
    for (std::size_t i = 0; i < key_count(ind); ++i) {
      const Date key =
          dated ? ind.dates[i] : Date::ordinal(static_cast<std::int64_t>(ind.indices[i]));
      by_date[key].emplace_back(s, i);
    }
  }

  // every pair of inputs must overlap somewhere, otherwise the average
  // would silently mix disjoint eras
  const std::size_t ns = indicators.size();
  if (ns > 1) {
    std::vector<std::vector<bool>> seen(ns, std::vector<bool>(ns, false));
    for (const auto& [key, entries] : by_date)
      for (std::size_t a = 0; a < entries.size(); ++a)
        for (std::size_t b = a + 1; b < entries.size(); ++b)
          seen[entries[a].first][entries[b].first] = true;
    for (std::size_t a = 0; a < ns; ++a)
      for (std::size_t b = a + 1; b < ns; ++b)
        if (!seen[a][b])
          throw InputError("indicators " + std::to_string(a) + " and " +
                           std::to_string(b) + " share no evaluation dates");
  }

  RollingIndicator out;
  for (const auto& [key, entries] : by_date) {
    double lp = 0, lm = 0, kp = 0, km = 0, kv = 0, kl = 0, var_kv = 0;
    for (const auto& [s, i] : entries) {
      const RollingIndicator& ind = indicators[s];
      lp += ind.l_bar_plus[i];
      lm += ind.l_bar_minus[i];
      kp += ind.k_bar_plus[i];
      km += ind.k_bar_minus[i];
      kv += ind.k_bar_v[i];
      kl += ind.k_bar_l[i];
      var_kv += ind.se_k_bar_v[i] * ind.se_k_bar_v[i];
    }
    const double inv = 1.0 / static_cast<double>(entries.size());
    if (dated)
      out.dates.push_back(key);
    out.indices.push_back(dated ? out.indices.size()
                                : static_cast<std::size_t>(key.year));
    out.l_bar_plus.push_back(lp * inv);
    out.l_bar_minus.push_back(lm * inv);
    out.k_bar_plus.push_back(kp * inv);
    out.k_bar_minus.push_back(km * inv);
    out.k_bar_v.push_back(kv * inv);
    out.k_bar_l.push_back(kl * inv);
    out.se_k_bar_v.push_back(std::sqrt(var_kv) * inv);
    out.n_stocks.push_back(static_cast<int>(entries.size()));
  }
  return out;
}

SigmaSeries index_volatility(const ReturnSeries& idx_returns,
                             const RollingConfig& config) {
  config.validate();
  const std::size_t n = idx_returns.returns.size();
  if (n < config.window)
    throw InputError("index: series shorter than the window");
  const bool dated = !idx_returns.dates.empty();

  SigmaSeries out;
  const std::size_t n_evals = (n - config.window) / config.step + 1;
  for (std::size_t i = 0; i < n_evals; ++i) {
    const std::size_t end = config.window - 1 + i * config.step;
    const double* w = idx_returns.returns.data() + end + 1 - config.window;
    double mean = 0;
    for (std::size_t t = 0; t < config.window; ++t) mean += w[t];
    mean /= static_cast<double>(config.window);
    double ss = 0;
    for (std::size_t t = 0; t < config.window; ++t)
      ss += (w[t] - mean) * (w[t] - mean);
    out.indices.push_back(end);
    if (dated) out.dates.push_back(idx_returns.dates[end]);
    out.values.push_back(
        std::sqrt(ss / static_cast<double>(config.window - 1)));
  }
  return out;
}

void attach_index_volatility(RollingIndicator& indicator,
                             const SigmaSeries& sigma) {
  const bool dated = !indicator.dates.empty() && !sigma.dates.empty();
  std::map<Date, double> lookup;
  if (dated) {
    for (std::size_t i = 0; i < sigma.dates.size(); ++i)
      lookup[sigma.dates[i]] = sigma.values[i];
  } else {
    for (std::size_t i = 0; i < sigma.indices.size(); ++i)
      lookup[Date::ordinal(static_cast<std::int64_t>(sigma.indices[i]))] =
          sigma.values[i];
  }
  const std::size_t n = indicator.indices.size();
  indicator.sigma_r.assign(n, std::numeric_limits<double>::quiet_NaN());
  std::size_t missing = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const Date key = dated ? indicator.dates[i]
                           : Date::ordinal(static_cast<std::int64_t>(
                                 indicator.indices[i]));
    auto it = lookup.find(key);
    if (it != lookup.end())
      indicator.sigma_r[i] = it->second;
    else
      ++missing;
  }
  if (missing > 0)
    warn("index volatility missing on " + std::to_string(missing) + " of " +
         std::to_string(n) + " evaluation dates");
}

void write_rolling_csv(const std::string& path, const RollingIndicator& ind) {
  std::ofstream outf(path, std::ios::binary);
  if (!outf) throw InputError("cannot write " + path);
  outf << "date,k_bar_v,k_bar_l,k_bar_plus,k_bar_minus,sigma_r,n_stocks\n";
  const bool dated = !ind.dates.empty();
  for (std::size_t i = 0; i < ind.indices.size(); ++i) {
    if (dated)
      outf << ind.dates[i].to_string();
    else
      outf << ind.indices[i];
    outf << ',' << format_double(ind.k_bar_v[i]) << ','
         << format_double(ind.k_bar_l[i]) << ','
         << format_double(ind.k_bar_plus[i]) << ','
         << format_double(ind.k_bar_minus[i]) << ',';
    if (i < ind.sigma_r.size())
      outf << format_double(ind.sigma_r[i]);
    else
      outf << "nan";
    outf << ',' << ind.n_stocks[i] << '\n';
  }
}

}  // namespace volfeed
