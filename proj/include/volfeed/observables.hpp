#pragma once

#include <cstddef>
#include <vector>

#include "volfeed/marketdata.hpp"
#include "volfeed/parallel.hpp"

namespace volfeed {

// Signed lagged covariances between squared returns and past returns:
//   l_plus(tau)  = E[r^2(t) r_+(t-tau)] - E[r^2] E[r_+]
//   l_minus(tau) = E[r^2(t) r_-(t-tau)] - E[r^2] E[r_-]
//   l_total      = l_plus + l_minus   (held exactly, by construction)
//   v(tau)       = E[r^2(t) r^2(t-tau)] - E[r^2]^2
// Standard errors come from the per-date product series with an effective
// sample size N/(1 + 2 sum_{k<=50} rho_k), rho_k the autocorrelation of r^2;
// clustered volatility makes the naive 1/sqrt(N) optimistic.
struct ObservableSet {
  std::vector<int> lags;  // 1..tau_max
  std::vector<double> l_plus, l_minus, l_total, v;
  std::vector<double> se_l_plus, se_l_minus, se_l_total, se_v;
  double sigma = 0.0;  // sqrt(E[r^2]) of the source series
  std::size_t n_samples = 0;
  double autocorr_factor = 1.0;  // 1 + 2 sum rho_k, floored at 1
  bool normalized = false;
};

ObservableSet estimate_observables(const ReturnSeries& series,
                                   std::size_t tau_max,
                                   Exec policy = Exec::parallel);

// Straightforward reference implementation, one plain loop per lag. Kept as
// the correctness baseline for the blocked parallel kernel above.
ObservableSet estimate_observables_serial(const ReturnSeries& series,
                                          std::size_t tau_max);

// Dimensionless form: l/sigma^3 and v/sigma^4. Idempotent.
ObservableSet normalized(const ObservableSet& obs);

struct LaggedStat {
  std::vector<int> lags;
  std::vector<double> value;
  std::vector<double> se;
};

// E[r^2(t) r(t+tau)] - E[r^2] E[r], the future-side counterpart of l_total.
// Statistically zero under causal feedback; a nonzero value flags lookahead.
LaggedStat anticipatory_leverage(const ReturnSeries& series,
                                 std::size_t tau_max);

// Sample autocorrelation of raw returns with heteroskedasticity-robust SEs.
LaggedStat return_autocorrelation(const ReturnSeries& series,
                                  std::size_t tau_max);

void write_observables_csv(const std::string& path, const ObservableSet& obs);

}  // namespace volfeed
