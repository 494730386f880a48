#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "volfeed/marketdata.hpp"

namespace volfeed {

// Monte Carlo generator for the feedback model. The volatility floor keeps
// sigma(t) positive when a deep drawdown drives the feedback sum below
// -sigma_0; hits are counted and a hit rate above 5% aborts the run since
// the clipped process is no longer the model being calibrated.
struct SimConfig {
  double sigma0 = 0.01;
  std::vector<double> k_plus;   // lag 1..tau_max
  std::vector<double> k_minus;  // same length as k_plus
  std::size_t length = 0;
  std::size_t burn_in = 0;  // >= 2 * tau_max enforced
  std::uint64_t seed = 1;
  double sigma_floor = 0.05;  // fraction of sigma0, in (0, 0.5]
  // Centering constants for the feedback terms. Defaults are the
  // leading-order values +-sigma0/sqrt(2 pi); the realized means differ
  // from these at O(K), which feeds the second-order corrections.
  double er_plus = 0.0;
  double er_minus = 0.0;
  bool er_defaulted = true;

  std::size_t tau_max() const { return k_plus.size(); }
  void validate() const;  // throws ConfigError
};

struct SimResult {
  ReturnSeries series;
  std::size_t floor_hits = 0;
  double floor_rate = 0.0;
};

SimResult simulate(const SimConfig& config);

// Concatenated segments with different parameters; the return history (and
// the random stream) carries across each boundary, so the response to a
// parameter change can be studied without a fresh transient.
struct RegimeSwitchResult {
  ReturnSeries series;
  std::vector<std::size_t> boundaries;  // first output index of each later segment
  std::size_t floor_hits = 0;
};

RegimeSwitchResult simulate_regime_switch(const std::vector<SimConfig>& segments);

SimConfig load_sim_config(const std::string& path);

}  // namespace volfeed
