#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "volfeed/marketdata.hpp"
#include "volfeed/parallel.hpp"

namespace volfeed {

struct RollingConfig {
  std::size_t window = 400;      // trading days per estimate
  std::size_t lag_average = 10;  // kernel lags averaged into the indicator
  std::size_t step = 1;          // evaluation stride
  void validate() const;         // window >= 10 * lag_average, step >= 1
};

// Lag-averaged kernel amplitudes on a rolling window. Every quantity at
// evaluation index e uses returns [e - window + 1, e] only, so the series
// is causal: perturbing the input after e cannot change the value at e.
struct RollingIndicator {
  std::vector<std::size_t> indices;  // evaluation positions in the input
  std::vector<Date> dates;           // empty when the input has no dates
  std::vector<double> l_bar_plus, l_bar_minus;
  std::vector<double> k_bar_plus, k_bar_minus;
  std::vector<double> k_bar_v, k_bar_l;
  std::vector<double> se_k_bar_v;
  std::vector<double> sigma_r;  // filled by attach_index_volatility
  std::vector<int> n_stocks;
};

RollingIndicator rolling_indicators(const ReturnSeries& series,
                                    const RollingConfig& config,
                                    Exec policy = Exec::parallel);

// Cross-sectional mean of per-stock indicators, aligned on evaluation dates
// (or indices when no input carries dates). n_stocks records how many
// indicators contributed at each point.
RollingIndicator market_average(const std::vector<RollingIndicator>& indicators);

struct SigmaSeries {
  std::vector<std::size_t> indices;
  std::vector<Date> dates;
  std::vector<double> values;
};

// Rolling demeaned standard deviation of index returns on the same window.
SigmaSeries index_volatility(const ReturnSeries& idx_returns,
                             const RollingConfig& config);

void attach_index_volatility(RollingIndicator& indicator,
                             const SigmaSeries& sigma);

void write_rolling_csv(const std::string& path, const RollingIndicator& ind);

}  // namespace volfeed
