#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "doctest.h"
#include "testutil.hpp"
#include "volfeed/csv.hpp"
#include "volfeed/errors.hpp"
#include "volfeed/kernel.hpp"
#include "volfeed/observables.hpp"
#include "volfeed/rng.hpp"
#include "volfeed/rolling.hpp"
#include "volfeed/simulator.hpp"

using namespace volfeed;

namespace {

ReturnSeries feedback_series(std::size_t n, std::uint64_t seed) {
  SimConfig cfg;
  cfg.sigma0 = 0.01;
  cfg.k_plus = {0.03, 0.02, 0.01};
  cfg.k_minus = {-0.05, -0.03, -0.02};
  cfg.length = n;
  cfg.burn_in = 50;
  cfg.seed = seed;
  return simulate(cfg).series;
}

RollingConfig config_of(std::size_t window, std::size_t lag,
                        std::size_t step) {
  RollingConfig cfg;
  cfg.window = window;
  cfg.lag_average = lag;
  cfg.step = step;
  return cfg;
}

}  // namespace

TEST_CASE("rolling config validation") {
  CHECK_NOTHROW(config_of(400, 10, 5).validate());
  CHECK_THROWS_AS(config_of(90, 10, 1).validate(), ConfigError);
  CHECK_THROWS_AS(config_of(400, 0, 1).validate(), ConfigError);
  CHECK_THROWS_AS(config_of(400, 10, 0).validate(), ConfigError);
}

TEST_CASE("evaluation grid and window anchoring") {
  const ReturnSeries s = feedback_series(1000, 3);
  const RollingIndicator ind = rolling_indicators(s, config_of(400, 10, 7));
  REQUIRE(!ind.indices.empty());
  CHECK(ind.indices.front() == 399);  // first full window
  for (std::size_t i = 1; i < ind.indices.size(); ++i)
    CHECK(ind.indices[i] == ind.indices[i - 1] + 7);
  CHECK(ind.indices.back() <= 999);
  CHECK(ind.k_bar_v.size() == ind.indices.size());
  CHECK(ind.dates.empty());  // simulated input has no dates
  for (int n : ind.n_stocks) CHECK(n == 1);
}

TEST_CASE("short series and misaligned dates are rejected") {
  const ReturnSeries s = feedback_series(200, 4);
  CHECK_THROWS_AS(rolling_indicators(s, config_of(400, 10, 1)), InputError);

  ReturnSeries dated = feedback_series(500, 5);
  dated.dates.assign(499, Date::ordinal(0));  // wrong length
  CHECK_THROWS_AS(rolling_indicators(dated, config_of(400, 10, 50)), InputError);
}

TEST_CASE("values at an index never depend on later returns") {
  const ReturnSeries a = feedback_series(3000, 6);
  ReturnSeries b = a;
  for (std::size_t t = 2500; t < b.returns.size(); ++t)
    b.returns[t] *= 5.0;  // corrupt the tail

  const RollingConfig cfg = config_of(400, 10, 7);
  const RollingIndicator ia = rolling_indicators(a, cfg);
  const RollingIndicator ib = rolling_indicators(b, cfg);
  for (std::size_t i = 0; i < ia.indices.size(); ++i) {
    if (ia.indices[i] >= 2500) break;
    CHECK(ia.k_bar_v[i] == ib.k_bar_v[i]);
    CHECK(ia.k_bar_l[i] == ib.k_bar_l[i]);
    CHECK(ia.k_bar_plus[i] == ib.k_bar_plus[i]);
    CHECK(ia.k_bar_minus[i] == ib.k_bar_minus[i]);
    CHECK(ia.se_k_bar_v[i] == ib.se_k_bar_v[i]);
  }
}

TEST_CASE("serial and parallel evaluation agree bitwise") {
  const ReturnSeries s = feedback_series(2500, 7);
  const RollingConfig cfg = config_of(400, 10, 11);
  const RollingIndicator ser = rolling_indicators(s, cfg, Exec::serial);
  const RollingIndicator par = rolling_indicators(s, cfg, Exec::parallel);
  REQUIRE(ser.indices == par.indices);
  CHECK(ser.k_bar_v == par.k_bar_v);
  CHECK(ser.k_bar_l == par.k_bar_l);
  CHECK(ser.l_bar_plus == par.l_bar_plus);
  CHECK(ser.se_k_bar_v == par.se_k_bar_v);
}

TEST_CASE("a window of constant returns is reported, not averaged over") {
  ReturnSeries s = feedback_series(800, 8);
  for (std::size_t t = 400; t < 800; ++t) s.returns[t] = 0.0;
  CHECK_THROWS_WITH_AS(rolling_indicators(s, config_of(400, 10, 50)),
                       doctest::Contains("degenerate window"), NumericalError);
}

TEST_CASE("rolling mean tracks the whole-series kernel level") {
  const ReturnSeries s = feedback_series(6000, 9);
  const RollingIndicator ind = rolling_indicators(s, config_of(400, 3, 10));

  // whole-series estimate of the same lag average
  const ObservableSet obs = estimate_observables(s, 3);
  const KernelEstimate est = invert_observables(obs);
  double global = 0.0;
  for (int i = 0; i < 3; ++i) global += est.k_v[i] / 3.0;

  double mean = 0.0;
  for (double v : ind.k_bar_v) mean += v;
  mean /= static_cast<double>(ind.k_bar_v.size());
  CHECK(std::abs(mean - global) < 0.05);
}

TEST_CASE("market average per index") {
  const RollingConfig cfg = config_of(400, 10, 50);
  const RollingIndicator a = rolling_indicators(feedback_series(1500, 21), cfg);
  const RollingIndicator b = rolling_indicators(feedback_series(1500, 22), cfg);

  const RollingIndicator avg = market_average({a, b});
  REQUIRE(avg.indices == a.indices);
  for (std::size_t i = 0; i < avg.indices.size(); ++i) {
    CHECK(avg.k_bar_v[i] ==
          doctest::Approx(0.5 * (a.k_bar_v[i] + b.k_bar_v[i])).epsilon(1e-12));
    CHECK(avg.n_stocks[i] == 2);
  }

  // single-input average is the identity
  const RollingIndicator one = market_average({a});
  CHECK(one.k_bar_v == a.k_bar_v);
  CHECK(one.n_stocks == std::vector<int>(a.indices.size(), 1));

  // partial overlap: the shorter series contributes where it exists
  const RollingIndicator c = rolling_indicators(feedback_series(1000, 23), cfg);
  const RollingIndicator trio = market_average({a, b, c});
  REQUIRE(trio.indices.size() == a.indices.size());
  for (std::size_t i = 0; i < trio.indices.size(); ++i)
    CHECK(trio.n_stocks[i] == (trio.indices[i] <= 999 ? 3 : 2));
}

TEST_CASE("market average input validation") {
  CHECK_THROWS_AS(market_average({}), InputError);

  const RollingConfig cfg = config_of(400, 10, 50);
  const RollingIndicator plain = rolling_indicators(feedback_series(1200, 24), cfg);
  ReturnSeries dated = feedback_series(1200, 25);
  dated.dates.resize(1200);
  for (std::size_t i = 0; i < 1200; ++i) dated.dates[i] = Date::ordinal(i);
  const RollingIndicator with_dates = rolling_indicators(dated, cfg);
  CHECK_THROWS_AS(market_average({plain, with_dates}), InputError);

  // no shared evaluation points at all
  const RollingIndicator early = rolling_indicators(feedback_series(900, 26),
                                                    config_of(400, 10, 601));
  const RollingIndicator late = rolling_indicators(feedback_series(1500, 27),
                                                   config_of(1000, 10, 601));
  CHECK_THROWS_WITH_AS(market_average({early, late}),
                       doctest::Contains("share no evaluation"), InputError);
}

TEST_CASE("index volatility matches a direct standard deviation") {
  const ReturnSeries s = feedback_series(700, 28);
  const RollingConfig cfg = config_of(400, 10, 30);
  const SigmaSeries sig = index_volatility(s, cfg);
  REQUIRE(!sig.indices.empty());
  for (std::size_t i = 0; i < sig.indices.size(); ++i) {
    const std::size_t e = sig.indices[i];
    double mean = 0.0;
    for (std::size_t t = e + 1 - 400; t <= e; ++t) mean += s.returns[t];
    mean /= 400.0;
    double ss = 0.0;
    for (std::size_t t = e + 1 - 400; t <= e; ++t)
      ss += (s.returns[t] - mean) * (s.returns[t] - mean);
    const double sd = std::sqrt(ss / 399.0);
    CHECK(sig.values[i] == doctest::Approx(sd).epsilon(1e-12));
  }
}

TEST_CASE("attaching index volatility aligns and pads") {
  const ReturnSeries s = feedback_series(1200, 29);
  const RollingConfig cfg = config_of(400, 10, 40);
  RollingIndicator ind = rolling_indicators(s, cfg);
  const SigmaSeries sig = index_volatility(s, cfg);
  attach_index_volatility(ind, sig);
  REQUIRE(ind.sigma_r.size() == ind.indices.size());
  for (double v : ind.sigma_r) CHECK(std::isfinite(v));

  // a mismatched grid leaves holes marked NaN
  RollingIndicator ind2 = rolling_indicators(s, cfg);
  const SigmaSeries offset = index_volatility(s, config_of(401, 10, 40));
  attach_index_volatility(ind2, offset);
  CHECK(std::any_of(ind2.sigma_r.begin(), ind2.sigma_r.end(),
                    [](double v) { return std::isnan(v); }));
}

TEST_CASE("rolling csv layout") {
  const ReturnSeries s = feedback_series(900, 30);
  const RollingIndicator ind = rolling_indicators(s, config_of(400, 10, 100));
  const std::string path = testutil::tmp_path("rolling.csv");
  write_rolling_csv(path, ind);
  CsvTable t = read_csv(path);
  CHECK(t.header ==
        std::vector<std::string>{"date", "k_bar_v", "k_bar_l", "k_bar_plus",
                                 "k_bar_minus", "sigma_r", "n_stocks"});
  REQUIRE(t.rows.size() == ind.indices.size());
  CHECK(t.rows[0][5] == "nan");  // sigma_r never attached
  CHECK(parse_double(t.rows[0][1], "t") == ind.k_bar_v[0]);
}
