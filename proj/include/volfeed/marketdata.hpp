#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace volfeed {

// Calendar date, or a plain ordinal (month == 0) for simulated series where
// rows are indexed by step instead of by day.
struct Date {
  std::int32_t year = 0;
  std::int32_t month = 0;
  std::int32_t day = 0;

  bool is_ordinal() const { return month == 0; }
  static Date from_string(const std::string& text);
  static Date ordinal(std::int64_t index) {
    return Date{static_cast<std::int32_t>(index), 0, 0};
  }
  std::string to_string() const;
  auto operator<=>(const Date&) const = default;
};

struct PriceSeries {
  std::string symbol;
  std::vector<Date> dates;
  std::vector<double> closes;
};

struct IndexSeries {
  std::vector<Date> dates;
  std::vector<double> values;
  std::vector<double> divisors;
};

// Log returns after jump regularization. dates, when present, align with the
// return at the end of each interval (one fewer than the prices).
struct ReturnSeries {
  std::string symbol;
  std::vector<double> returns;
  std::vector<Date> dates;  // empty for simulated series
  std::size_t zeroed_count = 0;
  double cutoff = 0.0;
};

struct SignSplit {
  std::vector<double> plus;   // r when r > 0, else 0
  std::vector<double> minus;  // r when r < 0, else 0
};

struct CsvColumns {
  std::string date = "date";
  std::string close = "close";
  std::string divisor = "divisor";
  std::string ret = "return";
};

PriceSeries load_prices(const std::string& path, const CsvColumns& cols = {});
IndexSeries load_index(const std::string& path, const CsvColumns& cols = {});
ReturnSeries load_returns(const std::string& path, const CsvColumns& cols = {});
void write_returns_csv(const std::string& path, const ReturnSeries& series);

// Log returns with single-day moves beyond the cutoff zeroed out. The test
// is on the raw price ratio |p(t+1)/p(t) - 1| so that a data glitch such as
// an unadjusted split is caught on the same scale it appears in the feed.
// The cutoff is clamped to [0.05, 0.5].
ReturnSeries to_returns(const PriceSeries& prices, double cutoff = 0.15);

// Divisor-adjusted index log returns; no jump regularization.
ReturnSeries index_returns(const IndexSeries& index);

SignSplit split_signs(const ReturnSeries& series);

ReturnSeries demeaned(const ReturnSeries& series);

}  // namespace volfeed
