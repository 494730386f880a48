#include "volfeed/marketdata.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "volfeed/csv.hpp"
#include "volfeed/errors.hpp"
#include "volfeed/numerics.hpp"

namespace volfeed {

namespace {

bool all_digits(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s)
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  return true;
}

std::string stem_of(const std::string& path) {
  std::size_t slash = path.find_last_of("/\\");
  std::string name = slash == std::string::npos ? path : path.substr(slash + 1);
  std::size_t dot = name.find_last_of('.');
  return dot == std::string::npos ? name : name.substr(0, dot);
}

// Sort rows by date, then reject duplicates. Feeds often arrive unordered;
// the duplicate check runs after the sort so it catches every collision.
template <typename Swap>
void order_by_date(std::vector<Date>& dates, const std::string& path, Swap swap) {
  std::vector<std::size_t> perm(dates.size());
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::stable_sort(perm.begin(), perm.end(),
                   [&](std::size_t a, std::size_t b) { return dates[a] < dates[b]; });
  bool sorted = std::is_sorted(perm.begin(), perm.end());
  if (!sorted) swap(perm);
  for (std::size_t i = 1; i < dates.size(); ++i)
    if (dates[i] == dates[i - 1])
      throw InputError(path + ": duplicate date " + dates[i].to_string());
}

}  // namespace

Date Date::from_string(const std::string& text) {
  if (text.size() == 10 && text[4] == '-' && text[7] == '-') {
    Date d;
    for (int i : {0, 1, 2, 3}) {
      if (!std::isdigit(static_cast<unsigned char>(text[i])))
        throw InputError("bad date '" + text + "'");
    }
    for (int i : {5, 6, 8, 9}) {
      if (!std::isdigit(static_cast<unsigned char>(text[i])))
        throw InputError("bad date '" + text + "'");
    }
    d.year = std::stoi(text.substr(0, 4));
    d.month = std::stoi(text.substr(5, 2));
    d.day = std::stoi(text.substr(8, 2));
    if (d.month < 1 || d.month > 12 || d.day < 1 || d.day > 31)
      throw InputError("bad date '" + text + "'");
    return d;
  }
  if (all_digits(text)) return Date::ordinal(std::stoll(text));
  throw InputError("bad date '" + text + "'");
}

std::string Date::to_string() const {
  char buf[16];
  if (is_ordinal())
    std::snprintf(buf, sizeof buf, "%d", year);
  else
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", year, month, day);
  return buf;
}

PriceSeries load_prices(const std::string& path, const CsvColumns& cols) {
  CsvTable table = read_csv(path);
  const std::size_t ci_date = table.column(cols.date);
  const std::size_t ci_close = table.column(cols.close);

  PriceSeries out;
  out.symbol = stem_of(path);
  out.dates.reserve(table.rows.size());
  out.closes.reserve(table.rows.size());
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const std::string where = path + ":" + std::to_string(table.line_numbers[i]);
    out.dates.push_back(Date::from_string(table.rows[i][ci_date]));
    double close = parse_double(table.rows[i][ci_close], where);
    if (!(close > 0.0))
      throw InputError(where + ": non-positive close " + table.rows[i][ci_close]);
    out.closes.push_back(close);
  }
  order_by_date(out.dates, path, [&](const std::vector<std::size_t>& perm) {
    std::vector<Date> d(out.dates.size());
    std::vector<double> c(out.closes.size());
    for (std::size_t i = 0; i < perm.size(); ++i) {
      d[i] = out.dates[perm[i]];
      c[i] = out.closes[perm[i]];
    }
    out.dates = std::move(d);
    out.closes = std::move(c);
  });
  return out;
}

IndexSeries load_index(const std::string& path, const CsvColumns& cols) {
  CsvTable table = read_csv(path);
  const std::size_t ci_date = table.column(cols.date);
  const std::size_t ci_value = table.column(cols.close);
  const std::size_t ci_div = table.column(cols.divisor);

  IndexSeries out;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const std::string where = path + ":" + std::to_string(table.line_numbers[i]);
    out.dates.push_back(Date::from_string(table.rows[i][ci_date]));
    double value = parse_double(table.rows[i][ci_value], where);
    double divisor = parse_double(table.rows[i][ci_div], where);
    if (!(value > 0.0))
      throw InputError(where + ": non-positive index value");
    if (!(divisor > 0.0))
      throw InputError(where + ": non-positive divisor");
    out.values.push_back(value);
    out.divisors.push_back(divisor);
  }
  order_by_date(out.dates, path, [&](const std::vector<std::size_t>& perm) {
    std::vector<Date> d(out.dates.size());
    std::vector<double> v(out.values.size()), dv(out.divisors.size());
    for (std::size_t i = 0; i < perm.size(); ++i) {
      d[i] = out.dates[perm[i]];
      v[i] = out.values[perm[i]];
      dv[i] = out.divisors[perm[i]];
    }
    out.dates = std::move(d);
    out.values = std::move(v);
    out.divisors = std::move(dv);
  });
  return out;
}

ReturnSeries load_returns(const std::string& path, const CsvColumns& cols) {
  CsvTable table = read_csv(path);
  const std::size_t ci_date = table.column(cols.date);
  const std::size_t ci_ret = table.column(cols.ret);

  ReturnSeries out;
  out.symbol = stem_of(path);
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const std::string where = path + ":" + std::to_string(table.line_numbers[i]);
    out.dates.push_back(Date::from_string(table.rows[i][ci_date]));
    out.returns.push_back(parse_double(table.rows[i][ci_ret], where));
  }
  return out;
}

void write_returns_csv(const std::string& path, const ReturnSeries& series) {
  std::ofstream outf(path, std::ios::binary);
  if (!outf) throw InputError("cannot write " + path);
  outf << "date,return\n";
  for (std::size_t t = 0; t < series.returns.size(); ++t) {
    if (t < series.dates.size())
      outf << series.dates[t].to_string();
    else
      outf << t;
    outf << ',' << format_double(series.returns[t]) << '\n';
  }
}

ReturnSeries to_returns(const PriceSeries& prices, double cutoff) {
  if (prices.closes.size() < 2)
    throw InputError(prices.symbol + ": need at least 2 prices");
  double effective = std::clamp(cutoff, 0.05, 0.5);
  if (effective != cutoff)
    warn(prices.symbol + ": cutoff " + format_double(cutoff, 6) +
         " clamped to " + format_double(effective, 6));

  ReturnSeries out;
  out.symbol = prices.symbol;
  out.cutoff = effective;
  const std::size_t n = prices.closes.size() - 1;
  out.returns.reserve(n);
  out.dates.assign(prices.dates.begin() + 1, prices.dates.end());
  for (std::size_t t = 0; t < n; ++t) {
    double ratio = prices.closes[t + 1] / prices.closes[t];
    if (std::abs(ratio - 1.0) > effective) {
      out.returns.push_back(0.0);
      ++out.zeroed_count;
    } else {
      out.returns.push_back(std::log(ratio));
    }
  }
  if (out.zeroed_count * 100 > n)
    warn(prices.symbol + ": zeroed " + std::to_string(out.zeroed_count) +
         " of " + std::to_string(n) + " returns (over 1%)");
  return out;
}

ReturnSeries index_returns(const IndexSeries& index) {
  if (index.values.size() < 2)
    throw InputError("index: need at least 2 rows");
  ReturnSeries out;
  out.symbol = "index";
  out.cutoff = 0.0;
  const std::size_t n = index.values.size() - 1;
  out.returns.reserve(n);
  out.dates.assign(index.dates.begin() + 1, index.dates.end());
  for (std::size_t t = 0; t < n; ++t) {
    double a = index.values[t + 1] / index.divisors[t + 1];
    double b = index.values[t] / index.divisors[t];
    out.returns.push_back(std::log(a) - std::log(b));
  }
  return out;
}

SignSplit split_signs(const ReturnSeries& series) {
  SignSplit out;
  out.plus.reserve(series.returns.size());
  out.minus.reserve(series.returns.size());
  for (double r : series.returns) {
    out.plus.push_back(r > 0.0 ? r : 0.0);
    out.minus.push_back(r < 0.0 ? r : 0.0);
  }
  return out;
}

ReturnSeries demeaned(const ReturnSeries& series) {
  ReturnSeries out = series;
  const double mean = compensated_mean(series.returns);
  for (double& r : out.returns) r -= mean;
  return out;
}

}  // namespace volfeed
