#pragma once

// Regime monitoring on price data: CSV ingestion, daily losses, a null
// mean/variance fitted on a historical window, and sequential detection over
// a later testing window.
//
// Sign convention: a loss is positive when the price falls,
// L_t = -(S_{t+1} - S_t) / S_t. This is the opposite of the usual return.

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <span>
#include <string>
#include <system_error>
#include <vector>

#include "evtest/eprocess.hpp"
#include "evtest/error.hpp"
#include "evtest/evidence.hpp"
#include "evtest/format.hpp"

namespace evtest {

struct PriceSeries {
  std::vector<std::string> dates;
  std::vector<double> prices;
  std::size_t size() const { return prices.size(); }
};

struct LossSeries {
  /// Date on which each loss is realized (the later of the two prices).
  std::vector<std::string> dates;
  std::vector<double> losses;
  std::size_t size() const { return losses.size(); }
};

/// Inclusive ISO-8601 date range; an empty bound is open.
struct DateRange {
  std::string first;
  std::string last;
  bool contains(const std::string& d) const {
    return (first.empty() || d >= first) && (last.empty() || d <= last);
  }
};

struct NullEstimate {
  double mu_hat = 0.0;
  double sigma_hat = 1.0;
  DateRange window;
  std::size_t count = 0;
};

struct PriceCsvOptions {
  std::string date_column = "date";
  std::string price_column = "close";
};

/// Whether s is a valid calendar date written YYYY-MM-DD.
inline bool is_iso_date(std::string_view s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return false;
  int y = 0;
  unsigned m = 0;
  unsigned d = 0;
  auto ok = [](std::from_chars_result r, const char* end) { return r.ec == std::errc{} && r.ptr == end; };
  if (!ok(std::from_chars(s.data(), s.data() + 4, y), s.data() + 4)) return false;
  if (!ok(std::from_chars(s.data() + 5, s.data() + 7, m), s.data() + 7)) return false;
  if (!ok(std::from_chars(s.data() + 8, s.data() + 10, d), s.data() + 10)) return false;
  return std::chrono::year_month_day{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}}.ok();
}

inline double parse_double(std::string_view text, const std::string& context) {
  const std::string s = trim(text);
  double v = 0.0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || r.ec != std::errc{} || r.ptr != s.data() + s.size())
    throw Error(context + ": cannot parse number '" + s + "'");
  return v;
}

/// Reads a price table with a header row. Rows are returned sorted by date
/// (stable); missing trading days are not imputed.
inline PriceSeries load_prices(std::istream& in, const PriceCsvOptions& opt = {}) {
  std::string line;
  if (!std::getline(in, line)) throw Error("price file is empty");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  const auto header = split_csv_line(line);
  std::size_t date_col = header.size();
  std::size_t price_col = header.size();
  for (std::size_t i = 0; i < header.size(); ++i) {
    const std::string h = trim(header[i]);
    if (h == opt.date_column) date_col = i;
    if (h == opt.price_column) price_col = i;
  }
  if (date_col == header.size()) throw Error("missing date column '" + opt.date_column + "'");
  if (price_col == header.size()) throw Error("missing price column '" + opt.price_column + "'");

  struct Row {
    std::string date;
    double price;
    std::size_t line;
  };
  std::vector<Row> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_csv_line(line);
    const std::string where = "row " + std::to_string(line_no);
    if (fields.size() <= std::max(date_col, price_col)) throw Error(where + ": too few columns");
    std::string date = trim(fields[date_col]);
    if (!is_iso_date(date)) throw Error(where + ": invalid date '" + date + "'");
    const double price = parse_double(fields[price_col], where);
    if (!std::isfinite(price) || !(price > 0.0)) throw Error(where + ": price must be positive");
    rows.push_back({std::move(date), price, line_no});
  }
  std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.date < b.date; });
  for (std::size_t i = 1; i < rows.size(); ++i)
    if (rows[i].date == rows[i - 1].date)
      throw Error("row " + std::to_string(rows[i].line) + ": duplicate date " + rows[i].date + " (also row " +
                  std::to_string(rows[i - 1].line) + ")");
  if (rows.size() < 2) throw Error("price series needs at least two rows");

  PriceSeries s;
  for (auto& r : rows) {
    s.dates.push_back(std::move(r.date));
    s.prices.push_back(r.price);
  }
  return s;
}

inline PriceSeries load_prices(const std::string& path, const PriceCsvOptions& opt = {}) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "'");
  return load_prices(in, opt);
}

/// Shortest round-trip decimal representation.
inline std::string format_exact(double x) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

inline void write_prices(std::ostream& os, const PriceSeries& s, const PriceCsvOptions& opt = {}) {
  os << opt.date_column << ',' << opt.price_column << '\n';
  for (std::size_t i = 0; i < s.size(); ++i) os << s.dates[i] << ',' << format_exact(s.prices[i]) << '\n';
}

/// Linear losses -(S_{t+1} - S_t) / S_t, or -log(S_{t+1} / S_t) when log_losses is set.
inline LossSeries to_losses(const PriceSeries& s, bool log_losses = false) {
  if (s.size() < 2 || s.dates.size() != s.size()) throw Error("price series needs at least two rows");
  LossSeries out;
  for (std::size_t t = 0; t + 1 < s.size(); ++t) {
    const double prev = s.prices[t];
    const double next = s.prices[t + 1];
    out.losses.push_back(log_losses ? -std::log(next / prev) : -(next - prev) / prev);
    out.dates.push_back(s.dates[t + 1]);
  }
  return out;
}

inline LossSeries restrict_to(const LossSeries& l, const DateRange& window) {
  LossSeries out;
  for (std::size_t i = 0; i < l.size(); ++i) {
    if (window.contains(l.dates[i])) {
      out.dates.push_back(l.dates[i]);
      out.losses.push_back(l.losses[i]);
    }
  }
  return out;
}

/// Sample mean and sample standard deviation (denominator n - 1) of the
/// losses inside the window.
inline NullEstimate estimate_null(const LossSeries& losses, const DateRange& window) {
  const LossSeries in = restrict_to(losses, window);
  if (in.size() < 2) throw Error("null estimation needs at least two losses in the window");
  const double n = static_cast<double>(in.size());
  const double mean = std::accumulate(in.losses.begin(), in.losses.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : in.losses) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / (n - 1.0));
  if (!(sd > 0.0)) throw Error("losses in the estimation window have zero variance");
  return {mean, sd, {in.dates.front(), in.dates.back()}, in.size()};
}

struct MonitorResult {
  DetectionReport report;
  std::vector<std::string> dates;
  std::vector<double> wealth;
  std::vector<double> log_wealth;
};

/// Runs the e-process over the losses under H(mu_hat, sigma_hat) with the
/// given shape. Crossing indices count trading days from the first loss.
inline MonitorResult detect(const LossSeries& losses, const NullEstimate& est, const BettingStrategy& strategy,
                            ShapeClass shape, std::span<const double> thresholds) {
  const Hypothesis h{{est.mu_hat, est.sigma_hat}, shape, OneSidedUpper{}};
  MonitorResult out;
  out.dates = losses.dates;
  out.wealth = run_eprocess(h, strategy, losses.losses);
  out.log_wealth.reserve(out.wealth.size());
  for (double m : out.wealth) out.log_wealth.push_back(std::log(m));
  out.report = first_crossing(out.wealth, thresholds);
  return out;
}

inline void write_detection_csv(std::ostream& os, const MonitorResult& r) {
  os << "threshold,crossing_day,crossing_date\n";
  for (std::size_t k = 0; k < r.report.thresholds.size(); ++k) {
    const auto& idx = r.report.crossing_index[k];
    os << format_number(r.report.thresholds[k]) << ',' << format_index(idx) << ','
       << (idx ? r.dates[*idx - 1] : std::string("-")) << '\n';
  }
}

inline void write_log_wealth_csv(std::ostream& os, const MonitorResult& r) {
  os << "date,log_wealth\n";
  for (std::size_t t = 0; t < r.log_wealth.size(); ++t)
    os << r.dates[t] << ',' << format_number(r.log_wealth[t]) << '\n';
}

}  // namespace evtest
