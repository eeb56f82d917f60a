#include "rgqr/market_data.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <string_view>

#include "rgqr/detail/format.hpp"
#include "rgqr/realized_measures.hpp"

namespace rgqr {

namespace {

using detail::format_double;
using detail::parse_double;
using detail::parse_long;
using detail::split_csv;
using detail::strip_cr;

std::string format_tau(double tau) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%.2f", tau);
  return std::string(buf);
}

}  // namespace

void IntradayDay::validate() const {
  if (log_prices.size() < 2) {
    throw InsufficientDataError("day " + std::to_string(day_index) +
                                ": fewer than 2 ticks");
  }
  for (double p : log_prices) {
    if (!std::isfinite(p)) {
      throw NumericError("day " + std::to_string(day_index) +
                         ": non-finite log price");
    }
  }
  if (day_index < 1) {
    throw OrderingError("day index must be >= 1, got " +
                        std::to_string(day_index));
  }
}

void DailyObservation::validate() const {
  if (rv < 0.0 || ov < 0.0) {
    throw DomainError("day " + std::to_string(day_index) +
                      ": rv and ov must be nonnegative");
  }
  double prev = -std::numeric_limits<double>::infinity();
  for (const auto& [tau, q] : rq) {
    if (q < prev) {
      throw DomainError("day " + std::to_string(day_index) +
                        ": realized quantiles not monotone in tau");
    }
    prev = q;
  }
}

double rq_at(const DailyObservation& obs, double tau) {
  auto it = obs.rq.lower_bound(tau - 1e-12);
  if (it == obs.rq.end() || std::fabs(it->first - tau) > 1e-9) {
    throw ConfigError("day " + std::to_string(obs.day_index) +
                      ": no realized quantile for tau=" + format_tau(tau));
  }
  return it->second;
}

std::vector<IntradayDay> load_intraday_csv(const std::string& path,
                                           const SessionCalendar& calendar) {
  calendar.validate();
  std::ifstream in(path);
  if (!in) throw IoError("cannot open intraday CSV: " + path);

  std::vector<IntradayDay> days;
  bool have_close_prev = false;
  double close_prev0 = 0.0;
  bool header_seen = false;
  std::string line;
  long line_no = 0;

  IntradayDay cur;
  long last_tick = 0;

  auto flush_day = [&]() {
    if (cur.log_prices.empty()) return;
    cur.validate();
    days.push_back(std::move(cur));
    cur = IntradayDay{};
  };

  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto pos = line.find("close_prev=");
      if (pos != std::string::npos) {
        close_prev0 = parse_double(
            std::string_view(line).substr(pos + 11), line_no);
        have_close_prev = true;
      }
      continue;
    }
    if (!header_seen) {
      if (line != "day,tick,logprice") {
        throw ParseError("line " + std::to_string(line_no) +
                         ": expected header 'day,tick,logprice'");
      }
      header_seen = true;
      continue;
    }
    const auto fields = split_csv(line);
    if (fields.size() != 3) {
      throw ParseError("line " + std::to_string(line_no) +
                       ": expected 3 fields, got " +
                       std::to_string(fields.size()));
    }
    const long day = parse_long(fields[0], line_no);
    const long tick = parse_long(fields[1], line_no);
    const double price = parse_double(fields[2], line_no);
    if (!std::isfinite(price)) {
      throw ParseError("line " + std::to_string(line_no) +
                       ": non-finite log price");
    }

    if (cur.log_prices.empty()) {
      cur.day_index = static_cast<int>(day);
      last_tick = tick;
    } else if (day == cur.day_index) {
      if (tick <= last_tick) {
        throw OrderingError("line " + std::to_string(line_no) +
                            ": tick index not increasing within day " +
                            std::to_string(day));
      }
      last_tick = tick;
    } else {
      if (day != cur.day_index + 1) {
        throw OrderingError("line " + std::to_string(line_no) + ": day " +
                            std::to_string(day) + " follows day " +
                            std::to_string(cur.day_index) +
                            " (gap or disorder)");
      }
      const double prev_close = cur.close();
      flush_day();
      cur.day_index = static_cast<int>(day);
      cur.close_prev = prev_close;
      last_tick = tick;
    }
    cur.log_prices.push_back(price);
  }
  if (!header_seen) throw ParseError("missing header 'day,tick,logprice'");
  flush_day();
  if (days.empty()) throw InsufficientDataError("intraday CSV has no rows");

  if (have_close_prev) {
    days.front().close_prev = close_prev0;
  } else {
    days.front().close_prev = days.front().open();
    days.front().close_prev_synthetic = true;
  }
  return days;
}

void write_intraday_csv(const std::string& path,
                        std::span<const IntradayDay> days) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write intraday CSV: " + path);
  if (!days.empty() && !days.front().close_prev_synthetic) {
    out << "# close_prev=" << format_double(days.front().close_prev) << "\n";
  }
  out << "day,tick,logprice\n";
  for (const auto& day : days) {
    for (std::size_t i = 0; i < day.log_prices.size(); ++i) {
      out << day.day_index << ',' << i << ','
          << format_double(day.log_prices[i]) << "\n";
    }
  }
  if (!out) throw IoError("write failed: " + path);
}

std::vector<DailyObservation> build_daily_observations(
    std::span<const IntradayDay> days, const std::vector<double>& taus) {
  if (days.size() < 2) {
    throw InsufficientDataError("need >= 2 days of intraday data");
  }
  std::vector<DailyObservation> out;
  out.reserve(days.size());
  for (std::size_t i = 0; i < days.size(); ++i) {
    const IntradayDay& day = days[i];
    day.validate();
    if (i > 0 && day.day_index != days[i - 1].day_index + 1) {
      throw OrderingError("day indices not contiguous at day " +
                          std::to_string(day.day_index));
    }
    const double close_prev =
        (i == 0) ? day.close_prev : days[i - 1].close();
    DailyObservation obs;
    obs.day_index = day.day_index;
    obs.y = day.close() - close_prev;
    const double gap = day.open() - close_prev;
    obs.ov = gap * gap;
    try {
      obs.rv = realized_variance(day);
      for (double tau : taus) {
        obs.rq[tau] = realized_quantile(day, RealizedQuantileSpec{tau, 0.5});
      }
    } catch (const std::runtime_error& e) {
      throw NumericError("day " + std::to_string(day.day_index) + ": " +
                         e.what());
    }
    out.push_back(std::move(obs));
  }
  return out;
}

void write_daily_csv(const std::string& path,
                     std::span<const DailyObservation> obs) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write daily CSV: " + path);
  out << "day,y,rv,ov";
  if (!obs.empty()) {
    for (const auto& [tau, q] : obs.front().rq) {
      out << ",rq_" << format_tau(tau);
    }
  }
  out << "\n";
  for (const auto& o : obs) {
    out << o.day_index << ',' << format_double(o.y) << ','
        << format_double(o.rv) << ',' << format_double(o.ov);
    for (const auto& [tau, q] : o.rq) out << ',' << format_double(q);
    out << "\n";
  }
  if (!out) throw IoError("write failed: " + path);
}

std::vector<DailyObservation> load_daily_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open daily CSV: " + path);
  std::string line;
  long line_no = 0;
  std::vector<double> taus;
  bool header_seen = false;
  std::vector<DailyObservation> out;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (line.empty() || line[0] == '#') continue;
    const auto fields = split_csv(line);
    if (!header_seen) {
      if (fields.size() < 4 || fields[0] != "day" || fields[1] != "y" ||
          fields[2] != "rv" || fields[3] != "ov") {
        throw ParseError("line " + std::to_string(line_no) +
                         ": expected header 'day,y,rv,ov[,rq_*]'");
      }
      for (std::size_t j = 4; j < fields.size(); ++j) {
        const auto name = fields[j];
        if (name.substr(0, 3) != "rq_") {
          throw ParseError("line " + std::to_string(line_no) +
                           ": unexpected column '" + std::string(name) + "'");
        }
        taus.push_back(parse_double(name.substr(3), line_no));
      }
      header_seen = true;
      continue;
    }
    if (fields.size() != 4 + taus.size()) {
      throw ParseError("line " + std::to_string(line_no) +
                       ": wrong number of fields");
    }
    DailyObservation o;
    o.day_index = static_cast<int>(parse_long(fields[0], line_no));
    o.y = parse_double(fields[1], line_no);
    o.rv = parse_double(fields[2], line_no);
    o.ov = parse_double(fields[3], line_no);
    for (std::size_t j = 0; j < taus.size(); ++j) {
      o.rq[taus[j]] = parse_double(fields[4 + j], line_no);
    }
    out.push_back(std::move(o));
  }
  if (!header_seen) throw ParseError("daily CSV missing header");
  if (out.empty()) throw InsufficientDataError("daily CSV has no rows");
  return out;
}

}  // namespace rgqr
