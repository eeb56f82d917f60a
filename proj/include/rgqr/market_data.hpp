#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "rgqr/errors.hpp"

namespace rgqr {

// Fraction of a day covered by the open-to-close session.
struct SessionCalendar {
  double lambda = 6.5 / 24.0;

  void validate() const {
    if (!(lambda > 0.0 && lambda < 1.0)) {
      throw DomainError("SessionCalendar: lambda must lie in (0,1)");
    }
  }
};

// One trading day's log-price ticks over the session, open to close,
// plus the previous session's closing log price for the overnight gap.
struct IntradayDay {
  int day_index = 0;
  std::vector<double> log_prices;  // m+1 ticks
  double close_prev = 0.0;
  bool close_prev_synthetic = false;  // backfilled from the own open

  int increments() const { return static_cast<int>(log_prices.size()) - 1; }
  double open() const { return log_prices.front(); }
  double close() const { return log_prices.back(); }

  void validate() const;
};

// Per-day derived record: close-to-close return, realized variance,
// squared overnight return, and scaled realized quantiles per level.
struct DailyObservation {
  int day_index = 0;
  double y = 0.0;
  double rv = 0.0;
  double ov = 0.0;
  std::map<double, double> rq;

  void validate() const;
};

double rq_at(const DailyObservation& obs, double tau);

// CSV format: header "day,tick,logprice", optional comment line
// "# close_prev=<float>" before the header, rows sorted by (day, tick).
std::vector<IntradayDay> load_intraday_csv(const std::string& path,
                                           const SessionCalendar& calendar);
void write_intraday_csv(const std::string& path,
                        std::span<const IntradayDay> days);

std::vector<DailyObservation> build_daily_observations(
    std::span<const IntradayDay> days, const std::vector<double>& taus);

// Daily CSV: header "day,y,rv,ov,rq_<tau>..." with tau rendered with two
// decimals; values written shortest-round-trip so reload is bit exact.
void write_daily_csv(const std::string& path,
                     std::span<const DailyObservation> obs);
std::vector<DailyObservation> load_daily_csv(const std::string& path);

}  // namespace rgqr
