#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "rgqr/market_data.hpp"
#include "rgqr/rng.hpp"
#include "rgqr/simulator.hpp"

using namespace rgqr;

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  f << content;
}

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(f),
                     std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("loads a two-day panel with chained previous closes") {
  const std::string path = temp_path("rgqr_t_load.csv");
  write_file(path,
             "day,tick,logprice\n"
             "1,0,4.60\n1,1,4.61\n1,2,4.62\n"
             "2,0,4.63\n2,1,4.62\n2,2,4.59\n");
  SessionCalendar cal;
  const auto days = load_intraday_csv(path, cal);
  REQUIRE(days.size() == 2);
  CHECK(days[0].increments() == 2);
  CHECK(days[1].increments() == 2);
  CHECK(days[0].close_prev == 4.60);
  CHECK(days[0].close_prev_synthetic);
  CHECK(days[1].close_prev == 4.62);
  CHECK_FALSE(days[1].close_prev_synthetic);
  std::remove(path.c_str());
}

TEST_CASE("close_prev header row feeds the first overnight gap") {
  const std::string path = temp_path("rgqr_t_cp.csv");
  write_file(path,
             "# close_prev=4.58\n"
             "day,tick,logprice\n"
             "1,0,4.60\n1,1,4.61\n"
             "2,0,4.62\n2,1,4.63\n");
  const auto days = load_intraday_csv(path, SessionCalendar{});
  CHECK(days[0].close_prev == 4.58);
  CHECK_FALSE(days[0].close_prev_synthetic);
  const auto obs = build_daily_observations(days, {});
  CHECK(obs[0].ov == doctest::Approx((4.60 - 4.58) * (4.60 - 4.58)));
  std::remove(path.c_str());
}

TEST_CASE("day gaps, bad ticks and short days are rejected") {
  const std::string path = temp_path("rgqr_t_bad.csv");

  write_file(path,
             "day,tick,logprice\n1,0,1.0\n1,1,1.1\n3,0,1.2\n3,1,1.3\n");
  CHECK_THROWS_AS(load_intraday_csv(path, SessionCalendar{}), OrderingError);

  write_file(path, "day,tick,logprice\n1,0,1.0\n1,1,1.1\n1,1,1.2\n");
  CHECK_THROWS_AS(load_intraday_csv(path, SessionCalendar{}), OrderingError);

  write_file(path, "day,tick,logprice\n1,0,1.0\n2,0,1.1\n2,1,1.2\n");
  CHECK_THROWS_AS(load_intraday_csv(path, SessionCalendar{}),
                  InsufficientDataError);

  write_file(path, "day,tick,logprice\n1,0,1.0\n1,1,oops\n");
  try {
    load_intraday_csv(path, SessionCalendar{});
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }

  write_file(path, "day,tick\n1,0\n");
  CHECK_THROWS_AS(load_intraday_csv(path, SessionCalendar{}), ParseError);
  std::remove(path.c_str());
}

TEST_CASE("daily observations from hand-computed prices") {
  std::vector<IntradayDay> days(2);
  days[0].day_index = 1;
  days[0].log_prices = {4.60, 4.61, 4.60};
  days[0].close_prev = 4.60;
  days[0].close_prev_synthetic = true;
  days[1].day_index = 2;
  days[1].log_prices = {4.62, 4.60, 4.59};
  days[1].close_prev = 4.60;
  const auto obs = build_daily_observations(days, {0.05});
  REQUIRE(obs.size() == 2);
  // day 1: open == close_prev
  CHECK(obs[0].ov == 0.0);
  // day 2: close_prev 4.60, open 4.62, close 4.59
  CHECK(obs[1].ov == doctest::Approx(4e-4).epsilon(1e-9));
  CHECK(obs[1].y == doctest::Approx(-0.01).epsilon(1e-9));
  CHECK(obs[1].rv > 0.0);
  CHECK(obs[1].rq.count(0.05) == 1);
}

TEST_CASE("constant path gives zero return, variance and overnight gap") {
  std::vector<IntradayDay> days(2);
  for (int i = 0; i < 2; ++i) {
    days[i].day_index = i + 1;
    days[i].log_prices = {4.6, 4.6, 4.6};
    days[i].close_prev = 4.6;
  }
  const auto obs = build_daily_observations(days, {});
  for (const auto& o : obs) {
    CHECK(o.y == 0.0);
    CHECK(o.rv == 0.0);
    CHECK(o.ov == 0.0);
  }
}

TEST_CASE("level shifts of the log price leave observations unchanged") {
  DgpConfig cfg;
  cfg.n = 12;
  cfg.m = 16;
  cfg.burn_in = 5;
  cfg.seed = 99;
  const auto sim = simulate_panel(cfg);
  auto shifted = sim.days;
  for (auto& day : shifted) {
    for (auto& p : day.log_prices) p += 7.5;
    day.close_prev += 7.5;
  }
  const auto a = build_daily_observations(sim.days, {0.05, 0.10});
  const auto b = build_daily_observations(shifted, {0.05, 0.10});
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(b[i].y == doctest::Approx(a[i].y).epsilon(1e-9));
    CHECK(b[i].rv == doctest::Approx(a[i].rv).epsilon(1e-7));
    CHECK(b[i].ov - a[i].ov == doctest::Approx(0.0).scale(1.0).epsilon(1e-9));
    CHECK(b[i].rq.at(0.05) ==
          doctest::Approx(a[i].rq.at(0.05)).scale(1.0).epsilon(1e-9));
  }
}

TEST_CASE("intraday and daily CSV round trips are bit exact") {
  DgpConfig cfg;
  cfg.n = 10;
  cfg.m = 13;
  cfg.burn_in = 3;
  cfg.seed = 31;
  const auto sim = simulate_panel(cfg);
  const std::string ipath = temp_path("rgqr_t_round_intraday.csv");
  write_intraday_csv(ipath, sim.days);
  const auto reloaded = load_intraday_csv(ipath, SessionCalendar{});
  REQUIRE(reloaded.size() == sim.days.size());
  for (std::size_t i = 0; i < reloaded.size(); ++i) {
    CHECK(reloaded[i].day_index == sim.days[i].day_index);
    CHECK(reloaded[i].close_prev == sim.days[i].close_prev);
    REQUIRE(reloaded[i].log_prices.size() == sim.days[i].log_prices.size());
    bool equal = true;
    for (std::size_t k = 0; k < reloaded[i].log_prices.size(); ++k) {
      equal = equal && reloaded[i].log_prices[k] == sim.days[i].log_prices[k];
    }
    CHECK(equal);
  }

  const auto obs = build_daily_observations(sim.days, {0.05, 0.10});
  const auto obs2 = build_daily_observations(reloaded, {0.05, 0.10});
  const std::string dpath = temp_path("rgqr_t_round_daily.csv");
  write_daily_csv(dpath, obs);
  const auto daily = load_daily_csv(dpath);
  REQUIRE(daily.size() == obs.size());
  for (std::size_t i = 0; i < obs.size(); ++i) {
    CHECK(obs2[i].y == obs[i].y);
    CHECK(obs2[i].rv == obs[i].rv);
    CHECK(daily[i].y == obs[i].y);
    CHECK(daily[i].rv == obs[i].rv);
    CHECK(daily[i].ov == obs[i].ov);
    CHECK(daily[i].rq.at(0.05) == obs[i].rq.at(0.05));
    CHECK(daily[i].rq.at(0.10) == obs[i].rq.at(0.10));
  }

  // writing the reloaded daily series again reproduces the same bytes
  const std::string dpath2 = temp_path("rgqr_t_round_daily2.csv");
  write_daily_csv(dpath2, daily);
  CHECK(read_file(dpath) == read_file(dpath2));
  std::remove(ipath.c_str());
  std::remove(dpath.c_str());
  std::remove(dpath2.c_str());
}

TEST_CASE("rq lookup raises a configuration error for missing levels") {
  DailyObservation o;
  o.day_index = 3;
  o.rq[0.05] = -1.0;
  CHECK(rq_at(o, 0.05) == -1.0);
  CHECK_THROWS_AS(rq_at(o, 0.10), ConfigError);
}

TEST_CASE("build_daily_observations needs at least two days") {
  std::vector<IntradayDay> days(1);
  days[0].day_index = 1;
  days[0].log_prices = {1.0, 1.1};
  CHECK_THROWS_AS(build_daily_observations(days, {}), InsufficientDataError);
}
