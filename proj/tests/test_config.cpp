#include <doctest.h>

#include <cmath>

#include "dopplertrack/config.hpp"

using namespace dopplertrack;

TEST_CASE("presets expand to their grids") {
  CHECK(parse_config("", "eva").scenarios.size() == 1);
  CHECK(parse_config("", "paper-fig1").scenarios.size() == 2 * 3 * 7 * 2);
  const auto fig2 = parse_config("", "paper-fig2");
  CHECK(fig2.scenarios.size() == 6);
  CHECK(fig2.scenarios.front().symbol_count() == 2083);
  for (const auto& name : preset_names()) CHECK_NOTHROW(parse_config("", name));
  CHECK_THROWS_AS(parse_config("", "fig3"), ConfigError);
}

TEST_CASE("scenarios are sorted by profile, fd, snr, duration") {
  const auto rc = parse_config(R"({"profiles": ["etu", "eva"], "fd_hz": [600, 200],
                                   "snr_db": [15, 5], "duration_ms": 20})");
  REQUIRE(rc.scenarios.size() == 8);
  CHECK(rc.scenarios[0].id == "etu_fd200_snr5_dur20");
  CHECK(rc.scenarios[1].id == "etu_fd200_snr15_dur20");
  CHECK(rc.scenarios[7].id == "eva_fd600_snr15_dur20");
}

TEST_CASE("40 ms is 416 symbols") {
  const auto rc = parse_config(R"({"duration_ms": 40})");
  CHECK(rc.scenarios[0].symbol_count() == 416);
}

TEST_CASE("nested sections") {
  const auto rc = parse_config(R"({
    "profile": {"name": "two", "delays_ns": [0, 500], "powers_db": [0, -3]},
    "snr_db": "inf",
    "geometry": {"tones": 512, "cp_length": 64, "pilots": 64, "bandwidth_hz": 6e6},
    "tracker": {"alpha": 0.99, "lag": 2, "max_rank": 8, "noise_offset": "tracked",
                "newton": {"tolerance": 1e-6, "max_iters": 6}},
    "channel": {"oscillators": 32, "avg_samples": 16},
    "trials": 3, "master_seed": 9})");
  const auto& s = rc.scenarios.at(0);
  CHECK(s.profile.name == "two");
  CHECK(std::isinf(s.snr_db));
  CHECK(s.geometry().tones == 512);
  CHECK(s.geometry().sample_period_s == doctest::Approx(1.0 / 6e6));
  CHECK(s.tracker.lag == 2);
  CHECK(s.tracker.noise_offset == NoiseOffset::tracked);
  CHECK(s.tracker.newton.max_iters == 6);
  CHECK(s.oscillators == 32);
  CHECK(s.trials == 3);
  CHECK(s.master_seed == 9);
  CHECK(s.id == "two_fd400_snrinf_dur40");
}

TEST_CASE("user document overrides the preset") {
  const auto rc = parse_config(R"({"trials": 2, "fd_hz": [100]})", "etu");
  CHECK(rc.scenarios.size() == 1);
  CHECK(rc.scenarios[0].trials == 2);
  CHECK(rc.scenarios[0].fd_hz == 100.0);
  CHECK(rc.scenarios[0].profile.name == "etu");
}

TEST_CASE("invalid documents") {
  CHECK_THROWS_AS(parse_config(R"({"fd": 3})"), ConfigError);
  CHECK_THROWS_AS(parse_config("{not json"), ConfigError);
  CHECK_THROWS_AS(parse_config("[1, 2]"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"duration_ms": 0})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"trials": 0})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"fd_hz": [100, 100]})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"tracker": {"lag": 7}})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"snr_db": "loud"})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"geometry": {"pilots": 100}})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"profile": "tdl"})"), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/cfg.json", std::nullopt), ConfigError);
  CHECK_THROWS_AS(load_config(std::nullopt, std::nullopt), ConfigError);
}

TEST_CASE("seed override") {
  const auto rc = load_config(std::nullopt, "paper-fig2", 1234);
  for (const auto& s : rc.scenarios) CHECK(s.master_seed == 1234);
}

TEST_CASE("validity-region warning") {
  CHECK(parse_config(R"({"fd_hz": 600})").scenarios[0].warnings().empty());
  CHECK(parse_config(R"({"fd_hz": 1100})").scenarios[0].warnings().size() == 1);
}

TEST_CASE("number formatting") {
  CHECK(format_number(400.0) == "400");
  CHECK(format_number(0.1) == "0.1");
  CHECK(format_number(INFINITY) == "inf");
  CHECK(format_number(-INFINITY) == "-inf");
  CHECK(format_number(NAN) == "nan");
}
