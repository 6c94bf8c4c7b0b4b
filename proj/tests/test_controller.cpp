#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "bittide/controller.hpp"
#include "bittide/error.hpp"

using namespace bittide;

TEST_CASE("relative correction") {
  ControllerParams p;
  p.beta_off = 16;
  const std::vector<std::int64_t> centered = {16};
  CHECK(relative_correction(centered, p) == 0.0);

  p.kp = 0.25;
  p.gain_scale = 1.0;
  const std::vector<std::int64_t> one = {18};
  CHECK(relative_correction(one, p) == 0.5);

  p.gain_scale = 1e-3;
  const std::vector<std::int64_t> seven(7, 17);
  double oracle = 0.0;
  for (auto b : seven) oracle += p.gain_scale * p.kp * static_cast<double>(b - 16);
  CHECK(relative_correction(seven, p) == doctest::Approx(oracle).epsilon(1e-15));
  CHECK(oracle == doctest::Approx(1.75e-3).epsilon(1e-15));
}

TEST_CASE("decide") {
  ControllerState s;
  CHECK(decide(0.5, s) == +1);
  CHECK(decide(-0.2, s) == -1);
  s.c_est_ppm = 0.37;
  CHECK(decide(0.37, s) == 0);
}

TEST_CASE("commit") {
  CHECK(commit({}, +1, 0.01).c_est_ppm == 0.01);
  ControllerState s = commit({}, +1, 0.01);
  CHECK(commit(s, 0, 0.01).c_est_ppm == 0.01);
  CHECK(commit(s, 0, 0.01).net_steps == 1);
}

TEST_CASE("c_est replays the pulse count") {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> dir(-1, 1);
  for (double step : {0.01, 0.1}) {
    ControllerState s;
    std::int64_t fincs = 0, fdecs = 0;
    for (int k = 0; k < 100000; ++k) {
      const int d = dir(rng);
      fincs += d > 0;
      fdecs += d < 0;
      s = commit(s, d, step);
    }
    CHECK(s.net_steps == fincs - fdecs);
    CHECK(s.c_est_ppm == step * static_cast<double>(fincs - fdecs));
  }
}

TEST_CASE("quantized tracking of a constant demand") {
  for (double step : {0.01, 0.1}) {
    for (double c_rel : {0.0, 0.004, 0.5, -0.73, 3.333, -7.9}) {
      CAPTURE(step);
      CAPTURE(c_rel);
      const auto reach = static_cast<std::size_t>(std::ceil(std::abs(c_rel) / step));
      ControllerState s;
      double lo = INFINITY, hi = -INFINITY;
      for (std::size_t k = 1; k <= reach + 500; ++k) {
        s = commit(s, decide(c_rel, s), step);
        if (k == reach) CHECK(std::abs(s.c_est_ppm - c_rel) <= step * (1 + 1e-9));
        if (k >= reach) {
          CHECK(std::abs(s.c_est_ppm - c_rel) <= step * (1 + 1e-9));
          lo = std::min(lo, s.c_est_ppm);
          hi = std::max(hi, s.c_est_ppm);
        }
      }
      CHECK(hi - lo <= step * (1 + 1e-9));
    }
  }
}

TEST_CASE("parameter checks") {
  ControllerParams p;
  CHECK_NOTHROW(p.check());
  p.period_ticks = 0;
  CHECK_THROWS_AS(p.check(), ConfigError);
  p = {};
  p.delay_ticks = -1;
  CHECK_THROWS_AS(p.check(), ConfigError);
  p = {};
  p.kp = 0.0;
  CHECK_THROWS_AS(p.check(), ConfigError);
}
