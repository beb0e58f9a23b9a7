#include <cmath>

#include "ddfc/metrics.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace ddfc;

TEST_SUITE_BEGIN("metrics");

TEST_CASE("rmse basics") {
  CHECK(rmse(Vector::Zero(50)) == 0.0);
  CHECK(rmse(Vector::Constant(50, 0.01)) == doctest::Approx(0.01));
  CHECK_THROWS_AS(rmse(Vector::Zero(10), 5, 5), Error);
  CHECK_THROWS_AS(rmse(Vector::Zero(10), 0, 11), Error);
}

TEST_CASE("rmse scales with the series") {
  const auto s = oracles::random_signal(3, 100, 1);
  const Vector v = s.samples().col(0);
  const double base = rmse(v);
  CHECK(rmse(Vector(2.5 * v)) == doctest::Approx(2.5 * base));
  CHECK(rmse(Vector(-v)) == doctest::Approx(base));
}

TEST_CASE("metric functions are pure: repeated evaluation is identical") {
  const auto s = oracles::random_signal(9, 200, 1);
  const Vector v = s.samples().col(0);
  const Vector t = Vector::LinSpaced(200, 0.0, 19.9);
  const auto a = nadir_and_settling(v, t, 5.0, 0.5);
  const auto b = nadir_and_settling(v, t, 5.0, 0.5);
  CHECK(a.nadir == b.nadir);
  CHECK(a.settling_time == b.settling_time);
  CHECK(rmse(v) == rmse(v));
}

TEST_CASE("flat series: zero nadir, immediate settling") {
  const Vector v = Vector::Zero(100);
  const Vector t = Vector::LinSpaced(100, 0.0, 9.9);
  const auto r = nadir_and_settling(v, t, 2.0, 0.036);
  CHECK(r.nadir == 0.0);
  CHECK(r.settled);
  CHECK(r.settling_time == doctest::Approx(2.0));
}

TEST_CASE("damped oscillation settles where the envelope crosses the band") {
  // y(t) = -A exp(-alpha (t - t0)) |cos(w (t - t0))| style envelope; use a
  // fine scan of the analytic signal as the reference
  const double t0 = 2.0, alpha = 0.35, w = 2.0, A = 0.5, band = 0.036;
  const double dt = 0.1;
  const int n = 400;
  Vector v(n), t(n);
  auto signal = [&](double time) {
    if (time < t0) return 0.0;
    return -A * std::exp(-alpha * (time - t0)) * std::cos(w * (time - t0));
  };
  for (int k = 0; k < n; ++k) {
    t(k) = k * dt;
    v(k) = signal(t(k));
  }
  const auto r = nadir_and_settling(v, t, t0, band);

  // reference: last time |signal| exceeds the band on a fine grid
  double last_outside = t0;
  for (double time = t0; time < n * dt; time += dt / 100.0)
    if (std::abs(signal(time)) > band) last_outside = time;

  CHECK(r.nadir == doctest::Approx(-A).epsilon(0.01));
  CHECK(r.settled);
  CHECK(std::abs(r.settling_time - last_outside) <= dt + 1e-12);
}

TEST_CASE("a series that never re-enters the band reports the sentinel") {
  Vector v = Vector::Constant(50, 0.2);
  const Vector t = Vector::LinSpaced(50, 0.0, 4.9);
  const auto r = nadir_and_settling(v, t, 1.0, 0.036);
  CHECK_FALSE(r.settled);
  CHECK(std::isinf(r.settling_time));
}

TEST_CASE("report formatting carries controllers and columns") {
  MetricsReport report;
  ControllerMetrics a;
  a.controller = "odde";
  a.rmse_hz = {0.001, 0.002, 0.003};
  a.total_rmse_hz = 0.006;
  a.contingent.nadir = -0.04;
  a.contingent.settling_time = 3.2;
  a.contingent.settled = true;
  report.rows.push_back(a);
  ControllerMetrics b = a;
  b.controller = "droop";
  b.contingent.settled = false;
  report.rows.push_back(b);

  const auto table = to_table(report);
  CHECK(table.find("odde") != std::string::npos);
  CHECK(table.find("droop") != std::string::npos);
  CHECK(table.find("G3") != std::string::npos);
  CHECK(table.find("never") != std::string::npos);
}

TEST_SUITE_END();
