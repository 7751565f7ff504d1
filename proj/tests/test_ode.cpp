#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "errors.hpp"
#include "ode.hpp"

using namespace bdlie;

namespace {

struct Sample {
  double t;
  std::vector<double> y;
  OdeStats stats;
};

template <class Rhs>
std::vector<Sample> drive(Rhs&& f, std::vector<double> y0, std::vector<double> outputs,
                          std::vector<double> mesh = {}, OdeOptions opt = {}) {
  std::vector<Sample> out;
  integrate_grid(f, std::move(y0), 0.0, outputs, mesh, opt,
                 [&](double t, const std::vector<double>& y, const OdeStats& st) {
                   out.push_back({t, y, st});
                 });
  return out;
}

} // namespace

TEST_CASE("exponential decay hits the analytic solution") {
  auto rhs = [](double, const std::vector<double>& y, std::vector<double>& dy) {
    dy[0] = -y[0];
  };
  const auto s = drive(rhs, {1.0}, {0.5, 1.0, 2.0});
  REQUIRE(s.size() == 3);
  for (const auto& p : s) CHECK(p.y[0] == doctest::Approx(std::exp(-p.t)).epsilon(1e-9));
  CHECK(s.back().stats.n_accepted > 0);
  CHECK(s.back().stats.acc_error[0] > 0.0);
  CHECK(s.back().stats.acc_error[0] < 1e-7); // summed local estimates stay near rtol
}

TEST_CASE("harmonic oscillator closes its orbit") {
  auto rhs = [](double, const std::vector<double>& y, std::vector<double>& dy) {
    dy[0] = y[1];
    dy[1] = -y[0];
  };
  const double tau = 2.0 * std::numbers::pi;
  const auto s = drive(rhs, {1.0, 0.0}, {tau / 4.0, tau / 2.0, tau});
  REQUIRE(s.size() == 3);
  CHECK(s[0].y[0] == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(s[0].y[1] == doctest::Approx(-1.0).epsilon(1e-9));
  CHECK(s[2].y[0] == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(s[2].y[1] == doctest::Approx(0.0).epsilon(1e-8));
  for (const auto& p : s) {
    const double energy = p.y[0] * p.y[0] + p.y[1] * p.y[1];
    CHECK(energy == doctest::Approx(1.0).epsilon(1e-8));
  }
}

TEST_CASE("outputs at or before the start observe the initial state") {
  auto rhs = [](double, const std::vector<double>& y, std::vector<double>& dy) {
    dy[0] = y[0];
  };
  SUBCASE("leading t = 0 entry") {
    const auto s = drive(rhs, {3.0}, {0.0, 0.4});
    REQUIRE(s.size() == 2);
    CHECK(s[0].t == 0.0);
    CHECK(s[0].y[0] == 3.0); // untouched, no step taken yet
    CHECK(s[1].y[0] == doctest::Approx(3.0 * std::exp(0.4)).epsilon(1e-9));
  }
  SUBCASE("all outputs at the start: no integration at all") {
    const auto s = drive(rhs, {3.0}, {0.0});
    REQUIRE(s.size() == 1);
    CHECK(s[0].stats.n_accepted == 0);
  }
}

TEST_CASE("mesh points land exactly on integrand kinks") {
  // dy = a(t) with a step at t = 1; landing on the kink keeps every stage of
  // every step inside one smooth piece, so the quadrature is exact.
  auto rhs = [](double t, const std::vector<double>&, std::vector<double>& dy) {
    dy[0] = t < 1.0 ? 2.0 : 0.5;
  };
  const auto s = drive(rhs, {0.0}, {2.0}, {1.0});
  REQUIRE(s.size() == 1);
  CHECK(s[0].y[0] == doctest::Approx(2.5).epsilon(1e-12));
  CHECK(s[0].stats.n_rejected == 0);
}

TEST_CASE("step budget exhaustion raises IntegrationError") {
  auto rhs = [](double, const std::vector<double>& y, std::vector<double>& dy) {
    dy[0] = y[1];
    dy[1] = -y[0];
  };
  OdeOptions opt;
  opt.max_steps = 10;
  CHECK_THROWS_AS(drive(rhs, {1.0, 0.0}, {200.0}, {}, opt), IntegrationError);
}

TEST_CASE("finite-time blowup underflows the step and reports where") {
  auto rhs = [](double, const std::vector<double>& y, std::vector<double>& dy) {
    dy[0] = y[0] * y[0]; // y = 1/(1-t), pole at t = 1
  };
  try {
    drive(rhs, {1.0}, {2.0});
    FAIL("expected IntegrationError");
  } catch (const IntegrationError& e) {
    CHECK(e.where() > 0.9);
    CHECK(e.where() <= 1.05);
  }
}

TEST_CASE("guard aborts after the accepted step that trips it") {
  auto rhs = [](double, const std::vector<double>& y, std::vector<double>& dy) {
    dy[0] = y[0];
  };
  std::vector<double> outputs{5.0};
  try {
    integrate_grid(rhs, std::vector<double>{1.0}, 0.0, outputs, {}, OdeOptions{},
                   [](double, const std::vector<double>&, const OdeStats&) {},
                   [](double t, const std::vector<double>& y) {
                     if (y[0] > 10.0) throw OverflowError("guard tripped", t);
                   });
    FAIL("expected OverflowError");
  } catch (const OverflowError& e) {
    CHECK(e.where() > std::log(10.0) - 0.05); // can only trip at or past y = 10
    CHECK(e.where() < 3.0);
  }
}

TEST_CASE("tolerances steer the achieved accuracy") {
  auto rhs = [](double t, const std::vector<double>&, std::vector<double>& dy) {
    dy[0] = std::cos(5.0 * t);
  };
  const double want = std::sin(5.0 * 3.0) / 5.0;
  OdeOptions loose;
  loose.rtol = 1e-5;
  loose.atol = 1e-7;
  OdeOptions tight;
  tight.rtol = 1e-12;
  tight.atol = 1e-14;
  const double e_loose = std::abs(drive(rhs, {0.0}, {3.0}, {}, loose)[0].y[0] - want);
  const double e_tight = std::abs(drive(rhs, {0.0}, {3.0}, {}, tight)[0].y[0] - want);
  CHECK(e_tight < e_loose);
  CHECK(e_tight < 1e-11);
}

TEST_CASE("stats accumulate per component") {
  auto rhs = [](double, const std::vector<double>& y, std::vector<double>& dy) {
    dy[0] = -y[0];
    dy[1] = 0.0; // exactly integrated: zero local error
  };
  const auto s = drive(rhs, {1.0, 4.0}, {1.0});
  REQUIRE(s.size() == 1);
  CHECK(s[0].y[1] == 4.0);
  CHECK(s[0].stats.acc_error[1] == 0.0);
  CHECK(s[0].stats.acc_error[0] > 0.0);
}
