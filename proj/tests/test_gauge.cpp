#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "errors.hpp"
#include "gauge.hpp"
#include "rates.hpp"

using namespace bdlie;

namespace {

using GK = boost::math::quadrature::gauss_kronrod<double, 61>;

// Rebuilds the nested integrals with adaptive quadrature. rho comes from the
// rate families' exact integrals (checked against quadrature in the rates
// tests); the ODE pass touches neither path, it only ever calls eval().
struct QuadOracle {
  const ProcessSpec& s;

  double W(double u) const {
    if (u == 0.0) return 1.0;
    const double V = GK::integrate(
        [&](double x) { return std::exp(s.rho(x)) * s.mu.eval(x); }, 0.0, u, 10, 1e-13);
    return std::exp(-s.rho(u)) * (1.0 + V);
  }
  GaugeState at(double t) const {
    const double I1 =
        GK::integrate([&](double x) { return s.mu.eval(x) / W(x); }, 0.0, t, 6, 1e-11);
    const double I3 = GK::integrate(
        [&](double x) { return std::exp(-s.rho(x)) * s.mu.eval(x) / (W(x) * W(x)); }, 0.0, t,
        6, 1e-11);
    GaugeState g;
    g.t = t;
    g.rho = s.rho(t);
    g.W = W(t);
    g.g1 = s.beta * (g.rho - I1);
    g.g2 = 1.0 - 1.0 / g.W;
    g.g3 = std::exp(g.rho) * g.W * g.W * I3;
    g.g4 = -g.rho - 2.0 * std::log(g.W);
    return g;
  }
};

ProcessSpec make_const(double lam, double mu, double beta) {
  return {RateFamily::constant(lam), RateFamily::constant(mu), beta};
}

// worst componentwise difference, relative once a component outgrows 1
double max_component_diff(const GaugeState& a, const GaugeState& b) {
  auto rel = [](double x, double y) { return std::abs(x - y) / std::max(1.0, std::abs(y)); };
  double worst = rel(a.rho, b.rho);
  worst = std::max(worst, rel(a.W, b.W));
  worst = std::max(worst, rel(a.g1, b.g1));
  worst = std::max(worst, rel(a.g2, b.g2));
  worst = std::max(worst, rel(a.g3, b.g3));
  worst = std::max(worst, rel(a.g4, b.g4));
  return worst;
}

} // namespace

TEST_CASE("t = 0 is the exact identity") {
  const auto s = make_const(1.0, 2.0, 0.5);
  const auto table = compute_gauge(s, std::vector<double>{0.0, 0.5});
  REQUIRE(table.size() == 2);
  CHECK(table[0].rho == 0.0);
  CHECK(table[0].W == 1.0);
  CHECK(table[0].g1 == 0.0);
  CHECK(table[0].g2 == 0.0);
  CHECK(table[0].g3 == 0.0);
  CHECK(table[0].g4 == 0.0);

  const auto cf = constant_rate_gauge(s, 0.0);
  CHECK(cf.W == 1.0);
  CHECK(cf.g2 == 0.0);
}

TEST_CASE("constant closed forms against elementary expressions") {
  SUBCASE("pure birth") {
    const auto s = make_const(1.0, 0.0, 0.0);
    const double t = 1.3;
    const auto g = constant_rate_gauge(s, t);
    CHECK(g.rho == doctest::Approx(-t).epsilon(1e-15));
    CHECK(g.W == doctest::Approx(std::exp(t)).epsilon(1e-14));
    CHECK(g.g1 == 0.0);
    CHECK(g.g2 == doctest::Approx(-std::expm1(-t)).epsilon(1e-14));
    CHECK(g.g3 == 0.0);
    CHECK(g.g4 == doctest::Approx(-t).epsilon(1e-14));
  }
  SUBCASE("pure death") {
    const auto s = make_const(0.0, 2.0, 0.0);
    const double t = 0.9;
    const auto g = constant_rate_gauge(s, t);
    CHECK(g.W == 1.0);
    CHECK(g.g1 == 0.0);
    CHECK(g.g2 == 0.0);
    CHECK(g.g3 == doctest::Approx(std::expm1(2.0 * t)).epsilon(1e-14));
    CHECK(g.g4 == doctest::Approx(-2.0 * t).epsilon(1e-14));
  }
  SUBCASE("equal rates (the degenerate limit)") {
    const auto s = make_const(1.5, 1.5, 0.4);
    const double t = 2.0;
    const auto g = constant_rate_gauge(s, t);
    CHECK(g.rho == 0.0);
    CHECK(g.W == doctest::Approx(1.0 + 1.5 * t).epsilon(1e-15));
    CHECK(g.g1 == doctest::Approx(-0.4 * std::log1p(1.5 * t)).epsilon(1e-14));
    CHECK(g.g2 == doctest::Approx(1.5 * t / (1.0 + 1.5 * t)).epsilon(1e-14));
    CHECK(g.g3 == doctest::Approx(1.5 * (1.0 + 1.5 * t) * t).epsilon(1e-14));
    CHECK(g.g4 == doctest::Approx(-2.0 * std::log1p(1.5 * t)).epsilon(1e-14));
  }
  SUBCASE("net-death case, all six components") {
    const auto s = make_const(1.0, 2.0, 0.7);
    const double t = 0.8;
    const double E = std::exp(-t); // delta = mu - lambda = 1, rho = t
    const auto g = constant_rate_gauge(s, t);
    CHECK(g.rho == doctest::Approx(t).epsilon(1e-15));
    CHECK(g.W == doctest::Approx(2.0 - E).epsilon(1e-15));
    CHECK(g.g1 == doctest::Approx(-0.7 * std::log(2.0 - E)).epsilon(1e-14));
    CHECK(g.g2 == doctest::Approx((1.0 - E) / (2.0 - E)).epsilon(1e-14));
    CHECK(g.g3 == doctest::Approx(2.0 * std::exp(t) * (2.0 - E) * (1.0 - E)).epsilon(1e-14));
    CHECK(g.g4 == doctest::Approx(-t - 2.0 * std::log(2.0 - E)).epsilon(1e-14));
  }
}

TEST_CASE("ODE pass reproduces the constant closed forms") {
  const std::vector<double> grid{0.25, 0.5, 1.0, 2.0};
  for (const auto& s : {make_const(1.0, 2.0, 0.5), make_const(2.0, 1.0, 1.0),
                        make_const(1.0, 1.0, 0.0), make_const(0.0, 1.5, 2.0)}) {
    const auto table = compute_gauge(s, grid);
    for (const auto& g : table) {
      const auto cf = constant_rate_gauge(s, g.t);
      CHECK(max_component_diff(g, cf) < 1e-9);
    }
  }
}

TEST_CASE("gauge identities hold along time-varying runs") {
  const ProcessSpec specs[] = {
      {RateFamily::sinusoidal(1.0, 0.5, 2.0, 0.0), RateFamily::constant(1.0), 0.5},
      {RateFamily::exponential(1.0, -0.5), RateFamily::constant(2.0), 1.0},
      {RateFamily::constant(0.8), RateFamily::sinusoidal(1.2, 0.9, 3.0, 1.0), 0.0},
  };
  const std::vector<double> grid{0.3, 0.9, 1.7};
  for (const auto& s : specs) {
    for (const auto& g : compute_gauge(s, grid)) {
      // g1 = -beta ln W is an exact consequence of the auxiliary system
      CHECK(std::abs(g.g1 + s.beta * std::log(g.W)) < 1e-9);
      CHECK(g.g2 >= 0.0);
      CHECK(g.g2 < 1.0);
      CHECK(g.g3 >= 0.0);
      CHECK(g.W > 0.0);
      const auto res = riccati_residual(s, g, gauge_derivatives(s, g));
      for (double v : res) CHECK(std::abs(v) < 1e-9);
    }
  }
}

TEST_CASE("riccati residual is tiny on the closed forms too") {
  for (const auto& s : {make_const(1.0, 2.0, 0.5), make_const(2.0, 0.5, 1.5)}) {
    for (double t : {0.2, 1.0, 3.0}) {
      const auto g = constant_rate_gauge(s, t);
      const auto res = riccati_residual(s, g, gauge_derivatives(s, g));
      for (double v : res) CHECK(std::abs(v) < 1e-12);
    }
  }
}

TEST_CASE("nested quadrature oracle confirms the ODE pass") {
  const ProcessSpec specs[] = {
      {RateFamily::exponential(1.0, -0.5), RateFamily::constant(1.0), 0.8},
      {RateFamily::constant(0.7), RateFamily::sinusoidal(1.0, 0.5, 2.0, 0.0), 0.4},
  };
  for (const auto& s : specs) {
    const std::vector<double> grid{0.6, 1.2};
    const auto table = compute_gauge(s, grid);
    const QuadOracle q{s};
    for (const auto& g : table) {
      const auto ref = q.at(g.t);
      CHECK(max_component_diff(g, ref) < 5e-9);
    }
  }
}

TEST_CASE("overflow guard trips on both evaluation paths") {
  const auto s = make_const(0.0, 400.0, 0.0); // rho = 400 t
  try {
    constant_rate_gauge(s, 2.0);
    FAIL("expected OverflowError");
  } catch (const OverflowError& e) {
    CHECK(e.where() == 2.0);
  }
  try {
    compute_gauge(s, std::vector<double>{2.0});
    FAIL("expected OverflowError");
  } catch (const OverflowError& e) {
    CHECK(e.where() > 1.5); // trips when |rho| crosses 700, i.e. t ~ 1.75
    CHECK(e.where() < 2.0);
  }
}

TEST_CASE("input validation") {
  const auto s = make_const(1.0, 2.0, 0.5);
  CHECK_THROWS_AS(compute_gauge(s, std::vector<double>{}), std::invalid_argument);
  CHECK_THROWS_AS(compute_gauge(s, std::vector<double>{0.5, 0.5}), std::invalid_argument);
  CHECK_THROWS_AS(compute_gauge(s, std::vector<double>{-1.0}), std::invalid_argument);

  const ProcessSpec bad{RateFamily::constant(1.0), RateFamily::constant(1.0), -2.0};
  CHECK_THROWS_AS(compute_gauge(bad, std::vector<double>{1.0}), std::invalid_argument);

  const ProcessSpec tab{RateFamily::tabulated({0.0, 1.0}, {1.0, 1.0}), RateFamily::constant(1.0),
                        0.0};
  CHECK_THROWS_AS(compute_gauge(tab, std::vector<double>{1.5}), std::domain_error);
  CHECK_NOTHROW(compute_gauge(tab, std::vector<double>{1.0}));

  const ProcessSpec vary{RateFamily::exponential(1.0, 0.1), RateFamily::constant(1.0), 0.0};
  CHECK_THROWS_AS(constant_rate_gauge(vary, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(constant_rate_gauge(s, -1.0), std::domain_error);
}

TEST_CASE("gauge_at dispatches by spec shape") {
  const auto s = make_const(1.0, 2.0, 0.5);
  const auto a = gauge_at(s, 0.7);
  const auto b = constant_rate_gauge(s, 0.7);
  CHECK(a.W == b.W);
  CHECK(a.g3 == b.g3); // same closed-form path, bitwise

  const ProcessSpec vary{RateFamily::sinusoidal(1.0, 0.5, 2.0, 0.0), RateFamily::constant(1.0),
                         0.5};
  const auto z = gauge_at(vary, 0.0);
  CHECK(z.W == 1.0);
  CHECK(z.g4 == 0.0);
}

TEST_CASE("error estimates accompany the ODE pass") {
  const ProcessSpec vary{RateFamily::sinusoidal(1.0, 0.5, 2.0, 0.0), RateFamily::constant(1.0),
                         0.5};
  const auto g = gauge_at(vary, 1.0);
  CHECK(g.est_error.W > 0.0);
  CHECK(g.est_error.g2 > 0.0);
  CHECK(g.est_error.g2 < 1e-8);

  const auto cf = constant_rate_gauge(make_const(1.0, 2.0, 0.5), 1.0);
  CHECK(cf.est_error.W == 0.0); // closed form: nothing accumulated
}
