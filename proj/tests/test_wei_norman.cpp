#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "boson.hpp"
#include "errors.hpp"
#include "gauge.hpp"
#include "wei_norman.hpp"

using namespace bdlie;

namespace {

LieAlgebraSpec process_algebra(double beta) {
  return {product_basis_labels(), structure_constants(product_basis(), beta)};
}

// [e0, e1] = e1: the smallest algebra whose velocity map degenerates.
LieAlgebraSpec affine_algebra() {
  std::vector c(2, std::vector(2, std::vector<double>(2, 0.0)));
  c[0][1][1] = 1.0;
  c[1][0][1] = -1.0;
  return {{"e0", "e1"}, c};
}

} // namespace

TEST_CASE("algebra validation") {
  CHECK_NOTHROW(process_algebra(0.5).validate());
  CHECK_NOTHROW(affine_algebra().validate());

  SUBCASE("broken antisymmetry") {
    auto alg = affine_algebra();
    alg.c[1][0][1] = 1.0;
    CHECK_THROWS_AS(alg.validate(), std::invalid_argument);
  }
  SUBCASE("broken Jacobi identity") {
    auto alg = process_algebra(0.5);
    alg.c[1][3][1] = -2.0;
    alg.c[3][1][1] = 2.0; // keep antisymmetry so Jacobi is what trips
    CHECK_THROWS_AS(alg.validate(), std::invalid_argument);
  }
  SUBCASE("ragged table") {
    auto alg = affine_algebra();
    alg.c[0].pop_back();
    CHECK_THROWS_AS(alg.validate(), std::invalid_argument);
  }
  SUBCASE("label count mismatch") {
    auto alg = affine_algebra();
    alg.labels.push_back("extra");
    CHECK_THROWS_AS(alg.validate(), std::invalid_argument);
  }
}

TEST_CASE("adjoint representations read off the structure constants") {
  const auto alg = process_algebra(0.5);
  const auto ad = adjoint_reps(alg);
  REQUIRE(ad.size() == 4);
  // column j of ad_i holds the coordinates of [H_i, H_j]
  CHECK(ad[1](0, 2) == doctest::Approx(-0.5).epsilon(1e-15));
  CHECK(ad[1](3, 2) == doctest::Approx(-2.0).epsilon(1e-15));
  CHECK(ad[2](2, 3) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(ad[0].norm() == 0.0); // the identity is central
}

TEST_CASE("velocity map is the identity at g = 0") {
  const auto alg = process_algebra(1.0);
  Eigen::VectorXd g = Eigen::VectorXd::Zero(4);
  Eigen::VectorXd a(4);
  a << -1.0, 1.0, 2.0, -3.0;
  double cond = 0.0;
  const auto dg = wn_velocity(alg, g, a, &cond);
  for (int i = 0; i < 4; ++i) CHECK(dg[i] == doctest::Approx(a[i]).epsilon(1e-12));
  CHECK(cond == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("abelian algebra integrates each coefficient independently") {
  std::vector c(2, std::vector(2, std::vector<double>(2, 0.0)));
  const LieAlgebraSpec alg{{"x", "y"}, c};
  const auto out = integrate_wn(
      alg,
      [](double t, std::span<double> a) {
        a[0] = std::cos(t);
        a[1] = 2.0 * t;
      },
      std::vector<double>{0.5, 1.5});
  REQUIRE(out.size() == 2);
  for (const auto& st : out) {
    CHECK(st.g[0] == doctest::Approx(std::sin(st.t)).epsilon(1e-9));
    CHECK(st.g[1] == doctest::Approx(st.t * st.t).epsilon(1e-9));
    CHECK(st.cond == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("engine reproduces the constant-rate closed forms") {
  const ProcessSpec s{RateFamily::constant(1.0), RateFamily::constant(2.0), 0.5};
  const auto alg = process_algebra(s.beta);
  const std::vector<double> grid{0.5, 1.0, 2.0};
  const auto wn = integrate_wn(alg, process_coefficients(s), grid);
  REQUIRE(wn.size() == grid.size());
  for (const auto& st : wn) {
    const auto cf = constant_rate_gauge(s, st.t);
    CHECK(std::abs(st.g[0] - cf.g1) < 1e-8);
    CHECK(std::abs(st.g[1] - cf.g2) < 1e-8);
    CHECK(std::abs(st.g[2] - cf.g3) < 1e-8);
    CHECK(std::abs(st.g[3] - cf.g4) < 1e-8);
  }
}

TEST_CASE("engine agrees with the dedicated gauge pass on a driven system") {
  const ProcessSpec s{RateFamily::sinusoidal(1.0, 0.5, 2.0, 0.0), RateFamily::constant(1.0),
                      1.0};
  const auto alg = process_algebra(s.beta);
  const std::vector<double> grid{0.4, 1.0, 1.8};
  const auto wn = integrate_wn(alg, process_coefficients(s), grid);
  const auto table = compute_gauge(s, grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    CHECK(std::abs(wn[i].g[0] - table[i].g1) < 1e-8);
    CHECK(std::abs(wn[i].g[1] - table[i].g2) < 1e-8);
    CHECK(std::abs(wn[i].g[2] - table[i].g3) < 1e-8);
    CHECK(std::abs(wn[i].g[3] - table[i].g4) < 1e-8);
  }
}

TEST_CASE("flipping the decay coefficient sign wrecks the agreement") {
  const ProcessSpec s{RateFamily::constant(1.0), RateFamily::constant(2.0), 0.5};
  const auto alg = process_algebra(s.beta);
  const auto wn = integrate_wn(alg, process_coefficients_flipped_decay(s),
                               std::vector<double>{0.5});
  const auto cf = constant_rate_gauge(s, 0.5);
  double worst = 0.0;
  worst = std::max(worst, std::abs(wn[0].g[0] - cf.g1));
  worst = std::max(worst, std::abs(wn[0].g[1] - cf.g2));
  worst = std::max(worst, std::abs(wn[0].g[2] - cf.g3));
  worst = std::max(worst, std::abs(wn[0].g[3] - cf.g4));
  CHECK(worst > 1e-2);
}

TEST_CASE("singular velocity map aborts with the last good time") {
  const auto alg = affine_algebra();
  // dg0 = 30 inflates exp(g0 ad_0); the map's condition crosses 1e12 near
  // t = ln(1e12)/30 ~ 0.92
  auto coeffs = [](double, std::span<double> a) {
    a[0] = 30.0;
    a[1] = 1.0;
  };
  try {
    integrate_wn(alg, coeffs, std::vector<double>{1.2});
    FAIL("expected SingularError");
  } catch (const SingularError& e) {
    CHECK(e.condition() >= 1e12);
    CHECK(e.last_valid_t() > 0.5);
    CHECK(e.last_valid_t() < 1.0);
  }

  // shy of the threshold the same system integrates fine
  const auto ok = integrate_wn(alg, coeffs, std::vector<double>{0.8});
  CHECK(ok[0].g[0] == doctest::Approx(24.0).epsilon(1e-9));
  CHECK(ok[0].cond > 1e9);
}

TEST_CASE("grid validation and the t = 0 entry") {
  const auto alg = affine_algebra();
  auto coeffs = [](double, std::span<double> a) {
    a[0] = 1.0;
    a[1] = 0.0;
  };
  CHECK_THROWS_AS(integrate_wn(alg, coeffs, std::vector<double>{}), std::invalid_argument);
  CHECK_THROWS_AS(integrate_wn(alg, coeffs, std::vector<double>{0.5, 0.5}),
                  std::invalid_argument);
  CHECK_THROWS_AS(integrate_wn(alg, coeffs, std::vector<double>{-1.0}), std::invalid_argument);

  const auto out = integrate_wn(alg, coeffs, std::vector<double>{0.0, 0.3});
  CHECK(out[0].t == 0.0);
  CHECK(out[0].g[0] == 0.0);
  CHECK(out[0].cond == 1.0);
  CHECK(out[1].g[0] == doctest::Approx(0.3).epsilon(1e-10));
}

TEST_CASE("process coefficient slots") {
  const ProcessSpec s{RateFamily::constant(1.5), RateFamily::constant(0.25), 2.0};
  auto coeffs = process_coefficients(s);
  std::vector<double> a(4);
  coeffs(0.7, a);
  CHECK(a[0] == doctest::Approx(-2.0 * 1.5).epsilon(1e-15)); // -beta lambda
  CHECK(a[1] == 1.5);
  CHECK(a[2] == 0.25);
  CHECK(a[3] == doctest::Approx(-1.75).epsilon(1e-15)); // -(lambda + mu)

  auto flipped = process_coefficients_flipped_decay(s);
  flipped(0.7, a);
  CHECK(a[3] == doctest::Approx(-1.25).epsilon(1e-15)); // -(lambda - mu)
}
