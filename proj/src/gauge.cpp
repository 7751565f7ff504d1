#include "gauge.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "errors.hpp"
#include "ode.hpp"

namespace bdlie {

namespace {

constexpr double kRhoGuard = 700.0; // exp(+-700) is the edge of double range

// y = (rho, V, I1, I3)
GaugeState assemble(const ProcessSpec& s, double t, const std::vector<double>& y,
                    const std::vector<double>& acc) {
  const double rho = y[0], V = y[1], I1 = y[2], I3 = y[3];
  // W - 1 = expm1(-rho) + exp(-rho)*V keeps precision near the start
  const double w1 = std::expm1(-rho) + std::exp(-rho) * V;
  const double W = 1.0 + w1;
  GaugeState g;
  g.t = t;
  g.rho = rho;
  g.W = W;
  g.g1 = s.beta * (rho - I1);
  g.g2 = w1 / W;
  g.g3 = std::exp(rho) * W * W * I3;
  g.g4 = -rho - 2.0 * std::log1p(w1);

  // First-order propagation of the accumulated component errors.
  const double e_rho = acc[0], e_V = acc[1], e_I1 = acc[2], e_I3 = acc[3];
  GaugeError e;
  e.rho = e_rho;
  e.W = std::exp(-rho) * e_V + W * e_rho;
  e.g1 = s.beta * (e_rho + e_I1);
  e.g2 = e.W / (W * W);
  e.g3 = std::exp(rho) * W * W * e_I3 + g.g3 * (e_rho + 2.0 * e.W / W);
  e.g4 = e_rho + 2.0 * e.W / W;
  g.est_error = e;

  if (!(W > 0.0)) throw GaugeInconsistencyError("W must stay positive");
  // w1 cancels expm1(-rho) against exp(-rho)*V when lambda ~ 0, so the slack
  // for sign noise has to scale with the cancelled magnitude and the
  // integration error, not sit at a fixed epsilon
  const double cancel = (std::abs(std::expm1(-rho)) + std::exp(-rho) * std::abs(V)) / W;
  const double eps = std::numeric_limits<double>::epsilon();
  if (g.g2 < 0.0) {
    if (g.g2 < -(1e-12 + 8.0 * e.g2 + 64.0 * eps * cancel))
      throw GaugeInconsistencyError("g2 left [0,1)");
    g.g2 = 0.0;
  }
  if (g.g3 < 0.0) {
    if (g.g3 < -(1e-12 + 8.0 * e.g3)) throw GaugeInconsistencyError("g3 must be >= 0");
    g.g3 = 0.0;
  }
  if (!(g.g2 < 1.0)) throw GaugeInconsistencyError("g2 left [0,1)");
  return g;
}

} // namespace

std::vector<GaugeState> compute_gauge(const ProcessSpec& s, std::span<const double> t_grid,
                                      const GaugeOptions& opt) {
  if (t_grid.empty()) throw std::invalid_argument("empty time grid");
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    if (!std::isfinite(t_grid[i]) || t_grid[i] < 0.0)
      throw std::invalid_argument("time grid entries must be finite and >= 0");
    if (i > 0 && !(t_grid[i] > t_grid[i - 1]))
      throw std::invalid_argument("time grid must be strictly increasing");
  }
  const auto bad = validate_spec(s);
  if (!bad.ok) throw std::invalid_argument(bad.violations.front());
  if (t_grid.back() > s.span_end())
    throw std::domain_error("time grid extends beyond the tabulated rate span");

  std::vector<GaugeState> out;
  out.reserve(t_grid.size());

  auto rhs = [&s](double t, const std::vector<double>& y, std::vector<double>& dy) {
    const double lam = s.lambda.eval(t);
    const double m = s.mu.eval(t);
    const double rho = y[0];
    const double w1 = std::expm1(-rho) + std::exp(-rho) * y[1];
    const double W = 1.0 + w1;
    dy[0] = m - lam;
    dy[1] = std::exp(rho) * m;
    dy[2] = m / W;
    dy[3] = std::exp(-rho) * m / (W * W);
  };
  auto guard = [](double t, const std::vector<double>& y) {
    if (std::abs(y[0]) > kRhoGuard)
      throw OverflowError("gauge pass: |rho| exceeded the exp() guard", t);
  };

  OdeOptions oo;
  oo.rtol = opt.rtol;
  oo.atol = opt.atol;
  const auto mesh = s.mesh(0.0, t_grid.back());
  integrate_grid(rhs, std::vector<double>{0.0, 0.0, 0.0, 0.0}, 0.0, t_grid, mesh, oo,
                 [&](double t, const std::vector<double>& y, const OdeStats& st) {
                   if (t == 0.0) {
                     out.push_back(GaugeState{}); // identity at the origin, exactly
                   } else {
                     out.push_back(assemble(s, t, y, st.acc_error));
                   }
                 },
                 guard);
  return out;
}

GaugeState constant_rate_gauge(const ProcessSpec& s, double t) {
  if (!s.is_constant())
    throw std::invalid_argument("constant_rate_gauge needs constant lambda and mu");
  if (!(t >= 0.0) || !std::isfinite(t)) throw std::domain_error("time must be finite and >= 0");
  const double lam0 = std::get<ConstantRate>(s.lambda.raw()).c;
  const double mu0 = std::get<ConstantRate>(s.mu.raw()).c;
  const double delta = mu0 - lam0;
  const double rho = delta * t;
  if (std::abs(rho) > kRhoGuard)
    throw OverflowError("constant-rate gauge: |rho| exceeded the exp() guard", t);
  // em1 = int_0^t exp(-rho(tau)) dtau; the delta == 0 branch is the exact limit
  const double em1 = delta == 0.0 ? t : -std::expm1(-rho) / delta;
  const double w1 = lam0 * em1; // W - 1
  GaugeState g;
  g.t = t;
  g.rho = rho;
  g.W = 1.0 + w1;
  g.g1 = -s.beta * std::log1p(w1);
  g.g2 = w1 / (1.0 + w1);
  g.g3 = mu0 * std::exp(rho) * (1.0 + w1) * em1;
  g.g4 = -rho - 2.0 * std::log1p(w1);
  return g;
}

std::array<double, 4> gauge_derivatives(const ProcessSpec& s, const GaugeState& g) {
  const double lam = s.lambda.eval(g.t);
  const double m = s.mu.eval(g.t);
  const double Wdot = m - (m - lam) * g.W;
  return {
      s.beta * (m - lam - m / g.W),
      Wdot / (g.W * g.W),
      g.g3 * ((m - lam) + 2.0 * Wdot / g.W) + m,
      -(m - lam) - 2.0 * Wdot / g.W,
  };
}

std::array<double, 4> riccati_residual(const ProcessSpec& s, const GaugeState& g,
                                       const std::array<double, 4>& dg) {
  const double lam = s.lambda.eval(g.t);
  const double m = s.mu.eval(g.t);
  return {
      dg[0] - s.beta * (m * g.g2 - lam),
      dg[1] - lam - g.g2 * (g.g2 * m - m - lam),
      dg[2] - m - g.g3 * (lam + m - 2.0 * m * g.g2),
      dg[3] + lam + m - 2.0 * m * g.g2,
  };
}

GaugeState gauge_at(const ProcessSpec& s, double t, const GaugeOptions& opt) {
  if (s.is_constant()) return constant_rate_gauge(s, t);
  if (t == 0.0) return GaugeState{};
  const double grid[1] = {t};
  return compute_gauge(s, grid, opt).front();
}

} // namespace bdlie
