#pragma once

// Gauge functions of the product-of-exponentials factorization.
//
// The evolution operator factorizes as
//   U(t) = exp(g1*I) exp(g2*H2) exp(g3*a) exp(g4*a'a),   H2 = a'(beta + a'a),
// and the four gauge functions have nested-integral closed forms driven by
//   rho(t) = int_0^t (mu - lambda),
//   W(t)   = exp(-rho) * (1 + int_0^t exp(rho) mu).
// One joint ODE pass computes (rho, V, I1, I3) with
//   V' = exp(rho) mu,   I1' = mu/W,   I3' = exp(-rho) mu/W^2,
// and assembles
//   g1 = beta*(rho - I1),  g2 = 1 - 1/W,  g3 = exp(rho) W^2 I3,
//   g4 = -rho - 2 ln W.
// All four start at 0; the factorization is the identity at t = 0.

#include <array>
#include <span>
#include <vector>

#include "rates.hpp"

namespace bdlie {

struct GaugeError {
  double rho = 0, W = 0, g1 = 0, g2 = 0, g3 = 0, g4 = 0;
};

struct GaugeState {
  double t = 0;
  double rho = 0;
  double W = 1;
  double g1 = 0, g2 = 0, g3 = 0, g4 = 0;
  GaugeError est_error{}; // accumulated local-error estimates, propagated
};

struct GaugeOptions {
  double rtol = 1e-10;
  double atol = 1e-12;
};

// Gauge table at the given strictly increasing times (all >= 0). A leading
// t = 0 entry is returned exactly as the all-zero state. Throws
// OverflowError when |rho| exceeds 700 (with the t where it happened) and
// IntegrationError when the controller stalls.
std::vector<GaugeState> compute_gauge(const ProcessSpec& s, std::span<const double> t_grid,
                                      const GaugeOptions& opt = {});

// Closed forms for constant lambda0, mu0 (beta arbitrary), including the
// degenerate lambda0 == mu0 limit. Requires both families constant.
GaugeState constant_rate_gauge(const ProcessSpec& s, double t);

// Exact time derivatives (dg1..dg4) at g.t implied by the auxiliary system
// (chain rule through the assembly maps; no finite differences).
std::array<double, 4> gauge_derivatives(const ProcessSpec& s, const GaugeState& g);

// Residuals of the four coupled velocity equations
//   g1' = beta*(mu g2 - lambda)
//   g2' = lambda + g2*(g2 mu - mu - lambda)
//   g3' = mu + g3*(lambda + mu - 2 mu g2)
//   g4' = -lambda - mu + 2 mu g2
// evaluated at g with the supplied derivatives.
std::array<double, 4> riccati_residual(const ProcessSpec& s, const GaugeState& g,
                                       const std::array<double, 4>& dg);

// Closed form when both rates are constant, ODE pass otherwise.
GaugeState gauge_at(const ProcessSpec& s, double t, const GaugeOptions& opt = {});

} // namespace bdlie
