#pragma once

// Time-dependent rate functions and the process specification.
//
// A process is a linear birth-death system with immigration locked to the
// division rate: individuals divide at lambda(t), die at mu(t), and new
// individuals immigrate at gamma(t) = beta * lambda(t) with beta a
// time-independent constant >= 0. gamma is always derived, never stored.

#include <string>
#include <variant>
#include <vector>

namespace bdlie {

struct ConstantRate {
  double c;
};

struct ExponentialRate { // c * exp(a*t)
  double c;
  double a;
};

struct SinusoidalRate { // c * (1 + eps*sin(omega*t + phi)), |eps| <= 1
  double c;
  double eps;
  double omega;
  double phi;
};

struct PiecewiseRate { // values[i] on [b[i-1], b[i]), last value extends to +inf
  std::vector<double> breakpoints; // strictly increasing, all > 0
  std::vector<double> values;      // size = breakpoints.size() + 1, all >= 0
};

struct TabulatedRate { // linear interpolation on a strictly increasing grid from 0
  std::vector<double> times;
  std::vector<double> values;
};

class RateFamily {
public:
  using Variant =
      std::variant<ConstantRate, ExponentialRate, SinusoidalRate, PiecewiseRate, TabulatedRate>;

  static RateFamily constant(double c);
  static RateFamily exponential(double c, double a);
  static RateFamily sinusoidal(double c, double eps, double omega, double phi);
  static RateFamily piecewise(std::vector<double> breakpoints, std::vector<double> values);
  static RateFamily tabulated(std::vector<double> times, std::vector<double> values);

  // f(t). Throws std::domain_error for t < 0 or beyond a tabulated span.
  double eval(double t) const;

  // Exact integral over [t0, t1] (closed form per family; the tabulated
  // interpolant integrates exactly by knot-split trapezoid). Requires
  // 0 <= t0 <= t1 within the domain.
  double integrate(double t0, double t1) const;

  // Least upper bound of f on [t0, t1]; exact for every family.
  double sup(double t0, double t1) const;

  // Kink/discontinuity locations strictly inside (t0, t1), ascending.
  std::vector<double> knots(double t0, double t1) const;

  const char* kind() const;
  bool is_constant() const { return std::holds_alternative<ConstantRate>(v_); }
  double span_end() const; // last valid t (infinity unless tabulated)
  const Variant& raw() const { return v_; }

  // Invariant violations as human-readable strings (empty when valid).
  static std::vector<std::string> check(const Variant& v);

private:
  explicit RateFamily(Variant v);
  Variant v_;
};

struct ProcessSpec {
  RateFamily lambda; // per-individual division rate
  RateFamily mu;     // per-individual death rate
  double beta = 0.0; // immigration ratio: gamma(t) = beta * lambda(t)

  double gamma(double t) const { return beta * lambda.eval(t); }
  double gamma_sup(double t0, double t1) const { return beta * lambda.sup(t0, t1); }
  // Integral of (mu - lambda) over [0, t], via the exact per-family integrals.
  double rho(double t) const { return mu.integrate(0.0, t) - lambda.integrate(0.0, t); }
  bool is_constant() const { return lambda.is_constant() && mu.is_constant(); }
  double span_end() const { return std::min(lambda.span_end(), mu.span_end()); }
  std::vector<double> mesh(double t0, double t1) const;
};

struct ValidationReport {
  bool ok = true;
  std::vector<std::string> violations;
};

ValidationReport validate_spec(const ProcessSpec& s);

} // namespace bdlie
