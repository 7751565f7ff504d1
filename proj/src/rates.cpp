#include "rates.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace bdlie {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_time(double t) {
  if (!(t >= 0.0)) throw std::domain_error("rate evaluated at negative time");
}

void check_range(double t0, double t1) {
  if (!(t0 >= 0.0) || !(t1 >= t0))
    throw std::domain_error("rate integral needs 0 <= t0 <= t1");
}

bool strictly_increasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i)
    if (!(v[i] > v[i - 1])) return false;
  return true;
}

// Maximum of sin over theta in [a, b], a <= b.
double sin_max(double a, double b) {
  constexpr double tau = 2.0 * std::numbers::pi;
  if (b - a >= tau) return 1.0;
  const double k = std::ceil((a - 0.5 * std::numbers::pi) / tau);
  if (0.5 * std::numbers::pi + k * tau <= b) return 1.0;
  return std::max(std::sin(a), std::sin(b));
}

double sin_min(double a, double b) { return -sin_max(-b, -a); }

// Index of the piecewise segment containing t: values[i] on [b[i-1], b[i]).
std::size_t segment_of(const PiecewiseRate& r, double t) {
  const auto it = std::upper_bound(r.breakpoints.begin(), r.breakpoints.end(), t);
  return static_cast<std::size_t>(it - r.breakpoints.begin());
}

double interp(const TabulatedRate& r, double t) {
  if (t > r.times.back()) throw std::domain_error("rate evaluated beyond tabulated span");
  const auto it = std::lower_bound(r.times.begin(), r.times.end(), t);
  if (it != r.times.end() && *it == t) return r.values[it - r.times.begin()];
  const std::size_t hi = static_cast<std::size_t>(it - r.times.begin());
  const std::size_t lo = hi - 1;
  const double w = (t - r.times[lo]) / (r.times[hi] - r.times[lo]);
  return r.values[lo] + w * (r.values[hi] - r.values[lo]);
}

} // namespace

RateFamily::RateFamily(Variant v) : v_(std::move(v)) {
  const auto bad = check(v_);
  if (!bad.empty()) throw std::invalid_argument(bad.front());
}

RateFamily RateFamily::constant(double c) { return RateFamily(ConstantRate{c}); }
RateFamily RateFamily::exponential(double c, double a) { return RateFamily(ExponentialRate{c, a}); }
RateFamily RateFamily::sinusoidal(double c, double eps, double omega, double phi) {
  return RateFamily(SinusoidalRate{c, eps, omega, phi});
}
RateFamily RateFamily::piecewise(std::vector<double> breakpoints, std::vector<double> values) {
  return RateFamily(PiecewiseRate{std::move(breakpoints), std::move(values)});
}
RateFamily RateFamily::tabulated(std::vector<double> times, std::vector<double> values) {
  return RateFamily(TabulatedRate{std::move(times), std::move(values)});
}

std::vector<std::string> RateFamily::check(const Variant& v) {
  std::vector<std::string> bad;
  auto finite = [](double x) { return std::isfinite(x); };
  if (const auto* r = std::get_if<ConstantRate>(&v)) {
    if (!finite(r->c) || r->c < 0.0) bad.push_back("constant rate needs c >= 0");
  } else if (const auto* r = std::get_if<ExponentialRate>(&v)) {
    if (!finite(r->c) || r->c < 0.0) bad.push_back("exponential rate needs c >= 0");
    if (!finite(r->a)) bad.push_back("exponential rate needs finite a");
  } else if (const auto* r = std::get_if<SinusoidalRate>(&v)) {
    if (!finite(r->c) || r->c < 0.0) bad.push_back("sinusoidal rate needs c >= 0");
    if (!finite(r->eps) || std::abs(r->eps) > 1.0)
      bad.push_back("sinusoidal rate needs |eps| <= 1 (amplitude bounded by the offset)");
    if (!finite(r->omega) || !finite(r->phi))
      bad.push_back("sinusoidal rate needs finite omega and phi");
  } else if (const auto* r = std::get_if<PiecewiseRate>(&v)) {
    if (r->values.size() != r->breakpoints.size() + 1)
      bad.push_back("piecewise rate needs values.size() == breakpoints.size() + 1");
    if (!r->breakpoints.empty() && !(r->breakpoints.front() > 0.0))
      bad.push_back("piecewise breakpoints must be > 0");
    if (!strictly_increasing(r->breakpoints))
      bad.push_back("piecewise breakpoints must be strictly increasing");
    for (double x : r->breakpoints)
      if (!finite(x)) bad.push_back("piecewise breakpoints must be finite");
    for (double x : r->values)
      if (!finite(x) || x < 0.0) bad.push_back("piecewise values must be >= 0");
  } else if (const auto* r = std::get_if<TabulatedRate>(&v)) {
    if (r->times.size() < 2) bad.push_back("tabulated rate needs at least two grid points");
    if (r->times.size() != r->values.size())
      bad.push_back("tabulated rate needs times.size() == values.size()");
    if (!r->times.empty() && r->times.front() != 0.0)
      bad.push_back("tabulated grid must start at 0");
    if (!strictly_increasing(r->times))
      bad.push_back("tabulated grid must be strictly increasing");
    for (double x : r->times)
      if (!finite(x)) bad.push_back("tabulated grid must be finite");
    for (double x : r->values)
      if (!finite(x) || x < 0.0) bad.push_back("tabulated values must be >= 0");
  }
  // dedupe repeated messages from the value loops
  std::sort(bad.begin(), bad.end());
  bad.erase(std::unique(bad.begin(), bad.end()), bad.end());
  return bad;
}

double RateFamily::eval(double t) const {
  check_time(t);
  return std::visit(
      [t](const auto& r) -> double {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, ConstantRate>) {
          return r.c;
        } else if constexpr (std::is_same_v<T, ExponentialRate>) {
          return r.c * std::exp(r.a * t);
        } else if constexpr (std::is_same_v<T, SinusoidalRate>) {
          // |eps| <= 1 makes the value nonnegative; clip the rounding dust at a zero touch
          return std::max(0.0, r.c * (1.0 + r.eps * std::sin(r.omega * t + r.phi)));
        } else if constexpr (std::is_same_v<T, PiecewiseRate>) {
          return r.values[segment_of(r, t)];
        } else {
          return interp(r, t);
        }
      },
      v_);
}

double RateFamily::integrate(double t0, double t1) const {
  check_range(t0, t1);
  return std::visit(
      [&](const auto& r) -> double {
        using T = std::decay_t<decltype(r)>;
        const double dt = t1 - t0;
        if constexpr (std::is_same_v<T, ConstantRate>) {
          return r.c * dt;
        } else if constexpr (std::is_same_v<T, ExponentialRate>) {
          if (r.a == 0.0) return r.c * dt;
          return r.c * std::exp(r.a * t0) * std::expm1(r.a * dt) / r.a;
        } else if constexpr (std::is_same_v<T, SinusoidalRate>) {
          if (r.omega == 0.0) return r.c * (1.0 + r.eps * std::sin(r.phi)) * dt;
          const double osc =
              (std::cos(r.omega * t0 + r.phi) - std::cos(r.omega * t1 + r.phi)) / r.omega;
          return r.c * (dt + r.eps * osc);
        } else if constexpr (std::is_same_v<T, PiecewiseRate>) {
          double acc = 0.0;
          double lo = 0.0;
          for (std::size_t i = 0; i < r.values.size(); ++i) {
            const double hi = i < r.breakpoints.size() ? r.breakpoints[i] : kInf;
            const double a = std::max(t0, lo), b = std::min(t1, hi);
            if (b > a) acc += r.values[i] * (b - a);
            lo = hi;
            if (lo >= t1) break;
          }
          return acc;
        } else {
          if (t1 > r.times.back())
            throw std::domain_error("rate integrated beyond tabulated span");
          // trapezoid on each grid cell overlap: exact for the interpolant
          double acc = 0.0;
          for (std::size_t i = 1; i < r.times.size(); ++i) {
            const double a = std::max(t0, r.times[i - 1]);
            const double b = std::min(t1, r.times[i]);
            if (b > a) acc += 0.5 * (interp(r, a) + interp(r, b)) * (b - a);
            if (r.times[i] >= t1) break;
          }
          return acc;
        }
      },
      v_);
}

double RateFamily::sup(double t0, double t1) const {
  check_range(t0, t1);
  return std::visit(
      [&](const auto& r) -> double {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, ConstantRate>) {
          return r.c;
        } else if constexpr (std::is_same_v<T, ExponentialRate>) {
          return r.c * std::exp(r.a * (r.a >= 0.0 ? t1 : t0));
        } else if constexpr (std::is_same_v<T, SinusoidalRate>) {
          double a = r.omega * t0 + r.phi;
          double b = r.omega * t1 + r.phi;
          if (a > b) std::swap(a, b);
          const double extreme = r.eps >= 0.0 ? sin_max(a, b) : sin_min(a, b);
          return std::max(0.0, r.c * (1.0 + r.eps * extreme));
        } else if constexpr (std::is_same_v<T, PiecewiseRate>) {
          const std::size_t s0 = segment_of(r, t0);
          // the segment holding t1 counts even when t1 is its left edge
          const std::size_t s1 = segment_of(r, t1);
          double best = 0.0;
          for (std::size_t i = s0; i <= s1; ++i) best = std::max(best, r.values[i]);
          return best;
        } else {
          if (t1 > r.times.back())
            throw std::domain_error("rate bounded beyond tabulated span");
          double best = std::max(interp(r, t0), interp(r, t1));
          for (std::size_t i = 0; i < r.times.size(); ++i)
            if (r.times[i] > t0 && r.times[i] < t1) best = std::max(best, r.values[i]);
          return best;
        }
      },
      v_);
}

std::vector<double> RateFamily::knots(double t0, double t1) const {
  std::vector<double> out;
  if (const auto* r = std::get_if<PiecewiseRate>(&v_)) {
    for (double b : r->breakpoints)
      if (b > t0 && b < t1) out.push_back(b);
  } else if (const auto* r = std::get_if<TabulatedRate>(&v_)) {
    for (double g : r->times)
      if (g > t0 && g < t1) out.push_back(g);
  }
  return out;
}

const char* RateFamily::kind() const {
  switch (v_.index()) {
    case 0: return "constant";
    case 1: return "exponential";
    case 2: return "sinusoidal";
    case 3: return "piecewise_constant";
    default: return "tabulated";
  }
}

double RateFamily::span_end() const {
  if (const auto* r = std::get_if<TabulatedRate>(&v_)) return r->times.back();
  return kInf;
}

std::vector<double> ProcessSpec::mesh(double t0, double t1) const {
  auto a = lambda.knots(t0, t1);
  auto b = mu.knots(t0, t1);
  a.insert(a.end(), b.begin(), b.end());
  std::sort(a.begin(), a.end());
  a.erase(std::unique(a.begin(), a.end()), a.end());
  return a;
}

ValidationReport validate_spec(const ProcessSpec& s) {
  ValidationReport rep;
  if (!(std::isfinite(s.beta)) || s.beta < 0.0)
    rep.violations.push_back("beta must be finite and >= 0");
  for (auto& v : RateFamily::check(s.lambda.raw()))
    rep.violations.push_back("lambda: " + v);
  for (auto& v : RateFamily::check(s.mu.raw()))
    rep.violations.push_back("mu: " + v);
  rep.ok = rep.violations.empty();
  return rep;
}

} // namespace bdlie
