#include "distributions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "errors.hpp"

namespace bdlie {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double log_factorial(long k) { return std::lgamma(static_cast<double>(k) + 1.0); }

double xlogy(long k, double y) {
  if (k == 0) return 0.0;
  return y > 0 ? static_cast<double>(k) * std::log(y) : -kInf;
}

void check_gauge_for_probs(const GaugeState& g) {
  if (!std::isfinite(g.g1) || !std::isfinite(g.g2) || !std::isfinite(g.g3) ||
      !std::isfinite(g.g4))
    throw GaugeInconsistencyError("transition probability: non-finite gauge state");
  if (g.g2 < 0 || g.g2 >= 1)
    throw GaugeInconsistencyError("transition probability: g2 outside [0,1)");
  if (g.g3 < 0)
    throw GaugeInconsistencyError("transition probability: negative g3");
}

} // namespace

double log_gamma_ratio(double beta, long m, long i) {
  if (i < 0 || m < 0 || i > m) throw std::invalid_argument("log_gamma_ratio: need 0 <= i <= m");
  if (!(beta >= 0)) throw std::invalid_argument("log_gamma_ratio: need beta >= 0");
  if (i == 0) return 0.0;
  if (beta == 0 && i == m) return -kInf; // the k = m factor vanishes
  if (i <= 64) {
    double prod = 1.0;
    for (long k = 1; k <= i; ++k) prod *= beta + static_cast<double>(m - k);
    if (prod > 0 && std::isfinite(prod)) return std::log(prod);
  }
  return std::lgamma(beta + static_cast<double>(m)) -
         std::lgamma(beta + static_cast<double>(m - i));
}

double log_transition_prob(const ProcessSpec& s, const GaugeState& g, long n, long m,
                           bool include_prefactor) {
  if (n < 0 || m < 0) throw std::invalid_argument("log_transition_prob: negative state");
  check_gauge_for_probs(g);
  const double beta = s.beta;

  const long i_lo = std::max<long>(0, m - n);
  std::vector<double> terms;
  terms.reserve(static_cast<std::size_t>(m - i_lo + 1));
  double peak = -kInf;
  for (long i = i_lo; i <= m; ++i) {
    const double lt = log_factorial(n) + log_gamma_ratio(beta, m, i) - log_factorial(i) -
                      log_factorial(m - i) - log_factorial(n - m + i) + xlogy(i, g.g2) +
                      xlogy(n - m + i, g.g3);
    if (lt == -kInf) continue;
    terms.push_back(lt);
    peak = std::max(peak, lt);
  }
  double lp;
  if (terms.empty()) {
    lp = -kInf;
  } else {
    double acc = 0;
    for (double lt : terms) acc += std::exp(lt - peak);
    lp = peak + std::log(acc);
  }
  if (include_prefactor) lp += g.g1 + g.g4 * static_cast<double>(n);
  return lp;
}

TransitionPmf transition_pmf(const ProcessSpec& s, double t, long n0, const PmfOptions& opt) {
  if (n0 < 0) throw std::invalid_argument("transition_pmf: negative initial state");
  if (!(opt.tail_tol > 0) || opt.tail_tol > 1e-3)
    throw std::invalid_argument("transition_pmf: tail_tol must lie in (0, 1e-3]");
  if (opt.max_states < 8) throw std::invalid_argument("transition_pmf: max_states too small");

  TransitionPmf out;
  out.n0 = n0;
  out.t = t;
  out.gauge = gauge_at(s, t, opt.gauge);

  const double spike_tol = opt.tail_tol * 1e-3;
  double sum = 0;
  long quiet = 0; // consecutive entries below spike_tol
  for (long m = 0;; ++m) {
    if (static_cast<std::size_t>(m) >= opt.max_states)
      throw TruncationError("transition_pmf: no convergence within " +
                            std::to_string(opt.max_states) + " states (n0=" +
                            std::to_string(n0) + ", t=" + std::to_string(t) + ")");
    const double p =
        std::exp(log_transition_prob(s, out.gauge, n0, m, opt.include_prefactor));
    out.probs.push_back(p);
    sum += p;
    quiet = p < spike_tol ? quiet + 1 : 0;
    if (quiet >= 5 && 1.0 - sum < opt.tail_tol) break;
  }
  out.tail_mass = 1.0 - sum;

  const GaugeError& e = out.gauge.est_error;
  const double m_top = static_cast<double>(out.probs.size() - 1);
  double budget = e.g1 + static_cast<double>(n0) * e.g4;
  if (out.gauge.g2 > 0) budget += m_top * e.g2 / out.gauge.g2;
  if (out.gauge.g3 > 0) budget += static_cast<double>(n0) * e.g3 / out.gauge.g3;
  out.gauge_error_budget = budget;
  if (opt.enforce_gauge_budget && budget > opt.tail_tol)
    throw TailError("transition_pmf: gauge error budget " + std::to_string(budget) +
                    " exceeds tail_tol " + std::to_string(opt.tail_tol) +
                    "; refusing to quote digits the gauge cannot back");
  return out;
}

double mean_from_gauge(const ProcessSpec& s, const GaugeState& g) {
  check_gauge_for_probs(g);
  const double beta = s.beta;
  const double lp = g.g1 + g.g4 - (beta + 2.0) * std::log1p(-g.g2);
  return std::exp(lp) * (1.0 + beta * g.g2 * (1.0 + (1.0 - g.g2) * g.g3));
}

double mean_from_one(const ProcessSpec& s, double t, const GaugeOptions& opt) {
  return mean_from_gauge(s, gauge_at(s, t, opt));
}

MomentResult moment_numeric(const TransitionPmf& pmf, int order) {
  if (order < 0) throw std::invalid_argument("moment_numeric: negative order");
  if (!(std::abs(pmf.tail_mass) < 1e-6))
    throw TailError("moment_numeric: tail mass " + std::to_string(pmf.tail_mass) +
                    " too large for a trustworthy moment (need < 1e-6)");
  MomentResult r;
  r.order = order;
  double acc = 0;
  for (std::size_t m = 0; m < pmf.probs.size(); ++m)
    acc += std::pow(static_cast<double>(m), order) * pmf.probs[m];
  r.value = acc;
  const double m_top = static_cast<double>(pmf.probs.size() - 1);
  r.tail_bias_bound = std::abs(pmf.tail_mass) * std::pow(m_top, order);
  return r;
}

} // namespace bdlie
