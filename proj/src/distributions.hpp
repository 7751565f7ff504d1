#pragma once

// Transition probabilities and moments evaluated from the gauge functions.
//
// P_{n->m}(t) is a single finite sum over the overlap index i (the number of
// birth-like insertions); every term is nonnegative, so the evaluation runs
// entirely in log space with one log-sum-exp at the end.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "gauge.hpp"
#include "rates.hpp"

namespace bdlie {

// log of Gamma(beta+m) / Gamma(beta+m-i), i.e. prod_{k=1..i} (beta + m - k).
// Exact -inf when a factor vanishes (beta == 0 with i == m > 0).
double log_gamma_ratio(double beta, long m, long i);

// log P_{n->m}(t) for the process whose evolution produced the gauge state g.
// include_prefactor=false drops the exp(g1 + g4 n) factor; that variant is a
// consistency-check hook (the sum alone does not normalize) and not a
// probability.
double log_transition_prob(const ProcessSpec& s, const GaugeState& g, long n, long m,
                           bool include_prefactor = true);

struct PmfOptions {
  double tail_tol = 1e-10;
  std::size_t max_states = 100000;
  bool include_prefactor = true;
  // When set, refuse to report a pmf whose gauge error budget exceeds the
  // tail tolerance instead of silently quoting digits the gauge cannot back.
  bool enforce_gauge_budget = false;
  GaugeOptions gauge{1e-12, 1e-14}; // tighter than the public default: the
                                    // normalization check leans on these
};

struct TransitionPmf {
  long n0 = 0;
  double t = 0;
  std::vector<double> probs; // index m = 0..M
  double tail_mass = 0;      // 1 - sum(probs)
  GaugeState gauge;
  double gauge_error_budget = 0; // first-order relative error bound per entry
};

// P_{n0->m}(t) for m = 0..M with M chosen adaptively: extend until the
// remaining mass is below tail_tol and the last five entries are each below
// tail_tol * 1e-3. Throws TruncationError past max_states.
TransitionPmf transition_pmf(const ProcessSpec& s, double t, long n0,
                             const PmfOptions& opt = {});

// Closed-form mean of the population started from a single individual.
double mean_from_one(const ProcessSpec& s, double t, const GaugeOptions& opt = {});
double mean_from_gauge(const ProcessSpec& s, const GaugeState& g);

struct MomentResult {
  int order = 1;
  double value = 0;
  double tail_bias_bound = 0; // tail_mass * M^order
  std::string method = "pmf-sum";
};

// j-th raw moment from a truncated pmf. Requires tail_mass < 1e-6
// (TailError otherwise); the reported bound does not account for mass
// beyond the truncation point growing faster than M^j.
MomentResult moment_numeric(const TransitionPmf& pmf, int order);

} // namespace bdlie
