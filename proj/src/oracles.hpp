#pragma once

// Independent numerical checks: a truncated master-equation integrator and a
// thinning-based exact stochastic simulator. Neither knows anything about the
// gauge-function representation; they exist to catch it lying.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "distributions.hpp"
#include "rates.hpp"

namespace bdlie {

struct TruncatedDistribution {
  long n0 = 0;
  double t = 0;
  int n_max = 0;
  std::vector<double> probs; // index 0..n_max
  double leaked_mass = 0;    // probability absorbed past the truncation edge
};

// Integrates the forward equations on {0..n_max} plus one absorbing leak
// state. n_max = 0 picks a size heuristically from n0 and the net growth and
// doubles it (up to three times) until leaked_mass <= 1e-10, throwing
// TruncationError when the leak never drops below threshold. A caller-pinned
// n_max is used as-is; inspect leaked_mass yourself.
TruncatedDistribution integrate_master(const ProcessSpec& s, long n0, double t,
                                       int n_max = 0);
std::vector<TruncatedDistribution> integrate_master_grid(const ProcessSpec& s, long n0,
                                                         std::span<const double> t_grid,
                                                         int n_max = 0);

// xoshiro256** seeded through splitmix64; the state is a pure function of
// (seed, stream), which is what makes ensemble runs reproducible and
// parallel-safe.
class Rng {
 public:
  Rng(std::uint64_t seed, std::uint64_t stream);
  std::uint64_t next();
  double uniform();                  // [0, 1)
  double exponential(double rate);   // rate > 0

 private:
  std::uint64_t s_[4];
};

// One exact trajectory via thinning: proposals at the windowed bound
// B = sup gamma + n (sup lambda + sup mu), window min(0.1, 1/B_prev).
// Returns the population at t_end.
long ssa_trajectory(const ProcessSpec& s, long n0, double t_end, Rng& rng);

struct SsaEnsemble {
  long n0 = 0;
  double t = 0;
  std::uint64_t seed = 0;
  std::size_t trajectories = 0;
  std::vector<std::uint64_t> counts; // histogram of terminal populations
  std::vector<double> phat;
  std::vector<double> stderr_; // sqrt(phat (1 - phat) / R)
};

SsaEnsemble ssa_ensemble(const ProcessSpec& s, long n0, double t, std::size_t trajectories,
                         std::uint64_t seed);

struct CompareBin {
  long m_lo = 0, m_hi = 0;
  double p = 0;    // analytic mass in the bin
  double phat = 0; // empirical mass
  double z = 0;
};

struct CompareReport {
  bool has_master = false;
  double max_abs_diff = 0; // analytic vs master, over the union support
  long argmax_abs_diff = -1;
  bool pass_master = true;

  bool has_ssa = false;
  std::vector<CompareBin> bins; // states pooled so each expected count >= 10
  double worst_abs_z = 0;
  long n_bins = 0;
  long n_z_over_4 = 0;
  long n_z_3_to_4 = 0;
  bool pass_ssa = true;

  bool pass = true;
  std::string summary;
};

// Master check: entrywise |analytic - truncated| <= 1e-8. SSA check: pooled
// z-scores, all |z| <= 4 and at most ceil(1% of bins) in (3, 4].
CompareReport compare_report(const TransitionPmf& analytic,
                             const TruncatedDistribution* master,
                             const SsaEnsemble* ensemble);

} // namespace bdlie
