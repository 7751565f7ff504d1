#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "errors.hpp"
#include "ode.hpp"

namespace bdlie {

namespace {

constexpr double kLeakTol = 1e-10;
constexpr double kMasterMatchTol = 1e-8;
constexpr double kZHard = 4.0;
constexpr double kZSoft = 3.0;
constexpr double kMinExpected = 10.0;

void check_grid(std::span<const double> t_grid) {
  if (t_grid.empty()) throw std::invalid_argument("oracle: empty output grid");
  double prev = -1;
  for (double t : t_grid) {
    if (!std::isfinite(t) || t < 0)
      throw std::invalid_argument("oracle: output times must be finite and nonnegative");
    if (t <= prev) throw std::invalid_argument("oracle: output times must increase");
    prev = t;
  }
}

int heuristic_n_max(const ProcessSpec& s, long n0, std::span<const double> t_grid) {
  double growth = 1.0;
  for (double t : t_grid) growth = std::max(growth, std::exp(-s.rho(t)));
  // beta * int(lambda) immigration events arrive on average, each seeding a
  // lineage amplified by at most the same worst-case growth as the founders;
  // without this term the box collapses to ~16 states whenever n0 = 0
  const double immigrants = s.beta * s.lambda.integrate(0.0, t_grid.back());
  const double extra = 10.0 + 6.0 * std::sqrt(static_cast<double>(n0) + 1.0) +
                       growth * (static_cast<double>(n0) + immigrants);
  // clamp before the cast: growth alone can dwarf the int range
  const double want = static_cast<double>(n0) + std::ceil(extra);
  return static_cast<int>(std::min(want, 1e9));
}

std::vector<TruncatedDistribution> run_master(const ProcessSpec& s, long n0,
                                              std::span<const double> t_grid, int n_max) {
  const int n = n_max;
  std::vector<double> y(static_cast<std::size_t>(n) + 2, 0.0);
  y[static_cast<std::size_t>(n0)] = 1.0;

  auto rhs = [&](double t, const std::vector<double>& p, std::vector<double>& dp) {
    const double gam = s.gamma(t);
    const double lam = s.lambda.eval(t);
    const double mu = s.mu.eval(t);
    for (int k = 0; k <= n; ++k) {
      double v = -(gam + (lam + mu) * k) * p[k];
      if (k >= 1) v += (gam + lam * (k - 1)) * p[k - 1];
      if (k < n) v += mu * (k + 1) * p[k + 1];
      dp[k] = v;
    }
    dp[n + 1] = (gam + lam * n) * p[n]; // births past the edge are absorbed
  };

  std::vector<TruncatedDistribution> out;
  out.reserve(t_grid.size());
  auto observe = [&](double t, const std::vector<double>& p, const OdeStats&) {
    TruncatedDistribution d;
    d.n0 = n0;
    d.t = t;
    d.n_max = n;
    d.probs.assign(p.begin(), p.begin() + n + 1);
    d.leaked_mass = p[static_cast<std::size_t>(n) + 1];
    out.push_back(std::move(d));
  };

  OdeOptions oo;
  oo.rtol = 1e-10;
  oo.atol = 1e-14;
  const std::vector<double> mesh = s.mesh(0.0, t_grid.back());
  integrate_grid(rhs, std::move(y), 0.0, t_grid, mesh, oo, observe);
  return out;
}

} // namespace

std::vector<TruncatedDistribution> integrate_master_grid(const ProcessSpec& s, long n0,
                                                         std::span<const double> t_grid,
                                                         int n_max) {
  if (n0 < 0) throw std::invalid_argument("integrate_master: negative initial state");
  check_grid(t_grid);
  const auto bad = validate_spec(s);
  if (!bad.ok) throw std::invalid_argument(bad.violations.front());
  if (!(s.span_end() >= t_grid.back()))
    throw std::domain_error("integrate_master: output grid leaves the tabulated span");

  if (n_max > 0) {
    if (n_max < n0) throw std::invalid_argument("integrate_master: n_max below n0");
    return run_master(s, n0, t_grid, n_max); // pinned size: caller owns the leak check
  }

  // boxes past the cap would take minutes to integrate; refuse them up front
  constexpr int kMaxAutoBox = 20000;
  int n = heuristic_n_max(s, n0, t_grid);
  if (n > kMaxAutoBox)
    throw TruncationError("integrate_master: estimated support needs " + std::to_string(n) +
                          " states, beyond the automatic cap of " +
                          std::to_string(kMaxAutoBox));
  for (int attempt = 0; attempt < 6; ++attempt) {
    auto out = run_master(s, n0, t_grid, n);
    if (out.back().leaked_mass <= kLeakTol) return out;
    // near-critical tails decay like r^m with r ~ 1 - 1/W, so blind doubling
    // can need dozens of rounds; extrapolate the observed tail decay instead
    // and jump two orders of magnitude past the tolerance in one go
    int next = 2 * n;
    const auto& p = out.back().probs;
    if (p.size() >= 2 && p.back() > 0.0 && p[p.size() - 2] > 0.0) {
      const double r = p.back() / p[p.size() - 2];
      if (r < 0.999) {
        const double jump =
            std::log(out.back().leaked_mass / (0.01 * kLeakTol)) / std::log(1.0 / r);
        next = std::max(next, n + static_cast<int>(std::ceil(jump)) + 16);
      }
    }
    if (next > kMaxAutoBox)
      throw TruncationError("integrate_master: leak " +
                            std::to_string(out.back().leaked_mass) + " at " +
                            std::to_string(n) + " states needs a box beyond the automatic cap");
    n = next;
  }
  throw TruncationError("integrate_master: leaked mass stayed above " +
                        std::to_string(kLeakTol) + " after repeated box growth");
}

TruncatedDistribution integrate_master(const ProcessSpec& s, long n0, double t, int n_max) {
  const double grid[1] = {t};
  auto v = integrate_master_grid(s, n0, std::span<const double>(grid, 1), n_max);
  return std::move(v.front());
}

namespace {

std::uint64_t splitmix(std::uint64_t& x) {
  std::uint64_t z = (x += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

} // namespace

Rng::Rng(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t x = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  for (auto& w : s_) w = splitmix(x);
  if (!(s_[0] | s_[1] | s_[2] | s_[3])) s_[3] = 0x9E3779B97F4A7C15ULL;
}

std::uint64_t Rng::next() {
  const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double Rng::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

double Rng::exponential(double rate) {
  if (!(rate > 0)) throw std::invalid_argument("exponential: rate must be positive");
  return -std::log1p(-uniform()) / rate;
}

long ssa_trajectory(const ProcessSpec& s, long n0, double t_end, Rng& rng) {
  if (n0 < 0) throw std::invalid_argument("ssa: negative initial state");
  if (!std::isfinite(t_end) || t_end < 0)
    throw std::invalid_argument("ssa: t_end must be finite and nonnegative");
  if (!(s.span_end() >= t_end)) throw std::domain_error("ssa: t_end leaves the tabulated span");

  constexpr double kWindowCap = 0.1;
  double t = 0;
  long n = n0;
  double prev_bound = 0;
  while (t < t_end) {
    double delta = kWindowCap;
    if (prev_bound > 0) delta = std::min(delta, 1.0 / prev_bound);
    const double w_hi = std::min(t_end, t + delta);
    const double bound = s.gamma_sup(t, w_hi) + static_cast<double>(n) *
                             (s.lambda.sup(t, w_hi) + s.mu.sup(t, w_hi));
    prev_bound = bound;
    if (!(bound > 0)) {
      t = w_hi;
      continue;
    }
    while (true) {
      const double tc = t + rng.exponential(bound);
      if (tc >= w_hi) {
        t = w_hi;
        break;
      }
      t = tc;
      const double g = s.gamma(t);
      const double born = g + static_cast<double>(n) * s.lambda.eval(t);
      const double total = born + static_cast<double>(n) * s.mu.eval(t);
      if (total > bound * (1.0 + 1e-9))
        throw std::logic_error("ssa: window bound violated by the realized rate");
      const double u = rng.uniform() * bound;
      if (u < born) {
        ++n;
        break;
      }
      if (u < total) {
        --n;
        break;
      }
      // thinned: bound and n unchanged, keep drawing inside this window
    }
  }
  return n;
}

SsaEnsemble ssa_ensemble(const ProcessSpec& s, long n0, double t, std::size_t trajectories,
                         std::uint64_t seed) {
  if (trajectories == 0) throw std::invalid_argument("ssa_ensemble: need at least one trajectory");
  const auto bad = validate_spec(s);
  if (!bad.ok) throw std::invalid_argument(bad.violations.front());

  unsigned n_threads = std::max(1u, std::thread::hardware_concurrency());
  n_threads = std::min(n_threads, 8u);
  if (trajectories < 1024) n_threads = 1;

  std::vector<std::vector<std::uint64_t>> local(n_threads);
  std::vector<std::exception_ptr> errors(n_threads);
  auto work = [&](unsigned w, std::size_t lo, std::size_t hi) {
    try {
      auto& h = local[w];
      for (std::size_t k = lo; k < hi; ++k) {
        Rng rng(seed, k);
        const long m = ssa_trajectory(s, n0, t, rng);
        if (static_cast<std::size_t>(m) >= h.size()) h.resize(static_cast<std::size_t>(m) + 1, 0);
        ++h[static_cast<std::size_t>(m)];
      }
    } catch (...) {
      errors[w] = std::current_exception();
    }
  };

  if (n_threads == 1) {
    work(0, 0, trajectories);
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk = (trajectories + n_threads - 1) / n_threads;
    for (unsigned w = 0; w < n_threads; ++w) {
      const std::size_t lo = std::min<std::size_t>(w * chunk, trajectories);
      const std::size_t hi = std::min<std::size_t>(lo + chunk, trajectories);
      pool.emplace_back(work, w, lo, hi);
    }
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  SsaEnsemble out;
  out.n0 = n0;
  out.t = t;
  out.seed = seed;
  out.trajectories = trajectories;
  for (const auto& h : local) {
    if (h.size() > out.counts.size()) out.counts.resize(h.size(), 0);
    for (std::size_t m = 0; m < h.size(); ++m) out.counts[m] += h[m];
  }
  const double R = static_cast<double>(trajectories);
  out.phat.resize(out.counts.size());
  out.stderr_.resize(out.counts.size());
  for (std::size_t m = 0; m < out.counts.size(); ++m) {
    out.phat[m] = static_cast<double>(out.counts[m]) / R;
    out.stderr_[m] = std::sqrt(out.phat[m] * (1.0 - out.phat[m]) / R);
  }
  return out;
}

CompareReport compare_report(const TransitionPmf& analytic, const TruncatedDistribution* master,
                             const SsaEnsemble* ensemble) {
  CompareReport r;
  auto p_of = [&](long m) {
    return m >= 0 && static_cast<std::size_t>(m) < analytic.probs.size()
               ? analytic.probs[static_cast<std::size_t>(m)]
               : 0.0;
  };

  std::ostringstream sum;
  if (master) {
    r.has_master = true;
    const long top = std::max<long>(static_cast<long>(analytic.probs.size()) - 1, master->n_max);
    for (long m = 0; m <= top; ++m) {
      const double q = m <= master->n_max ? master->probs[static_cast<std::size_t>(m)] : 0.0;
      const double d = std::abs(p_of(m) - q);
      if (d > r.max_abs_diff) {
        r.max_abs_diff = d;
        r.argmax_abs_diff = m;
      }
    }
    r.pass_master = r.max_abs_diff <= kMasterMatchTol;
    sum << "master: max|diff|=" << r.max_abs_diff << " at m=" << r.argmax_abs_diff
        << (r.pass_master ? " (ok)" : " (FAIL)");
  }

  if (ensemble) {
    r.has_ssa = true;
    const double R = static_cast<double>(ensemble->trajectories);
    const long top = std::max<long>(static_cast<long>(analytic.probs.size()) - 1,
                                    static_cast<long>(ensemble->counts.size()) - 1);
    auto push_bin = [&](long lo, long hi, double p, double phat) {
      if (p == 0 && phat == 0) return;
      CompareBin b;
      b.m_lo = lo;
      b.m_hi = hi;
      b.p = p;
      b.phat = phat;
      if (p > 0 && p < 1) {
        b.z = (phat - p) / std::sqrt(p * (1.0 - p) / R);
      } else {
        b.z = phat == p ? 0.0 : std::numeric_limits<double>::infinity();
      }
      r.bins.push_back(b);
    };

    bool open = false;
    long run_lo = 0;
    double run_p = 0, run_phat = 0;
    auto close_run = [&](long hi) {
      if (!open) return;
      push_bin(run_lo, hi, run_p, run_phat);
      open = false;
      run_p = run_phat = 0;
    };
    for (long m = 0; m <= top; ++m) {
      const double pm = p_of(m);
      const double fm = static_cast<std::size_t>(m) < ensemble->counts.size()
                            ? static_cast<double>(ensemble->counts[static_cast<std::size_t>(m)]) / R
                            : 0.0;
      if (R * pm >= kMinExpected) {
        close_run(m - 1);
        push_bin(m, m, pm, fm);
      } else {
        if (!open) {
          open = true;
          run_lo = m;
        }
        run_p += pm;
        run_phat += fm;
        if (R * run_p >= kMinExpected) close_run(m);
      }
    }
    const double tail = std::max(analytic.tail_mass, 0.0);
    if (tail > 0 && !open) {
      open = true;
      run_lo = top + 1;
    }
    run_p += tail;
    close_run(std::max(top, open ? run_lo : top));

    r.n_bins = static_cast<long>(r.bins.size());
    for (const auto& b : r.bins) {
      const double az = std::abs(b.z);
      r.worst_abs_z = std::max(r.worst_abs_z, az);
      if (az > kZHard) ++r.n_z_over_4;
      else if (az > kZSoft) ++r.n_z_3_to_4;
    }
    const long allowance =
        static_cast<long>(std::ceil(0.01 * static_cast<double>(std::max<long>(r.n_bins, 1))));
    r.pass_ssa = r.n_z_over_4 == 0 && r.n_z_3_to_4 <= allowance;
    if (r.has_master) sum << "; ";
    sum << "ssa: worst|z|=" << r.worst_abs_z << " over " << r.n_bins << " bins, "
        << r.n_z_over_4 << " beyond 4, " << r.n_z_3_to_4 << " in (3,4] (allow " << allowance
        << ")" << (r.pass_ssa ? " (ok)" : " (FAIL)");
  }

  r.pass = r.pass_master && r.pass_ssa;
  r.summary = sum.str();
  return r;
}

} // namespace bdlie
