#pragma once

// Embedded Cash-Karp 5(4) pair with a proportional step controller.
//
// The drive loop lands exactly on every requested output time and on every
// mesh point (rate discontinuities), keeps a per-component sum of accepted
// local error estimates, and exposes a guard hook that runs after each
// accepted step so callers can abort with a diagnostic tied to the current t.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "errors.hpp"

namespace bdlie {

struct OdeOptions {
  double rtol = 1e-10;
  double atol = 1e-12;
  double initial_step = 0.0; // 0 = choose automatically
  std::size_t max_steps = 20'000'000;
};

struct OdeStats {
  std::vector<double> acc_error; // per component, |local error| summed over accepted steps
  std::size_t n_accepted = 0;
  std::size_t n_rejected = 0;
};

namespace detail {

// Cash-Karp tableau.
inline constexpr double kC[6] = {0.0, 1.0 / 5.0, 3.0 / 10.0, 3.0 / 5.0, 1.0, 7.0 / 8.0};
inline constexpr double kA[6][5] = {
    {},
    {1.0 / 5.0},
    {3.0 / 40.0, 9.0 / 40.0},
    {3.0 / 10.0, -9.0 / 10.0, 6.0 / 5.0},
    {-11.0 / 54.0, 5.0 / 2.0, -70.0 / 27.0, 35.0 / 27.0},
    {1631.0 / 55296.0, 175.0 / 512.0, 575.0 / 13824.0, 44275.0 / 110592.0, 253.0 / 4096.0},
};
inline constexpr double kB5[6] = {37.0 / 378.0, 0.0, 250.0 / 621.0, 125.0 / 594.0, 0.0, 512.0 / 1771.0};
inline constexpr double kB4[6] = {2825.0 / 27648.0, 0.0,           18575.0 / 48384.0,
                                  13525.0 / 55296.0, 277.0 / 14336.0, 1.0 / 4.0};

} // namespace detail

// Integrates y' = f(t, y) from t0, calling observe(t, y, stats) at each entry
// of `outputs` (ascending, all >= t0). `mesh` points (ascending) are landed on
// exactly but not observed; use them for integrand kinks. `guard(t, y)`, when
// set, runs after every accepted step and may throw to abort.
template <class Rhs, class Observer>
void integrate_grid(Rhs&& f, std::vector<double> y, double t0,
                    std::span<const double> outputs, std::span<const double> mesh,
                    const OdeOptions& opt, Observer&& observe,
                    const std::function<void(double, const std::vector<double>&)>& guard = {}) {
  const std::size_t dim = y.size();
  OdeStats stats;
  stats.acc_error.assign(dim, 0.0);

  std::size_t next_out = 0;
  double t = t0;
  while (next_out < outputs.size() && outputs[next_out] <= t0) {
    observe(outputs[next_out], y, stats); // output at the start point itself
    ++next_out;
  }
  if (next_out >= outputs.size()) return;
  const double t_end = outputs.back();

  // Stop points: merged remaining outputs and interior mesh points.
  std::vector<double> stops;
  stops.reserve(outputs.size() + mesh.size());
  for (double m : mesh)
    if (m > t0 && m < t_end) stops.push_back(m);
  for (std::size_t i = next_out; i < outputs.size(); ++i) stops.push_back(outputs[i]);
  std::sort(stops.begin(), stops.end());
  stops.erase(std::unique(stops.begin(), stops.end()), stops.end());

  std::vector<double> k[6];
  for (auto& v : k) v.assign(dim, 0.0);
  std::vector<double> ytmp(dim), ynew(dim), yerr(dim);

  double h_ctrl = opt.initial_step > 0 ? opt.initial_step
                                       : std::max(1e-8, std::min(1e-3, (t_end - t0) * 1e-2));
  std::size_t attempts = 0;
  std::size_t next_stop = 0;

  auto arrive = [&](double target) {
    while (next_out < outputs.size() && outputs[next_out] == target) {
      observe(t, y, stats);
      ++next_out;
    }
    ++next_stop;
  };

  while (next_stop < stops.size()) {
    const double target = stops[next_stop];
    const double gap = target - t;
    if (gap <= std::abs(t) * 1e-15) { // stop point indistinguishable from t
      t = target;
      arrive(target);
      continue;
    }
    const bool hit = t + h_ctrl >= target;
    const double h = hit ? gap : h_ctrl;
    if (++attempts > opt.max_steps)
      throw IntegrationError("adaptive integration exceeded the step budget", t);

    f(t, y, k[0]);
    for (int s = 1; s < 6; ++s) {
      for (std::size_t i = 0; i < dim; ++i) {
        double acc = 0.0;
        for (int j = 0; j < s; ++j) acc += detail::kA[s][j] * k[j][i];
        ytmp[i] = y[i] + h * acc;
      }
      // a landing step may not sample the stop itself: stops sit on integrand
      // kinks, and the piece to the right belongs to the next step
      double ts = t + detail::kC[s] * h;
      if (hit && ts >= target) ts = std::nextafter(target, t);
      f(ts, ytmp, k[s]);
    }
    double err_norm = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
      double acc5 = 0.0, acc4 = 0.0;
      for (int s = 0; s < 6; ++s) {
        acc5 += detail::kB5[s] * k[s][i];
        acc4 += detail::kB4[s] * k[s][i];
      }
      ynew[i] = y[i] + h * acc5;
      yerr[i] = h * (acc5 - acc4);
      const double scale = opt.atol + opt.rtol * std::max(std::abs(y[i]), std::abs(ynew[i]));
      const double comp = std::abs(yerr[i]) / scale;
      if (!(comp <= err_norm)) err_norm = comp; // std::max would drop a NaN here
    }

    if (!std::isfinite(err_norm) || err_norm > 1.0) {
      ++stats.n_rejected;
      const double shrink = std::isfinite(err_norm)
                                ? std::max(0.1, 0.85 * std::pow(err_norm, -0.2))
                                : 0.1;
      h_ctrl = h * shrink;
      if (!(h_ctrl > std::abs(t) * 1e-14 + 1e-300))
        throw IntegrationError("adaptive integration step size underflowed", t);
      continue;
    }

    t = hit ? target : t + h;
    y.swap(ynew);
    ++stats.n_accepted;
    for (std::size_t i = 0; i < dim; ++i) stats.acc_error[i] += std::abs(yerr[i]);
    if (guard) guard(t, y);

    const double grow = err_norm > 0 ? std::min(5.0, 0.85 * std::pow(err_norm, -0.2)) : 5.0;
    if (hit) {
      arrive(target);
      // h_ctrl carries over: a clamped landing step says nothing about scale
      if (!std::isfinite(err_norm) || err_norm == 0.0 || h >= h_ctrl) h_ctrl *= grow;
    } else {
      h_ctrl = h * grow;
    }
  }
}

} // namespace bdlie
