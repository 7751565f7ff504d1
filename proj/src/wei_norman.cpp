#include "wei_norman.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "errors.hpp"
#include "ode.hpp"

namespace bdlie {

namespace {
constexpr double kJacobiTol = 1e-12;
constexpr double kCondLimit = 1e12;
constexpr int kMaxDim = 16;
} // namespace

void LieAlgebraSpec::validate() const {
  const int n = dim();
  if (n == 0) throw std::invalid_argument("algebra: empty structure-constant table");
  if (n > kMaxDim)
    throw std::invalid_argument("algebra: dimension " + std::to_string(n) +
                                " exceeds the supported limit of " + std::to_string(kMaxDim));
  if (!labels.empty() && static_cast<int>(labels.size()) != n)
    throw std::invalid_argument("algebra: label count does not match dimension");
  for (int i = 0; i < n; ++i) {
    if (static_cast<int>(c[i].size()) != n)
      throw std::invalid_argument("algebra: structure-constant table is not cubic");
    for (int j = 0; j < n; ++j) {
      if (static_cast<int>(c[i][j].size()) != n)
        throw std::invalid_argument("algebra: structure-constant table is not cubic");
      for (int k = 0; k < n; ++k) {
        if (!std::isfinite(c[i][j][k]))
          throw std::invalid_argument("algebra: non-finite structure constant");
        if (std::abs(c[i][j][k] + c[j][i][k]) > kJacobiTol)
          throw std::invalid_argument("algebra: structure constants are not antisymmetric at (" +
                                      std::to_string(i) + "," + std::to_string(j) + "," +
                                      std::to_string(k) + ")");
      }
    }
  }
  // Jacobi: sum_m c_ij^m c_mk^n + c_jk^m c_mi^n + c_ki^m c_mj^n = 0.
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int nn = 0; nn < n; ++nn) {
          double s = 0;
          for (int m = 0; m < n; ++m)
            s += c[i][j][m] * c[m][k][nn] + c[j][k][m] * c[m][i][nn] + c[k][i][m] * c[m][j][nn];
          if (std::abs(s) > kJacobiTol)
            throw std::invalid_argument("algebra: Jacobi identity fails at (" + std::to_string(i) +
                                        "," + std::to_string(j) + "," + std::to_string(k) + ")");
        }
}

std::vector<Eigen::MatrixXd> adjoint_reps(const LieAlgebraSpec& alg) {
  const int n = alg.dim();
  std::vector<Eigen::MatrixXd> ad(n, Eigen::MatrixXd::Zero(n, n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        ad[i](k, j) = alg.c[i][j][k];
  return ad;
}

Eigen::VectorXd wn_velocity(const LieAlgebraSpec& alg, const Eigen::VectorXd& g,
                            const Eigen::VectorXd& a, double* cond_out) {
  const int n = alg.dim();
  if (g.size() != n || a.size() != n)
    throw std::invalid_argument("wn_velocity: dimension mismatch");
  const std::vector<Eigen::MatrixXd> ad = adjoint_reps(alg);
  Eigen::MatrixXd M(n, n);
  Eigen::MatrixXd P = Eigen::MatrixXd::Identity(n, n);
  for (int l = 0; l < n; ++l) {
    M.col(l) = P.col(l);
    if (l + 1 < n) P = P * (g[l] * ad[l]).exp();
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const double smax = svd.singularValues()(0);
  const double smin = svd.singularValues()(n - 1);
  const double cond = smin > 0 ? smax / smin : std::numeric_limits<double>::infinity();
  if (cond_out) *cond_out = cond;
  if (!(cond <= kCondLimit))
    throw SingularError("velocity map singular: condition number " + std::to_string(cond),
                        std::numeric_limits<double>::quiet_NaN(), cond);
  return svd.solve(a);
}

std::vector<WNState> integrate_wn(const LieAlgebraSpec& alg,
                                  const std::function<void(double, std::span<double>)>& coeffs,
                                  std::span<const double> t_grid,
                                  std::span<const double> mesh, const WNOptions& opt) {
  alg.validate();
  const int n = alg.dim();
  if (t_grid.empty()) throw std::invalid_argument("integrate_wn: empty output grid");
  double prev = -1;
  for (double t : t_grid) {
    if (!(t >= 0) || !std::isfinite(t))
      throw std::invalid_argument("integrate_wn: output times must be finite and nonnegative");
    if (t <= prev) throw std::invalid_argument("integrate_wn: output times must increase");
    prev = t;
  }

  std::vector<double> a_buf(n);
  double last_ok = 0;
  auto rhs = [&](double t, const std::vector<double>& y, std::vector<double>& dy) {
    coeffs(t, std::span<double>(a_buf));
    Eigen::Map<const Eigen::VectorXd> gv(y.data(), n);
    Eigen::Map<const Eigen::VectorXd> av(a_buf.data(), n);
    Eigen::VectorXd dg;
    try {
      dg = wn_velocity(alg, gv, av);
    } catch (const SingularError& e) {
      throw SingularError(e.what(), last_ok, e.condition());
    }
    for (int i = 0; i < n; ++i) dy[i] = dg[i];
  };

  std::vector<WNState> out;
  out.reserve(t_grid.size());
  auto observe = [&](double t, const std::vector<double>& y, const OdeStats&) {
    WNState st;
    st.t = t;
    st.g = y;
    coeffs(t, std::span<double>(a_buf));
    Eigen::Map<const Eigen::VectorXd> gv(y.data(), n);
    Eigen::Map<const Eigen::VectorXd> av(a_buf.data(), n);
    wn_velocity(alg, gv, av, &st.cond);
    out.push_back(std::move(st));
  };
  auto guard = [&](double t, const std::vector<double>&) { last_ok = t; };

  OdeOptions oo;
  oo.rtol = opt.rtol;
  oo.atol = opt.atol;
  integrate_grid(rhs, std::vector<double>(n, 0.0), 0.0, t_grid, mesh, oo, observe, guard);
  return out;
}

std::function<void(double, std::span<double>)> process_coefficients(const ProcessSpec& s) {
  return [s](double t, std::span<double> a) {
    if (a.size() != 4) throw std::invalid_argument("process_coefficients: expected 4 slots");
    const double lam = s.lambda.eval(t);
    const double mu = s.mu.eval(t);
    a[0] = -s.beta * lam;
    a[1] = lam;
    a[2] = mu;
    a[3] = -(lam + mu);
  };
}

std::function<void(double, std::span<double>)>
process_coefficients_flipped_decay(const ProcessSpec& s) {
  return [s](double t, std::span<double> a) {
    if (a.size() != 4) throw std::invalid_argument("process_coefficients: expected 4 slots");
    const double lam = s.lambda.eval(t);
    const double mu = s.mu.eval(t);
    a[0] = -s.beta * lam;
    a[1] = lam;
    a[2] = mu;
    a[3] = -(lam - mu);
  };
}

} // namespace bdlie
