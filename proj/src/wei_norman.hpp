#pragma once

// Generic product-of-exponentials (Wei-Norman) engine.
//
// Given a finite-dimensional Lie algebra by structure constants c[i][j][k]
// ([H_i, H_j] = sum_k c_ij^k H_k) and a generator H(t) = sum_l a_l(t) H_l,
// the ansatz U(t) = prod_l exp(g_l(t) H_l) turns the evolution equation into
//   M(g) dg/dt = a(t),   column l of M(g) = (prod_{j<l} exp(g_j ad_Hj)) e_l,
// which this module assembles mechanically and integrates with g(0) = 0.

#include <Eigen/Dense>
#include <functional>
#include <span>
#include <vector>

#include "rates.hpp"

namespace bdlie {

struct LieAlgebraSpec {
  std::vector<std::string> labels;
  std::vector<std::vector<std::vector<double>>> c; // c[i][j][k]

  int dim() const { return static_cast<int>(c.size()); }
  // Shape, antisymmetry and the Jacobi identity (to 1e-12); throws on failure.
  void validate() const;
};

// Adjoint representations: (ad_i)_{kj} = c[i][j][k], so ad_i maps the
// coordinate vector of X to the coordinates of [H_i, X].
std::vector<Eigen::MatrixXd> adjoint_reps(const LieAlgebraSpec& alg);

// The velocity map at configuration g: solves M(g) dg = a. Reports the
// condition number through cond_out when given; throws SingularError
// (condition > 1e12) with an unset time slot that callers contextualize.
Eigen::VectorXd wn_velocity(const LieAlgebraSpec& alg, const Eigen::VectorXd& g,
                            const Eigen::VectorXd& a, double* cond_out = nullptr);

struct WNState {
  double t = 0;
  std::vector<double> g; // one gauge function per basis element
  double cond = 1.0;     // condition number of M(g) at this point
};

struct WNOptions {
  double rtol = 1e-10;
  double atol = 1e-12;
};

// Integrates the factored-representation ODE from g = 0 through the grid.
// Aborts with SingularError carrying the last accepted time when M(g)
// becomes numerically singular.
std::vector<WNState> integrate_wn(const LieAlgebraSpec& alg,
                                  const std::function<void(double, std::span<double>)>& coeffs,
                                  std::span<const double> t_grid,
                                  std::span<const double> mesh = {},
                                  const WNOptions& opt = {});

// Generator coordinates of the birth-death-immigration process in the
// factorization-order basis {I, a'(beta+a'a), a, a'a}:
//   a(t) = (-beta*lambda, lambda, mu, -(lambda + mu)).
std::function<void(double, std::span<double>)> process_coefficients(const ProcessSpec& s);

// Same mapping with the last coefficient replaced by -(lambda - mu); kept so
// the sign can be pinned by a divergence test against the closed forms.
std::function<void(double, std::span<double>)>
process_coefficients_flipped_decay(const ProcessSpec& s);

} // namespace bdlie
