#pragma once

// Exact normal-ordered operator algebra for one bosonic mode.
//
// Operators are finite sums  sum c_{pq} (a')^p a^q  with [a, a'] = 1 and the
// rewriting rule  a^q (a')^p = sum_k k! C(q,k) C(p,k) (a')^(p-k) a^(q-k).
// Coefficients are polynomials in one formal symbol (the immigration ratio)
// over exact rationals, so commutator identities and closure questions are
// decided without rounding. Span membership works over the rational-function
// field in that symbol.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace bdlie {

class Rational {
public:
  Rational() : num_(0), den_(1) {}
  Rational(long long n) : num_(n), den_(1) {} // NOLINT: implicit by design
  Rational(long long n, long long d);

  long long num() const { return num_; }
  long long den() const { return den_; }
  bool is_zero() const { return num_ == 0; }
  double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }
  std::string str() const;

  friend Rational operator+(const Rational& a, const Rational& b);
  friend Rational operator-(const Rational& a, const Rational& b);
  friend Rational operator*(const Rational& a, const Rational& b);
  friend Rational operator/(const Rational& a, const Rational& b);
  friend Rational operator-(const Rational& a);
  friend bool operator==(const Rational& a, const Rational& b) {
    return a.num_ == b.num_ && a.den_ == b.den_;
  }

private:
  static Rational make(__int128 n, __int128 d);
  long long num_;
  long long den_; // > 0, gcd(num, den) = 1
};

// Dense polynomial in the formal ratio symbol; c[k] multiplies symbol^k.
class Poly {
public:
  Poly() = default;
  Poly(Rational constant); // NOLINT: implicit by design
  static Poly symbol();    // the formal ratio itself
  static Poly from_coeffs(std::vector<Rational> ascending);

  bool is_zero() const { return c_.empty(); }
  int degree() const { return static_cast<int>(c_.size()) - 1; } // -1 for zero
  Rational coeff(int k) const;
  Rational lead() const;
  double eval(double x) const;
  std::string str() const;

  friend Poly operator+(const Poly& a, const Poly& b);
  friend Poly operator-(const Poly& a, const Poly& b);
  friend Poly operator*(const Poly& a, const Poly& b);
  friend Poly operator*(const Poly& a, const Rational& s);
  friend Poly operator-(const Poly& a);
  friend bool operator==(const Poly& a, const Poly& b) { return a.c_ == b.c_; }

  // quotient and remainder; exact_divide throws if the remainder is nonzero
  static std::pair<Poly, Poly> divmod(const Poly& a, const Poly& b);
  static Poly exact_divide(const Poly& a, const Poly& b);
  static Poly gcd(Poly a, Poly b); // monic (or zero)

private:
  void trim();
  std::vector<Rational> c_;
};

// Quotient of polynomials, kept canonical: gcd removed, denominator monic.
class RatFunc {
public:
  RatFunc() : num_(), den_(Rational(1)) {}
  RatFunc(Poly p) : num_(std::move(p)), den_(Rational(1)) {} // NOLINT
  RatFunc(Poly n, Poly d);

  bool is_zero() const { return num_.is_zero(); }
  const Poly& num() const { return num_; }
  const Poly& den() const { return den_; }
  double eval(double x) const;
  std::string str() const;

  friend RatFunc operator+(const RatFunc& a, const RatFunc& b);
  friend RatFunc operator-(const RatFunc& a, const RatFunc& b);
  friend RatFunc operator*(const RatFunc& a, const RatFunc& b);
  friend RatFunc operator/(const RatFunc& a, const RatFunc& b);
  friend RatFunc operator-(const RatFunc& a);
  friend bool operator==(const RatFunc& a, const RatFunc& b) {
    return a.num_ == b.num_ && a.den_ == b.den_;
  }

private:
  void normalize();
  Poly num_, den_;
};

using Mono = std::pair<int, int>; // (creation power p, annihilation power q)

struct BosonOperator {
  std::map<Mono, Poly> terms; // zero coefficients pruned

  static BosonOperator zero() { return {}; }
  static BosonOperator monomial(int p, int q, Poly coeff = Poly(Rational(1)));
  bool is_zero() const { return terms.empty(); }
  friend bool operator==(const BosonOperator& a, const BosonOperator& b) {
    return a.terms == b.terms;
  }
};

BosonOperator operator+(const BosonOperator& x, const BosonOperator& y);
BosonOperator operator-(const BosonOperator& x, const BosonOperator& y);
BosonOperator operator*(const BosonOperator& x, const BosonOperator& y); // normal-ordered product
BosonOperator scale(const BosonOperator& x, const Poly& s);
BosonOperator commutator(const BosonOperator& x, const BosonOperator& y);

// Exact action on the number state |n>: map from m to the coefficient of |m>,
// using a'|n> = |n+1>, a|n> = n|n-1> (so (a')^p a^q |n> = n!/(n-q)! |n-q+p>).
std::map<long, Poly> apply_to_number_state(const BosonOperator& x, long n);

std::string to_string(const BosonOperator& x);

struct ClosureReport {
  bool closed = false;
  int dimension = 0; // independent elements retained
  int max_dim = 0;
  std::vector<BosonOperator> basis;
  std::vector<std::string> labels;
  std::vector<std::string> witness; // commutator chain that escaped (when not closed)
};

// Repeated commutators with span membership decided exactly; stops when no new
// direction appears (closed) or when the dimension would exceed max_dim
// (reported as a cutoff with the escaping chain, never as a proof of
// infinite-dimensionality).
ClosureReport lie_closure(const std::vector<BosonOperator>& generators,
                          const std::vector<std::string>& labels = {}, int max_dim = 12);

// c[i][j][k] with [B_i, B_j] = sum_k c[i][j][k] B_k, exact expansion
// specialized at the given ratio value. Throws NotClosedError if some
// commutator leaves the span and std::invalid_argument if the basis is
// linearly dependent.
std::vector<std::vector<std::vector<double>>>
structure_constants(const std::vector<BosonOperator>& basis, double beta_value);

// Factorization-order basis {I, a'(beta + a'a), a, a'a} and labels.
std::vector<BosonOperator> product_basis();
std::vector<std::string> product_basis_labels();
// Naive five-element candidate {I, a', a, a'a, a'a'a} (not closed).
std::vector<BosonOperator> naive_basis();
std::vector<std::string> naive_basis_labels();

} // namespace bdlie
