#include "boson.hpp"

#include <deque>
#include <sstream>
#include <stdexcept>

#include "errors.hpp"

namespace bdlie {

namespace {

__int128 gcd128(__int128 a, __int128 b) {
  if (a < 0) a = -a;
  if (b < 0) b = -b;
  while (b != 0) {
    const __int128 r = a % b;
    a = b;
    b = r;
  }
  return a;
}

long long narrow(__int128 v) {
  if (v > INT64_MAX || v < INT64_MIN)
    throw std::overflow_error("rational arithmetic overflowed 64 bits");
  return static_cast<long long>(v);
}

} // namespace

// ---------------------------------------------------------------- Rational

Rational Rational::make(__int128 n, __int128 d) {
  if (d == 0) throw std::domain_error("rational with zero denominator");
  if (d < 0) {
    n = -n;
    d = -d;
  }
  const __int128 g = n == 0 ? d : gcd128(n, d);
  Rational r;
  r.num_ = narrow(n / g);
  r.den_ = narrow(d / g);
  return r;
}

Rational::Rational(long long n, long long d) { *this = make(n, d); }

Rational operator+(const Rational& a, const Rational& b) {
  return Rational::make(static_cast<__int128>(a.num_) * b.den_ +
                            static_cast<__int128>(b.num_) * a.den_,
                        static_cast<__int128>(a.den_) * b.den_);
}
Rational operator-(const Rational& a, const Rational& b) { return a + (-b); }
Rational operator*(const Rational& a, const Rational& b) {
  return Rational::make(static_cast<__int128>(a.num_) * b.num_,
                        static_cast<__int128>(a.den_) * b.den_);
}
Rational operator/(const Rational& a, const Rational& b) {
  if (b.is_zero()) throw std::domain_error("rational division by zero");
  return Rational::make(static_cast<__int128>(a.num_) * b.den_,
                        static_cast<__int128>(a.den_) * b.num_);
}
Rational operator-(const Rational& a) { return Rational::make(-static_cast<__int128>(a.num_), a.den_); }

std::string Rational::str() const {
  if (den_ == 1) return std::to_string(num_);
  return std::to_string(num_) + "/" + std::to_string(den_);
}

// -------------------------------------------------------------------- Poly

Poly::Poly(Rational constant) {
  if (!constant.is_zero()) c_.push_back(constant);
}

Poly Poly::symbol() {
  Poly p;
  p.c_ = {Rational(0), Rational(1)};
  return p;
}

Poly Poly::from_coeffs(std::vector<Rational> ascending) {
  Poly p;
  p.c_ = std::move(ascending);
  p.trim();
  return p;
}

void Poly::trim() {
  while (!c_.empty() && c_.back().is_zero()) c_.pop_back();
}

Rational Poly::coeff(int k) const {
  if (k < 0 || k >= static_cast<int>(c_.size())) return Rational(0);
  return c_[k];
}

Rational Poly::lead() const { return c_.empty() ? Rational(0) : c_.back(); }

double Poly::eval(double x) const {
  double acc = 0.0;
  for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * x + it->to_double();
  return acc;
}

Poly operator+(const Poly& a, const Poly& b) {
  std::vector<Rational> c(std::max(a.c_.size(), b.c_.size()));
  for (std::size_t i = 0; i < c.size(); ++i) {
    c[i] = a.coeff(static_cast<int>(i)) + b.coeff(static_cast<int>(i));
  }
  return Poly::from_coeffs(std::move(c));
}
Poly operator-(const Poly& a, const Poly& b) { return a + (-b); }
Poly operator-(const Poly& a) {
  std::vector<Rational> c(a.c_.size());
  for (std::size_t i = 0; i < c.size(); ++i) c[i] = -a.c_[i];
  return Poly::from_coeffs(std::move(c));
}
Poly operator*(const Poly& a, const Poly& b) {
  if (a.is_zero() || b.is_zero()) return Poly();
  std::vector<Rational> c(a.c_.size() + b.c_.size() - 1, Rational(0));
  for (std::size_t i = 0; i < a.c_.size(); ++i)
    for (std::size_t j = 0; j < b.c_.size(); ++j) c[i + j] = c[i + j] + a.c_[i] * b.c_[j];
  return Poly::from_coeffs(std::move(c));
}
Poly operator*(const Poly& a, const Rational& s) {
  std::vector<Rational> c(a.c_.size());
  for (std::size_t i = 0; i < c.size(); ++i) c[i] = a.c_[i] * s;
  return Poly::from_coeffs(std::move(c));
}

std::pair<Poly, Poly> Poly::divmod(const Poly& a, const Poly& b) {
  if (b.is_zero()) throw std::domain_error("polynomial division by zero");
  Poly q, r = a;
  while (!r.is_zero() && r.degree() >= b.degree()) {
    const int k = r.degree() - b.degree();
    const Rational f = r.lead() / b.lead();
    std::vector<Rational> mono(k + 1, Rational(0));
    mono[k] = f;
    const Poly m = Poly::from_coeffs(std::move(mono));
    q = q + m;
    r = r - m * b;
  }
  return {q, r};
}

Poly Poly::exact_divide(const Poly& a, const Poly& b) {
  auto [q, r] = divmod(a, b);
  if (!r.is_zero()) throw std::logic_error("inexact polynomial division");
  return q;
}

Poly Poly::gcd(Poly a, Poly b) {
  while (!b.is_zero()) {
    Poly r = divmod(a, b).second;
    if (!r.is_zero()) r = r * (Rational(1) / r.lead()); // keep coefficients small
    a = b;
    b = r;
  }
  if (!a.is_zero()) a = a * (Rational(1) / a.lead());
  return a;
}

std::string Poly::str() const {
  if (is_zero()) return "0";
  std::ostringstream os;
  bool first = true;
  for (int k = degree(); k >= 0; --k) {
    const Rational c = coeff(k);
    if (c.is_zero()) continue;
    const Rational mag = c.num() < 0 ? -c : c;
    if (first) {
      if (c.num() < 0) os << "-";
      first = false;
    } else {
      os << (c.num() < 0 ? " - " : " + ");
    }
    const bool unit = mag == Rational(1);
    if (k == 0 || !unit) os << mag.str();
    if (k >= 1) os << (k == 1 ? "β" : "β^" + std::to_string(k));
  }
  return os.str();
}

// ----------------------------------------------------------------- RatFunc

RatFunc::RatFunc(Poly n, Poly d) : num_(std::move(n)), den_(std::move(d)) { normalize(); }

void RatFunc::normalize() {
  if (den_.is_zero()) throw std::domain_error("rational function with zero denominator");
  if (num_.is_zero()) {
    den_ = Poly(Rational(1));
    return;
  }
  const Poly g = Poly::gcd(num_, den_);
  if (g.degree() > 0) {
    num_ = Poly::exact_divide(num_, g);
    den_ = Poly::exact_divide(den_, g);
  }
  const Rational lc = den_.lead();
  if (!(lc == Rational(1))) {
    const Rational inv = Rational(1) / lc;
    num_ = num_ * inv;
    den_ = den_ * inv;
  }
}

double RatFunc::eval(double x) const {
  const double d = den_.eval(x);
  if (d == 0.0) throw std::domain_error("rational function evaluated at a pole");
  return num_.eval(x) / d;
}

std::string RatFunc::str() const {
  if (den_ == Poly(Rational(1))) return num_.str();
  return "(" + num_.str() + ")/(" + den_.str() + ")";
}

RatFunc operator+(const RatFunc& a, const RatFunc& b) {
  return RatFunc(a.num() * b.den() + b.num() * a.den(), a.den() * b.den());
}
RatFunc operator-(const RatFunc& a, const RatFunc& b) { return a + (-b); }
RatFunc operator*(const RatFunc& a, const RatFunc& b) {
  return RatFunc(a.num() * b.num(), a.den() * b.den());
}
RatFunc operator/(const RatFunc& a, const RatFunc& b) {
  if (b.is_zero()) throw std::domain_error("rational function division by zero");
  return RatFunc(a.num() * b.den(), a.den() * b.num());
}
RatFunc operator-(const RatFunc& a) { return RatFunc(-a.num(), a.den()); }

// ----------------------------------------------------------- BosonOperator

BosonOperator BosonOperator::monomial(int p, int q, Poly coeff) {
  if (p < 0 || q < 0) throw std::invalid_argument("operator powers must be >= 0");
  BosonOperator x;
  if (!coeff.is_zero()) x.terms[{p, q}] = std::move(coeff);
  return x;
}

namespace {

void add_term(BosonOperator& x, Mono m, const Poly& c) {
  if (c.is_zero()) return;
  auto it = x.terms.find(m);
  if (it == x.terms.end()) {
    x.terms.emplace(m, c);
    return;
  }
  it->second = it->second + c;
  if (it->second.is_zero()) x.terms.erase(it);
}

long long binom(int n, int k) {
  if (k < 0 || k > n) return 0;
  __int128 acc = 1;
  for (int i = 1; i <= k; ++i) acc = acc * (n - k + i) / i;
  return narrow(acc);
}

long long factorial(int n) {
  __int128 acc = 1;
  for (int i = 2; i <= n; ++i) acc *= i;
  return narrow(acc);
}

} // namespace

BosonOperator operator+(const BosonOperator& x, const BosonOperator& y) {
  BosonOperator r = x;
  for (const auto& [m, c] : y.terms) add_term(r, m, c);
  return r;
}

BosonOperator operator-(const BosonOperator& x, const BosonOperator& y) {
  BosonOperator r = x;
  for (const auto& [m, c] : y.terms) add_term(r, m, -c);
  return r;
}

BosonOperator scale(const BosonOperator& x, const Poly& s) {
  BosonOperator r;
  for (const auto& [m, c] : x.terms) add_term(r, m, c * s);
  return r;
}

BosonOperator operator*(const BosonOperator& x, const BosonOperator& y) {
  // (a')^p1 a^q1 (a')^p2 a^q2
  //   = sum_k k! C(q1,k) C(p2,k) (a')^(p1+p2-k) a^(q1+q2-k)
  BosonOperator r;
  for (const auto& [mx, cx] : x.terms) {
    for (const auto& [my, cy] : y.terms) {
      const int p1 = mx.first, q1 = mx.second, p2 = my.first, q2 = my.second;
      const Poly c = cx * cy;
      const int kmax = std::min(q1, p2);
      for (int k = 0; k <= kmax; ++k) {
        const long long w = factorial(k) * binom(q1, k) * binom(p2, k);
        add_term(r, {p1 + p2 - k, q1 + q2 - k}, c * Rational(w));
      }
    }
  }
  return r;
}

BosonOperator commutator(const BosonOperator& x, const BosonOperator& y) {
  return x * y - y * x;
}

std::map<long, Poly> apply_to_number_state(const BosonOperator& x, long n) {
  if (n < 0) throw std::invalid_argument("number state index must be >= 0");
  std::map<long, Poly> out;
  for (const auto& [m, c] : x.terms) {
    const int p = m.first, q = m.second;
    if (q > n) continue;
    __int128 fall = 1;
    for (int i = 0; i < q; ++i) fall *= (n - i);
    const Poly add = c * Rational(narrow(fall));
    auto it = out.find(n - q + p);
    if (it == out.end()) {
      if (!add.is_zero()) out.emplace(n - q + p, add);
    } else {
      it->second = it->second + add;
      if (it->second.is_zero()) out.erase(it);
    }
  }
  return out;
}

std::string to_string(const BosonOperator& x) {
  if (x.is_zero()) return "0";
  std::ostringstream os;
  bool first = true;
  for (const auto& [m, c] : x.terms) {
    std::string mono;
    if (m.first > 0) mono += "a†" + (m.first > 1 ? "^" + std::to_string(m.first) : "");
    if (m.second > 0) mono += std::string(mono.empty() ? "" : " ") + "a" +
                              (m.second > 1 ? "^" + std::to_string(m.second) : "");
    if (mono.empty()) mono = "I";

    // pull the sign out of single-term coefficients for readability
    std::string cs = c.str();
    bool neg = false;
    if (c.degree() >= 0) {
      int nonzero = 0;
      for (int k = 0; k <= c.degree(); ++k)
        if (!c.coeff(k).is_zero()) ++nonzero;
      if (nonzero == 1 && cs.size() > 0 && cs[0] == '-') {
        neg = true;
        cs = cs.substr(1);
      } else if (nonzero > 1) {
        cs = "(" + cs + ")";
      }
    }
    if (first) {
      if (neg) os << "-";
      first = false;
    } else {
      os << (neg ? " - " : " + ");
    }
    if (cs == "1" && mono != "I") {
      os << mono;
    } else if (mono == "I") {
      os << cs;
    } else {
      os << cs << " " << mono;
    }
  }
  return os.str();
}

// ------------------------------------------------------------ span algebra

namespace {

struct Reduced {
  std::map<Mono, RatFunc> coords;
  Mono pivot{};
  std::vector<RatFunc> combo; // expression in terms of inserted originals
};

class LinearBasis {
public:
  int size() const { return static_cast<int>(rows_.size()); }

  // Reduces x against the rows. If dependent, returns its expansion in the
  // inserted originals. If independent: inserts when do_insert, returns
  // nullopt either way.
  std::optional<std::vector<RatFunc>> reduce(const BosonOperator& x, bool do_insert) {
    std::map<Mono, RatFunc> coords;
    for (const auto& [m, c] : x.terms) coords.emplace(m, RatFunc(c));
    std::vector<RatFunc> alpha(n_inserted_ + 1);
    for (const auto& row : rows_) {
      const auto it = coords.find(row.pivot);
      if (it == coords.end() || it->second.is_zero()) continue;
      const RatFunc f = it->second;
      for (const auto& [m, c] : row.coords) {
        auto jt = coords.find(m);
        if (jt == coords.end()) {
          coords.emplace(m, -(f * c));
        } else {
          jt->second = jt->second - f * c;
          if (jt->second.is_zero()) coords.erase(jt);
        }
      }
      for (std::size_t j = 0; j < row.combo.size(); ++j)
        alpha[j] = alpha[j] + f * row.combo[j];
    }
    for (auto it = coords.begin(); it != coords.end();)
      it = it->second.is_zero() ? coords.erase(it) : std::next(it);
    if (coords.empty()) {
      alpha.resize(n_inserted_);
      return alpha;
    }
    if (do_insert) {
      Reduced row;
      const Mono pivot = coords.begin()->first;
      const RatFunc pc = coords.begin()->second;
      for (const auto& [m, c] : coords) row.coords.emplace(m, c / pc);
      row.pivot = pivot;
      row.combo.assign(n_inserted_ + 1, RatFunc());
      for (std::size_t j = 0; j < alpha.size(); ++j) row.combo[j] = -(alpha[j] / pc);
      row.combo[n_inserted_] = RatFunc(Poly(Rational(1))) / pc;
      rows_.push_back(std::move(row));
      ++n_inserted_;
    }
    return std::nullopt;
  }

private:
  std::vector<Reduced> rows_;
  int n_inserted_ = 0;
};

} // namespace

ClosureReport lie_closure(const std::vector<BosonOperator>& generators,
                          const std::vector<std::string>& labels, int max_dim) {
  if (max_dim < 1) throw std::invalid_argument("max_dim must be >= 1");
  ClosureReport rep;
  rep.max_dim = max_dim;

  LinearBasis span;
  std::deque<std::pair<int, int>> work;
  auto retain = [&](const BosonOperator& x, std::string label,
                    std::string provenance) -> bool {
    if (static_cast<int>(rep.basis.size()) >= max_dim) return false;
    const int n = static_cast<int>(rep.basis.size());
    rep.basis.push_back(x);
    rep.labels.push_back(std::move(label));
    if (!provenance.empty()) rep.witness.push_back(std::move(provenance));
    for (int k = 0; k < n; ++k) work.emplace_back(k, n);
    return true;
  };

  for (std::size_t i = 0; i < generators.size(); ++i) {
    if (generators[i].is_zero()) continue;
    if (span.reduce(generators[i], true).has_value()) continue; // dependent generator
    std::string label = i < labels.size() ? labels[i] : to_string(generators[i]);
    if (!retain(generators[i], std::move(label), "")) {
      rep.closed = false;
      rep.dimension = static_cast<int>(rep.basis.size());
      rep.witness.push_back("independent generator beyond the cutoff: " +
                            to_string(generators[i]));
      return rep;
    }
  }

  while (!work.empty()) {
    const auto [i, j] = work.front();
    work.pop_front();
    const BosonOperator w = commutator(rep.basis[i], rep.basis[j]);
    if (w.is_zero()) continue;
    if (span.reduce(w, false).has_value()) continue; // already in the span
    span.reduce(w, true);
    const std::string prov =
        "[" + rep.labels[i] + ", " + rep.labels[j] + "] = " + to_string(w);
    if (!retain(w, to_string(w), prov)) {
      rep.closed = false;
      rep.dimension = static_cast<int>(rep.basis.size());
      rep.witness.push_back(prov + "  <- escaped: adding it would exceed max_dim=" +
                            std::to_string(max_dim));
      return rep;
    }
  }

  rep.closed = true;
  rep.dimension = static_cast<int>(rep.basis.size());
  rep.witness.clear(); // chains only reported for escapes
  return rep;
}

std::vector<std::vector<std::vector<double>>>
structure_constants(const std::vector<BosonOperator>& basis, double beta_value) {
  const int L = static_cast<int>(basis.size());
  LinearBasis span;
  for (const auto& b : basis)
    if (b.is_zero() || span.reduce(b, true).has_value())
      throw std::invalid_argument("structure constants need a linearly independent basis");

  std::vector<std::vector<std::vector<RatFunc>>> sym(
      L, std::vector<std::vector<RatFunc>>(L, std::vector<RatFunc>(L)));
  for (int i = 0; i < L; ++i) {
    for (int j = 0; j < L; ++j) {
      if (i == j) continue;
      const BosonOperator w = commutator(basis[i], basis[j]);
      if (w.is_zero()) continue;
      auto alpha = span.reduce(w, false);
      if (!alpha.has_value())
        throw NotClosedError("commutator [" + to_string(basis[i]) + ", " +
                             to_string(basis[j]) + "] left the span");
      sym[i][j] = std::move(*alpha);
    }
  }
  // antisymmetry must hold exactly in the symbolic expansion
  for (int i = 0; i < L; ++i)
    for (int j = 0; j < L; ++j)
      for (int k = 0; k < L; ++k)
        if (!((sym[i][j][k] + sym[j][i][k]).is_zero()))
          throw std::logic_error("structure constants lost antisymmetry");

  std::vector<std::vector<std::vector<double>>> c(
      L, std::vector<std::vector<double>>(L, std::vector<double>(L, 0.0)));
  for (int i = 0; i < L; ++i)
    for (int j = 0; j < L; ++j)
      for (int k = 0; k < L; ++k) c[i][j][k] = sym[i][j][k].eval(beta_value);
  return c;
}

std::vector<BosonOperator> product_basis() {
  const Poly one(Rational(1));
  const Poly beta = Poly::symbol();
  // a'(beta + a'a) = beta a' + a' a' a
  BosonOperator H2 = BosonOperator::monomial(1, 0, beta) + BosonOperator::monomial(2, 1, one);
  return {BosonOperator::monomial(0, 0), std::move(H2), BosonOperator::monomial(0, 1),
          BosonOperator::monomial(1, 1)};
}

std::vector<std::string> product_basis_labels() {
  return {"I", "a†(β+a†a)", "a", "a†a"};
}

std::vector<BosonOperator> naive_basis() {
  return {BosonOperator::monomial(0, 0), BosonOperator::monomial(1, 0),
          BosonOperator::monomial(0, 1), BosonOperator::monomial(1, 1),
          BosonOperator::monomial(2, 1)};
}

std::vector<std::string> naive_basis_labels() {
  return {"I", "a†", "a", "a†a", "a†a†a"};
}

} // namespace bdlie
