#pragma once

#include <string>
#include <vector>

#include "tipgm/errors.hpp"
#include "tipgm/rational.hpp"

namespace tipgm {

namespace detail {

inline Int mod_pos(const Int& a, const Int& m) {
  Int r;
  mpz_mod(r.get_mpz_t(), a.get_mpz_t(), m.get_mpz_t());
  return r;
}

inline Int inv_mod(const Int& a, const Int& m) {
  Int r;
  if (mpz_invert(r.get_mpz_t(), a.get_mpz_t(), m.get_mpz_t()) == 0)
    throw division_by_zero("no inverse of " + a.get_str() + " modulo " + m.get_str());
  return r;
}

inline Int powm(const Int& b, const Int& e, const Int& m) {
  Int r;
  mpz_powm(r.get_mpz_t(), b.get_mpz_t(), e.get_mpz_t(), m.get_mpz_t());
  return r;
}

}  // namespace detail

// Truncated canonical p-adic expansion: the value p^v * (d0 + d1 p + ...)
// held as p^v * unit with unit in [0, p^prec), d0 != 0, i.e. the value is
// known exactly modulo p^{v+prec}. The only representable zero is the exact
// zero (from the rational 0); arithmetic that would cancel every known digit
// throws precision_exhausted instead of fabricating one.
class Expansion {
 public:
  static Expansion zero(const Int& p) {
    require_prime(p);
    Expansion e;
    e.p_ = p;
    e.zero_ = true;
    return e;
  }

  static Expansion one(const Int& p, long prec) { return make(p, 0, 1, prec); }

  static Expansion make(const Int& p, long v, const Int& unit, long prec) {
    require_prime(p);
    if (prec < 1) throw precision_exhausted("expansion with no digits");
    Expansion e;
    e.p_ = p;
    e.zero_ = false;
    Int m = pow_int(p, static_cast<unsigned long>(prec));
    Int u = detail::mod_pos(unit, m);
    if (u == 0)
      throw precision_exhausted("all " + std::to_string(prec) + " known digits cancelled");
    Int rest;
    long t = static_cast<long>(mpz_remove(rest.get_mpz_t(), u.get_mpz_t(), p.get_mpz_t()));
    if (t >= prec) throw precision_exhausted("all known digits cancelled");
    e.v_ = v + t;
    e.unit_ = rest;
    e.prec_ = prec - t;
    return e;
  }

  const Int& prime() const { return p_; }
  bool is_zero() const { return zero_; }

  long valuation_exp() const {
    if (zero_) throw error("expansion: zero has no finite valuation");
    return v_;
  }
  Valuation valuation() const {
    return zero_ ? Valuation::infinity() : Valuation::of(v_);
  }
  NormExponent norm() const { return NormExponent::from(valuation()); }

  long precision() const {
    if (zero_) throw error("expansion: zero has no digit precision");
    return prec_;
  }
  // The value is known exactly modulo p^{abs_precision()}.
  long abs_precision() const {
    if (zero_) throw error("expansion: zero has unlimited precision");
    return v_ + prec_;
  }
  const Int& unit() const {
    if (zero_) throw error("expansion: zero has no unit part");
    return unit_;
  }
  Int modulus() const { return pow_int(p_, static_cast<unsigned long>(prec_)); }

  // Exact rational representative p^v * unit of the known digits.
  Rational representative() const {
    if (zero_) return Rational(0);
    Rational r(unit_);
    if (v_ >= 0) {
      r *= Rational(pow_int(p_, static_cast<unsigned long>(v_)));
    } else {
      r /= Rational(pow_int(p_, static_cast<unsigned long>(-v_)));
    }
    return r;
  }

  Int digit(long i) const {
    if (zero_ || i < 0 || i >= prec_) throw error("expansion: digit index out of range");
    Int q, d;
    mpz_fdiv_q(q.get_mpz_t(), unit_.get_mpz_t(),
               pow_int(p_, static_cast<unsigned long>(i)).get_mpz_t());
    mpz_mod(d.get_mpz_t(), q.get_mpz_t(), p_.get_mpz_t());
    return d;
  }

  std::vector<Int> digits() const {
    if (zero_) return {};
    std::vector<Int> out;
    out.reserve(static_cast<std::size_t>(prec_));
    Int rest = unit_;
    for (long i = 0; i < prec_; ++i) {
      Int d;
      mpz_fdiv_qr(rest.get_mpz_t(), d.get_mpz_t(), rest.get_mpz_t(), p_.get_mpz_t());
      out.push_back(d);
    }
    return out;
  }

  // Canonical digit form: "p^v * (d0 + d1*p + d2*p^2 + ...) + O(p^{v+N})".
  std::string str() const {
    if (zero_) return "0";
    std::string s = p_.get_str() + "^" + std::to_string(v_) + " * (";
    const std::vector<Int> ds = digits();
    for (long i = 0; i < prec_; ++i) {
      if (i > 0) s += " + ";
      s += ds[static_cast<std::size_t>(i)].get_str();
      if (i == 1) s += "*" + p_.get_str();
      if (i > 1) s += "*" + p_.get_str() + "^" + std::to_string(i);
    }
    s += ") + O(" + p_.get_str() + "^" + std::to_string(v_ + prec_) + ")";
    return s;
  }

  // Integer-representative form: "81 + O(5^3)"; for negative valuation the
  // representative is printed as unit/p^k.
  std::string str_compact() const {
    if (zero_) return "0";
    std::string head;
    if (v_ >= 0) {
      head = Int(unit_ * pow_int(p_, static_cast<unsigned long>(v_))).get_str();
    } else {
      head = unit_.get_str() + "/" + pow_int(p_, static_cast<unsigned long>(-v_)).get_str();
    }
    return head + " + O(" + p_.get_str() + "^" + std::to_string(v_ + prec_) + ")";
  }

  Expansion operator-() const {
    if (zero_) return *this;
    return make(p_, v_, modulus() - unit_, prec_);
  }

  friend Expansion operator+(const Expansion& a, const Expansion& b) {
    a.check_same_prime(b);
    if (a.zero_) return b;
    if (b.zero_) return a;
    long v = std::min(a.v_, b.v_);
    long abs = std::min(a.abs_precision(), b.abs_precision());
    long rel = abs - v;
    const Int& p = a.p_;
    Int m = pow_int(p, static_cast<unsigned long>(rel));
    Int s = detail::mod_pos(a.unit_ * pow_int(p, static_cast<unsigned long>(a.v_ - v)) +
                                b.unit_ * pow_int(p, static_cast<unsigned long>(b.v_ - v)),
                            m);
    return make(p, v, s, rel);
  }

  friend Expansion operator-(const Expansion& a, const Expansion& b) { return a + (-b); }

  friend Expansion operator*(const Expansion& a, const Expansion& b) {
    a.check_same_prime(b);
    if (a.zero_ || b.zero_) return zero(a.p_);
    long prec = std::min(a.prec_, b.prec_);
    Int m = pow_int(a.p_, static_cast<unsigned long>(prec));
    return make(a.p_, a.v_ + b.v_, detail::mod_pos(a.unit_ * b.unit_, m), prec);
  }

  friend Expansion operator/(const Expansion& a, const Expansion& b) {
    a.check_same_prime(b);
    if (b.zero_) throw division_by_zero("expansion division by zero");
    if (a.zero_) return zero(a.p_);
    long prec = std::min(a.prec_, b.prec_);
    Int m = pow_int(a.p_, static_cast<unsigned long>(prec));
    return make(a.p_, a.v_ - b.v_, detail::mod_pos(a.unit_ * detail::inv_mod(b.unit_, m), m),
                prec);
  }

  Expansion pow(long e) const {
    if (zero_) {
      if (e > 0) return *this;
      if (e == 0) throw zero_input("expansion: 0^0");
      throw division_by_zero("expansion: negative power of zero");
    }
    if (e == 0) return one(p_, prec_);
    Int m = modulus();
    Int base = e > 0 ? unit_ : detail::inv_mod(unit_, m);
    Int r = detail::powm(base, Int(e > 0 ? e : -e), m);
    return make(p_, v_ * e, r, prec_);
  }

  // Expansions are equal when their digit sequences agree on the overlap of
  // their precisions (and primes and valuations match).
  friend bool operator==(const Expansion& a, const Expansion& b) {
    if (a.p_ != b.p_) return false;
    if (a.zero_ || b.zero_) return a.zero_ == b.zero_;
    if (a.v_ != b.v_) return false;
    long prec = std::min(a.prec_, b.prec_);
    Int m = pow_int(a.p_, static_cast<unsigned long>(prec));
    return detail::mod_pos(a.unit_, m) == detail::mod_pos(b.unit_, m);
  }
  friend bool operator!=(const Expansion& a, const Expansion& b) { return !(a == b); }

 private:
  Expansion() : p_(0), zero_(true), v_(0), unit_(0), prec_(0) {}
  void check_same_prime(const Expansion& o) const {
    if (p_ != o.p_)
      throw error("expansion: mixed primes " + p_.get_str() + " and " + o.p_.get_str());
  }

  Int p_;
  bool zero_;
  long v_;
  Int unit_;
  long prec_;
};

// First N digits of the canonical expansion of a rational.
inline Expansion expand(const Int& p, const Rational& r, long N) {
  require_prime(p);
  if (N < 1) throw error("expand: precision must be >= 1");
  if (r == 0) return Expansion::zero(p);
  Int num_rest, den_rest;
  long vn = static_cast<long>(
      mpz_remove(num_rest.get_mpz_t(), r.get_num().get_mpz_t(), p.get_mpz_t()));
  long vd = static_cast<long>(
      mpz_remove(den_rest.get_mpz_t(), r.get_den().get_mpz_t(), p.get_mpz_t()));
  Int m = pow_int(p, static_cast<unsigned long>(N));
  Int u = detail::mod_pos(num_rest * detail::inv_mod(den_rest, m), m);
  return Expansion::make(p, vn - vd, u, N);
}

}  // namespace tipgm
