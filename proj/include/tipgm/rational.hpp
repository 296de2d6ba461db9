#pragma once

#include <gmpxx.h>

#include <compare>
#include <string>

#include "tipgm/errors.hpp"

namespace tipgm {

using Int = mpz_class;
using Rational = mpq_class;

inline constexpr long default_precision = 64;

inline bool is_prime(const Int& p) {
  if (p < 2) return false;
  return mpz_probab_prime_p(p.get_mpz_t(), 32) != 0;
}

inline void require_prime(const Int& p) {
  if (!is_prime(p)) throw invalid_prime("not a prime: " + p.get_str());
}

// p^e for e >= 0.
inline Int pow_int(const Int& p, unsigned long e) {
  Int r;
  mpz_pow_ui(r.get_mpz_t(), p.get_mpz_t(), e);
  return r;
}

// The exponent of p in a rational, with +infinity for 0.
class Valuation {
 public:
  static Valuation infinity() { return Valuation(true, 0); }
  static Valuation of(long v) { return Valuation(false, v); }

  bool is_infinity() const { return inf_; }
  long get() const {
    if (inf_) throw error("valuation: +infinity has no finite value");
    return v_;
  }
  // v >= t, treating +infinity as larger than any threshold.
  bool at_least(long t) const { return inf_ || v_ >= t; }

  friend bool operator==(const Valuation& a, const Valuation& b) {
    return a.inf_ == b.inf_ && (a.inf_ || a.v_ == b.v_);
  }
  friend std::strong_ordering operator<=>(const Valuation& a, const Valuation& b) {
    if (a.inf_ && b.inf_) return std::strong_ordering::equal;
    if (a.inf_) return std::strong_ordering::greater;
    if (b.inf_) return std::strong_ordering::less;
    return a.v_ <=> b.v_;
  }

  Valuation operator+(const Valuation& o) const {
    if (inf_ || o.inf_) return infinity();
    return of(v_ + o.v_);
  }

 private:
  Valuation(bool inf, long v) : inf_(inf), v_(v) {}
  bool inf_;
  long v_;
};

inline Valuation valuation(const Int& p, const Int& n) {
  require_prime(p);
  if (n == 0) return Valuation::infinity();
  Int rest;
  mp_bitcnt_t v = mpz_remove(rest.get_mpz_t(), n.get_mpz_t(), p.get_mpz_t());
  return Valuation::of(static_cast<long>(v));
}

inline Valuation valuation(const Int& p, const Rational& r) {
  require_prime(p);
  if (r == 0) return Valuation::infinity();
  Int rest;
  mp_bitcnt_t vn = mpz_remove(rest.get_mpz_t(), r.get_num().get_mpz_t(), p.get_mpz_t());
  mp_bitcnt_t vd = mpz_remove(rest.get_mpz_t(), r.get_den().get_mpz_t(), p.get_mpz_t());
  return Valuation::of(static_cast<long>(vn) - static_cast<long>(vd));
}

// |x|_p encoded by its exponent: |x|_p = p^{-e}, with a distinguished zero.
// Comparisons order by actual norm size, so a larger exponent means a
// *smaller* norm and |0| is the smallest of all.
class NormExponent {
 public:
  static NormExponent zero() { return NormExponent(true, 0); }
  static NormExponent of(long e) { return NormExponent(false, e); }
  static NormExponent from(const Valuation& v) {
    return v.is_infinity() ? zero() : of(-v.get());  // |x| = p^{-val(x)}
  }

  bool is_zero() const { return zero_; }
  long exponent() const {  // the e in |x| = p^e
    if (zero_) throw error("norm: |0| has no finite exponent");
    return e_;
  }

  friend bool operator==(const NormExponent& a, const NormExponent& b) {
    return a.zero_ == b.zero_ && (a.zero_ || a.e_ == b.e_);
  }
  friend std::strong_ordering operator<=>(const NormExponent& a, const NormExponent& b) {
    if (a.zero_ && b.zero_) return std::strong_ordering::equal;
    if (a.zero_) return std::strong_ordering::less;  // |0| below every p^e
    if (b.zero_) return std::strong_ordering::greater;
    return a.e_ <=> b.e_;
  }

  NormExponent operator*(const NormExponent& o) const {  // |xy| = |x||y|
    if (zero_ || o.zero_) return zero();
    return of(e_ + o.e_);
  }

 private:
  NormExponent(bool z, long e) : zero_(z), e_(e) {}
  bool zero_;
  long e_;
};

inline NormExponent norm(const Int& p, const Rational& r) {
  return NormExponent::from(valuation(p, r));
}

// "p^-e" with the sign of the printed exponent flipped relative to the
// valuation (|63|_3 = 3^-2), "0" for zero.
inline std::string norm_str(const Int& p, const NormExponent& n) {
  if (n.is_zero()) return "0";
  return p.get_str() + "^" + std::to_string(n.exponent());
}

// Accepts `a` or `a/b` with an optional leading '-'; nothing else.
inline Rational parse_rational(const std::string& s) {
  const auto bad = [&]() -> parse_error {
    return parse_error("malformed rational: '" + s + "' (expected a or a/b)");
  };
  if (s.empty()) throw bad();
  std::size_t i = s[0] == '-' ? 1 : 0;
  std::size_t slash = std::string::npos;
  if (i == s.size()) throw bad();
  for (std::size_t j = i; j < s.size(); ++j) {
    if (s[j] == '/') {
      if (slash != std::string::npos || j == i || j + 1 == s.size()) throw bad();
      slash = j;
    } else if (s[j] < '0' || s[j] > '9') {
      throw bad();
    }
  }
  Rational r;
  if (mpq_set_str(r.get_mpq_t(), s.c_str(), 10) != 0) throw bad();
  if (r.get_den() == 0) throw division_by_zero("rational with zero denominator: '" + s + "'");
  r.canonicalize();
  return r;
}

inline std::string rational_str(const Rational& r) { return r.get_str(); }

}  // namespace tipgm
