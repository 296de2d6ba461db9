#pragma once

#include <algorithm>
#include <string>

#include "tipgm/errors.hpp"
#include "tipgm/expansion.hpp"
#include "tipgm/rational.hpp"

namespace tipgm {

// --- square roots ---------------------------------------------------------

enum class SqrtObstruction { none, odd_valuation, nonresidue, two_adic_unit };

inline std::string to_string(SqrtObstruction o) {
  switch (o) {
    case SqrtObstruction::none: return "none";
    case SqrtObstruction::odd_valuation: return "odd valuation";
    case SqrtObstruction::nonresidue: return "unit part is a quadratic nonresidue";
    case SqrtObstruction::two_adic_unit: return "unit part is not 1 mod 8";
  }
  return "?";
}

struct SqrtVerdict {
  bool exists;
  SqrtObstruction obstruction;
};

namespace detail {

// Valuation and rational unit part: a = p^v * (num_rest/den_rest).
struct UnitSplit {
  long v;
  Int num_rest;
  Int den_rest;
};

inline UnitSplit unit_split(const Int& p, const Rational& a) {
  UnitSplit s;
  long vn = static_cast<long>(
      mpz_remove(s.num_rest.get_mpz_t(), a.get_num().get_mpz_t(), p.get_mpz_t()));
  long vd = static_cast<long>(
      mpz_remove(s.den_rest.get_mpz_t(), a.get_den().get_mpz_t(), p.get_mpz_t()));
  s.v = vn - vd;
  return s;
}

// Unit part of a as an integer mod p^N.
inline Int unit_mod(const Int& p, const Rational& a, long N) {
  UnitSplit s = unit_split(p, a);
  Int m = pow_int(p, static_cast<unsigned long>(N));
  return mod_pos(s.num_rest * inv_mod(s.den_rest, m), m);
}

// Tonelli-Shanks: r with r^2 = u mod p, for odd prime p and residue u.
inline Int sqrt_mod_p(const Int& p, const Int& u0) {
  Int u = mod_pos(u0, p);
  if (p % 4 == 3) return powm(u, Int((p + 1) / 4), p);
  Int q = p - 1;
  unsigned long s = mpz_remove(q.get_mpz_t(), q.get_mpz_t(), Int(2).get_mpz_t());
  Int z = 2;
  while (mpz_legendre(z.get_mpz_t(), p.get_mpz_t()) != -1) ++z;
  Int m(static_cast<long>(s));
  Int c = powm(z, q, p);
  Int t = powm(u, q, p);
  Int r = powm(u, Int((q + 1) / 2), p);
  while (t != 1) {
    Int tt = t;
    long i = 0;
    while (tt != 1) {
      tt = mod_pos(tt * tt, p);
      ++i;
    }
    Int b = c;
    for (Int j = 0; j < m - i - 1; ++j) b = mod_pos(b * b, p);
    m = i;
    c = mod_pos(b * b, p);
    t = mod_pos(t * c, p);
    r = mod_pos(r * b, p);
  }
  return r;
}

}  // namespace detail

// Square-root criterion: a nonzero a = p^v * u has a square root iff v is
// even and the unit u is a square unit (residue mod p for odd p; 1 mod 8 for
// p = 2). Zero trivially has the root zero.
inline SqrtVerdict sqrt_exists(const Int& p, const Rational& a) {
  require_prime(p);
  if (a == 0) return {true, SqrtObstruction::none};
  detail::UnitSplit s = detail::unit_split(p, a);
  if (s.v % 2 != 0) return {false, SqrtObstruction::odd_valuation};
  if (p == 2) {
    Int u = detail::unit_mod(p, a, 3);
    if (u != 1) return {false, SqrtObstruction::two_adic_unit};
    return {true, SqrtObstruction::none};
  }
  Int u = detail::unit_mod(p, a, 1);
  if (mpz_legendre(u.get_mpz_t(), p.get_mpz_t()) != 1)
    return {false, SqrtObstruction::nonresidue};
  return {true, SqrtObstruction::none};
}

// Canonical square root to `digits` unit digits: the branch whose leading
// digit is <= (p-1)/2 for odd p, and the branch = 1 mod 4 for p = 2.
inline Expansion padic_sqrt(const Int& p, const Rational& a, long digits) {
  require_prime(p);
  if (digits < 1) throw error("padic_sqrt: precision must be >= 1");
  if (a == 0) return Expansion::zero(p);
  SqrtVerdict verdict = sqrt_exists(p, a);
  if (!verdict.exists)
    throw no_square_root("no square root of " + rational_str(a) + " in Q_" + p.get_str() +
                         ": " + to_string(verdict.obstruction));
  long v = detail::unit_split(p, a).v;
  const long N = digits;
  Int r;
  if (p == 2) {
    long T = std::max(N, 3L);
    Int u = detail::unit_mod(p, a, T + 1);
    Int two_j1 = 16;  // 2^{j+1} for j = 3
    r = 1;
    for (long j = 3; j <= T; ++j) {
      if (detail::mod_pos(r * r - u, two_j1) != 0) r += pow_int(p, static_cast<unsigned long>(j - 1));
      two_j1 *= 2;
    }
    r = detail::mod_pos(r, pow_int(p, static_cast<unsigned long>(N)));
  } else {
    Int u = detail::unit_mod(p, a, N);
    r = detail::sqrt_mod_p(p, u);
    long prec = 1;
    while (prec < N) {
      prec = std::min(2 * prec, N);
      Int m = pow_int(p, static_cast<unsigned long>(prec));
      r = detail::mod_pos((r + detail::mod_pos(u, m) * detail::inv_mod(r, m)) *
                              detail::inv_mod(Int(2), m),
                          m);
    }
    if (detail::mod_pos(r, p) > (p - 1) / 2)
      r = pow_int(p, static_cast<unsigned long>(N)) - r;
  }
  return Expansion::make(p, v / 2, r, N);
}

// --- exponential and logarithm --------------------------------------------

// exp converges on val(x) >= 1 (odd p) / >= 2 (p = 2); the same threshold
// bounds the multiplicative domain {z : val(z-1) >= threshold}.
inline long exp_domain_threshold(const Int& p) { return p == 2 ? 2 : 1; }

inline bool in_exp_domain(const Int& p, const Rational& x) {
  require_prime(p);
  return valuation(p, x).at_least(exp_domain_threshold(p));
}

// exp(x) as a truncated expansion with `digits` digits; exp(x) is a unit, so
// the result is exact mod p^digits.
inline Expansion exp_p(const Int& p, const Rational& x, long digits) {
  require_prime(p);
  if (digits < 1) throw error("exp_p: precision must be >= 1");
  if (!in_exp_domain(p, x))
    throw outside_domain("exp_p: need val(x) >= " + std::to_string(exp_domain_threshold(p)) +
                         ", got val = " + (x == 0 ? std::string("inf")
                                                  : std::to_string(valuation(p, x).get())));
  if (x == 0) return Expansion::one(p, digits);
  const long A = digits;
  const long v = valuation(p, x).get();
  // val(x^n/n!) >= n*v - (n-1)/(p-1) >= A once n >= (A(p-1)-1)/(v(p-1)-1).
  Int pm1 = p - 1;
  Int denom = v * pm1 - 1;
  Int n_stop;
  mpz_cdiv_q(n_stop.get_mpz_t(), Int(A * pm1 - 1).get_mpz_t(), denom.get_mpz_t());
  Rational sum(1), term(1);
  for (Int n = 1; n <= n_stop; ++n) {
    term *= x;
    term /= Rational(n);
    sum += term;
  }
  return expand(p, sum, A);
}

// log(z) for val(z-1) >= 1, with `digits` unit digits of the result; the
// result is exact mod p^{val(z-1)+digits}.
inline Expansion log_p(const Int& p, const Rational& z, long digits) {
  require_prime(p);
  if (digits < 1) throw error("log_p: precision must be >= 1");
  Rational x = z - 1;
  if (!valuation(p, x).at_least(1))
    throw outside_domain("log_p: need val(z-1) >= 1, got val = " +
                         (x == 0 ? std::string("inf")
                                 : std::to_string(valuation(p, x).get())));
  if (x == 0) return Expansion::zero(p);
  const long w = valuation(p, x).get();
  const long A = w + digits;
  // Sum n = 1..M of (-1)^{n+1} x^n / n, with M large enough that every later
  // term has val = n*w - val(n) >= A. It suffices that (M+1)*w minus the
  // largest possible val over n > M is >= A, checked separately for n below
  // and at/above the next power of p.
  auto floor_log = [&p](long n) {
    long j = 0;
    Int pw = p;
    while (pw <= n) {
      pw *= p;
      ++j;
    }
    return j;
  };
  long M = 0;
  for (;; ++M) {
    if ((M + 1) * w - floor_log(M + 1) < A) continue;
    long j0 = 0;
    Int pw = 1;
    while (pw <= M) {
      pw *= p;
      ++j0;
    }
    if (Int(pw * w - j0) >= A) break;
  }
  Rational sum(0), xpow(1);
  for (long n = 1; n <= M; ++n) {
    xpow *= x;
    Rational term = xpow / Rational(n);
    if (n % 2 == 0) term = -term;
    sum += term;
  }
  Valuation vs = valuation(p, sum);
  if (!(vs < Valuation::of(A)))
    throw precision_exhausted("log_p: result indistinguishable from 0 mod p^" +
                              std::to_string(A));
  return expand(p, sum, A - vs.get());
}

// Overloads on truncated inputs: exp and log are isometries near the
// identity, so the result is trusted exactly to the input's absolute
// precision and clamped there.
inline Expansion exp_p(const Expansion& x) {
  const Int& p = x.prime();
  if (x.is_zero()) return Expansion::one(p, default_precision);
  if (x.valuation_exp() < exp_domain_threshold(p))
    throw outside_domain("exp_p: need val(x) >= " +
                         std::to_string(exp_domain_threshold(p)) + ", got val = " +
                         std::to_string(x.valuation_exp()));
  return exp_p(p, x.representative(), x.abs_precision());
}

inline Expansion log_p(const Expansion& z) {
  const Int& p = z.prime();
  Expansion x = z - Expansion::one(p, z.precision());  // throws if z = 1 to full precision
  long digits = z.abs_precision() - x.valuation_exp();
  if (digits < 1)
    throw precision_exhausted("log_p: input too close to 1 for its precision");
  return log_p(p, z.representative(), digits);
}

}  // namespace tipgm
