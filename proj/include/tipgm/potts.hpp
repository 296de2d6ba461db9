#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tipgm/errors.hpp"
#include "tipgm/expansion.hpp"
#include "tipgm/functions.hpp"
#include "tipgm/rational.hpp"

namespace tipgm {

// E_p = {z : val(z - 1) >= 1 (p odd) / >= 2 (p = 2)}, the range of exp_p.
inline long ep_threshold(const Int& p) { return exp_domain_threshold(p); }

inline bool in_Ep(const Int& p, const Rational& z) {
  require_prime(p);
  if (z == 0) return false;
  return valuation(p, z - 1).at_least(ep_threshold(p));
}

// Membership for a truncated value: definite verdict, or precision_exhausted
// when the known digits cannot separate z from the boundary of E_p.
inline bool in_Ep(const Expansion& z) {
  const Int& p = z.prime();
  const long t = ep_threshold(p);
  if (z.is_zero()) return false;
  if (z.valuation_exp() != 0) return false;  // val(z-1) = min(val z, 0) < 1
  try {
    Expansion d = z - Expansion::one(p, z.precision());
    return d.valuation_exp() >= t;
  } catch (const precision_exhausted&) {
    if (z.abs_precision() >= t) return true;  // val(z-1) >= abs precision >= t
    throw;
  }
}

namespace detail {

inline Rational pow_rational(const Rational& r, unsigned long e) {
  Rational out(pow_int(Int(r.get_num()), e));
  out /= Rational(pow_int(Int(r.get_den()), e));
  return out;
}

}  // namespace detail

struct ModelParams {
  Int p;
  int q = 0;
  int k = 2;
  Rational theta;
  // Set when theta is itself a truncation (theta = exp of a coupling, known
  // only modulo p^A). Valuation reads through the helpers below then refuse
  // to answer questions the known digits cannot decide.
  std::optional<long> theta_abs_prec;

  static ModelParams make(const Int& p, int q, int k, const Rational& theta,
                          bool allow_out_of_domain = false,
                          std::optional<long> theta_abs_prec = std::nullopt) {
    require_prime(p);
    if (q < 2) throw outside_domain("q must be >= 2, got " + std::to_string(q));
    if (k < 1) throw outside_domain("k must be >= 1, got " + std::to_string(k));
    if (theta_abs_prec && *theta_abs_prec < 1)
      throw error("theta_abs_prec must be >= 1");
    if (!allow_out_of_domain && !in_Ep(p, theta))
      throw outside_domain("theta = " + rational_str(theta) + " is not in E_" +
                           p.get_str() + ": val(theta-1) must be >= " +
                           std::to_string(ep_threshold(p)));
    return ModelParams{p, q, k, theta, theta_abs_prec};
  }

  // val(theta - c), refusing when theta's known digits leave it ambiguous.
  Valuation val_theta_minus(const Rational& c) const {
    Valuation v = valuation(p, theta - c);
    if (theta_abs_prec && !(v < Valuation::of(*theta_abs_prec)))
      throw precision_exhausted("val(theta - " + rational_str(c) +
                                ") is not determined by theta known mod " + p.get_str() +
                                "^" + std::to_string(*theta_abs_prec));
    return v;
  }

  // Exact equality theta == c, refusing when undecidable at the known precision.
  bool theta_is(const Rational& c) const {
    if (!theta_abs_prec) return theta == c;
    if (valuation(p, theta - c).at_least(*theta_abs_prec))
      throw precision_exhausted("cannot distinguish theta from " + rational_str(c) +
                                " with theta known mod " + p.get_str() + "^" +
                                std::to_string(*theta_abs_prec));
    return false;
  }
};

// --- the compatibility recursion -------------------------------------------

using BoundaryField = std::vector<Rational>;

// One application of the translation-invariant consistency map on the q-1
// boundary ratios: z_i -> (((theta-1) z_i + S + 1) / (theta + S))^k, S = sum z_j.
inline BoundaryField recursion_rhs(const ModelParams& mp, const BoundaryField& z) {
  if (static_cast<int>(z.size()) != mp.q - 1)
    throw error("boundary field must have q-1 = " + std::to_string(mp.q - 1) +
                " entries, got " + std::to_string(z.size()));
  for (const Rational& zi : z)
    if (zi == 0) throw outside_domain("boundary field entries must be nonzero");
  Rational S(0);
  for (const Rational& zi : z) S += zi;
  Rational den = mp.theta + S;
  if (den == 0) throw pole_at_input("recursion denominator theta + sum(z) vanishes");
  BoundaryField out;
  out.reserve(z.size());
  for (const Rational& zi : z)
    out.push_back(detail::pow_rational(((mp.theta - 1) * zi + S + 1) / den,
                                       static_cast<unsigned long>(mp.k)));
  return out;
}

struct FixedPointReport {
  bool is_fixed = false;
  BoundaryField input;
  BoundaryField image;
  std::vector<bool> in_ep;  // componentwise membership of the input
  std::vector<Valuation> val_minus_one;
  bool all_in_ep = true;
};

inline FixedPointReport verify_fixed_point(const ModelParams& mp, const BoundaryField& z) {
  FixedPointReport r;
  r.input = z;
  r.image = recursion_rhs(mp, z);
  r.is_fixed = (r.image == z);
  for (const Rational& zi : z) {
    bool member = in_Ep(mp.p, zi);
    r.in_ep.push_back(member);
    r.val_minus_one.push_back(valuation(mp.p, zi - 1));
    r.all_in_ep = r.all_in_ep && member;
  }
  return r;
}

// Reduced one-variable map for fields constant on an m-subset (k = 2):
// f_m(z) = (((theta+m-1) z + q-m) / (m z + q-m-1+theta))^2.
inline Rational f_m_eval(const ModelParams& mp, int m, const Rational& z) {
  if (m < 1 || m > mp.q - 1)
    throw error("f_m: need 1 <= m <= q-1, got m = " + std::to_string(m));
  if (mp.k != 2) throw outside_domain("reduced map f_m is the k = 2 specialization");
  Rational den = m * z + (mp.q - m - 1) + mp.theta;
  if (den == 0) throw pole_at_input("f_m pole: m*z + q-m-1+theta vanishes at z = " +
                                    rational_str(z));
  Rational num = (mp.theta + m - 1) * z + (mp.q - m);
  return detail::pow_rational(num / den, 2);
}

// --- fixed-point quadratic --------------------------------------------------

// Nontrivial reduced fixed points solve m^2 z^2 + (2m(q-m) - (theta-1)^2) z
// + (q-m)^2 = 0; its roots are (A +- B sqrt(D)) / (2 m^2) with
// A = (theta-1)^2 - 2m(q-m), B = theta-1, D = (theta-1)^2 - 4m(q-m).
struct QuadraticKV {
  Rational a2, a1, a0;
  Rational disc;  // D; the full discriminant is a1^2 - 4 a2 a0 = B^2 D
};

inline QuadraticKV kv_coeffs(const ModelParams& mp, int m) {
  if (m < 1 || m > mp.q - 1)
    throw error("kv_coeffs: need 1 <= m <= q-1, got m = " + std::to_string(m));
  long mm = m, qm = mp.q - m;
  Rational B = mp.theta - 1;
  QuadraticKV kv;
  kv.a2 = Rational(mm) * mm;
  kv.a1 = Rational(2 * mm) * qm - B * B;
  kv.a0 = Rational(qm) * qm;
  kv.disc = B * B - Rational(4 * mm) * qm;
  return kv;
}

enum class RootKind { no_roots, double_root, two };

struct KvRoot {
  bool exact = true;
  Rational value;                   // set when exact
  std::optional<Expansion> approx;  // truncated realization (always set when !exact)
  int sign = 0;                     // +-1: branch relative to the canonical sqrt(D)
  Rational sym_A, sym_B, sym_D, sym_den;  // symbolic case: (A + sign*B*sqrt(D))/den
  Valuation val_minus_one = Valuation::infinity();
  bool in_ep = false;
  bool is_one = false;
  // The quadratic's root coincides with the pole of the reduced map (possible
  // only for theta in {1, 1-q}); such a root is not a fixed point.
  bool is_pole = false;

  std::string str() const {
    if (exact) return rational_str(value);
    return "(" + rational_str(sym_A) + (sign >= 0 ? " + " : " - ") + rational_str(sym_B) +
           "*sqrt(" + rational_str(sym_D) + "))/" + rational_str(sym_den);
  }
};

struct RootSet {
  RootKind kind = RootKind::no_roots;
  std::vector<KvRoot> roots;  // plus branch first when two
  QuadraticKV quad;
  std::optional<SqrtVerdict> disc_verdict;  // set when the criterion was consulted
};

namespace detail {

inline KvRoot exact_kv_root(const ModelParams& mp, int m, const Rational& value, int sign) {
  KvRoot r;
  r.exact = true;
  r.value = value;
  r.sign = sign;
  r.val_minus_one = valuation(mp.p, value - 1);
  r.in_ep = in_Ep(mp.p, value);
  r.is_one = (value == 1);
  // pole of f_m: m z + q - m - 1 + theta = 0
  r.is_pole = (Rational(m) * value + (mp.q - m - 1) + mp.theta == 0);
  return r;
}

// True if r is the canonical square-root branch (leading digit <= (p-1)/2
// for odd p; = 1 mod 4 for p = 2).
inline bool is_canonical_branch(const Int& p, const Rational& r) {
  if (p == 2) return unit_mod(p, r, 2) == 1;
  return unit_mod(p, r, 1) <= (p - 1) / 2;
}

}  // namespace detail

inline RootSet solve_kv(const ModelParams& mp, int m, long precision = default_precision) {
  if (mp.k != 2) throw outside_domain("fixed-point quadratic is the k = 2 specialization");
  if (precision < 1) throw error("solve_kv: precision must be >= 1");
  if (mp.theta_abs_prec)
    throw precision_exhausted("direct root solving needs theta exactly, not mod " +
                              mp.p.get_str() + "^" + std::to_string(*mp.theta_abs_prec));
  const Int& p = mp.p;
  RootSet rs;
  rs.quad = kv_coeffs(mp, m);
  const Rational B = mp.theta - 1;
  const Rational& D = rs.quad.disc;
  const Rational den = Rational(2) * m * m;

  if (B == 0 || D == 0) {
    // B = 0: the quadratic is (m z + (q-m))^2; D = 0: root -a1/(2a2) = (q-m)/m.
    Rational root = B == 0 ? Rational(-(mp.q - m)) / m : Rational(mp.q - m) / m;
    rs.kind = RootKind::double_root;
    rs.roots.push_back(detail::exact_kv_root(mp, m, root, 0));
    return rs;
  }

  rs.disc_verdict = sqrt_exists(p, D);
  if (!rs.disc_verdict->exists) {
    rs.kind = RootKind::no_roots;
    return rs;
  }

  const Rational A = B * B - Rational(2 * static_cast<long>(m)) * (mp.q - m);

  if (D > 0 && mpz_perfect_square_p(D.get_num().get_mpz_t()) &&
      mpz_perfect_square_p(D.get_den().get_mpz_t())) {
    Int rn, rd;
    mpz_sqrt(rn.get_mpz_t(), D.get_num().get_mpz_t());
    mpz_sqrt(rd.get_mpz_t(), D.get_den().get_mpz_t());
    Rational r = Rational(rn) / Rational(rd);
    if (!detail::is_canonical_branch(p, r)) r = -r;
    rs.kind = RootKind::two;
    rs.roots.push_back(detail::exact_kv_root(mp, m, (A + B * r) / den, +1));
    rs.roots.push_back(detail::exact_kv_root(mp, m, (A - B * r) / den, -1));
    return rs;
  }

  // Symbolic roots (A +- B sqrt(D)) / (2m^2). val(z - 1) is pinned down by
  // the product identity (z1-1)(z2-1) = (q^2 - B^2)/m^2, whose valuation V'
  // bounds each factor's valuation, so a precision sufficient for both
  // differences can be chosen up front.
  const long vB = valuation(p, B).get();
  const long vD = valuation(p, D).get();
  const long vr = vD / 2;
  const Rational C = A - den;  // numerator of z - 1 is C +- B sqrt(D)
  const Rational prod = Rational(4 * static_cast<long>(m)) * m *
                        (Rational(mp.q) * mp.q - B * B);  // (C+Br)(C-Br), nonzero here
  const long V = valuation(p, prod).get();
  Valuation vC = valuation(p, C);
  long w = vB + vr;
  if (vC < Valuation::of(w)) w = vC.get();
  const long vden = valuation(p, den).get();

  for (long slack = 8; slack <= (1L << 16); slack *= 2) {
    long prec_r = std::max(precision + slack, (V - w + 1) - (vB + vr) + slack);
    try {
      Expansion r = padic_sqrt(p, D, prec_r);
      const long target_abs = vB + vr + prec_r;
      Expansion Bhat = expand(p, B, prec_r);
      Expansion Br = Bhat * r;
      Expansion Chat = C == 0 ? Expansion::zero(p)
                              : expand(p, C, std::max(1L, target_abs - vC.get()));
      Expansion t_plus = Chat + Br;
      Expansion t_minus = Chat - Br;
      if (t_plus.valuation_exp() + t_minus.valuation_exp() != V)
        throw error("solve_kv: product-identity cross-check failed");
      Expansion den_hat = expand(p, den, prec_r + std::max(0L, V) + 8);
      rs.kind = RootKind::two;
      for (int sign : {+1, -1}) {
        const Expansion& t = sign > 0 ? t_plus : t_minus;
        KvRoot root;
        root.exact = false;
        root.sign = sign;
        root.sym_A = A;
        root.sym_B = B;
        root.sym_D = D;
        root.sym_den = den;
        root.val_minus_one = Valuation::of(t.valuation_exp() - vden);
        root.in_ep = root.val_minus_one.at_least(ep_threshold(p));
        root.is_one = false;  // z = 1 solves the quadratic only when D is a rational square
        root.approx = Expansion::one(p, prec_r) + t / den_hat;
        rs.roots.push_back(std::move(root));
      }
      return rs;
    } catch (const precision_exhausted&) {
      rs.roots.clear();
      continue;
    }
  }
  throw precision_exhausted("solve_kv: could not separate roots from 1 at any precision");
}

}  // namespace tipgm
