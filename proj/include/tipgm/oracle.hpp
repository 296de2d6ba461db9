#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tipgm/classifier.hpp"
#include "tipgm/parallel.hpp"

namespace tipgm {

namespace detail {

inline std::uint64_t mulmod_u64(std::uint64_t a, std::uint64_t b, std::uint64_t m) {
  return static_cast<std::uint64_t>((static_cast<unsigned __int128>(a) * b) % m);
}

inline std::uint64_t powmod_u64(std::uint64_t base, long e, std::uint64_t m) {
  if (m == 1) return 0;
  std::uint64_t r = 1 % m;
  base %= m;
  while (e > 0) {
    if (e & 1) r = mulmod_u64(r, base, m);
    base = mulmod_u64(base, base, m);
    e >>= 1;
  }
  return r;
}

inline long val_u64(std::uint64_t p, std::uint64_t r) {
  long v = 0;
  while (r % p == 0) {
    r /= p;
    ++v;
  }
  return v;
}

// Residue of a p-integral rational modulo p^j (throws if p divides the
// denominator).
inline std::uint64_t rational_mod_u64(const Int& p, const Rational& r, const Int& pj) {
  Int den = r.get_den();
  if (mpz_divisible_p(den.get_mpz_t(), p.get_mpz_t()))
    throw outside_domain("value is not a p-adic integer: " + rational_str(r));
  Int t = mod_pos(r.get_num(), pj) * inv_mod(mod_pos(den, pj), pj);
  t = mod_pos(t, pj);
  return t.get_ui();
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Brute-force square-root existence: digit-by-digit enumeration of all
// residues y mod p^N with y^2 congruent to the unit part of a, with no
// residue-symbol shortcuts. An odd valuation is reported as its own field so
// callers can distinguish the two failure modes.
// ---------------------------------------------------------------------------

struct BruteSqrtResult {
  bool exists = false;
  bool odd_valuation = false;
  std::vector<Int> unit_roots;  // all square roots of the unit part mod p^N
};

inline BruteSqrtResult brute_sqrt(const Int& p, const Rational& a, long N) {
  require_prime(p);
  if (a == 0) throw zero_input("brute-force square root of zero");
  if (N < 1) throw error("modulus exponent must be positive");
  if (p == 2 && N < 3) throw error("p = 2 requires modulus exponent >= 3");
  if (p > 1000000) throw search_space_too_large("prime too large for residue enumeration");

  Valuation v = valuation(p, a);
  BruteSqrtResult res;
  if (v.get() % 2 != 0) {
    res.odd_valuation = true;
    return res;
  }
  // Unit part of a as a residue mod p^N.
  Int pN = pow_int(p, static_cast<unsigned long>(N));
  Rational unit = a;
  if (v.get() >= 0)
    unit /= detail::pow_rational(Rational(p), static_cast<unsigned long>(v.get()));
  else
    unit *= detail::pow_rational(Rational(p), static_cast<unsigned long>(-v.get()));
  Int den = unit.get_den();
  Int u = detail::mod_pos(unit.get_num(), pN) * detail::inv_mod(detail::mod_pos(den, pN), pN);
  u = detail::mod_pos(u, pN);

  std::uint64_t pu = p.get_ui();
  std::uint64_t target = 0;
  bool small = pN.fits_ulong_p();
  std::vector<Int> roots;
  if (small) {
    target = u.get_ui();
    std::uint64_t mod = 1;
    std::vector<std::uint64_t> level;
    for (std::uint64_t y = 0; y < pu; ++y) level.push_back(y);
    for (long j = 1; j <= N; ++j) {
      mod *= pu;
      std::vector<std::uint64_t> next;
      for (std::uint64_t y : level)
        if (detail::mulmod_u64(y, y, mod) == target % mod) next.push_back(y);
      if (j < N) {
        std::vector<std::uint64_t> lifted;
        for (std::uint64_t y : next)
          for (std::uint64_t c = 0; c < pu; ++c) lifted.push_back(y + c * mod);
        level = std::move(lifted);
      } else {
        level = std::move(next);
      }
    }
    for (std::uint64_t y : level) roots.emplace_back(static_cast<unsigned long>(y));
  } else {
    // Same lifting with big integers (large p^N; root count stays tiny).
    std::vector<Int> level;
    for (std::uint64_t y = 0; y < pu; ++y) level.emplace_back(static_cast<unsigned long>(y));
    Int mod = 1;
    for (long j = 1; j <= N; ++j) {
      mod *= p;
      std::vector<Int> next;
      for (const Int& y : level)
        if (detail::mod_pos(y * y, mod) == detail::mod_pos(u, mod)) next.push_back(y);
      if (j < N) {
        std::vector<Int> lifted;
        for (const Int& y : next)
          for (std::uint64_t c = 0; c < pu; ++c) lifted.push_back(y + Int(static_cast<unsigned long>(c)) * mod);
        level = std::move(lifted);
      } else {
        level = std::move(next);
      }
    }
    roots = std::move(level);
  }
  std::sort(roots.begin(), roots.end());
  res.exists = !roots.empty();
  res.unit_roots = std::move(roots);
  return res;
}

inline bool brute_sqrt_exists(const Int& p, const Rational& a, long N) {
  return brute_sqrt(p, a, N).exists;
}

// ---------------------------------------------------------------------------
// Brute-force fixed points of the boundary-field recursion, as residue
// vectors modulo p^N. The recursion's fixed-point equation cleared of its
// denominator reads, per coordinate,
//   z_i * (theta + S)^k == ((theta - 1) z_i + S + 1)^k   (mod p^N),
// where S is the coordinate sum. `solutions` holds every residue vector
// satisfying that congruence at level N. `stable` keeps those that in
// addition pass valuation/unit consistency with the uncleared equation and
// admit a lift to level N+1 passing the same tests; it filters artifacts of
// clearing the denominator. Both sets are necessary-condition screens: every
// residue of an exact p-integral solution appears in both.
// ---------------------------------------------------------------------------

struct ResidueSolutionSet {
  Int p;
  int q = 0;
  int k = 0;
  long N = 0;
  long stable_depth = 0;  // level the stable survivors were lifted to
  std::vector<std::vector<Int>> solutions;
  std::vector<std::vector<Int>> stable;
};

namespace detail {

struct BruteContext {
  std::uint64_t p;
  int n;   // number of coordinates (q - 1)
  int k;
  std::uint64_t theta_top;  // theta mod p^{N+1}
  std::vector<std::uint64_t> pw;  // pw[j] = p^j, j = 0..N+1
};

// Cleared congruence at level j: z_i * DEN^k == NUM_i^k mod p^j.
inline bool brute_test_cleared(const BruteContext& cx, long j, const std::vector<std::uint64_t>& z) {
  std::uint64_t m = cx.pw[j];
  std::uint64_t t = cx.theta_top % m;
  std::uint64_t S = 0;
  for (auto zi : z) S = (S + zi) % m;
  std::uint64_t den = (t + S) % m;
  std::uint64_t denk = powmod_u64(den, cx.k, m);
  std::uint64_t tm1 = (t + m - 1) % m;
  for (auto zi : z) {
    std::uint64_t num = (mulmod_u64(tm1, zi, m) + S + 1) % m;
    if (mulmod_u64(zi, denk, m) != powmod_u64(num, cx.k, m)) return false;
  }
  return true;
}

// Consistency of the residue vector with the uncleared equation
// z_i = (NUM_i / DEN)^k, checkable only when DEN's valuation is visible at
// level j: the valuations must satisfy val(z_i) = k (val(NUM_i) - val(DEN))
// and the unit parts must match to the precision the residues determine.
inline bool brute_test_uncleared(const BruteContext& cx, long j, const std::vector<std::uint64_t>& z) {
  std::uint64_t m = cx.pw[j];
  std::uint64_t t = cx.theta_top % m;
  std::uint64_t S = 0;
  for (auto zi : z) S = (S + zi) % m;
  std::uint64_t den = (t + S) % m;
  if (den == 0) return true;  // val(DEN) >= j: undetermined, nothing to check
  long w = val_u64(cx.p, den);
  std::uint64_t tm1 = (t + m - 1) % m;
  for (auto zi : z) {
    std::uint64_t num = (mulmod_u64(tm1, zi, m) + S + 1) % m;
    long u = (num == 0) ? j : val_u64(cx.p, num);
    long v = (zi == 0) ? j : val_u64(cx.p, zi);
    if (num == 0) {
      // val(NUM_i) >= j, so val(z_i) >= min(j, k(j - w)).
      long need = std::min<long>(j, cx.k * (j - w));
      if (v < need) return false;
      continue;
    }
    long target = cx.k * (u - w);
    if (zi == 0) {
      if (target < j) return false;
      continue;
    }
    if (v != target) return false;
    // Unit parts: zeta * delta^k == nu^k to the precision all three carry.
    long drop = std::max({v, w, u});
    if (drop >= j) continue;
    std::uint64_t mm = cx.pw[j - drop];
    std::uint64_t zeta = (zi / cx.pw[v]) % mm;
    std::uint64_t delta = (den / cx.pw[w]) % mm;
    std::uint64_t nu = (num / cx.pw[u]) % mm;
    if (mulmod_u64(zeta, powmod_u64(delta, cx.k, mm), mm) != powmod_u64(nu, cx.k, mm)) return false;
  }
  return true;
}

inline std::uint64_t flat_index(const BruteContext& cx, long level, const std::vector<std::uint64_t>& z) {
  std::uint64_t idx = 0;
  for (int i = cx.n - 1; i >= 0; --i) idx = idx * cx.pw[level] + z[i];
  return idx;
}

}  // namespace detail

inline ResidueSolutionSet brute_fixed_points_mod(const ModelParams& mp, long N, unsigned threads = 1) {
  if (N < 1) throw error("modulus exponent must be positive");
  if (mp.theta_abs_prec && *mp.theta_abs_prec < N + 1)
    throw precision_exhausted("theta is known to too few digits for residue enumeration at this level");
  int n = mp.q - 1;
  Int space = pow_int(mp.p, static_cast<unsigned long>(N) * static_cast<unsigned long>(n));
  if (space > 1000000)
    throw search_space_too_large("residue space p^(N(q-1)) = " + space.get_str() + " exceeds 10^6");

  // The stability screen lifts survivors to twice the requested digits
  // (capped by how precisely theta is known). Every test is a necessary
  // condition for the residue of an exact p-integral solution, so the extra
  // depth never discards a true residue; it only sharpens the screen against
  // artifacts of clearing the denominator.
  long deep = std::max(N + 1, 2 * N);
  if (mp.theta_abs_prec) deep = std::max(N + 1, std::min(deep, *mp.theta_abs_prec));

  detail::BruteContext cx;
  cx.p = mp.p.get_ui();
  cx.n = n;
  cx.k = mp.k;
  cx.pw.resize(deep + 1);
  cx.pw[0] = 1;
  for (long j = 1; j <= deep; ++j) cx.pw[j] = cx.pw[j - 1] * cx.p;
  cx.theta_top = detail::rational_mod_u64(mp.p, mp.theta, pow_int(mp.p, static_cast<unsigned long>(deep)));

  // Breadth-first digit lifting on the cleared congruence. A vector passing
  // at level N passes at every lower level, so pruning is exact.
  std::uint64_t level1 = cx.pw[1];
  std::uint64_t first_count = 1;
  for (int i = 0; i < n; ++i) first_count *= level1;

  auto descend = [&cx, N](std::vector<std::uint64_t> z) {
    std::vector<std::vector<std::uint64_t>> frontier;
    if (detail::brute_test_cleared(cx, 1, z)) frontier.push_back(std::move(z));
    for (long j = 2; j <= N; ++j) {
      std::vector<std::vector<std::uint64_t>> next;
      std::uint64_t children = 1;
      for (int i = 0; i < cx.n; ++i) children *= cx.p;
      for (const auto& base : frontier) {
        for (std::uint64_t c = 0; c < children; ++c) {
          std::vector<std::uint64_t> child = base;
          std::uint64_t digits = c;
          for (int i = 0; i < cx.n; ++i) {
            child[i] += (digits % cx.p) * cx.pw[j - 1];
            digits /= cx.p;
          }
          if (detail::brute_test_cleared(cx, j, child)) next.push_back(std::move(child));
        }
      }
      frontier = std::move(next);
    }
    return frontier;
  };

  auto chunk = [&](std::size_t idx) {
    std::vector<std::uint64_t> z(n);
    std::uint64_t digits = idx;
    for (int i = 0; i < n; ++i) {
      z[i] = digits % cx.p;
      digits /= cx.p;
    }
    return descend(std::move(z));
  };
  auto chunks = parallel_map(static_cast<std::size_t>(first_count), threads, chunk);

  std::vector<std::vector<std::uint64_t>> sols;
  for (auto& c : chunks)
    for (auto& z : c) sols.push_back(std::move(z));
  std::sort(sols.begin(), sols.end(),
            [&](const auto& a, const auto& b) { return detail::flat_index(cx, N, a) < detail::flat_index(cx, N, b); });

  ResidueSolutionSet out;
  out.p = mp.p;
  out.q = mp.q;
  out.k = mp.k;
  out.N = N;

  for (const auto& z : sols) {
    std::vector<Int> zi;
    zi.reserve(n);
    for (auto c : z) zi.emplace_back(static_cast<unsigned long>(c));
    out.solutions.push_back(std::move(zi));
  }

  std::uint64_t children = 1;
  for (int i = 0; i < n; ++i) children *= cx.p;
  std::vector<std::vector<std::uint64_t>> frontier;
  for (const auto& z : sols)
    if (detail::brute_test_uncleared(cx, N, z)) frontier.push_back(z);
  std::uint64_t budget = 20000000;
  for (long j = N + 1; j <= deep; ++j) {
    std::vector<std::vector<std::uint64_t>> next;
    for (const auto& base : frontier) {
      if (budget < children) throw search_space_too_large("stability lifting exceeded its work budget");
      budget -= children;
      for (std::uint64_t c = 0; c < children; ++c) {
        std::vector<std::uint64_t> child = base;
        std::uint64_t digits = c;
        for (int i = 0; i < n; ++i) {
          child[i] += (digits % cx.p) * cx.pw[j - 1];
          digits /= cx.p;
        }
        if (detail::brute_test_cleared(cx, j, child) && detail::brute_test_uncleared(cx, j, child))
          next.push_back(std::move(child));
      }
    }
    frontier = std::move(next);
  }
  out.stable_depth = deep;
  std::vector<std::vector<std::uint64_t>> reduced;
  for (const auto& z : frontier) {
    std::vector<std::uint64_t> r(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) r[i] = z[i] % cx.pw[N];
    reduced.push_back(std::move(r));
  }
  std::sort(reduced.begin(), reduced.end(),
            [&](const auto& a, const auto& b) { return detail::flat_index(cx, N, a) < detail::flat_index(cx, N, b); });
  reduced.erase(std::unique(reduced.begin(), reduced.end()), reduced.end());
  for (const auto& z : reduced) {
    std::vector<Int> zi;
    zi.reserve(n);
    for (auto c : z) zi.emplace_back(static_cast<unsigned long>(c));
    out.stable.push_back(std::move(zi));
  }
  return out;
}

// True when the vector matches the shape every translation-invariant
// fixed point has for pair interactions: each component is 1, or all
// components differing from 1 share one common value.
inline bool one_or_common_pattern(const std::vector<Int>& sol) {
  std::optional<Int> common;
  for (const Int& z : sol) {
    if (z == 1) continue;
    if (!common) {
      common = z;
    } else if (*common != z) {
      return false;
    }
  }
  return true;
}

// ---------------------------------------------------------------------------
// Rule-vs-direct cross-checking over a parameter grid.
// ---------------------------------------------------------------------------

struct GridAxis {
  Int p;
  std::vector<long> theta_valuations;  // val(theta - 1) choices
  std::vector<Int> theta_units;        // unit multipliers, coprime to p
};

struct GridSpec {
  std::vector<GridAxis> axes;
  int q_min = 2;
  int q_max = 12;
};

inline GridSpec default_grid() {
  GridSpec g;
  g.axes.push_back({Int(2), {2, 3, 4}, {Int(1), Int(3), Int(5), Int(7)}});
  g.axes.push_back({Int(3), {1, 2, 3}, {Int(1), Int(2), Int(4), Int(5)}});
  g.axes.push_back({Int(5), {1, 2, 3}, {Int(1), Int(2), Int(3), Int(4)}});
  g.axes.push_back({Int(7), {1, 2, 3}, {Int(1), Int(2), Int(3), Int(4)}});
  return g;
}

struct GridPoint {
  Int p;
  int q = 0;
  Rational theta;
  int m = 0;
};

inline std::vector<GridPoint> grid_points(const GridSpec& grid) {
  std::vector<GridPoint> pts;
  for (const auto& ax : grid.axes) {
    long threshold = ep_threshold(ax.p);
    for (int q = grid.q_min; q <= grid.q_max; ++q) {
      for (long v : ax.theta_valuations) {
        if (v < threshold) throw error("grid valuation below the exp-domain threshold");
        for (const Int& u : ax.theta_units) {
          Rational theta = Rational(1) + Rational(u) * detail::pow_rational(Rational(ax.p), v);
          for (int m = 1; 2 * m <= q; ++m) pts.push_back({ax.p, q, theta, m});
        }
      }
    }
  }
  return pts;
}

using RulesFn = std::function<RuleOutcome(const ModelParams&, int)>;

struct Mismatch {
  GridPoint at;
  int rules_count = 0;
  int direct_count = 0;
  std::string evidence;
};

struct MismatchReport {
  long points_checked = 0;
  std::vector<Mismatch> mismatches;
  bool ok() const { return mismatches.empty(); }
};

inline MismatchReport crosscheck(const GridSpec& grid, long precision = default_precision,
                                 unsigned threads = 1, const RulesFn& rules_override = {}) {
  auto pts = grid_points(grid);
  auto check_one = [&](std::size_t i) -> std::optional<Mismatch> {
    const GridPoint& pt = pts[i];
    ModelParams mp = ModelParams::make(pt.p, pt.q, 2, pt.theta);
    if (!rules_override) {
      try {
        classify_m(mp, pt.m, ClassifyMethod::both, precision);
        return std::nullopt;
      } catch (const rule_direct_mismatch& e) {
        Mismatch mm;
        mm.at = pt;
        RuleOutcome ro = classify_rules(mp, pt.m);
        mm.rules_count = ro.count;
        mm.direct_count = -1;
        mm.evidence = e.what();
        return mm;
      }
    }
    RuleOutcome ro = rules_override(mp, pt.m);
    RootSet rs = solve_kv(mp, pt.m, precision);
    int direct = 0;
    std::string roots;
    for (const auto& r : rs.roots) {
      if (r.in_ep && !r.is_one && !r.is_pole) ++direct;
      if (!roots.empty()) roots += ", ";
      roots += r.str();
    }
    if (ro.count == direct) return std::nullopt;
    Mismatch mm;
    mm.at = pt;
    mm.rules_count = ro.count;
    mm.direct_count = direct;
    mm.evidence = "rule '" + ro.rule + "' predicts " + std::to_string(ro.count) + ", direct solving finds " +
                  std::to_string(direct) + " (roots: " + (roots.empty() ? "none" : roots) + ")";
    return mm;
  };
  auto results = parallel_map(pts.size(), threads, check_one);
  MismatchReport rep;
  rep.points_checked = static_cast<long>(pts.size());
  for (auto& r : results)
    if (r) rep.mismatches.push_back(std::move(*r));
  return rep;
}

}  // namespace tipgm
