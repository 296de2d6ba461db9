#include <catch2/catch_amalgamated.hpp>

#include "tipgm/functions.hpp"

using namespace tipgm;

TEST_CASE("square-root existence criterion", "[functions]") {
  // odd prime: even valuation + unit residue
  REQUIRE(sqrt_exists(Int(5), Rational(6)).exists);       // 6 = 1 mod 5, QR
  REQUIRE(sqrt_exists(Int(5), Rational(4)).exists);
  REQUIRE(sqrt_exists(Int(5), Rational(150)).exists);     // 150 = 2*3*5^2, 6 QR mod 5
  auto odd = sqrt_exists(Int(3), Rational(3));
  REQUIRE_FALSE(odd.exists);
  REQUIRE(odd.obstruction == SqrtObstruction::odd_valuation);
  auto nr = sqrt_exists(Int(3), Rational(2));
  REQUIRE_FALSE(nr.exists);
  REQUIRE(nr.obstruction == SqrtObstruction::nonresidue);
  // p = 2: unit must be 1 mod 8
  REQUIRE(sqrt_exists(Int(2), Rational(17)).exists);
  REQUIRE(sqrt_exists(Int(2), Rational(4)).exists);
  auto bad2 = sqrt_exists(Int(2), Rational(768));  // 768 = 2^8 * 3, 3 != 1 mod 8
  REQUIRE_FALSE(bad2.exists);
  REQUIRE(bad2.obstruction == SqrtObstruction::two_adic_unit);
  REQUIRE(sqrt_exists(Int(2), Rational(0)).exists);  // zero is its own root
  // rationals with negative valuation
  REQUIRE(sqrt_exists(Int(5), Rational(1) / Rational(25)).exists);
  REQUIRE_FALSE(sqrt_exists(Int(5), Rational(1) / Rational(5)).exists);
}

TEST_CASE("square roots take the canonical branch", "[functions]") {
  // p odd: leading digit of the root is <= (p-1)/2
  Expansion r = padic_sqrt(Int(5), Rational(6), 2);
  REQUIRE(r.unit() == 16);  // 16^2 = 256 = 6 + 10*25
  REQUIRE(r.digit(0) <= 2);
  Expansion r4 = padic_sqrt(Int(5), Rational(4), 6);
  REQUIRE(r4.representative() == 2);
  // p = 2: branch with unit = 1 mod 4
  Expansion r2 = padic_sqrt(Int(2), Rational(17), 5);
  REQUIRE(r2.unit() == 9);  // 9^2 = 81 = 17 + 2*32
  REQUIRE(r2.unit() % 4 == 1);
  // square of the root reproduces the input
  Expansion sq = r2 * r2;
  REQUIRE(sq == expand(Int(2), Rational(17), sq.precision()));
  // failures carry the obstruction
  REQUIRE_THROWS_AS(padic_sqrt(Int(3), Rational(3), 4), no_square_root);
  REQUIRE_THROWS_AS(padic_sqrt(Int(2), Rational(768), 5), no_square_root);
  REQUIRE_THROWS_WITH(padic_sqrt(Int(3), Rational(3), 4), Catch::Matchers::ContainsSubstring("odd valuation"));
  // even valuation shifts out of the root
  Expansion big = padic_sqrt(Int(3), Rational(9) * 7, 3);
  REQUIRE(big.valuation_exp() == 1);
  REQUIRE(big * big == expand(Int(3), Rational(63), 3));
}

TEST_CASE("exponential domain is val >= 1 (odd) / >= 2 (p=2)", "[functions]") {
  REQUIRE(exp_domain_threshold(Int(5)) == 1);
  REQUIRE(exp_domain_threshold(Int(2)) == 2);
  REQUIRE(in_exp_domain(Int(5), Rational(5)));
  REQUIRE_FALSE(in_exp_domain(Int(5), Rational(1)));
  REQUIRE(in_exp_domain(Int(2), Rational(4)));
  REQUIRE_FALSE(in_exp_domain(Int(2), Rational(2)));
  REQUIRE_THROWS_AS(exp_p(Int(5), Rational(1), 4), outside_domain);
  REQUIRE_THROWS_AS(exp_p(Int(2), Rational(2), 4), outside_domain);
}

TEST_CASE("exponential frozen values", "[functions]") {
  Expansion e = exp_p(Int(5), Rational(5), 3);
  REQUIRE(e.representative() == 81);
  REQUIRE(e.str_compact() == "81 + O(5^3)");
  Expansion e2 = exp_p(Int(2), Rational(4), 4);
  REQUIRE(e2.representative() == 13);
  REQUIRE(exp_p(Int(5), Rational(0), 6) == Expansion::one(Int(5), 6));
}

TEST_CASE("logarithm frozen values and domain", "[functions]") {
  Expansion lg = log_p(Int(5), Rational(81), 3);
  REQUIRE(lg.valuation_exp() == 1);
  REQUIRE(lg.unit() == 51);
  REQUIRE(log_p(Int(5), Rational(1), 7).is_zero());
  REQUIRE_THROWS_AS(log_p(Int(5), Rational(2), 4), outside_domain);
  REQUIRE_THROWS_AS(log_p(Int(2), Rational(2), 4), outside_domain);  // val(2-1)=0
  // log converges on all of B(1,1); at p=2 that includes val(z-1)=1 inputs
  // (outside the exp image, where the isometry |log z| = |z-1| can fail):
  // log(3) = log(9)/2 and val(log 9) = 3, so val(log 3) = 2.
  REQUIRE(log_p(Int(2), Rational(3), 4).valuation_exp() == 2);
  REQUIRE(log_p(Int(2), Rational(5), 4).valuation_exp() == 2);
}

TEST_CASE("exp and log invert each other", "[functions]") {
  Rational x = Rational(25) / Rational(2);
  Expansion rt = log_p(Int(5), exp_p(Int(5), x, 8).representative(), 6);
  REQUIRE(rt == expand(Int(5), x, 6));
  // and the other way: exp(log z) == z
  Rational z(26);  // val(26-1) = 2
  Expansion back = exp_p(Int(5), log_p(Int(5), z, 8).representative(), 6);
  REQUIRE(back == expand(Int(5), z, 6));
}

TEST_CASE("exp and log are isometries", "[functions]") {
  for (long v : {1L, 2L, 3L}) {
    Rational x = pow_int(Int(5), static_cast<unsigned long>(v));
    REQUIRE(exp_p(Int(5), x, 6).valuation_exp() == 0);
    Expansion d = exp_p(Int(5), x, 6) - Expansion::one(Int(5), 6 + v);
    REQUIRE(d.valuation_exp() == v);  // |exp x - 1| = |x|
    Rational z = Rational(1) + x;
    REQUIRE(log_p(Int(5), z, 6).valuation_exp() == v);  // |log z| = |z - 1|
  }
}

TEST_CASE("exp/log on expansions clamp to the input precision", "[functions]") {
  Expansion x = expand(Int(5), Rational(5), 4);   // known mod 5^5
  Expansion e = exp_p(x);
  REQUIRE(e.abs_precision() == x.abs_precision());
  Expansion z = expand(Int(5), Rational(6), 4);   // known mod 5^4
  Expansion l = log_p(z);
  REQUIRE(l.abs_precision() == z.abs_precision());
  // an input indistinguishable from 1 has no computable log
  REQUIRE_THROWS_AS(log_p(expand(Int(5), Rational(1), 4)), precision_exhausted);
}

TEST_CASE("obstruction messages", "[functions]") {
  REQUIRE(to_string(SqrtObstruction::odd_valuation) == "odd valuation");
  REQUIRE(to_string(SqrtObstruction::nonresidue) == "unit part is a quadratic nonresidue");
  REQUIRE(to_string(SqrtObstruction::two_adic_unit) == "unit part is not 1 mod 8");
  REQUIRE(to_string(SqrtObstruction::none) == "none");
}
