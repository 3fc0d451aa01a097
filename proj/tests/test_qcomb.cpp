#include "doctest.h"
#include "foamcalc/qcomb.hpp"

using namespace foamcalc;

TEST_CASE("quantum integers") {
  CHECK(quantum_integer(0).is_zero());
  CHECK(quantum_integer(1) == LaurentQ::one());
  // [2] = q^-1 + q
  LaurentQ two = LaurentQ::monomial(-2) + LaurentQ::monomial(2);
  CHECK(quantum_integer(2) == two);
  CHECK(quantum_integer(2).str() == "q^-1 + q");
  // [3] = q^-2 + 1 + q^2, expanded by hand from (q^3-q^-3)/(q-q^-1)
  LaurentQ three =
      LaurentQ::monomial(-4) + LaurentQ::one() + LaurentQ::monomial(4);
  CHECK(quantum_integer(3) == three);
  CHECK_THROWS_AS(quantum_integer(-1), std::invalid_argument);
}

TEST_CASE("quantum multinomials") {
  CHECK(quantum_multinomial(Composition{1, 1}) == quantum_integer(2));
  CHECK(quantum_multinomial(Composition{2, 1}) == quantum_integer(3));
  CHECK(quantum_multinomial(Composition{5}) == LaurentQ::one());
  CHECK(quantum_binomial(4, 2) ==
        quantum_multinomial(Composition{2, 2}));

  SUBCASE("bar invariance and q=1 specialization, all c of k <= 5") {
    for (int k = 1; k <= 5; ++k) {
      for (const auto& c : all_compositions(k)) {
        LaurentQ m = quantum_multinomial(c);
        CHECK(m.bar() == m);
        // classical multinomial by factorials
        long cl = 1;
        for (int i = 2; i <= k; ++i) cl *= i;
        for (int p : c.parts())
          for (int i = 2; i <= p; ++i) cl /= i;
        CHECK(m.eval_at_one() == Rational(cl));
        // nonnegative integer coefficients
        for (const auto& [e, coef] : m.coeffs()) {
          CHECK(coef > 0);
          CHECK(denominator(coef) == 1);
        }
      }
    }
  }
}

TEST_CASE("graded dimension of invariant algebras") {
  // c=(1), D=6: 1 + q^2 + q^4 + q^6
  QSeries s1 = graded_dim_invariant_algebra(Composition{1}, 12);
  CHECK(s1.coeff(0) == 1);
  CHECK(s1.coeff(4) == 1);
  CHECK(s1.coeff(8) == 1);
  CHECK(s1.coeff(12) == 1);
  CHECK(s1.coeff(2) == 0);
  // c=(2): dims of Q[e1,e2] with deg e1 = 2, deg e2 = 4
  QSeries s2 = graded_dim_invariant_algebra(Composition{2}, 12);
  CHECK(s2.coeff(0) == 1);
  CHECK(s2.coeff(4) == 1);   // e1
  CHECK(s2.coeff(8) == 2);   // e1^2, e2
  CHECK(s2.coeff(12) == 2);  // e1^3, e1 e2
  // c=(1,1), D=4: 1 + 2q^2 + 3q^4 (square of geometric series)
  QSeries s11 = graded_dim_invariant_algebra(Composition{1, 1}, 8);
  CHECK(s11.coeff(0) == 1);
  CHECK(s11.coeff(4) == 2);
  CHECK(s11.coeff(8) == 3);
}

TEST_CASE("rank coherence between the two graded rank formulas") {
  // prod 1/(1-q^{2k_i}) == q^{shift(c)} [k; c] prod_{j=1..k} 1/(1-q^{2j})
  const HalfInt D = 40;  // q-degree 20
  for (int k = 1; k <= 5; ++k) {
    QSeries full = QSeries::one(D);
    for (int j = 1; j <= k; ++j) full = full.divided_by_one_minus_qpow(4 * j);
    for (const auto& c : all_compositions(k)) {
      QSeries lhs = graded_dim_invariant_algebra(c, D);
      LaurentQ pref =
          quantum_multinomial(c).shifted(HalfInt(2 * shift_composition(c)));
      QSeries rhs = pref * full;
      CHECK(lhs == rhs);
    }
  }
}
