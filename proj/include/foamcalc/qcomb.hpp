#pragma once

#include <stdexcept>

#include "foamcalc/composition.hpp"
#include "foamcalc/laurent.hpp"

namespace foamcalc {

/// Balanced quantum integer [n] = (q^n - q^{-n})/(q - q^{-1}).
inline LaurentQ quantum_integer(int n) {
  if (n < 0) throw std::invalid_argument("quantum_integer: n must be >= 0");
  LaurentQ r;
  for (int e = -(n - 1); e <= n - 1; e += 2) r += LaurentQ::monomial(2 * e);
  return r;
}

inline LaurentQ quantum_factorial(int n) {
  LaurentQ r = LaurentQ::one();
  for (int i = 2; i <= n; ++i) r *= quantum_integer(i);
  return r;
}

/// Balanced quantum binomial [n; m].
inline LaurentQ quantum_binomial(int n, int m) {
  if (m < 0 || m > n) return LaurentQ();
  LaurentQ num = LaurentQ::one();
  for (int j = 0; j < m; ++j) num *= quantum_integer(n - j);
  return num.divided_by(quantum_factorial(m));
}

/// Balanced quantum multinomial [k; k_1 ... k_l] for a composition of k.
inline LaurentQ quantum_multinomial(const Composition& c) {
  LaurentQ r = quantum_factorial(c.level());
  for (int p : c.parts()) r = r.divided_by(quantum_factorial(p));
  return r;
}

/// Truncated graded dimension of the blockwise invariant algebra A_c:
/// prod_i prod_{j=1}^{k_i} 1/(1-q^{2j}), with x-variables in degree 2.
/// trunc_doubled is the doubled top exponent.
inline QSeries graded_dim_invariant_algebra(const Composition& c,
                                            HalfInt trunc_doubled) {
  if (trunc_doubled < 0)
    throw std::invalid_argument("graded_dim_invariant_algebra: D must be >= 0");
  QSeries s = QSeries::one(trunc_doubled);
  for (int p : c.parts())
    for (int j = 1; j <= p; ++j) s = s.divided_by_one_minus_qpow(4 * j);
  return s;
}

inline long binomial(int n, int m) {
  if (m < 0 || m > n) return 0;
  long r = 1;
  for (int j = 1; j <= m; ++j) r = r * (n - m + j) / j;
  return r;
}

}  // namespace foamcalc
