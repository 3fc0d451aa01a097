#pragma once

#include <algorithm>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "foamcalc/partition.hpp"
#include "foamcalc/rational.hpp"

namespace foamcalc {

/// Exact multivariate polynomial over Q.  Exponent vectors all have length
/// num_vars.  This is the workhorse behind SymPoly and the bimodule normal
/// forms; symmetry is a property checked or maintained on top of it.
class MultiPoly {
 public:
  using Expo = std::vector<int>;

  explicit MultiPoly(int num_vars = 0) : n_(num_vars) {}

  static MultiPoly constant(int num_vars, Rational c) {
    MultiPoly p(num_vars);
    if (c != 0) p.terms_[Expo(num_vars, 0)] = std::move(c);
    return p;
  }
  static MultiPoly one(int num_vars) { return constant(num_vars, 1); }
  static MultiPoly variable(int num_vars, int i, int power = 1) {
    MultiPoly p(num_vars);
    Expo e(num_vars, 0);
    e[i] = power;
    p.terms_[std::move(e)] = 1;
    return p;
  }

  int num_vars() const { return n_; }
  bool is_zero() const { return terms_.empty(); }
  const std::map<Expo, Rational>& terms() const { return terms_; }

  int degree() const {
    int d = -1;
    for (const auto& [e, c] : terms_) {
      int s = 0;
      for (int x : e) s += x;
      d = std::max(d, s);
    }
    return d;
  }

  bool is_homogeneous() const {
    int d = -2;
    for (const auto& [e, c] : terms_) {
      int s = 0;
      for (int x : e) s += x;
      if (d == -2) d = s;
      else if (s != d) return false;
    }
    return true;
  }

  void add_term(const Expo& e, const Rational& c) {
    if (c == 0) return;
    auto it = terms_.find(e);
    if (it == terms_.end()) {
      terms_[e] = c;
    } else {
      it->second += c;
      if (it->second == 0) terms_.erase(it);
    }
  }

  MultiPoly& operator+=(const MultiPoly& o) {
    check_vars(o);
    for (const auto& [e, c] : o.terms_) add_term(e, c);
    return *this;
  }
  MultiPoly& operator-=(const MultiPoly& o) {
    check_vars(o);
    for (const auto& [e, c] : o.terms_) add_term(e, -c);
    return *this;
  }
  friend MultiPoly operator+(MultiPoly a, const MultiPoly& b) { return a += b; }
  friend MultiPoly operator-(MultiPoly a, const MultiPoly& b) { return a -= b; }

  friend MultiPoly operator*(const MultiPoly& a, const MultiPoly& b) {
    a.check_vars(b);
    MultiPoly r(a.n_);
    Expo e(a.n_);
    for (const auto& [ea, ca] : a.terms_)
      for (const auto& [eb, cb] : b.terms_) {
        for (int i = 0; i < a.n_; ++i) e[i] = ea[i] + eb[i];
        r.add_term(e, ca * cb);
      }
    return r;
  }
  MultiPoly& operator*=(const MultiPoly& o) { return *this = *this * o; }

  friend MultiPoly operator*(const Rational& s, const MultiPoly& a) {
    MultiPoly r(a.n_);
    if (s == 0) return r;
    for (const auto& [e, c] : a.terms_) r.terms_[e] = s * c;
    return r;
  }

  bool operator==(const MultiPoly& o) const {
    return n_ == o.n_ && terms_ == o.terms_;
  }
  bool operator!=(const MultiPoly& o) const { return !(*this == o); }
  bool operator<(const MultiPoly& o) const {
    if (n_ != o.n_) return n_ < o.n_;
    return std::lexicographical_compare(
        terms_.begin(), terms_.end(), o.terms_.begin(), o.terms_.end());
  }

  /// Apply a permutation of the variables: x_i -> x_{perm[i]}.
  MultiPoly permuted(const std::vector<int>& perm) const {
    MultiPoly r(n_);
    Expo e(n_);
    for (const auto& [old_e, c] : terms_) {
      for (int i = 0; i < n_; ++i) e[perm[i]] = old_e[i];
      r.add_term(e, c);
    }
    return r;
  }

  Rational eval(const std::vector<Rational>& x) const {
    Rational s = 0;
    for (const auto& [e, c] : terms_) {
      Rational t = c;
      for (int i = 0; i < n_; ++i)
        for (int j = 0; j < e[i]; ++j) t *= x[i];
      s += t;
    }
    return s;
  }

  /// Re-index into a polynomial with new_n variables, variable i of this
  /// becoming variable slots[i] of the result.
  MultiPoly embedded(int new_n, const std::vector<int>& slots) const {
    MultiPoly r(new_n);
    Expo e(new_n);
    for (const auto& [old_e, c] : terms_) {
      std::fill(e.begin(), e.end(), 0);
      for (int i = 0; i < n_; ++i) e[slots[i]] = old_e[i];
      r.add_term(e, c);
    }
    return r;
  }

  /// Exact division by (x_i - x_j); throws if the remainder is nonzero,
  /// which in this library always signals a broken cancellation theorem.
  MultiPoly divided_by_var_difference(int i, int j) const {
    // Write p = sum_d A_d x_i^d and do synthetic division by (x_i - x_j).
    std::map<int, MultiPoly> slices;  // degree in x_i -> coefficient poly
    int top = 0;
    for (const auto& [e, c] : terms_) {
      int d = e[i];
      top = std::max(top, d);
      auto it = slices.find(d);
      if (it == slices.end())
        it = slices.emplace(d, MultiPoly(n_)).first;
      Expo r = e;
      r[i] = 0;
      it->second.add_term(r, c);
    }
    auto slice = [&](int d) -> MultiPoly {
      auto it = slices.find(d);
      return it == slices.end() ? MultiPoly(n_) : it->second;
    };
    MultiPoly xj = variable(n_, j);
    MultiPoly quot(n_);
    MultiPoly carry(n_);  // Q_d, walking downward
    for (int d = top; d >= 1; --d) {
      MultiPoly qd = slice(d) + carry;          // Q_{d-1}
      MultiPoly lifted(n_);
      for (const auto& [e, c] : qd.terms_) {
        Expo f = e;
        f[i] += d - 1;
        lifted.add_term(f, c);
      }
      quot += lifted;
      carry = xj * qd;
    }
    MultiPoly rem = slice(0) + carry;
    if (!rem.is_zero())
      throw std::runtime_error("divided_by_var_difference: nonzero remainder");
    return quot;
  }

  std::string str() const {
    if (terms_.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (const auto& [e, c] : terms_) {
      Rational a = c;
      if (!first) {
        os << (a < 0 ? " - " : " + ");
        if (a < 0) a = -a;
      } else if (a < 0) {
        os << "-";
        a = -a;
      }
      first = false;
      bool any = false;
      std::ostringstream mono;
      for (int i = 0; i < n_; ++i) {
        if (e[i] == 0) continue;
        any = true;
        mono << "x" << i + 1;
        if (e[i] > 1) mono << "^" << e[i];
      }
      if (!any) os << to_string(a);
      else {
        if (a != 1) os << to_string(a) << "*";
        os << mono.str();
      }
    }
    return os.str();
  }

 private:
  void check_vars(const MultiPoly& o) const {
    if (n_ != o.n_)
      throw std::invalid_argument("MultiPoly: variable count mismatch");
  }

  int n_;
  std::map<Expo, Rational> terms_;
};

/// Elementary symmetric polynomial e_r(x_1..x_n).
inline MultiPoly elementary_sym(int n, int r) {
  MultiPoly p(n);
  if (r < 0 || r > n) return p;
  std::vector<int> idx;
  auto rec = [&](auto&& self, int start) -> void {
    if (static_cast<int>(idx.size()) == r) {
      MultiPoly::Expo e(n, 0);
      for (int i : idx) e[i] = 1;
      p.add_term(e, 1);
      return;
    }
    for (int i = start; i < n; ++i) {
      idx.push_back(i);
      self(self, i + 1);
      idx.pop_back();
    }
  };
  rec(rec, 0);
  return p;
}

inline MultiPoly power_sum(int n, int r) {
  MultiPoly p(n);
  for (int i = 0; i < n; ++i) p += MultiPoly::variable(n, i, r);
  return p;
}

inline bool is_symmetric(const MultiPoly& p) {
  int n = p.num_vars();
  for (int i = 0; i + 1 < n; ++i) {
    std::vector<int> perm(n);
    for (int j = 0; j < n; ++j) perm[j] = j;
    std::swap(perm[i], perm[i + 1]);
    if (p.permuted(perm) != p) return false;
  }
  return true;
}

/// Symmetric under each block of the composition-like block sizes.
inline bool is_blockwise_symmetric(const MultiPoly& p,
                                   const std::vector<int>& blocks) {
  int off = 0;
  for (int b : blocks) {
    for (int i = off; i + 1 < off + b; ++i) {
      std::vector<int> perm(p.num_vars());
      for (int j = 0; j < p.num_vars(); ++j) perm[j] = j;
      std::swap(perm[i], perm[i + 1]);
      if (p.permuted(perm) != p) return false;
    }
    off += b;
  }
  return true;
}

/// Schur polynomial s_lambda(x_1..x_n) by semistandard tableau enumeration.
inline MultiPoly schur(const Partition& lambda, int n) {
  MultiPoly p(n);
  if (lambda.rows() > n) return p;  // zero
  if (lambda.empty()) return MultiPoly::one(n);
  int rows = lambda.rows();
  // tableau[r][c] entries in 1..n, rows weakly increase, columns strictly.
  std::vector<std::vector<int>> t(rows);
  for (int r = 0; r < rows; ++r) t[r].assign(lambda.part(r), 0);
  MultiPoly::Expo weight(n, 0);
  auto rec = [&](auto&& self, int r, int c) -> void {
    if (r == rows) {
      p.add_term(weight, 1);
      return;
    }
    int nr = r, nc = c + 1;
    if (nc == lambda.part(r)) {
      nr = r + 1;
      nc = 0;
    }
    int lo = 1;
    if (c > 0) lo = std::max(lo, t[r][c - 1]);
    if (r > 0) lo = std::max(lo, t[r - 1][c] + 1);
    for (int v = lo; v <= n; ++v) {
      t[r][c] = v;
      ++weight[v - 1];
      self(self, nr, nc);
      --weight[v - 1];
    }
  };
  rec(rec, 0, 0);
  return p;
}

/// Expand a symmetric polynomial in the monomial-symmetric basis:
/// partition -> coefficient.  Throws on non-symmetric input.
inline std::map<Partition, Rational> monomial_sym_expansion(
    const MultiPoly& p) {
  std::map<Partition, Rational> out;
  for (const auto& [e, c] : p.terms()) {
    std::vector<int> sorted = e;
    std::sort(sorted.begin(), sorted.end(), std::greater<int>());
    bool dominant = std::equal(sorted.begin(), sorted.end(), e.begin());
    if (dominant) out[Partition(sorted)] = c;
  }
  return out;
}

/// Expand a symmetric polynomial in products of elementary symmetric
/// polynomials: non-increasing index multiset -> coefficient.  Throws on
/// non-symmetric input.
inline std::map<std::vector<int>, Rational> elementary_expansion(MultiPoly p) {
  std::map<std::vector<int>, Rational> out;
  const int n = p.num_vars();
  int guard = 0;
  while (!p.is_zero()) {
    if (++guard > 100000)
      throw std::runtime_error(
          "elementary_expansion: no convergence (input not symmetric?)");
    // dominant exponent vector, compared after sorting descending
    std::vector<int> lam;
    for (const auto& [e, c] : p.terms()) {
      std::vector<int> s = e;
      std::sort(s.begin(), s.end(), std::greater<int>());
      if (lam.empty() ||
          std::lexicographical_compare(lam.begin(), lam.end(), s.begin(),
                                       s.end()))
        lam = std::move(s);
    }
    auto it = p.terms().find(lam);
    if (it == p.terms().end())
      throw std::runtime_error("elementary_expansion: input not symmetric");
    Rational c = it->second;
    // e_{lam'} has x^lam as its dominant monomial with coefficient 1
    std::vector<int> conj;
    for (int i = 1; i <= (lam.empty() ? 0 : lam[0]); ++i) {
      int cnt = 0;
      for (int part : lam)
        if (part >= i) ++cnt;
      conj.push_back(cnt);
    }
    MultiPoly prod = MultiPoly::one(n);
    for (int j : conj)
      prod = prod * schur(Partition(std::vector<int>(j, 1)), n);
    p -= c * prod;
    out[conj] += c;
  }
  for (auto it = out.begin(); it != out.end();)
    it = it->second == 0 ? out.erase(it) : std::next(it);
  return out;
}

/// Render a symmetric polynomial as an expression in e1,e2,... suitable for
/// the text DSL ("e1^2 - 2*e2").
inline std::string elementary_str(const MultiPoly& p) {
  auto ex = elementary_expansion(p);
  if (ex.empty()) return "0";
  std::ostringstream os;
  bool first = true;
  for (const auto& [idx, c] : ex) {
    Rational a = c;
    if (first) {
      if (a < 0) {
        os << "-";
        a = -a;
      }
    } else {
      os << (a < 0 ? " - " : " + ");
      if (a < 0) a = -a;
    }
    first = false;
    bool need_coeff = a != 1 || idx.empty();
    if (need_coeff) os << a.str();
    bool lead = !need_coeff;
    for (size_t i = 0; i < idx.size();) {
      size_t j = i;
      while (j < idx.size() && idx[j] == idx[i]) ++j;
      if (!lead) os << "*";
      lead = false;
      os << "e" << idx[i];
      if (j - i > 1) os << "^" << (j - i);
      i = j;
    }
  }
  return os.str();
}

/// Expand a homogeneous symmetric polynomial in the Schur basis via the
/// unitriangular change of basis against lex-leading monomials.
inline std::map<Partition, Rational> schur_expansion(MultiPoly p) {
  std::map<Partition, Rational> out;
  int n = p.num_vars();
  int guard = 0;
  while (!p.is_zero()) {
    if (++guard > 100000)
      throw std::runtime_error("schur_expansion: no convergence (input not symmetric?)");
    // lex-largest exponent vector; for a symmetric poly it is a partition.
    const auto& [e, c] = *p.terms().rbegin();
    std::vector<int> sorted = e;
    std::sort(sorted.begin(), sorted.end(), std::greater<int>());
    if (!std::equal(sorted.begin(), sorted.end(), e.begin()))
      throw std::runtime_error("schur_expansion: input not symmetric");
    Partition lam(sorted);
    out[lam] = c;
    p -= c * schur(lam, n);
  }
  for (auto it = out.begin(); it != out.end();)
    it = it->second == 0 ? out.erase(it) : std::next(it);
  return out;
}

/// The symmetrized quotient sum over (a,b)-splittings I ⊔ J of a window of
/// a+b consecutive variables starting at `off`:
///   sum_{I,J} f(x_I ; x_J) / prod_{i in I, j in J} (x_i - x_j)
/// for f blockwise symmetric in (a, b) inside the window.  Variables outside
/// the window are inert.  All denominators cancel; the division is exact or
/// the call throws.  This is the Frobenius trace of A_{(a+b)} ⊂ A_{(a,b)}
/// on the window block.
inline MultiPoly symmetrized_quotient(const MultiPoly& f, int off, int a,
                                      int b) {
  int n = f.num_vars();
  if (off < 0 || off + a + b > n)
    throw std::invalid_argument("symmetrized_quotient: window out of range");
  int lo = off, hi = off + a + b;
  // Numerator over the common denominator prod_{lo<=i<j<hi}(x_i - x_j).
  MultiPoly numer(n);
  std::vector<int> subset;
  auto rec = [&](auto&& self, int start) -> void {
    if (static_cast<int>(subset.size()) == a) {
      std::vector<bool> in_i(n, false);
      for (int i : subset) in_i[i] = true;
      // slots: identity outside the window; inside, the first a window
      // variables of f go to I (in order) and the rest to J.
      std::vector<int> slots(n);
      for (int i = 0; i < n; ++i) slots[i] = i;
      int pos = lo;
      for (int i = lo; i < hi; ++i)
        if (in_i[i]) slots[pos++] = i;
      for (int i = lo; i < hi; ++i)
        if (!in_i[i]) slots[pos++] = i;
      MultiPoly term = f.permuted(slots);
      // Multiply by the same-side factors of the window Vandermonde,
      // tracking the sign from cross pairs (j in I, i in J) with i < j.
      long sign_flips = 0;
      for (int i = lo; i < hi; ++i)
        for (int j = i + 1; j < hi; ++j) {
          if (in_i[i] == in_i[j]) {
            term *= MultiPoly::variable(n, i) - MultiPoly::variable(n, j);
          } else if (!in_i[i]) {
            ++sign_flips;
          }
        }
      if (sign_flips % 2) term = Rational(-1) * term;
      numer += term;
      return;
    }
    for (int i = start; i < hi; ++i) {
      subset.push_back(i);
      self(self, i + 1);
      subset.pop_back();
    }
  };
  rec(rec, lo);
  for (int i = lo; i < hi; ++i)
    for (int j = i + 1; j < hi; ++j) {
      if (numer.is_zero()) return numer;
      numer = numer.divided_by_var_difference(i, j);
    }
  return numer;
}

/// Expand f, blockwise symmetric in (a, b), in the product Schur basis
/// s_lambda(x_1..x_a) * s_mu(x_{a+1}..x_{a+b}).
inline std::map<std::pair<Partition, Partition>, Rational>
pair_schur_expansion(MultiPoly f, int a, int b) {
  if (f.num_vars() != a + b)
    throw std::invalid_argument("pair_schur_expansion: variable count");
  std::map<std::pair<Partition, Partition>, Rational> out;
  std::vector<int> slots_a(a), slots_b(b);
  for (int i = 0; i < a; ++i) slots_a[i] = i;
  for (int j = 0; j < b; ++j) slots_b[j] = a + j;
  int guard = 0;
  while (!f.is_zero()) {
    if (++guard > 200000)
      throw std::runtime_error("pair_schur_expansion: no convergence");
    const auto& [e, c] = *f.terms().rbegin();
    std::vector<int> ea(e.begin(), e.begin() + a);
    std::vector<int> eb(e.begin() + a, e.end());
    Partition lam(ea), mu(eb);  // throws if the leading term is not sorted
    out[{lam, mu}] += c;
    f -= c * (schur(lam, a).embedded(a + b, slots_a) *
              schur(mu, b).embedded(a + b, slots_b));
  }
  for (auto it = out.begin(); it != out.end();)
    it = it->second == 0 ? out.erase(it) : std::next(it);
  return out;
}

/// Trace of P (x) Q through a split-merge digon: embed side by side in a+b
/// vars and apply the symmetrizing quotient.
inline MultiPoly split_pairing(const MultiPoly& P, const MultiPoly& Q) {
  int a = P.num_vars(), b = Q.num_vars(), n = a + b;
  std::vector<int> slots_p(a), slots_q(b);
  for (int i = 0; i < a; ++i) slots_p[i] = i;
  for (int j = 0; j < b; ++j) slots_q[j] = a + j;
  MultiPoly f = P.embedded(n, slots_p) * Q.embedded(n, slots_q);
  return symmetrized_quotient(f, 0, a, b);
}

}  // namespace foamcalc
