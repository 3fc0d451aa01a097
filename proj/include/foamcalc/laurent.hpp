#pragma once

#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>

#include "foamcalc/rational.hpp"

namespace foamcalc {

/// Exponents of q live on the half-integer grid (1/2)Z.  They are stored
/// doubled, so HalfInt h represents the exponent h/2.  This keeps all
/// arithmetic in plain integers.
using HalfInt = int;

inline std::string half_exp_string(HalfInt doubled) {
  if (doubled % 2 == 0) return std::to_string(doubled / 2);
  return std::to_string(doubled) + "/2";
}

/// Laurent polynomial in q^{1/2} with rational coefficients.
class LaurentQ {
 public:
  LaurentQ() = default;
  explicit LaurentQ(Rational constant) {
    if (constant != 0) coeffs_[0] = std::move(constant);
  }
  explicit LaurentQ(long constant) : LaurentQ(Rational(constant)) {}

  /// q^{doubled/2}
  static LaurentQ monomial(HalfInt doubled, Rational coeff = Rational(1)) {
    LaurentQ p;
    if (coeff != 0) p.coeffs_[doubled] = std::move(coeff);
    return p;
  }
  static LaurentQ q() { return monomial(2); }
  static LaurentQ one() { return LaurentQ(1); }

  bool is_zero() const { return coeffs_.empty(); }
  const std::map<HalfInt, Rational>& coeffs() const { return coeffs_; }

  Rational coeff(HalfInt doubled) const {
    auto it = coeffs_.find(doubled);
    return it == coeffs_.end() ? Rational(0) : it->second;
  }

  LaurentQ& operator+=(const LaurentQ& o) {
    for (const auto& [e, c] : o.coeffs_) add_term(e, c);
    return *this;
  }
  LaurentQ& operator-=(const LaurentQ& o) {
    for (const auto& [e, c] : o.coeffs_) add_term(e, -c);
    return *this;
  }
  friend LaurentQ operator+(LaurentQ a, const LaurentQ& b) { return a += b; }
  friend LaurentQ operator-(LaurentQ a, const LaurentQ& b) { return a -= b; }

  friend LaurentQ operator*(const LaurentQ& a, const LaurentQ& b) {
    LaurentQ r;
    for (const auto& [ea, ca] : a.coeffs_)
      for (const auto& [eb, cb] : b.coeffs_) r.add_term(ea + eb, ca * cb);
    return r;
  }
  LaurentQ& operator*=(const LaurentQ& o) { return *this = *this * o; }

  friend LaurentQ operator*(const Rational& s, const LaurentQ& a) {
    LaurentQ r;
    if (s == 0) return r;
    for (const auto& [e, c] : a.coeffs_) r.coeffs_[e] = s * c;
    return r;
  }

  bool operator==(const LaurentQ& o) const { return coeffs_ == o.coeffs_; }
  bool operator!=(const LaurentQ& o) const { return !(*this == o); }

  /// Multiply by q^{doubled/2}.
  LaurentQ shifted(HalfInt doubled) const {
    LaurentQ r;
    for (const auto& [e, c] : coeffs_) r.coeffs_[e + doubled] = c;
    return r;
  }

  /// Bar involution q -> q^{-1}.
  LaurentQ bar() const {
    LaurentQ r;
    for (const auto& [e, c] : coeffs_) r.coeffs_[-e] = c;
    return r;
  }

  Rational eval_at_one() const {
    Rational s = 0;
    for (const auto& [e, c] : coeffs_) s += c;
    return s;
  }

  /// Exact division; throws if the division leaves a remainder.
  LaurentQ divided_by(const LaurentQ& d) const {
    if (d.is_zero()) throw std::invalid_argument("LaurentQ: division by zero");
    LaurentQ rem = *this, quot;
    const auto lead = d.coeffs_.rbegin();
    while (!rem.is_zero()) {
      const auto rl = rem.coeffs_.rbegin();
      HalfInt e = rl->first - lead->first;
      Rational c = rl->second / lead->second;
      LaurentQ t = monomial(e, c);
      quot += t;
      rem -= t * d;
    }
    return quot;
  }

  /// Sorted monomial rendering, e.g. "q^-1 + q" or "2q^{3/2}".
  std::string str() const {
    if (coeffs_.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (const auto& [e, c] : coeffs_) {
      Rational a = c;
      if (!first) {
        os << (a < 0 ? " - " : " + ");
        if (a < 0) a = -a;
      } else if (a < 0) {
        os << "-";
        a = -a;
      }
      first = false;
      if (e == 0) {
        os << to_string(a);
        continue;
      }
      if (a != 1) os << to_string(a);
      if (e == 2) {
        os << "q";
      } else if (e % 2 == 0) {
        os << "q^" << e / 2;
      } else {
        os << "q^{" << e << "/2}";
      }
    }
    return os.str();
  }

 private:
  void add_term(HalfInt e, const Rational& c) {
    auto it = coeffs_.find(e);
    if (it == coeffs_.end()) {
      if (c != 0) coeffs_[e] = c;
    } else {
      it->second += c;
      if (it->second == 0) coeffs_.erase(it);
    }
  }

  std::map<HalfInt, Rational> coeffs_;
};

/// Power series in q truncated at a fixed top exponent (doubled).  All
/// arithmetic drops terms above the truncation degree.
class QSeries {
 public:
  explicit QSeries(HalfInt truncation_doubled) : trunc_(truncation_doubled) {}

  static QSeries one(HalfInt trunc) {
    QSeries s(trunc);
    s.coeffs_[0] = 1;
    return s;
  }
  static QSeries from_laurent(const LaurentQ& p, HalfInt trunc) {
    QSeries s(trunc);
    for (const auto& [e, c] : p.coeffs())
      if (e <= trunc) s.coeffs_[e] = c;
    return s;
  }

  HalfInt truncation() const { return trunc_; }
  const std::map<HalfInt, Rational>& coeffs() const { return coeffs_; }
  Rational coeff(HalfInt doubled) const {
    auto it = coeffs_.find(doubled);
    return it == coeffs_.end() ? Rational(0) : it->second;
  }

  QSeries& operator+=(const QSeries& o) {
    for (const auto& [e, c] : o.coeffs_)
      if (e <= trunc_) add_term(e, c);
    return *this;
  }
  friend QSeries operator+(QSeries a, const QSeries& b) { return a += b; }

  friend QSeries operator*(const QSeries& a, const QSeries& b) {
    QSeries r(std::min(a.trunc_, b.trunc_));
    for (const auto& [ea, ca] : a.coeffs_)
      for (const auto& [eb, cb] : b.coeffs_)
        if (ea + eb <= r.trunc_) r.add_term(ea + eb, ca * cb);
    return r;
  }

  friend QSeries operator*(const LaurentQ& p, const QSeries& s) {
    QSeries r(s.trunc_);
    for (const auto& [ep, cp] : p.coeffs())
      for (const auto& [es, cs] : s.coeffs_)
        if (ep + es <= r.trunc_) r.add_term(ep + es, cp * cs);
    return r;
  }

  /// Divide by 1 - q^{m} (m doubled, m > 0) via recursive coefficient
  /// extraction: c'_e = c_e + c'_{e-m}.
  QSeries divided_by_one_minus_qpow(HalfInt m_doubled) const {
    if (m_doubled <= 0)
      throw std::invalid_argument("QSeries: need positive exponent in 1-q^m");
    QSeries r(trunc_);
    // Walk exponents upward on the grid spanned by existing keys + multiples.
    std::map<HalfInt, Rational> out;
    // Lowest possible exponent: min of input keys (series supported below by
    // finitely many negative terms).
    HalfInt lo = coeffs_.empty() ? 0 : coeffs_.begin()->first;
    for (HalfInt e = lo; e <= trunc_; ++e) {
      Rational c = coeff(e);
      auto prev = out.find(e - m_doubled);
      if (prev != out.end()) c += prev->second;
      if (c != 0) out[e] = c;
    }
    r.coeffs_ = std::move(out);
    return r;
  }

  /// The same series cut down to a lower truncation bound.
  QSeries truncated(HalfInt new_trunc) const {
    if (new_trunc > trunc_)
      throw std::invalid_argument("QSeries: cannot raise the truncation");
    QSeries r(new_trunc);
    for (const auto& [e, c] : coeffs_)
      if (e <= new_trunc) r.coeffs_.emplace(e, c);
    return r;
  }

  bool operator==(const QSeries& o) const {
    return trunc_ == o.trunc_ && coeffs_ == o.coeffs_;
  }

  std::string str() const {
    LaurentQ p;
    for (const auto& [e, c] : coeffs_) p += LaurentQ::monomial(e, c);
    return p.str();
  }

 private:
  void add_term(HalfInt e, const Rational& c) {
    auto it = coeffs_.find(e);
    if (it == coeffs_.end()) {
      if (c != 0) coeffs_[e] = c;
    } else {
      it->second += c;
      if (it->second == 0) coeffs_.erase(it);
    }
  }

  HalfInt trunc_;
  std::map<HalfInt, Rational> coeffs_;
};

}  // namespace foamcalc
