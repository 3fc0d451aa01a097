#pragma once

#include <algorithm>
#include <iterator>
#include <map>
#include <stdexcept>
#include <vector>

#include "foamcalc/rational.hpp"
#include "foamcalc/webs.hpp"

namespace foamcalc {

/// Dense exact matrix, just enough for the q=1 web oracle.
struct Mat {
  int rows = 0, cols = 0;
  std::vector<Rational> data;

  Mat() = default;
  Mat(int r, int c) : rows(r), cols(c), data(size_t(r) * c) {}
  Rational& at(int i, int j) { return data[size_t(i) * cols + j]; }
  const Rational& at(int i, int j) const { return data[size_t(i) * cols + j]; }

  static Mat eye(int n) {
    Mat m(n, n);
    for (int i = 0; i < n; ++i) m.at(i, i) = 1;
    return m;
  }

  Mat operator*(const Mat& o) const {
    if (cols != o.rows) throw std::invalid_argument("Mat: shape mismatch");
    Mat r(rows, o.cols);
    for (int i = 0; i < rows; ++i)
      for (int k = 0; k < cols; ++k) {
        const Rational& a = at(i, k);
        if (a == 0) continue;
        for (int j = 0; j < o.cols; ++j)
          if (o.at(k, j) != 0) r.at(i, j) += a * o.at(k, j);
      }
    return r;
  }

  bool operator==(const Mat& o) const {
    return rows == o.rows && cols == o.cols && data == o.data;
  }

  Rational trace() const {
    if (rows != cols) throw std::invalid_argument("Mat: trace of non-square");
    Rational t = 0;
    for (int i = 0; i < rows; ++i) t += at(i, i);
    return t;
  }
};

namespace detail {

inline std::vector<std::vector<int>> subsets(int n, int k) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur;
  auto rec = [&](auto&& self, int start) -> void {
    if (static_cast<int>(cur.size()) == k) {
      out.push_back(cur);
      return;
    }
    for (int v = start; v < n; ++v) {
      cur.push_back(v);
      self(self, v + 1);
      cur.pop_back();
    }
  };
  rec(rec, 0);
  return out;
}

/// Sign of sorting the concatenation S.T of two disjoint sorted subsets:
/// parity of pairs (x in S, y in T) with x > y.  Returns 0 if not disjoint.
inline int shuffle_sign(const std::vector<int>& S, const std::vector<int>& T) {
  long inv = 0;
  for (int x : S)
    for (int y : T) {
      if (x == y) return 0;
      if (x > y) ++inv;
    }
  return inv % 2 ? -1 : 1;
}

}  // namespace detail

/// Basis of the tensor product of exterior powers indexed by a composition:
/// tuples of k_i-subsets of {0..N-1}.
class WedgeSpace {
 public:
  WedgeSpace(const Composition& c, int N) : comp_(c), N_(N) {
    for (int p : c.parts())
      if (p > N) throw std::invalid_argument("WedgeSpace: N below thickness");
    std::vector<std::vector<std::vector<int>>> per_part;
    long dim = 1;
    for (int p : c.parts()) {
      per_part.push_back(detail::subsets(N, p));
      dim *= static_cast<long>(per_part.back().size());
      if (dim > 10000)
        throw std::invalid_argument("WedgeSpace: dimension cap exceeded");
    }
    std::vector<std::vector<int>> cur(c.length());
    auto rec = [&](auto&& self, int slot) -> void {
      if (slot == c.length()) {
        index_[cur] = static_cast<int>(basis_.size());
        basis_.push_back(cur);
        return;
      }
      for (const auto& s : per_part[slot]) {
        cur[slot] = s;
        self(self, slot + 1);
      }
    };
    rec(rec, 0);
  }

  int dim() const { return static_cast<int>(basis_.size()); }
  const std::vector<std::vector<int>>& basis_elem(int i) const {
    return basis_[i];
  }
  int index_of(const std::vector<std::vector<int>>& b) const {
    return index_.at(b);
  }
  const Composition& comp() const { return comp_; }
  int N() const { return N_; }

 private:
  Composition comp_;
  int N_;
  std::vector<std::vector<std::vector<int>>> basis_;
  std::map<std::vector<std::vector<int>>, int> index_;
};

/// One layer as a matrix from WedgeSpace(src) to WedgeSpace(tgt).
inline Mat layer_to_map(const Layer& l, const WedgeSpace& src,
                        const WedgeSpace& tgt) {
  Mat m(tgt.dim(), src.dim());
  for (int j = 0; j < src.dim(); ++j) {
    auto b = src.basis_elem(j);
    if (l.kind == Layer::Kind::Merge) {
      const auto &S = b[l.slot], &T = b[l.slot + 1];
      int sign = detail::shuffle_sign(S, T);
      if (sign == 0) continue;
      std::vector<int> u;
      std::merge(S.begin(), S.end(), T.begin(), T.end(), std::back_inserter(u));
      auto out = b;
      out[l.slot] = u;
      out.erase(out.begin() + l.slot + 1);
      m.at(tgt.index_of(out), j) += sign;
    } else {
      const auto& T = b[l.slot];
      for (const auto& pick : detail::subsets(static_cast<int>(T.size()), l.a)) {
        std::vector<int> S, R;
        size_t pi = 0;
        for (size_t t = 0; t < T.size(); ++t) {
          if (pi < pick.size() && static_cast<int>(t) == pick[pi]) {
            S.push_back(T[t]);
            ++pi;
          } else {
            R.push_back(T[t]);
          }
        }
        int sign = detail::shuffle_sign(S, R);
        auto out = b;
        out[l.slot] = S;
        out.insert(out.begin() + l.slot + 1, R);
        m.at(tgt.index_of(out), j) += sign;
      }
    }
  }
  return m;
}

/// The whole web as a linear map at q=1.  Merge acts by wedge
/// multiplication, Split by comultiplication; m after Delta on a strand of
/// thickness a+b is C(a+b,a) times the identity.
inline Mat web_to_map(const BlWeb& w, int N) {
  WedgeSpace cur(w.source(), N);
  Mat m = Mat::eye(cur.dim());
  for (int h = 0; h < w.num_layers(); ++h) {
    WedgeSpace next(w.comp_at(h + 1), N);
    m = layer_to_map(w.layers()[h], cur, next) * m;
    cur = std::move(next);
  }
  return m;
}

inline Rational annular_trace(const AnnularWeb& w, int N) {
  return web_to_map(w.word(), N).trace();
}

}  // namespace foamcalc
