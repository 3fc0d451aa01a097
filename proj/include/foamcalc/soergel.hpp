#pragma once

#include <functional>
#include <map>
#include <memory>
#include <tuple>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "foamcalc/glnoracle.hpp"
#include "foamcalc/partition.hpp"
#include "foamcalc/qcomb.hpp"
#include "foamcalc/sympoly.hpp"
#include "foamcalc/webs.hpp"

namespace foamcalc {

/// Blockwise invariant algebra A_c inside Q[x_1..x_k]: polynomials
/// symmetric within each block of the composition.  Free on the blockwise
/// elementary symmetric polynomials.
class InvariantAlgebra {
 public:
  explicit InvariantAlgebra(Composition c) : comp_(std::move(c)) {}

  const Composition& comp() const { return comp_; }
  int level() const { return comp_.level(); }

  /// Positive-degree generators e_{i,j} (block i, 1 <= j <= k_i).
  std::vector<MultiPoly> generators() const {
    std::vector<MultiPoly> gens;
    int k = level(), off = 0;
    for (int p : comp_.parts()) {
      std::vector<int> slots(p);
      for (int i = 0; i < p; ++i) slots[i] = off + i;
      for (int j = 1; j <= p; ++j)
        gens.push_back(elementary_sym(p, j).embedded(k, slots));
      off += p;
    }
    return gens;
  }

  /// Monomial basis (products of generators) of the polynomial-degree-d
  /// piece.  Cached; generator exponent tuples are enumerated greedily.
  const std::vector<MultiPoly>& basis(int d) const {
    auto it = basis_.find(d);
    if (it != basis_.end()) return it->second;
    std::vector<MultiPoly> out;
    std::vector<int> gen_degs;
    std::vector<MultiPoly> gens = generators();
    for (int p : comp_.parts())
      for (int j = 1; j <= p; ++j) gen_degs.push_back(j);
    MultiPoly cur = MultiPoly::one(level());
    auto rec = [&](auto&& self, size_t gi, int rem, const MultiPoly& acc) -> void {
      if (gi == gens.size()) {
        if (rem == 0) out.push_back(acc);
        return;
      }
      self(self, gi + 1, rem, acc);
      if (gen_degs[gi] <= rem)
        self(self, gi, rem - gen_degs[gi], acc * gens[gi]);
    };
    rec(rec, 0, d, cur);
    return basis_.emplace(d, std::move(out)).first->second;
  }

  int piece_dim(int d) const { return static_cast<int>(basis(d).size()); }

 private:
  Composition comp_;
  mutable std::map<int, std::vector<MultiPoly>> basis_;
};

namespace soergeldetail {

/// Incremental echelon form over monomial coordinates, with expression
/// tracking: expresses a polynomial in the span of the inserted ones.
class Expander {
 public:
  void insert(const MultiPoly& p) {
    auto red = reduce(p);
    if (red.first.is_zero())
      throw std::runtime_error("Expander: dependent basis vector");
    Row r;
    r.combo.assign(n_ + 1, 0);
    for (size_t i = 0; i < red.second.size(); ++i) r.combo[i] = -red.second[i];
    r.combo[n_] = 1;
    const auto& [lead, c] = *red.first.terms().rbegin();
    r.poly = Rational(1) / c * red.first;
    for (auto& x : r.combo) x = x / c;
    rows_.emplace(lead, std::move(r));
    ++n_;
  }

  std::optional<std::vector<Rational>> express(const MultiPoly& p) const {
    auto red = reduce(p);
    if (!red.first.is_zero()) return std::nullopt;
    red.second.resize(n_, 0);
    return red.second;
  }

  int size() const { return n_; }

 private:
  struct Row {
    MultiPoly poly;                 // normalized: leading coefficient 1
    std::vector<Rational> combo;    // expression in the inserted vectors
  };

  std::pair<MultiPoly, std::vector<Rational>> reduce(MultiPoly p) const {
    std::vector<Rational> combo(n_, 0);
    while (!p.is_zero()) {
      const auto& [lead, c] = *p.terms().rbegin();
      auto it = rows_.find(lead);
      if (it == rows_.end()) break;
      Rational f = c;
      p -= f * it->second.poly;
      for (size_t i = 0; i < it->second.combo.size(); ++i)
        combo[i] += f * it->second.combo[i];
    }
    return {std::move(p), std::move(combo)};
  }

  std::map<MultiPoly::Expo, Row> rows_;  // keyed by leading monomial
  int n_ = 0;
};

inline std::vector<Partition> partitions_in_box(int rows, int cols) {
  std::vector<Partition> out;
  std::vector<int> cur;
  auto rec = [&](auto&& self, int row, int maxc) -> void {
    out.emplace_back(std::vector<int>(cur.begin(), cur.end()));
    if (row == rows) return;
    for (int c = maxc; c >= 1; --c) {
      cur.push_back(c);
      self(self, row + 1, c);
      cur.pop_back();
    }
  };
  rec(rec, 0, cols);
  return out;
}

/// Reduced-row-echelon quotient of a coordinate space by relation rows,
/// held sparsely: big chains produce many mostly-empty relations.
class Quotient {
 public:
  using SparseRow = std::map<int, Rational>;

  Quotient() = default;
  Quotient(int ncols, std::vector<SparseRow> rels) : ncols_(ncols) {
    for (auto& row : rels) insert_row(std::move(row));
    for (int j = 0; j < ncols_; ++j)
      if (!rows_.count(j)) free_.push_back(j);
  }

  int ncols() const { return ncols_; }
  int dim() const { return static_cast<int>(free_.size()); }
  const std::vector<int>& free_cols() const { return free_; }

  std::vector<Rational> project(std::vector<Rational> v) const {
    for (const auto& [p, row] : rows_) {
      if (v[p] == 0) continue;
      Rational f = v[p];
      for (const auto& [c, val] : row) v[c] -= f * val;
    }
    std::vector<Rational> out(free_.size());
    for (size_t i = 0; i < free_.size(); ++i) out[i] = v[free_[i]];
    return out;
  }

 private:
  static void axpy(SparseRow& row, const Rational& f, const SparseRow& src) {
    for (const auto& [c, v] : src) {
      auto it = row.find(c);
      if (it == row.end()) {
        row.emplace(c, -f * v);
      } else {
        it->second -= f * v;
        if (it->second == 0) row.erase(it);
      }
    }
  }

  void insert_row(SparseRow row) {
    // RREF rows have their pivot as the first entry, so one forward sweep
    // per hit suffices; restart past the eliminated pivot each time.
    auto it = row.begin();
    while (it != row.end()) {
      auto p = rows_.find(it->first);
      if (p == rows_.end()) {
        ++it;
        continue;
      }
      int pcol = it->first;
      Rational f = it->second;
      axpy(row, f, p->second);
      it = row.upper_bound(pcol);
    }
    if (row.empty()) return;
    int piv = row.begin()->first;
    Rational lead = row.begin()->second;
    for (auto& [c, v] : row) v = v / lead;
    for (auto& [p, pr] : rows_) {
      auto hit = pr.find(piv);
      if (hit == pr.end()) continue;
      Rational f = hit->second;
      axpy(pr, f, row);
    }
    rows_.emplace(piv, std::move(row));
  }

  int ncols_ = 0;
  std::map<int, SparseRow> rows_;
  std::vector<int> free_;
};

/// Frobenius dual basis: polynomials d_lambda in A_{(a,b)} (window-local,
/// a+b variables) with trace(s_lambda * d_mu) = delta_{lambda,mu}, where
/// the trace is the symmetrized quotient onto A_{(a+b)}.  Solved once per
/// (a, b) and cached.
inline const std::map<Partition, MultiPoly>& frobenius_dual_basis(int a,
                                                                  int b) {
  static std::map<std::pair<int, int>, std::map<Partition, MultiPoly>> cache;
  auto key = std::make_pair(a, b);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;

  int n = a + b;
  auto lambdas = partitions_in_box(a, b);
  std::vector<int> slots_a(a);
  for (int i = 0; i < a; ++i) slots_a[i] = i;
  InvariantAlgebra Afine(Composition{a, b});
  InvariantAlgebra Acoarse(Composition{n});

  std::map<Partition, MultiPoly> duals;
  for (const auto& mu : lambdas) {
    int dmu = a * b - mu.size();
    const auto& cand = Afine.basis(dmu);
    // unknowns: coefficients over cand; equations: for each lambda, the
    // expansion of trace(s_lambda * d) in the coarse basis must match
    // delta_{lambda,mu}.
    std::vector<std::map<int, Rational>> cols(cand.size());
    std::vector<Rational> rhs;
    int neq = 0;
    std::map<std::pair<std::string, int>, int> eq_index;
    auto eq_of = [&](const Partition& lam, int comp_idx) {
      auto k = std::make_pair(lam.str(), comp_idx);
      auto e = eq_index.find(k);
      if (e != eq_index.end()) return e->second;
      eq_index.emplace(k, neq);
      rhs.push_back(0);
      return neq++;
    };
    for (const auto& lam : lambdas) {
      int tr_deg = static_cast<int>(lam.size()) + dmu - a * b;
      if (tr_deg < 0) continue;
      MultiPoly slam = schur(lam, a).embedded(n, slots_a);
      Expander ex;
      for (const auto& p : Acoarse.basis(tr_deg)) ex.insert(p);
      for (size_t j = 0; j < cand.size(); ++j) {
        MultiPoly tr = symmetrized_quotient(slam * cand[j], 0, a, b);
        auto coords = ex.express(tr);
        if (!coords)
          throw std::runtime_error("frobenius_dual_basis: trace not coarse");
        for (size_t t = 0; t < coords->size(); ++t)
          if ((*coords)[t] != 0)
            cols[j][eq_of(lam, static_cast<int>(t))] += (*coords)[t];
      }
      if (lam == mu && tr_deg == 0) rhs[eq_of(lam, 0)] = 1;
    }
    // dense solve
    std::vector<std::vector<Rational>> Arows(neq,
                                             std::vector<Rational>(cand.size() + 1, 0));
    for (size_t j = 0; j < cand.size(); ++j)
      for (const auto& [r, v] : cols[j]) Arows[r][j] = v;
    for (int r = 0; r < neq; ++r) Arows[r][cand.size()] = rhs[r];
    // gaussian elimination
    size_t rank = 0;
    for (size_t c = 0; c < cand.size() && rank < Arows.size(); ++c) {
      size_t piv = rank;
      while (piv < Arows.size() && Arows[piv][c] == 0) ++piv;
      if (piv == Arows.size()) continue;
      std::swap(Arows[piv], Arows[rank]);
      Rational lead = Arows[rank][c];
      for (auto& x : Arows[rank]) x = x / lead;
      for (size_t r = 0; r < Arows.size(); ++r) {
        if (r == rank || Arows[r][c] == 0) continue;
        Rational fct = Arows[r][c];
        for (size_t t = 0; t <= cand.size(); ++t)
          Arows[r][t] -= fct * Arows[rank][t];
      }
      ++rank;
    }
    // read solution (free variables set to zero); check consistency
    std::vector<Rational> sol(cand.size(), 0);
    for (const auto& row : Arows) {
      size_t lead = 0;
      while (lead < cand.size() && row[lead] == 0) ++lead;
      if (lead == cand.size()) {
        if (row[cand.size()] != 0)
          throw std::runtime_error("frobenius_dual_basis: inconsistent");
        continue;
      }
      sol[lead] = row[cand.size()];
    }
    MultiPoly d(n);
    for (size_t j = 0; j < cand.size(); ++j) d += sol[j] * cand[j];
    duals.emplace(mu, std::move(d));
  }
  return cache.emplace(key, std::move(duals)).first->second;
}

}  // namespace soergeldetail

/// A Bott-Samelson tensor chain: one invariant-algebra factor per layer
/// (the finer side of the vertex), tensored over the intermediate
/// compositions.  factors[0] is the innermost factor (first layer); the
/// identity web contributes a single factor A_c.
struct Bimodule {
  BlWeb web;
  std::vector<Composition> factors;
  std::vector<Composition> middles;  // middles[j] sits between factors j, j+1

  const Composition& source() const { return web.source(); }
  const Composition& target() const { return web.target(); }
  long shift_doubled() const { return web.shift_doubled(); }
  int num_factors() const { return static_cast<int>(factors.size()); }

  /// Polynomial generation bound as a bimodule: the Schur basis of each
  /// merge extension tops out at the full a x b box.
  int generation_bound() const {
    int g = 0;
    for (const auto& l : web.layers()) g += l.a * l.b;
    return g;
  }
};

inline Bimodule build_bimodule(const BlWeb& w) {
  Bimodule b;
  b.web = w;
  int n = w.num_layers();
  if (n == 0) {
    b.factors.push_back(w.source());
    return b;
  }
  for (int i = 1; i <= n; ++i) {
    const Layer& l = w.layers()[i - 1];
    b.factors.push_back(l.kind == Layer::Kind::Merge ? w.comp_at(i - 1)
                                                     : w.comp_at(i));
    if (i < n) b.middles.push_back(w.comp_at(i));
  }
  return b;
}

/// Graded pieces of a chain computed straight from the definition:
/// spans of tuples of basis monomials modulo the middle-action relations
/// f·a (x) b - a (x) f·b, eliminated degreewise.  Quadratic blowup in the
/// chain length makes this usable only at small degree; it is kept as the
/// reference implementation that the ladder-basis class is tested against.
class RelationBimodulePieces {
 public:
  explicit RelationBimodulePieces(Bimodule b) : bim_(std::move(b)) {
    for (const auto& f : bim_.factors) algebras_.emplace_back(f);
    for (const auto& m : bim_.middles) mid_algebras_.emplace_back(m);
  }

  const Bimodule& bim() const { return bim_; }

  int dim(int m) { return piece(m).quo.dim(); }

  /// Coordinates (after projection) of a decorated tuple; every factor must
  /// be homogeneous and the total degree must equal m (zero vector if the
  /// decoration is homogeneous of a different degree).
  std::vector<Rational> coords(int m, const std::vector<MultiPoly>& decor) {
    if (static_cast<int>(decor.size()) != bim_.num_factors())
      throw std::invalid_argument("coords: wrong tuple length");
    Piece& P = piece(m);
    std::vector<Rational> v(P.tuples.size(), 0);
    accumulate_tuple_vector(m, decor, Rational(1), v);
    return P.quo.project(std::move(v));
  }

  /// Representative decorated tuples of the quotient basis of piece m.
  std::vector<std::vector<MultiPoly>> basis_decors(int m) {
    Piece& P = piece(m);
    std::vector<std::vector<MultiPoly>> out;
    for (int col : P.quo.free_cols()) out.push_back(tuple_decor(P.tuples[col]));
    return out;
  }

  /// Matrix of multiplication by g into the outermost (left=true) or
  /// innermost factor, piece m -> piece m + deg g.  Memoized: hom solves
  /// request the same matrix once per degree probed.
  const Mat& action(int m, const MultiPoly& g, bool left) {
    auto key = std::make_tuple(m, left, g);
    auto hit = actions_.find(key);
    if (hit != actions_.end()) return hit->second;
    int e = g.degree();
    if (e < 0) throw std::invalid_argument("action: zero polynomial");
    Mat out(dim(m + e), dim(m));
    int slot = left ? bim_.num_factors() - 1 : 0;
    auto reps = basis_decors(m);
    for (size_t c = 0; c < reps.size(); ++c) {
      auto decor = reps[c];
      decor[slot] = g * decor[slot];
      auto v = coords(m + e, decor);
      for (int r = 0; r < out.rows; ++r) out.at(r, c) = v[r];
    }
    return actions_.emplace(std::move(key), std::move(out)).first->second;
  }

  const InvariantAlgebra& factor_algebra(int i) const { return algebras_[i]; }

 private:
  struct Tuple {
    std::vector<int> degs;
    std::vector<int> idxs;
  };
  struct Piece {
    std::vector<Tuple> tuples;
    std::map<std::pair<std::vector<int>, std::vector<int>>, int> index;
    soergeldetail::Quotient quo;
  };

  std::vector<MultiPoly> tuple_decor(const Tuple& t) const {
    std::vector<MultiPoly> d;
    for (size_t i = 0; i < t.degs.size(); ++i)
      d.push_back(algebras_[i].basis(t.degs[i])[t.idxs[i]]);
    return d;
  }

  /// Add coeff * (expansion of decor in the tuple basis of piece m) to v.
  /// Non-homogeneous factors are split into homogeneous parts first.
  void accumulate_tuple_vector(int m, const std::vector<MultiPoly>& decor,
                               const Rational& coeff,
                               std::vector<Rational>& v) {
    int r = bim_.num_factors();
    Piece& P = piece(m);
    // expansions per factor per homogeneous degree
    std::vector<std::map<int, std::vector<Rational>>> fac(r);
    for (int i = 0; i < r; ++i) {
      std::map<int, MultiPoly> parts;
      for (const auto& [e, c] : decor[i].terms()) {
        int d = 0;
        for (int x : e) d += x;
        auto it = parts.find(d);
        if (it == parts.end())
          it = parts.emplace(d, MultiPoly(decor[i].num_vars())).first;
        it->second.add_term(e, c);
      }
      for (auto& [d, p] : parts) {
        auto coords = expander(i, d).express(p);
        if (!coords)
          throw std::runtime_error("BimodulePieces: factor not in algebra");
        fac[i].emplace(d, std::move(*coords));
      }
    }
    std::vector<int> degs(r), idxs(r);
    auto rec = [&](auto&& self, int i, int rem, const Rational& acc) -> void {
      if (i == r) {
        if (rem != 0) return;
        auto it = P.index.find({degs, idxs});
        if (it == P.index.end())
          throw std::runtime_error("BimodulePieces: tuple outside piece");
        v[it->second] += acc;
        return;
      }
      for (const auto& [d, coords] : fac[i]) {
        if (d > rem) continue;
        degs[i] = d;
        for (size_t j = 0; j < coords.size(); ++j) {
          if (coords[j] == 0) continue;
          idxs[i] = static_cast<int>(j);
          self(self, i + 1, rem - d, acc * coords[j]);
        }
      }
    };
    rec(rec, 0, m, coeff);
  }

  soergeldetail::Expander& expander(int factor, int d) {
    auto key = std::make_pair(factor, d);
    auto it = expanders_.find(key);
    if (it != expanders_.end()) return it->second;
    soergeldetail::Expander ex;
    for (const auto& p : algebras_[factor].basis(d)) ex.insert(p);
    return expanders_.emplace(key, std::move(ex)).first->second;
  }

  Piece& piece(int m) {
    auto it = pieces_.find(m);
    if (it != pieces_.end()) return it->second;
    Piece P;
    int r = bim_.num_factors();
    std::vector<int> degs(r);
    auto rec = [&](auto&& self, int i, int rem) -> void {
      if (i == r) {
        if (rem != 0) return;
        int sizes = 1;
        std::vector<int> idxs(r, 0);
        for (int j = 0; j < r; ++j)
          sizes *= algebras_[j].piece_dim(degs[j]);
        if (sizes == 0) return;
        auto rec2 = [&](auto&& self2, int j) -> void {
          if (j == r) {
            P.index[{degs, idxs}] = static_cast<int>(P.tuples.size());
            P.tuples.push_back(Tuple{degs, idxs});
            return;
          }
          for (int x = 0; x < algebras_[j].piece_dim(degs[j]); ++x) {
            idxs[j] = x;
            self2(self2, j + 1);
          }
        };
        rec2(rec2, 0);
        return;
      }
      for (int d = 0; d <= rem; ++d) {
        degs[i] = d;
        self(self, i + 1, rem - d);
      }
    };
    rec(rec, 0, m);
    it = pieces_.emplace(m, std::move(P)).first;
    // relations, built against the freshly enumerated tuple list
    Piece& ref = it->second;
    std::vector<soergeldetail::Quotient::SparseRow> rels;
    std::vector<Rational> dense(ref.tuples.size());
    for (size_t j = 0; j < mid_algebras_.size(); ++j) {
      for (const auto& g : mid_algebras_[j].generators()) {
        int e = g.degree();
        if (e > m) continue;
        Piece& lower = piece(m - e);
        for (const auto& t : lower.tuples) {
          auto decor = tuple_decor(t);
          std::fill(dense.begin(), dense.end(), Rational(0));
          auto d1 = decor;
          d1[j + 1] = g * d1[j + 1];
          accumulate_tuple_vector(m, d1, Rational(1), dense);
          auto d2 = decor;
          d2[j] = g * d2[j];
          accumulate_tuple_vector(m, d2, Rational(-1), dense);
          soergeldetail::Quotient::SparseRow row;
          for (size_t c = 0; c < dense.size(); ++c)
            if (dense[c] != 0) row.emplace(static_cast<int>(c), dense[c]);
          if (!row.empty()) rels.push_back(std::move(row));
        }
      }
    }
    ref.quo = soergeldetail::Quotient(static_cast<int>(ref.tuples.size()),
                                      std::move(rels));
    return ref;
  }

  Bimodule bim_;
  std::vector<InvariantAlgebra> algebras_;
  std::vector<InvariantAlgebra> mid_algebras_;
  std::map<int, Piece> pieces_;
  std::map<std::pair<int, int>, soergeldetail::Expander> expanders_;
  std::map<std::tuple<int, bool, MultiPoly>, Mat> actions_;
};

/// Graded pieces of a chain in its free ladder basis.  Every middle is a
/// one-vertex coarsening of (or equal to) the factor tensored on over it,
/// and the finer algebra is free over the coarser one with the box-Schur
/// basis of that vertex.  A piece therefore has the explicit basis
/// { b_0 (x) s_{lam_1} (x) ... (x) s_{lam_{r-1}} } with b_0 running over
/// the innermost algebra's monomial basis, so no relation solving is
/// needed: coordinates are computed by straightening each factor across
/// its step with the Frobenius dual basis (p = sum_lam s_lam * tr(d_lam p),
/// the coarse coefficient migrating inward).
class BimodulePieces {
 public:
  explicit BimodulePieces(Bimodule b) : bim_(std::move(b)) {
    for (const auto& f : bim_.factors) algebras_.emplace_back(f);
    int k = bim_.web.level();
    src_step_ = make_step(bim_.factors[0], bim_.web.source(), k);
    for (int j = 1; j < bim_.num_factors(); ++j)
      steps_.push_back(make_step(bim_.factors[j], bim_.middles[j - 1], k));
  }

  const Bimodule& bim() const { return bim_; }

  int dim(int m) { return piece(m).dim; }

  /// Coordinates of a decorated tuple in the ladder basis; terms whose
  /// total degree differs from m are dropped, matching the degreewise
  /// reading of a non-homogeneous decoration.
  std::vector<Rational> coords(int m, const std::vector<MultiPoly>& decor) {
    int r = bim_.num_factors();
    if (static_cast<int>(decor.size()) != r)
      throw std::invalid_argument("coords: wrong tuple length");
    Piece& P = piece(m);
    std::vector<Rational> v(P.dim, 0);
    std::vector<int> sel(steps_.size(), 0);
    std::function<void(int, const MultiPoly&)> rec = [&](int j,
                                                         const MultiPoly&
                                                             carry) {
      if (j == 0) {
        int d0 = m - sel_weight(sel);
        if (d0 < 0) return;
        MultiPoly part(carry.num_vars());
        for (const auto& [e, c] : carry.terms()) {
          int d = 0;
          for (int x : e) d += x;
          if (d == d0) part.add_term(e, c);
        }
        if (part.is_zero()) return;
        auto it = P.base.find(sel);
        if (it == P.base.end()) return;
        auto co = expander(0, d0).express(part);
        if (!co)
          throw std::runtime_error("BimodulePieces: factor not in algebra");
        for (size_t t = 0; t < co->size(); ++t)
          if ((*co)[t] != 0) v[it->second + static_cast<int>(t)] += (*co)[t];
        return;
      }
      const FreeStep& st = steps_[j - 1];
      if (st.trivial) {
        sel[j - 1] = 0;
        rec(j - 1, decor[j - 1] * carry);
        return;
      }
      for (size_t i = 0; i < st.lams.size(); ++i) {
        MultiPoly c = symmetrized_quotient(carry * st.dual_emb[i], st.offset,
                                           st.a, st.b);
        if (c.is_zero()) continue;
        sel[j - 1] = static_cast<int>(i);
        rec(j - 1, decor[j - 1] * c);
      }
    };
    rec(r - 1, decor[r - 1]);
    return v;
  }

  /// The basis decorations themselves: innermost monomial, box Schur per
  /// nontrivial step, 1 elsewhere.
  std::vector<std::vector<MultiPoly>> basis_decors(int m) {
    Piece& P = piece(m);
    int r = bim_.num_factors();
    int k = bim_.web.level();
    std::vector<std::vector<MultiPoly>> out(P.dim);
    for (const auto& [sel, off] : P.base) {
      int d0 = m - sel_weight(sel);
      const auto& b0 = algebras_[0].basis(d0);
      for (size_t i0 = 0; i0 < b0.size(); ++i0) {
        std::vector<MultiPoly> decor(r, MultiPoly::one(k));
        decor[0] = b0[i0];
        for (int j = 1; j < r; ++j)
          if (!steps_[j - 1].trivial)
            decor[j] = steps_[j - 1].schur_emb[sel[j - 1]];
        out[off + static_cast<int>(i0)] = std::move(decor);
      }
    }
    return out;
  }

  /// Matrix of multiplication by g into the outermost (left=true) or
  /// innermost factor, piece m -> piece m + deg g.  Memoized: hom solves
  /// request the same matrix once per degree probed.
  const Mat& action(int m, const MultiPoly& g, bool left) {
    auto key = std::make_tuple(m, left, g);
    auto hit = actions_.find(key);
    if (hit != actions_.end()) return hit->second;
    int e = g.degree();
    if (e < 0) throw std::invalid_argument("action: zero polynomial");
    Mat out(dim(m + e), dim(m));
    int slot = left ? bim_.num_factors() - 1 : 0;
    auto reps = basis_decors(m);
    for (size_t c = 0; c < reps.size(); ++c) {
      auto decor = reps[c];
      decor[slot] = g * decor[slot];
      auto v = coords(m + e, decor);
      for (int r = 0; r < out.rows; ++r) out.at(r, c) = v[r];
    }
    return actions_.emplace(std::move(key), std::move(out)).first->second;
  }

  const InvariantAlgebra& factor_algebra(int i) const { return algebras_[i]; }

  /// A homogeneous generator of the chain as a free right module over the
  /// boundary-source algebra: a box Schur per nontrivial step, including
  /// the step from the source composition into the innermost factor.
  struct FreeGen {
    int deg = 0;
    std::vector<MultiPoly> decor;
  };

  /// The free right-module basis over the source algebra.
  const std::vector<FreeGen>& free_basis() {
    if (free_.empty()) {
      int r = bim_.num_factors();
      int k = bim_.web.level();
      std::vector<int> sel(steps_.size() + 1, 0);  // [mu, lam_1, ...]
      std::function<void(int)> rec = [&](int pos) {
        if (pos == static_cast<int>(sel.size())) {
          FreeGen g;
          g.decor.assign(r, MultiPoly::one(k));
          if (!src_step_.trivial) {
            g.decor[0] = src_step_.schur_emb[sel[0]];
            g.deg += src_step_.lam_sizes[sel[0]];
          }
          for (size_t t = 0; t < steps_.size(); ++t)
            if (!steps_[t].trivial) {
              g.decor[t + 1] = steps_[t].schur_emb[sel[t + 1]];
              g.deg += steps_[t].lam_sizes[sel[t + 1]];
            }
          free_index_.emplace(sel, static_cast<int>(free_.size()));
          free_.push_back(std::move(g));
          return;
        }
        const FreeStep& st = pos == 0 ? src_step_ : steps_[pos - 1];
        int n = st.trivial ? 1 : static_cast<int>(st.lams.size());
        for (int i = 0; i < n; ++i) {
          sel[pos] = i;
          rec(pos + 1);
        }
      };
      rec(0);
    }
    return free_;
  }

  /// Right-module coefficients of a decorated tuple over the source
  /// algebra, aligned with free_basis(): straightening runs through every
  /// step including the source step, so no monomial expansion happens and
  /// the coefficients stay exact polynomials.
  std::vector<MultiPoly> free_coords(const std::vector<MultiPoly>& decor) {
    int r = bim_.num_factors();
    if (static_cast<int>(decor.size()) != r)
      throw std::invalid_argument("free_coords: wrong tuple length");
    int k = bim_.web.level();
    std::vector<MultiPoly> out(free_basis().size(), MultiPoly(k));
    std::vector<int> sel(steps_.size() + 1, 0);
    std::function<void(int, const MultiPoly&)> rec =
        [&](int j, const MultiPoly& carry) {
          if (j == 0) {
            auto deposit = [&](int mu, const MultiPoly& c) {
              if (c.is_zero()) return;
              sel[0] = mu;
              out[free_index_.at(sel)] += c;
            };
            if (src_step_.trivial) {
              deposit(0, carry);
              return;
            }
            for (size_t i = 0; i < src_step_.lams.size(); ++i)
              deposit(static_cast<int>(i),
                      symmetrized_quotient(carry * src_step_.dual_emb[i],
                                           src_step_.offset, src_step_.a,
                                           src_step_.b));
            return;
          }
          const FreeStep& st = steps_[j - 1];
          if (st.trivial) {
            sel[j] = 0;
            rec(j - 1, decor[j - 1] * carry);
            return;
          }
          for (size_t i = 0; i < st.lams.size(); ++i) {
            MultiPoly c = symmetrized_quotient(carry * st.dual_emb[i],
                                               st.offset, st.a, st.b);
            if (c.is_zero()) continue;
            sel[j] = static_cast<int>(i);
            rec(j - 1, decor[j - 1] * c);
          }
        };
    rec(r - 1, decor[r - 1]);
    return out;
  }

 private:
  struct FreeStep {
    bool trivial = true;
    int offset = 0, a = 0, b = 0;
    std::vector<Partition> lams;
    std::vector<int> lam_sizes;
    std::vector<MultiPoly> schur_emb, dual_emb;
  };
  struct Piece {
    std::map<std::vector<int>, int> base;  // lam selection -> first column
    int dim = 0;
  };

  /// fine must equal mid or refine it at exactly one slot; the nontrivial
  /// case carries the box-Schur basis and its Frobenius duals, embedded at
  /// the window.
  static FreeStep make_step(const Composition& fin, const Composition& mid,
                            int k) {
    FreeStep st;
    if (fin == mid) return st;
    int s = 0;
    while (s < fin.length() && s < mid.length() && fin[s] == mid[s]) ++s;
    bool ok = s + 1 < fin.length() && s < mid.length() &&
              fin[s] + fin[s + 1] == mid[s];
    for (int t = s + 2; ok && t < fin.length(); ++t)
      if (fin[t] != mid[t - 1]) ok = false;
    if (!ok || fin.length() != mid.length() + 1)
      throw std::invalid_argument(
          "BimodulePieces: not a one-vertex coarsening");
    st.trivial = false;
    st.a = fin[s];
    st.b = fin[s + 1];
    for (int t = 0; t < s; ++t) st.offset += fin[t];
    std::vector<int> slots_a(st.a), slots_ab(st.a + st.b);
    for (int i = 0; i < st.a; ++i) slots_a[i] = st.offset + i;
    for (int i = 0; i < st.a + st.b; ++i) slots_ab[i] = st.offset + i;
    for (const auto& [lam, dual] :
         soergeldetail::frobenius_dual_basis(st.a, st.b)) {
      st.lams.push_back(lam);
      st.lam_sizes.push_back(static_cast<int>(lam.size()));
      st.schur_emb.push_back(schur(lam, st.a).embedded(k, slots_a));
      st.dual_emb.push_back(dual.embedded(k, slots_ab));
    }
    return st;
  }

  int sel_weight(const std::vector<int>& sel) const {
    int u = 0;
    for (size_t t = 0; t < steps_.size(); ++t)
      if (!steps_[t].trivial) u += steps_[t].lam_sizes[sel[t]];
    return u;
  }

  Piece& piece(int m) {
    auto it = pieces_.find(m);
    if (it != pieces_.end()) return it->second;
    Piece P;
    int r = bim_.num_factors();
    std::vector<int> sel(steps_.size(), 0);
    std::function<void(int, int)> rec = [&](int j, int used) {
      if (j == r - 1) {
        int d0 = m - used;
        if (d0 < 0) return;
        int nd = algebras_[0].piece_dim(d0);
        if (nd == 0) return;
        P.base.emplace(sel, P.dim);
        P.dim += nd;
        return;
      }
      const FreeStep& st = steps_[j];
      if (st.trivial) {
        sel[j] = 0;
        rec(j + 1, used);
        return;
      }
      for (size_t i = 0; i < st.lams.size(); ++i) {
        if (used + st.lam_sizes[i] > m) continue;
        sel[j] = static_cast<int>(i);
        rec(j + 1, used + st.lam_sizes[i]);
      }
    };
    rec(0, 0);
    return pieces_.emplace(m, std::move(P)).first->second;
  }

  soergeldetail::Expander& expander(int factor, int d) {
    auto key = std::make_pair(factor, d);
    auto it = expanders_.find(key);
    if (it != expanders_.end()) return it->second;
    soergeldetail::Expander ex;
    for (const auto& p : algebras_[factor].basis(d)) ex.insert(p);
    return expanders_.emplace(key, std::move(ex)).first->second;
  }

  Bimodule bim_;
  std::vector<InvariantAlgebra> algebras_;
  FreeStep src_step_;
  std::vector<FreeStep> steps_;
  std::vector<FreeGen> free_;
  std::map<std::vector<int>, int> free_index_;
  std::map<int, Piece> pieces_;
  std::map<std::pair<int, int>, soergeldetail::Expander> expanders_;
  std::map<std::tuple<int, bool, MultiPoly>, Mat> actions_;
};

/// Process-wide memo of piece computations, keyed by the web.  Piece bases
/// and action matrices are expensive and webs recur constantly, so every
/// consumer shares one lazily-extended instance per web.
inline BimodulePieces& shared_pieces(const BlWeb& w) {
  static std::map<std::string, std::unique_ptr<BimodulePieces>> cache;
  std::string key = w.str();
  auto it = cache.find(key);
  if (it == cache.end())
    it = cache
             .emplace(key, std::make_unique<BimodulePieces>(build_bimodule(w)))
             .first;
  return *it->second;
}

/// Exact graded dimension of B(w) up to the (doubled) truncation degree.
/// An element of polynomial degree m sits in q-degree 2m - shift(w), i.e.
/// doubled degree 4m - shift_doubled.
inline QSeries graded_dim_bimodule(const BlWeb& w, HalfInt trunc_doubled) {
  BimodulePieces& P = shared_pieces(w);
  long sh = w.shift_doubled();
  LaurentQ acc;
  for (int m = 0; 4 * m - sh <= trunc_doubled; ++m) {
    int d = P.dim(m);
    if (d) acc += LaurentQ::monomial(4 * m - sh, d);
  }
  return QSeries::from_laurent(acc, trunc_doubled);
}

/// A degreewise-truncated bimodule map: block matrices between graded
/// pieces, homogeneous of the declared doubled degree.  Source piece of
/// polynomial degree m maps to the target piece of polynomial degree
/// m + (deg + shift(tgt) - shift(src))/4.
struct BimoduleMap {
  BlWeb src, tgt;
  HalfInt degree_doubled = 0;
  int mmax = 0;
  std::map<int, Mat> blocks;  // source polynomial degree -> matrix

  /// Target polynomial degree for a source degree, or nullopt when the
  /// degree bookkeeping makes the block identically zero.
  std::optional<int> target_m(int m) const {
    long num = 4L * m - src.shift_doubled() + degree_doubled +
               tgt.shift_doubled();
    if (num % 4 != 0) return std::nullopt;
    long t = num / 4;
    if (t < 0) return std::nullopt;
    return static_cast<int>(t);
  }
};

inline BimoduleMap identity_map(const BlWeb& w, BimodulePieces& P, int mmax) {
  BimoduleMap f;
  f.src = w;
  f.tgt = w;
  f.degree_doubled = 0;
  f.mmax = mmax;
  for (int m = 0; m <= mmax; ++m) f.blocks.emplace(m, Mat::eye(P.dim(m)));
  return f;
}

/// phi after psi, on the overlap of their cutoffs.
inline BimoduleMap compose(const BimoduleMap& phi, const BimoduleMap& psi) {
  BimoduleMap r;
  r.src = psi.src;
  r.tgt = phi.tgt;
  r.degree_doubled = phi.degree_doubled + psi.degree_doubled;
  r.mmax = psi.mmax;
  for (const auto& [m, B] : psi.blocks) {
    auto tm = psi.target_m(m);
    if (!tm) continue;
    auto it = phi.blocks.find(*tm);
    if (it == phi.blocks.end()) {
      r.mmax = std::min(r.mmax, m - 1);
      continue;
    }
    r.blocks.emplace(m, it->second * B);
  }
  return r;
}

/// Dimension of the space of degree-d bimodule maps.  The source chain is
/// a free right module over its boundary-source algebra on the box-Schur
/// generators, so a map is determined by the generator images and only the
/// target-side generator actions constrain them; the count is exact, hence
/// certified always holds.
struct HomResult {
  int dim = 0;
  bool certified = true;
};

inline HomResult hom_graded_dim(const BlWeb& w0, const BlWeb& w1,
                                HalfInt d_doubled) {
  if (w0.source() != w1.source() || w0.target() != w1.target())
    throw std::invalid_argument("hom_graded_dim: boundary mismatch");
  BimodulePieces& P0 = shared_pieces(w0);
  BimodulePieces& P1 = shared_pieces(w1);
  const auto& FB = P0.free_basis();
  long sh0 = w0.shift_doubled(), sh1 = w1.shift_doubled();
  // target piece degree for the image of a source element of degree m
  auto img_m = [&](int deg) -> std::optional<int> {
    long num = 4L * deg - sh0 + d_doubled + sh1;
    if (num % 4 != 0 || num < 0) return std::nullopt;
    return static_cast<int>(num / 4);
  };
  struct Blk {
    std::optional<int> m;
    int off = 0, n = 0;
  };
  std::vector<Blk> blk(FB.size());
  int nunk = 0;
  for (size_t i = 0; i < FB.size(); ++i) {
    blk[i].m = img_m(FB[i].deg);
    if (blk[i].m) {
      blk[i].n = P1.dim(*blk[i].m);
      blk[i].off = nunk;
      nunk += blk[i].n;
    }
  }
  HomResult res;
  if (nunk == 0) return res;
  int top = P0.bim().num_factors() - 1;
  std::vector<soergeldetail::Quotient::SparseRow> rows;
  for (const auto& a : InvariantAlgebra(w0.target()).generators()) {
    int e = a.degree();
    for (size_t i = 0; i < FB.size(); ++i) {
      auto mt = img_m(FB[i].deg + e);
      if (!mt) continue;
      int nrows = P1.dim(*mt);
      if (nrows == 0) continue;
      // structure constants: a * g_i = sum_j g_j * c_ij over the source
      auto decor = FB[i].decor;
      decor[top] = a * decor[top];
      auto cc = P0.free_coords(decor);
      // constraint rows: a * phi_i - sum_j phi_j * c_ij = 0
      std::vector<soergeldetail::Quotient::SparseRow> local(nrows);
      if (blk[i].m && blk[i].n) {
        const Mat& A1 = P1.action(*blk[i].m, a, true);
        for (int r = 0; r < nrows; ++r)
          for (int c = 0; c < blk[i].n; ++c)
            if (A1.at(r, c) != 0) local[r][blk[i].off + c] += A1.at(r, c);
      }
      for (size_t j = 0; j < FB.size(); ++j) {
        if (!blk[j].m || blk[j].n == 0 || cc[j].is_zero()) continue;
        const Mat& C = P1.action(*blk[j].m, cc[j], false);
        for (int r = 0; r < nrows; ++r)
          for (int c = 0; c < blk[j].n; ++c)
            if (C.at(r, c) != 0) local[r][blk[j].off + c] -= C.at(r, c);
      }
      for (auto& row : local) {
        for (auto it2 = row.begin(); it2 != row.end();)
          it2 = it2->second == 0 ? row.erase(it2) : std::next(it2);
        if (!row.empty()) rows.push_back(std::move(row));
      }
    }
  }
  res.dim = soergeldetail::Quotient(nunk, std::move(rows)).dim();
  return res;
}

/// Degreewise matrices of the map sending each representative tuple to
/// rule(tuple): a formal sum of target decorations.  The rule must respect
/// the chain relations (it is rebuilt from quotient representatives).
inline BimoduleMap map_from_rule(
    BimodulePieces& src, BimodulePieces& tgt, HalfInt degree_doubled, int mmax,
    const std::function<std::vector<std::vector<MultiPoly>>(
        const std::vector<MultiPoly>&)>& rule) {
  BimoduleMap f;
  f.src = src.bim().web;
  f.tgt = tgt.bim().web;
  f.degree_doubled = degree_doubled;
  f.mmax = mmax;
  for (int m = 0; m <= mmax; ++m) {
    auto tm = f.target_m(m);
    if (!tm) continue;
    int rows = tgt.dim(*tm), cols = src.dim(m);
    Mat B(rows, cols);
    auto reps = src.basis_decors(m);
    for (int c = 0; c < cols; ++c) {
      for (const auto& out_decor : rule(reps[c])) {
        auto v = tgt.coords(*tm, out_decor);
        for (int r = 0; r < rows; ++r) B.at(r, c) += v[r];
      }
    }
    f.blocks.emplace(m, std::move(B));
  }
  return f;
}

/// Re-check that a map intertwines the outer actions on every degree where
/// both sides fit under its cutoff.
inline bool verify_linearity(const BimoduleMap& f, BimodulePieces& src,
                             BimodulePieces& tgt) {
  std::vector<std::pair<MultiPoly, bool>> gens;
  for (const auto& g : InvariantAlgebra(f.src.target()).generators())
    gens.emplace_back(g, true);
  for (const auto& g : InvariantAlgebra(f.src.source()).generators())
    gens.emplace_back(g, false);
  for (const auto& [g, left] : gens) {
    int e = g.degree();
    for (int m = 0; m + e <= f.mmax; ++m) {
      auto lo = f.blocks.find(m), hi = f.blocks.find(m + e);
      if (lo == f.blocks.end() || hi == f.blocks.end()) continue;
      auto tm = f.target_m(m);
      if (!tm) continue;
      Mat lhs = hi->second * src.action(m, g, left);
      Mat rhs = tgt.action(*tm, g, left) * lo->second;
      if (!(lhs == rhs)) return false;
    }
  }
  return true;
}

namespace soergeldetail {

/// Window data of an elementary vertex in the finer composition.
struct VertexWindow {
  int offset;  // first variable of the merged pair, in the finer composition
  int a, b;
};

inline VertexWindow layer_window(const BlWeb& w, int layer_idx) {
  const Layer& l = w.layers()[layer_idx];
  const Composition& fine = l.kind == Layer::Kind::Merge
                                ? w.comp_at(layer_idx)
                                : w.comp_at(layer_idx + 1);
  int off = 0;
  for (int s = 0; s < l.slot; ++s) off += fine[s];
  return {off, l.a, l.b};
}

/// Expand p (in k variables) in the free Schur basis of the merge window
/// over the coarser algebra: p = sum s_lambda(first window block) * g with
/// g blockwise symmetric for mid.
inline std::vector<std::pair<MultiPoly, MultiPoly>> schur_window_expand(
    const MultiPoly& p, VertexWindow win, const Composition& mid, int k) {
  std::vector<std::pair<MultiPoly, MultiPoly>> out;
  if (p.is_zero()) return out;
  std::map<int, MultiPoly> parts;  // homogeneous pieces
  for (const auto& [e, c] : p.terms()) {
    int d = 0;
    for (int x : e) d += x;
    auto it = parts.find(d);
    if (it == parts.end()) it = parts.emplace(d, MultiPoly(k)).first;
    it->second.add_term(e, c);
  }
  InvariantAlgebra Amid(mid);
  auto lambdas = partitions_in_box(win.a, win.b);
  std::vector<int> slots(win.a);
  for (int i = 0; i < win.a; ++i) slots[i] = win.offset + i;
  for (const auto& [d, hp] : parts) {
    Expander ex;
    std::vector<std::pair<MultiPoly, MultiPoly>> cols;
    for (const auto& lam : lambdas) {
      if (static_cast<int>(lam.size()) > d) continue;
      MultiPoly s = schur(lam, win.a).embedded(k, slots);
      for (const auto& g : Amid.basis(d - static_cast<int>(lam.size()))) {
        cols.emplace_back(s, g);
        ex.insert(s * g);
      }
    }
    auto coords = ex.express(hp);
    if (!coords)
      throw std::runtime_error("schur_window_expand: expansion failed");
    std::map<MultiPoly, MultiPoly> grouped;
    for (size_t j = 0; j < coords->size(); ++j) {
      if ((*coords)[j] == 0) continue;
      auto it = grouped.find(cols[j].first);
      if (it == grouped.end())
        it = grouped.emplace(cols[j].first, MultiPoly(k)).first;
      it->second += (*coords)[j] * cols[j].second;
    }
    for (auto& [s, g] : grouped) out.emplace_back(s, g);
  }
  return out;
}

}  // namespace soergeldetail

/// The four adjunction transpositions: move the outermost (head) or the
/// innermost (tail) layer of the source web across to the target as its
/// mirror, or back.  Realized by unit/counit zigzags: merges transpose via
/// the Frobenius coproduct and trace, splits via inclusion and
/// multiplication.
enum class AdjDirection {
  SourceHeadToTarget,
  TargetHeadToSource,
  SourceTailToTarget,
  TargetTailToSource,
};

inline BimoduleMap adjunction_transpose(AdjDirection dir,
                                        const BimoduleMap& f) {
  using soergeldetail::frobenius_dual_basis;
  using soergeldetail::layer_window;

  bool from_source = dir == AdjDirection::SourceHeadToTarget ||
                     dir == AdjDirection::SourceTailToTarget;
  bool head = dir == AdjDirection::SourceHeadToTarget ||
              dir == AdjDirection::TargetHeadToSource;
  const BlWeb& carrier = from_source ? f.src : f.tgt;
  const BlWeb& other = from_source ? f.tgt : f.src;
  if (carrier.num_layers() == 0)
    throw std::invalid_argument("adjunction_transpose: no layer to move");

  int li = head ? carrier.num_layers() - 1 : 0;
  Layer moved = carrier.layers()[li];
  auto win = layer_window(carrier, li);
  int k = carrier.level();
  bool merge_layer = moved.kind == Layer::Kind::Merge;

  std::vector<Layer> stripped_ls = carrier.layers();
  stripped_ls.erase(stripped_ls.begin() + li);
  BlWeb stripped(head ? carrier.source() : carrier.comp_at(1), stripped_ls);

  Layer mirror = moved;
  mirror.kind = merge_layer ? Layer::Kind::Split : Layer::Kind::Merge;
  BlWeb mirror_web(head ? other.target() : carrier.comp_at(1), {mirror});
  BlWeb grown =
      head ? compose(mirror_web, other) : compose(other, mirror_web);

  // Shape of the composite pair the zigzag inserts or collapses: for head
  // moves the mirror sits above the moved layer, for tail moves below.  A
  // merge-then-split pair carries the Frobenius coproduct and
  // multiplication (degree +ab); a split-then-merge pair the inclusion and
  // trace (degree -ab).
  bool merge_then_split = head ? merge_layer : !merge_layer;
  long unit_deg_doubled = merge_then_split ? 2L * win.a * win.b
                                           : -2L * win.a * win.b;

  BlWeb new_src = from_source ? stripped : grown;
  BlWeb new_tgt = from_source ? grown : stripped;

  BimodulePieces& Psrc = shared_pieces(new_src);
  BimodulePieces& Ptgt = shared_pieces(new_tgt);
  BimodulePieces& Pold_src = shared_pieces(f.src);
  BimodulePieces& Pold_tgt = shared_pieces(f.tgt);

  // apply the original f to a decorated tuple of its source chain,
  // returning target-chain decors with the coefficients folded in
  auto apply_f = [&](int m, const std::vector<MultiPoly>& decor)
      -> std::vector<std::vector<MultiPoly>> {
    std::vector<std::vector<MultiPoly>> out_terms;
    auto tm = f.target_m(m);
    if (!tm) return out_terms;  // no valid target degree: f vanishes here
    auto it = f.blocks.find(m);
    if (it == f.blocks.end())
      throw std::runtime_error("adjunction_transpose: cutoff too small");
    auto v = Pold_src.coords(m, decor);
    auto reps = Pold_tgt.basis_decors(*tm);
    for (int r = 0; r < it->second.rows; ++r) {
      Rational acc = 0;
      for (int c = 0; c < it->second.cols; ++c)
        acc += it->second.at(r, c) * v[c];
      if (acc == 0) continue;
      auto d = reps[r];
      d.back() = acc * d.back();
      out_terms.push_back(std::move(d));
    }
    return out_terms;
  };

  auto total_degree = [](const std::vector<MultiPoly>& d) {
    int s = 0;
    for (const auto& p : d) s += std::max(0, p.degree());
    return s;
  };

  // An identity web contributes a factor to its chain, but composing a
  // layer onto it absorbs that factor.  Attaching therefore fuses when the
  // base chain came from a layerless web, and detaching then leaves 1.
  auto attach = [&](std::vector<MultiPoly> decors, const MultiPoly& extra_dec,
                    bool layerless) {
    if (layerless)
      decors[0] = decors[0] * extra_dec;
    else if (head)
      decors.push_back(extra_dec);
    else
      decors.insert(decors.begin(), extra_dec);
    return decors;
  };
  auto detach = [&](const std::vector<MultiPoly>& decors, bool layerless)
      -> std::pair<MultiPoly, std::vector<MultiPoly>> {
    if (layerless) return {decors[0], {MultiPoly::one(k)}};
    if (head)
      return {decors.back(),
              std::vector<MultiPoly>(decors.begin(), decors.end() - 1)};
    return {decors.front(),
            std::vector<MultiPoly>(decors.begin() + 1, decors.end())};
  };

  auto rule = [&](const std::vector<MultiPoly>& decor)
      -> std::vector<std::vector<MultiPoly>> {
    std::vector<std::vector<MultiPoly>> result;
    if (from_source) {
      // unit first: insert a factor pair, apply f under the inner one
      std::vector<std::pair<MultiPoly, MultiPoly>> unit_terms;
      if (merge_then_split) {
        std::vector<int> slots(win.a + win.b);
        for (int i = 0; i < win.a + win.b; ++i) slots[i] = win.offset + i;
        std::vector<int> slots_a(win.a);
        for (int i = 0; i < win.a; ++i) slots_a[i] = i;
        for (const auto& [lam, dual] : frobenius_dual_basis(win.a, win.b)) {
          MultiPoly s = schur(lam, win.a)
                            .embedded(win.a + win.b, slots_a)
                            .embedded(k, slots);
          unit_terms.emplace_back(std::move(s), dual.embedded(k, slots));
        }
      } else {
        unit_terms.emplace_back(MultiPoly::one(k), MultiPoly::one(k));
      }
      for (const auto& [outer_dec, inner_dec] : unit_terms) {
        auto inner = attach(decor, inner_dec, stripped.num_layers() == 0);
        for (auto& t : apply_f(total_degree(inner), inner)) {
          result.push_back(attach(std::move(t), outer_dec,
                                  other.num_layers() == 0));
        }
      }
    } else {
      // f first under the mirror factor, then the counit fuses the pair
      auto [extra, inner] = detach(decor, other.num_layers() == 0);
      for (auto& t : apply_f(total_degree(inner), inner)) {
        auto [moved_dec, core] = detach(t, stripped.num_layers() == 0);
        MultiPoly fused = moved_dec * extra;
        MultiPoly collapsed =
            !merge_then_split
                ? symmetrized_quotient(fused, win.offset, win.a, win.b)
                : fused;
        if (collapsed.is_zero()) continue;
        if (core.empty()) core.push_back(MultiPoly::one(k));
        if (head)
          core.back() = collapsed * core.back();
        else
          core.front() = collapsed * core.front();
        result.push_back(std::move(core));
      }
    }
    return result;
  };

  int mmax = f.mmax;
  if (from_source && merge_then_split) mmax -= win.a * win.b;
  return map_from_rule(Psrc, Ptgt, f.degree_doubled + unit_deg_doubled,
                       std::max(0, mmax), rule);
}

/// Horizontal-trace transposition data: degreewise hom dimensions from the
/// identity into the two cyclic orderings of a composable pair, which must
/// agree after the stated shift.
struct TraceTransposeResult {
  long shift_doubled = 0;
  std::map<HalfInt, int> dims_mn;  // HOM(id_{c'}, M . N) by doubled degree
  std::map<HalfInt, int> dims_nm;  // HOM(id_c, N . M)
  bool matched = false;
};

inline TraceTransposeResult trace_transpose(const BlWeb& M, const BlWeb& N,
                                            HalfInt dmax_doubled) {
  if (M.source() != N.target() || N.source() != M.target())
    throw std::invalid_argument("trace_transpose: boundary mismatch");
  const Composition& cprime = M.target();
  const Composition& c = M.source();
  BlWeb MN = compose(M, N);  // endo of c' = N then M
  BlWeb NM = compose(N, M);  // endo of c
  TraceTransposeResult r;
  r.shift_doubled =
      4 * (shift_composition(cprime) - shift_composition(c));
  r.matched = true;
  for (HalfInt d = -dmax_doubled; d <= dmax_doubled; ++d) {
    int a = hom_graded_dim(BlWeb::identity(cprime), MN, d).dim;
    if (a) r.dims_mn[d] = a;
    int b = hom_graded_dim(BlWeb::identity(c), NM, d - r.shift_doubled).dim;
    if (b) r.dims_nm[d - r.shift_doubled] = b;
    if (a != b) r.matched = false;
  }
  return r;
}

/// Decorated-web elements of B(w) in straightened normal form: every
/// factor except the outermost carries a Schur-basis decoration of its
/// merge window (splits carry 1), all other polynomial content migrated
/// outward.
class BimoduleElement {
 public:
  BimoduleElement(const BlWeb& w, std::vector<std::vector<MultiPoly>> terms)
      : bim_(build_bimodule(w)) {
    for (auto& t : terms) {
      if (static_cast<int>(t.size()) != bim_.num_factors())
        throw std::invalid_argument("BimoduleElement: wrong tuple length");
      migrate(std::move(t));
    }
    prune();
  }

  const std::map<std::vector<MultiPoly>, MultiPoly>& normal_form() const {
    return nf_;
  }
  bool operator==(const BimoduleElement& o) const { return nf_ == o.nf_; }
  bool is_zero() const { return nf_.empty(); }

  /// Doubled q-degree; throws if the element is not homogeneous.
  HalfInt degree_doubled() const {
    std::optional<long> deg;
    for (const auto& [key, top] : nf_) {
      int total = std::max(0, top.degree());
      if (!top.is_homogeneous())
        throw std::runtime_error("BimoduleElement: inhomogeneous");
      for (const auto& p : key) total += p.degree();
      long d = 4L * total - bim_.shift_doubled();
      if (deg && *deg != d)
        throw std::runtime_error("BimoduleElement: inhomogeneous");
      deg = d;
    }
    return deg ? *deg : 0;
  }

 private:
  void migrate(std::vector<MultiPoly> t) {
    int r = bim_.num_factors();
    // split non-homogeneous inner factors term by term via the recursion
    for (int i = 0; i + 1 < r; ++i) {
      const Layer& l = bim_.web.layers()[i];
      if (l.kind == Layer::Kind::Split) {
        t[i + 1] = t[i] * t[i + 1];
        t[i] = MultiPoly::one(bim_.web.level());
        continue;
      }
      // merge: expand t[i] over the coarser middle in the Schur basis
      auto win = soergeldetail::layer_window(bim_.web, i);
      auto expansion = soergeldetail::schur_window_expand(
          t[i], win, bim_.middles[i], bim_.web.level());
      if (expansion.size() == 1) {
        t[i] = expansion.begin()->first;
        t[i + 1] = expansion.begin()->second * t[i + 1];
        continue;
      }
      for (auto& [s, g] : expansion) {
        auto t2 = t;
        t2[i] = s;
        t2[i + 1] = g * t2[i + 1];
        migrate(std::move(t2));
      }
      return;
    }
    std::vector<MultiPoly> key(t.begin(), t.end() - 1);
    auto it = nf_.find(key);
    if (it == nf_.end())
      nf_.emplace(std::move(key), t.back());
    else
      it->second += t.back();
  }

  void prune() {
    for (auto it = nf_.begin(); it != nf_.end();)
      it = it->second.is_zero() ? nf_.erase(it) : std::next(it);
  }

  Bimodule bim_;
  std::map<std::vector<MultiPoly>, MultiPoly> nf_;
};

}  // namespace foamcalc
