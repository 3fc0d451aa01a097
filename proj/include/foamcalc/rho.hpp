#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "foamcalc/foams.hpp"
#include "foamcalc/soergel.hpp"

namespace foamcalc {

/// Webs go to their decorated-chain presentations.
inline Bimodule rho_web(const BlWeb& w) { return build_bimodule(w); }

namespace rhodetail {

/// Embed a window-local symmetric polynomial at a variable offset.
inline MultiPoly embed_at(const MultiPoly& p, int k, int off) {
  std::vector<int> slots(p.num_vars());
  std::iota(slots.begin(), slots.end(), off);
  return p.embedded(k, slots);
}

inline int slot_offset(const Composition& c, int slot) {
  int off = 0;
  for (int s = 0; s < slot; ++s) off += c[s];
  return off;
}

}  // namespace rhodetail

/// Chain map of one movie generator between the webs before and after it.
/// Decoration tuples are indexed by layer; the layerless identity web has a
/// single absorbed factor.
inline BimoduleMap rho_gen_uncached(const FoamGen& g, const BlWeb& w0,
                                    const BlWeb& w1, int mmax) {
  using Decors = std::vector<MultiPoly>;
  using Terms = std::vector<Decors>;
  BimodulePieces& src = shared_pieces(w0);
  BimodulePieces& tgt = shared_pieces(w1);
  const int k = w0.level();
  const int n0 = w0.num_layers();
  const int h = g.height, s = g.slot;
  std::function<Terms(const Decors&)> rule;

  // drop factors h, h+1 of a collapsed pair and fold p into the neighbour
  // across the now-joined middle (below if possible, else above, else the
  // single identity factor)
  auto collapse_pair = [h, n0](const Decors& in, const MultiPoly& p) {
    Decors out;
    if (n0 == 2) {
      out = {p};
      return out;
    }
    out.reserve(n0 - 2);
    for (int i = 0; i < n0; ++i)
      if (i != h && i != h + 1) out.push_back(in[i]);
    int idx = h > 0 ? h - 1 : h;  // after erasure the factor above sits at h
    out[idx] = p * out[idx];
    return out;
  };

  switch (g.kind) {
    case FoamKind::Dot: {
      // the edge polynomial lives in the middle algebra below height h
      MultiPoly P = rhodetail::embed_at(
          g.decor, k, rhodetail::slot_offset(w0.comp_at(h), s));
      int idx = std::clamp(h - 1, 0, std::max(0, n0 - 1));
      rule = [P, idx](const Decors& in) {
        Decors out = in;
        out[idx] = P * out[idx];
        return Terms{std::move(out)};
      };
      break;
    }
    case FoamKind::Zip: {
      // coproduct unit: insert the dual pair, outer leg Schur, inner dual
      int off = rhodetail::slot_offset(w0.comp_at(h), s);
      std::vector<std::pair<MultiPoly, MultiPoly>> legs;  // (inner, outer)
      for (const auto& [lam, dual] :
           soergeldetail::frobenius_dual_basis(g.a, g.b))
        legs.emplace_back(rhodetail::embed_at(dual, k, off),
                          rhodetail::embed_at(schur(lam, g.a), k, off));
      rule = [legs, h, n0](const Decors& in) {
        Terms out;
        for (const auto& [inner, outer] : legs) {
          Decors o;
          if (n0 == 0) {
            o = {in[0] * inner, outer};
          } else {
            o.reserve(n0 + 2);
            o.insert(o.end(), in.begin(), in.begin() + h);
            o.push_back(inner);
            o.push_back(outer);
            o.insert(o.end(), in.begin() + h, in.end());
          }
          out.push_back(std::move(o));
        }
        return out;
      };
      break;
    }
    case FoamKind::DigonBirth: {
      // inclusion unit: both new legs undecorated
      MultiPoly one = MultiPoly::one(k);
      rule = [one, h, n0](const Decors& in) {
        Decors o;
        if (n0 == 0) {
          o = {in[0], one};
        } else {
          o.reserve(n0 + 2);
          o.insert(o.end(), in.begin(), in.begin() + h);
          o.push_back(one);
          o.push_back(one);
          o.insert(o.end(), in.begin() + h, in.end());
        }
        return Terms{std::move(o)};
      };
      break;
    }
    case FoamKind::Unzip: {
      // multiplication counit: the product lands in the joined middle
      rule = [collapse_pair, h](const Decors& in) {
        return Terms{collapse_pair(in, in[h] * in[h + 1])};
      };
      break;
    }
    case FoamKind::DigonDeath: {
      // trace counit: symmetrize the product down to the coarse strand
      auto win = soergeldetail::layer_window(w0, h);
      rule = [collapse_pair, win, h](const Decors& in) {
        MultiPoly r = symmetrized_quotient(in[h] * in[h + 1], win.offset,
                                           win.a, win.b);
        if (r.is_zero()) return Terms{};
        return Terms{collapse_pair(in, r)};
      };
      break;
    }
    case FoamKind::Exchange: {
      // canonical swap of disjoint layers through the multiplication
      // embedding; only split-below-merge needs a re-expansion
      const Layer& A = w0.layers()[h];
      const Layer& B = w0.layers()[h + 1];
      bool a_split = A.kind == Layer::Kind::Split;
      bool b_merge = B.kind == Layer::Kind::Merge;
      if (a_split && b_merge) {
        auto win = soergeldetail::layer_window(w1, h + 1);
        Composition mid = w1.comp_at(h);
        rule = [win, mid, k, h, n0](const Decors& in) {
          auto expansion = soergeldetail::schur_window_expand(
              in[h] * in[h + 1], win, mid, k);
          Terms out;
          for (auto& [snu, gnu] : expansion) {
            Decors o = in;
            o[h] = gnu;
            o[h + 1] = snu;
            out.push_back(std::move(o));
          }
          return out;
        };
      } else {
        // product goes to the all-fine factor: the lower one unless both
        // layers are splits
        bool upper = a_split && !b_merge;
        rule = [h, upper](const Decors& in) {
          Decors o = in;
          MultiPoly p = in[h] * in[h + 1];
          o[h] = upper ? MultiPoly::one(p.num_vars()) : p;
          o[h + 1] = upper ? p : MultiPoly::one(p.num_vars());
          return Terms{std::move(o)};
        };
      }
      break;
    }
  }
  return map_from_rule(src, tgt, g.degree_doubled(), mmax, rule);
}

/// Generator maps recur constantly inside words over the same stills, so the
/// results are cached process-wide; a cached map computed with a larger
/// cutoff serves smaller requests unchanged (composition only reads the
/// blocks the other factor supplies).
inline const BimoduleMap& rho_gen(const FoamGen& g, const BlWeb& w0,
                                  const BlWeb& w1, int mmax) {
  static std::map<std::string, BimoduleMap> cache;
  std::string key = w0.str() + '|' + g.str();
  auto it = cache.find(key);
  if (it == cache.end() || it->second.mmax < mmax)
    it = cache.insert_or_assign(key, rho_gen_uncached(g, w0, w1, mmax)).first;
  return it->second;
}

/// The full word as a composite of generator maps.  mmax bounds the source
/// polynomial degree of the result; intermediate maps are built with enough
/// headroom for the word's positive-degree excursions.
inline BimoduleMap rho_foam(const FoamWord& F, int mmax) {
  // a source block at degree m <= mmax reaches the still after i gens at
  // degree m plus the word's accumulated excursion, so each generator map
  // only needs that much cutoff
  BimodulePieces& P0 = shared_pieces(F.source());
  BimoduleMap cur = identity_map(F.source(), P0, mmax);
  long acc = -F.source().shift_doubled();
  for (int i = 0; i < F.num_gens(); ++i) {
    long lift = acc + F.still_at(i).shift_doubled();
    int need = mmax + static_cast<int>(std::max(0L, (lift + 3) / 4));
    acc += F.gens()[i].degree_doubled();
    cur = compose(rho_gen(F.gens()[i], F.still_at(i), F.still_at(i + 1), need),
                  cur);
  }
  cur.mmax = std::min(cur.mmax, mmax);
  for (auto it = cur.blocks.begin(); it != cur.blocks.end();)
    it = it->first > cur.mmax ? cur.blocks.erase(it) : std::next(it);
  return cur;
}

/// Class of an element-type word (a movie growing its target from a
/// split-tree scaffold) in the decorated-web normal form: the image of the
/// scaffold's undecorated generator.
inline BimoduleElement tree_normalize(const FoamWord& E) {
  for (const auto& l : E.source().layers())
    if (l.kind == Layer::Kind::Merge)
      throw std::invalid_argument(
          "tree_normalize: source scaffold must be a split tree");
  BimoduleMap f = rho_foam(E, 0);
  auto it = f.blocks.find(0);
  auto t0 = f.target_m(0);
  std::vector<std::vector<MultiPoly>> terms;
  if (it != f.blocks.end() && t0) {
    BimodulePieces& Pt = shared_pieces(E.target());
    auto reps = Pt.basis_decors(*t0);
    // the scaffold generator is the unique degree-0 basis tuple
    if (it->second.cols != 1)
      throw std::runtime_error("tree_normalize: scaffold not rank one");
    for (int r = 0; r < it->second.rows; ++r) {
      if (it->second.at(r, 0) == 0) continue;
      auto d = reps[r];
      d.back() = it->second.at(r, 0) * d.back();
      terms.push_back(std::move(d));
    }
  }
  return BimoduleElement(E.target(), std::move(terms));
}

/// Degreewise comparison of three hom computations the representation must
/// reconcile: the intertwiner solve on the pair, the intertwiner solve after
/// bending every source layer to the target, and the rank of the central
/// elements of the bent web's chain.  Maps out of the identity chain are
/// cyclic, so they correspond to elements commuting with both boundary
/// actions; those are the classes reachable by decorated element words.
struct FullyFaithfulReport {
  bool matched = true;
  bool certified = true;
  HalfInt bend_shift_doubled = 0;
  BlWeb bent;  // target web of the bend chain
  std::map<HalfInt, int> hom_dims;
  std::map<HalfInt, int> bent_hom_dims;
  std::map<HalfInt, int> central_dims;
  std::string note;
};

inline FullyFaithfulReport verify_fully_faithful(const BlWeb& w0,
                                                 const BlWeb& w1,
                                                 HalfInt dmax_doubled) {
  if (w0.source() != w1.source() || w0.target() != w1.target())
    throw std::invalid_argument("verify_fully_faithful: boundary mismatch");
  FullyFaithfulReport rep;
  // bend the head of the source web across until none is left
  HalfInt delta = 0;
  for (const auto& l : w0.layers())
    delta += (l.kind == Layer::Kind::Merge ? 2 : -2) * l.a * l.b;
  rep.bend_shift_doubled = delta;
  rep.bent = compose(w0.dagger(), w1);
  BlWeb idw = BlWeb::identity(w0.source());

  BimodulePieces& Pb = shared_pieces(rep.bent);
  // the bent web is an endoweb of the common source, so both outer actions
  // are by the same boundary algebra
  std::vector<MultiPoly> outer_gens =
      InvariantAlgebra(w0.source()).generators();
  // exact rank of the elements commuting with both boundary actions at m
  auto central_dim = [&](int m) {
    int n = Pb.dim(m);
    if (n == 0) return 0;
    std::vector<soergeldetail::Quotient::SparseRow> rows;
    for (const auto& g : outer_gens) {
      Mat AL = Pb.action(m, g, true);
      Mat AR = Pb.action(m, g, false);
      for (int r = 0; r < AL.rows; ++r) {
        soergeldetail::Quotient::SparseRow row;
        for (int c = 0; c < n; ++c) {
          Rational v = AL.at(r, c) - AR.at(r, c);
          if (v != 0) row[c] = v;
        }
        if (!row.empty()) rows.push_back(std::move(row));
      }
    }
    return soergeldetail::Quotient(n, std::move(rows)).dim();
  };

  std::ostringstream note;
  for (HalfInt d = -dmax_doubled; d <= dmax_doubled; ++d) {
    auto direct = hom_graded_dim(w0, w1, d);
    auto bentres = hom_graded_dim(idw, rep.bent, d + delta);
    if (!direct.certified || !bentres.certified) rep.certified = false;
    int cdim = 0;
    long want = d + delta + rep.bent.shift_doubled();
    if (want >= 0 && want % 4 == 0)
      cdim = central_dim(static_cast<int>(want / 4));
    if (direct.dim) rep.hom_dims[d] = direct.dim;
    if (bentres.dim) rep.bent_hom_dims[d + delta] = bentres.dim;
    if (cdim) rep.central_dims[d + delta] = cdim;
    if (direct.dim != bentres.dim || bentres.dim != cdim) {
      rep.matched = false;
      note << "degree " << d << ": hom " << direct.dim << " vs bent hom "
           << bentres.dim << " vs central rank " << cdim << "; ";
    }
  }
  if (!rep.certified)
    note << "cutoff not certified for at least one degree; ";
  rep.note = note.str();
  return rep;
}

}  // namespace foamcalc
