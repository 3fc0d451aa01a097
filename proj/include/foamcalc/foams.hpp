#pragma once

#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "foamcalc/laurent.hpp"
#include "foamcalc/partition.hpp"
#include "foamcalc/sympoly.hpp"
#include "foamcalc/webs.hpp"

namespace foamcalc {

/// Movie moves.  Zip presses two neighbouring strands together into a
/// merge-then-split pair; DigonBirth opens a single strand into a
/// split-then-merge digon; Unzip and DigonDeath cancel such adjacent pairs.
/// Dot decorates a strand, Exchange slides two distant vertices past each
/// other.
enum class FoamKind { Dot, Zip, Unzip, DigonBirth, DigonDeath, Exchange };

/// One elementary move.  `height` indexes the web it acts on: a layer height
/// (edge level) for Dot/Zip/DigonBirth, the lower layer of the cancelled or
/// swapped pair for Unzip/DigonDeath/Exchange.  `slot` is the strand index
/// at that height.  a, b are filled during validation except for DigonBirth
/// where they select the split.
struct FoamGen {
  FoamKind kind = FoamKind::Dot;
  int height = 0;
  int slot = 0;
  int a = 0, b = 0;
  MultiPoly decor;

  static FoamGen dot(int height, int slot, MultiPoly p) {
    FoamGen g;
    g.kind = FoamKind::Dot;
    g.height = height;
    g.slot = slot;
    g.decor = std::move(p);
    return g;
  }
  static FoamGen make(FoamKind k, int height, int slot, int a = 0, int b = 0) {
    FoamGen g;
    g.kind = k;
    g.height = height;
    g.slot = slot;
    g.a = a;
    g.b = b;
    return g;
  }
  static FoamGen zip(int height, int slot) {
    return make(FoamKind::Zip, height, slot);
  }
  static FoamGen unzip(int height, int slot) {
    return make(FoamKind::Unzip, height, slot);
  }
  static FoamGen digon_birth(int height, int slot, int a, int b) {
    return make(FoamKind::DigonBirth, height, slot, a, b);
  }
  static FoamGen digon_death(int height, int slot) {
    return make(FoamKind::DigonDeath, height, slot);
  }
  static FoamGen exchange(int height) {
    return make(FoamKind::Exchange, height, 0);
  }

  /// Doubled q-degree: dots count twice their polynomial degree, a zipped
  /// seam counts ab, an opened digon -ab, isotopy moves are free.
  HalfInt degree_doubled() const {
    switch (kind) {
      case FoamKind::Dot:
        return 4 * std::max(0, decor.degree());
      case FoamKind::Zip:
      case FoamKind::Unzip:
        return 2 * a * b;
      case FoamKind::DigonBirth:
      case FoamKind::DigonDeath:
        return -2 * a * b;
      case FoamKind::Exchange:
        return 0;
    }
    return 0;
  }

  std::string str() const {
    std::ostringstream os;
    switch (kind) {
      case FoamKind::Dot:
        os << "dot " << height << "," << slot + 1 << " "
           << elementary_str(decor);
        break;
      case FoamKind::Zip:
        os << "zip " << height << "," << slot + 1;
        break;
      case FoamKind::Unzip:
        os << "unzip " << height << "," << slot + 1;
        break;
      case FoamKind::DigonBirth:
        os << "birth " << height << "," << slot + 1 << " (" << a << "," << b
           << ")";
        break;
      case FoamKind::DigonDeath:
        os << "death " << height << "," << slot + 1;
        break;
      case FoamKind::Exchange:
        os << "exchange " << height;
        break;
    }
    return os.str();
  }
};

/// Apply one move to a web, validating it and filling the thickness fields.
inline BlWeb apply_foam_gen(const BlWeb& w, FoamGen& g) {
  const int n = w.num_layers();
  std::vector<Layer> ls = w.layers();
  switch (g.kind) {
    case FoamKind::Dot: {
      if (g.height < 0 || g.height > n)
        throw std::invalid_argument("dot: height out of range");
      const Composition& c = w.comp_at(g.height);
      if (g.slot < 0 || g.slot >= c.length())
        throw std::invalid_argument("dot: slot out of range");
      int th = c[g.slot];
      if (g.decor.num_vars() != th)
        throw std::invalid_argument(
            "dot: decoration variable count does not match the strand");
      if (g.decor.is_zero())
        throw std::invalid_argument("dot: zero decoration");
      if (!g.decor.is_homogeneous())
        throw std::invalid_argument("dot: decoration must be homogeneous");
      for (int i = 0; i + 1 < th; ++i) {
        std::vector<int> perm(th);
        std::iota(perm.begin(), perm.end(), 0);
        std::swap(perm[i], perm[i + 1]);
        if (!(g.decor.permuted(perm) == g.decor))
          throw std::invalid_argument("dot: decoration not symmetric");
      }
      g.a = th;
      return w;
    }
    case FoamKind::Zip: {
      if (g.height < 0 || g.height > n)
        throw std::invalid_argument("zip: height out of range");
      const Composition& c = w.comp_at(g.height);
      if (g.slot < 0 || g.slot + 1 >= c.length())
        throw std::invalid_argument("zip: slot out of range");
      g.a = c[g.slot];
      g.b = c[g.slot + 1];
      Layer merge{Layer::Kind::Merge, g.slot, 0, 0};
      Layer split{Layer::Kind::Split, g.slot, g.a, g.b};
      ls.insert(ls.begin() + g.height, {merge, split});
      return BlWeb(w.source(), std::move(ls));
    }
    case FoamKind::Unzip: {
      if (g.height < 0 || g.height + 1 >= n)
        throw std::invalid_argument("unzip: height out of range");
      const Layer& lo = ls[g.height];
      const Layer& hi = ls[g.height + 1];
      if (lo.kind != Layer::Kind::Merge || hi.kind != Layer::Kind::Split ||
          lo.slot != g.slot || hi.slot != g.slot || lo.a != hi.a ||
          lo.b != hi.b)
        throw std::invalid_argument(
            "unzip: no merge-then-split pair at this site");
      g.a = lo.a;
      g.b = lo.b;
      ls.erase(ls.begin() + g.height, ls.begin() + g.height + 2);
      return BlWeb(w.source(), std::move(ls));
    }
    case FoamKind::DigonBirth: {
      if (g.height < 0 || g.height > n)
        throw std::invalid_argument("digon birth: height out of range");
      const Composition& c = w.comp_at(g.height);
      if (g.slot < 0 || g.slot >= c.length())
        throw std::invalid_argument("digon birth: slot out of range");
      if (g.a < 1 || g.b < 1 || g.a + g.b != c[g.slot])
        throw std::invalid_argument(
            "digon birth: split violates the flow condition");
      Layer split{Layer::Kind::Split, g.slot, g.a, g.b};
      Layer merge{Layer::Kind::Merge, g.slot, 0, 0};
      ls.insert(ls.begin() + g.height, {split, merge});
      return BlWeb(w.source(), std::move(ls));
    }
    case FoamKind::DigonDeath: {
      if (g.height < 0 || g.height + 1 >= n)
        throw std::invalid_argument("digon death: height out of range");
      const Layer& lo = ls[g.height];
      const Layer& hi = ls[g.height + 1];
      if (lo.kind != Layer::Kind::Split || hi.kind != Layer::Kind::Merge ||
          lo.slot != g.slot || hi.slot != g.slot)
        throw std::invalid_argument(
            "digon death: no split-then-merge pair at this site");
      g.a = lo.a;
      g.b = lo.b;
      ls.erase(ls.begin() + g.height, ls.begin() + g.height + 2);
      return BlWeb(w.source(), std::move(ls));
    }
    case FoamKind::Exchange: {
      if (g.height < 0 || g.height + 1 >= n)
        throw std::invalid_argument("exchange: height out of range");
      Layer bf, at;
      if (!try_swap_layers(ls[g.height], ls[g.height + 1], bf, at))
        throw std::invalid_argument("exchange: layers share strands");
      ls[g.height] = bf;
      ls[g.height + 1] = at;
      return BlWeb(w.source(), std::move(ls));
    }
  }
  throw std::logic_error("apply_foam_gen: unknown kind");
}

/// A foam as a movie word: a source web and a validated sequence of moves.
/// The web after each move (a "still") is kept for degree and rewriting
/// checks.
class FoamWord {
 public:
  FoamWord() = default;
  FoamWord(BlWeb source, std::vector<FoamGen> gens) : gens_(std::move(gens)) {
    stills_.push_back(std::move(source));
    for (size_t i = 0; i < gens_.size(); ++i) {
      try {
        stills_.push_back(apply_foam_gen(stills_.back(), gens_[i]));
      } catch (const std::invalid_argument& e) {
        throw std::invalid_argument("move " + std::to_string(i + 1) + ": " +
                                    e.what());
      }
    }
  }

  const BlWeb& source() const { return stills_.front(); }
  const BlWeb& target() const { return stills_.back(); }
  const BlWeb& still_at(int i) const { return stills_.at(i); }
  const std::vector<FoamGen>& gens() const { return gens_; }
  int num_gens() const { return static_cast<int>(gens_.size()); }

  HalfInt degree_doubled() const {
    HalfInt d = 0;
    for (const auto& g : gens_) d += g.degree_doubled();
    return d;
  }

  /// g after f; the words must agree on the nose (same layer word).
  friend FoamWord vcompose(const FoamWord& g, const FoamWord& f) {
    if (f.target().source() != g.source().source() ||
        !(f.target().layers() == g.source().layers()))
      throw std::invalid_argument("vcompose: boundary words differ");
    std::vector<FoamGen> gens = f.gens_;
    gens.insert(gens.end(), g.gens_.begin(), g.gens_.end());
    return FoamWord(f.source(), std::move(gens));
  }

  /// Side-by-side composite, f on the left.  f's moves run first; g's moves
  /// are then re-anchored above f's finished layers.
  friend FoamWord hcompose(const FoamWord& f, const FoamWord& g) {
    BlWeb src = disjoint_union(f.source(), g.source());
    std::vector<FoamGen> gens = f.gens_;
    int hoff = f.target().num_layers();
    int soff = f.target().target().length();
    for (FoamGen gen : g.gens_) {
      gen.height += hoff;
      if (gen.kind != FoamKind::Exchange) gen.slot += soff;
      gens.push_back(std::move(gen));
    }
    return FoamWord(std::move(src), std::move(gens));
  }

  std::string str() const {
    std::ostringstream os;
    os << "foam on " << source().str();
    for (const auto& g : gens_) os << " ; " << g.str();
    return os.str();
  }

 private:
  std::vector<FoamGen> gens_;
  std::vector<BlWeb> stills_;
};

struct FoamTerm {
  Rational coeff;
  FoamWord word;
};
using FoamCombination = std::vector<FoamTerm>;

/// Push the dot gens()[i] through the adjacent seam onto the two thin
/// strands: P expands as a sum of products of Schur decorations on the two
/// halves of the window.
inline FoamCombination dot_migrate(const FoamWord& F, int i) {
  if (i < 0 || i >= F.num_gens() || F.gens()[i].kind != FoamKind::Dot)
    throw std::invalid_argument("dot_migrate: index is not a dot");
  const FoamGen& d = F.gens()[i];
  const BlWeb& w = F.still_at(i);
  int n = w.num_layers();
  bool up = d.height < n && w.layers()[d.height].kind == Layer::Kind::Split &&
            w.layers()[d.height].slot == d.slot;
  bool down = !up && d.height > 0 &&
              w.layers()[d.height - 1].kind == Layer::Kind::Merge &&
              w.layers()[d.height - 1].slot == d.slot;
  if (!up && !down)
    throw std::invalid_argument(
        "dot_migrate: the dot is not on the thick side of a seam");
  const Layer& v = up ? w.layers()[d.height] : w.layers()[d.height - 1];
  int nh = up ? d.height + 1 : d.height - 1;
  auto expansion = pair_schur_expansion(d.decor, v.a, v.b);
  FoamCombination out;
  for (const auto& [lm, c] : expansion) {
    std::vector<FoamGen> repl;
    if (!lm.first.empty())
      repl.push_back(FoamGen::dot(nh, d.slot, schur(lm.first, v.a)));
    if (!lm.second.empty())
      repl.push_back(FoamGen::dot(nh, d.slot + 1, schur(lm.second, v.b)));
    std::vector<FoamGen> gens = F.gens();
    gens.erase(gens.begin() + i);
    gens.insert(gens.begin() + i, repl.begin(), repl.end());
    out.push_back({c, FoamWord(F.source(), std::move(gens))});
  }
  return out;
}

/// Collapse a decorated digon bubble DigonDeath . Dots . DigonBirth into a
/// single dot carrying split_pairing of the two inner decorations; the
/// result can vanish.
inline FoamCombination bubble_remove(const FoamWord& F, int i) {
  if (i < 0 || i >= F.num_gens() ||
      F.gens()[i].kind != FoamKind::DigonBirth)
    throw std::invalid_argument("bubble_remove: index is not a digon birth");
  const FoamGen& birth = F.gens()[i];
  int h = birth.height, s = birth.slot;
  MultiPoly P = MultiPoly::one(birth.a), Q = MultiPoly::one(birth.b);
  int j = i + 1;
  for (;; ++j) {
    if (j >= F.num_gens())
      throw std::invalid_argument("bubble_remove: unmatched digon birth");
    const FoamGen& g = F.gens()[j];
    if (g.kind == FoamKind::Dot && g.height == h + 1 && g.slot == s) {
      P = P * g.decor;
    } else if (g.kind == FoamKind::Dot && g.height == h + 1 &&
               g.slot == s + 1) {
      Q = Q * g.decor;
    } else if (g.kind == FoamKind::DigonDeath && g.height == h &&
               g.slot == s) {
      break;
    } else {
      throw std::invalid_argument("bubble_remove: site is not a bare bubble");
    }
  }
  MultiPoly r = split_pairing(P, Q);
  if (r.is_zero()) return {};
  std::vector<FoamGen> gens = F.gens();
  gens.erase(gens.begin() + i, gens.begin() + j + 1);
  Rational coeff = 1;
  if (r.degree() > 0) {
    gens.insert(gens.begin() + i, FoamGen::dot(h, s, r));
  } else {
    coeff = r.terms().begin()->second;  // constant folds into the coefficient
  }
  return {{coeff, FoamWord(F.source(), std::move(gens))}};
}

/// Replace an Unzip . Zip diabolo by the signed sum of complementary Schur
/// dots on the two strands.
inline FoamCombination diabolo_remove(const FoamWord& F, int i) {
  if (i < 0 || i + 1 >= F.num_gens() || F.gens()[i].kind != FoamKind::Zip)
    throw std::invalid_argument("diabolo_remove: index is not a zip");
  const FoamGen& z = F.gens()[i];
  const FoamGen& u = F.gens()[i + 1];
  if (u.kind != FoamKind::Unzip || u.height != z.height || u.slot != z.slot)
    throw std::invalid_argument(
        "diabolo_remove: the zip is not followed by its unzip");
  FoamCombination out;
  for (const auto& lam : partitions_in_rectangle(z.a, z.b)) {
    Partition dual = rect_dual(lam, z.a, z.b);
    std::vector<FoamGen> gens = F.gens();
    gens.erase(gens.begin() + i, gens.begin() + i + 2);
    std::vector<FoamGen> repl;
    if (!lam.empty())
      repl.push_back(FoamGen::dot(z.height, z.slot, schur(lam, z.a)));
    if (!dual.empty())
      repl.push_back(FoamGen::dot(z.height, z.slot + 1, schur(dual, z.b)));
    gens.insert(gens.begin() + i, repl.begin(), repl.end());
    Rational sign = dual.size() % 2 ? -1 : 1;
    out.push_back({sign, FoamWord(F.source(), std::move(gens))});
  }
  return out;
}

/// Hom-set bending: move the outermost (head) or innermost (tail) layer of
/// the word's source web across to its target as the mirror layer, or back.
enum class BendDirection {
  SourceHeadToTarget,
  TargetHeadToSource,
  SourceTailToTarget,
  TargetTailToSource,
};

/// Transpose a word along an adjunction: open the mirror pair with a zip or
/// digon birth next to the moved layer (source moves), or replay over the
/// grafted mirror and cancel the pair at the end (target moves).
inline FoamWord bend_transpose(BendDirection dir, const FoamWord& F) {
  bool from_source = dir == BendDirection::SourceHeadToTarget ||
                     dir == BendDirection::SourceTailToTarget;
  bool head = dir == BendDirection::SourceHeadToTarget ||
              dir == BendDirection::TargetHeadToSource;
  const BlWeb& carrier = from_source ? F.source() : F.target();
  if (carrier.num_layers() == 0)
    throw std::invalid_argument("bend_transpose: no layer to move");
  int li = head ? carrier.num_layers() - 1 : 0;
  Layer moved = carrier.layers()[li];
  bool merge_layer = moved.kind == Layer::Kind::Merge;

  std::vector<FoamGen> gens;
  BlWeb new_src;
  if (from_source) {
    std::vector<Layer> ls = carrier.layers();
    ls.erase(ls.begin() + li);
    new_src = BlWeb(head ? carrier.source() : carrier.comp_at(1), ls);
    if (head) {
      int h = new_src.num_layers();
      gens.push_back(merge_layer
                         ? FoamGen::zip(h, moved.slot)
                         : FoamGen::digon_birth(h, moved.slot, moved.a,
                                                moved.b));
      for (const auto& g : F.gens()) gens.push_back(g);
    } else {
      gens.push_back(merge_layer
                         ? FoamGen::digon_birth(0, moved.slot, moved.a,
                                                moved.b)
                         : FoamGen::zip(0, moved.slot));
      for (FoamGen g : F.gens()) {
        g.height += 1;
        gens.push_back(std::move(g));
      }
    }
  } else {
    Layer mirror = moved;
    mirror.kind = merge_layer ? Layer::Kind::Split : Layer::Kind::Merge;
    std::vector<Layer> ls = F.source().layers();
    if (head) {
      ls.push_back(mirror);
      new_src = BlWeb(F.source().source(), std::move(ls));
      for (const auto& g : F.gens()) gens.push_back(g);
      int h = F.target().num_layers() - 1;
      gens.push_back(merge_layer ? FoamGen::unzip(h, moved.slot)
                                 : FoamGen::digon_death(h, moved.slot));
    } else {
      ls.insert(ls.begin(), mirror);
      new_src = BlWeb(carrier.comp_at(1), std::move(ls));
      for (FoamGen g : F.gens()) {
        g.height += 1;
        gens.push_back(std::move(g));
      }
      gens.push_back(merge_layer ? FoamGen::digon_death(0, moved.slot)
                                 : FoamGen::unzip(0, moved.slot));
    }
  }
  return FoamWord(std::move(new_src), std::move(gens));
}

// ---------------------------------------------------------------------------
// Independent degree oracle: Euler characteristic of the thickened surface.

/// Copies of a facet of thickness a in the N-thickened surface: unordered
/// colour pairs with exactly one colour among the facet's pigments.
inline long facet_copies(int a, int N) { return static_cast<long>(a) * (N - a); }

/// Copies of a seam curve of a binding (a, b, a+b): colour pairs whose
/// surface crosses the seam, gluing exactly two sheet ends there.
inline long seam_copies(int a, int b, int N) {
  return static_cast<long>(a) * b + static_cast<long>(a + b) * (N - a - b);
}

inline long facet_copies_bruteforce(int a, int N) {
  long n = 0;
  for (int i = 1; i <= N; ++i)
    for (int j = i + 1; j <= N; ++j)
      if ((i <= a) + (j <= a) == 1) ++n;
  return n;
}

/// Counts colour pairs gluing two sheet ends along an (a, b, a+b) seam and
/// checks no pair leaves an unglued end.
inline long seam_copies_bruteforce(int a, int b, int N) {
  long n = 0;
  auto in = [](int x, int lo, int hi) { return lo <= x && x <= hi; };
  for (int i = 1; i <= N; ++i)
    for (int j = i + 1; j <= N; ++j) {
      int ends = ((in(i, 1, a) + in(j, 1, a)) == 1) +
                 ((in(i, a + 1, a + b) + in(j, a + 1, a + b)) == 1) +
                 ((in(i, 1, a + b) + in(j, 1, a + b)) == 1);
      if (ends == 2)
        ++n;
      else if (ends != 0)
        throw std::logic_error("seam_copies_bruteforce: odd sheet ends");
    }
  return n;
}

namespace cwdetail {

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(n) {
    std::iota(parent.begin(), parent.end(), 0);
  }
  int find(int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(int x, int y) { parent[find(x)] = find(y); }
};

/// Edge ids per (height, slot) segment of one still; segments of a strand
/// passing a layer untouched belong to the same edge.
inline std::vector<std::vector<int>> still_edges(const BlWeb& w) {
  int n = w.num_layers();
  std::vector<int> off(n + 2, 0);
  for (int h = 0; h <= n; ++h) off[h + 1] = off[h] + w.comp_at(h).length();
  UnionFind uf(off[n + 1]);
  for (int h = 0; h < n; ++h) {
    const Layer& l = w.layers()[h];
    int lo = w.comp_at(h).length();
    for (int u = 0; u < lo; ++u) {
      if (l.kind == Layer::Kind::Merge) {
        if (u == l.slot || u == l.slot + 1) continue;
        uf.unite(off[h] + u, off[h + 1] + (u < l.slot ? u : u - 1));
      } else {
        if (u == l.slot) continue;
        uf.unite(off[h] + u, off[h + 1] + (u < l.slot ? u : u + 1));
      }
    }
  }
  std::map<int, int> relabel;
  std::vector<std::vector<int>> ids(n + 1);
  for (int h = 0; h <= n; ++h) {
    ids[h].resize(w.comp_at(h).length());
    for (int u = 0; u < static_cast<int>(ids[h].size()); ++u) {
      int r = uf.find(off[h] + u);
      auto it = relabel.find(r);
      if (it == relabel.end())
        it = relabel.emplace(r, static_cast<int>(relabel.size())).first;
      ids[h][u] = it->second;
    }
  }
  return ids;
}

}  // namespace cwdetail

/// Degree by the surface formula: minus the Euler characteristic of the
/// k-thickened surface, plus twice the decoration degrees, plus the side
/// boundary terms.  Facets and seams are assembled cell by cell from the
/// movie, so this shares nothing with the per-generator degree table.
inline HalfInt cw_degree_doubled(const FoamWord& F) {
  int T = F.num_gens();
  int k = F.source().level();

  // facet cells: one rectangle per (slab, edge of that still)
  std::vector<std::vector<std::vector<int>>> edges(T + 1);
  std::vector<int> ecount(T + 1), eoff(T + 2, 0);
  for (int t = 0; t <= T; ++t) {
    edges[t] = cwdetail::still_edges(F.still_at(t));
    int m = 0;
    for (const auto& row : edges[t])
      for (int id : row) m = std::max(m, id + 1);
    ecount[t] = m;
    eoff[t + 1] = eoff[t] + m;
  }
  auto node = [&](int t, int h, int u) { return eoff[t] + edges[t][h][u]; };

  std::set<std::pair<int, int>> gluings;
  auto glue = [&](int x, int y) { gluings.insert(std::minmax(x, y)); };

  for (int t = 0; t < T; ++t) {
    const FoamGen& g = F.gens()[t];
    const BlWeb& w0 = F.still_at(t);
    int n0 = w0.num_layers();
    int h = g.height, s = g.slot;
    switch (g.kind) {
      case FoamKind::Dot:
        for (int gg = 0; gg <= n0; ++gg)
          for (int u = 0; u < w0.comp_at(gg).length(); ++u)
            glue(node(t, gg, u), node(t + 1, gg, u));
        break;
      case FoamKind::Zip:
      case FoamKind::DigonBirth:
        for (int gg = 0; gg <= n0; ++gg)
          for (int u = 0; u < w0.comp_at(gg).length(); ++u)
            glue(node(t, gg, u), node(t + 1, gg <= h ? gg : gg + 2, u));
        if (g.kind == FoamKind::Zip) {
          // the two pressed strands each fold around the zip point
          glue(node(t, h, s), node(t + 1, h + 2, s));
          glue(node(t, h, s + 1), node(t + 1, h + 2, s + 1));
        } else {
          glue(node(t, h, s), node(t + 1, h + 2, s));
        }
        break;
      case FoamKind::Unzip:
      case FoamKind::DigonDeath:
        for (int gg = 0; gg <= n0; ++gg) {
          if (gg == h + 1) continue;  // dying edges end in a point
          for (int u = 0; u < w0.comp_at(gg).length(); ++u)
            glue(node(t, gg, u), node(t + 1, gg <= h ? gg : gg - 2, u));
        }
        if (g.kind == FoamKind::Unzip) {
          glue(node(t, h + 2, s), node(t + 1, h, s));
          glue(node(t, h + 2, s + 1), node(t + 1, h, s + 1));
        } else {
          glue(node(t, h + 2, s), node(t + 1, h, s));
        }
        break;
      case FoamKind::Exchange:
        for (int gg = 0; gg <= n0; ++gg) {
          if (gg == h + 1) continue;  // mid segments reach other heights
          for (int u = 0; u < w0.comp_at(gg).length(); ++u)
            glue(node(t, gg, u), node(t + 1, gg, u));
        }
        break;
    }
  }

  cwdetail::UnionFind fuf(eoff[T + 1]);
  for (const auto& [x, y] : gluings) fuf.unite(x, y);
  std::map<int, std::pair<long, long>> fcomp;  // root -> (rects, gluings)
  std::map<int, int> fthick;
  for (int t = 0; t <= T; ++t) {
    const BlWeb& w = F.still_at(t);
    std::set<int> seen;
    for (int gg = 0; gg <= w.num_layers(); ++gg)
      for (int u = 0; u < w.comp_at(gg).length(); ++u) {
        int id = node(t, gg, u);
        if (!seen.insert(edges[t][gg][u]).second) continue;
        ++fcomp[fuf.find(id)].first;
        fthick[fuf.find(id)] = w.comp_at(gg)[u];
      }
  }
  for (const auto& [x, y] : gluings) ++fcomp[fuf.find(x)].second;

  long chi = 0;
  for (const auto& [root, rg] : fcomp)
    chi += facet_copies(fthick.at(root), k) * (rg.first - rg.second);

  // seam cells: one segment per (slab, layer); joints connect worldlines
  // across interfaces and at the fold points of zips and digon births/deaths
  std::vector<int> soff(T + 2, 0);
  for (int t = 0; t <= T; ++t)
    soff[t + 1] = soff[t] + F.still_at(t).num_layers();
  cwdetail::UnionFind suf(soff[T + 1]);
  std::map<int, std::pair<long, long>> scomp;  // root -> (segments, joints)
  std::vector<std::pair<int, int>> jlist;
  auto joint = [&](int x, int y) { jlist.emplace_back(x, y); };
  for (int t = 0; t < T; ++t) {
    const FoamGen& g = F.gens()[t];
    int n0 = F.still_at(t).num_layers();
    int h = g.height;
    switch (g.kind) {
      case FoamKind::Dot:
        for (int j = 0; j < n0; ++j) joint(soff[t] + j, soff[t + 1] + j);
        break;
      case FoamKind::Zip:
      case FoamKind::DigonBirth:
        for (int j = 0; j < n0; ++j)
          joint(soff[t] + j, soff[t + 1] + (j < h ? j : j + 2));
        joint(soff[t + 1] + h, soff[t + 1] + h + 1);
        break;
      case FoamKind::Unzip:
      case FoamKind::DigonDeath:
        for (int j = 0; j < n0; ++j) {
          if (j == h || j == h + 1) continue;
          joint(soff[t] + j, soff[t + 1] + (j < h ? j : j - 2));
        }
        joint(soff[t] + h, soff[t] + h + 1);
        break;
      case FoamKind::Exchange:
        for (int j = 0; j < n0; ++j) {
          int jj = j == h ? h + 1 : j == h + 1 ? h : j;
          joint(soff[t] + j, soff[t + 1] + jj);
        }
        break;
    }
  }
  for (const auto& [x, y] : jlist) suf.unite(x, y);
  std::map<int, std::pair<int, int>> sthick;
  for (int t = 0; t <= T; ++t) {
    const BlWeb& w = F.still_at(t);
    for (int j = 0; j < w.num_layers(); ++j) {
      int r = suf.find(soff[t] + j);
      ++scomp[r].first;
      sthick[r] = {w.layers()[j].a, w.layers()[j].b};
    }
  }
  for (const auto& [x, y] : jlist) ++scomp[suf.find(x)].second;
  for (const auto& [root, sj] : scomp)
    chi -= seam_copies(sthick.at(root).first, sthick.at(root).second, k) *
           (sj.first - sj.second);

  long dotdeg = 0;
  for (const auto& g : F.gens())
    if (g.kind == FoamKind::Dot) dotdeg += std::max(0, g.decor.degree());

  long boundary = 0;
  for (int p : F.source().source().parts()) boundary += static_cast<long>(p) * (k - p);
  for (int p : F.source().target().parts()) boundary += static_cast<long>(p) * (k - p);

  return static_cast<HalfInt>(-2 * chi + 4 * dotdeg + boundary);
}

// ---------------------------------------------------------------------------
// Annular reduction: a capped rotational foam collapses to decorated disks.

/// A rotationally symmetric foam over an annular closure, capped by disks on
/// the source side of the web.  Dots sit on edges of the web, keyed by
/// (height, slot).
struct CappedTraceFoam {
  BlWeb web;
  std::map<std::pair<int, int>, MultiPoly> dots;
};

/// coefficient, and one decoration per strand of web.target()
using DiskTerm = std::pair<Rational, std::vector<MultiPoly>>;

inline void validate_trace_dots(const CappedTraceFoam& G) {
  for (const auto& [hs, p] : G.dots) {
    FoamGen d = FoamGen::dot(hs.first, hs.second, p);
    apply_foam_gen(G.web, d);  // reuses the dot checks
  }
}

/// Peel the innermost vertex repeatedly: a merge becomes a bubble between
/// two capped disks, a split a two-sided dish whose removal spreads
/// complementary Schur decorations onto the two strands.
inline std::vector<DiskTerm> annular_reduce(const CappedTraceFoam& G) {
  validate_trace_dots(G);
  struct State {
    Rational coeff;
    BlWeb web;
    std::map<std::pair<int, int>, MultiPoly> dots;
  };
  std::vector<State> todo{{Rational(1), G.web, G.dots}};
  std::map<std::vector<MultiPoly>, Rational> acc;
  while (!todo.empty()) {
    State st = std::move(todo.back());
    todo.pop_back();
    if (st.web.num_layers() == 0) {
      const Composition& c = st.web.source();
      std::vector<MultiPoly> d;
      for (int i = 0; i < c.length(); ++i) d.push_back(MultiPoly::one(c[i]));
      for (const auto& [hs, p] : st.dots) d[hs.second] = d[hs.second] * p;
      acc[d] += st.coeff;
      continue;
    }
    const Layer& l0 = st.web.layers()[0];
    BlWeb rest(st.web.comp_at(1),
               {st.web.layers().begin() + 1, st.web.layers().end()});
    int s = l0.slot;
    auto carried = [&]() {
      // dots above the peeled vertex drop one height; inner dots re-slot
      std::map<std::pair<int, int>, MultiPoly> nd;
      for (const auto& [hs, p] : st.dots) {
        if (hs.first > 0) {
          auto key = std::make_pair(hs.first - 1, hs.second);
          auto it = nd.find(key);
          if (it == nd.end())
            nd.emplace(key, p);
          else
            it->second = it->second * p;
        }
      }
      return nd;
    };
    auto inner_dot = [&](int slot, int th) {
      auto it = st.dots.find({0, slot});
      return it == st.dots.end() ? MultiPoly::one(th) : it->second;
    };
    auto add_dot = [](std::map<std::pair<int, int>, MultiPoly>& dots, int slot,
                      const MultiPoly& p) {
      if (p.degree() == 0 && p.terms().begin()->second == 1 &&
          p.terms().size() == 1)
        return;
      auto it = dots.find({0, slot});
      if (it == dots.end())
        dots.emplace(std::make_pair(0, slot), p);
      else
        it->second = it->second * p;
    };
    if (l0.kind == Layer::Kind::Merge) {
      MultiPoly r = split_pairing(inner_dot(s, l0.a), inner_dot(s + 1, l0.b));
      if (r.is_zero()) continue;
      auto nd = carried();
      for (const auto& [hs, p] : st.dots)
        if (hs.first == 0 && hs.second != s && hs.second != s + 1)
          add_dot(nd, hs.second < s ? hs.second : hs.second - 1, p);
      add_dot(nd, s, r);
      todo.push_back({st.coeff, rest, std::move(nd)});
    } else {
      auto expansion = pair_schur_expansion(inner_dot(s, l0.a + l0.b), l0.a,
                                            l0.b);
      for (const auto& [lm, c] : expansion) {
        for (const auto& kap : partitions_in_rectangle(l0.a, l0.b)) {
          Partition dual = rect_dual(kap, l0.a, l0.b);
          Rational sign = dual.size() % 2 ? -1 : 1;
          auto nd = carried();
          for (const auto& [hs, p] : st.dots)
            if (hs.first == 0 && hs.second != s)
              add_dot(nd, hs.second < s ? hs.second : hs.second + 1, p);
          add_dot(nd, s, schur(lm.first, l0.a) * schur(kap, l0.a));
          add_dot(nd, s + 1, schur(lm.second, l0.b) * schur(dual, l0.b));
          todo.push_back({st.coeff * c * sign, rest, std::move(nd)});
        }
      }
    }
  }
  std::vector<DiskTerm> out;
  for (auto& [d, c] : acc)
    if (c != 0) out.emplace_back(c, d);
  return out;
}

/// The capped trace foam written as a movie on the identity web of the free
/// boundary: mirror pairs are born outermost-first, decorations applied,
/// then the pairs cancel from the inside out.
inline FoamWord closure_word(const CappedTraceFoam& G) {
  validate_trace_dots(G);
  const BlWeb& w = G.web;
  int n = w.num_layers();
  std::vector<FoamGen> gens;
  for (int i = n - 1; i >= 0; --i) {
    const Layer& l = w.layers()[i];
    int h = n - 1 - i;
    if (l.kind == Layer::Kind::Merge)
      gens.push_back(FoamGen::digon_birth(h, l.slot, l.a, l.b));
    else
      gens.push_back(FoamGen::zip(h, l.slot));
  }
  for (const auto& [hs, p] : G.dots)
    gens.push_back(FoamGen::dot(n + hs.first, hs.second, p));
  for (int i = 0; i < n; ++i) {
    const Layer& l = w.layers()[i];
    int h = n - 1 - i;
    if (l.kind == Layer::Kind::Merge)
      gens.push_back(FoamGen::digon_death(h, l.slot));
    else
      gens.push_back(FoamGen::unzip(h, l.slot));
  }
  return FoamWord(BlWeb::identity(w.target()), std::move(gens));
}

}  // namespace foamcalc
