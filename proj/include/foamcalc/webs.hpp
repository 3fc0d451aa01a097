#pragma once

#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "foamcalc/composition.hpp"
#include "foamcalc/rational.hpp"

namespace foamcalc {

/// A composition anchored at strictly increasing points of (0,1).  Equality
/// of 1-morphism boundaries is tested on the composition part only; the
/// nameless isomorphisms between positions with equal composition parts are
/// unique, so nothing is lost.
struct Position {
  Composition comp;
  std::vector<Rational> points;

  static Position evenly_spaced(Composition c) {
    Position p;
    int l = c.length();
    p.points.reserve(l);
    for (int i = 1; i <= l; ++i)
      p.points.emplace_back(Rational(i, l + 1));
    p.comp = std::move(c);
    return p;
  }

  void validate() const {
    if (static_cast<int>(points.size()) != comp.length())
      throw std::invalid_argument("Position: points/parts length mismatch");
    for (size_t i = 0; i < points.size(); ++i) {
      if (points[i] <= 0 || points[i] >= 1)
        throw std::invalid_argument("Position: points must lie in (0,1)");
      if (i && points[i] <= points[i - 1])
        throw std::invalid_argument("Position: points must strictly increase");
    }
  }
};

/// One well-presented layer: a single trivalent vertex at a given slot.
struct Layer {
  enum class Kind { Merge, Split };
  Kind kind;
  int slot = 0;   // 0-based index of the (leftmost) strand acted on
  int a = 0, b = 0;  // split thicknesses; for a merge these record the
                     // thicknesses that were fused (filled by validation)

  bool operator==(const Layer& o) const {
    return kind == o.kind && slot == o.slot && a == o.a && b == o.b;
  }
  bool operator<(const Layer& o) const {
    auto key = [](const Layer& l) {
      return std::tuple(static_cast<int>(l.kind), l.slot, l.a, l.b);
    };
    return key(*this) < key(o);
  }

  std::string str() const {
    std::ostringstream os;
    if (kind == Kind::Merge)
      os << "merge " << slot + 1;
    else
      os << "split " << slot + 1 << " (" << a << "," << b << ")";
    return os.str();
  }
};

inline int layer_in_width(const Layer& l) {
  return l.kind == Layer::Kind::Merge ? 2 : 1;
}
inline int layer_out_width(const Layer& l) {
  return l.kind == Layer::Kind::Merge ? 1 : 2;
}

/// Exchange move: if A (acting first) and B have disjoint strand support,
/// produce the equivalent order with B acting first.  Slots renumber by the
/// width change of the layer they move past.
inline bool try_swap_layers(const Layer& A, const Layer& B, Layer& B_first,
                            Layer& A_then) {
  int dA = layer_out_width(A) - layer_in_width(A);
  int dB = layer_out_width(B) - layer_in_width(B);
  if (B.slot + layer_in_width(B) <= A.slot) {
    B_first = B;
    A_then = A;
    A_then.slot += dB;
    return true;
  }
  if (B.slot >= A.slot + layer_out_width(A)) {
    B_first = B;
    B_first.slot -= dA;
    A_then = A;
    return true;
  }
  return false;
}

/// Apply one layer to a composition; throws with a flow-condition message
/// naming the problem.
inline Composition apply_layer(const Composition& c, Layer& l) {
  const auto& p = c.parts();
  std::vector<int> out;
  if (l.kind == Layer::Kind::Merge) {
    if (l.slot < 0 || l.slot + 1 >= c.length())
      throw std::invalid_argument("merge slot out of range");
    out.assign(p.begin(), p.end());
    l.a = p[l.slot];
    l.b = p[l.slot + 1];
    out[l.slot] += out[l.slot + 1];
    out.erase(out.begin() + l.slot + 1);
  } else {
    if (l.slot < 0 || l.slot >= c.length())
      throw std::invalid_argument("split slot out of range");
    if (l.a < 1 || l.b < 1)
      throw std::invalid_argument("split thicknesses must be >= 1");
    if (l.a + l.b != p[l.slot])
      throw std::invalid_argument("split violates the flow condition");
    out.assign(p.begin(), p.end());
    out[l.slot] = l.a;
    out.insert(out.begin() + l.slot + 1, l.b);
  }
  return Composition(out);
}

/// Braid-like web as a well-presented layer word.
class BlWeb {
 public:
  BlWeb() = default;
  /// Validates the flow condition layer by layer; throws naming the first
  /// offending layer (1-based).
  BlWeb(Composition source, std::vector<Layer> layers)
      : source_(std::move(source)), layers_(std::move(layers)) {
    comps_.push_back(source_);
    for (size_t i = 0; i < layers_.size(); ++i) {
      try {
        comps_.push_back(apply_layer(comps_.back(), layers_[i]));
      } catch (const std::invalid_argument& e) {
        throw std::invalid_argument("layer " + std::to_string(i + 1) + ": " +
                                    e.what());
      }
    }
  }

  static BlWeb identity(Composition c) { return BlWeb(std::move(c), {}); }

  const Composition& source() const { return comps_.front(); }
  const Composition& target() const { return comps_.back(); }
  const std::vector<Layer>& layers() const { return layers_; }
  int num_layers() const { return static_cast<int>(layers_.size()); }
  /// Composition at height h, 0 <= h <= num_layers().
  const Composition& comp_at(int h) const { return comps_.at(h); }
  int level() const { return source().level(); }

  /// Equality of webs, i.e. of layer words up to exchange of layers with
  /// disjoint support (isotopy sliding distant vertices past each other).
  bool operator==(const BlWeb& o) const {
    return source() == o.source() &&
           normalized().layers_ == o.normalized().layers_;
  }

  /// Lexicographically least representative of the exchange class, found by
  /// the usual greedy front-extraction for partially commutative words.
  BlWeb normalized() const {
    auto key = [](const Layer& l) {
      int a = l.kind == Layer::Kind::Split ? l.a : 0;
      int b = l.kind == Layer::Kind::Split ? l.b : 0;
      return std::tuple(l.slot, static_cast<int>(l.kind), a, b);
    };
    std::vector<Layer> w = layers_;
    int n = static_cast<int>(w.size());
    for (int i = 0; i < n; ++i) {
      int bestj = i;
      Layer best = w[i];
      for (int j = i + 1; j < n; ++j) {
        Layer cand = w[j];
        bool ok = true;
        for (int t = j - 1; t >= i; --t) {
          Layer bf, at;
          if (!try_swap_layers(w[t], cand, bf, at)) {
            ok = false;
            break;
          }
          cand = bf;
        }
        if (ok && key(cand) < key(best)) {
          bestj = j;
          best = cand;
        }
      }
      for (int t = bestj; t > i; --t) {
        Layer bf, at;
        try_swap_layers(w[t - 1], w[t], bf, at);
        w[t - 1] = bf;
        w[t] = at;
      }
    }
    return BlWeb(source_, std::move(w));
  }

  /// Doubled shift: 2 * sum of vertex shifts ab/2, i.e. sum of ab.
  long shift_doubled() const {
    long s = 0;
    for (const auto& l : layers_) s += long(l.a) * l.b;
    return s;
  }

  /// g after f (f first).
  friend BlWeb compose(const BlWeb& g, const BlWeb& f) {
    if (f.target() != g.source())
      throw std::invalid_argument("compose: boundary mismatch");
    std::vector<Layer> ls = f.layers_;
    ls.insert(ls.end(), g.layers_.begin(), g.layers_.end());
    return BlWeb(f.source(), std::move(ls));
  }

  /// Mirror along the horizontal axis: reverses layers, swapping the roles
  /// of merge and split vertices.
  BlWeb dagger() const {
    std::vector<Layer> ls;
    ls.reserve(layers_.size());
    for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) {
      Layer l = *it;
      l.kind = l.kind == Layer::Kind::Merge ? Layer::Kind::Split
                                            : Layer::Kind::Merge;
      ls.push_back(l);
    }
    return BlWeb(target(), std::move(ls));
  }

  friend BlWeb disjoint_union(const BlWeb& f, const BlWeb& g) {
    std::vector<int> parts = f.source().parts();
    const auto& gp = g.source().parts();
    parts.insert(parts.end(), gp.begin(), gp.end());
    std::vector<Layer> ls = f.layers_;
    int off = f.target().length();
    for (Layer l : g.layers_) {
      l.slot += off;
      ls.push_back(l);
    }
    return BlWeb(Composition(parts), std::move(ls));
  }

  std::string str() const {
    std::ostringstream os;
    os << "web k=" << level() << " source=" << source().str();
    for (const auto& l : layers_) os << " ; " << l.str();
    return os.str();
  }

 private:
  Composition source_;
  std::vector<Layer> layers_;
  std::vector<Composition> comps_;
};

/// Standard tree T_p : (k) -> p, a fixed left comb of splits.
inline BlWeb standard_tree(const Composition& c) {
  int k = c.level();
  std::vector<Layer> ls;
  int rest = k;
  for (int i = 0; i + 1 < c.length(); ++i) {
    Layer l;
    l.kind = Layer::Kind::Split;
    l.slot = i;
    l.a = c[i];
    l.b = rest - c[i];
    ls.push_back(l);
    rest -= c[i];
  }
  return BlWeb(Composition({k}), std::move(ls));
}

/// Annular closure: a cyclic word of layers on a cut composition.  Two
/// rotations represent the same object of the horizontal trace; canonical()
/// picks a fixed representative.
class AnnularWeb {
 public:
  AnnularWeb() = default;
  AnnularWeb(Composition cut, std::vector<Layer> layers) {
    web_ = BlWeb(std::move(cut), std::move(layers));
    if (web_.source() != web_.target())
      throw std::invalid_argument("AnnularWeb: word does not close up");
  }
  explicit AnnularWeb(const BlWeb& endo) : AnnularWeb(endo.source(), endo.layers()) {}

  const Composition& cut() const { return web_.source(); }
  const BlWeb& word() const { return web_; }
  int num_vertices() const { return web_.num_layers(); }

  /// Rotate the cut past the first layer.
  AnnularWeb rotated() const {
    if (num_vertices() == 0) return *this;
    std::vector<Layer> ls(web_.layers().begin() + 1, web_.layers().end());
    ls.push_back(web_.layers().front());
    return AnnularWeb(web_.comp_at(1), std::move(ls));
  }

  std::vector<AnnularWeb> rotations() const {
    std::vector<AnnularWeb> out;
    AnnularWeb w = *this;
    int n = std::max(1, num_vertices());
    for (int i = 0; i < n; ++i) {
      out.push_back(w);
      w = w.rotated();
    }
    return out;
  }

  /// Lexicographically minimal rotation (on the encoded word).
  AnnularWeb canonical() const {
    auto rots = rotations();
    const AnnularWeb* best = &rots.front();
    for (const auto& r : rots)
      if (encode(r) < encode(*best)) best = &r;
    return *best;
  }

  bool rotation_equivalent(const AnnularWeb& o) const {
    return encode(canonical()) == encode(o.canonical());
  }

  std::string str() const { return "annular cut=" + web_.str(); }

 private:
  static std::vector<std::tuple<int, int, int, int>> encode(
      const AnnularWeb& w) {
    std::vector<std::tuple<int, int, int, int>> e;
    for (int p : w.cut().parts()) e.emplace_back(-1, p, 0, 0);
    for (const auto& l : w.word().normalized().layers())
      e.emplace_back(static_cast<int>(l.kind), l.slot, l.a, l.b);
    return e;
  }

  BlWeb web_;
};

}  // namespace foamcalc
