#pragma once

#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "foamcalc/qcomb.hpp"
#include "foamcalc/webs.hpp"

namespace foamcalc {

/// Formal nonnegative sum of circle objects indexed by (cyclically
/// canonical) compositions.
struct WebClass {
  std::map<Composition, LaurentQ> terms;

  void add(const Composition& c, const LaurentQ& coeff) {
    if (coeff.is_zero()) return;
    auto it = terms.find(c);
    if (it == terms.end()) {
      terms.emplace(c, coeff);
    } else {
      it->second = it->second + coeff;
      if (it->second.is_zero()) terms.erase(it);
    }
  }

  bool empty() const { return terms.empty(); }
  bool operator==(const WebClass& o) const { return terms == o.terms; }

  std::string str() const {
    if (terms.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (const auto& [c, p] : terms) {
      if (!first) os << " + ";
      first = false;
      os << "(" << p.str() << ") S" << c.str();
    }
    return os.str();
  }
};

struct DecompositionResult {
  WebClass positive;  // the P side
  WebClass negative;  // the Q side
  std::vector<std::string> steps;
};

/// Multiplicity of the plain strand replacing a split-merge digon with
/// thicknesses (a,b).
inline LaurentQ digon_reduce(int a, int b) {
  if (a < 1 || b < 1)
    throw std::invalid_argument("digon_reduce: thicknesses must be >= 1");
  return quantum_binomial(a + b, a);
}

inline LaurentQ qbinom_or_zero(int n, int j) {
  if (j < 0 || j > n) return LaurentQ();
  return quantum_binomial(n, j);
}

namespace qrdetail {

/// A ladder rung on an adjacent strand pair.  to_right moves t from the
/// left strand to the right one, otherwise the other way.  Transfers must
/// leave both strands with positive thickness; a zero transfer is the
/// identity.
struct Rung {
  bool to_right;
  int t;
};

/// Emit the layers of one rung acting at slot on pair (u,v).  Returns
/// false if the rung is invalid or would empty a strand.
inline bool apply_rung(int& u, int& v, int slot, const Rung& r,
                       std::vector<Layer>& out) {
  auto S = [&](int sl, int a, int b) {
    out.push_back(Layer{Layer::Kind::Split, sl, a, b});
  };
  auto M = [&](int sl) { out.push_back(Layer{Layer::Kind::Merge, sl, 0, 0}); };
  int t = r.t;
  if (t < 0) return false;
  if (t == 0) return true;
  if (r.to_right) {
    if (t >= u) return false;
    S(slot, u - t, t);
    M(slot + 1);
    u -= t;
    v += t;
  } else {
    if (t >= v) return false;
    S(slot + 1, t, v - t);
    M(slot);
    u += t;
    v -= t;
  }
  return true;
}

inline std::optional<std::vector<Layer>> rung_pair_word(int x, int y, int slot,
                                                        Rung r1, Rung r2) {
  // A first rung draining its source strand completely leaves a
  // zero-thickness middle edge; deleting it collapses the pair to a
  // merge-then-split dumbbell with the same outer boundary.
  if (r1.t > 0 && r1.t == (r1.to_right ? x : y)) {
    if (r2.to_right == r1.to_right || r2.t < 1 || r2.t > x + y - 1)
      return std::nullopt;
    int fx = r1.to_right ? r2.t : x + y - r2.t;
    return std::vector<Layer>{Layer{Layer::Kind::Merge, slot, 0, 0},
                              Layer{Layer::Kind::Split, slot, fx, x + y - fx}};
  }
  std::vector<Layer> out;
  int u = x, v = y;
  if (!apply_rung(u, v, slot, r1, out)) return std::nullopt;
  if (!apply_rung(u, v, slot, r2, out)) return std::nullopt;
  return out;
}

inline Composition cyclic_min(const Composition& c) {
  if (c.length() == 0) return c;
  std::vector<int> best = c.parts();
  std::vector<int> cur = c.parts();
  for (int i = 1; i < c.length(); ++i) {
    std::rotate(cur.begin(), cur.begin() + 1, cur.end());
    if (cur < best) best = cur;
  }
  return Composition(best);
}

/// Match a freshly emitted rung layer against a validated web layer; the
/// validated one carries recorded fuse thicknesses on merges.
inline bool layer_matches(const Layer& raw, const Layer& validated) {
  if (raw.kind != validated.kind || raw.slot != validated.slot) return false;
  return raw.kind == Layer::Kind::Merge ||
         (raw.a == validated.a && raw.b == validated.b);
}

inline std::string canonical_key(const AnnularWeb& w) {
  AnnularWeb c = w.canonical();
  return c.cut().str() + "|" + c.word().normalized().str();
}

}  // namespace qrdetail

/// One ladder square: two opposite rungs on a bare adjacent pair (x,y),
/// the first-listed rung acting first.
struct SquareConfig {
  int x = 0, y = 0;
  qrdetail::Rung first, second;
};

struct SquareTerm {
  LaurentQ coeff;
  BlWeb web;
};

inline BlWeb square_lhs(const SquareConfig& cfg) {
  auto word = qrdetail::rung_pair_word(cfg.x, cfg.y, 0, cfg.first, cfg.second);
  if (!word) throw std::invalid_argument("square_lhs: invalid rungs");
  return BlWeb(Composition{cfg.x, cfg.y}, *word);
}

/// Forward square switch: rewrites the two-rung web as a sum of the
/// order-swapped two-rung webs, with quantum-binomial multiplicities in the
/// relation defect.  Throws if the side condition fails.
inline std::vector<SquareTerm> square_switch(const SquareConfig& cfg) {
  using qrdetail::Rung;
  int c, d, defect;
  // d is the rightward transfer, c the leftward one; the defect of the
  // rightward-first ordering is x-y+c-d, of the leftward-first y-x+d-c
  if (cfg.first.to_right) {
    d = cfg.first.t;
    c = cfg.second.t;
    defect = cfg.x - cfg.y + c - d;
  } else {
    c = cfg.first.t;
    d = cfg.second.t;
    defect = cfg.y - cfg.x + d - c;
  }
  if (defect < 0)
    throw std::invalid_argument("square_switch: side condition violated");
  std::vector<SquareTerm> out;
  for (int j = 0; j <= std::min(c, d); ++j) {
    LaurentQ coeff = qbinom_or_zero(defect, j);
    if (coeff.is_zero()) continue;
    Rung nf{cfg.second.to_right, cfg.second.t - j};
    Rung ns{cfg.first.to_right, cfg.first.t - j};
    auto word = qrdetail::rung_pair_word(cfg.x, cfg.y, 0, nf, ns);
    // a transfer exceeding the available thickness is the zero map
    if (!word) continue;
    out.push_back(SquareTerm{coeff, BlWeb(Composition{cfg.x, cfg.y}, *word)});
  }
  return out;
}

enum class QRStrategy { First, Last };

namespace qrdetail {

using SignedClass = std::map<Composition, LaurentQ>;

inline void class_add(SignedClass& acc, const Composition& c,
                      const LaurentQ& coeff) {
  auto it = acc.find(c);
  if (it == acc.end()) {
    if (!coeff.is_zero()) acc.emplace(c, coeff);
  } else {
    it->second = it->second + coeff;
    if (it->second.is_zero()) acc.erase(it);
  }
}

struct Candidate {
  std::vector<std::pair<LaurentQ, AnnularWeb>> terms;
  std::string description;
};

class Reducer {
 public:
  Reducer(QRStrategy strat, long budget)
      : strat_(strat), budget_(budget) {}

  SignedClass reduce(const AnnularWeb& w) {
    std::string key = canonical_key(w);
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    if (in_progress_.count(key))
      throw std::runtime_error("qr_decompose: cyclic rewrite, strategy bug");
    if (w.num_vertices() == 0) {
      SignedClass r;
      r.emplace(cyclic_min(w.cut()), LaurentQ::one());
      memo_.emplace(key, r);
      return r;
    }
    in_progress_.insert(key);
    if (--budget_ < 0)
      throw std::runtime_error("qr_decompose: step budget exceeded");

    Candidate cand = pick_candidate(w);
    steps.push_back(cand.description);
    SignedClass acc;
    for (const auto& [coeff, term] : cand.terms) {
      SignedClass sub = reduce(term);
      for (const auto& [c, p] : sub) class_add(acc, c, coeff * p);
    }
    in_progress_.erase(key);
    memo_.emplace(key, acc);
    return acc;
  }

  std::vector<std::string> steps;

 private:
  /// Measure used to force progress: vertex count, then canonical encoding.
  static std::pair<int, std::string> measure(const AnnularWeb& w) {
    return {w.num_vertices(), canonical_key(w)};
  }

  std::vector<Candidate> all_candidates(const AnnularWeb& w) const {
    std::vector<Candidate> cands;
    auto cur_measure = measure(w);
    int n = w.num_vertices();
    AnnularWeb rot = w;
    for (int r = 0; r < n; ++r) {
      if (r > 0) rot = rot.rotated();
      BlWeb word = rot.word().normalized();
      const auto& ls = word.layers();
      const Composition& cut = word.source();

      // digons: a split immediately undone by a merge at the same slot
      for (int i = 0; i + 1 < n; ++i) {
        const Layer &s = ls[i], &m = ls[i + 1];
        if (s.kind == Layer::Kind::Split && m.kind == Layer::Kind::Merge &&
            s.slot == m.slot) {
          std::vector<Layer> rest(ls.begin(), ls.begin() + i);
          rest.insert(rest.end(), ls.begin() + i + 2, ls.end());
          Candidate c;
          c.terms.emplace_back(digon_reduce(s.a, s.b),
                               AnnularWeb(cut, std::move(rest)));
          std::ostringstream os;
          os << "digon (" << s.a << "," << s.b << ") at rotation " << r;
          c.description = os.str();
          cands.push_back(std::move(c));
        }
      }

      // rung pairs at the head of the rotated word
      for (int slot = 0; slot + 1 < cut.length(); ++slot) {
        int x = cut[slot], y = cut[slot + 1];
        for (int dir = 0; dir < 2; ++dir)
          for (int t1 = 1; t1 <= x + y; ++t1)
            for (int t2 = 1; t2 <= x + y; ++t2) {
              Rung r1{dir == 0, t1}, r2{!r1.to_right, t2};
              auto seg = rung_pair_word(x, y, slot, r1, r2);
              if (!seg || seg->empty() ||
                  static_cast<int>(seg->size()) > n)
                continue;
              if (!std::equal(seg->begin(), seg->end(), ls.begin(),
                              layer_matches))
                continue;
              std::vector<Layer> rest(ls.begin() + seg->size(), ls.end());
              maybe_add_square(cands, cut, x, y, slot, r1, r2, rest,
                               cur_measure, r);
            }
      }
    }
    return cands;
  }

  /// Square switch rewrites of the head rung pair, forward or reverse,
  /// kept only if every emitted term is strictly smaller in the measure.
  void maybe_add_square(std::vector<Candidate>& cands, const Composition& cut,
                        int x, int y, int slot, Rung r1, Rung r2,
                        const std::vector<Layer>& rest,
                        const std::pair<int, std::string>& cur_measure,
                        int rotation) const {
    int d = r1.to_right ? r1.t : r2.t;  // rightward transfer
    int c = r1.to_right ? r2.t : r1.t;  // leftward transfer
    int defect_right_first = x - y + c - d;
    int defect_left_first = y - x + d - c;
    int defect = r1.to_right ? defect_right_first : defect_left_first;
    int rev_defect = r1.to_right ? defect_left_first : defect_right_first;

    auto build = [&](Rung a, Rung b) -> std::optional<AnnularWeb> {
      auto seg = rung_pair_word(x, y, slot, a, b);
      if (!seg) return std::nullopt;
      std::vector<Layer> wword = *seg;
      wword.insert(wword.end(), rest.begin(), rest.end());
      return AnnularWeb(cut, std::move(wword));
    };

    auto try_terms =
        [&](bool forward) -> std::optional<std::vector<std::pair<LaurentQ, AnnularWeb>>> {
      int def = forward ? defect : rev_defect;
      if (def < 0) return std::nullopt;
      std::vector<std::pair<LaurentQ, AnnularWeb>> terms;
      // main term: the order-swapped pair, coefficient +1; an
      // unrealizable pair is the zero map and drops out
      auto main = build(r2, r1);
      if (main) {
        if (!(measure(*main) < cur_measure)) return std::nullopt;
        terms.emplace_back(LaurentQ::one(), *main);
      }
      for (int j = 1; j <= std::min(r1.t, r2.t); ++j) {
        LaurentQ coeff = qbinom_or_zero(def, j);
        if (coeff.is_zero()) continue;
        // forward: lower terms keep the swapped order; reverse: original
        auto term = forward ? build(Rung{r2.to_right, r2.t - j},
                                    Rung{r1.to_right, r1.t - j})
                            : build(Rung{r1.to_right, r1.t - j},
                                    Rung{r2.to_right, r2.t - j});
        if (!term) continue;
        if (!(measure(*term) < cur_measure)) return std::nullopt;
        if (!forward) coeff = LaurentQ() - coeff;
        terms.emplace_back(coeff, *term);
      }
      if (terms.empty()) return std::nullopt;
      return terms;
    };

    for (bool forward : {true, false}) {
      auto terms = try_terms(forward);
      if (!terms) continue;
      Candidate cnd;
      cnd.terms = std::move(*terms);
      std::ostringstream os;
      os << (forward ? "square switch" : "reverse square switch") << " on ("
         << x << "," << y << ") rungs " << (r1.to_right ? "F" : "E") << r1.t
         << (r2.to_right ? "F" : "E") << r2.t << " at rotation " << rotation;
      cnd.description = os.str();
      cands.push_back(std::move(cnd));
    }
  }

  Candidate pick_candidate(const AnnularWeb& w) const {
    auto cands = all_candidates(w);
    if (cands.empty())
      throw std::runtime_error(
          "qr_decompose: no applicable rewrite, strategy stuck");
    return strat_ == QRStrategy::First ? cands.front() : cands.back();
  }

  QRStrategy strat_;
  long budget_;
  std::map<std::string, SignedClass> memo_;
  std::set<std::string> in_progress_;
};

}  // namespace qrdetail

inline DecompositionResult qr_decompose(const AnnularWeb& w,
                                        QRStrategy strat = QRStrategy::First) {
  long budget = 10L * w.num_vertices() * w.num_vertices() + 10;
  qrdetail::Reducer red(strat, budget);
  qrdetail::SignedClass net = red.reduce(w);
  DecompositionResult res;
  res.steps = std::move(red.steps);
  for (const auto& [c, poly] : net) {
    LaurentQ pos, neg;
    for (const auto& [e, coeff] : poly.coeffs()) {
      if (coeff > 0)
        pos += LaurentQ::monomial(e, coeff);
      else
        neg += LaurentQ::monomial(e, -coeff);
    }
    if (!pos.is_zero()) res.positive.add(c, pos);
    if (!neg.is_zero()) res.negative.add(c, neg);
  }
  return res;
}

}  // namespace foamcalc
