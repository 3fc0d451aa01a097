#pragma once

#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "foamcalc/dsl.hpp"
#include "foamcalc/foams.hpp"
#include "foamcalc/glnoracle.hpp"
#include "foamcalc/qcomb.hpp"
#include "foamcalc/rho.hpp"
#include "foamcalc/soergel.hpp"
#include "foamcalc/sympoly.hpp"
#include "foamcalc/webdecomp.hpp"
#include "foamcalc/webs.hpp"

namespace foamcalc {

struct SelfCheck {
  std::string name;
  bool pass = true;
  std::string detail;
};

namespace selfdetail {

class Checker {
 public:
  explicit Checker(std::string name) : r_{std::move(name), true, ""} {}
  void require(bool ok, const std::string& what) {
    if (!ok && r_.pass) {
      r_.pass = false;
      r_.detail = what;
    }
  }
  SelfCheck finish(long cases) {
    if (r_.pass) r_.detail = std::to_string(cases) + " cases";
    return r_;
  }
  SelfCheck fail_exception(const std::string& what) {
    r_.pass = false;
    r_.detail = "exception: " + what;
    return r_;
  }

 private:
  SelfCheck r_;
};

inline int ri(std::mt19937& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

// one random valid generator appended to the word, or false
inline bool push_random_gen(std::vector<FoamGen>& gens, BlWeb& cur,
                            std::mt19937& rng) {
  for (int attempt = 0; attempt < 100; ++attempt) {
    int kind = ri(rng, 0, 5);
    int n = cur.num_layers();
    FoamGen g;
    switch (kind) {
      case 0: {
        int h = ri(rng, 0, n);
        const Composition& c = cur.comp_at(h);
        int s = ri(rng, 0, c.length() - 1);
        auto lams = partitions_in_rectangle(c[s], 2);
        const Partition& lam = lams[ri(rng, 0, (int)lams.size() - 1)];
        if (lam.empty()) continue;
        g = FoamGen::dot(h, s, schur(lam, c[s]));
        break;
      }
      case 1: {
        int h = ri(rng, 0, n);
        const Composition& c = cur.comp_at(h);
        if (c.length() < 2) continue;
        g = FoamGen::zip(h, ri(rng, 0, c.length() - 2));
        break;
      }
      case 2: {
        if (n < 2) continue;
        int h = ri(rng, 0, n - 2);
        g = FoamGen::unzip(h, cur.layers()[h].slot);
        break;
      }
      case 3: {
        int h = ri(rng, 0, n);
        const Composition& c = cur.comp_at(h);
        int s = ri(rng, 0, c.length() - 1);
        if (c[s] < 2) continue;
        int a = ri(rng, 1, c[s] - 1);
        g = FoamGen::digon_birth(h, s, a, c[s] - a);
        break;
      }
      case 4: {
        if (n < 2) continue;
        int h = ri(rng, 0, n - 2);
        g = FoamGen::digon_death(h, cur.layers()[h].slot);
        break;
      }
      case 5: {
        if (n < 2) continue;
        g = FoamGen::exchange(ri(rng, 0, n - 2));
        break;
      }
    }
    try {
      BlWeb next = apply_foam_gen(cur, g);
      cur = std::move(next);
      gens.push_back(std::move(g));
      return true;
    } catch (const std::invalid_argument&) {
    }
  }
  return false;
}

inline FoamWord random_word(const BlWeb& src, int len, std::mt19937& rng) {
  std::vector<FoamGen> gens;
  BlWeb cur = src;
  for (int i = 0; i < len; ++i) push_random_gen(gens, cur, rng);
  return FoamWord(src, std::move(gens));
}

inline bool maps_equal(const BimoduleMap& f, const BimoduleMap& g, int upto) {
  if (f.degree_doubled != g.degree_doubled) return false;
  for (int m = 0; m <= upto; ++m) {
    auto fi = f.blocks.find(m), gi = g.blocks.find(m);
    bool fh = fi != f.blocks.end(), gh = gi != g.blocks.end();
    if (fh && gh) {
      if (!(fi->second == gi->second)) return false;
      continue;
    }
    const Mat* present = fh ? &fi->second : (gh ? &gi->second : nullptr);
    if (!present) continue;
    for (const auto& v : present->data)
      if (v != 0) return false;
  }
  return true;
}

// 1. the two graded rank formulas of the invariant algebras agree
inline SelfCheck check_rank_coherence() {
  Checker c("rank coherence of invariant-algebra dimensions");
  long cases = 0;
  try {
    const HalfInt D = 40;  // q-degree 20
    for (int k = 1; k <= 5; ++k) {
      QSeries full = QSeries::one(D);
      for (int j = 1; j <= k; ++j) full = full.divided_by_one_minus_qpow(4 * j);
      for (const auto& comp : all_compositions(k)) {
        QSeries lhs = graded_dim_invariant_algebra(comp, D);
        QSeries rhs =
            quantum_multinomial(comp).shifted(HalfInt(2 * shift_composition(comp))) *
            full;
        c.require(lhs == rhs, "mismatch at composition " + comp.str());
        ++cases;
      }
    }
  } catch (const std::exception& e) {
    return c.fail_exception(e.what());
  }
  return c.finish(cases);
}

// 2. Grassmannian orthogonality of the pairing and the dual Cauchy identity
inline SelfCheck check_orthogonality_cauchy() {
  Checker c("pairing orthogonality and dual Cauchy identity");
  long cases = 0;
  try {
    for (int a = 1; a <= 3; ++a)
      for (int b = 1; b <= 3; ++b) {
        for (const auto& lam : partitions_in_rectangle(a, b))
          for (const auto& mu : partitions_in_rectangle(a, b)) {
            MultiPoly got =
                Rational(((rect_dual(mu, a, b).size()) % 2) ? -1 : 1) *
                split_pairing(schur(lam, a), schur(rect_dual(mu, a, b), b));
            MultiPoly want = lam == mu ? MultiPoly::one(a + b)
                                       : MultiPoly(a + b);
            c.require(got == want,
                      "orthogonality fails at a=" + std::to_string(a) +
                          " b=" + std::to_string(b));
            ++cases;
          }
        // sum_{lam} (-1)^{|dual|} s_lam(x) s_dual(y) = prod (x_i - y_j)
        int n = a + b;
        MultiPoly lhs(n);
        std::vector<int> xs(a), ys(b);
        for (int i = 0; i < a; ++i) xs[i] = i;
        for (int j = 0; j < b; ++j) ys[j] = a + j;
        for (const auto& lam : partitions_in_rectangle(a, b)) {
          Partition dual = rect_dual(lam, a, b);
          lhs += Rational((dual.size() % 2) ? -1 : 1) *
                 (schur(lam, a).embedded(n, xs) *
                  schur(dual, b).embedded(n, ys));
        }
        MultiPoly rhs = MultiPoly::one(n);
        for (int i = 0; i < a; ++i)
          for (int j = 0; j < b; ++j)
            rhs = rhs * (MultiPoly::variable(n, i) -
                         MultiPoly::variable(n, a + j));
        c.require(lhs == rhs, "dual Cauchy fails at a=" + std::to_string(a) +
                                  " b=" + std::to_string(b));
        ++cases;
      }
  } catch (const std::exception& e) {
    return c.fail_exception(e.what());
  }
  return c.finish(cases);
}

// 3. the symmetrizing pairing: polynomiality, symmetry, diagonal sum
inline SelfCheck check_split_pairing() {
  Checker c("symmetrizing pairing on random inputs and the diagonal sum");
  long cases = 0;
  try {
    std::mt19937 rng(99);
    for (int trial = 0; trial < 100; ++trial) {
      int a = ri(rng, 1, 3), b = ri(rng, 1, 3);
      auto rand_sym = [&](int nv) {
        MultiPoly p(nv);
        for (int d = 0; d <= 4; ++d)
          for (const auto& lam : partitions_of(d, nv))
            if (ri(rng, 0, 3) == 0)
              p += Rational(ri(rng, -4, 4)) * schur(lam, nv);
        return p;
      };
      MultiPoly P = rand_sym(a), Q = rand_sym(b);
      MultiPoly R = split_pairing(P, Q);  // throws if division fails
      c.require(is_symmetric(R), "pairing output not symmetric");
      ++cases;
    }
    for (int a = 1; a <= 3; ++a)
      for (int b = 1; b <= 3; ++b) {
        MultiPoly diag(a + b);
        for (const auto& lam : partitions_in_rectangle(a, b)) {
          Partition dual = rect_dual(lam, a, b);
          diag += Rational((dual.size() % 2) ? -1 : 1) *
                  split_pairing(schur(lam, a), schur(dual, b));
        }
        c.require(diag == MultiPoly::constant(a + b, binomial(a + b, a)),
                  "diagonal sum is not C(a+b,a) at a=" + std::to_string(a) +
                      " b=" + std::to_string(b));
        ++cases;
      }
  } catch (const std::exception& e) {
    return c.fail_exception(e.what());
  }
  return c.finish(cases);
}

// 4. local web relations: graded dimensions degreewise and q=1 maps
inline SelfCheck check_web_relations() {
  Checker c("digon and square relations, graded and at q=1");
  long cases = 0;
  try {
    const HalfInt D = 20;  // q-degree 10
    for (int a = 1; a <= 2; ++a)
      for (int b = 1; b <= 2; ++b) {
        BlWeb digon(Composition{a + b},
                    {Layer{Layer::Kind::Split, 0, a, b},
                     Layer{Layer::Kind::Merge, 0, 0, 0}});
        BlWeb strand = BlWeb::identity(Composition{a + b});
        // the multiplicity has negative powers of q, so the strand series
        // needs headroom above the cutoff before the product is truncated
        QSeries lhs = graded_dim_bimodule(digon, D);
        QSeries rhs = (digon_reduce(a, b) *
                       graded_dim_bimodule(strand, D + 2 * a * b))
                          .truncated(D);
        c.require(lhs == rhs, "digon graded dims differ at (" +
                                  std::to_string(a) + "," +
                                  std::to_string(b) + ")");
        ++cases;
        for (int N = a + b; N <= a + b + 3; ++N) {
          Mat got = web_to_map(digon, N);
          Mat want = web_to_map(strand, N);
          Rational mult = digon_reduce(a, b).eval_at_one();
          bool ok = got.rows == want.rows && got.cols == want.cols;
          for (size_t i = 0; ok && i < got.data.size(); ++i)
            ok = got.data[i] == mult * want.data[i];
          c.require(ok, "digon q=1 maps differ");
          ++cases;
        }
      }
    for (int x = 1; x <= 2; ++x)
      for (int y = 1; y <= 2; ++y)
        for (bool right_first : {true, false})
          for (int t1 = 1; t1 <= 2; ++t1)
            for (int t2 = 1; t2 <= 2; ++t2) {
              SquareConfig cfg{x, y, qrdetail::Rung{right_first, t1},
                               qrdetail::Rung{!right_first, t2}};
              if (!qrdetail::rung_pair_word(x, y, 0, cfg.first, cfg.second))
                continue;
              std::vector<SquareTerm> terms;
              try {
                terms = square_switch(cfg);
              } catch (const std::invalid_argument&) {
                continue;  // side condition not met
              }
              BlWeb lhs_web = square_lhs(cfg);
              // the combination's negative powers of q spoil the product's
              // top coefficients, so only compare below D minus that spread
              HalfInt H = 0;
              for (const auto& t : terms)
                if (!t.coeff.is_zero())
                  H = std::max(H, -t.coeff.coeffs().begin()->first);
              QSeries lhs = graded_dim_bimodule(lhs_web, D);
              QSeries rhs(D);
              for (const auto& t : terms)
                rhs += t.coeff * graded_dim_bimodule(t.web, D);
              bool ok = true;
              for (HalfInt e = -64; e <= D - H; ++e)
                ok = ok && lhs.coeff(e) == rhs.coeff(e);
              c.require(ok, "square graded dims differ");
              ++cases;
              int k = x + y;
              for (int N = k; N <= k + 3; ++N) {
                Mat want = web_to_map(lhs_web, N);
                Mat got(want.rows, want.cols);
                for (const auto& t : terms) {
                  Mat m = web_to_map(t.web, N);
                  Rational mult = t.coeff.eval_at_one();
                  for (size_t i = 0; i < m.data.size(); ++i)
                    got.data[i] += mult * m.data[i];
                }
                c.require(got == want, "square q=1 maps differ");
                ++cases;
              }
            }
  } catch (const std::exception& e) {
    return c.fail_exception(e.what());
  }
  return c.finish(cases);
}

// 5. corpus decompositions: strategy independence and the q=1 trace fit
inline SelfCheck check_corpus(const std::string& corpus_dir) {
  Checker c("corpus decomposition with the q=1 trace identity");
  long cases = 0;
  try {
    namespace fs = std::filesystem;
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(corpus_dir))
      if (e.path().extension() == ".web") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    long annular = 0;
    for (const auto& p : files) {
      std::ifstream in(p);
      std::stringstream ss;
      ss << in.rdbuf();
      BlWeb open = parse_web(ss.str());
      if (open.source() != open.target()) continue;  // open webs just parse
      ++annular;
      AnnularWeb w(open);
      auto d1 = qr_decompose(w, QRStrategy::First);
      auto d2 = qr_decompose(w, QRStrategy::Last);
      c.require(d1.positive == d2.positive && d1.negative == d2.negative,
                "strategies disagree on " + p.filename().string());
      int k = w.cut().level();
      int maxth = 0;
      for (int h = 0; h <= w.num_vertices(); ++h)
        for (int part : w.word().comp_at(h).parts())
          maxth = std::max(maxth, part);
      for (int N = std::max(k, maxth); N <= k + 3; ++N) {
        Rational lhs = annular_trace(w, N);
        for (const auto& [comp, q] : d1.negative.terms) {
          Rational prod = q.eval_at_one();
          for (int part : comp.parts()) prod *= binomial(N, part);
          lhs += prod;
        }
        Rational rhs = 0;
        for (const auto& [comp, q] : d1.positive.terms) {
          Rational prod = q.eval_at_one();
          for (int part : comp.parts()) prod *= binomial(N, part);
          rhs += prod;
        }
        c.require(lhs == rhs,
                  "trace identity fails on " + p.filename().string() +
                      " at N=" + std::to_string(N));
        ++cases;
      }
    }
    c.require(annular >= 20, "corpus has fewer than 20 annular webs");
  } catch (const std::exception& e) {
    return c.fail_exception(e.what());
  }
  return c.finish(cases);
}

// 6. reference foam degrees against the surface-count oracle
inline SelfCheck check_foam_degrees() {
  Checker c("reference foam degrees against the surface oracle");
  long cases = 0;
  try {
    auto agree = [&](const FoamWord& F, HalfInt want) {
      c.require(F.degree_doubled() == want, "table degree wrong: " + F.str());
      c.require(cw_degree_doubled(F) == want, "oracle degree wrong: " + F.str());
      cases += 2;
    };
    for (auto [a, b] : std::vector<std::pair<int, int>>{{1, 1}, {1, 2}, {2, 2}}) {
      // identity sheet
      agree(FoamWord(BlWeb::identity(Composition{a, b}), {}), 0);
      // zip: degree ab
      agree(FoamWord(BlWeb::identity(Composition{a, b}), {FoamGen::zip(0, 0)}),
            2 * a * b);
      // bubble: degree -2ab plus its dots
      MultiPoly dot = schur(Partition{1}, a);
      agree(FoamWord(BlWeb::identity(Composition{a + b}),
                     {FoamGen::digon_birth(0, 0, a, b), FoamGen::dot(1, 0, dot),
                      FoamGen::digon_death(0, 0)}),
            -4 * a * b + 4);
      // diabolo: degree 2ab
      agree(FoamWord(BlWeb::identity(Composition{a, b}),
                     {FoamGen::zip(0, 0), FoamGen::unzip(0, 0)}),
            4 * a * b);
    }
  } catch (const std::exception& e) {
    return c.fail_exception(e.what());
  }
  return c.finish(cases);
}

// 7. functoriality and degree coherence of the representation on words
inline SelfCheck check_rho_functoriality() {
  Checker c("representation functoriality on random word pairs");
  long cases = 0;
  try {
    std::mt19937 rng(2718);
    std::vector<BlWeb> sources = {
        BlWeb::identity(Composition{1, 1}),
        BlWeb::identity(Composition{2}),
        BlWeb(Composition{2}, {Layer{Layer::Kind::Split, 0, 1, 1}}),
    };
    for (int pair = 0; pair < 200; ++pair) {
      const BlWeb& src = sources[pair % sources.size()];
      FoamWord F1 = random_word(src, ri(rng, 1, 2), rng);
      FoamWord F2 = random_word(F1.target(), ri(rng, 1, 2), rng);
      FoamWord FF = vcompose(F2, F1);
      c.require(FF.degree_doubled() ==
                    F1.degree_doubled() + F2.degree_doubled(),
                "degree not additive under stacking");
      BimoduleMap rho12 = rho_foam(FF, 3);
      c.require(rho12.degree_doubled == FF.degree_doubled(),
                "map degree differs from word degree");
      BimoduleMap composed = compose(rho_foam(F2, 4), rho_foam(F1, 4));
      c.require(maps_equal(rho12, composed,
                           std::min({3, rho12.mmax, composed.mmax})),
                "stacked maps differ from the word map: " + FF.str());
      cases += 3;
    }
  } catch (const std::exception& e) {
    return c.fail_exception(e.what());
  }
  return c.finish(cases);
}

// 8. hom dimensions: foam-side counts equal the algebra-side solve for all
// small web pairs
inline SelfCheck check_hom_dimensions() {
  Checker c("hom dimensions across bending for all small web pairs");
  long cases = 0;
  try {
    const HalfInt dmax = 12;  // q-degree 6
    for (int k = 1; k <= 3; ++k) {
      // all webs with at most two vertices, grouped by boundary
      std::map<std::pair<std::string, std::string>, std::vector<BlWeb>> groups;
      auto add = [&](const BlWeb& w) {
        groups[{w.source().str(), w.target().str()}].push_back(w);
      };
      auto layer_options = [&](const Composition& comp) {
        std::vector<Layer> out;
        for (int s = 0; s + 1 < comp.length(); ++s)
          out.push_back(Layer{Layer::Kind::Merge, s, 0, 0});
        for (int s = 0; s < comp.length(); ++s)
          for (int a = 1; a < comp[s]; ++a)
            out.push_back(Layer{Layer::Kind::Split, s, a, comp[s] - a});
        return out;
      };
      for (const auto& comp : all_compositions(k)) {
        add(BlWeb::identity(comp));
        for (const Layer& l1 : layer_options(comp)) {
          BlWeb w1(comp, {l1});
          add(w1);
          for (const Layer& l2 : layer_options(w1.target()))
            add(BlWeb(comp, {l1, l2}));
        }
      }
      for (const auto& [bd, webs] : groups)
        for (const auto& w0 : webs)
          for (const auto& w1 : webs) {
            auto rep = verify_fully_faithful(w0, w1, dmax);
            c.require(rep.matched && rep.certified,
                      "hom comparison fails for " + w0.str() + " vs " +
                          w1.str() + ": " + rep.note);
            ++cases;
          }
    }
  } catch (const std::exception& e) {
    return c.fail_exception(e.what());
  }
  return c.finish(cases);
}

// 9. annular reduction equals the representation of the closure movie
inline SelfCheck check_annular_reduction() {
  Checker c("annular reduction against the closure representation");
  long cases = 0;
  try {
    std::mt19937 rng(31);
    auto check_one = [&](const CappedTraceFoam& G) {
      FoamWord F = closure_word(G);
      const Composition& comp = G.web.target();
      int k = G.web.level();
      MultiPoly disks_total(k);
      for (const auto& [coeff, decs] : annular_reduce(G)) {
        MultiPoly prod = coeff * MultiPoly::one(k);
        int off = 0;
        for (int i = 0; i < comp.length(); ++i) {
          std::vector<int> slots(comp[i]);
          std::iota(slots.begin(), slots.end(), off);
          prod = prod * decs[i].embedded(k, slots);
          off += comp[i];
        }
        disks_total += prod;
      }
      BimoduleMap f = rho_foam(F, 0);
      MultiPoly z(k);
      auto it = f.blocks.find(0);
      auto tm = f.target_m(0);
      if (it != f.blocks.end() && tm) {
        BimodulePieces Pt(build_bimodule(F.target()));
        auto reps = Pt.basis_decors(*tm);
        for (int r = 0; r < it->second.rows; ++r)
          z += it->second.at(r, 0) * reps[r].back();
      }
      c.require(z == disks_total, "reduction mismatch on " + G.web.str());
      ++cases;
    };
    std::vector<BlWeb> bases = {
        BlWeb(Composition{1, 1}, {Layer{Layer::Kind::Merge, 0, 0, 0},
                                  Layer{Layer::Kind::Split, 0, 1, 1}}),
        BlWeb(Composition{1, 2}, {Layer{Layer::Kind::Merge, 0, 0, 0},
                                  Layer{Layer::Kind::Split, 0, 2, 1}}),
        BlWeb(Composition{3}, {Layer{Layer::Kind::Split, 0, 1, 2},
                               Layer{Layer::Kind::Merge, 0, 0, 0}}),
        BlWeb::identity(Composition{2, 1}),
    };
    for (const auto& w : bases) {
      check_one({w, {}});
      for (int trial = 0; trial < 3; ++trial) {
        std::map<std::pair<int, int>, MultiPoly> dots;
        int h = ri(rng, 0, w.num_layers());
        const Composition& comp = w.comp_at(h);
        int s = ri(rng, 0, comp.length() - 1);
        auto lams = partitions_in_rectangle(comp[s], 2);
        const Partition& lam = lams[ri(rng, 1, (int)lams.size() - 1)];
        dots[{h, s}] = schur(lam, comp[s]);
        check_one({w, dots});
      }
    }
  } catch (const std::exception& e) {
    return c.fail_exception(e.what());
  }
  return c.finish(cases);
}

}  // namespace selfdetail

/// The full acceptance battery; corpus_dir holds the shipped .web files.
/// When given, on_result is invoked as each check finishes.
inline std::vector<SelfCheck> run_selftest(
    const std::string& corpus_dir,
    const std::function<void(const SelfCheck&)>& on_result = {}) {
  using namespace selfdetail;
  std::vector<std::function<SelfCheck()>> checks = {
      [] { return check_rank_coherence(); },
      [] { return check_orthogonality_cauchy(); },
      [] { return check_split_pairing(); },
      [] { return check_web_relations(); },
      [&] { return check_corpus(corpus_dir); },
      [] { return check_foam_degrees(); },
      [] { return check_rho_functoriality(); },
      [] { return check_hom_dimensions(); },
      [] { return check_annular_reduction(); },
  };
  std::vector<SelfCheck> out;
  out.reserve(checks.size());
  for (auto& run : checks) {
    out.push_back(run());
    if (on_result) on_result(out.back());
  }
  return out;
}

}  // namespace foamcalc
