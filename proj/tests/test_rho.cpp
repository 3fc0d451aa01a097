#include <random>

#include "doctest.h"
#include "foamcalc/qcomb.hpp"
#include "foamcalc/rho.hpp"

using namespace foamcalc;
using Kind = Layer::Kind;

namespace {

Layer merge(int slot) { return Layer{Kind::Merge, slot, 0, 0}; }
Layer split(int slot, int a, int b) { return Layer{Kind::Split, slot, a, b}; }

MultiPoly x1(int n) { return schur(Partition{1}, n); }

int ri(std::mt19937& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

bool push_random_gen(std::vector<FoamGen>& gens, BlWeb& cur,
                     std::mt19937& rng) {
  for (int attempt = 0; attempt < 200; ++attempt) {
    int kind = ri(rng, 0, 5);
    int n = cur.num_layers();
    FoamGen g;
    switch (kind) {
      case 0: {
        int h = ri(rng, 0, n);
        const Composition& c = cur.comp_at(h);
        int s = ri(rng, 0, c.length() - 1);
        int th = c[s];
        auto lams = partitions_in_rectangle(th, 2);
        const Partition& lam = lams[ri(rng, 0, (int)lams.size() - 1)];
        if (lam.empty()) continue;
        g = FoamGen::dot(h, s, schur(lam, th));
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

FoamWord random_word(const BlWeb& src, int len, std::mt19937& rng) {
  std::vector<FoamGen> gens;
  BlWeb cur = src;
  for (int i = 0; i < len; ++i) push_random_gen(gens, cur, rng);
  return FoamWord(src, std::move(gens));
}

std::vector<BlWeb> sample_sources() {
  return {
      BlWeb::identity(Composition{1, 1}),
      BlWeb::identity(Composition{2}),
      BlWeb::identity(Composition{2, 1}),
      BlWeb::identity(Composition{3}),
      BlWeb(Composition{2}, {split(0, 1, 1)}),
      BlWeb(Composition{1, 2}, {merge(0), split(0, 1, 2)}),
      BlWeb(Composition{3}, {split(0, 1, 2), split(1, 1, 1)}),
  };
}

// Blocks absent from a map are identically zero, so compare entrywise with
// missing blocks treated as zero matrices.
bool same_map(const BimoduleMap& f, const BimoduleMap& g, int upto) {
  if (f.degree_doubled != g.degree_doubled) return false;
  if (!(f.src.layers() == g.src.layers()) ||
      !(f.tgt.layers() == g.tgt.layers()))
    return false;
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

// Entrywise weighted sum of the chain maps of a foam combination.
std::map<int, Mat> combination_blocks(const FoamCombination& terms, int mmax) {
  std::map<int, Mat> acc;
  for (const auto& [coeff, word] : terms) {
    BimoduleMap f = rho_foam(word, mmax);
    for (const auto& [m, B] : f.blocks) {
      auto it = acc.find(m);
      if (it == acc.end()) it = acc.emplace(m, Mat(B.rows, B.cols)).first;
      for (size_t i = 0; i < B.data.size(); ++i)
        it->second.data[i] += coeff * B.data[i];
    }
  }
  return acc;
}

// Multiplication by a fixed boundary-compatible polynomial, as a chain map.
BimoduleMap mult_map(const BlWeb& w, const MultiPoly& z, HalfInt deg_doubled,
                     int mmax) {
  BimodulePieces src(build_bimodule(w)), tgt(build_bimodule(w));
  return map_from_rule(src, tgt, deg_doubled, mmax,
                       [&z](const std::vector<MultiPoly>& in) {
                         auto out = in;
                         out.back() = z * out.back();
                         return std::vector<std::vector<MultiPoly>>{out};
                       });
}

}  // namespace

TEST_CASE("generator chain maps have the table degree and intertwine") {
  std::mt19937 rng(2024);
  int built = 0;
  for (const auto& src : sample_sources()) {
    for (int trial = 0; trial < 6; ++trial) {
      std::vector<FoamGen> gens;
      BlWeb cur = src;
      if (!push_random_gen(gens, cur, rng)) continue;
      BimoduleMap f = rho_gen(gens[0], src, cur, 3);
      CHECK(f.degree_doubled == gens[0].degree_doubled());
      BimodulePieces P0(build_bimodule(src)), P1(build_bimodule(cur));
      CAPTURE(gens[0].str());
      CHECK(verify_linearity(f, P0, P1));
      ++built;
    }
  }
  CHECK(built >= 30);
}

TEST_CASE("dot generators act as the boundary algebra actions") {
  BlWeb w(Composition{1, 2}, {merge(0), split(0, 1, 2)});
  BimodulePieces P(build_bimodule(w));
  // dot on the bottom boundary: inner (right) action
  {
    FoamGen d = FoamGen::dot(0, 1, x1(2));
    BimoduleMap f = rho_gen(d, w, w, 3);
    MultiPoly g = x1(2).embedded(3, {1, 2});
    for (int m = 0; m + 1 <= 3; ++m)
      CHECK(f.blocks.at(m) == P.action(m, g, false));
  }
  // dot on the top boundary: outer (left) action
  {
    FoamGen d = FoamGen::dot(2, 0, x1(1));
    BimoduleMap f = rho_gen(d, w, w, 3);
    MultiPoly g = x1(1).embedded(3, {0});
    for (int m = 0; m + 1 <= 3; ++m)
      CHECK(f.blocks.at(m) == P.action(m, g, true));
  }
}

TEST_CASE("pinch then open a seam multiplies by the window difference") {
  // zip then unzip across thin strands: multiplication by x0 - x1
  BlWeb idw = BlWeb::identity(Composition{1, 1});
  FoamWord F(idw, {FoamGen::zip(0, 0), FoamGen::unzip(0, 0)});
  CHECK(F.degree_doubled() == 4);
  BimoduleMap f = rho_foam(F, 3);
  MultiPoly z = MultiPoly::variable(2, 0, 1) - MultiPoly::variable(2, 1, 1);
  CHECK(same_map(f, mult_map(idw, z, 4, 3), 3));
}

TEST_CASE("digon with dots collapses to the symmetrizing trace") {
  BlWeb idw = BlWeb::identity(Composition{2});
  auto digon_word = [&](const MultiPoly& P, const MultiPoly& Q) {
    std::vector<FoamGen> gens{FoamGen::digon_birth(0, 0, 1, 1)};
    if (!P.is_zero() && P.degree() > 0) gens.push_back(FoamGen::dot(1, 0, P));
    if (!Q.is_zero() && Q.degree() > 0) gens.push_back(FoamGen::dot(1, 1, Q));
    gens.push_back(FoamGen::digon_death(0, 0));
    return FoamWord(idw, std::move(gens));
  };
  MultiPoly x = x1(1);
  MultiPoly one1 = MultiPoly::one(1);

  // trace of x is 1, of 1 is 0, of x (x) x^2 is -e_2
  CHECK(same_map(rho_foam(digon_word(x, one1), 3),
                 mult_map(idw, MultiPoly::one(2), 0, 3), 3));
  {
    BimoduleMap f = rho_foam(digon_word(one1, one1), 3);
    for (const auto& [m, B] : f.blocks)
      for (const auto& v : B.data) CHECK(v == 0);
  }
  {
    MultiPoly x2 = MultiPoly::variable(1, 0, 2);
    BimoduleMap f = rho_foam(digon_word(x, x2), 3);
    MultiPoly expect = split_pairing(x, x2);
    CHECK(expect == Rational(-1) * schur(Partition{1, 1}, 2));
    CHECK(same_map(f, mult_map(idw, expect, 8, 3), 3));
  }
}

TEST_CASE("word maps: degree coherence, linearity, composition") {
  std::mt19937 rng(77);
  for (const auto& src : sample_sources()) {
    for (int trial = 0; trial < 2; ++trial) {
      FoamWord F = random_word(src, ri(rng, 1, 4), rng);
      CAPTURE(F.str());
      BimoduleMap f = rho_foam(F, 2);
      CHECK(f.degree_doubled == F.degree_doubled());
      BimodulePieces P0(build_bimodule(F.source()));
      BimodulePieces P1(build_bimodule(F.target()));
      CHECK(verify_linearity(f, P0, P1));

      if (F.num_gens() >= 2) {
        int cut = F.num_gens() / 2;
        std::vector<FoamGen> lo(F.gens().begin(), F.gens().begin() + cut);
        std::vector<FoamGen> hi(F.gens().begin() + cut, F.gens().end());
        FoamWord F1(F.source(), std::move(lo));
        FoamWord F2(F.still_at(cut), std::move(hi));
        BimoduleMap g = compose(rho_foam(F2, 4), rho_foam(F1, 4));
        CHECK(same_map(f, g, std::min(f.mmax, g.mmax)));
      }
    }
  }
}

TEST_CASE("seam rewrites preserve the chain map") {
  // dot through a split seam
  {
    BlWeb w(Composition{3}, {split(0, 1, 2)});
    MultiPoly e1 = schur(Partition{1}, 3);
    FoamWord F(w, {FoamGen::dot(0, 0, e1)});
    auto rewritten = dot_migrate(F, 0);
    CHECK(rewritten.size() == 2);
    BimoduleMap f = rho_foam(F, 3);
    auto acc = combination_blocks(rewritten, 3 + 1);
    for (const auto& [m, B] : f.blocks) {
      if (m > 3) continue;
      CHECK(acc.at(m) == B);
    }
  }
  // dotted bubble into a single dot
  {
    BlWeb idw = BlWeb::identity(Composition{2});
    FoamWord F(idw, {FoamGen::digon_birth(0, 0, 1, 1),
                     FoamGen::dot(1, 0, MultiPoly::variable(1, 0, 2)),
                     FoamGen::digon_death(0, 0)});
    auto rewritten = bubble_remove(F, 0);
    BimoduleMap f = rho_foam(F, 3);
    auto acc = combination_blocks(rewritten, 3 + 2);
    for (const auto& [m, B] : f.blocks) {
      if (m > 3) continue;
      CHECK(acc.at(m) == B);
    }
  }
  // pinch-and-open into dotted sheets
  {
    BlWeb idw = BlWeb::identity(Composition{1, 2});
    FoamWord F(idw, {FoamGen::zip(0, 0), FoamGen::unzip(0, 0)});
    auto rewritten = diabolo_remove(F, 0);
    CHECK(rewritten.size() == 3);
    BimoduleMap f = rho_foam(F, 2);
    auto acc = combination_blocks(rewritten, 2 + 2);
    for (const auto& [m, B] : f.blocks) {
      if (m > 2) continue;
      CHECK(acc.at(m) == B);
    }
  }
}

TEST_CASE("bending a boundary layer commutes with the chain adjunction") {
  std::vector<FoamWord> words;
  BlWeb mweb(Composition{1, 1}, {merge(0)});
  BlWeb sweb(Composition{2}, {split(0, 1, 1)});
  BlWeb theta(Composition{1, 1}, {merge(0), split(0, 1, 1)});
  words.emplace_back(mweb, std::vector<FoamGen>{});
  words.emplace_back(mweb,
                     std::vector<FoamGen>{FoamGen::dot(1, 0, x1(2))});
  words.emplace_back(sweb, std::vector<FoamGen>{FoamGen::dot(1, 1, x1(1))});
  words.emplace_back(theta, std::vector<FoamGen>{FoamGen::unzip(0, 0)});
  words.emplace_back(BlWeb::identity(Composition{1, 1}),
                     std::vector<FoamGen>{FoamGen::zip(0, 0)});

  for (const auto& F : words) {
    for (int di = 0; di < 4; ++di) {
      auto bdir = static_cast<BendDirection>(di);
      auto adir = static_cast<AdjDirection>(di);
      bool from_source = di == 0 || di == 2;
      const BlWeb& carrier = from_source ? F.source() : F.target();
      if (carrier.num_layers() == 0) continue;
      CAPTURE(F.str());
      CAPTURE(di);
      FoamWord Fb = bend_transpose(bdir, F);
      BimoduleMap lhs = rho_foam(Fb, 2);
      BimoduleMap rhs = adjunction_transpose(adir, rho_foam(F, 8));
      CHECK(same_map(lhs, rhs, std::min({2, lhs.mmax, rhs.mmax})));
    }
  }
}

TEST_CASE("split-tree words normalize to decorated-web elements") {
  BlWeb sweb(Composition{2}, {split(0, 1, 1)});
  // a dot above the split is the decorated generator itself
  {
    FoamWord E(sweb, {FoamGen::dot(1, 0, x1(1))});
    BimoduleElement got = tree_normalize(E);
    BimoduleElement want(sweb, {{MultiPoly::variable(2, 0, 1)}});
    CHECK(got == want);
    CHECK(got.degree_doubled() == E.degree_doubled() - sweb.shift_doubled());
  }
  // a bubble grown on the tree contributes its two-term seam expansion
  {
    FoamWord E(sweb, {FoamGen::zip(1, 0), FoamGen::unzip(1, 0)});
    BimoduleElement got = tree_normalize(E);
    BimoduleElement want(sweb, {{MultiPoly::variable(2, 0, 1)},
                                {Rational(-1) * MultiPoly::variable(2, 1, 1)}});
    CHECK(got == want);
  }
  // merges in the scaffold are rejected
  {
    BlWeb mweb(Composition{1, 1}, {merge(0)});
    FoamWord E(mweb, {});
    CHECK_THROWS_AS(tree_normalize(E), std::invalid_argument);
  }
}

TEST_CASE("hom dimensions agree across bending and central ranks") {
  // parallel thin strands: End(id) is the polynomial algebra
  {
    auto rep = verify_fully_faithful(BlWeb::identity(Composition{1, 1}),
                                     BlWeb::identity(Composition{1, 1}), 8);
    CHECK(rep.matched);
    CHECK(rep.certified);
    CHECK(rep.hom_dims.at(0) == 1);
    CHECK(rep.hom_dims.at(4) == 2);
    CHECK(rep.hom_dims.at(8) == 3);
    CHECK(rep.hom_dims.count(2) == 0);
  }
  // the merge-split endoweb against itself and against the identity
  {
    BlWeb theta(Composition{1, 1}, {merge(0), split(0, 1, 1)});
    auto rep = verify_fully_faithful(theta, theta, 6);
    CHECK(rep.matched);
    CHECK(rep.certified);
    auto rep2 =
        verify_fully_faithful(BlWeb::identity(Composition{1, 1}), theta, 6);
    CHECK(rep2.matched);
    // one map of doubled degree 2: the pinch
    CHECK(rep2.hom_dims.at(2) == 1);
  }
  // the two split trees of a thickness-3 strand
  {
    BlWeb t0(Composition{3}, {split(0, 1, 2), split(1, 1, 1)});
    BlWeb t1(Composition{3}, {split(0, 2, 1), split(0, 1, 1)});
    auto rep = verify_fully_faithful(t0, t1, 4);
    CHECK(rep.matched);
    CHECK(rep.certified);
    // the trees are isomorphic: a degree-zero hom exists
    CHECK(rep.hom_dims.at(0) >= 1);
  }
  CHECK_THROWS_AS(verify_fully_faithful(BlWeb::identity(Composition{2}),
                                        BlWeb::identity(Composition{1, 1}), 2),
                  std::invalid_argument);
}

TEST_CASE("annular reduction matches the chain map of the closure movie") {
  std::mt19937 rng(5);
  auto check_one = [&](const CappedTraceFoam& G) {
    FoamWord F = closure_word(G);
    CAPTURE(F.str());
    const Composition& c = G.web.target();
    int k = G.web.level();
    // total of the reduced disk decorations as one boundary polynomial
    MultiPoly disks_total(k);
    for (const auto& [coeff, decs] : annular_reduce(G)) {
      MultiPoly prod = coeff * MultiPoly::one(k);
      int off = 0;
      for (int i = 0; i < c.length(); ++i) {
        std::vector<int> slots(c[i]);
        std::iota(slots.begin(), slots.end(), off);
        prod = prod * decs[i].embedded(k, slots);
        off += c[i];
      }
      disks_total += prod;
    }
    // the closure movie is an endomorphism of the identity: multiplication
    // by its value on the empty decoration
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
    CHECK(z == disks_total);
  };

  // undecorated and dotted closures of the merge-split endoweb
  BlWeb theta(Composition{1, 1}, {merge(0), split(0, 1, 1)});
  check_one({theta, {}});
  check_one({theta, {{{0, 0}, x1(1)}}});
  check_one({theta, {{{2, 1}, MultiPoly::variable(1, 0, 2)}}});

  // a split-only endoweb and a thick bubble
  BlWeb vee(Composition{1, 2}, {merge(0), split(0, 2, 1)});
  check_one({vee, {}});
  check_one({vee, {{{1, 0}, schur(Partition{1}, 3)}}});
  BlWeb bub(Composition{3}, {split(0, 1, 2), merge(0)});
  check_one({bub, {}});
  check_one({bub, {{{1, 1}, schur(Partition{1, 1}, 2)}}});

  // random dot decorations on the identity closure
  for (int trial = 0; trial < 4; ++trial) {
    BlWeb idw = BlWeb::identity(Composition{2, 1});
    std::map<std::pair<int, int>, MultiPoly> dots;
    int s = ri(rng, 0, 1);
    int th = idw.target()[s];
    auto lams = partitions_in_rectangle(th, 2);
    const Partition& lam = lams[ri(rng, 1, (int)lams.size() - 1)];
    dots[{0, s}] = schur(lam, th);
    check_one({idw, dots});
  }
}
