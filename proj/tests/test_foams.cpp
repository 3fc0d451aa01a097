#include <random>

#include "doctest.h"
#include "foamcalc/foams.hpp"
#include "foamcalc/qcomb.hpp"

using namespace foamcalc;
using Kind = Layer::Kind;

namespace {

Layer merge(int slot) { return Layer{Kind::Merge, slot, 0, 0}; }
Layer split(int slot, int a, int b) { return Layer{Kind::Split, slot, a, b}; }

MultiPoly x1(int n) { return schur(Partition{1}, n); }

int ri(std::mt19937& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

// Try to extend the word by one random valid move; empty optional-like bool.
bool push_random_gen(std::vector<FoamGen>& gens, BlWeb& cur,
                     std::mt19937& rng) {
  for (int attempt = 0; attempt < 200; ++attempt) {
    int kind = ri(rng, 0, 5);
    int n = cur.num_layers();
    FoamGen g;
    switch (kind) {
      case 0: {  // dot
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
      BlWeb::identity(Composition{1, 1, 1}),
      BlWeb::identity(Composition{3}),
      BlWeb::identity(Composition{2, 2}),
      BlWeb(Composition{2}, {split(0, 1, 1)}),
      BlWeb(Composition{1, 2}, {merge(0), split(0, 1, 2)}),
      BlWeb(Composition{3}, {split(0, 1, 2), split(1, 1, 1)}),
  };
}

// Sort a disk expansion for comparison.
std::map<std::vector<MultiPoly>, Rational> as_map(
    const std::vector<DiskTerm>& v) {
  std::map<std::vector<MultiPoly>, Rational> m;
  for (const auto& [c, d] : v) m[d] += c;
  for (auto it = m.begin(); it != m.end();)
    it = it->second == 0 ? m.erase(it) : std::next(it);
  return m;
}

}  // namespace

TEST_CASE("reference foams match the surface-count degree oracle") {
  // flat sheet
  FoamWord idf(BlWeb::identity(Composition{1, 1}), {});
  CHECK(idf.degree_doubled() == 0);
  CHECK(cw_degree_doubled(idf) == 0);

  // zip on thin strands, degree ab
  FoamWord zf(BlWeb::identity(Composition{1, 1}), {FoamGen::zip(0, 0)});
  CHECK(zf.degree_doubled() == 2);
  CHECK(cw_degree_doubled(zf) == 2);

  // thick zip
  FoamWord zf2(BlWeb::identity(Composition{2, 3}), {FoamGen::zip(0, 0)});
  CHECK(zf2.degree_doubled() == 12);
  CHECK(cw_degree_doubled(zf2) == 12);

  // dotted bubble: birth, dot x on the left leg, death
  FoamWord bub(BlWeb::identity(Composition{2}),
               {FoamGen::digon_birth(0, 0, 1, 1), FoamGen::dot(1, 0, x1(1)),
                FoamGen::digon_death(0, 0)});
  CHECK(bub.degree_doubled() == 0);
  CHECK(cw_degree_doubled(bub) == 0);

  // bare thick bubble, degree -2ab
  FoamWord bub2(BlWeb::identity(Composition{3}),
                {FoamGen::digon_birth(0, 0, 1, 2),
                 FoamGen::digon_death(0, 0)});
  CHECK(bub2.degree_doubled() == -8);
  CHECK(cw_degree_doubled(bub2) == -8);

  // diabolo: zip then unzip, degree 2ab
  FoamWord dia(BlWeb::identity(Composition{1, 1}),
               {FoamGen::zip(0, 0), FoamGen::unzip(0, 0)});
  CHECK(dia.degree_doubled() == 4);
  CHECK(cw_degree_doubled(dia) == 4);

  FoamWord dia2(BlWeb::identity(Composition{1, 2}),
                {FoamGen::zip(0, 0), FoamGen::unzip(0, 0)});
  CHECK(dia2.degree_doubled() == 8);
  CHECK(cw_degree_doubled(dia2) == 8);
}

TEST_CASE("facet and seam multiplicities against colour-pair counts") {
  for (int N = 1; N <= 8; ++N) {
    for (int a = 1; a <= std::min(3, N); ++a) {
      CHECK(facet_copies(a, N) == facet_copies_bruteforce(a, N));
      for (int b = 1; a + b <= N && b <= 3; ++b) {
        CHECK(seam_copies(a, b, N) == seam_copies_bruteforce(a, b, N));
        // each crossing pair glues two sheet ends
        long ends = facet_copies(a, N) + facet_copies(b, N) +
                    facet_copies(a + b, N);
        CHECK(ends == 2 * seam_copies(a, b, N));
      }
    }
  }
}

TEST_CASE("move validation rejects malformed moves") {
  BlWeb w = BlWeb::identity(Composition{2, 1});
  FoamGen bad = FoamGen::dot(0, 0, x1(1));  // wrong variable count
  CHECK_THROWS_AS(apply_foam_gen(w, bad), std::invalid_argument);
  FoamGen asym = FoamGen::dot(0, 0, MultiPoly::variable(2, 0));
  CHECK_THROWS_AS(apply_foam_gen(w, asym), std::invalid_argument);
  FoamGen uz = FoamGen::unzip(0, 0);
  CHECK_THROWS_AS(apply_foam_gen(w, uz), std::invalid_argument);
  FoamGen bb = FoamGen::digon_birth(0, 0, 1, 2);  // 1+2 != 2
  CHECK_THROWS_AS(apply_foam_gen(w, bb), std::invalid_argument);
  FoamGen z = FoamGen::zip(0, 0);
  BlWeb zipped = apply_foam_gen(w, z);
  FoamGen dd = FoamGen::digon_death(0, 0);  // pair is merge-split, not split-merge
  CHECK_THROWS_AS(apply_foam_gen(zipped, dd), std::invalid_argument);
  FoamGen ex = FoamGen::exchange(0);  // layers share the seam strands
  CHECK_THROWS_AS(apply_foam_gen(zipped, ex), std::invalid_argument);
}

TEST_CASE("random movie words: oracle degree equals the generator table") {
  std::mt19937 rng(20240811);
  auto sources = sample_sources();
  for (int trial = 0; trial < 60; ++trial) {
    const BlWeb& src = sources[trial % sources.size()];
    FoamWord F = random_word(src, ri(rng, 1, 7), rng);
    CAPTURE(F.str());
    CHECK(cw_degree_doubled(F) == F.degree_doubled());
  }
}

TEST_CASE("composition of words adds degrees and respects the oracle") {
  std::mt19937 rng(7);
  auto sources = sample_sources();
  for (int trial = 0; trial < 20; ++trial) {
    const BlWeb& src = sources[trial % sources.size()];
    FoamWord F = random_word(src, 6, rng);
    int cut = F.num_gens() / 2;
    FoamWord f(F.source(), {F.gens().begin(), F.gens().begin() + cut});
    FoamWord g(f.target(), {F.gens().begin() + cut, F.gens().end()});
    FoamWord vg = vcompose(g, f);
    CHECK(vg.degree_doubled() == f.degree_doubled() + g.degree_doubled());
    CHECK(cw_degree_doubled(vg) == vg.degree_doubled());

    FoamWord other = random_word(sources[(trial + 3) % sources.size()], 3, rng);
    FoamWord h = hcompose(F, other);
    CHECK(h.degree_doubled() == F.degree_doubled() + other.degree_doubled());
    CHECK(cw_degree_doubled(h) == h.degree_doubled());
    CHECK(h.source().source().length() ==
          F.source().source().length() + other.source().source().length());
  }
}

TEST_CASE("dot migration through a seam") {
  BlWeb w(Composition{2}, {split(0, 1, 1)});

  // e1 splits as x (x) 1 + 1 (x) x
  FoamWord F(w, {FoamGen::dot(0, 0, x1(2))});
  auto terms = dot_migrate(F, 0);
  REQUIRE(terms.size() == 2);
  for (const auto& t : terms) {
    CHECK(t.coeff == 1);
    REQUIRE(t.word.num_gens() == 1);
    CHECK(t.word.gens()[0].height == 1);
    CHECK(t.word.gens()[0].decor == x1(1));
    CHECK(t.word.degree_doubled() == F.degree_doubled());
    CHECK(cw_degree_doubled(t.word) == cw_degree_doubled(F));
  }
  CHECK(terms[0].word.gens()[0].slot != terms[1].word.gens()[0].slot);

  // e2 migrates to a dot on each thin strand
  FoamWord G(w, {FoamGen::dot(0, 0, schur(Partition{1, 1}, 2))});
  auto t2 = dot_migrate(G, 0);
  REQUIRE(t2.size() == 1);
  CHECK(t2[0].coeff == 1);
  CHECK(t2[0].word.num_gens() == 2);

  // p2 = s_(2) - s_(1,1): migrated sum evaluates like p2 under x -> (u, v)
  FoamWord H(w, {FoamGen::dot(0, 0, power_sum(2, 2))});
  auto t3 = dot_migrate(H, 0);
  MultiPoly sum(2);
  for (const auto& t : t3) {
    MultiPoly prod = MultiPoly::one(2);
    for (const auto& g : t.word.gens())
      prod = prod * g.decor.embedded(2, {g.slot});
    sum += t.coeff * prod;
  }
  CHECK(sum == power_sum(2, 2));

  // migration also works upward through a merge
  BlWeb mw(Composition{1, 1}, {merge(0)});
  FoamWord M(mw, {FoamGen::dot(1, 0, x1(2))});
  auto t4 = dot_migrate(M, 0);
  REQUIRE(t4.size() == 2);
  for (const auto& t : t4) CHECK(t.word.gens()[0].height == 0);
}

TEST_CASE("bubble removal") {
  BlWeb w = BlWeb::identity(Composition{2});

  // one dot of degree 1: the bubble traces to the empty foam
  FoamWord F(w, {FoamGen::digon_birth(0, 0, 1, 1), FoamGen::dot(1, 0, x1(1)),
                 FoamGen::digon_death(0, 0)});
  auto r = bubble_remove(F, 0);
  REQUIRE(r.size() == 1);
  CHECK(r[0].coeff == 1);
  CHECK(r[0].word.num_gens() == 0);
  CHECK(r[0].word.degree_doubled() == F.degree_doubled());

  // bare bubble vanishes
  FoamWord Z(w, {FoamGen::digon_birth(0, 0, 1, 1), FoamGen::digon_death(0, 0)});
  CHECK(bubble_remove(Z, 0).empty());

  // degree-2 dot leaves an e1 dot on the thick strand
  FoamWord G(w, {FoamGen::digon_birth(0, 0, 1, 1),
                 FoamGen::dot(1, 0, power_sum(1, 2)),
                 FoamGen::digon_death(0, 0)});
  auto r2 = bubble_remove(G, 0);
  REQUIRE(r2.size() == 1);
  REQUIRE(r2[0].word.num_gens() == 1);
  CHECK(r2[0].word.gens()[0].decor == x1(2));
  CHECK(r2[0].word.degree_doubled() == G.degree_doubled());

  // dots on both legs: x (x) x is symmetric, the pairing kills it
  FoamWord H(w, {FoamGen::digon_birth(0, 0, 1, 1), FoamGen::dot(1, 0, x1(1)),
                 FoamGen::dot(1, 1, x1(1)), FoamGen::digon_death(0, 0)});
  CHECK(bubble_remove(H, 0).empty());
  // odd pairing: d(x (x) x^2) = -e2
  CHECK(split_pairing(x1(1), power_sum(1, 2)) ==
        Rational(-1) * schur(Partition{1, 1}, 2));
}

TEST_CASE("diabolo removal") {
  FoamWord dia(BlWeb::identity(Composition{1, 1}),
               {FoamGen::zip(0, 0), FoamGen::unzip(0, 0)});
  auto r = diabolo_remove(dia, 0);
  REQUIRE(r.size() == 2);
  Rational total = 0;
  for (const auto& t : r) {
    CHECK(t.word.num_gens() == 1);
    CHECK(t.word.degree_doubled() == dia.degree_doubled());
    CHECK(cw_degree_doubled(t.word) == cw_degree_doubled(dia));
    total += t.coeff;
  }
  CHECK(total == 0);  // +x1 dot and -x2 dot

  FoamWord dia2(BlWeb::identity(Composition{1, 2}),
                {FoamGen::zip(0, 0), FoamGen::unzip(0, 0)});
  auto r2 = diabolo_remove(dia2, 0);
  CHECK(static_cast<long>(r2.size()) == binomial(3, 1));
  for (const auto& t : r2)
    CHECK(t.word.degree_doubled() == dia2.degree_doubled());
}

TEST_CASE("annular reduction: base cases") {
  // no vertices: the dots survive on their disks
  CappedTraceFoam base{BlWeb::identity(Composition{1, 2}), {}};
  base.dots[{0, 1}] = x1(2);
  auto r = annular_reduce(base);
  REQUIRE(r.size() == 1);
  CHECK(r[0].first == 1);
  CHECK(r[0].second[0] == MultiPoly::one(1));
  CHECK(r[0].second[1] == x1(2));

  // capped merge with one dotted leg: a bubble, traces to the plain disk
  CappedTraceFoam bub{BlWeb(Composition{1, 1}, {merge(0)}), {}};
  bub.dots[{0, 0}] = x1(1);
  auto rb = annular_reduce(bub);
  REQUIRE(rb.size() == 1);
  CHECK(rb[0].first == 1);
  CHECK(rb[0].second[0] == MultiPoly::one(2));

  // bare capped merge vanishes
  CappedTraceFoam zb{BlWeb(Composition{1, 1}, {merge(0)}), {}};
  CHECK(annular_reduce(zb).empty());

  // capped split spreads complementary dots with signs
  CappedTraceFoam sp{BlWeb(Composition{2}, {split(0, 1, 1)}), {}};
  auto rs = as_map(annular_reduce(sp));
  REQUIRE(rs.size() == 2);
  std::vector<MultiPoly> left = {x1(1), MultiPoly::one(1)};
  std::vector<MultiPoly> right = {MultiPoly::one(1), x1(1)};
  CHECK(rs.at(left) == 1);
  CHECK(rs.at(right) == -1);
}

TEST_CASE("annular reduction: layer order of distant vertices is irrelevant") {
  std::mt19937 rng(99);
  // two merges on disjoint strands, both orders, with random dots
  for (int trial = 0; trial < 6; ++trial) {
    std::map<std::pair<int, int>, MultiPoly> dots;
    for (int s = 0; s < 4; ++s)
      if (ri(rng, 0, 1)) dots[{0, s}] = power_sum(1, ri(rng, 1, 2));
    CappedTraceFoam A{BlWeb(Composition{1, 1, 1, 1}, {merge(0), merge(1)}),
                      dots};
    CappedTraceFoam B{BlWeb(Composition{1, 1, 1, 1}, {merge(2), merge(0)}),
                      dots};
    CHECK(as_map(annular_reduce(A)) == as_map(annular_reduce(B)));
  }
  // a split and a distant merge commute as well
  std::map<std::pair<int, int>, MultiPoly> d2;
  d2[{0, 0}] = power_sum(2, 1);
  d2[{0, 1}] = power_sum(1, 2);
  CappedTraceFoam A{BlWeb(Composition{2, 1, 1}, {split(0, 1, 1), merge(2)}),
                    d2};
  CappedTraceFoam B{BlWeb(Composition{2, 1, 1}, {merge(1), split(0, 1, 1)}),
                    d2};
  CHECK(as_map(annular_reduce(A)) == as_map(annular_reduce(B)));
}

TEST_CASE("annular reduction: theta web and degree bookkeeping") {
  // bare theta is a bubble under the cap: zero
  CappedTraceFoam th{BlWeb(Composition{1, 1}, {merge(0), split(0, 1, 1)}),
                     {}};
  CHECK(annular_reduce(th).empty());

  // dot on one outer strand: reduces to x (x) 1 - 1 (x) x
  CappedTraceFoam th2{BlWeb(Composition{1, 1}, {merge(0), split(0, 1, 1)}),
                      {}};
  th2.dots[{0, 0}] = x1(1);
  auto r = as_map(annular_reduce(th2));
  REQUIRE(r.size() == 2);
  CHECK(r.at({x1(1), MultiPoly::one(1)}) == 1);
  CHECK(r.at({MultiPoly::one(1), x1(1)}) == -1);

  // every surviving disk keeps the closed foam's total degree
  std::vector<CappedTraceFoam> samples = {
      th2,
      {BlWeb(Composition{1, 2}, {merge(0), split(0, 1, 2)}),
       {{{1, 0}, power_sum(3, 2)}}},
      {BlWeb(Composition{3}, {split(0, 1, 2), split(1, 1, 1)}),
       {{{0, 0}, power_sum(3, 1)}}},
      {BlWeb(Composition{2, 2}, {merge(0), split(0, 2, 2)}),
       {{{1, 0}, power_sum(4, 2)}}},
  };
  for (const auto& G : samples) {
    FoamWord closed = closure_word(G);
    CHECK(closed.source().source() == G.web.target());
    CHECK(closed.target().source() == G.web.target());
    CHECK(closed.source().num_layers() == 0);
    CHECK(closed.target().num_layers() == 0);
    CHECK(cw_degree_doubled(closed) == closed.degree_doubled());
    for (const auto& [c, d] : annular_reduce(G)) {
      long deg = 0;
      for (const auto& p : d) deg += 4L * std::max(0, p.degree());
      CHECK(deg == closed.degree_doubled());
    }
  }
}
