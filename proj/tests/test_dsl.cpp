#include <random>

#include "doctest.h"
#include "foamcalc/dsl.hpp"
#include "foamcalc/foams.hpp"
#include "foamcalc/webs.hpp"

using namespace foamcalc;

namespace {

int ri(std::mt19937& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

bool push_random_gen(std::vector<FoamGen>& gens, BlWeb& cur,
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

}  // namespace

TEST_CASE("web text round-trips through the printer") {
  std::mt19937 rng(7);
  std::vector<BlWeb> webs = {
      BlWeb::identity(Composition{2, 1}),
      BlWeb(Composition{3}, {Layer{Layer::Kind::Split, 0, 1, 2},
                             Layer{Layer::Kind::Merge, 0, 0, 0}}),
      BlWeb(Composition{1, 2}, {Layer{Layer::Kind::Merge, 0, 0, 0},
                                Layer{Layer::Kind::Split, 0, 1, 2}}),
  };
  // random flow-valid words as well
  for (int t = 0; t < 20; ++t) {
    Composition src({ri(rng, 1, 3), ri(rng, 1, 2)});
    BlWeb cur = BlWeb::identity(src);
    std::vector<Layer> layers;
    for (int step = 0; step < 4; ++step) {
      const Composition& c = cur.target();
      for (int attempt = 0; attempt < 20; ++attempt) {
        Layer l{};
        if (ri(rng, 0, 1) == 0 && c.length() >= 2) {
          l = Layer{Layer::Kind::Merge, ri(rng, 0, c.length() - 2), 0, 0};
        } else {
          int s = ri(rng, 0, c.length() - 1);
          if (c[s] < 2) continue;
          int a = ri(rng, 1, c[s] - 1);
          l = Layer{Layer::Kind::Split, s, a, c[s] - a};
        }
        layers.push_back(l);
        cur = BlWeb(src, layers);
        break;
      }
    }
    webs.push_back(cur);
  }
  for (const auto& w : webs) {
    BlWeb back = parse_web(w.str());
    CHECK(back.source() == w.source());
    CHECK(back.layers() == w.layers());
  }
}

TEST_CASE("foam text round-trips through the printer") {
  std::mt19937 rng(17);
  std::vector<BlWeb> sources = {
      BlWeb::identity(Composition{1, 1}),
      BlWeb::identity(Composition{3}),
      BlWeb(Composition{2}, {Layer{Layer::Kind::Split, 0, 1, 1}}),
  };
  for (int t = 0; t < 30; ++t) {
    BlWeb cur = sources[t % sources.size()];
    BlWeb src = cur;
    std::vector<FoamGen> gens;
    for (int i = 0; i < 4; ++i) push_random_gen(gens, cur, rng);
    FoamWord F(src, gens);
    FoamWord back = parse_foam(F.str());
    CHECK(back.source().str() == F.source().str());
    REQUIRE(back.num_gens() == F.num_gens());
    for (int i = 0; i < F.num_gens(); ++i)
      CHECK(back.gens()[i].str() == F.gens()[i].str());
    // decorations survive as polynomials, not just as printed names
    for (int i = 0; i < F.num_gens(); ++i)
      if (F.gens()[i].kind == FoamKind::Dot)
        CHECK(back.gens()[i].decor == F.gens()[i].decor);
  }
}

TEST_CASE("the documented inline shapes parse") {
  BlWeb w = parse_web("web k=3 source=(3)\nsplit 1 (1,2)\nmerge 1\n");
  CHECK(w.num_layers() == 2);
  CHECK(w.target().str() == "(3)");

  FoamWord F = parse_foam(
      "foam on web k=2 source=(1,1) ; zip 0 (1,1) ; dot 1,1 e1 ; "
      "unzip 0 (1,1)");
  CHECK(F.num_gens() == 3);
  CHECK(F.degree_doubled() == 2 + 4 + 2);

  CappedTraceFoam G = parse_trace(
      "trace on web k=3 source=(1,2)\ndot 0,2 e1^2 - 2*e2\ndot 0,1 e1");
  CHECK(G.dots.size() == 2);
  // e1, e2 are the block's elementary polynomials
  CHECK(G.dots.at({0, 1}) ==
        Rational(-2) * schur(Partition{std::vector<int>{1, 1}}, 2) +
            schur(Partition{std::vector<int>{1}}, 2) *
                schur(Partition{std::vector<int>{1}}, 2));
}

TEST_CASE("file references resolve through the loader") {
  FileLoader loader = [](const std::string& path) -> std::string {
    if (path == "theta.web")
      return "web k=2 source=(1,1)\nmerge 1\nsplit 1 (1,1)\n";
    throw std::runtime_error("no such file");
  };
  FoamWord F = parse_foam("foam on theta.web\ndot 1,1 e1\n", loader);
  CHECK(F.source().num_layers() == 2);
  CHECK_THROWS_AS(parse_foam("foam on missing.web\n", loader), ParseError);
  CHECK_THROWS_AS(parse_foam("foam on theta.web\n"), ParseError);
}

TEST_CASE("parse errors carry the offending location") {
  try {
    parse_web("web k=2 source=(1,1)\nsplat 1 (1,1)\n");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line == 2);
    CHECK(e.col == 1);
  }
  try {
    parse_web("web k=3 source=(1,1)\n");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line == 1);
  }
  try {
    parse_foam("foam on web k=2 source=(2) ; dot 0,1 e1 + q\n");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line == 1);
  }
  // flow violations surface at the offending layer
  try {
    parse_web("web k=2 source=(1,1)\nmerge 1\nmerge 1\n");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line == 3);
  }
  // thickness annotations are checked against the web
  CHECK_THROWS_AS(
      parse_foam("foam on web k=2 source=(1,1) ; zip 0 (2,1)"), ParseError);
}

TEST_CASE("classification dispatches on the first keyword") {
  CHECK(classify_dsl("web k=1 source=(1)") == DslKind::Web);
  CHECK(classify_dsl("# comment\nfoam on x.web") == DslKind::Foam);
  CHECK(classify_dsl("trace on x.web") == DslKind::Trace);
  CHECK_THROWS_AS(classify_dsl("frobnicate"), ParseError);
  CHECK_THROWS_AS(classify_dsl("  \n# only comments\n"), ParseError);
}
