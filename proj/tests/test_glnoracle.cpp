#include "doctest.h"
#include "foamcalc/glnoracle.hpp"
#include "foamcalc/qcomb.hpp"

using namespace foamcalc;
using Kind = Layer::Kind;

namespace {
Layer merge(int slot) { return Layer{Kind::Merge, slot, 0, 0}; }
Layer split(int slot, int a, int b) { return Layer{Kind::Split, slot, a, b}; }
}  // namespace

TEST_CASE("identity webs map to identity matrices") {
  for (int N = 2; N <= 4; ++N) {
    WedgeSpace sp(Composition{2, 1}, N);
    CHECK(sp.dim() == binomial(N, 2) * N);
    CHECK(web_to_map(BlWeb::identity(Composition{2, 1}), N) ==
          Mat::eye(sp.dim()));
  }
  CHECK_THROWS(WedgeSpace(Composition{3}, 2));
}

TEST_CASE("merge after split multiplies by a binomial") {
  // on Lambda^2 with N=2 the composite is multiplication by 2
  BlWeb digon(Composition{2}, {split(0, 1, 1), merge(0)});
  Mat m = web_to_map(digon, 2);
  CHECK(m.rows == 1);
  CHECK(m.at(0, 0) == 2);

  for (int a = 1; a <= 2; ++a)
    for (int b = 1; b <= 2; ++b)
      for (int N = a + b; N <= a + b + 2; ++N) {
        BlWeb w(Composition{a + b}, {split(0, a, b), merge(0)});
        Mat got = web_to_map(w, N);
        Mat want = Mat::eye(got.rows);
        for (auto& v : want.data) v *= binomial(a + b, a);
        CHECK(got == want);
      }
}

TEST_CASE("split after merge on two single strands, N=3") {
  BlWeb w(Composition{1, 1}, {merge(0), split(0, 1, 1)});
  Mat m = web_to_map(w, 3);
  CHECK(m.rows == 9);
  CHECK(m.trace() == 6);  // 2 * C(3,2)
  // idempotent up to the digon factor: m*m = 2*m
  Mat mm = m * m;
  Mat twice = m;
  for (auto& v : twice.data) v *= 2;
  CHECK(mm == twice);
}

TEST_CASE("functoriality under composition") {
  BlWeb f(Composition{2, 1}, {merge(0), split(0, 1, 2)});
  BlWeb g(Composition{1, 2}, {merge(0), split(0, 2, 1)});
  for (int N = 3; N <= 4; ++N)
    CHECK(web_to_map(compose(g, f), N) == web_to_map(g, N) * web_to_map(f, N));
}

TEST_CASE("merge associativity at q=1") {
  BlWeb left(Composition{1, 1, 1}, {merge(0), merge(0)});
  BlWeb right(Composition{1, 1, 1}, {merge(1), merge(0)});
  for (int N = 3; N <= 4; ++N)
    CHECK(web_to_map(left, N) == web_to_map(right, N));
  CHECK(web_to_map(left.dagger(), 3) == web_to_map(right.dagger(), 3));
}

TEST_CASE("annular traces") {
  for (int N = 2; N <= 4; ++N) {
    AnnularWeb circles(BlWeb::identity(Composition{2, 1}));
    CHECK(annular_trace(circles, N) == binomial(N, 2) * binomial(N, 1));
  }
  AnnularWeb digon(BlWeb(Composition{2}, {split(0, 1, 1), merge(0)}));
  CHECK(annular_trace(digon, 3) == 6);

  // rotation invariance
  for (AnnularWeb w :
       {AnnularWeb(BlWeb(Composition{2}, {split(0, 1, 1), merge(0)})),
        AnnularWeb(BlWeb(Composition{1, 1},
                         {merge(0), split(0, 1, 1), merge(0), split(0, 1, 1)})),
        AnnularWeb(BlWeb(Composition{2, 1},
                         {merge(0), split(0, 1, 2), merge(0), split(0, 2, 1)}))}) {
    int thick = 0;
    for (int h = 0; h <= w.num_vertices(); ++h)
      for (int p : w.word().comp_at(h).parts()) thick = std::max(thick, p);
    for (int N = thick; N <= thick + 3; ++N) {
      Rational t = annular_trace(w, N);
      for (const auto& r : w.rotations()) CHECK(annular_trace(r, N) == t);
    }
  }
}
