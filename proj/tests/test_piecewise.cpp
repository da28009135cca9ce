#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "errors.hpp"
#include "maps.hpp"
#include "piecewise.hpp"

using namespace ergclt;
using doctest::Approx;

namespace {

// Three-point Gauss-Legendre on each cell of the merged breakpoint set,
// exact for the polynomial pieces (degree <= 3) integrated here.
template <typename F>
double gauss_integral(F&& f, std::vector<double> cuts, double lo, double hi) {
  cuts.push_back(lo);
  cuts.push_back(hi);
  std::sort(cuts.begin(), cuts.end());
  const double node = std::sqrt(0.6);
  double s = 0.0;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    const double a = std::max(lo, cuts[k]), b = std::min(hi, cuts[k + 1]);
    if (!(b > a)) continue;
    const double m = 0.5 * (a + b), r = 0.5 * (b - a);
    s += r * (5.0 * f(m - r * node) + 8.0 * f(m) + 5.0 * f(m + r * node)) / 9.0;
  }
  return s;
}

std::vector<double> cuts_of(std::initializer_list<const PAF*> fs) {
  std::vector<double> c;
  for (const PAF* f : fs) c.insert(c.end(), f->breakpoints().begin(), f->breakpoints().end());
  return c;
}

PAF random_paf(std::mt19937_64& gen, const Interval& dom, int pieces) {
  std::uniform_real_distribution<double> u(dom.lo, dom.hi), v(-2.0, 2.0);
  std::vector<double> bp{dom.lo, dom.hi};
  for (int k = 1; k < pieces; ++k) bp.push_back(u(gen));
  std::sort(bp.begin(), bp.end());
  std::vector<AffinePiece> p;
  for (int k = 0; k < pieces; ++k) p.push_back({v(gen), v(gen)});
  return PAF(bp, p);
}

}  // namespace

TEST_CASE("construction and evaluation") {
  const PAF f = PAF::step({0.0, 0.25, 0.5, 0.75, 1.0}, std::vector<double>{1, -1, -2, 2});
  CHECK(f(0.1) == 1.0);
  CHECK(f(0.25) == -1.0);  // half-open pieces
  CHECK(f(1.0) == 2.0);    // last piece closed
  CHECK(f(1.5) == 0.0);    // zero outside the domain
  CHECK(f.is_step());
  CHECK(!f.is_zero());
  CHECK(f.integral() == Approx(0.0));
  CHECK(f.sup_abs() == 2.0);
  CHECK(f.min_value() == -2.0);
  CHECK_THROWS_AS(PAF({0.0, 0.0, 1.0}, {AffinePiece{}, AffinePiece{}}), DomainError);
  CHECK_THROWS_AS(PAF({0.0, 1.0}, {AffinePiece{}, AffinePiece{}}), DomainError);
}

TEST_CASE("integrals match independent Gauss quadrature") {
  std::mt19937_64 gen(3);
  const Interval dom(-1.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    const PAF f = random_paf(gen, dom, 7);
    const PAF g = random_paf(gen, dom, 5);
    const PAF w = random_paf(gen, dom, 4);
    const auto c1 = cuts_of({&f});
    const auto c2 = cuts_of({&f, &w});
    const auto c3 = cuts_of({&f, &g, &w});
    CHECK(f.integral() == Approx(gauss_integral(f, c1, -1, 1)).epsilon(1e-12));
    CHECK(f.integral(Interval(-0.3, 0.45)) ==
          Approx(gauss_integral(f, c1, -0.3, 0.45)).epsilon(1e-12));
    CHECK(integrate_weighted(f, w) ==
          Approx(gauss_integral([&](double x) { return f(x) * w(x); }, c2, -1, 1)).epsilon(1e-12));
    CHECK(integrate_product(f, g, w) ==
          Approx(gauss_integral([&](double x) { return f(x) * g(x) * w(x); }, c3, -1, 1))
              .epsilon(1e-12));
    // |f| has extra kinks at the zeros of f; add them as cuts
    auto c4 = c2;
    for (std::size_t k = 0; k < f.size(); ++k) {
      const auto& p = f.pieces()[k];
      if (p.slope != 0.0) c4.push_back(-p.intercept / p.slope);
    }
    std::erase_if(c4, [](double x) { return x < -1.0 || x > 1.0; });
    CHECK(integrate_abs(f, w) ==
          Approx(gauss_integral([&](double x) { return std::fabs(f(x)) * w(x); }, c4, -1, 1))
              .epsilon(1e-12));
  }
}

TEST_CASE("arithmetic is pointwise") {
  std::mt19937_64 gen(5);
  const Interval dom(0.0, 1.0);
  const PAF f = random_paf(gen, dom, 6), g = random_paf(gen, dom, 9);
  const PAF s = PAF::step({0.0, 0.3, 0.6, 1.0}, std::vector<double>{2.0, 0.0, -1.0});
  for (double x = 0.001; x < 1.0; x += 0.013) {
    CHECK((f + g)(x) == Approx(f(x) + g(x)));
    CHECK((f - g)(x) == Approx(f(x) - g(x)));
    CHECK((3.0 * f)(x) == Approx(3.0 * f(x)));
    CHECK(f.plus_constant(0.5)(x) == Approx(f(x) + 0.5));
    CHECK(multiply_step(f, s)(x) == Approx(f(x) * s(x)));
    CHECK(f.restricted(Interval(0.2, 0.7))(x) == Approx(x >= 0.2 && x < 0.7 ? f(x) : 0.0));
  }
  std::size_t masked = 0;
  const PAF q = divide_step(f, s, 1e-12, &masked);
  CHECK(masked >= 1);  // the zero step, and the negative one below the floor
  CHECK(q(0.1) == Approx(f(0.1) / 2.0));
  CHECK(q(0.45) == 0.0);
  CHECK_THROWS_AS(f + PAF::constant(Interval(0.0, 2.0), 1.0), DomainError);
}

TEST_CASE("simplify keeps values and merges collinear pieces") {
  const PAF f({0.0, 0.5, 1.0}, {AffinePiece{1.0, 0.0}, AffinePiece{1.0, 0.0}});
  const PAF s = f.simplified();
  CHECK(s.size() == 1);
  CHECK(s(0.7) == Approx(0.7));
}

TEST_CASE("projection preserves cell integrals") {
  std::mt19937_64 gen(9);
  const PAF f = random_paf(gen, Interval(0.0, 1.0), 40);
  const PAF p = f.projected(8);
  CHECK(p.size() <= 8);
  for (int k = 0; k < 8; ++k) {
    const Interval c(k / 8.0, (k + 1) / 8.0);
    CHECK(p.integral(c) == Approx(f.integral(c)).epsilon(1e-12));
  }
}

TEST_CASE("composition with maps and affine pull-backs") {
  std::mt19937_64 gen(13);
  const auto t = tent_map(1.7);
  const PAF f = random_paf(gen, Interval(-1.0, 1.0), 5);
  const PAF fc = compose(f, t);
  for (double x = -0.999; x < 1.0; x += 0.0173) CHECK(fc(x) == Approx(f(t(x))).epsilon(1e-12));

  const AffineMap psi{0.5, 0.25};  // [0,1] -> [0.25,0.75]
  const PAF g = random_paf(gen, Interval(0.0, 1.0), 4);
  const PAF pb = pull_back(g, AffineMap{2.0, -0.5}, Interval(0.25, 0.75), Interval(0.0, 1.0), 3.0);
  for (double y = 0.01; y < 1.0; y += 0.031) {
    const double want = (y >= 0.25 && y < 0.75) ? 3.0 * g(2.0 * y - 0.5) : 0.0;
    CHECK(pb(y) == Approx(want).epsilon(1e-12));
  }
  CHECK(psi.inverse()(0.5) == Approx(0.5));
}
