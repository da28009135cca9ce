#include <doctest.h>

#include <cmath>
#include <random>

#include "errors.hpp"
#include "maps.hpp"

using namespace ergclt;
using doctest::Approx;

TEST_CASE("tent map values") {
  const auto t2 = tent_map(2.0);
  CHECK(t2(0.0) == 1.0);
  CHECK(t2(-1.0) == -1.0);
  CHECK(t2(1.0) == -1.0);
  const auto t15 = tent_map(1.5);
  CHECK(t15(0.2) == Approx(0.2).epsilon(1e-15));
  CHECK(tent_fixed_point(1.5) == Approx(0.2));

  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (double a : {1.05, 1.2, 1.3, 1.5, 1.9, 2.0}) {
    const auto t = tent_map(a);
    for (int k = 0; k < 200; ++k) {
      const double x = u(gen);
      CHECK(std::fabs(t(x) - (a - 1.0 - a * std::fabs(x))) <= 1e-14);
    }
    const double xs = tent_fixed_point(a);
    CHECK(std::fabs(t(xs) - xs) <= 1e-12);
  }
}

TEST_CASE("tent parameter validation") {
  CHECK_THROWS_AS(tent_map(2.5), DomainError);
  CHECK_THROWS_AS(tent_map(1.0), DomainError);
  CHECK_THROWS_AS(tent_map(1.0 + 1e-8), DomainError);
  CHECK_THROWS_AS(period_of(0.5), DomainError);
  CHECK_THROWS_AS(period_of(2.0001), DomainError);
}

TEST_CASE("three-branch map") {
  const auto t = three_branch_example();
  CHECK(t(0.125) == 0.25);
  CHECK(t(0.5) == 0.5);
  CHECK(t(1.0) == 1.0);
  // the halves are invariant
  for (int k = 0; k <= 64; ++k) {
    const double y = k / 64.0;
    if (y < 0.5) CHECK(t(y) <= 0.5);
    if (y > 0.5) CHECK(t(y) >= 0.5);
  }
}

TEST_CASE("evaluate and iterate") {
  const auto o = tent_map(2.0).iterate(0.0, 2);
  REQUIRE(o.size() == 3);
  CHECK(o[0] == 0.0);
  CHECK(o[1] == 1.0);
  CHECK(o[2] == -1.0);

  const auto p = three_branch_example().iterate(0.125, 2);
  CHECK(p[1] == 0.25);
  CHECK(p[2] == 0.0);

  const auto q = tent_map(1.5).iterate(0.2, 3);
  REQUIRE(q.size() == 4);
  for (double v : q) CHECK(v == Approx(0.2).epsilon(1e-14));

  CHECK_THROWS_AS(tent_map(2.0).evaluate(1.5), DomainError);
  CHECK_THROWS_AS(three_branch_example().iterate(-0.1, 3), DomainError);
}

TEST_CASE("period windows") {
  CHECK(period_of(2.0) == 1);
  CHECK(period_of(1.5) == 1);
  CHECK(period_of(1.3) == 2);
  CHECK(period_of(1.25) == 2);
  CHECK(period_of(1.1) == 4);
  CHECK(period_of(1.06) == 8);
  // closed on the right: a = 2^{1/2^m} belongs to window m
  CHECK(period_of(std::sqrt(2.0)) == 2);
  CHECK(period_of(std::pow(2.0, 0.25)) == 4);
  CHECK(period_of(std::nextafter(std::sqrt(2.0), 2.0)) == 1);
  CHECK(tent_square(std::sqrt(2.0)) == 2.0);
  CHECK(tent_window_top(1.1) == Approx(std::pow(1.1, 4)));
}

TEST_CASE("conjugacies") {
  CHECK_THROWS_AS(conjugacy(1.5, 0), DomainError);
  const double a = 1.3;
  const double xs = tent_fixed_point(a);
  CHECK(conjugacy(a, 1).inverse(1.0) == Approx(-0.3 / 2.3).epsilon(1e-14));
  // formulas from the definition, written out here
  CHECK(conjugacy(a, 1).forward(0.05) == Approx(-0.05 / xs));
  CHECK(conjugacy(a, 0).forward(0.05) == Approx(a / xs * 0.05 - a - 1.0));

  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (double b : {1.05, 1.1, 1.2, 1.3, 1.41}) {
    const auto ta = tent_map(b);
    const auto tb = tent_map(b * b);
    for (int i : {0, 1}) {
      const Conjugacy c = conjugacy(b, i);
      double worst = 0.0, worst_inv = 0.0;
      for (int k = 0; k < 1000; ++k) {
        const double x = u(gen);
        worst_inv = std::max(worst_inv, std::fabs(c.forward(c.inverse(x)) - x));
        const double lhs = tb(x);
        const double rhs = c.forward(ta(ta(c.inverse(x))));
        worst = std::max(worst, std::fabs(lhs - rhs));
      }
      CHECK(worst_inv <= 1e-12);
      CHECK(worst <= 1e-10);
    }
  }
}

TEST_CASE("support cycles") {
  const SupportCycle c2 = support_cycle(2.0);
  REQUIRE(c2.intervals.size() == 1);
  CHECK(c2.intervals[0].lo == Approx(-1.0));
  CHECK(c2.intervals[0].hi == Approx(1.0));

  for (double a : {2.0, 1.5, 1.3, 1.25, 1.1, 1.06}) {
    const SupportCycle c = support_cycle(a);
    CHECK(c.period == period_of(a));
    CHECK(static_cast<int>(c.intervals.size()) == c.period);
    CHECK(c.binary_index.at(0) == 1);
    // images of endpoints by direct iteration
    const auto t = tent_map(a);
    const std::size_t r = c.intervals.size();
    for (std::size_t j = 0; j < r; ++j) {
      const Interval img = t.image(c.intervals[j]);
      const Interval& next = c.intervals[(j + 1) % r];
      CHECK(std::fabs(img.lo - next.lo) <= 1e-10);
      CHECK(std::fabs(img.hi - next.hi) <= 1e-10);
    }
    for (std::size_t i = 0; i < r; ++i) {
      for (std::size_t j = i + 1; j < r; ++j) {
        const Interval &x = c.intervals[i], &y = c.intervals[j];
        CHECK((x.hi <= y.lo || y.hi <= x.lo));
      }
    }
    // every cycle interval lies in the core
    const Interval A = tent_core_interval(a);
    for (const auto& iv : c.intervals) {
      CHECK(iv.lo >= A.lo - 1e-12);
      CHECK(iv.hi <= A.hi + 1e-12);
    }
  }
}

TEST_CASE("core interval and core map") {
  const double a = 1.3;
  const Interval A = tent_core_interval(a);
  CHECK(A.hi == Approx(a - 1.0));
  CHECK(A.lo == Approx(a - 1.0 - a * (a - 1.0)));
  const auto core = tent_core_map(a);
  CHECK(core.domain().lo == Approx(A.lo));
  const auto full = tent_map(a);
  for (double x = A.lo; x <= A.hi; x += A.length() / 37) CHECK(core(x) == Approx(full(x)));
}

TEST_CASE("map construction errors") {
  CHECK_THROWS_AS(Interval(1.0, 0.0), DomainError);
  CHECK_THROWS_AS(PiecewiseLinearMap(Interval(0, 1), {}), DomainError);
  CHECK_THROWS_AS(PiecewiseLinearMap(Interval(0, 1), {{Interval(0, 1), 2.0, 0.0}}), DomainError);
}
