#include <doctest.h>

#include <cmath>

#include "clt.hpp"
#include "errors.hpp"
#include "oracles.hpp"
#include "transfer.hpp"

using namespace ergclt;
using doctest::Approx;

namespace {

const Interval kUnit(0.0, 1.0);

PAF four_step_h() {
  return PAF::step({0.0, 0.25, 0.5, 0.75, 1.0}, std::vector<double>{1.0, -1.0, -2.0, 2.0});
}

}  // namespace

TEST_CASE("tent means") {
  CHECK(mean_ma(2.0) == 0.0);
  const double r2 = std::sqrt(2.0);
  CHECK(mean_ma(r2) == Approx((r2 - 1.0) / (2.0 * r2)).epsilon(1e-9));
  for (double a : {1.7, 1.5, 1.3, 1.2}) {
    const double want = oracle::first_moment(oracle::kneading_density(a));
    CHECK(std::fabs(mean_ma(a, 4096) - want) <= 1e-3);
  }
  CHECK(mean_of_density(oracle::kneading_density(1.8)) ==
        Approx(oracle::first_moment(oracle::kneading_density(1.8))).epsilon(1e-12));
}

TEST_CASE("observable and blocking") {
  const Observable h2 = observable_ha(2.0, 256);
  for (double y = -0.99; y < 1.0; y += 0.07) CHECK(h2.f(y) == Approx(y).epsilon(1e-12));
  CHECK_THROWS_AS(make_observable(PAF::constant(Interval(-1.0, 1.0), 1.0),
                                  PAF::constant(Interval(-1.0, 1.0), 0.5), "x"),
                  PreconditionError);

  const TentModel m = tent_model(1.7, 1024);
  const NormalizedTransfer op = m.transfer();
  const PAF h = m.h().f;
  CHECK((blocked_observable(h, op, 1) - h).sup_abs() <= 1e-15);
  // r = 2: (h + h o T) / sqrt 2
  const PAF b2 = blocked_observable(h, op, 2);
  for (double y = -0.95; y < 1.0; y += 0.031) {
    CHECK(b2(y) == Approx((h(y) + h(m.map(y))) / std::sqrt(2.0)).epsilon(1e-12));
  }
}

TEST_CASE("autocovariances") {
  const TentModel m = tent_model(2.0, 512);
  const NormalizedTransfer op = m.transfer();
  const PAF h = m.h().f;
  CHECK(autocovariance(h, op, 0) == Approx(op.inner(h, h)).epsilon(1e-14));
  CHECK(autocovariance(h, op, 0) == Approx(1.0 / 3.0).epsilon(1e-12));
  for (std::size_t j = 1; j < 6; ++j) CHECK(std::fabs(autocovariance(h, op, j)) <= 1e-15);

  // lag-one covariance by quadrature of h(y) h(T y) against the exact density
  const double a = 1.7;
  const PAF g = oracle::kneading_density(a);
  const NormalizedTransfer ex(tent_map(a), g);
  const PAF ha = PAF::affine(Interval(-1.0, 1.0), 1.0, -oracle::first_moment(g));
  const PAF hT = compose(ha, tent_map(a));
  CHECK(autocovariance(ha, ex, 1) == Approx(integrate_product(ha, hT, g)).epsilon(1e-10));
}

TEST_CASE("worked variance at a = 2") {
  const TentModel m = tent_model(2.0, 1024);
  const NormalizedTransfer op = m.transfer();
  const VarianceEstimate r = sigma2_resolvent(m.h().f, op);
  CHECK(r.truncation_J == 0);
  CHECK(r.sigma2 == Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(sigma2_resolvent(PAF::constant(Interval(-1.0, 1.0), 0.0), op).sigma2 == 0.0);
  const VarianceEstimate c = sigma2_autocov(m.h().f, op, m.cycle);
  CHECK(c.sigma2 == Approx(1.0 / 3.0).epsilon(1e-8));
}

TEST_CASE("resolvent and autocovariance estimators agree") {
  for (double a : {2.0, 1.7, 1.5}) {
    const NormalizedTransfer op(tent_map(a), oracle::kneading_density(a));
    const PAF h = PAF::affine(Interval(-1.0, 1.0), 1.0,
                              -oracle::first_moment(oracle::kneading_density(a)));
    const VarianceEstimate r = sigma2_resolvent(h, op, 200);
    const VarianceEstimate c = sigma2_autocov(h, op, support_cycle(a), 200);
    CHECK(r.sigma2 > 0.0);
    CHECK(std::fabs(r.sigma2 - c.sigma2) <= r.tail_bound + c.tail_bound + 1e-8);
  }
}

TEST_CASE("scale equivariance") {
  const TentModel m = tent_model(1.7, 1024);
  const NormalizedTransfer op = m.transfer();
  const double s = sigma2_resolvent(m.h().f, op).sigma2;
  for (double c : {2.0, -3.0}) {
    CHECK(sigma2_resolvent(c * m.h().f, op).sigma2 == Approx(c * c * s).epsilon(1e-10));
  }
}

TEST_CASE("variance recursion below sqrt 2") {
  VarianceEstimate base;
  base.sigma2 = 1.0 / 3.0;
  const double r2 = std::sqrt(2.0);
  const double want = std::pow(r2 - 1.0, 3) / (2.0 * std::sqrt(3.0));
  CHECK(sigma_recursion(r2, base) == Approx(want).epsilon(1e-12));
  CHECK(sigma_recursion_product(r2, base) == Approx(want).epsilon(1e-12));
  CHECK_THROWS_AS(sigma_recursion(1.5, base), DomainError);

  for (double a : {1.3, 1.2}) {
    const TentModel top = tent_model(tent_window_top(a), 2048);
    const VarianceEstimate b = sigma2_resolvent(top.h().f, top.transfer());
    CHECK(sigma_recursion(a, b) == Approx(sigma_recursion_product(a, b)).epsilon(1e-10));
  }
}

TEST_CASE("restricted autocovariance identity") {
  for (double a : {1.2, 1.3, 1.4}) {
    for (std::size_t n : {0, 1, 2}) {
      const ChindSides s = chind_sides(a, n, 2048);
      CHECK(std::fabs(s.lhs - s.rhs) <= 1e-6);
    }
  }
}

TEST_CASE("non-ergodic eta profile") {
  const NormalizedTransfer op(three_branch_example(), PAF::constant(kUnit, 1.0));
  const PAF h = four_step_h();
  const std::vector<ComponentSpec> comps{{{Interval(0.0, 0.5)}, Interval(0.0, 0.5), 1},
                                         {{Interval(0.5, 1.0)}, Interval(0.5, 1.0), 1}};
  const EtaProfile a = eta_nonergodic(h, op, comps);
  REQUIRE(a.components.size() == 2);
  CHECK(a.components[0].value == Approx(1.0).epsilon(1e-12));
  CHECK(a.components[1].value == Approx(4.0).epsilon(1e-12));
  CHECK(a.components[0].mass == Approx(0.5));

  const EtaProfile b = eta_appendixB(h, op, {{Interval(0.0, 0.5)}, {Interval(0.5, 1.0)}});
  CHECK(b.components[0].value == Approx(1.0).epsilon(1e-10));
  CHECK(b.components[1].value == Approx(4.0).epsilon(1e-10));

  // a single component reduces to the variance
  const TentModel m = tent_model(2.0, 512);
  const NormalizedTransfer op2 = m.transfer();
  const EtaProfile one = eta_nonergodic(m.h().f, op2, {{{Interval(-1.0, 1.0)}, Interval(-1.0, 1.0), 1}});
  CHECK(one.components[0].value == Approx(sigma2_resolvent(m.h().f, op2).sigma2).epsilon(1e-10));
  const EtaProfile dy = eta_appendixB(m.h().f, op2, {{Interval(-1.0, 1.0)}});
  CHECK(dy.components[0].value == Approx(1.0 / 3.0).epsilon(1e-10));
}

TEST_CASE("uncentered input is rejected") {
  const TentModel m = tent_model(2.0, 256);
  const PAF one = PAF::constant(Interval(-1.0, 1.0), 1.0);
  CHECK_THROWS_AS(sigma2_resolvent(one, m.transfer()), PreconditionError);
}

TEST_CASE("conditional variance is the same from every cycle interval") {
  // exact density; with an Ulam density the spread tracks its invariance error
  for (double a : {1.3, 1.1}) {
    const PAF g = oracle::kneading_density(a);
    const NormalizedTransfer op(tent_map(a), g);
    const PAF h = PAF::affine(Interval(-1.0, 1.0), 1.0, -oracle::first_moment(g));
    const VarianceEstimate est = sigma2_autocov(h, op, support_cycle(a));
    REQUIRE(est.per_interval.size() == static_cast<std::size_t>(period_of(a)));
    CHECK(est.interval_spread <= 1e-6 * est.sigma2 + est.tail_bound);
  }
}
