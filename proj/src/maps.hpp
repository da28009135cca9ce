#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

namespace ergclt {

/// Closed interval [lo, hi] with lo < hi.
struct Interval {
  double lo = 0.0;
  double hi = 1.0;

  Interval() = default;
  Interval(double lo_, double hi_);

  double length() const { return hi - lo; }
  bool contains(double x) const { return lo <= x && x <= hi; }
  double midpoint() const { return 0.5 * (lo + hi); }
};

/// x -> slope * x + offset, slope != 0.
struct AffineMap {
  double slope = 1.0;
  double offset = 0.0;

  double operator()(double x) const { return slope * x + offset; }
  AffineMap inverse() const { return {1.0 / slope, -offset / slope}; }
  // (*this) o inner
  AffineMap after(const AffineMap& inner) const {
    return {slope * inner.slope, slope * inner.offset + offset};
  }
  // Image of an interval, returned with sorted endpoints.
  Interval image(const Interval& iv) const;
};

struct Branch {
  Interval piece;
  double slope = 1.0;
  double intercept = 0.0;

  double operator()(double x) const { return slope * x + intercept; }
  AffineMap affine() const { return {slope, intercept}; }
  Interval image() const;
};

/// Interval map built from finitely many affine branches.
///
/// Branch lookup follows the half-open convention: x belongs to the first
/// branch whose piece satisfies lo <= x < hi, and the last piece is closed on
/// the right.  Instances are immutable after construction.
class PiecewiseLinearMap {
 public:
  PiecewiseLinearMap(Interval domain, std::vector<Branch> branches, std::string name = {});

  const Interval& domain() const { return domain_; }
  const std::vector<Branch>& branches() const { return branches_; }
  const std::string& name() const { return name_; }

  std::size_t branch_index(double x) const;
  double operator()(double x) const;
  double evaluate(double x) const { return (*this)(x); }
  // orbit[0] = x, orbit[k + 1] = T(orbit[k]); size n + 1.
  std::vector<double> iterate(double x, std::size_t n) const;

  // Image of a subinterval of the domain (continuity is not assumed).
  Interval image(const Interval& iv) const;

 private:
  Interval domain_;
  std::vector<Branch> branches_;
  std::string name_;
};

/// T_a(x) = a - 1 - a|x| on [-1, 1], 1 < a <= 2.
PiecewiseLinearMap tent_map(double a);

/// T_a restricted to its invariant core interval [T_a^2(0), T_a(0)].
PiecewiseLinearMap tent_core_map(double a);

/// 2y on [0,1/4), 2y - 1/2 on [1/4,3/4), 2y - 1 on [3/4,1].  Both halves of
/// [0,1] are invariant, so Lebesgue measure is invariant but not ergodic.
PiecewiseLinearMap three_branch_example();

// Throws DomainError unless 1 < a <= 2 and a is not within 1e-6 of 1.
void validate_tent_parameter(double a);

/// Nontrivial fixed point (a - 1) / (a + 1).
double tent_fixed_point(double a);

/// Periodicity exponent m with 2^{1/2^{m+1}} < a <= 2^{1/2^m}.
int periodicity_exponent(double a);
// a^2, clamped so that a = sqrt 2 lands on 2 despite rounding.
double tent_square(double a);
/// a^{2^m}, the parameter in (sqrt 2, 2] reached by repeated squaring.
double tent_window_top(double a);
/// 2^m for the window containing a.
int period_of(double a);

struct TentParams {
  double a = 2.0;
  double xstar = 1.0 / 3.0;
  int m = 0;
  int r = 1;

  static TentParams from(double a);
};

/// Affine conjugacy between T_a^2 restricted to I_i and T_{a^2} on [-1,1].
struct Conjugacy {
  AffineMap forward;  // I_i -> [-1,1]
  AffineMap inverse;  // [-1,1] -> I_i
  Interval source;    // I_i
};

/// i = 0: I_0 = [x*, x*(1 + 2/a)], i = 1: I_1 = [-x*, x*].  Requires a <= sqrt 2.
Conjugacy conjugacy(double a, int i);

/// A = [T_a^2(0), T_a(0)], the invariant interval carrying the density.
Interval tent_core_interval(double a);

/// The r = 2^m intervals cyclically permuted by T_a.
///
/// `intervals` is listed in dynamical order: T_a maps intervals[j] onto
/// intervals[(j + 1) % r].  `binary_index[j]` is the label
/// 1 + i_1 + 2 i_2 + ... + 2^{m-1} i_m of the inverse-conjugacy composition
/// that produced intervals[j]; intervals[0] always carries label 1.
struct SupportCycle {
  std::vector<Interval> intervals;
  std::vector<int> binary_index;
  int period = 1;
  double a = 2.0;

  // max over j of the endpoint distance between T_a(Y_j) and Y_{j+1}.
  double cyclic_error() const;
};

SupportCycle support_cycle(double a);

}  // namespace ergclt
