#include "maps.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "errors.hpp"

namespace ergclt {

namespace {

constexpr int kMaxPeriodExponent = 20;

std::string fmt_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

Interval tent_image(double a, const Interval& iv) {
  const auto t = [a](double x) { return a - 1.0 - a * std::fabs(x); };
  double lo = std::min(t(iv.lo), t(iv.hi));
  double hi = std::max(t(iv.lo), t(iv.hi));
  if (iv.lo < 0.0 && iv.hi > 0.0) hi = a - 1.0;
  return {lo, hi};
}

double endpoint_distance(const Interval& u, const Interval& v) {
  return std::max(std::fabs(u.lo - v.lo), std::fabs(u.hi - v.hi));
}

}  // namespace

Interval::Interval(double lo_, double hi_) : lo(lo_), hi(hi_) {
  if (!(lo < hi)) {
    throw DomainError("interval requires lo < hi, got [" + fmt_double(lo) + ", " +
                      fmt_double(hi) + "]");
  }
}

Interval AffineMap::image(const Interval& iv) const {
  const double u = (*this)(iv.lo);
  const double v = (*this)(iv.hi);
  return {std::min(u, v), std::max(u, v)};
}

Interval Branch::image() const { return affine().image(piece); }

PiecewiseLinearMap::PiecewiseLinearMap(Interval domain, std::vector<Branch> branches,
                                       std::string name)
    : domain_(domain), branches_(std::move(branches)), name_(std::move(name)) {
  if (branches_.empty()) throw DomainError("piecewise linear map needs at least one branch");
  std::sort(branches_.begin(), branches_.end(),
            [](const Branch& l, const Branch& r) { return l.piece.lo < r.piece.lo; });
  constexpr double tol = 1e-12;
  if (std::fabs(branches_.front().piece.lo - domain_.lo) > tol ||
      std::fabs(branches_.back().piece.hi - domain_.hi) > tol) {
    throw DomainError("branches must cover the domain");
  }
  for (std::size_t i = 0; i < branches_.size(); ++i) {
    const Branch& b = branches_[i];
    if (b.slope == 0.0) throw DomainError("branch slopes must be nonzero");
    if (i + 1 < branches_.size() && std::fabs(b.piece.hi - branches_[i + 1].piece.lo) > tol) {
      throw DomainError("branch pieces must be contiguous");
    }
    const Interval img = b.image();
    if (img.lo < domain_.lo - tol || img.hi > domain_.hi + tol) {
      throw DomainError("branch image leaves the domain");
    }
  }
}

std::size_t PiecewiseLinearMap::branch_index(double x) const {
  if (!(x >= domain_.lo && x <= domain_.hi)) {
    throw DomainError("point " + fmt_double(x) + " outside map domain");
  }
  for (std::size_t i = 0; i + 1 < branches_.size(); ++i) {
    if (x < branches_[i].piece.hi) return i;
  }
  return branches_.size() - 1;
}

double PiecewiseLinearMap::operator()(double x) const { return branches_[branch_index(x)](x); }

std::vector<double> PiecewiseLinearMap::iterate(double x, std::size_t n) const {
  std::vector<double> orbit;
  orbit.reserve(n + 1);
  orbit.push_back(x);
  for (std::size_t k = 0; k < n; ++k) orbit.push_back((*this)(orbit.back()));
  return orbit;
}

Interval PiecewiseLinearMap::image(const Interval& iv) const {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const Branch& b : branches_) {
    const double u = std::max(b.piece.lo, iv.lo);
    const double v = std::min(b.piece.hi, iv.hi);
    if (u > v) continue;
    lo = std::min({lo, b(u), b(v)});
    hi = std::max({hi, b(u), b(v)});
  }
  return {lo, hi};
}

void validate_tent_parameter(double a) {
  if (!(a > 1.0 && a <= 2.0)) {
    throw DomainError("tent parameter must lie in (1, 2], got " + fmt_double(a));
  }
  if (a - 1.0 <= 1e-6) {
    throw DomainError("tent parameter within 1e-6 of 1 is not supported");
  }
}

PiecewiseLinearMap tent_map(double a) {
  validate_tent_parameter(a);
  std::vector<Branch> branches{{Interval(-1.0, 0.0), a, a - 1.0},
                               {Interval(0.0, 1.0), -a, a - 1.0}};
  return PiecewiseLinearMap(Interval(-1.0, 1.0), std::move(branches),
                            "tent(" + fmt_double(a) + ")");
}

PiecewiseLinearMap tent_core_map(double a) {
  const Interval core = tent_core_interval(a);
  std::vector<Branch> branches{{Interval(core.lo, 0.0), a, a - 1.0},
                               {Interval(0.0, core.hi), -a, a - 1.0}};
  return PiecewiseLinearMap(core, std::move(branches), "tent-core(" + fmt_double(a) + ")");
}

PiecewiseLinearMap three_branch_example() {
  std::vector<Branch> branches{{Interval(0.0, 0.25), 2.0, 0.0},
                               {Interval(0.25, 0.75), 2.0, -0.5},
                               {Interval(0.75, 1.0), 2.0, -1.0}};
  return PiecewiseLinearMap(Interval(0.0, 1.0), std::move(branches), "three-branch");
}

double tent_fixed_point(double a) { return (a - 1.0) / (a + 1.0); }

int periodicity_exponent(double a) {
  validate_tent_parameter(a);
  // threshold holds 2^{1/2^{m+1}}; repeated sqrt keeps 2^{1/2} == std::sqrt(2).
  int m = 0;
  double threshold = std::sqrt(2.0);
  while (a <= threshold) {
    ++m;
    if (m > kMaxPeriodExponent) throw DomainError("periodicity exponent exceeds cap");
    threshold = std::sqrt(threshold);
  }
  return m;
}

double tent_square(double a) { return std::min(a * a, 2.0); }

double tent_window_top(double a) {
  const int m = periodicity_exponent(a);
  for (int k = 0; k < m; ++k) a = tent_square(a);
  return a;
}

int period_of(double a) { return 1 << periodicity_exponent(a); }

TentParams TentParams::from(double a) {
  TentParams p;
  p.a = a;
  p.xstar = tent_fixed_point(a);
  p.m = periodicity_exponent(a);
  p.r = 1 << p.m;
  return p;
}

Conjugacy conjugacy(double a, int i) {
  validate_tent_parameter(a);
  if (a > std::sqrt(2.0)) {
    throw DomainError("conjugacy to T_{a^2} requires a <= sqrt(2), got " + fmt_double(a));
  }
  if (i != 0 && i != 1) throw DomainError("conjugacy index must be 0 or 1");
  const double xs = tent_fixed_point(a);
  Conjugacy c;
  if (i == 1) {
    c.forward = {-1.0 / xs, 0.0};
    c.inverse = {-xs, 0.0};
    c.source = Interval(-xs, xs);
  } else {
    c.forward = {a / xs, -a - 1.0};
    c.inverse = {xs / a, xs * (a + 1.0) / a};
    c.source = Interval(xs, xs * (1.0 + 2.0 / a));
  }
  return c;
}

Interval tent_core_interval(double a) {
  validate_tent_parameter(a);
  const double t0 = a - 1.0;
  const double t1 = a - 1.0 - a * std::fabs(t0);
  return {t1, t0};
}

double SupportCycle::cyclic_error() const {
  double err = 0.0;
  const std::size_t r = intervals.size();
  for (std::size_t j = 0; j < r; ++j) {
    err = std::max(err, endpoint_distance(tent_image(a, intervals[j]), intervals[(j + 1) % r]));
  }
  return err;
}

SupportCycle support_cycle(double a) {
  const TentParams p = TentParams::from(a);
  SupportCycle cycle;
  cycle.a = a;
  cycle.period = p.r;
  if (p.m == 0) {
    cycle.intervals = {tent_core_interval(a)};
    cycle.binary_index = {1};
    return cycle;
  }

  // powers[k] = a^{2^k}
  std::vector<double> powers(p.m + 1, a);
  for (int k = 1; k <= p.m; ++k) powers[k] = tent_square(powers[k - 1]);
  const Interval base = tent_core_interval(powers[p.m]);

  std::vector<Interval> by_label(p.r);
  for (int bits = 0; bits < p.r; ++bits) {
    // Phi_{jm}^{-1} = phi_{i_1 a}^{-1} o ... o phi_{i_m a^{2^{m-1}}}^{-1}
    Interval iv = base;
    for (int k = p.m; k >= 1; --k) {
      const int ik = (bits >> (k - 1)) & 1;
      iv = conjugacy(powers[k - 1], ik).inverse.image(iv);
    }
    by_label[bits] = iv;  // label j = 1 + bits
  }

  std::vector<bool> used(p.r, false);
  int current = 0;
  used[0] = true;
  cycle.intervals.push_back(by_label[0]);
  cycle.binary_index.push_back(1);
  for (int step = 1; step < p.r; ++step) {
    const Interval img = tent_image(a, by_label[current]);
    int best = -1;
    double best_err = std::numeric_limits<double>::infinity();
    for (int j = 0; j < p.r; ++j) {
      if (used[j]) continue;
      const double e = endpoint_distance(img, by_label[j]);
      if (e < best_err) {
        best_err = e;
        best = j;
      }
    }
    if (best < 0 || best_err > 1e-10) {
      throw NumericalError("support intervals are not cyclically permuted by T_a (error " +
                           fmt_double(best_err) + ")");
    }
    used[best] = true;
    current = best;
    cycle.intervals.push_back(by_label[best]);
    cycle.binary_index.push_back(best + 1);
  }
  if (cycle.cyclic_error() > 1e-10) {
    throw NumericalError("support cycle does not close under T_a");
  }
  return cycle;
}

}  // namespace ergclt
