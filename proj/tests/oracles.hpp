#pragma once

// Reference constructions that do not go through the library's Ulam or
// recursion code.

#include <cmath>
#include <vector>

#include "piecewise.hpp"

namespace oracle {

using ergclt::Interval;
using ergclt::PAF;

// Invariant density of the tent map T_a(x) = a - 1 - a|x| as a kneading
// series: g = sum_n w_n 1_[-1, c_n] with c_0 = a - 1, c_{n+1} = T_a(c_n),
// w_0 = 1 and w_{n+1} = w_n * s_n / a where s_n = +1 if c_n <= 0 and -1 otherwise.
// Terms stop once |w_n| drops below 1e-18.
inline PAF kneading_density(double a) {
  const Interval dom(-1.0, 1.0);
  PAF g = PAF::constant(dom, 0.0);
  double c = a - 1.0, w = 1.0;
  while (std::fabs(w) > 1e-18) {
    if (c > -1.0) g = g + PAF::indicator(dom, Interval(-1.0, c), w);
    const double s = c <= 0.0 ? 1.0 : -1.0;
    c = a - 1.0 - a * std::fabs(c);
    w *= s / a;
  }
  return g.scaled(1.0 / g.integral()).simplified(0.0);
}

// int y g(y) dy over [-1, 1], by splitting at the breakpoints of g.
inline double first_moment(const PAF& g) {
  double s = 0.0;
  const auto& bp = g.breakpoints();
  for (std::size_t k = 0; k < g.size(); ++k) {
    const auto& p = g.pieces()[k];
    const double lo = bp[k], hi = bp[k + 1];
    s += p.slope * (hi * hi * hi - lo * lo * lo) / 3.0 + p.intercept * (hi * hi - lo * lo) / 2.0;
  }
  return s;
}

}  // namespace oracle
