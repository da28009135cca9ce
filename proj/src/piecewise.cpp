#include "piecewise.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "errors.hpp"

namespace ergclt {

namespace {

double resolution(double lo, double hi) { return kBreakpointResolution * (hi - lo); }

void check_same_domain(const PAF& f, const PAF& g) {
  const Interval a = f.domain();
  const Interval b = g.domain();
  const double tol = resolution(a.lo, a.hi) * 16.0;
  if (std::fabs(a.lo - b.lo) > tol || std::fabs(a.hi - b.hi) > tol) {
    throw DomainError("piecewise functions live on different domains");
  }
}

// Walks the common refinement of N functions sharing a domain and calls
// visit(lo, hi, idx) with the active piece index of each function.  Slivers
// narrower than the breakpoint resolution are folded into the next piece.
template <std::size_t N, typename Visit>
void for_each_common_piece(const std::array<const PAF*, N>& fs, Visit&& visit) {
  for (std::size_t k = 1; k < N; ++k) check_same_domain(*fs[0], *fs[k]);
  const Interval dom = fs[0]->domain();
  const double tol = resolution(dom.lo, dom.hi);
  std::array<std::size_t, N> idx{};
  double start = dom.lo;
  while (true) {
    double end = dom.hi;
    for (std::size_t k = 0; k < N; ++k) end = std::min(end, fs[k]->breakpoints()[idx[k] + 1]);
    bool last = true;
    for (std::size_t k = 0; k < N; ++k) {
      if (idx[k] + 1 < fs[k]->size()) last = false;
    }
    if (last) end = dom.hi;
    if (end - start > tol || last) {
      visit(start, end, idx);
      start = end;
    }
    if (last) break;
    for (std::size_t k = 0; k < N; ++k) {
      if (idx[k] + 1 < fs[k]->size() && fs[k]->breakpoints()[idx[k] + 1] - end <= tol) ++idx[k];
    }
  }
}

template <typename Op>
PAF combine_impl(const PAF& f, const PAF& g, Op&& op) {
  std::vector<double> bp{f.domain().lo};
  std::vector<AffinePiece> pieces;
  bp.reserve(f.size() + g.size() + 1);
  pieces.reserve(f.size() + g.size());
  for_each_common_piece<2>({&f, &g}, [&](double, double hi, const std::array<std::size_t, 2>& i) {
    pieces.push_back(op(f.pieces()[i[0]], g.pieces()[i[1]]));
    bp.push_back(hi);
  });
  return PAF(std::move(bp), std::move(pieces));
}

// Simpson's rule, exact for cubic polynomials.
template <typename F>
double simpson(double lo, double hi, F&& p) {
  const double mid = 0.5 * (lo + hi);
  return (hi - lo) / 6.0 * (p(lo) + 4.0 * p(mid) + p(hi));
}

}  // namespace

PiecewiseAffineFunction::PiecewiseAffineFunction(std::vector<double> breakpoints,
                                                 std::vector<AffinePiece> pieces)
    : bp_(std::move(breakpoints)), pieces_(std::move(pieces)) {
  if (bp_.size() < 2 || pieces_.size() + 1 != bp_.size()) {
    throw DomainError("piecewise function needs n+1 breakpoints for n pieces");
  }
  for (std::size_t i = 0; i + 1 < bp_.size(); ++i) {
    if (!(bp_[i] < bp_[i + 1])) throw DomainError("breakpoints must be strictly increasing");
  }
}

PAF PAF::constant(const Interval& domain, double value) {
  return PAF({domain.lo, domain.hi}, {AffinePiece{0.0, value}});
}

PAF PAF::affine(const Interval& domain, double slope, double intercept) {
  return PAF({domain.lo, domain.hi}, {AffinePiece{slope, intercept}});
}

PAF PAF::step(std::vector<double> breakpoints, std::span<const double> values) {
  std::vector<AffinePiece> pieces;
  pieces.reserve(values.size());
  for (double v : values) pieces.push_back({0.0, v});
  return PAF(std::move(breakpoints), std::move(pieces));
}

PAF PAF::indicator(const Interval& domain, const Interval& part, double value) {
  const double lo = std::max(domain.lo, part.lo);
  const double hi = std::min(domain.hi, part.hi);
  if (!(lo < hi)) return constant(domain, 0.0);
  std::vector<double> bp{domain.lo};
  std::vector<AffinePiece> pieces;
  if (lo > domain.lo) {
    pieces.push_back({0.0, 0.0});
    bp.push_back(lo);
  }
  pieces.push_back({0.0, value});
  bp.push_back(hi);
  if (hi < domain.hi) {
    pieces.push_back({0.0, 0.0});
    bp.push_back(domain.hi);
  }
  return PAF(std::move(bp), std::move(pieces));
}

std::size_t PAF::piece_index(double x) const {
  auto it = std::upper_bound(bp_.begin() + 1, bp_.end() - 1, x);
  return static_cast<std::size_t>(it - (bp_.begin() + 1));
}

double PAF::operator()(double x) const {
  if (x < bp_.front() || x > bp_.back()) return 0.0;
  return pieces_[piece_index(x)](x);
}

bool PAF::is_step() const {
  return std::all_of(pieces_.begin(), pieces_.end(),
                     [](const AffinePiece& p) { return p.slope == 0.0; });
}

bool PAF::is_zero() const {
  return std::all_of(pieces_.begin(), pieces_.end(), [](const AffinePiece& p) {
    return p.slope == 0.0 && p.intercept == 0.0;
  });
}

double PAF::integral() const {
  double s = 0.0;
  for (std::size_t i = 0; i < pieces_.size(); ++i) {
    const double mid = 0.5 * (bp_[i] + bp_[i + 1]);
    s += (bp_[i + 1] - bp_[i]) * pieces_[i](mid);
  }
  return s;
}

double PAF::integral(const Interval& over) const {
  double s = 0.0;
  for (std::size_t i = 0; i < pieces_.size(); ++i) {
    const double lo = std::max(bp_[i], over.lo);
    const double hi = std::min(bp_[i + 1], over.hi);
    if (hi <= lo) continue;
    s += (hi - lo) * pieces_[i](0.5 * (lo + hi));
  }
  return s;
}

double PAF::sup_abs() const {
  double m = 0.0;
  for (std::size_t i = 0; i < pieces_.size(); ++i) {
    m = std::max({m, std::fabs(pieces_[i](bp_[i])), std::fabs(pieces_[i](bp_[i + 1]))});
  }
  return m;
}

double PAF::min_value() const {
  double m = pieces_[0](bp_[0]);
  for (std::size_t i = 0; i < pieces_.size(); ++i) {
    m = std::min({m, pieces_[i](bp_[i]), pieces_[i](bp_[i + 1])});
  }
  return m;
}

PAF PAF::scaled(double c) const {
  std::vector<AffinePiece> pieces(pieces_);
  for (auto& p : pieces) {
    p.slope *= c;
    p.intercept *= c;
  }
  return PAF(bp_, std::move(pieces));
}

PAF PAF::plus_constant(double c) const {
  std::vector<AffinePiece> pieces(pieces_);
  for (auto& p : pieces) p.intercept += c;
  return PAF(bp_, std::move(pieces));
}

PAF PAF::restricted(const Interval& part) const {
  return multiply_step(*this, indicator(domain(), part));
}

PAF PAF::simplified(double tol) const {
  const double res = resolution(bp_.front(), bp_.back());
  std::vector<double> bp{bp_.front()};
  std::vector<AffinePiece> pieces;
  bp.reserve(bp_.size());
  pieces.reserve(pieces_.size());
  for (std::size_t i = 0; i < pieces_.size(); ++i) {
    const double lo = bp.back();
    const double hi = bp_[i + 1];
    const bool last = i + 1 == pieces_.size();
    if (hi - lo <= res && !last) continue;
    const AffinePiece& p = pieces_[i];
    if (!pieces.empty()) {
      const AffinePiece& q = pieces.back();
      const double left = bp[bp.size() - 2];
      // same line to within tol at both ends of the merged span
      if (std::fabs(p(left) - q(left)) <= tol && std::fabs(p(hi) - q(hi)) <= tol &&
          std::fabs(p.slope - q.slope) <= tol) {
        bp.back() = hi;
        continue;
      }
    }
    if (hi - lo <= res && last && !pieces.empty()) {
      bp.back() = hi;
      continue;
    }
    pieces.push_back(p);
    bp.push_back(hi);
  }
  bp.back() = bp_.back();
  return PAF(std::move(bp), std::move(pieces));
}

PAF PAF::projected(std::size_t cells) const {
  if (cells == 0) throw DomainError("projection needs at least one cell");
  const Interval dom = domain();
  const double width = dom.length() / static_cast<double>(cells);
  std::vector<double> bp(cells + 1);
  for (std::size_t k = 0; k <= cells; ++k) bp[k] = dom.lo + width * static_cast<double>(k);
  bp.back() = dom.hi;
  std::vector<double> mass(cells, 0.0), moment(cells, 0.0);
  std::size_t cell = 0;
  for (std::size_t i = 0; i < pieces_.size(); ++i) {
    double lo = bp_[i];
    const double hi = bp_[i + 1];
    while (cell < cells && bp[cell + 1] <= lo) ++cell;
    while (lo < hi && cell < cells) {
      const double end = std::min(hi, bp[cell + 1]);
      const double mid = 0.5 * (bp[cell] + bp[cell + 1]);
      const AffinePiece& p = pieces_[i];
      mass[cell] += simpson(lo, end, [&](double x) { return p(x); });
      moment[cell] += simpson(lo, end, [&](double x) { return p(x) * (x - mid); });
      lo = end;
      if (lo < hi) ++cell;
    }
  }
  std::vector<AffinePiece> pieces(cells);
  for (std::size_t k = 0; k < cells; ++k) {
    const double len = bp[k + 1] - bp[k];
    const double mid = 0.5 * (bp[k] + bp[k + 1]);
    const double avg = mass[k] / len;
    const double slope = 12.0 * moment[k] / (len * len * len);
    pieces[k] = {slope, avg - slope * mid};
  }
  return PAF(std::move(bp), std::move(pieces));
}

PAF combine(const PAF& f, const PAF& g,
            const std::function<AffinePiece(const AffinePiece&, const AffinePiece&)>& op) {
  return combine_impl(f, g, op);
}

PAF operator+(const PAF& f, const PAF& g) {
  return combine_impl(f, g, [](const AffinePiece& p, const AffinePiece& q) {
    return AffinePiece{p.slope + q.slope, p.intercept + q.intercept};
  });
}

PAF operator-(const PAF& f, const PAF& g) {
  return combine_impl(f, g, [](const AffinePiece& p, const AffinePiece& q) {
    return AffinePiece{p.slope - q.slope, p.intercept - q.intercept};
  });
}

PAF operator*(double c, const PAF& f) { return f.scaled(c); }

PAF multiply_step(const PAF& f, const PAF& s) {
  if (!s.is_step()) throw DomainError("multiply_step expects a step function");
  return combine_impl(f, s, [](const AffinePiece& p, const AffinePiece& q) {
    return AffinePiece{p.slope * q.intercept, p.intercept * q.intercept};
  });
}

PAF divide_step(const PAF& f, const PAF& s, double floor, std::size_t* masked) {
  if (!s.is_step()) throw DomainError("divide_step expects a step function");
  std::size_t count = 0;
  PAF out = combine_impl(f, s, [&](const AffinePiece& p, const AffinePiece& q) {
    if (q.intercept < floor) {
      if (p.slope != 0.0 || p.intercept != 0.0) ++count;
      return AffinePiece{};
    }
    return AffinePiece{p.slope / q.intercept, p.intercept / q.intercept};
  });
  if (masked) *masked += count;
  return out;
}

PAF pull_back(const PAF& f, const AffineMap& psi, const Interval& target, const Interval& domain,
              double weight) {
  const Interval lo_hi{std::max(domain.lo, target.lo), std::min(domain.hi, target.hi)};
  const AffineMap fwd = psi.inverse();  // maps f's domain onto target coordinates
  // f's interior breakpoints expressed in target coordinates, increasing.
  std::vector<double> inner;
  const auto& fbp = f.breakpoints();
  inner.reserve(fbp.size());
  for (std::size_t i = 1; i + 1 < fbp.size(); ++i) inner.push_back(fwd(fbp[i]));
  if (psi.slope < 0.0) std::reverse(inner.begin(), inner.end());

  const double tol = resolution(domain.lo, domain.hi);
  std::vector<double> bp{domain.lo};
  std::vector<AffinePiece> pieces;
  if (lo_hi.lo - domain.lo > tol) {
    pieces.push_back({});
    bp.push_back(lo_hi.lo);
  }
  auto emit = [&](double lo, double hi) {
    const double mid = 0.5 * (lo + hi);
    const AffinePiece& p = f.pieces()[f.piece_index(psi(mid))];
    pieces.push_back({weight * p.slope * psi.slope, weight * (p.slope * psi.offset + p.intercept)});
    bp.push_back(hi);
  };
  double start = bp.back();
  for (double x : inner) {
    if (x - start <= tol || x >= lo_hi.hi - tol) continue;
    emit(start, x);
    start = x;
  }
  emit(start, lo_hi.hi);
  if (domain.hi - lo_hi.hi > tol) {
    pieces.push_back({});
    bp.push_back(domain.hi);
  } else {
    bp.back() = domain.hi;
  }
  return PAF(std::move(bp), std::move(pieces));
}

PAF compose(const PAF& f, const PiecewiseLinearMap& map) {
  const Interval dom = map.domain();
  const double tol = resolution(dom.lo, dom.hi);
  const auto& fbp = f.breakpoints();
  std::vector<double> bp{dom.lo};
  std::vector<AffinePiece> pieces;
  for (const Branch& b : map.branches()) {
    const AffineMap inv = b.affine().inverse();
    std::vector<double> inner;
    for (std::size_t i = 1; i + 1 < fbp.size(); ++i) {
      const double x = inv(fbp[i]);
      if (x > b.piece.lo + tol && x < b.piece.hi - tol) inner.push_back(x);
    }
    if (b.slope < 0.0) std::reverse(inner.begin(), inner.end());
    inner.push_back(b.piece.hi);
    double start = b.piece.lo;
    for (double x : inner) {
      if (x - start <= tol) continue;
      const double mid = 0.5 * (start + x);
      const AffinePiece& p = f.pieces()[f.piece_index(b(mid))];
      pieces.push_back({p.slope * b.slope, p.slope * b.intercept + p.intercept});
      bp.push_back(x);
      start = x;
    }
  }
  bp.back() = dom.hi;
  return PAF(std::move(bp), std::move(pieces));
}

double integrate_weighted(const PAF& f, const PAF& w) {
  double s = 0.0;
  for_each_common_piece<2>({&f, &w}, [&](double lo, double hi, const std::array<std::size_t, 2>& i) {
    const AffinePiece& p = f.pieces()[i[0]];
    const AffinePiece& q = w.pieces()[i[1]];
    s += simpson(lo, hi, [&](double x) { return p(x) * q(x); });
  });
  return s;
}

double integrate_product(const PAF& f, const PAF& g, const PAF& w) {
  double s = 0.0;
  for_each_common_piece<3>({&f, &g, &w},
                           [&](double lo, double hi, const std::array<std::size_t, 3>& i) {
                             const AffinePiece& p = f.pieces()[i[0]];
                             const AffinePiece& q = g.pieces()[i[1]];
                             const AffinePiece& u = w.pieces()[i[2]];
                             if (u.slope == 0.0 && u.intercept == 0.0) return;
                             s += simpson(lo, hi, [&](double x) { return p(x) * q(x) * u(x); });
                           });
  return s;
}

double integrate_abs(const PAF& f, const PAF& w) {
  double s = 0.0;
  for_each_common_piece<2>({&f, &w}, [&](double lo, double hi, const std::array<std::size_t, 2>& i) {
    const AffinePiece& p = f.pieces()[i[0]];
    const AffinePiece& q = w.pieces()[i[1]];
    auto integrand = [&](double x) { return std::fabs(p(x)) * q(x); };
    if (p.slope != 0.0) {
      const double root = -p.intercept / p.slope;
      if (root > lo && root < hi) {
        s += simpson(lo, root, integrand) + simpson(root, hi, integrand);
        return;
      }
    }
    s += simpson(lo, hi, integrand);
  });
  return s;
}

}  // namespace ergclt
