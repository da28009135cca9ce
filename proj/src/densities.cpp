#include "densities.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <numeric>
#include <string>

#include "errors.hpp"

namespace ergclt {

namespace {

// Overlaps below this fraction of a cell are rounding artefacts of image
// endpoints that sit on cell boundaries.
constexpr double kSliverFraction = 1e-12;
// Density values below this are treated as outside the support.
constexpr double kDensityZero = 1e-13;

struct Support {
  std::vector<std::uint64_t> words;
  std::uint64_t hash = 0;

  bool operator==(const Support& o) const { return hash == o.hash && words == o.words; }
};

Support support_of(std::span<const double> d, double eps) {
  Support s;
  s.words.assign((d.size() + 63) / 64, 0);
  std::uint64_t h = 1469598103934665603ull;
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (d[i] > eps) {
      s.words[i / 64] |= std::uint64_t{1} << (i % 64);
      h = (h ^ i) * 1099511628211ull;
    }
  }
  s.hash = h;
  return s;
}

void normalize(std::span<double> d) {
  const double total = std::accumulate(d.begin(), d.end(), 0.0);
  for (double& x : d) x /= total;
}

double l1_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::fabs(a[i] - b[i]);
  return s;
}

}  // namespace

UlamOperator::UlamOperator(std::size_t grid_n, Interval domain, std::vector<std::size_t> row_ptr,
                           std::vector<std::size_t> cols, std::vector<double> vals)
    : grid_n_(grid_n),
      domain_(domain),
      row_ptr_(std::move(row_ptr)),
      cols_(std::move(cols)),
      vals_(std::move(vals)) {
  if (row_ptr_.size() != grid_n_ + 1 || row_ptr_.back() != vals_.size() ||
      cols_.size() != vals_.size()) {
    throw DomainError("malformed sparse matrix");
  }
  col_ptr_.assign(grid_n_ + 1, 0);
  for (std::size_t c : cols_) ++col_ptr_[c + 1];
  std::partial_sum(col_ptr_.begin(), col_ptr_.end(), col_ptr_.begin());
  rows_t_.resize(vals_.size());
  vals_t_.resize(vals_.size());
  std::vector<std::size_t> fill(col_ptr_.begin(), col_ptr_.end() - 1);
  for (std::size_t i = 0; i < grid_n_; ++i) {
    for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
      const std::size_t slot = fill[cols_[k]]++;
      rows_t_[slot] = i;
      vals_t_[slot] = vals_[k];
    }
  }
}

double UlamOperator::cell_lo(std::size_t k) const {
  return domain_.lo + domain_.length() * static_cast<double>(k) / static_cast<double>(grid_n_);
}

double UlamOperator::cell_hi(std::size_t k) const {
  return k + 1 == grid_n_ ? domain_.hi : cell_lo(k + 1);
}

std::span<const std::size_t> UlamOperator::row_cols(std::size_t i) const {
  return {cols_.data() + row_ptr_[i], row_ptr_[i + 1] - row_ptr_[i]};
}

std::span<const double> UlamOperator::row_vals(std::size_t i) const {
  return {vals_.data() + row_ptr_[i], row_ptr_[i + 1] - row_ptr_[i]};
}

double UlamOperator::entry(std::size_t i, std::size_t j) const {
  const auto cols = row_cols(i);
  const auto it = std::lower_bound(cols.begin(), cols.end(), j);
  if (it == cols.end() || *it != j) return 0.0;
  return row_vals(i)[static_cast<std::size_t>(it - cols.begin())];
}

void UlamOperator::push_forward(std::span<const double> d, std::span<double> out) const {
  for (std::size_t j = 0; j < grid_n_; ++j) {
    double s = 0.0;
    for (std::size_t k = col_ptr_[j]; k < col_ptr_[j + 1]; ++k) s += d[rows_t_[k]] * vals_t_[k];
    out[j] = s;
  }
}

std::vector<double> UlamOperator::push_forward(std::span<const double> d) const {
  std::vector<double> out(grid_n_);
  push_forward(d, out);
  return out;
}

double UlamOperator::max_row_sum_error() const {
  double err = 0.0;
  for (std::size_t i = 0; i < grid_n_; ++i) {
    const auto v = row_vals(i);
    err = std::max(err, std::fabs(std::accumulate(v.begin(), v.end(), 0.0) - 1.0));
  }
  return err;
}

UlamOperator ulam_matrix(const PiecewiseLinearMap& map, std::size_t n) {
  if (n < 2) throw DomainError("Ulam grid needs at least 2 cells");
  const Interval dom = map.domain();
  const double width = dom.length();
  auto cell_lo = [&](std::size_t k) {
    return dom.lo + width * static_cast<double>(k) / static_cast<double>(n);
  };
  auto cell_of = [&](double y) {
    const double t = (y - dom.lo) / width * static_cast<double>(n);
    if (t <= 0.0) return std::size_t{0};
    return std::min(n - 1, static_cast<std::size_t>(t));
  };

  std::vector<std::size_t> row_ptr{0}, cols;
  std::vector<double> vals;
  std::vector<std::pair<std::size_t, double>> row;
  for (std::size_t i = 0; i < n; ++i) {
    const double c_lo = cell_lo(i);
    const double c_hi = i + 1 == n ? dom.hi : cell_lo(i + 1);
    const double c_len = c_hi - c_lo;
    row.clear();
    for (const Branch& b : map.branches()) {
      const double u = std::max(c_lo, b.piece.lo);
      const double v = std::min(c_hi, b.piece.hi);
      if (!(u < v)) continue;
      const double p = std::min(b(u), b(v));
      const double q = std::max(b(u), b(v));
      const double stretch = std::fabs(b.slope);
      // first cell may start below p because of the floor
      std::size_t j = cell_of(p);
      if (j > 0 && cell_lo(j) > p) --j;
      for (; j < n; ++j) {
        const double t_lo = cell_lo(j);
        const double t_hi = j + 1 == n ? dom.hi : cell_lo(j + 1);
        if (t_lo >= q) break;
        const double overlap = std::min(q, t_hi) - std::max(p, t_lo);
        if (overlap > 0.0) row.emplace_back(j, overlap / stretch / c_len);
      }
    }
    std::sort(row.begin(), row.end());
    double total = 0.0, kept = 0.0;
    std::vector<std::pair<std::size_t, double>> merged;
    for (const auto& [j, w] : row) {
      total += w;
      if (!merged.empty() && merged.back().first == j) {
        merged.back().second += w;
      } else {
        merged.emplace_back(j, w);
      }
    }
    for (const auto& [j, w] : merged) {
      if (w < kSliverFraction) continue;
      kept += w;
    }
    for (const auto& [j, w] : merged) {
      if (w < kSliverFraction) continue;
      cols.push_back(j);
      vals.push_back(total == kept ? w : w / kept);
    }
    row_ptr.push_back(cols.size());
  }
  return UlamOperator(n, dom, std::move(row_ptr), std::move(cols), std::move(vals));
}

InvariantDensityResult invariant_density(const UlamOperator& op, std::size_t window,
                                         std::size_t cap) {
  const std::size_t n = op.grid_n();
  if (window == 0) window = 1;
  std::vector<double> d(n, 1.0 / static_cast<double>(n)), next(n), check(n);
  std::deque<std::vector<double>> ring;
  ring.push_back(d);

  InvariantDensityResult result;
  std::vector<double> candidate;
  double residual = 0.0;
  for (std::size_t it = 1; it <= cap; ++it) {
    op.push_forward(d, next);
    normalize(next);
    const double step = l1_distance(next, d);
    d.swap(next);
    ring.push_back(d);
    if (ring.size() > window) ring.pop_front();
    bool try_candidate = false;
    if (step <= kResidualTarget) {
      candidate = d;
      try_candidate = true;
    } else if (ring.size() == window && it % window == 0) {
      // summed afresh: a running sum drifts at the 1e-10 level
      candidate.assign(n, 0.0);
      for (const auto& v : ring) {
        for (std::size_t i = 0; i < n; ++i) candidate[i] += v[i];
      }
      normalize(candidate);
      try_candidate = true;
    }
    if (!try_candidate) continue;
    op.push_forward(candidate, check);
    residual = l1_distance(check, candidate);
    if (residual <= kResidualTarget) {
      result.iterations = it;
      break;
    }
  }
  if (result.iterations == 0) {
    throw ConvergenceError("invariant density did not converge within " + std::to_string(cap) +
                               " iterations",
                           residual);
  }

  const double h = op.cell_width();
  std::vector<double> bp(n + 1), values(n);
  for (std::size_t k = 0; k < n; ++k) {
    bp[k] = op.cell_lo(k);
    values[k] = candidate[k] / h;
    if (values[k] < kDensityZero) values[k] = 0.0;
  }
  bp[n] = op.domain().hi;
  result.mass = candidate;
  result.residual = residual;
  result.density = PAF::step(std::move(bp), values).simplified(0.0);
  return result;
}

int detect_periodicity(const UlamOperator& op, double eps, std::size_t cap) {
  constexpr std::size_t kMaxPeriod = 256;
  constexpr std::size_t kConfirm = 4;  // periods observed before accepting
  constexpr std::size_t kBurnIn = 2048;
  const std::size_t n = op.grid_n();
  // Start from the heaviest cell after a burn-in from uniform; it lies in a
  // cyclic class even when the invariant vector itself mixes slowly.
  std::vector<double> d(n, 1.0 / static_cast<double>(n)), next(n);
  for (std::size_t it = 0; it < kBurnIn; ++it) {
    op.push_forward(d, next);
    normalize(next);
    d.swap(next);
  }
  const std::size_t start =
      static_cast<std::size_t>(std::max_element(d.begin(), d.end()) - d.begin());
  std::fill(d.begin(), d.end(), 0.0);
  d[start] = 1.0;
  std::deque<Support> history;
  const std::size_t keep = kMaxPeriod * (kConfirm + 1);
  for (std::size_t it = 0; it < cap; ++it) {
    op.push_forward(d, next);
    normalize(next);
    d.swap(next);
    history.push_back(support_of(d, eps));
    if (history.size() > keep) history.pop_front();
    const std::size_t len = history.size();
    for (std::size_t r = 1; r <= kMaxPeriod && r * (kConfirm + 1) <= len; ++r) {
      bool periodic = true;
      for (std::size_t t = len - r * kConfirm; t < len && periodic; ++t) {
        periodic = history[t] == history[t - r];
      }
      if (periodic) return static_cast<int>(r);
    }
  }
  throw DetectionError("no periodic support pattern within " + std::to_string(cap) + " steps");
}

PeriodDetection detect_periodicity_refined(const PiecewiseLinearMap& map, std::size_t grid,
                                          std::size_t max_grid, double eps) {
  PeriodDetection out;
  int previous = detect_periodicity(ulam_matrix(map, grid), eps);
  out.history.push_back({grid, previous});
  while (2 * grid <= max_grid) {
    grid *= 2;
    const int p = detect_periodicity(ulam_matrix(map, grid), eps);
    out.history.push_back({grid, p});
    if (p == previous) {
      out.period = p;
      out.grid = grid / 2;
      return out;
    }
    previous = p;
  }
  throw DetectionError("detected period did not stabilize up to grid " + std::to_string(max_grid));
}

PAF tent_core_density(double a, std::size_t grid) {
  const PAF core = invariant_density(ulam_matrix(tent_core_map(a), grid)).density;
  const Interval dom(-1.0, 1.0);
  const Interval c = core.domain();
  if (c.lo <= dom.lo && c.hi >= dom.hi) return core;
  std::vector<double> bp;
  std::vector<AffinePiece> pieces;
  if (c.lo > dom.lo) {
    bp.push_back(dom.lo);
    pieces.push_back({});
  }
  bp.insert(bp.end(), core.breakpoints().begin(), core.breakpoints().end() - 1);
  pieces.insert(pieces.end(), core.pieces().begin(), core.pieces().end());
  bp.push_back(c.hi);
  if (c.hi < dom.hi) {
    bp.push_back(dom.hi);
    pieces.push_back({});
  }
  return PAF(std::move(bp), std::move(pieces));
}

PAF tent_density_recursive(double a, std::size_t base_grid) {
  const TentParams p = TentParams::from(a);
  const PAF base = tent_core_density(tent_window_top(a), base_grid);
  return p.m == 0 ? base : tent_density_lift(a, base);
}

PAF tent_density_lift(double a, const PAF& base) {
  validate_tent_parameter(a);
  if (a > std::sqrt(2.0)) return base;
  const PAF inner = tent_density_lift(tent_square(a), base);
  const double xs = tent_fixed_point(a);
  const Interval dom(-1.0, 1.0);
  const Conjugacy c0 = conjugacy(a, 0);
  const Conjugacy c1 = conjugacy(a, 1);
  const PAF part0 = pull_back(inner, c0.forward, c0.source, dom, a / (2.0 * xs));
  const PAF part1 = pull_back(inner, c1.forward, c1.source, dom, 1.0 / (2.0 * xs));
  return (part0 + part1).simplified(0.0);
}

void validate_density(const PAF& g, double tol) {
  if (g.min_value() < 0.0) throw DomainError("density takes negative values");
  if (std::fabs(g.integral() - 1.0) > tol) {
    throw DomainError("density does not integrate to 1 (integral " +
                      std::to_string(g.integral()) + ")");
  }
}

double mass_on(const PAF& g, const Interval& part) { return g.integral(part); }

}  // namespace ergclt
