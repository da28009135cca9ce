#include "transfer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "errors.hpp"

namespace ergclt {

PAF perron_frobenius(const PiecewiseLinearMap& map, const PAF& f) {
  const Interval dom = map.domain();
  PAF out = PAF::constant(dom, 0.0);
  bool first = true;
  for (const Branch& b : map.branches()) {
    const PAF part = pull_back(f, b.affine().inverse(), b.image(), dom, 1.0 / std::fabs(b.slope));
    out = first ? part : out + part;
    first = false;
  }
  return out;
}

PAF apply_fp_tent(double a, const PAF& f) {
  return perron_frobenius(tent_map(a), f).simplified(0.0);
}

PAF apply_fp_three_branch(const PAF& f) {
  return perron_frobenius(three_branch_example(), f).simplified(0.0);
}

PAF normalized_transfer(const TransferFn& perron, const PAF& gstar, const PAF& f, double floor,
                        std::size_t* masked) {
  return divide_step(perron(multiply_step(f, gstar)), gstar, floor, masked);
}

PAF koopman(const PiecewiseLinearMap& map, const PAF& f) { return compose(f, map); }

NormalizedTransfer::NormalizedTransfer(PiecewiseLinearMap map, PAF nu, TransferOptions opts)
    : map_(std::move(map)), nu_(std::move(nu)), opts_(opts), stats_(std::make_shared<Stats>()) {
  if (!nu_.is_step()) throw DomainError("invariant density must be a step function");
  const Interval a = map_.domain();
  const Interval b = nu_.domain();
  if (std::fabs(a.lo - b.lo) > 1e-12 || std::fabs(a.hi - b.hi) > 1e-12) {
    throw DomainError("density and map domains differ");
  }
}

PAF NormalizedTransfer::prune(PAF f) const {
  // relative to the function's own scale, so decaying iterates keep their shape
  const double tol = opts_.merge_tol * f.sup_abs();
  f = f.simplified(tol);
  if (f.size() > opts_.piece_cap) {
    stats_->projections.fetch_add(1);
    f = f.projected(opts_.projection_cells).simplified(tol);
  }
  return f;
}

PAF NormalizedTransfer::apply(const PAF& f) const {
  std::size_t masked = 0;
  PAF out = normalized_transfer([this](const PAF& g) { return perron_frobenius(map_, g); }, nu_, f,
                                opts_.density_floor, &masked);
  if (masked) stats_->masked.fetch_add(masked);
  return prune(std::move(out));
}

PAF NormalizedTransfer::apply_power(const PAF& f, std::size_t n) const {
  PAF g = f;
  for (std::size_t k = 0; k < n; ++k) g = apply(g);
  return g;
}

PAF NormalizedTransfer::koopman(const PAF& f) const { return prune(compose(f, map_)); }

double NormalizedTransfer::integral(const PAF& f) const { return integrate_weighted(f, nu_); }

double NormalizedTransfer::inner(const PAF& f, const PAF& g) const {
  return integrate_product(f, g, nu_);
}

double NormalizedTransfer::norm1(const PAF& f) const { return integrate_abs(f, nu_); }

double NormalizedTransfer::norm2(const PAF& f) const {
  return std::sqrt(std::max(0.0, integrate_product(f, f, nu_)));
}

double NormalizedTransfer::norm_inf(const PAF& f) const {
  double m = 0.0;
  const PAF masked = combine(f, nu_, [](const AffinePiece& p, const AffinePiece& q) {
    return q.intercept > 0.0 ? p : AffinePiece{};
  });
  m = masked.sup_abs();
  return m;
}

DecayFit fit_geometric_decay(const std::vector<double>& norms) {
  DecayFit fit;
  // terminated sequence: an exact zero after a nonzero start
  std::size_t end = norms.size();
  for (std::size_t i = 0; i < norms.size(); ++i) {
    if (norms[i] == 0.0) {
      end = i;
      break;
    }
  }
  if (end < norms.size() && end <= 2) return fit;  // theta = 0
  const std::size_t begin = end / 2;
  std::vector<double> xs, ys;
  for (std::size_t i = begin; i < end; ++i) {
    xs.push_back(static_cast<double>(i));
    ys.push_back(std::log(norms[i]));
  }
  fit.points = xs.size();
  if (xs.size() < 2) {
    fit.theta = end < norms.size() ? 0.0 : 1.0;
    return fit;
  }
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / ys.size();
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  const double slope = sxy / sxx;
  double ss = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = ys[i] - (my + slope * (xs[i] - mx));
    ss += r * r;
  }
  fit.theta = std::exp(slope);
  fit.residual = std::sqrt(ss / static_cast<double>(xs.size()));
  return fit;
}

ConditionReport condition_report(const PAF& h, const NormalizedTransfer& op, std::size_t K) {
  if (K < 8) throw PreconditionError("condition report needs K >= 8");
  const double mean = op.integral(h);
  if (std::fabs(mean) > 1e-9) {
    throw PreconditionError("observable is not centered (mean " + std::to_string(mean) + ")");
  }
  ConditionReport rep;
  const double h_inf = op.norm_inf(h);
  const double cutoff = kNegligibleIterate * h.sup_abs();
  PAF term = h;
  PAF partial = PAF::constant(h.domain(), 0.0);
  bool zero = false;
  double series = 0.0;
  for (std::size_t n = 1; n <= K; ++n) {
    // term = P_T^{n-1} h
    const double t2 = zero ? 0.0 : op.norm2(term);
    rep.iterate_norms.push_back(t2);
    rep.interp_bound.push_back(zero ? 0.0 : std::sqrt(h_inf * op.norm1(term)));
    if (!zero) {
      partial = partial + term;
      partial = partial.simplified(op.options().merge_tol * partial.sup_abs());
    }
    const double v = op.norm2(partial);
    rep.V.push_back(v);
    series += v / std::pow(static_cast<double>(n), 1.5);
    rep.series_partial.push_back(series);
    if (!zero && n < K) {
      term = op.apply(term);
      if (term.sup_abs() <= cutoff) {
        zero = true;
        if (!term.is_zero()) rep.negligible_from = n;
      }
    }
  }
  double dyadic = 0.0;
  for (std::size_t j = 0; (std::size_t{1} << j) <= K; ++j) {
    dyadic += rep.V[(std::size_t{1} << j) - 1] / std::pow(2.0, 0.5 * static_cast<double>(j));
    rep.dyadic_partial.push_back(dyadic);
  }
  rep.decay_fit = fit_geometric_decay(rep.iterate_norms);
  rep.sandwich_ratio = dyadic > 0.0 ? series / dyadic : 0.0;
  rep.projected = op.projected();
  return rep;
}

}  // namespace ergclt
