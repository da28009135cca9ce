#include "clt.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "errors.hpp"

namespace ergclt {

namespace {

// Series stop once an iterate drops below this fraction of sup|h|; the
// dropped remainder still enters the geometric tail bound.
constexpr double kSeriesCutoff = 1e-13;

struct SeriesRun {
  std::vector<double> terms;   // <P^{sj} g, k>, j = 0..J
  std::vector<double> norms;   // ||P^{sj} g||_2
  bool vanished = false;       // an iterate was exactly zero
  bool cut = false;            // stopped below the cutoff
};

// Iterates g -> P_T^stride g and records <g, k> until J steps, an exact zero
// or the cutoff.
SeriesRun run_series(const PAF& g0, const PAF& k, const NormalizedTransfer& op, std::size_t stride,
                     std::size_t J, double scale) {
  SeriesRun run;
  PAF g = g0;
  run.terms.push_back(op.inner(g, k));
  run.norms.push_back(op.norm2(g));
  if (g.is_zero()) {
    run.vanished = true;
    return run;
  }
  const double cutoff = kSeriesCutoff * scale;
  for (std::size_t j = 1; j <= J; ++j) {
    g = op.apply_power(g, stride);
    if (g.is_zero()) {
      run.vanished = true;
      break;
    }
    run.terms.push_back(op.inner(g, k));
    run.norms.push_back(op.norm2(g));
    if (g.sup_abs() <= cutoff) {
      run.cut = true;
      break;
    }
  }
  return run;
}

// Geometric bound on sum_{j > J} ||P^{sj} g|| * knorm, from the fitted rate.
double geometric_tail(const SeriesRun& run, double knorm, DecayFit& fit) {
  if (run.vanished) {
    fit = DecayFit{};
    return 0.0;
  }
  fit = fit_geometric_decay(run.norms);
  if (fit.theta >= kMaxDecayRate) {
    throw NumericalError("iterates do not decay (fitted rate " + std::to_string(fit.theta) +
                         "); the series is not summable at this truncation");
  }
  return knorm * run.norms.back() * fit.theta / (1.0 - fit.theta);
}

double clamp_variance(double s2) {
  if (s2 >= 0.0) return s2;
  if (s2 >= -kNegativeClamp) return 0.0;
  throw NumericalError("variance estimate is negative (" + std::to_string(s2) +
                       "); truncation too aggressive");
}

double mass_of(const NormalizedTransfer& op, const std::vector<Interval>& parts) {
  double m = 0.0;
  for (const Interval& iv : parts) m += op.nu().integral(iv);
  return m;
}

// Ulam densities center h_a to about this; the mean comes from the same density.
constexpr double kCenterTol = 1e-6;

void require_centered(const PAF& h, const NormalizedTransfer& op) {
  const double m = op.integral(h);
  if (std::fabs(m) > kCenterTol * std::max(1.0, h.sup_abs())) {
    throw PreconditionError("observable is not centered: int h dnu = " + std::to_string(m));
  }
}

}  // namespace

Observable make_observable(PAF f, const PAF& nu, std::string label, double tol) {
  const double mean = integrate_weighted(f, nu);
  if (std::fabs(mean) > tol) {
    throw PreconditionError("observable is not centered (mean " + std::to_string(mean) + ")");
  }
  return {std::move(f), std::move(label)};
}

const char* method_name(VarianceMethod m) {
  switch (m) {
    case VarianceMethod::resolvent: return "resolvent";
    case VarianceMethod::autocov: return "autocov";
    case VarianceMethod::recursion: return "recursion";
    case VarianceMethod::monte_carlo: return "monte_carlo";
    case VarianceMethod::appendixB: return "appendixB";
  }
  return "unknown";
}

PAF restrict_to(const PAF& f, const std::vector<Interval>& parts) {
  PAF out = PAF::constant(f.domain(), 0.0);
  for (const Interval& iv : parts) out = out + f.restricted(iv);
  return out.simplified(0.0);
}

double mean_of_density(const PAF& g) {
  return integrate_weighted(PAF::affine(g.domain(), 1.0, 0.0), g);
}

double mean_recursion(double a, double top_mean) {
  validate_tent_parameter(a);
  if (a > std::sqrt(2.0)) return top_mean;
  const double inner = mean_recursion(tent_square(a), top_mean);
  const double xs = tent_fixed_point(a);
  return (a - 1.0) / (2.0 * a) - (a - 1.0) * xs / (2.0 * a) * inner;
}

double mean_ma(double a, std::size_t grid) {
  validate_tent_parameter(a);
  const double top = tent_window_top(a);
  const PAF g = tent_core_density(top, grid);
  return mean_recursion(a, mean_of_density(g));
}

NormalizedTransfer TentModel::transfer(TransferOptions opts) const {
  return NormalizedTransfer(map, density, opts);
}

Observable TentModel::h() const {
  std::string label = "tent(" + std::to_string(a) + ")";
  return make_observable(PAF::affine(Interval(-1.0, 1.0), 1.0, -mean), density, label, 1e-6);
}

TentModel tent_model_from_base(double a, const PAF& top_density) {
  TentModel m;
  m.a = a;
  m.params = TentParams::from(a);
  m.density = tent_density_lift(a, top_density);
  m.mean = mean_recursion(a, mean_of_density(top_density));
  m.cycle = support_cycle(a);
  m.map = tent_map(a);
  return m;
}

TentModel tent_model(double a, std::size_t grid) {
  const double top = tent_window_top(a);
  return tent_model_from_base(a, tent_core_density(top, grid));
}

Observable observable_ha(double a, std::size_t grid) { return tent_model(a, grid).h(); }

PAF blocked_observable(const PAF& h, const NormalizedTransfer& op, int r, bool* projected) {
  if (r < 1) throw DomainError("block length must be at least 1");
  const bool before = op.projected();
  PAF sum = h;
  PAF term = h;
  for (int k = 1; k < r; ++k) {
    term = op.koopman(term);
    sum = sum + term;
    sum = sum.simplified(op.options().merge_tol * sum.sup_abs());
  }
  if (projected) *projected = op.projected() && !before;
  return r == 1 ? sum : sum.scaled(1.0 / std::sqrt(static_cast<double>(r)));
}

double autocovariance(const PAF& h, const NormalizedTransfer& op, std::size_t j) {
  return op.inner(op.apply_power(h, j), h);
}

VarianceEstimate sigma2_resolvent(const PAF& h, const NormalizedTransfer& op, std::size_t J) {
  require_centered(h, op);
  VarianceEstimate est;
  est.method = VarianceMethod::resolvent;
  const SeriesRun run = run_series(h, h, op, 1, J, h.sup_abs());
  double s = run.terms.front();
  for (std::size_t n = 1; n < run.terms.size(); ++n) s += 2.0 * run.terms[n];
  est.terms = run.terms;
  est.truncation_J = run.terms.size() - 1;
  est.tail_bound = 2.0 * geometric_tail(run, op.norm2(h), est.decay_fit);
  est.sigma2 = clamp_variance(s);
  est.projected = op.projected();
  return est;
}

VarianceEstimate sigma2_autocov(const PAF& h, const NormalizedTransfer& op,
                                const std::vector<Interval>& first, int r, std::size_t J) {
  require_centered(h, op);
  VarianceEstimate est;
  est.method = VarianceMethod::autocov;
  bool projected = false;
  const PAF hr = blocked_observable(h, op, r, &projected);
  // the mean of h_r over each cycle interval vanishes exactly; remove the
  // discretization residue so the iterates decay instead of settling on it
  const PAF ind = restrict_to(PAF::constant(hr.domain(), 1.0), first);
  PAF g = restrict_to(hr, first);
  g = g - (op.integral(g) / op.integral(ind)) * ind;
  const SeriesRun run = run_series(g, hr, op, static_cast<std::size_t>(r), J, hr.sup_abs());
  double s = run.terms.front();
  for (std::size_t j = 1; j < run.terms.size(); ++j) s += 2.0 * run.terms[j];
  est.terms = run.terms;
  est.truncation_J = run.terms.size() - 1;
  est.tail_bound = 2.0 * r * geometric_tail(run, op.norm2(hr), est.decay_fit);
  est.sigma2 = clamp_variance(r * s);
  est.projected = projected || op.projected();
  return est;
}

VarianceEstimate sigma2_autocov(const PAF& h, const NormalizedTransfer& op,
                                const SupportCycle& cycle, std::size_t J) {
  VarianceEstimate est = sigma2_autocov(h, op, {cycle.intervals.front()}, cycle.period, J);
  est.per_interval.push_back(est.sigma2);
  for (std::size_t k = 1; k < cycle.intervals.size(); ++k) {
    est.per_interval.push_back(sigma2_autocov(h, op, {cycle.intervals[k]}, cycle.period, J).sigma2);
  }
  const auto [lo, hi] = std::minmax_element(est.per_interval.begin(), est.per_interval.end());
  est.interval_spread = *hi - *lo;
  return est;
}

double sigma_recursion(double a, const VarianceEstimate& base) {
  const int m = periodicity_exponent(a);
  if (m < 1) throw DomainError("variance recursion needs a <= sqrt 2; use the base formulas");
  double prod = 1.0;
  double p = a;  // a^{2^k}
  for (int k = 0; k < m; ++k) {
    prod *= (p - 1.0) * (p - 1.0);
    p = tent_square(p);
  }
  const double top = p;
  return std::sqrt(base.sigma2) * a * (a - 1.0) /
         (std::sqrt(std::ldexp(1.0, m)) * top * (top - 1.0)) * prod;
}

double sigma_recursion_product(double a, const VarianceEstimate& base) {
  const int m = periodicity_exponent(a);
  if (m < 1) throw DomainError("variance recursion needs a <= sqrt 2; use the base formulas");
  double prod = 1.0;
  double lift = 1.0;  // a^{2^m - 1}
  double p = a;
  for (int k = 0; k < m; ++k) {
    prod *= tent_fixed_point(p) * (p - 1.0);
    lift *= p;
    p = tent_square(p);
  }
  return std::sqrt(base.sigma2) / (std::sqrt(std::ldexp(1.0, m)) * lift) * prod;
}

EtaProfile eta_nonergodic(const PAF& h, const NormalizedTransfer& op,
                          const std::vector<ComponentSpec>& components, std::size_t J) {
  EtaProfile prof;
  prof.method = VarianceMethod::autocov;
  prof.truncation_J = J;
  for (const ComponentSpec& spec : components) {
    const VarianceEstimate est = sigma2_autocov(h, op, {spec.first}, spec.period, J);
    EtaComponent c;
    c.support = spec.support;
    c.mass = mass_of(op, spec.support);
    if (!(c.mass > 0.0)) throw DomainError("component carries no invariant mass");
    // sigma2_autocov already multiplies by r
    c.value = est.sigma2 / c.mass;
    c.tail_bound = est.tail_bound / c.mass;
    prof.components.push_back(std::move(c));
  }
  return prof;
}

EtaProfile eta_appendixB(const PAF& h, const NormalizedTransfer& op,
                         const std::vector<std::vector<Interval>>& partition, std::size_t J,
                         std::size_t lag_budget) {
  EtaProfile prof;
  prof.method = VarianceMethod::appendixB;
  prof.truncation_J = J;
  const std::size_t wanted = (std::size_t{2} << J) - 1;
  for (const auto& support : partition) {
    EtaComponent c;
    c.support = support;
    c.mass = mass_of(op, support);
    if (!(c.mass > 0.0)) throw DomainError("component carries no invariant mass");
    const PAF g = restrict_to(h, support);
    // gamma_m = int_C h h o T^m dnu
    const SeriesRun run = run_series(g, h, op, 1, std::min(wanted, lag_budget), h.sup_abs());
    const std::vector<double>& gamma = run.terms;
    const bool ended = run.vanished || run.cut;
    std::size_t levels = J;
    if (!ended) {
      const std::size_t have = gamma.size() - 1;
      levels = 0;
      while (levels < J && (std::size_t{4} << levels) - 1 <= have) ++levels;
      if ((std::size_t{2} << levels) - 1 > have) {
        throw NumericalError("lag budget too small for a single dyadic level");
      }
    }
    prof.truncation_J = std::min(prof.truncation_J, levels);
    double value = gamma.front();
    for (std::size_t j = 0; j <= levels; ++j) {
      const std::size_t N = std::size_t{1} << j;
      double cj = 0.0;
      const std::size_t top = std::min(2 * N - 1, gamma.size() - 1);
      for (std::size_t m = 1; m <= top; ++m) {
        cj += static_cast<double>(std::min(m, 2 * N - m)) * gamma[m];
      }
      value += cj / static_cast<double>(N);
      c.partial_sums.push_back(value / c.mass);
    }
    // limit - partial = 2 sum_k min(k/M, 1) gamma_k with M = 2^{levels+1}
    const double M = std::ldexp(1.0, static_cast<int>(levels) + 1);
    double tail = 0.0;
    for (std::size_t k = 1; k < gamma.size(); ++k) {
      tail += 2.0 * std::min(static_cast<double>(k) / M, 1.0) * std::fabs(gamma[k]);
    }
    DecayFit fit;
    tail += 2.0 * geometric_tail(run, op.norm2(h), fit);
    c.value = value / c.mass;
    c.tail_bound = tail / c.mass;
    if (c.value < 0.0) c.value = clamp_variance(c.value);
    prof.components.push_back(std::move(c));
  }
  return prof;
}

ChindSides chind_sides(double a, std::size_t n, std::size_t grid) {
  const int m = periodicity_exponent(a);
  if (m < 1) throw DomainError("the identity relates T_a to T_{a^2} and needs a <= sqrt 2");
  const int r = 1 << (m - 1);
  const double top = tent_window_top(a);
  const PAF base = tent_core_density(top, grid);
  const TentModel fine = tent_model_from_base(a, base);
  const TentModel coarse = tent_model_from_base(tent_square(a), base);

  auto side = [](const TentModel& model, int block, std::size_t lag) {
    const NormalizedTransfer op = model.transfer();
    const PAF hb = blocked_observable(model.h().f, op, block);
    PAF shifted = hb;
    for (std::size_t k = 0; k < lag; ++k) shifted = op.koopman(shifted);
    const PAF first = restrict_to(hb, {model.cycle.intervals.front()});
    return op.inner(first, shifted);
  };

  ChindSides s;
  const double xs = tent_fixed_point(a);
  s.factor = (1.0 - a) * (1.0 - a) * xs * xs / (4.0 * a * a);
  s.lhs = side(fine, 2 * r, static_cast<std::size_t>(2 * r) * n);
  s.rhs = s.factor * side(coarse, r, static_cast<std::size_t>(r) * n);
  return s;
}

}  // namespace ergclt
