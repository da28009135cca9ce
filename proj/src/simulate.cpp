#include "simulate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "errors.hpp"
#include "parallel.hpp"
#include "rng.hpp"

namespace ergclt {

namespace {

// Initial points use even stream ids and path dither odd ones, so the two
// never share draws under one seed.
std::uint64_t init_stream(std::size_t i) { return 2 * static_cast<std::uint64_t>(i); }
std::uint64_t path_stream(std::size_t p) { return 2 * static_cast<std::uint64_t>(p) + 1; }

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

struct Stepper {
  const PiecewiseLinearMap& map;
  double lo, hi, dither;

  double operator()(double x, StreamRng& rng) const {
    double y = map(x);
    if (dither > 0.0) y += (rng.uniform() - 0.5) * dither;
    return std::clamp(y, lo, hi);
  }
};

Stepper make_stepper(const PiecewiseLinearMap& map, const SimulationOptions& opts) {
  const Interval d = map.domain();
  return {map, d.lo, d.hi, opts.dither ? kDitherFraction * d.length() : 0.0};
}

void check_inits(const PiecewiseLinearMap& map, const std::vector<double>& inits) {
  for (double x : inits) {
    if (!map.domain().contains(x)) {
      throw DomainError("initial point " + std::to_string(x) + " outside map domain");
    }
  }
}

}  // namespace

std::vector<double> sample_initial(const PAF& density, std::size_t count, std::uint64_t seed) {
  if (count < 1) throw DomainError("sample count must be at least 1");
  const auto& bp = density.breakpoints();
  const auto& pieces = density.pieces();
  std::vector<double> cum(pieces.size() + 1, 0.0);
  for (std::size_t k = 0; k < pieces.size(); ++k) {
    double m = density.integral(Interval(bp[k], bp[k + 1]));
    // rounding in summed series leaves pieces a few ulps below zero
    if (m < -1e-12) throw DomainError("density has negative mass on a piece");
    cum[k + 1] = cum[k] + std::max(m, 0.0);
  }
  const double total = cum.back();
  if (!(total > 0.0)) throw DomainError("density has no mass");

  std::vector<double> out(count);
  parallel_for(count, [&](std::size_t i) {
    StreamRng rng(seed, init_stream(i));
    const double target = rng.uniform() * total;
    std::size_t k = static_cast<std::size_t>(std::upper_bound(cum.begin(), cum.end(), target) -
                                             cum.begin());
    k = std::clamp<std::size_t>(k, 1, pieces.size()) - 1;
    while (k + 1 < pieces.size() && cum[k + 1] - cum[k] <= 0.0) ++k;
    // solve p0 t + (s/2) t^2 = rest on the piece, in the cancellation-free form
    const double x0 = bp[k];
    const double p0 = std::max(0.0, pieces[k](x0));
    const double s = pieces[k].slope;
    const double rest = std::max(0.0, target - cum[k]);
    const double disc = std::max(0.0, p0 * p0 + 2.0 * s * rest);
    const double denom = p0 + std::sqrt(disc);
    double t = denom > 0.0 ? 2.0 * rest / denom : 0.0;
    out[i] = std::clamp(x0 + t, bp[k], bp[k + 1]);
  });
  return out;
}

std::vector<double> CltSample::column(std::size_t k) const {
  std::vector<double> col(num_paths());
  for (std::size_t p = 0; p < col.size(); ++p) col[p] = at(p, k);
  return col;
}

CltSample partial_sum_paths(const PiecewiseLinearMap& map, const PAF& h, std::size_t n,
                            std::vector<double> t_grid, std::vector<double> inits,
                            std::uint64_t seed, SimulationOptions opts) {
  if (n < 1) throw DomainError("horizon n must be at least 1");
  for (double t : t_grid) {
    if (!(t >= 0.0 && t <= 1.0)) throw DomainError("grid times must lie in [0, 1]");
  }
  check_inits(map, inits);
  CltSample sample;
  sample.n = n;
  sample.seed = seed;
  sample.t_grid = std::move(t_grid);
  sample.inits = std::move(inits);
  const std::size_t T = sample.t_grid.size();
  sample.paths.assign(sample.num_paths() * T, 0.0);

  std::vector<std::size_t> stop(T);
  for (std::size_t k = 0; k < T; ++k) {
    stop[k] = std::min(n, static_cast<std::size_t>(std::floor(static_cast<double>(n) * sample.t_grid[k])));
  }
  std::vector<std::size_t> order(T);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return stop[a] < stop[b]; });

  const Stepper step = make_stepper(map, opts);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  parallel_for(sample.num_paths(), [&](std::size_t p) {
    StreamRng rng(seed, path_stream(p));
    double x = sample.inits[p];
    double s = 0.0;
    std::size_t next = 0;
    double* row = sample.paths.data() + p * T;
    for (std::size_t i = 0; i <= n; ++i) {
      while (next < T && stop[order[next]] == i) row[order[next++]] = s * scale;
      if (i == n || next == T) break;
      s += h(x);
      x = step(x, rng);
    }
  });
  return sample;
}

bool NormalMixture::degenerate() const {
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] > 0.0 && variances[i] > 0.0) return false;
  }
  return true;
}

std::string NormalMixture::describe() const {
  std::ostringstream os;
  os.precision(6);
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (i) os << " + ";
    os << weights[i] << "*N(0," << variances[i] << ")";
  }
  return os.str();
}

double mixture_normal_cdf(const NormalMixture& mix, double t, double x) {
  if (!(t > 0.0)) throw DomainError("mixture time t must be positive");
  if (mix.weights.size() != mix.variances.size()) throw DomainError("mixture size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < mix.weights.size(); ++i) {
    const double v = mix.variances[i] * t;
    if (v <= 0.0) {
      s += mix.weights[i] * (x >= 0.0 ? 1.0 : 0.0);
    } else {
      s += mix.weights[i] * normal_cdf(x / std::sqrt(v));
    }
  }
  return s;
}

double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf) {
  if (samples.size() < 2) throw DomainError("KS statistic needs at least 2 samples");
  std::sort(samples.begin(), samples.end());
  const double N = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double F = cdf(samples[i]);
    d = std::max({d, (static_cast<double>(i) + 1.0) / N - F, F - static_cast<double>(i) / N});
  }
  return std::clamp(d, 0.0, 1.0);
}

GofReport ks_report(const std::vector<double>& samples, const NormalMixture& target, double t,
                    std::string label) {
  GofReport r;
  r.sample_size = samples.size();
  r.target = target;
  r.t = t;
  r.label = std::move(label);
  if (target.degenerate() || !(t > 0.0)) {
    r.skipped = true;
    return r;
  }
  r.ks_stat = ks_statistic(samples, [&](double x) { return mixture_normal_cdf(target, t, x); });
  return r;
}

double ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw DomainError("two-sample KS needs nonempty samples");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::fabs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

std::vector<GofReport> limit_law_check(const CltSample& sample, const EtaProfile& eta) {
  const auto component_of = [&](double y) {
    for (std::size_t c = 0; c < eta.components.size(); ++c) {
      for (const Interval& iv : eta.components[c].support) {
        if (iv.contains(y)) return c;
      }
    }
    throw DomainError("initial point " + std::to_string(y) + " lies in no component");
  };
  std::vector<std::size_t> owner(sample.num_paths());
  for (std::size_t p = 0; p < owner.size(); ++p) owner[p] = component_of(sample.inits[p]);

  NormalMixture mix;
  double total = 0.0;
  for (const auto& c : eta.components) total += c.mass;
  for (const auto& c : eta.components) {
    mix.weights.push_back(c.mass / total);
    mix.variances.push_back(c.value);
  }

  std::vector<GofReport> out;
  for (std::size_t k = 0; k < sample.t_grid.size(); ++k) {
    const double t = sample.t_grid[k];
    if (!(t > 0.0)) continue;
    const std::vector<double> col = sample.column(k);
    out.push_back(ks_report(col, mix, t, "mixture"));
    if (eta.components.size() < 2) continue;
    for (std::size_t c = 0; c < eta.components.size(); ++c) {
      std::vector<double> part;
      for (std::size_t p = 0; p < col.size(); ++p) {
        if (owner[p] == c) part.push_back(col[p]);
      }
      if (part.size() < 2) continue;
      out.push_back(ks_report(part, NormalMixture::single(eta.components[c].value), t,
                              "component " + std::to_string(c)));
    }
  }
  return out;
}

int dyadic_order(std::size_t n) {
  if (n < 1) throw DomainError("n must be at least 1");
  int q = 0;
  while ((std::size_t{1} << q) <= n) ++q;
  return q;
}

MaximalRhs maximal_rhs(const PAF& f, const NormalizedTransfer& op, std::size_t n) {
  const int q = dyadic_order(n);
  MaximalRhs r;
  const PAF pf = op.apply(f);
  r.projection_norm = op.norm2(f - op.koopman(pf));
  PAF term = pf;
  PAF sum = pf;
  std::size_t k = 1;
  for (int j = 0; j < q; ++j) {
    const std::size_t target = std::size_t{1} << j;
    while (k < target) {
      term = op.apply(term);
      sum = sum + term;
      ++k;
    }
    r.delta_q += std::pow(2.0, -0.5 * j) * op.norm2(sum);
  }
  r.value = std::sqrt(static_cast<double>(n)) * (3.0 * r.projection_norm + 4.0 * std::sqrt(2.0) * r.delta_q);
  return r;
}

void maximal_lhs(const PiecewiseLinearMap& map, const PAF& f, std::size_t n,
                 const std::vector<double>& inits, std::uint64_t seed, double& lhs,
                 double& stderr_out, SimulationOptions opts) {
  check_inits(map, inits);
  const Stepper step = make_stepper(map, opts);
  std::vector<double> sq(inits.size());
  parallel_for(inits.size(), [&](std::size_t p) {
    StreamRng rng(seed, path_stream(p));
    double x = inits[p];
    double s = 0.0, m = 0.0;
    for (std::size_t k = 1; k <= n; ++k) {
      s += f(x);
      m = std::max(m, std::fabs(s));
      if (k < n) x = step(x, rng);
    }
    sq[p] = m * m;
  });
  const double N = static_cast<double>(sq.size());
  const double mean = std::accumulate(sq.begin(), sq.end(), 0.0) / N;
  double var = 0.0;
  for (double v : sq) var += (v - mean) * (v - mean);
  var /= std::max(1.0, N - 1.0);
  lhs = std::sqrt(mean);
  // delta method for the square root of a mean
  stderr_out = lhs > 0.0 ? std::sqrt(var / N) / (2.0 * lhs) : 0.0;
}

MaximalReport maximal_inequality_check(const PiecewiseLinearMap& map, const PAF& f,
                                       const NormalizedTransfer& op, std::size_t n,
                                       std::size_t trials, std::uint64_t seed,
                                       SimulationOptions opts) {
  MaximalReport rep;
  rep.n = n;
  rep.q = dyadic_order(n);
  const std::vector<double> inits = sample_initial(op.nu(), trials, seed);
  maximal_lhs(map, f, n, inits, seed, rep.lhs, rep.lhs_stderr, opts);
  const MaximalRhs rhs = maximal_rhs(f, op, n);
  rep.rhs = rhs.value;
  rep.projection_norm = rhs.projection_norm;
  rep.delta_q = rhs.delta_q;
  rep.margin = rep.lhs_stderr > 0.0 ? (rep.rhs - rep.lhs) / rep.lhs_stderr : 0.0;
  rep.holds = rep.lhs <= rep.rhs + 3.0 * rep.lhs_stderr;
  return rep;
}

StepBasisRhs::StepBasisRhs(const NormalizedTransfer& op, std::vector<Interval> cells,
                           std::size_t max_n)
    : cells_(std::move(cells)), domain_(op.nu().domain()) {
  const std::size_t B = cells_.size();
  if (B == 0) throw DomainError("step basis needs at least one cell");
  const int q = dyadic_order(max_n);
  std::vector<PAF> proj(B);
  std::vector<std::vector<PAF>> sums(B, std::vector<PAF>(q));
  parallel_for(B, [&](std::size_t b) {
    const PAF e = PAF::indicator(domain_, cells_[b]);
    const PAF pe = op.apply(e);
    proj[b] = e - op.koopman(pe);
    PAF term = pe, sum = pe;
    std::size_t k = 1;
    for (int j = 0; j < q; ++j) {
      const std::size_t target = std::size_t{1} << j;
      while (k < target) {
        term = op.apply(term);
        sum = sum + term;
        ++k;
      }
      sums[b][j] = sum;
    }
  });
  auto gram = [&](auto&& get) {
    std::vector<double> g(B * B);
    parallel_for(B, [&](std::size_t i) {
      for (std::size_t k = 0; k <= i; ++k) {
        g[i * B + k] = g[k * B + i] = op.inner(get(i), get(k));
      }
    });
    return g;
  };
  proj_gram_ = gram([&](std::size_t b) -> const PAF& { return proj[b]; });
  for (int j = 0; j < q; ++j) {
    sum_gram_.push_back(gram([&](std::size_t b) -> const PAF& { return sums[b][j]; }));
  }
}

PAF StepBasisRhs::function(const std::vector<double>& coeffs) const {
  PAF f = PAF::constant(domain_, 0.0);
  for (std::size_t b = 0; b < cells_.size(); ++b) {
    f = f + PAF::indicator(domain_, cells_[b], coeffs.at(b));
  }
  return f.simplified(0.0);
}

double StepBasisRhs::quad(const std::vector<double>& g, const std::vector<double>& c) const {
  const std::size_t B = cells_.size();
  double s = 0.0;
  for (std::size_t i = 0; i < B; ++i) {
    for (std::size_t k = 0; k < B; ++k) s += c[i] * g[i * B + k] * c[k];
  }
  return std::sqrt(std::max(0.0, s));
}

MaximalRhs StepBasisRhs::rhs(const std::vector<double>& coeffs, std::size_t n) const {
  const int q = dyadic_order(n);
  if (static_cast<std::size_t>(q) > sum_gram_.size()) {
    throw DomainError("basis was prepared for a smaller horizon");
  }
  MaximalRhs r;
  r.projection_norm = quad(proj_gram_, coeffs);
  for (int j = 0; j < q; ++j) r.delta_q += std::pow(2.0, -0.5 * j) * quad(sum_gram_[j], coeffs);
  r.value = std::sqrt(static_cast<double>(n)) * (3.0 * r.projection_norm + 4.0 * std::sqrt(2.0) * r.delta_q);
  return r;
}

}  // namespace ergclt
