#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "densities.hpp"
#include "maps.hpp"
#include "piecewise.hpp"
#include "transfer.hpp"

namespace ergclt {

// Series stop on their own once iterates vanish; near sqrt 2 that takes a few
// hundred lags, so the cap is set well above it.
inline constexpr std::size_t kDefaultLags = 1024;
inline constexpr std::size_t kDefaultDyadicLevels = 16;
// Lags computed for the dyadic series when the iterates never vanish.
inline constexpr std::size_t kDyadicLagBudget = std::size_t{1} << 12;
inline constexpr double kNegativeClamp = 1e-8;
inline constexpr double kMaxDecayRate = 0.999;

/// Centered observable.  `label` names the density it is centered against.
struct Observable {
  PAF f;
  std::string label;
};

/// Wraps f after checking |int f dnu| <= tol.
Observable make_observable(PAF f, const PAF& nu, std::string label, double tol = 1e-9);

enum class VarianceMethod { resolvent, autocov, recursion, monte_carlo, appendixB };
const char* method_name(VarianceMethod m);

struct VarianceEstimate {
  double sigma2 = 0.0;
  VarianceMethod method = VarianceMethod::resolvent;
  std::size_t truncation_J = 0;
  double tail_bound = 0.0;
  double std_error = 0.0;  // monte_carlo only
  DecayFit decay_fit;
  bool projected = false;
  std::vector<double> terms;  // summed series terms, method specific
  // autocov over a cycle: the estimate started from each Y_k, and max - min
  std::vector<double> per_interval;
  double interval_spread = 0.0;
};

struct EtaComponent {
  std::vector<Interval> support;
  double value = 0.0;
  double mass = 0.0;                  // nu(support)
  double tail_bound = 0.0;
  std::vector<double> partial_sums;   // appendixB: value after each level
};

struct EtaProfile {
  std::vector<EtaComponent> components;
  std::size_t truncation_J = 0;
  VarianceMethod method = VarianceMethod::autocov;
};

/// One ergodic component: its support, the first interval Y_{i,1} of its
/// cycle and the cycle length r_i.
struct ComponentSpec {
  std::vector<Interval> support;
  Interval first;
  int period = 1;
};

// --- tent family -----------------------------------------------------------

/// int y g(y) dy.
double mean_of_density(const PAF& g);

/// m_a from m_{a^{2^m}} by the mean recursion; `top_mean` belongs to
/// a^{2^m} = tent_window_top(a).
double mean_recursion(double a, double top_mean);

/// m_a: quadrature against the Ulam density when a > sqrt 2, else the
/// recursion from the window top.
double mean_ma(double a, std::size_t grid = kDefaultGrid);

/// Density, mean, support cycle and map for one tent parameter.
struct TentModel {
  double a = 2.0;
  TentParams params;
  PAF density;
  double mean = 0.0;
  SupportCycle cycle;
  PiecewiseLinearMap map = tent_map(2.0);

  NormalizedTransfer transfer(TransferOptions opts = {}) const;
  Observable h() const;
};

TentModel tent_model(double a, std::size_t grid = kDefaultGrid);
/// Same, with the density lifted from a precomputed density at a^{2^m}.
TentModel tent_model_from_base(double a, const PAF& top_density);

/// h_a(y) = y - m_a on [-1, 1].
Observable observable_ha(double a, std::size_t grid = kDefaultGrid);

// --- variance --------------------------------------------------------------

/// (1/sqrt r) sum_{k<r} h o T^k, by Koopman composition.  `projected` is set
/// when the piece cap forced a grid projection.
PAF blocked_observable(const PAF& h, const NormalizedTransfer& op, int r,
                       bool* projected = nullptr);

/// int (P_T^j h) h dnu.
double autocovariance(const PAF& h, const NormalizedTransfer& op, std::size_t j);

/// 2 int h f dnu - int h^2 dnu with f = sum_{n<=J} P_T^n h.  Stops early when
/// an iterate vanishes; throws NumericalError when the iterates do not decay.
VarianceEstimate sigma2_resolvent(const PAF& h, const NormalizedTransfer& op,
                                  std::size_t J = kDefaultLags);

/// r (c_0 + 2 sum_{j=1}^J c_j), c_j = int_{Y_1} h_r h_r o T^{rj} dnu.
VarianceEstimate sigma2_autocov(const PAF& h, const NormalizedTransfer& op,
                                const std::vector<Interval>& first, int r,
                                std::size_t J = kDefaultLags);
/// Cycle form: uses Y_1 and also fills per_interval from every Y_k, since
/// the conditional variance is only claimed constant across the cycle.
VarianceEstimate sigma2_autocov(const PAF& h, const NormalizedTransfer& op,
                                const SupportCycle& cycle, std::size_t J = kDefaultLags);

/// sigma(h_a) from sigma(h_{a^{2^m}})^2 = base.sigma2.  Requires a <= sqrt 2.
double sigma_recursion(double a, const VarianceEstimate& base);
/// Same quantity through the fixed-point product form.
double sigma_recursion_product(double a, const VarianceEstimate& base);

/// Per-component restricted autocovariance series, scaled by r_i / nu(Y_i).
EtaProfile eta_nonergodic(const PAF& h, const NormalizedTransfer& op,
                          const std::vector<ComponentSpec>& components,
                          std::size_t J = kDefaultLags);

/// Dyadic series E(h^2|I) + sum_{j<=J} E(S_N S_N o T^N | I) / N, N = 2^j, per
/// invariant component.  Lags past `lag_budget` are only used when the
/// iterates have vanished; otherwise the level count is reduced.
EtaProfile eta_appendixB(const PAF& h, const NormalizedTransfer& op,
                         const std::vector<std::vector<Interval>>& partition,
                         std::size_t J = kDefaultDyadicLevels,
                         std::size_t lag_budget = kDyadicLagBudget);

/// Both sides of the restricted autocovariance identity between T_a and
/// T_{a^2} at lag n, for a in a window with period 2r.
struct ChindSides {
  double lhs = 0.0;
  double rhs = 0.0;
  double factor = 0.0;
};
ChindSides chind_sides(double a, std::size_t n, std::size_t grid = kDefaultGrid);

/// Sum of f restricted to each interval.
PAF restrict_to(const PAF& f, const std::vector<Interval>& parts);

}  // namespace ergclt
