#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "clt.hpp"
#include "maps.hpp"
#include "piecewise.hpp"
#include "transfer.hpp"

namespace ergclt {

/// Each orbit step adds uniform noise of this size relative to the domain
/// width.  Slope-2 maps with dyadic breakpoints otherwise lose one mantissa
/// bit per step and collapse onto a fixed point after ~53 iterations.
inline constexpr double kDitherFraction = 0x1p-50;

inline constexpr std::size_t kDefaultSteps = 4096;
inline constexpr std::size_t kDefaultPaths = 4000;
inline constexpr double kKsThreshold = 0.05;

/// Inverse-CDF draws from a piecewise-affine density; draw i uses stream i.
std::vector<double> sample_initial(const PAF& density, std::size_t count, std::uint64_t seed);

struct CltSample {
  std::size_t n = 0;
  std::vector<double> t_grid;
  std::vector<double> inits;
  std::vector<double> paths;  // row-major, paths x t_grid
  std::uint64_t seed = 0;
  std::string init_sampler;

  std::size_t num_paths() const { return inits.size(); }
  double at(std::size_t path, std::size_t k) const { return paths[path * t_grid.size() + k]; }
  // all path values at grid index k
  std::vector<double> column(std::size_t k) const;
};

struct SimulationOptions {
  bool dither = true;
};

/// w_n(t) = S_{[nt]} / sqrt n along orbits started at `inits`.  Path p draws
/// its dither from stream (seed, p).
CltSample partial_sum_paths(const PiecewiseLinearMap& map, const PAF& h, std::size_t n,
                            std::vector<double> t_grid, std::vector<double> inits,
                            std::uint64_t seed, SimulationOptions opts = {});

/// Weighted mixture of centered normals; variance 0 is a point mass at 0.
struct NormalMixture {
  std::vector<double> weights;
  std::vector<double> variances;

  static NormalMixture single(double variance) { return {{1.0}, {variance}}; }
  bool degenerate() const;
  std::string describe() const;
};

/// sum_i w_i Phi(x / sqrt(v_i t)).
double mixture_normal_cdf(const NormalMixture& mix, double t, double x);

struct GofReport {
  double ks_stat = 0.0;
  std::size_t sample_size = 0;
  NormalMixture target;
  double t = 1.0;
  std::string label;
  bool skipped = false;  // degenerate target, no test performed
};

/// One-sample sup distance between the empirical CDF and `cdf`.
double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf);
GofReport ks_report(const std::vector<double>& samples, const NormalMixture& target, double t,
                    std::string label = {});
/// Two-sample sup distance between empirical CDFs.
double ks_two_sample(std::vector<double> a, std::vector<double> b);

/// Mixture test at every positive grid time plus one test per component on
/// the paths whose initial point lies in it.
std::vector<GofReport> limit_law_check(const CltSample& sample, const EtaProfile& eta);

struct MaximalReport {
  std::size_t n = 0;
  int q = 0;
  double lhs = 0.0;
  double lhs_stderr = 0.0;
  double rhs = 0.0;
  double projection_norm = 0.0;  // ||f - U P f||_2
  double delta_q = 0.0;
  double margin = 0.0;  // (rhs - lhs) / stderr
  bool holds = false;   // lhs <= rhs + 3 stderr
};

/// Smallest q with n < 2^q.
int dyadic_order(std::size_t n);

/// sqrt n (3 ||f - U_T P_T f||_2 + 4 sqrt 2 Delta_q(f)).
struct MaximalRhs {
  double projection_norm = 0.0;
  double delta_q = 0.0;
  double value = 0.0;
};
MaximalRhs maximal_rhs(const PAF& f, const NormalizedTransfer& op, std::size_t n);

/// || max_{k<=n} |S_k| ||_2 over `inits` with delta-method stderr.
void maximal_lhs(const PiecewiseLinearMap& map, const PAF& f, std::size_t n,
                 const std::vector<double>& inits, std::uint64_t seed, double& lhs,
                 double& stderr_out, SimulationOptions opts = {});

MaximalReport maximal_inequality_check(const PiecewiseLinearMap& map, const PAF& f,
                                       const NormalizedTransfer& op, std::size_t n,
                                       std::size_t trials, std::uint64_t seed,
                                       SimulationOptions opts = {});

/// Right-hand sides for all observables spanned by a fixed set of step
/// cells: the required transfer iterates are computed once per cell and the
/// norms become quadratic forms in the coefficients.
class StepBasisRhs {
 public:
  StepBasisRhs(const NormalizedTransfer& op, std::vector<Interval> cells, std::size_t max_n);

  const std::vector<Interval>& cells() const { return cells_; }
  PAF function(const std::vector<double>& coeffs) const;
  MaximalRhs rhs(const std::vector<double>& coeffs, std::size_t n) const;

 private:
  double quad(const std::vector<double>& gram, const std::vector<double>& c) const;

  std::vector<Interval> cells_;
  Interval domain_;
  std::vector<double> proj_gram_;               // B x B
  std::vector<std::vector<double>> sum_gram_;   // level j: Gram of sum_{k=1}^{2^j} P^k e_b
};

}  // namespace ergclt
