#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "maps.hpp"
#include "piecewise.hpp"

namespace ergclt {

inline constexpr std::size_t kDefaultGrid = 4096;
inline constexpr double kSupportEps = 1e-9;
inline constexpr std::size_t kPowerIterationCap = 100000;
inline constexpr double kResidualTarget = 1e-10;
// Cesaro window; every period 2^m with m <= 6 divides it.
inline constexpr std::size_t kCesaroWindow = 64;

/// Ulam discretization of the Perron-Frobenius operator on uniform cells.
///
/// Entry (i, j) is |C_i intersect T^{-1}(C_j)| / |C_i|, so rows are
/// probability vectors and mass vectors evolve as d -> d * M.
class UlamOperator {
 public:
  UlamOperator(std::size_t grid_n, Interval domain, std::vector<std::size_t> row_ptr,
               std::vector<std::size_t> cols, std::vector<double> vals);

  std::size_t grid_n() const { return grid_n_; }
  const Interval& domain() const { return domain_; }
  double cell_width() const { return domain_.length() / static_cast<double>(grid_n_); }
  double cell_lo(std::size_t k) const;
  double cell_hi(std::size_t k) const;

  std::span<const std::size_t> row_cols(std::size_t i) const;
  std::span<const double> row_vals(std::size_t i) const;
  double entry(std::size_t i, std::size_t j) const;
  std::size_t nonzeros() const { return vals_.size(); }

  // out = d * M, summed in fixed (column-major) order.
  void push_forward(std::span<const double> d, std::span<double> out) const;
  std::vector<double> push_forward(std::span<const double> d) const;

  double max_row_sum_error() const;

 private:
  std::size_t grid_n_;
  Interval domain_;
  std::vector<std::size_t> row_ptr_, cols_;
  std::vector<double> vals_;
  // transpose for push_forward
  std::vector<std::size_t> col_ptr_, rows_t_;
  std::vector<double> vals_t_;
};

UlamOperator ulam_matrix(const PiecewiseLinearMap& map, std::size_t n);

struct InvariantDensityResult {
  PAF density;               // step function on the grid
  std::vector<double> mass;  // per-cell probability
  double residual = 0.0;     // ||d M - d||_1
  std::size_t iterations = 0;
};

/// Fixed mass vector of the Ulam operator via Cesaro-averaged power iteration
/// from the uniform vector.  Throws ConvergenceError past the iteration cap.
InvariantDensityResult invariant_density(const UlamOperator& op,
                                         std::size_t window = kCesaroWindow,
                                         std::size_t cap = kPowerIterationCap);

/// Cycle length of the supports of d M^n for d concentrated on one cyclic
/// class.  Throws DetectionError when no cycle stabilizes within the cap.
int detect_periodicity(const UlamOperator& op, double eps = kSupportEps,
                       std::size_t cap = 20000);

struct PeriodDetection {
  int period = 0;
  std::size_t grid = 0;  // coarsest grid of the agreeing pair
  std::vector<std::pair<std::size_t, int>> history;
};

/// Runs detect_periodicity on ulam_matrix(map, grid), doubling the grid until
/// two successive grids report the same period.  Coarse grids can bridge gaps
/// between support intervals narrower than a few cells and undercount.
PeriodDetection detect_periodicity_refined(const PiecewiseLinearMap& map, std::size_t grid,
                                          std::size_t max_grid = std::size_t{1} << 16,
                                          double eps = kSupportEps);

/// Ulam density of T_a computed on the core interval [T_a^2(0), T_a(0)] with
/// `grid` cells and extended by zero to [-1, 1].  Requires a > sqrt 2 for the
/// result to be the invariant density on all of the core.
PAF tent_core_density(double a, std::size_t grid = kDefaultGrid);

/// Invariant density of T_a: the core Ulam density for a > sqrt 2, otherwise
/// built from the density at a^2 through the two affine conjugacies.
PAF tent_density_recursive(double a, std::size_t base_grid = kDefaultGrid);

/// Density of T_a obtained from `base`, the density at a^{2^m}, by m steps of
/// the conjugacy recursion.  Returns `base` itself when a > sqrt 2.
PAF tent_density_lift(double a, const PAF& base);

/// Checks nonnegativity and unit mass (tolerance on the integral).
void validate_density(const PAF& g, double tol = 1e-9);

/// Density mass per interval.
double mass_on(const PAF& g, const Interval& part);

}  // namespace ergclt
