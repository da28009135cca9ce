#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "maps.hpp"

namespace ergclt {

struct AffinePiece {
  double slope = 0.0;
  double intercept = 0.0;

  double operator()(double x) const { return slope * x + intercept; }
  bool operator==(const AffinePiece&) const = default;
};

/// Function on an interval that is affine between consecutive breakpoints.
///
/// Breakpoints are strictly increasing and span the domain; piece k lives on
/// [bp[k], bp[k+1]) (the last piece is closed).  Values outside the domain are
/// zero, which is how densities and observables are extended.  Step functions
/// are the slope-zero special case and are used for invariant densities.
class PiecewiseAffineFunction {
 public:
  PiecewiseAffineFunction() = default;
  PiecewiseAffineFunction(std::vector<double> breakpoints, std::vector<AffinePiece> pieces);

  static PiecewiseAffineFunction constant(const Interval& domain, double value);
  static PiecewiseAffineFunction affine(const Interval& domain, double slope, double intercept);
  static PiecewiseAffineFunction step(std::vector<double> breakpoints, std::span<const double> values);
  // value on `part`, zero elsewhere in `domain`.
  static PiecewiseAffineFunction indicator(const Interval& domain, const Interval& part,
                                           double value = 1.0);

  Interval domain() const { return {bp_.front(), bp_.back()}; }
  std::size_t size() const { return pieces_.size(); }
  const std::vector<double>& breakpoints() const { return bp_; }
  const std::vector<AffinePiece>& pieces() const { return pieces_; }

  std::size_t piece_index(double x) const;
  double operator()(double x) const;

  bool is_step() const;
  // Every piece is exactly (0, 0).
  bool is_zero() const;

  double integral() const;
  double integral(const Interval& over) const;
  double sup_abs() const;
  double min_value() const;

  PiecewiseAffineFunction scaled(double c) const;
  PiecewiseAffineFunction plus_constant(double c) const;
  // f * 1_part, same domain.
  PiecewiseAffineFunction restricted(const Interval& part) const;
  // Merges neighbours describing the same line to within tol and drops
  // pieces narrower than the breakpoint resolution.
  PiecewiseAffineFunction simplified(double tol = 1e-13) const;
  // Per-cell L^2 projection onto affine functions on a uniform grid.
  PiecewiseAffineFunction projected(std::size_t cells) const;

 private:
  std::vector<double> bp_{0.0, 1.0};
  std::vector<AffinePiece> pieces_{AffinePiece{}};
};

using PAF = PiecewiseAffineFunction;

PAF operator+(const PAF& f, const PAF& g);
PAF operator-(const PAF& f, const PAF& g);
PAF operator*(double c, const PAF& f);

/// Pointwise combination on the union of breakpoints; `op` receives the two
/// pieces active on each common subinterval.
PAF combine(const PAF& f, const PAF& g,
            const std::function<AffinePiece(const AffinePiece&, const AffinePiece&)>& op);

/// f * s where s is a step function.
PAF multiply_step(const PAF& f, const PAF& s);

/// f / s on {s >= floor}, zero elsewhere.  `masked` counts pieces where f is
/// nonzero but s falls below the floor.
PAF divide_step(const PAF& f, const PAF& s, double floor, std::size_t* masked = nullptr);

/// x -> weight * f(psi(x)) for x in `target`, zero elsewhere in `domain`.
/// psi must map `target` into the domain of f.
PAF pull_back(const PAF& f, const AffineMap& psi, const Interval& target, const Interval& domain,
              double weight = 1.0);

/// f o T.
PAF compose(const PAF& f, const PiecewiseLinearMap& map);

/// Exact integrals against a piecewise-affine weight (Simpson on each common
/// piece, exact for the cubic integrands that arise).
double integrate_weighted(const PAF& f, const PAF& w);
double integrate_product(const PAF& f, const PAF& g, const PAF& w);
double integrate_abs(const PAF& f, const PAF& w);

// Breakpoints closer than this (relative to domain width) are identified.
inline constexpr double kBreakpointResolution = 1e-14;

}  // namespace ergclt
