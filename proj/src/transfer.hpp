#pragma once

#include <atomic>
#include <cstddef>
#include <functional>
#include <memory>
#include <vector>

#include "maps.hpp"
#include "piecewise.hpp"

namespace ergclt {

struct TransferOptions {
  double merge_tol = 1e-13;
  std::size_t piece_cap = 1'000'000;
  std::size_t projection_cells = std::size_t{1} << 14;
  double density_floor = 1e-12;
};

/// Perron-Frobenius operator of `map` with respect to Lebesgue measure:
/// Pf(x) = sum over branches of f(psi_b(x)) / |slope_b| on the branch image.
PAF perron_frobenius(const PiecewiseLinearMap& map, const PAF& f);

/// (1/a)(f o psi^- + f o psi^+) 1_{[-1, a-1]} for the tent map T_a.
PAF apply_fp_tent(double a, const PAF& f);

/// The three-term transfer operator of the non-ergodic example on [0,1].
PAF apply_fp_three_branch(const PAF& f);

using TransferFn = std::function<PAF(const PAF&)>;

/// P(f g*) / g* on {g* >= floor}, zero elsewhere.
PAF normalized_transfer(const TransferFn& perron, const PAF& gstar, const PAF& f,
                        double floor = 1e-12, std::size_t* masked = nullptr);

/// U_T f = f o T.
PAF koopman(const PiecewiseLinearMap& map, const PAF& f);

/// Normalized transfer operator P_T of a map with respect to an invariant
/// step density, together with the L^p(nu) quadrature it is paired with.
///
/// Results are pruned by merging neighbours whose lines agree to within
/// merge_tol * sup|f|; past `piece_cap` pieces a
/// result is projected onto a uniform grid and `projected()` turns true.
class NormalizedTransfer {
 public:
  NormalizedTransfer(PiecewiseLinearMap map, PAF nu, TransferOptions opts = {});

  const PiecewiseLinearMap& map() const { return map_; }
  const PAF& nu() const { return nu_; }
  const TransferOptions& options() const { return opts_; }

  PAF apply(const PAF& f) const;
  PAF apply_power(const PAF& f, std::size_t n) const;
  PAF koopman(const PAF& f) const;

  double integral(const PAF& f) const;
  double inner(const PAF& f, const PAF& g) const;
  double norm1(const PAF& f) const;
  double norm2(const PAF& f) const;
  // sup |f| over pieces where nu is positive
  double norm_inf(const PAF& f) const;

  std::size_t masked_pieces() const { return stats_->masked.load(); }
  bool projected() const { return stats_->projections.load() > 0; }

 private:
  struct Stats {
    std::atomic<std::size_t> masked{0};
    std::atomic<std::size_t> projections{0};
  };

  PAF prune(PAF f) const;

  PiecewiseLinearMap map_;
  PAF nu_;
  TransferOptions opts_;
  std::shared_ptr<Stats> stats_;
};

struct DecayFit {
  double theta = 0.0;
  double residual = 0.0;
  std::size_t points = 0;
};

/// Least-squares fit of log y_n ~ c + n log theta over the tail half of the
/// positive entries of `norms` (index n = position).  Exact zeros mean the
/// sequence terminated and give theta = 0.
DecayFit fit_geometric_decay(const std::vector<double>& norms);

struct ConditionReport {
  std::vector<double> V;               // V_n, n = 1..K
  std::vector<double> series_partial;  // sum_{k<=n} k^{-3/2} V_k
  std::vector<double> dyadic_partial;  // sum_{i<=j} 2^{-i/2} V_{2^i}
  std::vector<double> iterate_norms;   // ||P_T^n h||_2, n = 0..K-1
  std::vector<double> interp_bound;    // ||h||_inf^{1/2} ||P_T^n h||_1^{1/2}
  DecayFit decay_fit;
  double sandwich_ratio = 0.0;  // series_partial.back() / dyadic_partial.back()
  bool projected = false;
  std::size_t negligible_from = 0;  // first n treated as exactly zero, 0 if none
};

/// Finite-horizon diagnostics for the summability condition on
/// ||sum_{k<n} P_T^k h||_2.  h must be centered w.r.t. nu (1e-9), K >= 8.
ConditionReport condition_report(const PAF& h, const NormalizedTransfer& op, std::size_t K);

// Iterates below this fraction of sup|h| are dropped as zero.  K of them
// move V_n by at most K * 1e-13 * sup|h|, far inside every tolerance used.
inline constexpr double kNegligibleIterate = 1e-13;

}  // namespace ergclt
