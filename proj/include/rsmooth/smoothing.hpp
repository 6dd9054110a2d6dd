#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace rsmooth {

/// Smoothing families. `lse` smooths max(x); the abs_* kinds smooth |t| and
/// act entrywise (separably) on vectors, smoothing the l1 norm.
///
///   abs_f1  piecewise quadratic: |t| if |t| > mu/2, else t^2/mu + mu/4
///   abs_f2  sqrt(mu^2 + t^2)
///   abs_f3  2 mu log(1 + exp(t/mu)) - t
///   abs_f4  t tanh(t/mu)
///   abs_f5  t erf(t/mu)
enum class SmoothingKind { lse, abs_f1, abs_f2, abs_f3, abs_f4, abs_f5 };

std::string_view to_string(SmoothingKind kind);
/// Accepts "lse", "f1".."f5" and "abs_f1".."abs_f5". Throws ParseError.
SmoothingKind parse_smoothing_kind(std::string_view name);

inline constexpr SmoothingKind kAbsKinds[] = {SmoothingKind::abs_f1, SmoothingKind::abs_f2,
                                              SmoothingKind::abs_f3, SmoothingKind::abs_f4,
                                              SmoothingKind::abs_f5};

/// Smallest smoothing parameter accepted by any operation.
inline constexpr double kMinMu = 1e-12;

/// Certified error envelope |f~(x, mu) - f(x)| <= kappa * omega(mu).
struct SmoothingFamily {
  SmoothingKind kind;
  double kappa;
  /// Strict decrease of f~(x, .) as mu decreases (approximation from above).
  bool satisfies_ap1;

  double omega(double mu) const { return mu; }
  double envelope(double mu) const { return kappa * omega(mu); }
};

/// `length` is the argument dimension; it only matters for lse (kappa = log n).
SmoothingFamily smoothing_family(SmoothingKind kind, std::size_t length = 1);

/// Throws DomainError unless mu is finite and mu >= kMinMu.
void require_valid_mu(double mu);

// LogSumExp ----------------------------------------------------------------

/// mu log sum exp(x_i / mu), evaluated with the max shift.
double lse_value(std::span<const double> x, double mu);

/// Softmax weights sigma(x, mu); the gradient of lse_value.
Eigen::VectorXd lse_gradient(std::span<const double> x, double mu);

/// Value and gradient in one pass.
double lse_value_and_gradient(std::span<const double> x, double mu, Eigen::VectorXd& sigma);

/// log(lse(x, mu) - max(x)), computed without forming the difference. Finite
/// for every x and mu > 0, which certifies the strict lower bound even where
/// the double-precision lse value has rounded onto max(x).
double lse_log_excess(std::span<const double> x, double mu);

// |t| smoothers ---------------------------------------------------------------

double abs_smoother_value(SmoothingKind kind, double t, double mu);
double abs_smoother_deriv(SmoothingKind kind, double t, double mu);

/// sum_i f~(z_i, mu) for an abs_* kind.
double separable_l1_value(std::span<const double> z, double mu, SmoothingKind kind);
Eigen::VectorXd separable_l1_gradient(std::span<const double> z, double mu, SmoothingKind kind);

// Uniform view -----------------------------------------------------------------

/// lse_value for lse, separable_l1_value for the abs kinds.
double smoothed_value(SmoothingKind kind, std::span<const double> x, double mu);
/// The nonsmooth function being smoothed: max(x) for lse, ||x||_1 otherwise.
double nonsmooth_value(SmoothingKind kind, std::span<const double> x);

// Approximation-from-above (AP1) check ---------------------------------------

struct Ap1Sample {
  std::vector<double> x;
  double mu_hi;
  double mu_lo;  ///< 0 < mu_lo < mu_hi
};

struct Ap1Report {
  std::size_t pairs = 0;
  /// Pairs where f~(x, mu_hi) > f(x), i.e. where a strict decrease is possible
  /// while staying above f.
  std::size_t active_pairs = 0;
  std::size_t strict_decreases = 0;
  /// Pairs with f~(x, mu_lo) > f~(x, mu_hi).
  std::size_t increases = 0;
  /// Active pairs where no strict decrease was observed.
  std::size_t active_without_decrease = 0;
  bool holds = false;
};

/// AP1 holds on the samples when no pair increases as mu shrinks and every
/// active pair strictly decreases. Pairs where the smoother already coincides
/// with f at mu_hi (f~1 outside |t| <= mu/2, or lse saturated in double
/// precision) admit no strict decrease and are not held against the family.
Ap1Report ap1_check(SmoothingKind kind, std::span<const Ap1Sample> samples);

/// Deterministic grid of moderate (x, mu_hi, mu_lo) triples: scalar points
/// in [-3, 3] for the abs kinds, 3-vectors for lse, mu from 1e-3 to 5.
std::vector<Ap1Sample> standard_ap1_grid(SmoothingKind kind);

}  // namespace rsmooth
