#pragma once

#include "rsmooth/errors.hpp"
#include "rsmooth/manifolds.hpp"

#include <functional>
#include <optional>
#include <string_view>
#include <variant>
#include <vector>

namespace rsmooth {

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

enum class SubAlgorithm { sd, bb, cg, rtr };

std::string_view to_string(SubAlgorithm algo);
/// Accepts "sd", "bb", "cg", "rtr" (case-insensitive). Throws ParseError.
SubAlgorithm parse_sub_algorithm(std::string_view name);

/// basic: each subproblem runs to the inner iteration cap.
/// enhanced: each subproblem stops once ||grad f~(x, mu_k)|| < delta_k.
enum class SmoothingMode { basic, enhanced };

/// delta_k = gamma * mu_k.
struct AdaptiveDelta {
  double gamma = 0.5;
};

/// delta_0 given, delta_{k+1} = rho * delta_k.
struct GeometricDelta {
  double delta0 = 0.1;
  double rho = 0.5;
};

using DeltaRule = std::variant<AdaptiveDelta, GeometricDelta>;

struct SolveTrace;

/// Final convergence test, evaluated on (point, trace so far).
using ConvergenceTest = std::function<bool(const Matrix& x, const SolveTrace& trace)>;

/// Instrumentation callbacks; both optional.
struct SolverHooks {
  /// Called before the subproblem of outer iteration k with its start point.
  std::function<void(int k, const Matrix& start, double mu)> on_outer_start;
  /// Called after every accepted inner step.
  std::function<void(const Matrix& x, double value)> on_iterate;
};

struct SolverConfig {
  double mu0 = 100.0;
  double theta = 0.8;
  DeltaRule delta_rule = AdaptiveDelta{};
  SmoothingMode mode = SmoothingMode::enhanced;
  SubAlgorithm sub_algorithm = SubAlgorithm::cg;
  /// Budget on inner iterations summed over all subproblems.
  long max_total_iters = 5000;
  int inner_iter_cap = 1000;
  double mu_min = 1e-10;
  /// Empty means "never converged"; the loop then ends on mu_min or budget.
  ConvergenceTest convergence_test;
  /// Also evaluate convergence_test after every accepted inner step, so a run
  /// can stop in the middle of a subproblem.
  bool test_every_iterate = false;
  SolverHooks hooks;

  /// Throws DomainError on an invalid combination.
  void validate() const;
  /// delta_k for this rule, given the current mu_k and previous delta.
  double next_delta(int k, double mu_k, double previous_delta) const;
};

// ---------------------------------------------------------------------------
// Objective and trace
// ---------------------------------------------------------------------------

/// f~(x, mu) on a manifold, with its Euclidean (ambient) gradient.
struct SmoothedObjective {
  Manifold manifold;
  std::function<double(const Matrix& x, double mu)> value;
  std::function<Matrix(const Matrix& x, double mu)> euclidean_gradient;

  Matrix riemannian_gradient(const Matrix& x, double mu) const {
    return manifold.project(x, euclidean_gradient(x, mu));
  }
};

/// Opt-in self-check: worst relative error between the directional derivative
/// <egrad, v> and a central difference of `value` along random ambient
/// directions v.
double gradient_self_check(const SmoothedObjective& obj, const Matrix& x, double mu, Rng& rng,
                           int probes = 10);

enum class InnerReason {
  tol_met,  ///< ||grad|| < grad_tol
  cap_hit,  ///< iteration cap (or stagnation, see `stagnated`)
  stopped,  ///< the caller's stop predicate fired
};

std::string_view to_string(InnerReason reason);

struct OuterRecord {
  int k = 0;
  double mu = 0.0;
  double delta = 0.0;
  double value = 0.0;      ///< f~(x^k, mu_k)
  double grad_norm = 0.0;  ///< ||grad f~(x^k, mu_k)||
  int inner_iters = 0;
  long total_iters = 0;  ///< cumulative, including this subproblem
  InnerReason reason = InnerReason::tol_met;
  bool stagnated = false;
};

struct SolveTrace {
  std::vector<OuterRecord> outer;

  long total_iters() const { return outer.empty() ? 0 : outer.back().total_iters; }
};

enum class SolveStatus { converged, mu_floor, iter_budget };

std::string_view to_string(SolveStatus status);

struct SolveResult {
  Matrix x;
  SolveTrace trace;
  SolveStatus status = SolveStatus::iter_budget;
};

/// The objective produced a non-finite value or gradient.
class NumericError : public Error {
 public:
  NumericError(const std::string& what, SolveTrace trace)
      : Error(what), trace_(std::move(trace)) {}
  const SolveTrace& trace() const { return trace_; }

 private:
  SolveTrace trace_;
};

// ---------------------------------------------------------------------------
// Outer loop
// ---------------------------------------------------------------------------

/// Riemannian smoothing method. Outer iteration k approximately minimizes
/// f~(., mu_k) from x^{k-1} with the configured sub-algorithm, evaluates the
/// convergence test, then sets mu_{k+1} = theta mu_k. Stops with `converged`,
/// `mu_floor` (mu_{k+1} < mu_min) or `iter_budget`.
SolveResult solve_smoothed(const SmoothedObjective& obj, const Matrix& x_init,
                           const SolverConfig& cfg);

// ---------------------------------------------------------------------------
// Sub-algorithms
// ---------------------------------------------------------------------------

struct InnerControl {
  std::function<bool(const Matrix& x)> stop;
  std::function<void(const Matrix& x, double value)> on_iterate;
};

struct InnerResult {
  Matrix x;
  double value = 0.0;
  double grad_norm = 0.0;
  int iters = 0;
  InnerReason reason = InnerReason::cap_hit;
  /// The line search (or trust region) could not make progress.
  bool stagnated = false;
};

/// Minimizes f~(., mu) from x_start. grad_tol <= 0 disables the gradient test.
InnerResult inner_solve(const SmoothedObjective& obj, const Matrix& x_start, double mu,
                        double grad_tol, int iter_cap, SubAlgorithm algo,
                        const InnerControl& control = {});

inline constexpr double kArmijoC = 1e-4;
inline constexpr double kArmijoShrink = 0.5;
inline constexpr int kArmijoMaxHalvings = 60;

struct LineSearchResult {
  bool ok = false;
  double step = 0.0;
  Matrix x;
  double value = 0.0;
  int halvings = 0;
};

/// Backtracking from `initial_step` until
/// f(R(x, t d)) <= f0 + kArmijoC * t * g0, halving up to 60 times.
/// Throws NotDescentError when g0 >= 0.
LineSearchResult armijo_linesearch(const Manifold& manifold,
                                   const std::function<double(const Matrix&)>& f, const Matrix& x,
                                   const Matrix& direction, double f0, double g0,
                                   double initial_step = 1.0);

inline constexpr double kBbMinStep = 1e-10;
inline constexpr double kBbMaxStep = 1e10;

struct BbStep {
  double step = 0.0;
  /// <s, y> was nonpositive or non-finite; the caller should fall back to its
  /// Armijo default.
  bool fallback = false;
  bool clamped = false;
};

/// BB1 step <s, s> / <s, y>, clamped to [1e-10, 1e10].
BbStep bb1_step(const Matrix& s, const Matrix& y);

/// BB1 on a manifold: s is the displacement x_cur - x_prev projected onto
/// T_{x_cur}; y = g_cur - g_prev_transported.
BbStep bb_step(const Manifold& manifold, const Matrix& x_prev, const Matrix& x_cur,
               const Matrix& g_prev_transported, const Matrix& g_cur);

/// CG state carried between iterations, already transported to the current
/// point (except the scalar ||g_prev||^2).
struct CgMemory {
  Matrix g_prev_transported;
  double g_prev_sqnorm = 0.0;
  Matrix d_prev_transported;
};

struct CgDirection {
  Matrix d;
  double beta = 0.0;
  bool restarted = false;
};

/// Polak-Ribiere+ direction with restart to -g when the result is not a
/// sufficiently steep descent direction. No memory means first iteration.
CgDirection cg_direction(const Matrix& g_cur, const std::optional<CgMemory>& memory);

/// Central-difference Riemannian Hessian-vector product along the retraction:
/// [P_x grad(R(x, h u)) - P_x grad(R(x, -h u))] / (2h) * ||v||, u = v/||v||,
/// h = 1e-5 (1 + ||x||).
Matrix fd_hessian_vector(const SmoothedObjective& obj, const Matrix& x, double mu,
                         const Matrix& v);

struct RtrStep {
  Matrix eta;
  Matrix hess_eta;
  bool hit_boundary = false;
  bool negative_curvature = false;
  int inner_iters = 0;
};

inline constexpr double kRtrInitialRadius = 1.0;
inline constexpr double kRtrMaxRadius = 100.0;
inline constexpr double kRtrAcceptRatio = 0.1;

/// Steihaug-Toint truncated CG on the model <g, eta> + 1/2 <eta, H eta>,
/// ||eta|| <= radius.
RtrStep rtr_solve_subproblem(const SmoothedObjective& obj, const Matrix& x, double mu,
                             double radius);
RtrStep rtr_solve_subproblem(const SmoothedObjective& obj, const Matrix& x, const Matrix& grad,
                             double mu, double radius);

}  // namespace rsmooth
