#pragma once

#include "rsmooth/manifolds.hpp"
#include "rsmooth/smoothing.hpp"
#include "rsmooth/solver.hpp"

#include <array>
#include <span>
#include <vector>

namespace rsmooth {

/// Planted sparse vector problem: min ||Q x||_1 over the unit sphere in R^n,
/// where the columns of Q (m x n) span a subspace containing the vector with
/// n leading ones.
struct FsvInstance {
  Matrix Q;
  Index n = 0;
  Index m = 0;
};

/// Truncation thresholds used to count the support of Q x.
inline constexpr std::array<double, 8> kFsvTaus = {1e-5, 1e-6, 1e-7,  1e-8,
                                                   1e-9, 1e-10, 1e-11, 1e-12};

/// Orthonormalizes [e_planted, g_1, ..., g_{n-1}] (Gaussian g_i) by modified
/// Gram-Schmidt. Requires m > n >= 1.
FsvInstance gen_fsv_instance(Index n, Index m, Rng& rng);

/// The planted vector: n ones followed by m - n zeros.
Vector fsv_planted_vector(Index n, Index m);

double fsv_objective(const Vector& x, const Matrix& Q, double mu, SmoothingKind kind);
/// Q^T d with d_i = f~'((Q x)_i, mu).
Vector fsv_euclidean_gradient(const Vector& x, const Matrix& Q, double mu, SmoothingKind kind);
SmoothedObjective fsv_smoothed_objective(const Matrix& Q, SmoothingKind kind);

/// Number of entries with |z_i| >= tau.
Index truncated_support_size(std::span<const double> z, double tau);

/// Preset solver settings: mu0 = 1, theta = 0.5, delta_0 = 0.1, rho = 0.5.
SolverConfig fsv_default_config(SubAlgorithm algo = SubAlgorithm::bb);

struct TauOutcome {
  double tau = 0.0;
  Index support_size = 0;
  bool success = false;
};

struct FsvResult {
  Vector x;
  Vector x0;
  /// Support size and success at the first (loosest) threshold of kFsvTaus.
  Index support_size = 0;
  bool success = false;
  std::vector<TauOutcome> by_tau;
  SolveTrace trace;
  SolveStatus status = SolveStatus::mu_floor;
};

/// Solves from |random sphere point| (normalized), or from a signed random
/// point when nonnegative_start is false. Requires cfg.mode == enhanced.
FsvResult fsv_solve(const FsvInstance& inst, const SolverConfig& cfg, SmoothingKind kind, Rng& rng,
                    bool nonnegative_start = true);

}  // namespace rsmooth
