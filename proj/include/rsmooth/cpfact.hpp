#pragma once

#include "rsmooth/manifolds.hpp"
#include "rsmooth/solver.hpp"

#include <optional>
#include <string>
#include <string_view>

namespace rsmooth {

enum class CpProvenance { random, structured, boundary, easy_boundary, file };

std::string_view to_string(CpProvenance provenance);

/// A symmetric matrix to be factorized as A = B B^T with B >= 0.
struct CpInstance {
  Matrix A;
  CpProvenance provenance = CpProvenance::file;
  /// Mixing weight for the boundary family; 0 otherwise.
  double lambda = 0.0;
  /// A known nonnegative factor with A = W W^T, when the generator has one.
  std::optional<Matrix> witness;

  Index n() const { return A.rows(); }
  std::string label() const;
};

/// Success threshold on min(Bbar X).
inline constexpr double kCpEntryTol = 1e-15;
/// Residual bound expected of a successful factorization.
inline constexpr double kCpResidualTol = 1e-8;

/// Throws DimensionError for non-square input, DomainError when A is not
/// symmetric to 1e-12 (relative) and NotPsdError when an eigenvalue is below
/// -1e-8 lambda_max.
void validate_cp_matrix(const Matrix& A);

/// Upper bound on the cp-rank of any n x n CP matrix: n for n <= 4,
/// n(n+1)/2 - 4 for n >= 5.
Index cp_upper_bound(Index n);

/// Splits the last column of B into r_prime - cols(B) + 1 copies scaled by
/// 1/sqrt(m); B B^T is preserved.
Matrix column_replicate(const Matrix& B, Index r_prime);

struct InitialFactorization {
  Matrix Bbar;  ///< n x r, A = Bbar Bbar^T, generally with negative entries
  Index r = 0;
  Index rank = 0;
  bool cholesky = false;
};

/// Cholesky when A is numerically positive definite (lambda_min > 1e-10
/// lambda_max), otherwise the spectral factor V sqrt(Lambda) over eigenvalues
/// above 1e-12 lambda_max; then column replication to r columns.
InitialFactorization initial_factorization(const Matrix& A, Index r);

/// lse(vec(-Bbar X), mu), the smoothed max(-Bbar X).
double cp_objective(const Matrix& X, const Matrix& Bbar, double mu);
/// -Bbar^T Sigma with Sigma the softmax weights of -Bbar X.
Matrix cp_euclidean_gradient(const Matrix& X, const Matrix& Bbar, double mu);
SmoothedObjective cp_smoothed_objective(const Matrix& Bbar);

/// Preset solver settings: mu0 = 100, theta = 0.8, delta_k = 0.5 mu_k,
/// 5000 total iterations.
SolverConfig cp_default_config(SubAlgorithm algo = SubAlgorithm::cg);

struct CpResult {
  Matrix X;  ///< r x r orthogonal
  Matrix B;  ///< Bbar X with entries in [-kCpEntryTol, 0) set to zero
  Matrix Bbar;
  double min_entry = 0.0;  ///< min(Bbar X) before clamping
  double residual = 0.0;   ///< ||A - B B^T||_F / ||A||_F
  bool success = false;
  SolveTrace trace;
  SolveStatus status = SolveStatus::iter_budget;
};

/// Full pipeline: initial factorization, random orthogonal start drawn from
/// rng, smoothing solve with the test min(Bbar X) >= -1e-15. r defaults to
/// cp_upper_bound(n). Any convergence_test already in cfg is replaced.
CpResult cp_factorize(const Matrix& A, std::optional<Index> r, const SolverConfig& cfg, Rng& rng);

/// Keeps optimizing past feasibility for a fixed budget of total iterations,
/// driving up the smallest entry of the factor.
CpResult maximin_entry_refine(const Matrix& A, Index r, const SolverConfig& cfg, Rng& rng,
                              long total_iter_budget = 1000);

struct VerifyReport {
  bool passed = false;
  bool entries_ok = false;
  bool residual_ok = false;
  double min_entry = 0.0;
  double residual = 0.0;
};

/// min(B) >= -entry_tol and ||A - B B^T||_F / ||A||_F <= residual_tol.
VerifyReport verify_factorization(const Matrix& A, const Matrix& B, double entry_tol,
                                  double residual_tol);

double relative_residual(const Matrix& A, const Matrix& B);

// Instance families ----------------------------------------------------------

/// A = C C^T with C = |G|, G an n x 2n standard Gaussian matrix. The witness
/// C is retained.
CpInstance gen_random_cp(Index n, Rng& rng);

/// A_n = G^T G, G = [[0, e^T], [e, I_{n-1}]]; cp(A_n) = n. Requires n >= 2.
CpInstance gen_structured(Index n);

/// A_lambda = lambda A + (1 - lambda) C for the 5 x 5 boundary matrix A and
/// C = M M^T in the interior. Requires lambda in [0, 1].
CpInstance gen_boundary(double lambda);

/// Rank-3 5 x 5 matrix on the boundary of CP_5 with cp-rank 3.
CpInstance easy_boundary_instance();

}  // namespace rsmooth
