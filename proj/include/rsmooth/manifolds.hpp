#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>

namespace rsmooth {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;
using Rng = std::mt19937_64;

// ---------------------------------------------------------------------------
// Stiefel manifold St(n, p) = {X : X^T X = I_p}; p = n is the orthogonal group.
// ---------------------------------------------------------------------------

/// Orthogonal projector onto T_X St(n, p): V - X sym(X^T V).
Matrix stiefel_tangent_project(const Matrix& X, const Matrix& V);

/// QR retraction with the triangular factor's diagonal forced positive.
/// Returns X unchanged when V is exactly zero. Throws RetractionError if X + V
/// is numerically rank deficient.
Matrix stiefel_retract_qr(const Matrix& X, const Matrix& V);

/// max |X^T X - I|.
double stiefel_feasibility_error(const Matrix& X);

/// Uniformly oriented random n x p matrix with orthonormal columns, built by
/// modified Gram-Schmidt (with one reorthogonalization pass) on a Gaussian
/// matrix. Deterministic for a given generator state.
Matrix random_stiefel(Index n, Index p, Rng& rng);

/// Random element of O(r).
Matrix random_orthogonal(Index r, Rng& rng);

/// Polar factor U V^T of a square full-rank matrix, i.e. the closest
/// orthogonal matrix in Frobenius norm.
Matrix nearest_orthogonal(const Matrix& M);

// ---------------------------------------------------------------------------
// Unit sphere S^{n-1}.
// ---------------------------------------------------------------------------

Vector sphere_tangent_project(const Vector& x, const Vector& v);

/// Metric retraction (x + v) / ||x + v||.
Vector sphere_retract(const Vector& x, const Vector& v);

double sphere_feasibility_error(const Vector& x);

Vector random_sphere_point(Index n, Rng& rng);

// ---------------------------------------------------------------------------
// Uniform handle used by the solver. Points and tangent vectors are stored as
// dense matrices; sphere points are n x 1.
// ---------------------------------------------------------------------------

enum class ManifoldKind { stiefel, sphere };

class Manifold {
 public:
  static Manifold stiefel(Index n, Index p);
  static Manifold orthogonal(Index r) { return stiefel(r, r); }
  static Manifold sphere(Index n);

  ManifoldKind kind() const { return kind_; }
  Index rows() const { return rows_; }
  Index cols() const { return cols_; }
  /// Intrinsic dimension.
  Index dimension() const;

  Matrix project(const Matrix& x, const Matrix& v) const;
  Matrix retract(const Matrix& x, const Matrix& v) const;
  /// Projection-based vector transport of v onto T_{x_new}.
  Matrix transport(const Matrix& x_new, const Matrix& v) const { return project(x_new, v); }
  double inner(const Matrix& u, const Matrix& v) const;
  double norm(const Matrix& v) const { return v.norm(); }
  Matrix random_point(Rng& rng) const;
  /// Max-abs violation of the defining equations.
  double feasibility_error(const Matrix& x) const;
  /// Max-abs violation of the tangency equations at x.
  double tangency_error(const Matrix& x, const Matrix& v) const;

 private:
  Manifold(ManifoldKind kind, Index rows, Index cols) : kind_(kind), rows_(rows), cols_(cols) {}
  void check_shape(const Matrix& a, const char* what) const;

  ManifoldKind kind_;
  Index rows_;
  Index cols_;
};

/// grad f(x) = Proj_x(egrad).
inline Matrix riemannian_gradient(const Manifold& manifold, const Matrix& x, const Matrix& egrad) {
  return manifold.project(x, egrad);
}

inline Matrix transport(const Manifold& manifold, const Matrix& x_new, const Matrix& v) {
  return manifold.transport(x_new, v);
}

}  // namespace rsmooth
