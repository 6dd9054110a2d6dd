#include "rsmooth/manifolds.hpp"

#include "rsmooth/errors.hpp"

#include <cmath>
#include <string>

namespace rsmooth {

namespace {

void require_same_shape(const Matrix& a, const Matrix& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError(std::string(op) + ": shape mismatch (" + std::to_string(a.rows()) + "x" +
                         std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                         std::to_string(b.cols()) + ")");
  }
}

void require_same_length(const Vector& a, const Vector& b, const char* op) {
  if (a.size() != b.size()) {
    throw DimensionError(std::string(op) + ": length mismatch (" + std::to_string(a.size()) +
                         " vs " + std::to_string(b.size()) + ")");
  }
}

Matrix gaussian_matrix(Index n, Index p, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix G(n, p);
  // Column-major fill order is part of the determinism contract.
  for (Index j = 0; j < p; ++j) {
    for (Index i = 0; i < n; ++i) G(i, j) = normal(rng);
  }
  return G;
}

}  // namespace

Matrix stiefel_tangent_project(const Matrix& X, const Matrix& V) {
  require_same_shape(X, V, "stiefel_tangent_project");
  const Matrix XtV = X.transpose() * V;
  return V - X * (0.5 * (XtV + XtV.transpose()));
}

Matrix stiefel_retract_qr(const Matrix& X, const Matrix& V) {
  require_same_shape(X, V, "stiefel_retract_qr");
  if (V.isZero(0.0)) return X;

  const Index n = X.rows();
  const Index p = X.cols();
  const Matrix Y = X + V;
  Eigen::HouseholderQR<Matrix> qr(Y);
  const Matrix& packed = qr.matrixQR();
  Matrix Q = qr.householderQ() * Matrix::Identity(n, p);

  const double scale = Y.cwiseAbs().maxCoeff();
  for (Index j = 0; j < p; ++j) {
    const double rjj = packed(j, j);
    if (!std::isfinite(rjj) || std::abs(rjj) <= 1e-14 * scale) {
      throw RetractionError("stiefel_retract_qr: X + V is numerically rank deficient");
    }
    if (rjj < 0.0) Q.col(j) = -Q.col(j);
  }
  return Q;
}

double stiefel_feasibility_error(const Matrix& X) {
  const Index p = X.cols();
  return (X.transpose() * X - Matrix::Identity(p, p)).cwiseAbs().maxCoeff();
}

Matrix random_stiefel(Index n, Index p, Rng& rng) {
  if (n < 1 || p < 1 || p > n) {
    throw DomainError("random_stiefel: need 1 <= p <= n");
  }
  Matrix Q = gaussian_matrix(n, p, rng);
  for (Index j = 0; j < p; ++j) {
    // Modified Gram-Schmidt, repeated once to restore orthogonality lost to
    // cancellation.
    for (int pass = 0; pass < 2; ++pass) {
      for (Index i = 0; i < j; ++i) {
        Q.col(j) -= Q.col(i).dot(Q.col(j)) * Q.col(i);
      }
    }
    const double nrm = Q.col(j).norm();
    if (!(nrm > 1e-300)) throw DomainError("random_stiefel: degenerate Gaussian draw");
    Q.col(j) /= nrm;
  }
  return Q;
}

Matrix random_orthogonal(Index r, Rng& rng) {
  if (r < 1) throw DomainError("random_orthogonal: r must be >= 1");
  return random_stiefel(r, r, rng);
}

Matrix nearest_orthogonal(const Matrix& M) {
  if (M.rows() != M.cols()) throw DimensionError("nearest_orthogonal: matrix must be square");
  if (M.size() == 0) throw DomainError("nearest_orthogonal: empty matrix");
  Eigen::JacobiSVD<Matrix> svd(M, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vector& s = svd.singularValues();
  if (!(s(s.size() - 1) > 1e-14 * s(0))) {
    throw DomainError("nearest_orthogonal: rank-deficient input has no unique projection");
  }
  return svd.matrixU() * svd.matrixV().transpose();
}

Vector sphere_tangent_project(const Vector& x, const Vector& v) {
  require_same_length(x, v, "sphere_tangent_project");
  return v - x.dot(v) * x;
}

Vector sphere_retract(const Vector& x, const Vector& v) {
  require_same_length(x, v, "sphere_retract");
  if (v.isZero(0.0)) return x;
  const Vector y = x + v;
  const double nrm = y.norm();
  if (!(nrm >= 1e-300) || !std::isfinite(nrm)) {
    throw RetractionError("sphere_retract: degenerate retraction");
  }
  return y / nrm;
}

double sphere_feasibility_error(const Vector& x) { return std::abs(x.norm() - 1.0); }

Vector random_sphere_point(Index n, Rng& rng) {
  if (n < 1) throw DomainError("random_sphere_point: n must be >= 1");
  Vector v = gaussian_matrix(n, 1, rng).col(0);
  const double nrm = v.norm();
  if (!(nrm > 1e-300)) throw DomainError("random_sphere_point: degenerate Gaussian draw");
  return v / nrm;
}

// ---------------------------------------------------------------------------

Manifold Manifold::stiefel(Index n, Index p) {
  if (n < 1 || p < 1 || p > n) throw DomainError("Manifold::stiefel: need 1 <= p <= n");
  return Manifold(ManifoldKind::stiefel, n, p);
}

Manifold Manifold::sphere(Index n) {
  if (n < 1) throw DomainError("Manifold::sphere: n must be >= 1");
  return Manifold(ManifoldKind::sphere, n, 1);
}

Index Manifold::dimension() const {
  if (kind_ == ManifoldKind::sphere) return rows_ - 1;
  return rows_ * cols_ - cols_ * (cols_ + 1) / 2;
}

void Manifold::check_shape(const Matrix& a, const char* what) const {
  if (a.rows() != rows_ || a.cols() != cols_) {
    throw DimensionError(std::string("Manifold::") + what + ": expected " + std::to_string(rows_) +
                         "x" + std::to_string(cols_) + ", got " + std::to_string(a.rows()) + "x" +
                         std::to_string(a.cols()));
  }
}

Matrix Manifold::project(const Matrix& x, const Matrix& v) const {
  check_shape(x, "project");
  check_shape(v, "project");
  if (kind_ == ManifoldKind::sphere) return v - x.col(0).dot(v.col(0)) * x;
  return stiefel_tangent_project(x, v);
}

Matrix Manifold::retract(const Matrix& x, const Matrix& v) const {
  check_shape(x, "retract");
  check_shape(v, "retract");
  if (kind_ == ManifoldKind::sphere) return sphere_retract(x.col(0), v.col(0));
  return stiefel_retract_qr(x, v);
}

double Manifold::inner(const Matrix& u, const Matrix& v) const {
  check_shape(u, "inner");
  check_shape(v, "inner");
  return (u.array() * v.array()).sum();
}

Matrix Manifold::random_point(Rng& rng) const {
  if (kind_ == ManifoldKind::sphere) return random_sphere_point(rows_, rng);
  return random_stiefel(rows_, cols_, rng);
}

double Manifold::feasibility_error(const Matrix& x) const {
  check_shape(x, "feasibility_error");
  if (kind_ == ManifoldKind::sphere) return sphere_feasibility_error(x.col(0));
  return stiefel_feasibility_error(x);
}

double Manifold::tangency_error(const Matrix& x, const Matrix& v) const {
  check_shape(x, "tangency_error");
  check_shape(v, "tangency_error");
  if (kind_ == ManifoldKind::sphere) return std::abs(x.col(0).dot(v.col(0)));
  const Matrix XtV = x.transpose() * v;
  return (XtV + XtV.transpose()).cwiseAbs().maxCoeff();
}

}  // namespace rsmooth
