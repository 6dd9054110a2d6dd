#include "rsmooth/cpfact.hpp"

#include "rsmooth/smoothing.hpp"

#include <cmath>
#include <span>
#include <sstream>

namespace rsmooth {

namespace {

std::span<const double> flat(const Matrix& m) {
  return {m.data(), static_cast<std::size_t>(m.size())};
}

Matrix symmetrized(const Matrix& A) { return 0.5 * (A + A.transpose()); }

Matrix boundary_base() {
  Matrix A(5, 5);
  A << 8, 5, 1, 1, 5,
       5, 8, 5, 1, 1,
       1, 5, 8, 5, 1,
       1, 1, 5, 8, 5,
       5, 1, 1, 5, 8;
  return A;
}

Matrix boundary_interior_factor() {
  Matrix M(5, 6);
  M << 1, 1, 0, 0, 0, 0,
       1, 0, 1, 0, 0, 0,
       1, 0, 0, 1, 0, 0,
       1, 0, 0, 0, 1, 0,
       1, 0, 0, 0, 0, 1;
  return M;
}

}  // namespace

std::string_view to_string(CpProvenance provenance) {
  switch (provenance) {
    case CpProvenance::random: return "random";
    case CpProvenance::structured: return "structured";
    case CpProvenance::boundary: return "boundary";
    case CpProvenance::easy_boundary: return "easy_boundary";
    case CpProvenance::file: return "file";
  }
  return "?";
}

std::string CpInstance::label() const {
  std::ostringstream out;
  out << to_string(provenance);
  if (provenance == CpProvenance::boundary) out << "(" << lambda << ")";
  out << "_n" << n();
  return out.str();
}

void validate_cp_matrix(const Matrix& A) {
  if (A.rows() != A.cols()) throw DimensionError("CP input must be square");
  if (A.size() == 0) throw DomainError("CP input is empty");
  if (!A.allFinite()) throw DomainError("CP input has non-finite entries");
  const double scale = std::max(1.0, A.cwiseAbs().maxCoeff());
  if ((A - A.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw DomainError("CP input is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(symmetrized(A), Eigen::EigenvaluesOnly);
  const Vector& ev = eig.eigenvalues();
  const double lmax = ev(ev.size() - 1);
  if (!(lmax > 0.0)) {
    if (A.isZero(0.0)) throw DomainError("CP input is the zero matrix");
    throw NotPsdError("CP input has no positive eigenvalue");
  }
  if (ev(0) < -1e-8 * lmax) {
    std::ostringstream msg;
    msg << "CP input is not positive semidefinite (lambda_min = " << ev(0)
        << ", lambda_max = " << lmax << ")";
    throw NotPsdError(msg.str());
  }
}

Index cp_upper_bound(Index n) {
  if (n < 1) throw DomainError("cp_upper_bound: n must be >= 1");
  if (n <= 4) return n;
  return n * (n + 1) / 2 - 4;
}

Matrix column_replicate(const Matrix& B, Index r_prime) {
  const Index r = B.cols();
  if (r < 1) throw DomainError("column_replicate: B has no columns");
  if (r_prime < r) throw DomainError("column_replicate: r_prime must be >= cols(B)");
  if (r_prime == r) return B;
  const Index copies = r_prime - r + 1;
  Matrix out(B.rows(), r_prime);
  out.leftCols(r - 1) = B.leftCols(r - 1);
  const Vector last = B.col(r - 1) / std::sqrt(static_cast<double>(copies));
  for (Index j = r - 1; j < r_prime; ++j) out.col(j) = last;
  return out;
}

InitialFactorization initial_factorization(const Matrix& A, Index r) {
  validate_cp_matrix(A);
  const Matrix S = symmetrized(A);
  const Index n = S.rows();
  Eigen::SelfAdjointEigenSolver<Matrix> eig(S);
  const Vector& ev = eig.eigenvalues();
  const double lmax = ev(n - 1);

  InitialFactorization out;
  Matrix B;
  if (ev(0) > 1e-10 * lmax) {
    Eigen::LLT<Matrix> llt(S);
    if (llt.info() == Eigen::Success) {
      B = llt.matrixL();
      out.cholesky = true;
      out.rank = n;
    }
  }
  if (!out.cholesky) {
    Index rank = 0;
    for (Index i = 0; i < n; ++i) {
      if (ev(i) > 1e-12 * lmax) ++rank;
    }
    B.resize(n, rank);
    // Largest eigenvalues first.
    for (Index j = 0; j < rank; ++j) {
      const Index src = n - 1 - j;
      B.col(j) = eig.eigenvectors().col(src) * std::sqrt(ev(src));
    }
    out.rank = rank;
  }
  if (r < out.rank) {
    throw RankError("initial_factorization: r = " + std::to_string(r) +
                    " is below the numerical rank " + std::to_string(out.rank));
  }
  out.Bbar = column_replicate(B, r);
  out.r = r;
  return out;
}

double cp_objective(const Matrix& X, const Matrix& Bbar, double mu) {
  if (Bbar.cols() != X.rows()) throw DimensionError("cp_objective: Bbar and X do not conform");
  const Matrix neg = -(Bbar * X);
  return lse_value(flat(neg), mu);
}

Matrix cp_euclidean_gradient(const Matrix& X, const Matrix& Bbar, double mu) {
  if (Bbar.cols() != X.rows()) {
    throw DimensionError("cp_euclidean_gradient: Bbar and X do not conform");
  }
  const Matrix neg = -(Bbar * X);
  Vector sigma;
  lse_value_and_gradient(flat(neg), mu, sigma);
  const Eigen::Map<const Matrix> weights(sigma.data(), neg.rows(), neg.cols());
  return -(Bbar.transpose() * weights);
}

SmoothedObjective cp_smoothed_objective(const Matrix& Bbar) {
  return SmoothedObjective{
      Manifold::orthogonal(Bbar.cols()),
      [Bbar](const Matrix& X, double mu) { return cp_objective(X, Bbar, mu); },
      [Bbar](const Matrix& X, double mu) { return cp_euclidean_gradient(X, Bbar, mu); },
  };
}

SolverConfig cp_default_config(SubAlgorithm algo) {
  SolverConfig cfg;
  cfg.mu0 = 100.0;
  cfg.theta = 0.8;
  cfg.delta_rule = AdaptiveDelta{0.5};
  cfg.mode = SmoothingMode::enhanced;
  cfg.sub_algorithm = algo;
  cfg.max_total_iters = 5000;
  cfg.inner_iter_cap = 1000;
  cfg.mu_min = 1e-10;
  return cfg;
}

namespace {

CpResult finish(const Matrix& A, const InitialFactorization& init, SolveResult solved) {
  CpResult out;
  out.X = std::move(solved.x);
  out.Bbar = init.Bbar;
  out.trace = std::move(solved.trace);
  out.status = solved.status;
  out.B = init.Bbar * out.X;
  out.min_entry = out.B.minCoeff();
  out.success = out.min_entry >= -kCpEntryTol;
  if (out.success) {
    out.B = out.B.unaryExpr([](double v) { return v < 0.0 ? 0.0 : v; });
  }
  out.residual = relative_residual(A, out.B);
  return out;
}

}  // namespace

CpResult cp_factorize(const Matrix& A, std::optional<Index> r, const SolverConfig& cfg, Rng& rng) {
  const Index cols = r.value_or(cp_upper_bound(A.rows()));
  const InitialFactorization init = initial_factorization(A, cols);
  const Matrix X0 = random_orthogonal(cols, rng);

  SolverConfig run = cfg;
  const Matrix& Bbar = init.Bbar;
  run.convergence_test = [&Bbar](const Matrix& X, const SolveTrace&) {
    return (Bbar * X).minCoeff() >= -kCpEntryTol;
  };
  return finish(A, init, solve_smoothed(cp_smoothed_objective(Bbar), X0, run));
}

CpResult maximin_entry_refine(const Matrix& A, Index r, const SolverConfig& cfg, Rng& rng,
                              long total_iter_budget) {
  const InitialFactorization init = initial_factorization(A, r);
  const Matrix X0 = random_orthogonal(r, rng);
  SolverConfig run = cfg;
  run.convergence_test = nullptr;
  run.max_total_iters = total_iter_budget;
  return finish(A, init, solve_smoothed(cp_smoothed_objective(init.Bbar), X0, run));
}

double relative_residual(const Matrix& A, const Matrix& B) {
  if (B.rows() != A.rows()) throw DimensionError("relative_residual: B has the wrong row count");
  const double scale = A.norm();
  const double diff = (A - B * B.transpose()).norm();
  return scale > 0.0 ? diff / scale : diff;
}

VerifyReport verify_factorization(const Matrix& A, const Matrix& B, double entry_tol,
                                  double residual_tol) {
  if (A.rows() != A.cols() || B.rows() != A.rows()) {
    throw DimensionError("verify_factorization: shapes do not conform");
  }
  VerifyReport report;
  report.min_entry = B.size() > 0 ? B.minCoeff() : 0.0;
  report.residual = relative_residual(A, B);
  report.entries_ok = report.min_entry >= -entry_tol;
  report.residual_ok = report.residual <= residual_tol;
  report.passed = report.entries_ok && report.residual_ok;
  return report;
}

// Instance families ----------------------------------------------------------

CpInstance gen_random_cp(Index n, Rng& rng) {
  if (n < 1) throw DomainError("gen_random_cp: n must be >= 1");
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix C(n, 2 * n);
  for (Index j = 0; j < C.cols(); ++j)
    for (Index i = 0; i < n; ++i) C(i, j) = std::abs(normal(rng));
  CpInstance inst;
  inst.A = symmetrized(C * C.transpose());
  inst.provenance = CpProvenance::random;
  inst.witness = std::move(C);
  return inst;
}

CpInstance gen_structured(Index n) {
  if (n < 2) throw DomainError("gen_structured: n must be >= 2");
  Matrix G = Matrix::Zero(n, n);
  G.block(0, 1, 1, n - 1).setOnes();
  G.block(1, 0, n - 1, 1).setOnes();
  G.block(1, 1, n - 1, n - 1).setIdentity();
  CpInstance inst;
  inst.A = G.transpose() * G;
  inst.provenance = CpProvenance::structured;
  inst.witness = G.transpose();
  return inst;
}

CpInstance gen_boundary(double lambda) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw DomainError("gen_boundary: lambda must be in [0, 1]");
  const Matrix M = boundary_interior_factor();
  CpInstance inst;
  inst.A = lambda * boundary_base() + (1.0 - lambda) * (M * M.transpose());
  inst.provenance = CpProvenance::boundary;
  inst.lambda = lambda;
  if (lambda == 0.0) inst.witness = M;
  return inst;
}

CpInstance easy_boundary_instance() {
  CpInstance inst;
  inst.A.resize(5, 5);
  inst.A << 41, 43, 80, 56, 50,
            43, 62, 89, 78, 51,
            80, 89, 162, 120, 93,
            56, 78, 120, 104, 62,
            50, 51, 93, 62, 65;
  inst.provenance = CpProvenance::easy_boundary;
  return inst;
}

}  // namespace rsmooth
