#include "rsmooth/fsv.hpp"

#include "rsmooth/errors.hpp"

#include <cmath>

namespace rsmooth {

namespace {

std::span<const double> flat(const Vector& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

void require_conforming(const Vector& x, const Matrix& Q) {
  if (Q.cols() != x.size()) throw DimensionError("fsv: Q and x do not conform");
}

}  // namespace

Vector fsv_planted_vector(Index n, Index m) {
  Vector e = Vector::Zero(m);
  e.head(n).setOnes();
  return e;
}

FsvInstance gen_fsv_instance(Index n, Index m, Rng& rng) {
  if (n < 1) throw DomainError("gen_fsv_instance: n must be >= 1");
  if (m <= n) throw DomainError("gen_fsv_instance: m must exceed n");
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix W(m, n);
  W.col(0) = fsv_planted_vector(n, m);
  for (Index j = 1; j < n; ++j)
    for (Index i = 0; i < m; ++i) W(i, j) = normal(rng);

  for (Index j = 0; j < n; ++j) {
    for (int pass = 0; pass < 2; ++pass) {
      for (Index i = 0; i < j; ++i) W.col(j) -= W.col(i).dot(W.col(j)) * W.col(i);
    }
    const double nrm = W.col(j).norm();
    if (!(nrm > 1e-12)) throw DomainError("gen_fsv_instance: degenerate random subspace");
    W.col(j) /= nrm;
  }
  return FsvInstance{std::move(W), n, m};
}

double fsv_objective(const Vector& x, const Matrix& Q, double mu, SmoothingKind kind) {
  require_conforming(x, Q);
  const Vector z = Q * x;
  return separable_l1_value(flat(z), mu, kind);
}

Vector fsv_euclidean_gradient(const Vector& x, const Matrix& Q, double mu, SmoothingKind kind) {
  require_conforming(x, Q);
  const Vector z = Q * x;
  return Q.transpose() * separable_l1_gradient(flat(z), mu, kind);
}

SmoothedObjective fsv_smoothed_objective(const Matrix& Q, SmoothingKind kind) {
  if (kind == SmoothingKind::lse) throw DomainError("fsv: lse does not smooth the l1 norm");
  return SmoothedObjective{
      Manifold::sphere(Q.cols()),
      [Q, kind](const Matrix& x, double mu) { return fsv_objective(x.col(0), Q, mu, kind); },
      [Q, kind](const Matrix& x, double mu) -> Matrix {
        return fsv_euclidean_gradient(x.col(0), Q, mu, kind);
      },
  };
}

Index truncated_support_size(std::span<const double> z, double tau) {
  if (!(tau > 0.0)) throw DomainError("truncated_support_size: tau must be > 0");
  Index count = 0;
  for (double zi : z) {
    if (std::abs(zi) >= tau) ++count;
  }
  return count;
}

SolverConfig fsv_default_config(SubAlgorithm algo) {
  SolverConfig cfg;
  cfg.mu0 = 1.0;
  cfg.theta = 0.5;
  cfg.delta_rule = GeometricDelta{0.1, 0.5};
  cfg.mode = SmoothingMode::enhanced;
  cfg.sub_algorithm = algo;
  cfg.max_total_iters = 5000;
  cfg.inner_iter_cap = 1000;
  cfg.mu_min = 1e-10;
  return cfg;
}

FsvResult fsv_solve(const FsvInstance& inst, const SolverConfig& cfg, SmoothingKind kind, Rng& rng,
                    bool nonnegative_start) {
  if (cfg.mode != SmoothingMode::enhanced) {
    throw DomainError("fsv_solve: requires the enhanced smoothing mode");
  }
  FsvResult out;
  out.x0 = random_sphere_point(inst.n, rng);
  if (nonnegative_start) {
    out.x0 = out.x0.cwiseAbs();
    out.x0 /= out.x0.norm();
  }

  SolveResult solved = solve_smoothed(fsv_smoothed_objective(inst.Q, kind), out.x0, cfg);
  out.x = solved.x.col(0);
  out.trace = std::move(solved.trace);
  out.status = solved.status;

  const Vector z = inst.Q * out.x;
  for (double tau : kFsvTaus) {
    const Index support = truncated_support_size(flat(z), tau);
    out.by_tau.push_back({tau, support, support == inst.n});
  }
  out.support_size = out.by_tau.front().support_size;
  out.success = out.by_tau.front().success;
  return out;
}

}  // namespace rsmooth
