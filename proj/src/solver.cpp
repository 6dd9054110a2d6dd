#include "rsmooth/solver.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <string>

namespace rsmooth {

namespace {

bool finite(const Matrix& m) { return m.allFinite(); }

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

double frob_inner(const Matrix& a, const Matrix& b) { return (a.array() * b.array()).sum(); }

}  // namespace

std::string_view to_string(SubAlgorithm algo) {
  switch (algo) {
    case SubAlgorithm::sd: return "sd";
    case SubAlgorithm::bb: return "bb";
    case SubAlgorithm::cg: return "cg";
    case SubAlgorithm::rtr: return "rtr";
  }
  return "?";
}

SubAlgorithm parse_sub_algorithm(std::string_view name) {
  const std::string s = lower(name);
  if (s == "sd") return SubAlgorithm::sd;
  if (s == "bb") return SubAlgorithm::bb;
  if (s == "cg") return SubAlgorithm::cg;
  if (s == "rtr") return SubAlgorithm::rtr;
  throw ParseError("unknown sub-algorithm '" + std::string(name) + "'");
}

std::string_view to_string(InnerReason reason) {
  switch (reason) {
    case InnerReason::tol_met: return "tol_met";
    case InnerReason::cap_hit: return "cap_hit";
    case InnerReason::stopped: return "stopped";
  }
  return "?";
}

std::string_view to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::converged: return "converged";
    case SolveStatus::mu_floor: return "mu_floor";
    case SolveStatus::iter_budget: return "iter_budget";
  }
  return "?";
}

void SolverConfig::validate() const {
  if (!(mu0 > 0.0) || !std::isfinite(mu0)) throw DomainError("SolverConfig: mu0 must be > 0");
  if (!(theta > 0.0 && theta < 1.0)) throw DomainError("SolverConfig: theta must lie in (0, 1)");
  if (!(mu_min > 0.0)) throw DomainError("SolverConfig: mu_min must be > 0");
  if (!(mu_min < mu0)) throw DomainError("SolverConfig: mu_min must be < mu0");
  if (max_total_iters < 0) throw DomainError("SolverConfig: max_total_iters must be >= 0");
  if (inner_iter_cap < 1) throw DomainError("SolverConfig: inner_iter_cap must be >= 1");
  if (const auto* a = std::get_if<AdaptiveDelta>(&delta_rule)) {
    if (!(a->gamma > 0.0)) throw DomainError("SolverConfig: gamma must be > 0");
  } else {
    const auto& g = std::get<GeometricDelta>(delta_rule);
    if (!(g.delta0 > 0.0)) throw DomainError("SolverConfig: delta0 must be > 0");
    if (!(g.rho > 0.0 && g.rho < 1.0)) throw DomainError("SolverConfig: rho must lie in (0, 1)");
  }
}

double SolverConfig::next_delta(int k, double mu_k, double previous_delta) const {
  if (const auto* a = std::get_if<AdaptiveDelta>(&delta_rule)) return a->gamma * mu_k;
  const auto& g = std::get<GeometricDelta>(delta_rule);
  return k == 0 ? g.delta0 : g.rho * previous_delta;
}

double gradient_self_check(const SmoothedObjective& obj, const Matrix& x, double mu, Rng& rng,
                           int probes) {
  std::normal_distribution<double> normal(0.0, 1.0);
  const Matrix egrad = obj.euclidean_gradient(x, mu);
  const double h = 1e-6 * (1.0 + x.norm());
  double worst = 0.0;
  for (int p = 0; p < probes; ++p) {
    Matrix v(x.rows(), x.cols());
    for (Index j = 0; j < v.cols(); ++j)
      for (Index i = 0; i < v.rows(); ++i) v(i, j) = normal(rng);
    v /= v.norm();
    const double analytic = frob_inner(egrad, v);
    const double fd = (obj.value(x + h * v, mu) - obj.value(x - h * v, mu)) / (2.0 * h);
    const double scale = std::max({std::abs(analytic), std::abs(fd), egrad.norm(), 1e-12});
    worst = std::max(worst, std::abs(analytic - fd) / scale);
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Line search and direction rules
// ---------------------------------------------------------------------------

LineSearchResult armijo_linesearch(const Manifold& manifold,
                                   const std::function<double(const Matrix&)>& f, const Matrix& x,
                                   const Matrix& direction, double f0, double g0,
                                   double initial_step) {
  if (!(g0 < 0.0)) throw NotDescentError("armijo_linesearch: directional derivative must be < 0");
  LineSearchResult result;
  double t = initial_step > 0.0 && std::isfinite(initial_step) ? initial_step : 1.0;
  for (int halving = 0; halving <= kArmijoMaxHalvings; ++halving) {
    Matrix candidate;
    double value = std::numeric_limits<double>::infinity();
    try {
      candidate = manifold.retract(x, t * direction);
      value = f(candidate);
    } catch (const RetractionError&) {
      value = std::numeric_limits<double>::infinity();
    }
    if (std::isfinite(value) && value <= f0 + kArmijoC * t * g0) {
      result.ok = true;
      result.step = t;
      result.x = std::move(candidate);
      result.value = value;
      result.halvings = halving;
      return result;
    }
    t *= kArmijoShrink;
  }
  result.halvings = kArmijoMaxHalvings;
  return result;
}

BbStep bb1_step(const Matrix& s, const Matrix& y) {
  BbStep out;
  const double ss = frob_inner(s, s);
  const double sy = frob_inner(s, y);
  if (!std::isfinite(ss) || !std::isfinite(sy) || !(sy > 0.0)) {
    out.fallback = true;
    return out;
  }
  const double raw = ss / sy;
  out.step = std::clamp(raw, kBbMinStep, kBbMaxStep);
  out.clamped = out.step != raw;
  return out;
}

BbStep bb_step(const Manifold& manifold, const Matrix& x_prev, const Matrix& x_cur,
               const Matrix& g_prev_transported, const Matrix& g_cur) {
  const Matrix s = manifold.transport(x_cur, x_cur - x_prev);
  return bb1_step(s, g_cur - g_prev_transported);
}

CgDirection cg_direction(const Matrix& g_cur, const std::optional<CgMemory>& memory) {
  CgDirection out;
  if (!memory || !(memory->g_prev_sqnorm > 0.0)) {
    out.d = -g_cur;
    return out;
  }
  const double num = frob_inner(g_cur, g_cur - memory->g_prev_transported);
  out.beta = std::max(0.0, num / memory->g_prev_sqnorm);
  if (!std::isfinite(out.beta)) out.beta = 0.0;
  out.d = -g_cur + out.beta * memory->d_prev_transported;
  const double slope = frob_inner(out.d, g_cur);
  if (slope >= -1e-12 * out.d.norm() * g_cur.norm()) {
    out.d = -g_cur;
    out.beta = 0.0;
    out.restarted = true;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Trust region
// ---------------------------------------------------------------------------

Matrix fd_hessian_vector(const SmoothedObjective& obj, const Matrix& x, double mu,
                         const Matrix& v) {
  const Manifold& m = obj.manifold;
  const double vnorm = v.norm();
  if (vnorm == 0.0) return Matrix::Zero(x.rows(), x.cols());
  const Matrix u = v / vnorm;
  const double h = 1e-5 * (1.0 + x.norm());
  const Matrix xp = m.retract(x, h * u);
  const Matrix xm = m.retract(x, -h * u);
  const Matrix gp = m.transport(x, obj.riemannian_gradient(xp, mu));
  const Matrix gm = m.transport(x, obj.riemannian_gradient(xm, mu));
  return m.project(x, (vnorm / (2.0 * h)) * (gp - gm));
}

RtrStep rtr_solve_subproblem(const SmoothedObjective& obj, const Matrix& x, double mu,
                             double radius) {
  return rtr_solve_subproblem(obj, x, obj.riemannian_gradient(x, mu), mu, radius);
}

RtrStep rtr_solve_subproblem(const SmoothedObjective& obj, const Matrix& x, const Matrix& grad,
                             double mu, double radius) {
  if (!(radius > 0.0)) throw DomainError("rtr_solve_subproblem: radius must be > 0");
  const Manifold& m = obj.manifold;
  RtrStep step;
  step.eta = Matrix::Zero(x.rows(), x.cols());
  step.hess_eta = Matrix::Zero(x.rows(), x.cols());

  const double gnorm = grad.norm();
  if (gnorm == 0.0) return step;

  Matrix r = grad;
  Matrix delta = -r;
  double rr = gnorm * gnorm;
  const double stop_residual = gnorm * std::min(0.1, std::sqrt(gnorm));
  const Index max_inner = std::max<Index>(m.dimension(), 1);
  const double radius2 = radius * radius;

  for (Index j = 0; j < max_inner; ++j) {
    ++step.inner_iters;
    const Matrix hd = fd_hessian_vector(obj, x, mu, delta);
    const double curvature = frob_inner(delta, hd);
    const double alpha = rr / curvature;
    const Matrix trial = step.eta + alpha * delta;
    if (!(curvature > 0.0) || frob_inner(trial, trial) >= radius2) {
      // Move to the boundary along delta.
      const double a = frob_inner(delta, delta);
      const double b = 2.0 * frob_inner(step.eta, delta);
      const double c = frob_inner(step.eta, step.eta) - radius2;
      const double tau = (-b + std::sqrt(std::max(0.0, b * b - 4.0 * a * c))) / (2.0 * a);
      step.eta += tau * delta;
      step.hess_eta += tau * hd;
      step.hit_boundary = true;
      step.negative_curvature = !(curvature > 0.0);
      return step;
    }
    step.eta = trial;
    step.hess_eta += alpha * hd;
    r = m.project(x, r + alpha * hd);
    const double rr_new = frob_inner(r, r);
    if (std::sqrt(rr_new) <= stop_residual) return step;
    delta = -r + (rr_new / rr) * delta;
    rr = rr_new;
  }
  return step;
}

// ---------------------------------------------------------------------------
// Inner solvers
// ---------------------------------------------------------------------------

namespace {

struct InnerState {
  const SmoothedObjective& obj;
  double mu;
  double grad_tol;
  const InnerControl& control;

  double value(const Matrix& x) const { return obj.value(x, mu); }
  Matrix grad(const Matrix& x) const { return obj.riemannian_gradient(x, mu); }
  bool tol_met(double gnorm) const { return grad_tol > 0.0 && gnorm < grad_tol; }
};

InnerResult descent_solve(const InnerState& st, const Matrix& x_start, int iter_cap,
                          SubAlgorithm algo) {
  const Manifold& m = st.obj.manifold;
  const std::function<double(const Matrix&)> f = [&st](const Matrix& y) { return st.value(y); };

  InnerResult res;
  res.x = x_start;
  res.value = st.value(res.x);
  Matrix g = st.grad(res.x);
  res.grad_norm = g.norm();
  if (!std::isfinite(res.value) || !finite(g)) return res;
  if (st.tol_met(res.grad_norm)) {
    res.reason = InnerReason::tol_met;
    return res;
  }

  std::optional<CgMemory> cg_memory;
  Matrix x_prev;
  Matrix g_prev;
  double prev_step = 0.0;

  while (res.iters < iter_cap) {
    if (res.grad_norm == 0.0) {
      res.stagnated = true;
      break;
    }

    Matrix d;
    double initial_step = prev_step > 0.0 ? 2.0 * prev_step : 1.0;
    switch (algo) {
      case SubAlgorithm::cg: d = cg_direction(g, cg_memory).d; break;
      case SubAlgorithm::bb:
        d = -g;
        if (res.iters > 0) {
          const BbStep bb = bb_step(m, x_prev, res.x, m.transport(res.x, g_prev), g);
          if (!bb.fallback) initial_step = bb.step;
        }
        break;
      default: d = -g; break;
    }

    double slope = frob_inner(g, d);
    LineSearchResult ls = armijo_linesearch(m, f, res.x, d, res.value, slope, initial_step);
    if (!ls.ok && algo == SubAlgorithm::cg && !cg_direction(g, std::nullopt).d.isApprox(d)) {
      d = -g;
      slope = frob_inner(g, d);
      ls = armijo_linesearch(m, f, res.x, d, res.value, slope, initial_step);
    }
    if (!ls.ok) {
      res.stagnated = true;
      break;
    }

    x_prev = res.x;
    g_prev = g;
    prev_step = ls.step;
    res.x = std::move(ls.x);
    res.value = ls.value;
    g = st.grad(res.x);
    res.grad_norm = g.norm();
    ++res.iters;
    if (!finite(g)) return res;

    if (algo == SubAlgorithm::cg) {
      cg_memory = CgMemory{m.transport(res.x, g_prev), g_prev.squaredNorm(), m.transport(res.x, d)};
    }

    if (st.control.on_iterate) st.control.on_iterate(res.x, res.value);
    if (st.control.stop && st.control.stop(res.x)) {
      res.reason = InnerReason::stopped;
      return res;
    }
    if (st.tol_met(res.grad_norm)) {
      res.reason = InnerReason::tol_met;
      return res;
    }
  }
  res.reason = InnerReason::cap_hit;
  return res;
}

InnerResult trust_region_solve(const InnerState& st, const Matrix& x_start, int iter_cap) {
  const Manifold& m = st.obj.manifold;
  InnerResult res;
  res.x = x_start;
  res.value = st.value(res.x);
  Matrix g = st.grad(res.x);
  res.grad_norm = g.norm();
  if (!std::isfinite(res.value) || !finite(g)) return res;
  if (st.tol_met(res.grad_norm)) {
    res.reason = InnerReason::tol_met;
    return res;
  }

  double radius = kRtrInitialRadius;
  const double min_radius = 1e-16 * (1.0 + x_start.norm());

  while (res.iters < iter_cap) {
    if (res.grad_norm == 0.0) {
      res.stagnated = true;
      break;
    }

    RtrStep step;
    bool model_ok = false;
    for (int attempt = 0; attempt <= 10; ++attempt) {
      step = rtr_solve_subproblem(st.obj, res.x, g, st.mu, radius);
      if (finite(step.eta) && finite(step.hess_eta)) {
        model_ok = true;
        break;
      }
      radius *= 0.25;
    }
    if (!model_ok) {
      res.stagnated = true;
      break;
    }

    const double model_decrease =
        -(frob_inner(g, step.eta) + 0.5 * frob_inner(step.eta, step.hess_eta));
    Matrix candidate;
    double candidate_value = std::numeric_limits<double>::infinity();
    try {
      candidate = m.retract(res.x, step.eta);
      candidate_value = st.value(candidate);
    } catch (const RetractionError&) {
    }
    double rho = -std::numeric_limits<double>::infinity();
    if (std::isfinite(candidate_value) && model_decrease > 0.0) {
      rho = (res.value - candidate_value) / model_decrease;
    }

    if (rho < 0.25) {
      radius *= 0.25;
    } else if (rho > 0.75 && step.hit_boundary) {
      radius = std::min(2.0 * radius, kRtrMaxRadius);
    }
    ++res.iters;

    if (rho > kRtrAcceptRatio && candidate_value < res.value) {
      res.x = std::move(candidate);
      res.value = candidate_value;
      g = st.grad(res.x);
      res.grad_norm = g.norm();
      if (!finite(g)) return res;
      if (st.control.on_iterate) st.control.on_iterate(res.x, res.value);
      if (st.control.stop && st.control.stop(res.x)) {
        res.reason = InnerReason::stopped;
        return res;
      }
      if (st.tol_met(res.grad_norm)) {
        res.reason = InnerReason::tol_met;
        return res;
      }
    } else if (radius < min_radius) {
      res.stagnated = true;
      break;
    }
  }
  res.reason = InnerReason::cap_hit;
  return res;
}

}  // namespace

InnerResult inner_solve(const SmoothedObjective& obj, const Matrix& x_start, double mu,
                        double grad_tol, int iter_cap, SubAlgorithm algo,
                        const InnerControl& control) {
  if (!(mu > 0.0)) throw DomainError("inner_solve: mu must be > 0");
  if (iter_cap < 0) throw DomainError("inner_solve: iter_cap must be >= 0");
  const InnerState st{obj, mu, grad_tol, control};
  if (algo == SubAlgorithm::rtr) return trust_region_solve(st, x_start, iter_cap);
  return descent_solve(st, x_start, iter_cap, algo);
}

// ---------------------------------------------------------------------------
// Outer loop
// ---------------------------------------------------------------------------

SolveResult solve_smoothed(const SmoothedObjective& obj, const Matrix& x_init,
                           const SolverConfig& cfg) {
  cfg.validate();
  if (obj.manifold.feasibility_error(x_init) > 1e-10) {
    throw DomainError("solve_smoothed: initial point is not on the manifold");
  }

  SolveResult result;
  result.x = x_init;
  SolveTrace& trace = result.trace;

  InnerControl control;
  control.on_iterate = cfg.hooks.on_iterate;
  if (cfg.convergence_test && cfg.test_every_iterate) {
    control.stop = [&cfg, &trace](const Matrix& x) { return cfg.convergence_test(x, trace); };
  }

  double mu = cfg.mu0;
  double delta = 0.0;
  long total = 0;
  for (int k = 0;; ++k) {
    if (total >= cfg.max_total_iters) {
      result.status = SolveStatus::iter_budget;
      return result;
    }
    delta = cfg.next_delta(k, mu, delta);
    const double grad_tol = cfg.mode == SmoothingMode::enhanced ? delta : 0.0;
    const long remaining = cfg.max_total_iters - total;
    const int cap = static_cast<int>(std::min<long>(cfg.inner_iter_cap, remaining));

    if (cfg.hooks.on_outer_start) cfg.hooks.on_outer_start(k, result.x, mu);
    InnerResult inner = inner_solve(obj, result.x, mu, grad_tol, cap, cfg.sub_algorithm, control);
    total += inner.iters;

    OuterRecord rec;
    rec.k = k;
    rec.mu = mu;
    rec.delta = delta;
    rec.value = inner.value;
    rec.grad_norm = inner.grad_norm;
    rec.inner_iters = inner.iters;
    rec.total_iters = total;
    rec.reason = inner.reason;
    rec.stagnated = inner.stagnated;
    trace.outer.push_back(rec);

    if (!std::isfinite(inner.value) || !std::isfinite(inner.grad_norm)) {
      throw NumericError("solve_smoothed: non-finite objective or gradient at outer iteration " +
                             std::to_string(k),
                         trace);
    }
    result.x = std::move(inner.x);

    if (inner.reason == InnerReason::stopped ||
        (cfg.convergence_test && cfg.convergence_test(result.x, trace))) {
      result.status = SolveStatus::converged;
      return result;
    }
    if (total >= cfg.max_total_iters) {
      result.status = SolveStatus::iter_budget;
      return result;
    }
    const double next_mu = cfg.theta * mu;
    if (next_mu < cfg.mu_min) {
      result.status = SolveStatus::mu_floor;
      return result;
    }
    mu = next_mu;
  }
}

}  // namespace rsmooth
