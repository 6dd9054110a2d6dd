#include "rsmooth/smoothing.hpp"

#include "rsmooth/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace rsmooth {

namespace {

void require_nonempty(std::span<const double> x, const char* op) {
  if (x.empty()) throw DomainError(std::string(op) + ": empty argument");
}

void require_abs_kind(SmoothingKind kind, const char* op) {
  if (kind == SmoothingKind::lse) {
    throw DomainError(std::string(op) + ": lse is not a smoother of |t|");
  }
}

// log(1 + exp(z)) without overflow.
double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }

}  // namespace

std::string_view to_string(SmoothingKind kind) {
  switch (kind) {
    case SmoothingKind::lse: return "lse";
    case SmoothingKind::abs_f1: return "f1";
    case SmoothingKind::abs_f2: return "f2";
    case SmoothingKind::abs_f3: return "f3";
    case SmoothingKind::abs_f4: return "f4";
    case SmoothingKind::abs_f5: return "f5";
  }
  return "?";
}

SmoothingKind parse_smoothing_kind(std::string_view name) {
  if (name.starts_with("abs_")) name.remove_prefix(4);
  if (name == "lse") return SmoothingKind::lse;
  if (name == "f1") return SmoothingKind::abs_f1;
  if (name == "f2") return SmoothingKind::abs_f2;
  if (name == "f3") return SmoothingKind::abs_f3;
  if (name == "f4") return SmoothingKind::abs_f4;
  if (name == "f5") return SmoothingKind::abs_f5;
  throw ParseError("unknown smoothing kind '" + std::string(name) + "'");
}

SmoothingFamily smoothing_family(SmoothingKind kind, std::size_t length) {
  switch (kind) {
    case SmoothingKind::lse:
      return {kind, std::log(static_cast<double>(std::max<std::size_t>(length, 1))), true};
    case SmoothingKind::abs_f1: return {kind, 0.25, true};
    case SmoothingKind::abs_f2: return {kind, 1.0, true};
    case SmoothingKind::abs_f3: return {kind, 2.0 * std::numbers::ln2, true};
    case SmoothingKind::abs_f4: return {kind, 1.0, false};
    case SmoothingKind::abs_f5:
      return {kind, 2.0 / (std::numbers::e * std::sqrt(std::numbers::pi)), false};
  }
  throw DomainError("smoothing_family: unknown kind");
}

void require_valid_mu(double mu) {
  if (!std::isfinite(mu) || !(mu >= kMinMu)) {
    throw DomainError("smoothing parameter mu must be finite and >= 1e-12, got " +
                      std::to_string(mu));
  }
}

// LogSumExp ----------------------------------------------------------------

double lse_value(std::span<const double> x, double mu) {
  require_valid_mu(mu);
  require_nonempty(x, "lse_value");
  const double top = *std::max_element(x.begin(), x.end());
  double sum = 0.0;
  for (double xi : x) sum += std::exp((xi - top) / mu);
  return mu * std::log(sum) + top;
}

double lse_value_and_gradient(std::span<const double> x, double mu, Eigen::VectorXd& sigma) {
  require_valid_mu(mu);
  require_nonempty(x, "lse_gradient");
  const double top = *std::max_element(x.begin(), x.end());
  sigma.resize(static_cast<Eigen::Index>(x.size()));
  double sum = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double e = std::exp((x[i] - top) / mu);
    sigma(static_cast<Eigen::Index>(i)) = e;
    sum += e;
  }
  sigma /= sum;
  return mu * std::log(sum) + top;
}

Eigen::VectorXd lse_gradient(std::span<const double> x, double mu) {
  Eigen::VectorXd sigma;
  lse_value_and_gradient(x, mu, sigma);
  return sigma;
}

double lse_log_excess(std::span<const double> x, double mu) {
  require_valid_mu(mu);
  require_nonempty(x, "lse_log_excess");
  const auto top_it = std::max_element(x.begin(), x.end());
  const double top = *top_it;
  const auto top_index = static_cast<std::size_t>(top_it - x.begin());

  // log s, s = sum over the non-argmax entries of exp((x_i - max) / mu).
  double shift = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (i != top_index) shift = std::max(shift, (x[i] - top) / mu);
  }
  if (!std::isfinite(shift)) return -std::numeric_limits<double>::infinity();
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (i != top_index) acc += std::exp((x[i] - top) / mu - shift);
  }
  const double log_s = shift + std::log(acc);

  // log(log1p(s)); log1p(s) = s (1 - s/2 + ...) for tiny s.
  const double log_log1p = log_s < -30.0 ? log_s + std::log1p(-0.5 * std::exp(log_s))
                                         : std::log(std::log1p(std::exp(log_s)));
  return std::log(mu) + log_log1p;
}

// |t| smoothers ---------------------------------------------------------------

double abs_smoother_value(SmoothingKind kind, double t, double mu) {
  require_valid_mu(mu);
  switch (kind) {
    case SmoothingKind::abs_f1: {
      const double a = std::abs(t);
      // The quadratic branch includes the boundary |t| = mu/2.
      return a > 0.5 * mu ? a : t * t / mu + 0.25 * mu;
    }
    case SmoothingKind::abs_f2: return std::hypot(mu, t);
    case SmoothingKind::abs_f3: return 2.0 * mu * softplus(t / mu) - t;
    case SmoothingKind::abs_f4: return t * std::tanh(t / mu);
    case SmoothingKind::abs_f5: return t * std::erf(t / mu);
    case SmoothingKind::lse: break;
  }
  require_abs_kind(kind, "abs_smoother_value");
  return 0.0;
}

double abs_smoother_deriv(SmoothingKind kind, double t, double mu) {
  require_valid_mu(mu);
  switch (kind) {
    case SmoothingKind::abs_f1:
      if (std::abs(t) > 0.5 * mu) return t > 0.0 ? 1.0 : -1.0;
      return 2.0 * t / mu;
    case SmoothingKind::abs_f2: return t / std::hypot(mu, t);
    case SmoothingKind::abs_f3:
      // d/dt [2 mu softplus(t/mu) - t] = 2 logistic(t/mu) - 1.
      return std::tanh(0.5 * t / mu);
    case SmoothingKind::abs_f4: {
      const double z = t / mu;
      const double c = std::cosh(z);
      return std::tanh(z) + z / (c * c);
    }
    case SmoothingKind::abs_f5: {
      const double z = t / mu;
      return std::erf(z) + z * (2.0 / std::sqrt(std::numbers::pi)) * std::exp(-z * z);
    }
    case SmoothingKind::lse: break;
  }
  require_abs_kind(kind, "abs_smoother_deriv");
  return 0.0;
}

double separable_l1_value(std::span<const double> z, double mu, SmoothingKind kind) {
  require_abs_kind(kind, "separable_l1_value");
  require_valid_mu(mu);
  double sum = 0.0;
  for (double zi : z) sum += abs_smoother_value(kind, zi, mu);
  return sum;
}

Eigen::VectorXd separable_l1_gradient(std::span<const double> z, double mu, SmoothingKind kind) {
  require_abs_kind(kind, "separable_l1_gradient");
  require_valid_mu(mu);
  Eigen::VectorXd g(static_cast<Eigen::Index>(z.size()));
  for (std::size_t i = 0; i < z.size(); ++i) {
    g(static_cast<Eigen::Index>(i)) = abs_smoother_deriv(kind, z[i], mu);
  }
  return g;
}

double smoothed_value(SmoothingKind kind, std::span<const double> x, double mu) {
  if (kind == SmoothingKind::lse) return lse_value(x, mu);
  return separable_l1_value(x, mu, kind);
}

double nonsmooth_value(SmoothingKind kind, std::span<const double> x) {
  if (kind == SmoothingKind::lse) {
    require_nonempty(x, "nonsmooth_value");
    return *std::max_element(x.begin(), x.end());
  }
  double sum = 0.0;
  for (double xi : x) sum += std::abs(xi);
  return sum;
}

// AP1 -----------------------------------------------------------------------------

Ap1Report ap1_check(SmoothingKind kind, std::span<const Ap1Sample> samples) {
  Ap1Report report;
  for (const Ap1Sample& s : samples) {
    if (!(s.mu_lo > 0.0 && s.mu_lo < s.mu_hi)) {
      throw DomainError("ap1_check: need 0 < mu_lo < mu_hi");
    }
    ++report.pairs;
    const double base = nonsmooth_value(kind, s.x);
    const double hi = smoothed_value(kind, s.x, s.mu_hi);
    const double lo = smoothed_value(kind, s.x, s.mu_lo);
    const bool active = hi > base;
    if (lo > hi) ++report.increases;
    if (lo < hi) ++report.strict_decreases;
    if (active) {
      ++report.active_pairs;
      if (!(lo < hi)) ++report.active_without_decrease;
    }
  }
  report.holds = report.increases == 0 && report.active_without_decrease == 0;
  return report;
}

std::vector<Ap1Sample> standard_ap1_grid(SmoothingKind kind) {
  static constexpr double kMus[] = {1e-3, 1e-2, 0.1, 0.5, 1.0, 2.0, 5.0};
  std::vector<std::vector<double>> points;
  if (kind == SmoothingKind::lse) {
    static constexpr double kCoords[] = {-2.0, -0.5, 0.0, 1.0, 3.0};
    for (double a : kCoords)
      for (double b : kCoords)
        for (double c : kCoords) points.push_back({a, b, c});
  } else {
    for (int i = -12; i <= 12; ++i) points.push_back({0.25 * i});
  }

  std::vector<Ap1Sample> grid;
  for (const auto& x : points) {
    for (std::size_t hi = 0; hi < std::size(kMus); ++hi) {
      for (std::size_t lo = 0; lo < hi; ++lo) grid.push_back({x, kMus[hi], kMus[lo]});
    }
  }
  return grid;
}

}  // namespace rsmooth
