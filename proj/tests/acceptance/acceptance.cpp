// Acceptance suite: one PASS/FAIL line per criterion. Tolerances, thresholds
// and the master seed are fixed here; the seed was not tuned.

#include "rsmooth/bench.hpp"
#include "rsmooth/cpfact.hpp"
#include "rsmooth/errors.hpp"
#include "rsmooth/fsv.hpp"
#include "rsmooth/smoothing.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <span>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

using namespace rsmooth;

namespace {

constexpr std::uint64_t kSeed = 1;

// Criterion 1
constexpr int kEasyStarts = 10;
constexpr Index kEasyRank = 3;
constexpr double kEasySeconds = 5.0;
// Criterion 2
constexpr double kMaximinTarget = 2.8573;
constexpr double kMaximinBand = 0.05;
constexpr long kMaximinBudget = 1000;
constexpr int kMaximinSeeds = 10;
constexpr int kMaximinRequired = 8;
constexpr double kMaximinSeconds = 30.0;
// Criteria 3-6
constexpr double kStructuredSeconds = 180.0;
constexpr double kRandomSeconds = 180.0;
constexpr double kCgItersLow = 20.0;
constexpr double kCgItersHigh = 200.0;
constexpr double kBoundarySeconds = 600.0;
constexpr double kRtrRateMin = 0.8;
constexpr double kSdRateMax = 0.2;
constexpr int kFsvBbMin = 37;
constexpr int kFsvCgMax = 10;
constexpr int kFsvSdMax = 5;
constexpr double kFsvSeconds = 120.0;
// Criterion 7
constexpr int kEnvelopeSamples = 10000;
constexpr int kGradProbes = 100;
constexpr double kGradRelTol = 1e-5;
constexpr int kMonotoneRuns = 5;
constexpr double kFeasTol = 1e-10;
constexpr double kSoftmaxMass = 1e-10;
constexpr int kSoftmaxCases = 100;

const SubAlgorithm kCpAlgos[] = {SubAlgorithm::sd, SubAlgorithm::cg, SubAlgorithm::rtr};

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

int jobs() { return std::max(1u, std::thread::hardware_concurrency()); }

std::string fmt(const char* format, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, v);
  return buf;
}

const BenchRow* find_row(const std::vector<BenchRow>& rows, Index n, double param, SubAlgorithm algo,
                         std::optional<double> tau = std::nullopt) {
  for (const BenchRow& r : rows) {
    if (r.n == n && r.param == param && r.sub_algorithm == algo && r.tau == tau) return &r;
  }
  throw Error("acceptance: benchmark row missing");
}

// 1 ---------------------------------------------------------------------------

Outcome easy_boundary() {
  const Matrix A = easy_boundary_instance().A;
  const auto t0 = std::chrono::steady_clock::now();
  std::ostringstream detail;
  bool all = true;
  for (SubAlgorithm algo : kCpAlgos) {
    int ok = 0;
    for (int s = 0; s < kEasyStarts; ++s) {
      Rng rng(task_seed(kSeed, 0, s));
      const CpResult r = cp_factorize(A, kEasyRank, cp_default_config(algo), rng);
      ok += r.min_entry >= -kCpEntryTol && r.residual <= kCpResidualTol;
    }
    all = all && ok == kEasyStarts;
    detail << to_string(algo) << " " << ok << "/" << kEasyStarts << "; ";
  }
  const double t = seconds_since(t0);
  detail << "time " << fmt("%.2f", t) << " s (limit " << kEasySeconds << ")";
  return {all && t < kEasySeconds, detail.str()};
}

// 2 ---------------------------------------------------------------------------

Outcome maximin() {
  const Matrix A = easy_boundary_instance().A;
  const auto t0 = std::chrono::steady_clock::now();
  std::ostringstream detail;
  bool all = true;
  for (SubAlgorithm algo : kCpAlgos) {
    int hits = 0;
    double best = -INFINITY;
    for (int s = 0; s < kMaximinSeeds; ++s) {
      Rng rng(task_seed(kSeed, 1, s));
      const CpResult r = maximin_entry_refine(A, kEasyRank, cp_default_config(algo), rng, kMaximinBudget);
      best = std::max(best, r.min_entry);
      hits += std::abs(r.min_entry - kMaximinTarget) <= kMaximinBand && r.trace.total_iters() <= kMaximinBudget;
    }
    all = all && hits >= kMaximinRequired;
    detail << to_string(algo) << " " << hits << "/" << kMaximinSeeds << " (best " << fmt("%.4f", best)
           << "); ";
  }
  const double t = seconds_since(t0);
  detail << "target " << kMaximinTarget << " +- " << kMaximinBand << ", need " << kMaximinRequired
         << "/" << kMaximinSeeds << " per sub-algorithm; time " << fmt("%.2f", t) << " s";
  return {all && t < kMaximinSeconds, detail.str()};
}

// 3 ---------------------------------------------------------------------------

Outcome structured() {
  const auto t0 = std::chrono::steady_clock::now();
  std::ostringstream detail;
  bool all = true;
  for (const char* name : {"table3-n10", "table3-n20", "table3-n50"}) {
    const BenchmarkSpec spec = preset_spec(name);
    for (const BenchRow& r : run_benchmark(spec, jobs())) {
      all = all && r.successes == r.trials;
      detail << "n=" << r.n << " " << to_string(r.sub_algorithm) << " " << fmt("%.2f", r.rate) << "; ";
    }
  }
  const double t = seconds_since(t0);
  detail << "time " << fmt("%.1f", t) << " s";
  return {all && t < kStructuredSeconds, detail.str()};
}

// 4 ---------------------------------------------------------------------------

Outcome random_family() {
  const auto t0 = std::chrono::steady_clock::now();
  std::ostringstream detail;
  bool all = true;
  for (const char* name : {"table2-n20", "table2-n30", "table2-n40"}) {
    const BenchmarkSpec spec = preset_spec(name);
    for (const BenchRow& r : run_benchmark(spec, jobs())) {
      all = all && r.successes == r.trials;
      detail << "n=" << r.n << " " << to_string(r.sub_algorithm) << " " << fmt("%.2f", r.rate);
      if (r.sub_algorithm == SubAlgorithm::cg) {
        all = all && r.iter_s >= kCgItersLow && r.iter_s <= kCgItersHigh;
        detail << " iters " << fmt("%.1f", r.iter_s);
      }
      detail << "; ";
    }
  }
  const double t = seconds_since(t0);
  detail << "time " << fmt("%.1f", t) << " s";
  return {all && t < kRandomSeconds, detail.str()};
}

// 5 ---------------------------------------------------------------------------

Outcome boundary_sweep() {
  const auto t0 = std::chrono::steady_clock::now();
  const BenchmarkSpec spec = preset_spec("table4-acceptance");
  const std::vector<BenchRow> rows = run_benchmark(spec, jobs());
  std::ostringstream detail;
  bool all = true;
  const Index n = spec.sizes.front().n;
  for (SubAlgorithm algo : kCpAlgos) {
    const BenchRow* r = find_row(rows, n, 0.9, algo);
    all = all && r->successes == r->trials;
    detail << "lambda=0.9 " << to_string(algo) << " " << fmt("%.2f", r->rate) << "; ";
  }
  const BenchRow* rtr = find_row(rows, n, 0.999, SubAlgorithm::rtr);
  const BenchRow* sd = find_row(rows, n, 0.999, SubAlgorithm::sd);
  const BenchRow* cg = find_row(rows, n, 0.999, SubAlgorithm::cg);
  all = all && rtr->rate >= kRtrRateMin && sd->rate <= kSdRateMax;
  detail << "lambda=0.999 rtr " << fmt("%.2f", rtr->rate) << " sd " << fmt("%.2f", sd->rate) << " (cg "
         << fmt("%.2f", cg->rate) << "); ";
  for (SubAlgorithm algo : kCpAlgos) {
    const BenchRow* r = find_row(rows, n, 1.0, algo);
    all = all && r->successes == 0;
    detail << "lambda=1 " << to_string(algo) << " " << fmt("%.2f", r->rate) << "; ";
  }
  const double t = seconds_since(t0);
  detail << "time " << fmt("%.1f", t) << " s";
  return {all && t < kBoundarySeconds, detail.str()};
}

// 6 ---------------------------------------------------------------------------

Outcome fsv_table() {
  const auto t0 = std::chrono::steady_clock::now();
  const BenchmarkSpec spec = preset_spec("table5-m50");
  const std::vector<BenchRow> rows = run_benchmark(spec, jobs());
  const Index n = spec.sizes.front().n;
  const auto count = [&](SubAlgorithm algo, double tau) {
    return find_row(rows, n, 0.0, algo, tau)->successes;
  };
  const int bb_loose = count(SubAlgorithm::bb, 1e-5);
  const int cg_loose = count(SubAlgorithm::cg, 1e-5);
  const int sd_tight = count(SubAlgorithm::sd, 1e-12);
  const int bb_tight = count(SubAlgorithm::bb, 1e-12);
  const double t = seconds_since(t0);
  const bool pass = bb_loose >= kFsvBbMin && cg_loose <= kFsvCgMax && sd_tight <= kFsvSdMax &&
                    bb_tight >= kFsvBbMin && t < kFsvSeconds;
  std::ostringstream detail;
  detail << "tau=1e-5: bb " << bb_loose << " (>= " << kFsvBbMin << "), cg " << cg_loose << " (<= "
         << kFsvCgMax << "); tau=1e-12: sd " << sd_tight << " (<= " << kFsvSdMax << "), bb " << bb_tight
         << " (>= " << kFsvBbMin << "); rtr " << count(SubAlgorithm::rtr, 1e-5) << "/"
         << count(SubAlgorithm::rtr, 1e-12) << "; of " << spec.trials << "; time " << fmt("%.1f", t)
         << " s";
  return {pass, detail.str()};
}

// 7 ---------------------------------------------------------------------------

struct Tally {
  std::vector<std::string> failures;
  void check(bool ok, const std::string& what) {
    if (!ok) failures.push_back(what);
  }
};

void lse_envelope(Tally& tally, Rng& rng) {
  std::normal_distribution<double> nd(0.0, 5.0);
  std::uniform_real_distribution<double> log_mu(-4.0, 1.0);
  int violations = 0;
  for (int i = 0; i < kEnvelopeSamples; ++i) {
    std::vector<double> x(2 + i % 19);
    for (double& v : x) v = nd(rng);
    const double mu = std::pow(10.0, log_mu(rng));
    const double mx = *std::max_element(x.begin(), x.end());
    const double f = lse_value(x, mu);
    const bool strict = std::isfinite(lse_log_excess(x, mu)) && f >= mx;
    const bool upper = f <= mx + mu * std::log(static_cast<double>(x.size())) + 1e-12 * (1.0 + std::abs(mx));
    violations += !(strict && upper);
  }
  tally.check(violations == 0, "lse envelope violations " + std::to_string(violations));
}

void abs_envelopes(Tally& tally, Rng& rng) {
  std::uniform_real_distribution<double> ut(-5.0, 5.0);
  std::uniform_real_distribution<double> log_mu(-6.0, 1.0);
  for (SmoothingKind kind : kAbsKinds) {
    const SmoothingFamily fam = smoothing_family(kind);
    int violations = 0;
    for (int i = 0; i < kEnvelopeSamples; ++i) {
      const double t = ut(rng) * (i % 2 ? 1.0 : 1e-3);
      const double mu = std::pow(10.0, log_mu(rng));
      const double err = std::abs(abs_smoother_value(kind, t, mu) - std::abs(t));
      violations += err > fam.envelope(mu) * (1.0 + 1e-12) + 1e-15;
    }
    tally.check(violations == 0, std::string(to_string(kind)) + " envelope violations " +
                                     std::to_string(violations));
  }
}

void ap1_property(Tally& tally) {
  const SmoothingKind all[] = {SmoothingKind::lse,    SmoothingKind::abs_f1, SmoothingKind::abs_f2,
                               SmoothingKind::abs_f3, SmoothingKind::abs_f4, SmoothingKind::abs_f5};
  for (SmoothingKind kind : all) {
    const std::vector<Ap1Sample> grid = standard_ap1_grid(kind);
    const Ap1Report rep = ap1_check(kind, grid);
    const bool expected = kind != SmoothingKind::abs_f4 && kind != SmoothingKind::abs_f5;
    tally.check(rep.holds == expected, std::string("AP1 verdict for ") + std::string(to_string(kind)));
  }
}

double rel_fd_error(const std::function<double(const Matrix&)>& f, const Matrix& egrad, const Matrix& x,
                    const Matrix& d) {
  const double h = 1e-6;
  const double fd = (f(x + h * d) - f(x - h * d)) / (2 * h);
  const double an = (egrad.array() * d.array()).sum();
  return std::abs(fd - an) / std::max(1.0, std::abs(an));
}

void gradient_checks(Tally& tally, Rng& rng) {
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> log_mu(-1.0, 1.0);
  double worst_cp = 0.0;
  for (int p = 0; p < kGradProbes; ++p) {
    const CpInstance inst = gen_random_cp(6, rng);
    const Matrix Bbar = initial_factorization(inst.A, 8).Bbar;
    const Matrix X = random_orthogonal(8, rng);
    Matrix D(8, 8);
    for (Index i = 0; i < D.size(); ++i) D(i) = nd(rng);
    const double mu = std::pow(10.0, log_mu(rng));
    worst_cp = std::max(worst_cp, rel_fd_error([&](const Matrix& Y) { return cp_objective(Y, Bbar, mu); },
                                               cp_euclidean_gradient(X, Bbar, mu), X, D));
  }
  double worst_fsv = 0.0;
  const FsvInstance inst = gen_fsv_instance(5, 50, rng);
  for (int p = 0; p < kGradProbes; ++p) {
    const SmoothingKind kind = kAbsKinds[p % std::size(kAbsKinds)];
    const Vector x = random_sphere_point(5, rng);
    Vector d(5);
    for (Index i = 0; i < 5; ++i) d(i) = nd(rng);
    const double mu = std::pow(10.0, log_mu(rng));
    worst_fsv = std::max(
        worst_fsv,
        rel_fd_error([&](const Matrix& y) { return fsv_objective(y.col(0), inst.Q, mu, kind); },
                     fsv_euclidean_gradient(x, inst.Q, mu, kind), x, d));
  }
  tally.check(worst_cp <= kGradRelTol, "cp gradient rel error " + fmt("%.3g", worst_cp));
  tally.check(worst_fsv <= kGradRelTol, "fsv gradient rel error " + fmt("%.3g", worst_fsv));
}

// Trace values f^k = f~(x^k, mu_k) must strictly decrease. A tie is allowed only
// when the smoother has already collapsed onto the nonsmooth value at x^k, so
// no decrease in mu can lower it.
struct TraceCheck {
  int violations = 0;
  int below_floor = 0;
  int comparisons = 0;
  double worst_feasibility = 0.0;
};

void check_trace(const SolveTrace& trace, const std::vector<double>& f_at_xk, TraceCheck& out) {
  for (std::size_t k = 0; k < trace.outer.size(); ++k) {
    const double fk = trace.outer[k].value;
    const double floor = f_at_xk[k];
    out.below_floor += fk < floor - 1e-12 * (1.0 + std::abs(floor));
    if (k == 0) continue;
    ++out.comparisons;
    const double prev = trace.outer[k - 1].value;
    const bool saturated = std::abs(prev - f_at_xk[k - 1]) <= 1e-14 * (1.0 + std::abs(prev));
    out.violations += !(fk < prev || (fk == prev && saturated));
  }
}

void monotone_runs(Tally& tally) {
  TraceCheck cp;
  const SubAlgorithm cp_algos[] = {SubAlgorithm::sd, SubAlgorithm::bb, SubAlgorithm::cg,
                                   SubAlgorithm::rtr, SubAlgorithm::cg};
  for (int run = 0; run < kMonotoneRuns; ++run) {
    Rng rng(task_seed(kSeed, 7, run));
    const CpInstance inst = gen_random_cp(12, rng);
    std::vector<Matrix> xs;
    SolverConfig cfg = cp_default_config(cp_algos[run]);
    cfg.hooks.on_outer_start = [&](int k, const Matrix& start, double) {
      if (k > 0) xs.push_back(start);
      cp.worst_feasibility = std::max(cp.worst_feasibility, stiefel_feasibility_error(start));
    };
    cfg.hooks.on_iterate = [&](const Matrix& x, double) {
      cp.worst_feasibility = std::max(cp.worst_feasibility, stiefel_feasibility_error(x));
    };
    const CpResult r = cp_factorize(inst.A, 18, cfg, rng);
    xs.push_back(r.X);
    std::vector<double> f;
    for (const Matrix& X : xs) f.push_back((-(r.Bbar * X)).maxCoeff());
    check_trace(r.trace, f, cp);
  }

  TraceCheck fs;
  const SubAlgorithm fsv_algos[] = {SubAlgorithm::sd, SubAlgorithm::bb, SubAlgorithm::cg,
                                    SubAlgorithm::rtr, SubAlgorithm::bb};
  for (int run = 0; run < kMonotoneRuns; ++run) {
    Rng rng(task_seed(kSeed, 8, run));
    const FsvInstance inst = gen_fsv_instance(5, 50, rng);
    std::vector<Vector> xs;
    SolverConfig cfg = fsv_default_config(fsv_algos[run]);
    cfg.hooks.on_outer_start = [&](int k, const Matrix& start, double) {
      if (k > 0) xs.push_back(start.col(0));
      fs.worst_feasibility = std::max(fs.worst_feasibility, sphere_feasibility_error(start.col(0)));
    };
    cfg.hooks.on_iterate = [&](const Matrix& x, double) {
      fs.worst_feasibility = std::max(fs.worst_feasibility, sphere_feasibility_error(x.col(0)));
    };
    const FsvResult r = fsv_solve(inst, cfg, SmoothingKind::abs_f1, rng);
    xs.push_back(r.x);
    std::vector<double> f;
    for (const Vector& x : xs) f.push_back((inst.Q * x).lpNorm<1>());
    check_trace(r.trace, f, fs);
  }

  tally.check(cp.violations == 0 && cp.below_floor == 0,
              "cp trace violations " + std::to_string(cp.violations) + "/" + std::to_string(cp.comparisons) +
                  ", below f " + std::to_string(cp.below_floor));
  tally.check(fs.violations == 0 && fs.below_floor == 0,
              "fsv trace violations " + std::to_string(fs.violations) + "/" + std::to_string(fs.comparisons) +
                  ", below f " + std::to_string(fs.below_floor));
  tally.check(cp.worst_feasibility <= kFeasTol, "orthogonality error " + fmt("%.3g", cp.worst_feasibility));
  tally.check(fs.worst_feasibility <= kFeasTol, "sphere error " + fmt("%.3g", fs.worst_feasibility));
}

void softmax_concentration(Tally& tally, Rng& rng) {
  std::uniform_int_distribution<int> len(2, 20);
  std::uniform_int_distribution<int> level(-5, 5);
  int violations = 0;
  for (int c = 0; c < kSoftmaxCases; ++c) {
    // Values on a coarse grid so the argmax set often has several members.
    std::vector<double> x(len(rng));
    for (double& v : x) v = level(rng) * 0.5;
    const double mx = *std::max_element(x.begin(), x.end());
    double second = -INFINITY;
    for (double v : x)
      if (v < mx) second = std::max(second, v);
    const double gap = std::isfinite(second) ? mx - second : 1.0;
    const Vector sigma = lse_gradient(x, 1e-3 * gap);
    double mass = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i)
      if (x[i] == mx) mass += sigma(static_cast<Index>(i));
    violations += !(mass >= 1.0 - kSoftmaxMass);
  }
  tally.check(violations == 0, "softmax concentration violations " + std::to_string(violations));
}

Outcome properties() {
  Rng rng(kSeed);
  Tally tally;
  lse_envelope(tally, rng);
  abs_envelopes(tally, rng);
  ap1_property(tally);
  gradient_checks(tally, rng);
  monotone_runs(tally);
  softmax_concentration(tally, rng);
  std::ostringstream detail;
  if (tally.failures.empty()) {
    detail << "lse/kappa-omega envelopes, AP1 verdicts, gradients, trace monotonicity, feasibility, "
              "softmax concentration";
  } else {
    for (const std::string& f : tally.failures) detail << f << "; ";
  }
  return {tally.failures.empty(), detail.str()};
}

struct Criterion {
  int id;
  const char* title;
  Outcome (*run)();
};

const Criterion kCriteria[] = {
    {1, "easy boundary factorization", easy_boundary},
    {2, "maximin refinement", maximin},
    {3, "structured family", structured},
    {4, "random family", random_family},
    {5, "hard boundary sweep", boundary_sweep},
    {6, "planted sparse vector", fsv_table},
    {7, "property suite", properties},
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rsmooth acceptance suite"};
  int only = 0;
  app.add_option("--criterion", only, "Run a single criterion (1-7); default all")->check(CLI::Range(0, 7));
  CLI11_PARSE(app, argc, argv);

  bool all_pass = true;
  for (const Criterion& c : kCriteria) {
    if (only != 0 && c.id != only) continue;
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    all_pass = all_pass && o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << c.id << " (" << c.title << "): " << o.detail
              << std::endl;
  }
  return all_pass ? 0 : 1;
}
