// rsmooth: CP factorization and sparse-vector benchmarks by Riemannian
// smoothing.
//
//   rsmooth factorize A.txt [--r N] [--sub cg] [--json] [--out B.txt]
//   rsmooth check A.txt B.txt [--entry-tol 1e-15] [--residual-tol 1e-8]
//   rsmooth gen random-cp|structured|boundary|easy-boundary [--n N] [--lambda L]
//   rsmooth bench PRESET|spec.json [--jobs N] [--trials T] [--json]
//   rsmooth fsv-bench [--n 5] [--m 50] [--kind f1] [--sub bb] [--trials 50]
//
// Exit codes: 0 success, 1 solver/check failure, 2 input or usage error.

#include "rsmooth/bench.hpp"
#include "rsmooth/cpfact.hpp"
#include "rsmooth/errors.hpp"
#include "rsmooth/fsv.hpp"
#include "rsmooth/matrix_io.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

using namespace rsmooth;
using json = nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitFail = 1;
constexpr int kExitInput = 2;

struct Globals {
  std::uint64_t seed = 1;
  int jobs = 1;
  bool json = false;
  std::string out;
};

/// Writes `text` to --out when given, otherwise to stdout.
void emit(const Globals& g, const std::string& text) {
  if (g.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(g.out);
  if (!f) throw ParseError("cannot write '" + g.out + "'");
  f << text;
}

// factorize -------------------------------------------------------------------

struct FactorizeArgs {
  std::string matrix;
  long r = 0;
  std::string sub = "cg";
  long max_iters = 0;
};

int cmd_factorize(const Globals& g, const FactorizeArgs& a) {
  const Matrix A = read_symmetric_matrix_file(a.matrix);
  validate_cp_matrix(A);
  const SubAlgorithm algo = parse_sub_algorithm(a.sub);
  SolverConfig cfg = cp_default_config(algo);
  if (a.max_iters > 0) cfg.max_total_iters = a.max_iters;
  std::optional<Index> r;
  if (a.r > 0) r = a.r;

  Rng rng(g.seed);
  const auto t0 = std::chrono::steady_clock::now();
  const CpResult res = cp_factorize(A, r, cfg, rng);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool ok = res.success && res.residual <= kCpResidualTol;

  if (!g.out.empty()) write_matrix_file(g.out, res.B);
  if (g.json) {
    const json j = {{"instance", a.matrix},
                    {"n", A.rows()},
                    {"r", res.X.rows()},
                    {"sub_algorithm", to_string(algo)},
                    {"success", ok},
                    {"min_entry", res.min_entry},
                    {"residual", res.residual},
                    {"outer_iters", res.trace.outer.size()},
                    {"total_iters", res.trace.total_iters()},
                    {"wall_time_s", wall},
                    {"seed", g.seed}};
    std::cout << j.dump(2) << '\n';
  } else {
    std::cout << "instance     " << a.matrix << '\n'
              << "n, r         " << A.rows() << ", " << res.X.rows() << '\n'
              << "sub          " << to_string(algo) << '\n'
              << "success      " << (ok ? "yes" : "no") << '\n'
              << "min entry    " << res.min_entry << '\n'
              << "residual     " << res.residual << '\n'
              << "outer iters  " << res.trace.outer.size() << '\n'
              << "total iters  " << res.trace.total_iters() << '\n'
              << "status       " << to_string(res.status) << '\n'
              << "wall time s  " << wall << '\n';
  }
  return ok ? kExitOk : kExitFail;
}

// check -----------------------------------------------------------------------

struct CheckArgs {
  std::string matrix;
  std::string factor;
  double entry_tol = kCpEntryTol;
  double residual_tol = kCpResidualTol;
};

int cmd_check(const Globals& g, const CheckArgs& a) {
  const Matrix A = read_symmetric_matrix_file(a.matrix);
  const Matrix B = read_matrix_file(a.factor);
  if (B.rows() != A.rows()) throw ParseError("factor row count does not match the matrix order");
  const VerifyReport rep = verify_factorization(A, B, a.entry_tol, a.residual_tol);
  if (g.json) {
    const json j = {{"passed", rep.passed},         {"entries_ok", rep.entries_ok},
                    {"residual_ok", rep.residual_ok}, {"min_entry", rep.min_entry},
                    {"residual", rep.residual}};
    std::cout << j.dump(2) << '\n';
  } else {
    std::cout << (rep.passed ? "PASS" : "FAIL") << "  min entry " << rep.min_entry
              << "  residual " << rep.residual << '\n';
  }
  return rep.passed ? kExitOk : kExitFail;
}

// gen -------------------------------------------------------------------------

struct GenArgs {
  std::string family;
  long n = 0;
  double lambda = -1.0;
};

int cmd_gen(const Globals& g, const GenArgs& a) {
  CpInstance inst;
  Rng rng(g.seed);
  if (a.family == "random-cp") {
    if (a.n < 1) throw ParseError("gen random-cp needs --n >= 1");
    inst = gen_random_cp(a.n, rng);
  } else if (a.family == "structured") {
    if (a.n < 2) throw ParseError("gen structured needs --n >= 2");
    inst = gen_structured(a.n);
  } else if (a.family == "boundary") {
    if (a.lambda < 0.0 || a.lambda > 1.0) throw ParseError("gen boundary needs --lambda in [0, 1]");
    inst = gen_boundary(a.lambda);
  } else if (a.family == "easy-boundary") {
    inst = easy_boundary_instance();
  } else {
    throw ParseError("unknown family '" + a.family +
                     "' (random-cp, structured, boundary, easy-boundary)");
  }
  std::ostringstream text;
  write_matrix(text, inst.A);
  emit(g, text.str());
  return kExitOk;
}

// bench -----------------------------------------------------------------------

struct BenchArgs {
  std::string spec;
  int trials = 0;
};

int cmd_bench(const Globals& g, const BenchArgs& a, bool seed_given) {
  BenchmarkSpec spec;
  if (a.spec.size() > 5 && a.spec.ends_with(".json")) {
    spec = load_spec_file(a.spec);
  } else {
    spec = preset_spec(a.spec);
  }
  if (seed_given) spec.seed = g.seed;
  if (a.trials > 0) spec.trials = a.trials;
  const std::vector<BenchRow> rows = run_benchmark(spec, g.jobs);
  if (g.json) {
    emit(g, rows_to_json(rows) + "\n");
  } else {
    std::ostringstream csv;
    write_csv(csv, rows);
    emit(g, csv.str());
  }
  return kExitOk;
}

// fsv-bench -------------------------------------------------------------------

struct FsvArgs {
  long n = 5;
  long m = 50;
  std::string kind = "f1";
  std::vector<std::string> subs = {"sd", "bb", "cg", "rtr"};
  int trials = 50;
};

int cmd_fsv_bench(const Globals& g, const FsvArgs& a) {
  BenchmarkSpec spec;
  spec.name = "fsv-bench";
  spec.family = BenchFamily::fsv;
  spec.sizes = {{a.n, a.m, 0.0}};
  spec.trials = a.trials;
  spec.seed = g.seed;
  spec.kinds = {parse_smoothing_kind(a.kind)};
  for (const std::string& s : a.subs) spec.sub_algorithms.push_back(parse_sub_algorithm(s));
  const std::vector<BenchRow> rows = run_benchmark(spec, g.jobs);

  if (g.json) {
    json arr = json::array();
    for (const BenchRow& r : rows) {
      arr.push_back({{"n", r.n},
                     {"m", r.r_or_m},
                     {"kind", to_string(r.kind)},
                     {"sub_algorithm", to_string(r.sub_algorithm)},
                     {"tau", *r.tau},
                     {"successes", r.successes},
                     {"trials", r.trials},
                     {"seed", r.seed}});
    }
    emit(g, arr.dump(2) + "\n");
  } else {
    std::ostringstream csv;
    write_csv(csv, rows);
    emit(g, csv.str());
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Riemannian smoothing for CP factorization and sparse vectors"};
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  auto* seed_opt = app.add_option("--seed", g.seed, "Master random seed")->capture_default_str();
  app.add_option("--jobs", g.jobs, "Worker threads for benchmarks (0 = all cores)")
      ->capture_default_str();
  app.add_flag("--json", g.json, "Machine-readable output");
  app.add_option("--out", g.out, "Output file");

  FactorizeArgs fa;
  auto* factorize = app.add_subcommand("factorize", "Factorize a matrix file as B B^T, B >= 0");
  factorize->add_option("matrix", fa.matrix, "Symmetric matrix file")->required();
  factorize->add_option("--r", fa.r, "Column count (default: the cp-rank upper bound)");
  factorize->add_option("--sub", fa.sub, "Sub-algorithm: sd, bb, cg, rtr")->capture_default_str();
  factorize->add_option("--max-iters", fa.max_iters, "Total iteration budget (default 5000)");

  CheckArgs ca;
  auto* check = app.add_subcommand("check", "Verify a factor against a matrix");
  check->add_option("matrix", ca.matrix, "Symmetric matrix file")->required();
  check->add_option("factor", ca.factor, "Factor file (rows cols header)")->required();
  check->add_option("--entry-tol", ca.entry_tol)->capture_default_str();
  check->add_option("--residual-tol", ca.residual_tol)->capture_default_str();

  GenArgs ga;
  auto* gen = app.add_subcommand("gen", "Write an instance matrix");
  gen->add_option("family", ga.family, "random-cp, structured, boundary, easy-boundary")
      ->required();
  gen->add_option("--n", ga.n, "Order (random-cp, structured)");
  gen->add_option("--lambda", ga.lambda, "Mixing weight in [0, 1] (boundary)");

  BenchArgs ba;
  auto* bench = app.add_subcommand("bench", "Run a benchmark preset or JSON spec; CSV output");
  bench->add_option("spec", ba.spec, "Preset name or path to a .json spec")->required();
  bench->add_option("--trials", ba.trials, "Override the number of trials");

  FsvArgs fv;
  auto* fsv = app.add_subcommand("fsv-bench", "Planted sparse vector success counts per tau");
  fsv->add_option("--n", fv.n)->capture_default_str();
  fsv->add_option("--m", fv.m)->capture_default_str();
  fsv->add_option("--kind", fv.kind, "Smoothing: f1..f5")->capture_default_str();
  fsv->add_option("--sub", fv.subs, "Sub-algorithms")->capture_default_str();
  fsv->add_option("--trials", fv.trials)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInput;
  }

  try {
    if (*factorize) return cmd_factorize(g, fa);
    if (*check) return cmd_check(g, ca);
    if (*gen) return cmd_gen(g, ga);
    if (*bench) return cmd_bench(g, ba, seed_opt->count() > 0);
    if (*fsv) return cmd_fsv_bench(g, fv);
  } catch (const NumericError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFail;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  }
  return kExitInput;
}
