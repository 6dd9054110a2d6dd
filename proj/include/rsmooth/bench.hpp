#pragma once

#include "rsmooth/manifolds.hpp"
#include "rsmooth/smoothing.hpp"
#include "rsmooth/solver.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace rsmooth {

enum class BenchFamily { random_cp, structured_cp, boundary_cp, fsv };

std::string_view to_string(BenchFamily family);
/// Throws ParseError.
BenchFamily parse_bench_family(std::string_view name);

/// Solver settings each family runs with. The values are the reference
/// experimental settings; tests pin them against a literal table.
struct FamilyPreset {
  BenchFamily family;
  double mu0;
  double theta;
  bool adaptive_delta;  ///< delta_k = gamma mu_k, else delta_{k+1} = rho delta_k
  double gamma;         ///< adaptive rule only
  double delta0;        ///< geometric rule only
  double rho;           ///< geometric rule only
  long max_total_iters;
};

const FamilyPreset& family_preset(BenchFamily family);
SolverConfig preset_config(BenchFamily family, SubAlgorithm algo);

/// One size cell. For the CP families r_or_m is the column count r and param
/// is lambda (boundary only); for fsv it is the ambient dimension m.
struct BenchSize {
  Index n = 0;
  Index r_or_m = 0;
  double param = 0.0;
};

struct BenchmarkSpec {
  std::string name;
  BenchFamily family = BenchFamily::random_cp;
  std::vector<BenchSize> sizes;
  /// Instances (random_cp, fsv) or starting points (structured, boundary).
  int trials = 1;
  std::uint64_t seed = 1;
  std::vector<SubAlgorithm> sub_algorithms;
  /// fsv only; CP always uses lse.
  std::vector<SmoothingKind> kinds;
  /// Overrides the family's total iteration budget when set.
  std::optional<long> max_total_iters;

  /// Throws ParseError on an unusable spec.
  void validate() const;
};

/// Names accepted by preset_spec.
std::vector<std::string> preset_names();
/// Throws ParseError for an unknown name.
BenchmarkSpec preset_spec(std::string_view name);
/// Reads a JSON spec, e.g.
///   {"family": "structured_cp", "sizes": [{"n": 10, "r_or_m": 10}],
///    "trials": 20, "seed": 3, "sub_algorithms": ["sd", "cg", "rtr"]}
/// Throws ParseError.
BenchmarkSpec parse_spec_json(std::string_view text);
BenchmarkSpec load_spec_file(const std::string& path);

/// Seed of trial `trial` in size cell `size_index`. Shared by every
/// sub-algorithm and smoothing kind, so all methods see the same instances
/// and starting points.
std::uint64_t task_seed(std::uint64_t master, std::size_t size_index, int trial);

struct BenchRow {
  BenchFamily family = BenchFamily::random_cp;
  Index n = 0;
  Index r_or_m = 0;
  double param = 0.0;
  SubAlgorithm sub_algorithm = SubAlgorithm::cg;
  SmoothingKind kind = SmoothingKind::lse;
  std::optional<double> tau;  ///< fsv rows only
  int successes = 0;
  int trials = 0;
  double rate = 0.0;    ///< successes / trials rounded to two decimals
  double time_s = 0.0;  ///< mean over successful trials (0 when none)
  double iter_s = 0.0;  ///< mean total iterations over successful trials
  std::uint64_t seed = 0;
};

/// Runs every (size, trial, sub-algorithm, kind) task on `jobs` threads.
/// Rows are ordered by (size, sub-algorithm, kind, tau) whatever the
/// completion order.
std::vector<BenchRow> run_benchmark(const BenchmarkSpec& spec, int jobs = 1);

inline constexpr std::string_view kBenchCsvHeader =
    "family,n,r_or_m,param,sub_algorithm,kind,tau,rate,time_s,iter_s,trials,seed";

void write_csv(std::ostream& out, const std::vector<BenchRow>& rows);
/// JSON array of rows including the raw success counts.
std::string rows_to_json(const std::vector<BenchRow>& rows);

}  // namespace rsmooth
