#include "rsmooth/bench.hpp"

#include "rsmooth/cpfact.hpp"
#include "rsmooth/errors.hpp"
#include "rsmooth/fsv.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

namespace rsmooth {

using json = nlohmann::json;

std::string_view to_string(BenchFamily family) {
  switch (family) {
    case BenchFamily::random_cp: return "random_cp";
    case BenchFamily::structured_cp: return "structured_cp";
    case BenchFamily::boundary_cp: return "boundary_cp";
    case BenchFamily::fsv: return "fsv";
  }
  return "?";
}

BenchFamily parse_bench_family(std::string_view name) {
  for (BenchFamily f : {BenchFamily::random_cp, BenchFamily::structured_cp,
                        BenchFamily::boundary_cp, BenchFamily::fsv}) {
    if (name == to_string(f)) return f;
  }
  throw ParseError("unknown benchmark family '" + std::string(name) + "'");
}

namespace {

constexpr FamilyPreset kPresets[] = {
    {BenchFamily::random_cp, 100.0, 0.8, true, 0.5, 0.0, 0.0, 5000},
    {BenchFamily::structured_cp, 100.0, 0.8, true, 0.5, 0.0, 0.0, 5000},
    {BenchFamily::boundary_cp, 100.0, 0.8, true, 0.5, 0.0, 0.0, 5000},
    {BenchFamily::fsv, 1.0, 0.5, false, 0.0, 0.1, 0.5, 5000},
};

}  // namespace

const FamilyPreset& family_preset(BenchFamily family) {
  for (const FamilyPreset& p : kPresets) {
    if (p.family == family) return p;
  }
  throw DomainError("family_preset: unknown family");
}

SolverConfig preset_config(BenchFamily family, SubAlgorithm algo) {
  const FamilyPreset& p = family_preset(family);
  SolverConfig cfg = family == BenchFamily::fsv ? fsv_default_config(algo) : cp_default_config(algo);
  cfg.mu0 = p.mu0;
  cfg.theta = p.theta;
  if (p.adaptive_delta) {
    cfg.delta_rule = AdaptiveDelta{p.gamma};
  } else {
    cfg.delta_rule = GeometricDelta{p.delta0, p.rho};
  }
  cfg.max_total_iters = p.max_total_iters;
  return cfg;
}

void BenchmarkSpec::validate() const {
  if (sizes.empty()) throw ParseError("benchmark spec: no sizes");
  if (trials < 1) throw ParseError("benchmark spec: trials must be >= 1");
  if (sub_algorithms.empty()) throw ParseError("benchmark spec: no sub_algorithms");
  if (max_total_iters && *max_total_iters < 1) {
    throw ParseError("benchmark spec: max_total_iters must be >= 1");
  }
  if (family == BenchFamily::fsv) {
    if (kinds.empty()) throw ParseError("benchmark spec: fsv needs at least one smoothing kind");
    for (SmoothingKind k : kinds) {
      if (k == SmoothingKind::lse) throw ParseError("benchmark spec: fsv kinds must be f1..f5");
    }
  }
  for (const BenchSize& s : sizes) {
    switch (family) {
      case BenchFamily::random_cp:
        if (s.n < 1 || s.r_or_m < 1) throw ParseError("benchmark spec: random_cp needs n, r >= 1");
        break;
      case BenchFamily::structured_cp:
        if (s.n < 2 || s.r_or_m < s.n) {
          throw ParseError("benchmark spec: structured_cp needs n >= 2 and r >= n");
        }
        break;
      case BenchFamily::boundary_cp:
        if (s.n != 5) throw ParseError("benchmark spec: boundary_cp has n = 5");
        if (s.r_or_m < 5) throw ParseError("benchmark spec: boundary_cp needs r >= 5");
        if (!(s.param >= 0.0 && s.param <= 1.0)) {
          throw ParseError("benchmark spec: boundary_cp lambda must lie in [0, 1]");
        }
        break;
      case BenchFamily::fsv:
        if (s.n < 1 || s.r_or_m <= s.n) throw ParseError("benchmark spec: fsv needs m > n >= 1");
        break;
    }
  }
}

// Presets ---------------------------------------------------------------------

namespace {

const std::vector<SubAlgorithm> kCpAlgos = {SubAlgorithm::sd, SubAlgorithm::cg, SubAlgorithm::rtr};
const std::vector<SubAlgorithm> kAllAlgos = {SubAlgorithm::sd, SubAlgorithm::bb, SubAlgorithm::cg,
                                             SubAlgorithm::rtr};

const std::vector<double> kBoundaryLambdas = {0.6,  0.65, 0.7,  0.75, 0.8,  0.82, 0.84,
                                              0.86, 0.88, 0.9,  0.91, 0.92, 0.93, 0.94,
                                              0.95, 0.96, 0.97, 0.98, 0.99, 0.999, 0.9999};

BenchmarkSpec make_spec(std::string name, BenchFamily family, std::vector<BenchSize> sizes,
                        int trials) {
  BenchmarkSpec s;
  s.name = std::move(name);
  s.family = family;
  s.sizes = std::move(sizes);
  s.trials = trials;
  s.sub_algorithms = family == BenchFamily::fsv ? kAllAlgos : kCpAlgos;
  if (family == BenchFamily::fsv) s.kinds = {SmoothingKind::abs_f1};
  return s;
}

std::vector<BenchSize> random_sizes(std::initializer_list<Index> ns, bool r15, bool r3) {
  std::vector<BenchSize> out;
  for (Index n : ns) {
    if (r15) out.push_back({n, 3 * n / 2, 0.0});
    if (r3) out.push_back({n, 3 * n, 0.0});
  }
  return out;
}

std::vector<BenchSize> structured_sizes(std::initializer_list<Index> ns) {
  std::vector<BenchSize> out;
  for (Index n : ns) out.push_back({n, n, 0.0});
  return out;
}

std::vector<BenchSize> boundary_sizes(const std::vector<double>& lambdas) {
  std::vector<BenchSize> out;
  for (double l : lambdas) out.push_back({5, 12, l});
  return out;
}

std::vector<BenchSize> fsv_sizes(Index n, std::initializer_list<Index> ms) {
  std::vector<BenchSize> out;
  for (Index m : ms) out.push_back({n, m, 0.0});
  return out;
}

const std::map<std::string, BenchmarkSpec, std::less<>>& presets() {
  static const auto table = [] {
    std::map<std::string, BenchmarkSpec, std::less<>> t;
    auto add = [&t](BenchmarkSpec s) { t.emplace(s.name, std::move(s)); };
    using F = BenchFamily;
    add(make_spec("table2", F::random_cp, random_sizes({20, 30, 40}, true, true), 20));
    add(make_spec("table2-n20", F::random_cp, random_sizes({20}, true, false), 20));
    add(make_spec("table2-n30", F::random_cp, random_sizes({30}, true, false), 20));
    add(make_spec("table2-n40", F::random_cp, random_sizes({40}, true, false), 20));
    add(make_spec("table2-3n", F::random_cp, random_sizes({20, 30, 40}, false, true), 20));
    add(make_spec("table2-large", F::random_cp, random_sizes({100, 200}, true, true), 10));
    add(make_spec("table3", F::structured_cp, structured_sizes({10, 20, 50, 75, 100}), 50));
    add(make_spec("table3-n10", F::structured_cp, structured_sizes({10}), 20));
    add(make_spec("table3-n20", F::structured_cp, structured_sizes({20}), 20));
    add(make_spec("table3-n50", F::structured_cp, structured_sizes({50}), 20));
    add(make_spec("table4", F::boundary_cp, boundary_sizes(kBoundaryLambdas), 50));
    add(make_spec("table4-acceptance", F::boundary_cp, boundary_sizes({0.9, 0.999, 1.0}), 20));
    add(make_spec("table5", F::fsv, fsv_sizes(5, {20, 30, 40, 50}), 50));
    add(make_spec("table5-m50", F::fsv, fsv_sizes(5, {50}), 50));
    add(make_spec("table6", F::fsv, fsv_sizes(10, {60, 80, 100, 120}), 50));
    return t;
  }();
  return table;
}

}  // namespace

std::vector<std::string> preset_names() {
  std::vector<std::string> names;
  for (const auto& [name, spec] : presets()) names.push_back(name);
  return names;
}

BenchmarkSpec preset_spec(std::string_view name) {
  const auto& t = presets();
  const auto it = t.find(name);
  if (it == t.end()) throw ParseError("unknown benchmark preset '" + std::string(name) + "'");
  return it->second;
}

BenchmarkSpec parse_spec_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("benchmark spec: ") + e.what());
  }
  BenchmarkSpec s;
  try {
    s.name = j.value("name", std::string("custom"));
    s.family = parse_bench_family(j.at("family").get<std::string>());
    for (const json& size : j.at("sizes")) {
      BenchSize b;
      b.n = size.at("n").get<Index>();
      if (size.contains("r_or_m")) {
        b.r_or_m = size.at("r_or_m").get<Index>();
      } else if (size.contains("r")) {
        b.r_or_m = size.at("r").get<Index>();
      } else if (size.contains("m")) {
        b.r_or_m = size.at("m").get<Index>();
      } else {
        throw ParseError("benchmark spec: size entry needs r_or_m");
      }
      b.param = size.value("param", size.value("lambda", 0.0));
      s.sizes.push_back(b);
    }
    s.trials = j.value("trials", 1);
    s.seed = j.value("seed", std::uint64_t{1});
    if (j.contains("sub_algorithms")) {
      for (const json& a : j.at("sub_algorithms")) {
        s.sub_algorithms.push_back(parse_sub_algorithm(a.get<std::string>()));
      }
    } else {
      s.sub_algorithms = s.family == BenchFamily::fsv ? kAllAlgos : kCpAlgos;
    }
    if (j.contains("kinds")) {
      for (const json& k : j.at("kinds")) s.kinds.push_back(parse_smoothing_kind(k.get<std::string>()));
    } else if (s.family == BenchFamily::fsv) {
      s.kinds = {SmoothingKind::abs_f1};
    }
    if (j.contains("max_total_iters")) s.max_total_iters = j.at("max_total_iters").get<long>();
  } catch (const json::exception& e) {
    throw ParseError(std::string("benchmark spec: ") + e.what());
  }
  s.validate();
  return s;
}

BenchmarkSpec load_spec_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_spec_json(buf.str());
}

// Running ---------------------------------------------------------------------

namespace {

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

struct Task {
  std::size_t size_index;
  int trial;
  SubAlgorithm algo;
  SmoothingKind kind;
};

struct TaskResult {
  /// One entry for CP; one per threshold in kFsvTaus for fsv.
  std::vector<bool> success;
  double time_s = 0.0;
  long iters = 0;
};

TaskResult run_task(const BenchmarkSpec& spec, const Task& task) {
  const BenchSize& size = spec.sizes[task.size_index];
  SolverConfig cfg = preset_config(spec.family, task.algo);
  if (spec.max_total_iters) cfg.max_total_iters = *spec.max_total_iters;
  Rng rng(task_seed(spec.seed, task.size_index, task.trial));

  TaskResult out;
  const auto t0 = std::chrono::steady_clock::now();
  if (spec.family == BenchFamily::fsv) {
    const FsvInstance inst = gen_fsv_instance(size.n, size.r_or_m, rng);
    const FsvResult r = fsv_solve(inst, cfg, task.kind, rng);
    for (const TauOutcome& t : r.by_tau) out.success.push_back(t.success);
    out.iters = r.trace.total_iters();
  } else {
    CpInstance inst;
    switch (spec.family) {
      case BenchFamily::random_cp: inst = gen_random_cp(size.n, rng); break;
      case BenchFamily::structured_cp: inst = gen_structured(size.n); break;
      default: inst = gen_boundary(size.param); break;
    }
    const CpResult r = cp_factorize(inst.A, size.r_or_m, cfg, rng);
    out.success.push_back(r.success && r.residual <= kCpResidualTol);
    out.iters = r.trace.total_iters();
  }
  out.time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

}  // namespace

std::uint64_t task_seed(std::uint64_t master, std::size_t size_index, int trial) {
  std::uint64_t z = splitmix64(master);
  z = splitmix64(z ^ (0x5BD1E995ULL * (static_cast<std::uint64_t>(size_index) + 1)));
  z = splitmix64(z ^ (0xC2B2AE35ULL * (static_cast<std::uint64_t>(trial) + 1)));
  return z;
}

std::vector<BenchRow> run_benchmark(const BenchmarkSpec& spec, int jobs) {
  spec.validate();
  const std::vector<SmoothingKind> kinds =
      spec.family == BenchFamily::fsv ? spec.kinds : std::vector<SmoothingKind>{SmoothingKind::lse};

  std::vector<Task> tasks;
  for (std::size_t si = 0; si < spec.sizes.size(); ++si)
    for (SubAlgorithm algo : spec.sub_algorithms)
      for (SmoothingKind kind : kinds)
        for (int t = 0; t < spec.trials; ++t) tasks.push_back({si, t, algo, kind});

  std::vector<TaskResult> results(tasks.size());
  std::vector<std::string> errors(tasks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < tasks.size(); i = next++) {
      try {
        results[i] = run_task(spec, tasks[i]);
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    }
  };
  if (jobs <= 0) jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  jobs = std::min<int>(jobs, static_cast<int>(std::max<std::size_t>(tasks.size(), 1)));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (std::thread& th : pool) th.join();
  }
  for (const std::string& e : errors) {
    if (!e.empty()) throw Error("benchmark task failed: " + e);
  }

  // Tasks were laid out cell by cell, `trials` consecutive entries per cell.
  std::vector<BenchRow> rows;
  const std::size_t n_tau = spec.family == BenchFamily::fsv ? kFsvTaus.size() : 1;
  for (std::size_t start = 0; start < tasks.size(); start += spec.trials) {
    const Task& cell = tasks[start];
    const BenchSize& size = spec.sizes[cell.size_index];
    for (std::size_t ti = 0; ti < n_tau; ++ti) {
      BenchRow row;
      row.family = spec.family;
      row.n = size.n;
      row.r_or_m = size.r_or_m;
      row.param = size.param;
      row.sub_algorithm = cell.algo;
      row.kind = cell.kind;
      if (spec.family == BenchFamily::fsv) row.tau = kFsvTaus[ti];
      row.trials = spec.trials;
      row.seed = spec.seed;
      double time_sum = 0.0;
      double iter_sum = 0.0;
      for (int t = 0; t < spec.trials; ++t) {
        const TaskResult& r = results[start + t];
        if (!r.success[ti]) continue;
        ++row.successes;
        time_sum += r.time_s;
        iter_sum += static_cast<double>(r.iters);
      }
      row.rate = std::round(100.0 * row.successes / row.trials) / 100.0;
      if (row.successes > 0) {
        row.time_s = time_sum / row.successes;
        row.iter_s = iter_sum / row.successes;
      }
      rows.push_back(row);
    }
  }
  return rows;
}

// Output ----------------------------------------------------------------------

namespace {

std::string format(const char* fmt, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, v);
  return buf;
}

std::string param_field(const BenchRow& row) {
  return row.family == BenchFamily::boundary_cp ? format("%g", row.param) : "";
}

}  // namespace

void write_csv(std::ostream& out, const std::vector<BenchRow>& rows) {
  out << kBenchCsvHeader << '\n';
  for (const BenchRow& r : rows) {
    out << to_string(r.family) << ',' << r.n << ',' << r.r_or_m << ',' << param_field(r) << ','
        << to_string(r.sub_algorithm) << ',' << to_string(r.kind) << ','
        << (r.tau ? format("%g", *r.tau) : "") << ',' << format("%.2f", r.rate) << ','
        << format("%.4f", r.time_s) << ',' << format("%.1f", r.iter_s) << ',' << r.trials << ','
        << r.seed << '\n';
  }
}

std::string rows_to_json(const std::vector<BenchRow>& rows) {
  json arr = json::array();
  for (const BenchRow& r : rows) {
    json j = {{"family", to_string(r.family)},
              {"n", r.n},
              {"r_or_m", r.r_or_m},
              {"sub_algorithm", to_string(r.sub_algorithm)},
              {"kind", to_string(r.kind)},
              {"successes", r.successes},
              {"trials", r.trials},
              {"rate", r.rate},
              {"time_s", r.time_s},
              {"iter_s", r.iter_s},
              {"seed", r.seed}};
    if (r.family == BenchFamily::boundary_cp) j["param"] = r.param;
    j["tau"] = r.tau ? json(*r.tau) : json(nullptr);
    arr.push_back(std::move(j));
  }
  return arr.dump(2);
}

}  // namespace rsmooth
