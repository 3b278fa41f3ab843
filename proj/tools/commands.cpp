#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <memory>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "plap/plap.h"

namespace plapcli {

namespace {

using Json = nlohmann::ordered_json;
namespace fs = std::filesystem;

class ApiError : public std::runtime_error {
 public:
  ApiError(plap_status status, const std::string& what) : std::runtime_error(what), status_(status) {}
  plap_status status() const { return status_; }

 private:
  plap_status status_;
};

void ok(plap_status status, const char* what) {
  if (status != PLAP_OK) throw ApiError(status, std::string(what) + ": " + plap_last_error());
}

struct ProblemDeleter {
  void operator()(plap_problem* p) const { plap_problem_destroy(p); }
};
struct NonlinearityDeleter {
  void operator()(plap_nonlinearity* p) const { plap_nonlinearity_destroy(p); }
};
struct SolutionSetDeleter {
  void operator()(plap_solution_set* p) const { plap_solution_set_destroy(p); }
};
struct StringDeleter {
  void operator()(char* s) const { plap_string_free(s); }
};
using ProblemPtr = std::unique_ptr<plap_problem, ProblemDeleter>;
using NonlinearityPtr = std::unique_ptr<plap_nonlinearity, NonlinearityDeleter>;
using SolutionSetPtr = std::unique_ptr<plap_solution_set, SolutionSetDeleter>;
using StringPtr = std::unique_ptr<char, StringDeleter>;

double power_weight(double r, void* user) { return std::pow(r, *static_cast<const double*>(user)); }

// Problem, nonlinearity and the state their callbacks point into.
struct Session {
  std::unique_ptr<double> weight_exponent;
  ProblemPtr problem;
  NonlinearityPtr nl;
  plap_branch branch = PLAP_BRANCH_INFINITY;
  double p = 0.0;
  double q0 = 0.0;
  double q1 = 0.0;
  double growth = NAN;
  int k_max = 0;
};

const char* family_name(Family family) {
  switch (family) {
    case Family::Oscillating: return "oscillating";
    case Family::Zero: return "zero";
    case Family::Power: return "power";
    case Family::Table: return "table";
  }
  return "unknown";
}

Session open_problem(const RunConfig& cfg) {
  Session s;
  const auto& pc = cfg.problem;
  plap_problem* problem = nullptr;
  ok(plap_problem_create(pc.dimension, pc.p, pc.inner, pc.outer, &problem), "problem");
  s.problem.reset(problem);
  if (pc.weight_exponent) {
    s.weight_exponent = std::make_unique<double>(*pc.weight_exponent);
    ok(plap_problem_set_radial_weight(problem, power_weight, s.weight_exponent.get()), "radial weight");
  }
  if (pc.constant_weight) ok(plap_problem_set_constant_weight(problem, *pc.constant_weight), "constant weight");
  ok(plap_problem_weight_bounds(problem, &s.q0, &s.q1), "weight bounds");
  s.p = pc.p;
  return s;
}

void open_nonlinearity(const RunConfig& cfg, Session& s) {
  const auto& nc = cfg.nonlinearity;
  s.branch = nc.zero_branch ? PLAP_BRANCH_ZERO : PLAP_BRANCH_INFINITY;
  s.k_max = nc.k_max > 0 ? nc.k_max : cfg.certificate.count;
  plap_nonlinearity* nl = nullptr;
  switch (nc.family) {
    case Family::Oscillating: {
      double threshold = 0.0;
      ok(plap_growth_threshold(s.p, s.q0, &threshold), "growth threshold");
      s.growth = nc.growth ? *nc.growth : nc.growth_factor * threshold;
      ok(plap_nonlinearity_oscillating(s.p, s.q0, s.growth, s.k_max, s.branch, &nl), "nonlinearity");
      break;
    }
    case Family::Zero:
      ok(plap_nonlinearity_zero(&nl), "nonlinearity");
      break;
    case Family::Power:
      ok(plap_nonlinearity_power(nc.coefficient, nc.exponent, &nl), "nonlinearity");
      break;
    case Family::Table: {
      std::vector<double> lo, hi, coeffs;
      std::vector<size_t> offsets{0};
      for (const auto& piece : nc.table) {
        lo.push_back(piece.lo);
        hi.push_back(piece.hi);
        coeffs.insert(coeffs.end(), piece.coeffs.begin(), piece.coeffs.end());
        offsets.push_back(coeffs.size());
      }
      ok(plap_nonlinearity_piecewise(lo.size(), lo.data(), hi.data(), offsets.data(), coeffs.data(), &nl),
         "nonlinearity");
      break;
    }
  }
  s.nl.reset(nl);
  if (nc.sequences == SequenceSource::Builtin) {
    std::vector<double> a(static_cast<size_t>(s.k_max)), b(static_cast<size_t>(s.k_max));
    ok(plap_oscillating_layout(s.k_max, s.branch, a.data(), b.data()), "sequences");
    ok(plap_nonlinearity_set_sequences(nl, a.size(), a.data(), b.data()), "sequences");
  } else if (nc.sequences == SequenceSource::Explicit) {
    ok(plap_nonlinearity_set_sequences(nl, nc.seq_a.size(), nc.seq_a.data(), nc.seq_b.data()), "sequences");
  }
}

Session open_session(const RunConfig& cfg) {
  Session s = open_problem(cfg);
  open_nonlinearity(cfg, s);
  return s;
}

fs::path output_dir(const RunConfig& cfg, const CommandOptions& options) {
  const fs::path dir = options.out_dir.empty() ? fs::path(cfg.output.directory) : fs::path(options.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ApiError(PLAP_ERR_IO, "cannot create output directory '" + dir.string() + "': " + ec.message());
  return dir;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
  if (!text.empty() && text.back() != '\n') out << '\n';
  if (!out) throw ApiError(PLAP_ERR_IO, "cannot write '" + path.string() + "'");
}

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

Json problem_json(const RunConfig& cfg, const Session& s) {
  Json j;
  j["dimension"] = cfg.problem.dimension;
  j["p"] = cfg.problem.p;
  j["inner"] = cfg.problem.inner;
  j["outer"] = cfg.problem.outer;
  j["q0"] = s.q0;
  j["q1"] = s.q1;
  return j;
}

Json nonlinearity_json(const RunConfig& cfg, const Session& s) {
  Json j;
  j["family"] = family_name(cfg.nonlinearity.family);
  j["branch"] = s.branch == PLAP_BRANCH_ZERO ? "zero" : "infinity";
  j["k_max"] = s.k_max;
  if (std::isfinite(s.growth)) j["growth"] = s.growth;
  return j;
}

// Runs the hypothesis check, writes hypotheses.json and prints a summary.
bool check_and_report(const RunConfig& cfg, const CommandOptions& options, const Session& s, const fs::path& dir,
                      std::ostream& log) {
  size_t terms = 0;
  ok(plap_nonlinearity_sequence_count(s.nl.get(), &terms), "sequences");
  if (terms == 0) {
    throw ApiError(PLAP_ERR_INVALID_ARGUMENT,
                   "nonlinearity has no oscillation sequences (set nonlinearity.sequences = builtin or explicit)");
  }
  plap_hypothesis_options hopts;
  plap_hypothesis_options_init(&hopts);
  hopts.threads = options.threads;
  if (cfg.certificate.window_lo) {
    hopts.has_window = 1;
    hopts.window_lo = *cfg.certificate.window_lo;
    hopts.window_hi = *cfg.certificate.window_hi;
  }
  char* raw = nullptr;
  int all_hold = 0;
  ok(plap_check_hypotheses(s.nl.get(), s.p, s.q0, cfg.certificate.count, s.branch, &hopts, &raw, &all_hold),
     "hypotheses");
  StringPtr text(raw);
  write_text(dir / "hypotheses.json", raw);

  const Json report = Json::parse(raw);
  auto mark = [](bool holds) { return holds ? "pass" : "FAIL"; };
  log << "branch " << report["branch"].get<std::string>() << ", K = " << report["count"] << "\n";
  log << "  f(0) = 0, F >= 0        " << mark(report["assumptions"]["holds"]) << "\n";
  log << "  b_k/a_k -> inf          " << mark(report["ratios"]["holds"]) << "\n";
  log << "  f <= 0 on plateaus      " << mark(report["plateaus"]["holds"]) << "\n";
  const auto& growth = report["growth"];
  log << "  growth window           " << mark(growth["holds"]) << "  (heuristic: proxy "
      << growth["proxy"]["value"] << " vs threshold " << growth["threshold"] << ")\n";
  log << "wrote " << (dir / "hypotheses.json").string() << "\n";
  return all_hold != 0;
}

}  // namespace

int cmd_map(const RunConfig& cfg, const CommandOptions& options, std::ostream& log) {
  const Session s = open_problem(cfg);
  const fs::path dir = output_dir(cfg, options);
  plap_map_case map_case = PLAP_MAP_SUBCRITICAL;
  ok(plap_problem_map_case(s.problem.get(), &map_case), "map case");

  const auto& pc = cfg.problem;
  const size_t n = cfg.output.map_points;
  std::string csv = "r,t,q\n";
  for (size_t i = 0; i < n; ++i) {
    const double r = i + 1 == n ? pc.outer : pc.inner + (pc.outer - pc.inner) * static_cast<double>(i) / (n - 1);
    double t = 0.0, q = 0.0;
    ok(plap_problem_r_to_t(s.problem.get(), r, &t), "r_to_t");
    ok(plap_problem_weight(s.problem.get(), t, &q), "weight");
    csv += fmt(r) + "," + fmt(t) + "," + fmt(q) + "\n";
  }
  write_text(dir / "map.csv", csv);
  log << (map_case == PLAP_MAP_CRITICAL ? "critical (p = N)" : "subcritical (N > p)") << " change of variables\n";
  log << "q0 = " << fmt(s.q0) << "\nq1 = " << fmt(s.q1) << "\n";
  log << "wrote " << (dir / "map.csv").string() << "\n";
  return kSuccess;
}

int cmd_check(const RunConfig& cfg, const CommandOptions& options, std::ostream& log) {
  const Session s = open_session(cfg);
  const fs::path dir = output_dir(cfg, options);
  return check_and_report(cfg, options, s, dir, log) ? kSuccess : kVerdictFailed;
}

int cmd_certify(const RunConfig& cfg, const CommandOptions& options, std::ostream& log) {
  const Session s = open_session(cfg);
  const fs::path dir = output_dir(cfg, options);
  if (!check_and_report(cfg, options, s, dir, log)) {
    if (!options.force) {
      log << "hypotheses fail; not certifying (use --force to override)\n";
      return kVerdictFailed;
    }
    log << "hypotheses fail; certifying anyway (--force)\n";
  }

  plap_certificate_options copts;
  plap_certificate_options_init(&copts);
  const auto& cc = cfg.certificate;
  copts.count = cc.count;
  copts.branch = s.branch;
  copts.t0 = cc.t0;
  copts.has_gamma = cc.gamma.has_value();
  copts.gamma = cc.gamma.value_or(0.0);
  copts.has_h = cc.h.has_value();
  copts.h = cc.h.value_or(0.0);
  copts.elements = cc.elements;
  copts.threads = options.threads;

  struct Job {
    plap_certificate_kind kind;
    const char* file;
  };
  const std::vector<Job> jobs{
      {PLAP_CERT_PHI_BOUND, "certificate_phi_bound.json"},
      s.branch == PLAP_BRANCH_ZERO ? Job{PLAP_CERT_ENERGY_NEGATIVE_SMALL, "certificate_energy_negative_small.json"}
                                   : Job{PLAP_CERT_ENERGY_UNBOUNDED, "certificate_energy_unbounded.json"},
  };
  bool all = true;
  for (const auto& job : jobs) {
    char* raw = nullptr;
    int verdict = 0;
    const plap_status status = plap_certify(s.problem.get(), s.nl.get(), job.kind, &copts, &raw, &verdict);
    if (status != PLAP_OK) {
      // Infeasible h or gamma, or no eta_k in the search window.
      log << job.file << ": not produced: " << plap_last_error() << "\n";
      all = false;
      continue;
    }
    StringPtr text(raw);
    write_text(dir / job.file, raw);
    const Json cert = Json::parse(raw);
    log << cert["kind"].get<std::string>() << ": verdict " << (verdict ? "true" : "false");
    if (!cert["k_star"].is_null()) log << ", k* = " << cert["k_star"];
    log << "  -> " << (dir / job.file).string() << "\n";
    all = all && verdict != 0;
  }
  return all ? kSuccess : kVerdictFailed;
}

int cmd_solve(const RunConfig& cfg, const CommandOptions& options, std::ostream& log) {
  const Session s = open_session(cfg);
  const fs::path dir = output_dir(cfg, options);
  const bool zero = s.branch == PLAP_BRANCH_ZERO;
  const auto& sc = cfg.solver;

  plap_solve_options so;
  plap_solve_options_init(&so);
  so.slope_lo = sc.slope_lo.value_or(zero ? 1e-4 : 0.0);
  so.slope_hi = sc.slope_hi.value_or(zero ? 10.0 : 200.0);
  so.samples = sc.samples;
  so.log_spacing = sc.log_spacing.value_or(zero) ? 1 : 0;
  so.refine = sc.refine ? 1 : 0;
  so.refine_factor = sc.refine_factor;
  so.elements = sc.elements;
  so.substeps = sc.substeps;
  so.terminal_tolerance = sc.terminal_tolerance;
  so.residual_tolerance = sc.residual_tolerance;
  so.nonneg_tolerance = sc.nonneg_tolerance;
  so.divergence_bound = sc.divergence_bound;
  so.max_bisections = sc.max_bisections;
  so.threads = options.threads;
  so.polish = sc.polish ? 1 : 0;
  so.descent_tolerance = sc.descent_tolerance;
  so.descent_max_iterations = sc.descent_max_iterations;
  so.dedupe_tolerance = sc.dedupe_tolerance.value_or(zero ? 1e-6 : 1e-3);

  Json sweep_range{{"slope_lo", so.slope_lo}, {"slope_hi", so.slope_hi}, {"samples", so.samples},
                   {"log_spacing", so.log_spacing != 0}};
  plap_solution_set* raw_set = nullptr;
  const plap_status status = plap_solve(s.problem.get(), s.nl.get(), &so, &raw_set);
  if (status == PLAP_ERR_NUMERICAL) {
    // Every sampled slope diverged: nothing to bracket.
    log << "no solutions: " << plap_last_error() << "\nswept " << sweep_range.dump() << "\n";
    return kNoSolutions;
  }
  ok(status, "solve");
  SolutionSetPtr set(raw_set);

  char* raw_report = nullptr;
  ok(plap_solution_set_report(set.get(), &raw_report), "report");
  StringPtr report_text(raw_report);
  const Json sweep = Json::parse(raw_report);

  size_t count = 0;
  ok(plap_solution_count(set.get(), &count), "count");
  std::vector<plap_solution_info> infos(count);
  for (size_t i = 0; i < count; ++i) ok(plap_solution_info_get(set.get(), i, &infos[i]), "info");
  std::vector<size_t> order;
  bool trivial = false;
  for (size_t i = 0; i < count; ++i) {
    if (infos[i].sup > 0.0) order.push_back(i);
    else trivial = true;
  }
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) { return infos[a].sup < infos[b].sup; });

  Json summary;
  summary["problem"] = problem_json(cfg, s);
  summary["nonlinearity"] = nonlinearity_json(cfg, s);
  summary["sweep"] = sweep;
  summary["trivial_solution_found"] = trivial;
  Json list = Json::array();

  const size_t radial = cfg.output.radial_points;
  std::vector<double> r(radial), u(radial);
  for (size_t rank = 0; rank < order.size(); ++rank) {
    const size_t idx = order[rank];
    const auto& info = infos[idx];
    char stem[32];
    std::snprintf(stem, sizeof stem, "solution_%03zu", rank);
    const std::string tv_file = std::string(stem) + ".csv";
    ok(plap_solution_write_csv(set.get(), idx, (dir / tv_file).string().c_str()), "write");

    Json entry;
    entry["index"] = rank;
    entry["file_tv"] = tv_file;
    entry["slope"] = info.slope;
    entry["nodes"] = info.nodes;
    entry["p_norm"] = info.p_norm;
    entry["phi"] = info.phi;
    entry["psi"] = info.psi;
    entry["energy"] = info.energy;
    entry["weak_residual"] = info.weak_residual;
    entry["sup"] = info.sup;
    entry["min_value"] = info.min_value;
    entry["polished"] = info.polished != 0;
    if (cfg.output.write_radial) {
      double residual = 0.0;
      ok(plap_solution_pullback(s.problem.get(), set.get(), idx, radial, r.data(), u.data(), &residual), "pullback");
      const std::string ru_file = std::string(stem) + "_radial.csv";
      std::string csv = "r,u\n";
      for (size_t i = 0; i < radial; ++i) csv += fmt(r[i]) + "," + fmt(u[i]) + "\n";
      write_text(dir / ru_file, csv);
      entry["file_ru"] = ru_file;
      entry["radial_residual"] = residual;
    }
    list.push_back(entry);
    log << stem << ": sup " << fmt(info.sup) << "  ||v||^p " << fmt(info.p_norm) << "  E " << fmt(info.energy)
        << "  residual " << info.weak_residual << "\n";
  }
  summary["solutions"] = list;
  write_text(dir / "summary.json", summary.dump(2));
  log << order.size() << " nontrivial solution(s); wrote " << (dir / "summary.json").string() << "\n";
  if (order.empty()) {
    log << "no solutions in swept range " << sweep_range.dump() << "\n";
    return kNoSolutions;
  }
  return kSuccess;
}

int run(const std::string& command, const std::string& config_path, const CommandOptions& options,
        std::ostream& log, std::ostream& err) {
  try {
    if (options.threads < 1) throw ConfigError("--threads must be at least 1");
    const RunConfig cfg = load_config(config_path);
    if (command == "map") return cmd_map(cfg, options, log);
    if (command == "check") return cmd_check(cfg, options, log);
    if (command == "certify") return cmd_certify(cfg, options, log);
    if (command == "solve") return cmd_solve(cfg, options, log);
    err << "error: unknown command '" << command << "'\n";
    return kInvalidInput;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kInvalidInput;
  } catch (const ApiError& e) {
    err << "error: " << e.what() << "\n";
    return e.status() == PLAP_ERR_NUMERICAL || e.status() == PLAP_ERR_NOT_FOUND ? kVerdictFailed : kInvalidInput;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kInvalidInput;
  }
}

}  // namespace plapcli
