#include "plap/plap.h"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <memory>
#include <new>
#include <string>
#include <vector>

#include "certificates.hpp"
#include "coordinates.hpp"
#include "errors.hpp"
#include "nonlinearity.hpp"
#include "radial.hpp"
#include "report_json.hpp"
#include "solver.hpp"

struct plap_problem {
  plap::CoordinateMap map;
  plap::WeightFunction q;
  plap::RadialFunction g;
};

struct plap_nonlinearity {
  plap::Nonlinearity nl;
};

struct plap_solution_set {
  plap::Nonlinearity nl;
  std::vector<plap::Solution> solutions;
  plap::Json report;
};

namespace {

thread_local std::string last_error;

plap_status to_status(plap::ErrorCode code) {
  switch (code) {
    case plap::ErrorCode::InvalidArgument: return PLAP_ERR_INVALID_ARGUMENT;
    case plap::ErrorCode::OutOfRange: return PLAP_ERR_OUT_OF_RANGE;
    case plap::ErrorCode::NumericalFailure: return PLAP_ERR_NUMERICAL;
    case plap::ErrorCode::NotFound: return PLAP_ERR_NOT_FOUND;
    case plap::ErrorCode::Io: return PLAP_ERR_IO;
  }
  return PLAP_ERR_INTERNAL;
}

template <class Body>
plap_status guard(Body&& body) {
  last_error.clear();
  try {
    body();
    return PLAP_OK;
  } catch (const plap::Error& e) {
    last_error = e.what();
    return to_status(e.code());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
  } catch (const std::exception& e) {
    last_error = e.what();
  } catch (...) {
    last_error = "unknown error";
  }
  return PLAP_ERR_INTERNAL;
}

template <class T>
void need(const T* ptr, const char* what) {
  if (ptr == nullptr) plap::fail(plap::ErrorCode::InvalidArgument, std::string(what) + " is null");
}

char* copy_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

plap::Branch to_branch(plap_branch branch) {
  switch (branch) {
    case PLAP_BRANCH_INFINITY: return plap::Branch::Infinity;
    case PLAP_BRANCH_ZERO: return plap::Branch::Zero;
  }
  plap::fail(plap::ErrorCode::InvalidArgument, "unknown branch");
}

const plap::Solution& solution_at(const plap_solution_set* set, size_t index) {
  need(set, "solution set");
  if (index >= set->solutions.size()) {
    plap::fail(plap::ErrorCode::OutOfRange, "solution index " + std::to_string(index) + " out of range");
  }
  return set->solutions[index];
}

}  // namespace

extern "C" {

const char* plap_last_error(void) { return last_error.c_str(); }

const char* plap_version(void) { return "1.0.0"; }

void plap_string_free(char* s) { std::free(s); }

plap_status plap_problem_create(int dimension, double p, double inner, double outer, plap_problem** out) {
  return guard([&] {
    need(out, "out");
    *out = nullptr;
    auto map = plap::CoordinateMap::build(plap::AnnulusSpec{dimension, p, inner, outer});
    auto q = plap::weight_q(map);
    *out = new plap_problem{std::move(map), std::move(q), {}};
  });
}

void plap_problem_destroy(plap_problem* problem) { delete problem; }

plap_status plap_problem_set_radial_weight(plap_problem* problem, plap_scalar_fn g, void* user) {
  return guard([&] {
    need(problem, "problem");
    need(reinterpret_cast<const void*>(g), "g");
    plap::RadialFunction radial = [g, user](double r) { return g(r, user); };
    problem->q = plap::nonautonomous_weight(problem->map, radial);
    problem->g = std::move(radial);
  });
}

plap_status plap_problem_set_constant_weight(plap_problem* problem, double c) {
  return guard([&] {
    need(problem, "problem");
    plap::require(c > 0.0 && std::isfinite(c), "constant weight must be positive");
    problem->q = plap::constant_weight(c);
    problem->g = {};
  });
}

plap_status plap_problem_map_case(const plap_problem* problem, plap_map_case* out) {
  return guard([&] {
    need(problem, "problem");
    need(out, "out");
    *out = problem->map.map_case() == plap::MapCase::Critical ? PLAP_MAP_CRITICAL : PLAP_MAP_SUBCRITICAL;
  });
}

plap_status plap_problem_p(const plap_problem* problem, double* p) {
  return guard([&] {
    need(problem, "problem");
    need(p, "p");
    *p = problem->map.spec().p;
  });
}

plap_status plap_problem_r_to_t(const plap_problem* problem, double r, double* t) {
  return guard([&] {
    need(problem, "problem");
    need(t, "t");
    *t = problem->map.r_to_t(r);
  });
}

plap_status plap_problem_t_to_r(const plap_problem* problem, double t, double* r) {
  return guard([&] {
    need(problem, "problem");
    need(r, "r");
    *r = problem->map.t_to_r(t);
  });
}

plap_status plap_problem_weight(const plap_problem* problem, double t, double* q) {
  return guard([&] {
    need(problem, "problem");
    need(q, "q");
    if (!(t >= 0.0 && t <= 1.0)) plap::fail(plap::ErrorCode::OutOfRange, "t outside [0, 1]");
    *q = problem->q(t);
  });
}

plap_status plap_problem_weight_bounds(const plap_problem* problem, double* q0, double* q1) {
  return guard([&] {
    need(problem, "problem");
    if (q0 != nullptr) *q0 = problem->q.q0;
    if (q1 != nullptr) *q1 = problem->q.q1;
  });
}

plap_status plap_nonlinearity_zero(plap_nonlinearity** out) {
  return guard([&] {
    need(out, "out");
    *out = new plap_nonlinearity{plap::zero_nonlinearity()};
  });
}

plap_status plap_nonlinearity_power(double coefficient, double exponent, plap_nonlinearity** out) {
  return guard([&] {
    need(out, "out");
    *out = new plap_nonlinearity{plap::power_nonlinearity(coefficient, exponent)};
  });
}

plap_status plap_nonlinearity_piecewise(size_t count, const double* lo, const double* hi, const size_t* offsets,
                                        const double* coeffs, plap_nonlinearity** out) {
  return guard([&] {
    need(out, "out");
    plap::require(count > 0, "piecewise: need at least one piece");
    need(lo, "lo");
    need(hi, "hi");
    need(offsets, "offsets");
    need(coeffs, "coeffs");
    std::vector<plap::PolynomialPiece> pieces(count);
    for (size_t i = 0; i < count; ++i) {
      plap::require(offsets[i + 1] > offsets[i], "piecewise: every piece needs a coefficient");
      pieces[i].lo = lo[i];
      pieces[i].hi = hi[i];
      pieces[i].coeffs.assign(coeffs + offsets[i], coeffs + offsets[i + 1]);
    }
    *out = new plap_nonlinearity{plap::piecewise_polynomial(std::move(pieces))};
  });
}

plap_status plap_nonlinearity_callback(const char* name, plap_scalar_fn f, void* user, plap_nonlinearity** out) {
  return guard([&] {
    need(out, "out");
    need(reinterpret_cast<const void*>(f), "f");
    *out = new plap_nonlinearity{
        plap::Nonlinearity::with_quadrature(name ? name : "callback", [f, user](double x) { return f(x, user); })};
  });
}

plap_status plap_nonlinearity_oscillating(double p, double q0, double growth, int k_max, plap_branch branch,
                                          plap_nonlinearity** out) {
  return guard([&] {
    need(out, "out");
    *out = new plap_nonlinearity{plap::build_oscillating_f(p, q0, growth, k_max, to_branch(branch))};
  });
}

plap_status plap_nonlinearity_set_sequences(plap_nonlinearity* nl, size_t count, const double* a,
                                            const double* b) {
  return guard([&] {
    need(nl, "nonlinearity");
    need(a, "a");
    need(b, "b");
    plap::OscillationSequences seqs{std::vector<double>(a, a + count), std::vector<double>(b, b + count)};
    nl->nl = nl->nl.with_sequences(std::move(seqs));
  });
}

void plap_nonlinearity_destroy(plap_nonlinearity* nl) { delete nl; }

plap_status plap_oscillating_layout(int k_max, plap_branch branch, double* a, double* b) {
  return guard([&] {
    need(a, "a");
    need(b, "b");
    const plap::OscillationSequences seqs = plap::oscillating_layout(k_max, to_branch(branch));
    std::copy(seqs.a.begin(), seqs.a.end(), a);
    std::copy(seqs.b.begin(), seqs.b.end(), b);
  });
}

plap_status plap_nonlinearity_eval(const plap_nonlinearity* nl, double x, double* f, double* F) {
  return guard([&] {
    need(nl, "nonlinearity");
    if (f != nullptr) *f = nl->nl.f(x);
    if (F != nullptr) *F = nl->nl.F(x);
  });
}

plap_status plap_nonlinearity_sequence_count(const plap_nonlinearity* nl, size_t* count) {
  return guard([&] {
    need(nl, "nonlinearity");
    need(count, "count");
    *count = nl->nl.sequences() ? nl->nl.sequences()->size() : 0;
  });
}

plap_status plap_sigma(double p, double q0, double* sigma, double* mu_bar, double* grid_sigma,
                       double* grid_argmin) {
  return guard([&] {
    const plap::SigmaResult result = plap::sigma(p, q0);
    if (sigma != nullptr) *sigma = result.sigma;
    if (mu_bar != nullptr) *mu_bar = result.mu_bar;
    if (grid_sigma != nullptr) *grid_sigma = result.grid_sigma;
    if (grid_argmin != nullptr) *grid_argmin = result.grid_argmin;
  });
}

plap_status plap_embedding_constant(double p, double* c) {
  return guard([&] {
    need(c, "c");
    *c = plap::embedding_constant(p);
  });
}

plap_status plap_growth_threshold(double p, double q0, double* threshold) {
  return guard([&] {
    need(threshold, "threshold");
    *threshold = plap::growth_threshold(p, q0);
  });
}

void plap_hypothesis_options_init(plap_hypothesis_options* options) {
  if (options == nullptr) return;
  options->has_window = 0;
  options->window_lo = 0.0;
  options->window_hi = 0.0;
  options->threads = 1;
}

plap_status plap_check_hypotheses(const plap_nonlinearity* nl, double p, double q0, int count, plap_branch branch,
                                  const plap_hypothesis_options* options, char** json, int* all_hold) {
  return guard([&] {
    need(nl, "nonlinearity");
    need(json, "json");
    *json = nullptr;
    plap::HypothesisOptions opts;
    if (options != nullptr) {
      if (options->has_window) {
        opts.window_lo = options->window_lo;
        opts.window_hi = options->window_hi;
      }
      opts.threads = options->threads;
    }
    const plap::HypothesisReport report = plap::check_hypotheses(nl->nl, p, q0, count, to_branch(branch), opts);
    *json = copy_string(plap::to_json(report).dump(2));
    if (all_hold != nullptr) *all_hold = report.all_hold() ? 1 : 0;
  });
}

void plap_certificate_options_init(plap_certificate_options* options) {
  if (options == nullptr) return;
  const plap::CertificateOptions defaults;
  options->count = defaults.count;
  options->branch = PLAP_BRANCH_INFINITY;
  options->t0 = defaults.t0;
  options->has_gamma = 0;
  options->gamma = 0.0;
  options->has_h = 0;
  options->h = 0.0;
  options->elements = defaults.elements;
  options->threads = defaults.threads;
}

plap_status plap_certify(const plap_problem* problem, const plap_nonlinearity* nl, plap_certificate_kind kind,
                         const plap_certificate_options* options, char** json, int* verdict) {
  return guard([&] {
    need(problem, "problem");
    need(nl, "nonlinearity");
    need(json, "json");
    *json = nullptr;
    plap_certificate_options raw;
    plap_certificate_options_init(&raw);
    if (options != nullptr) raw = *options;
    plap::CertificateOptions opts;
    opts.count = raw.count;
    opts.branch = to_branch(raw.branch);
    opts.t0 = raw.t0;
    if (raw.has_gamma) opts.gamma = raw.gamma;
    if (raw.has_h) opts.h = raw.h;
    opts.elements = raw.elements;
    opts.threads = raw.threads;
    const double p = problem->map.spec().p;

    plap::Certificate cert;
    switch (kind) {
      case PLAP_CERT_PHI_BOUND:
        cert = plap::check_phi_bound(nl->nl, p, problem->q, plap::embedding_constant(p), opts);
        break;
      case PLAP_CERT_ENERGY_UNBOUNDED:
        cert = plap::check_energy_unbounded(nl->nl, p, problem->q, opts);
        break;
      case PLAP_CERT_ENERGY_NEGATIVE_SMALL:
        cert = plap::check_small_branch(nl->nl, p, problem->q, opts);
        break;
      default:
        plap::fail(plap::ErrorCode::InvalidArgument, "unknown certificate kind");
    }
    *json = copy_string(plap::to_json(cert).dump(2));
    if (verdict != nullptr) *verdict = cert.verdict ? 1 : 0;
  });
}

void plap_solve_options_init(plap_solve_options* options) {
  if (options == nullptr) return;
  const plap::ShootingOptions shooting;
  const plap::DescentOptions descent;
  options->slope_lo = shooting.slope_lo;
  options->slope_hi = shooting.slope_hi;
  options->samples = shooting.samples;
  options->log_spacing = shooting.log_spacing ? 1 : 0;
  options->refine = shooting.refine ? 1 : 0;
  options->refine_factor = shooting.refine_factor;
  options->elements = shooting.elements;
  options->substeps = shooting.substeps;
  options->terminal_tolerance = shooting.terminal_tolerance;
  options->residual_tolerance = shooting.residual_tolerance;
  options->nonneg_tolerance = shooting.nonneg_tolerance;
  options->divergence_bound = shooting.divergence_bound;
  options->max_bisections = shooting.max_bisections;
  options->threads = shooting.threads;
  options->polish = 0;
  options->descent_tolerance = descent.tolerance;
  options->descent_max_iterations = descent.max_iterations;
  options->dedupe_tolerance = 1e-3;
}

plap_status plap_solve(const plap_problem* problem, const plap_nonlinearity* nl, const plap_solve_options* options,
                       plap_solution_set** out) {
  return guard([&] {
    need(problem, "problem");
    need(nl, "nonlinearity");
    need(out, "out");
    *out = nullptr;
    plap_solve_options raw;
    plap_solve_options_init(&raw);
    if (options != nullptr) raw = *options;
    plap::require(raw.dedupe_tolerance > 0.0, "dedupe tolerance must be positive");

    plap::ShootingOptions so;
    so.slope_lo = raw.slope_lo;
    so.slope_hi = raw.slope_hi;
    so.samples = raw.samples;
    so.log_spacing = raw.log_spacing != 0;
    so.refine = raw.refine != 0;
    so.refine_factor = raw.refine_factor;
    so.elements = raw.elements;
    so.substeps = raw.substeps;
    so.terminal_tolerance = raw.terminal_tolerance;
    so.residual_tolerance = raw.residual_tolerance;
    so.nonneg_tolerance = raw.nonneg_tolerance;
    so.divergence_bound = raw.divergence_bound;
    so.max_bisections = raw.max_bisections;
    so.threads = raw.threads;

    const double p = problem->map.spec().p;
    plap::ShootingResult result = plap::find_solutions_shooting(problem->q, nl->nl, p, so);
    const std::size_t found = result.solutions.size();

    std::size_t polished = 0;
    if (raw.polish) {
      plap::DescentOptions dopts;
      dopts.tolerance = raw.descent_tolerance;
      dopts.max_iterations = raw.descent_max_iterations;
      for (auto& sol : result.solutions) {
        plap::DescentResult refined = plap::refine_descent(sol.v, p, problem->q, nl->nl, dopts);
        const auto& cand = refined.solution;
        // Descent leaves saddles; keep the result only if it is the same solution.
        if (refined.converged && cand.weak_res < sol.weak_res && cand.min_value >= -so.nonneg_tolerance &&
            plap::sup_distance(sol.v, cand.v) <= raw.dedupe_tolerance) {
          sol = cand;
          ++polished;
        }
      }
    }

    auto set = std::make_unique<plap_solution_set>(
        plap_solution_set{nl->nl, plap::dedupe(std::move(result.solutions), raw.dedupe_tolerance), {}});

    plap::Json report;
    report["slope_lo"] = so.slope_lo;
    report["slope_hi"] = so.slope_hi;
    report["log_spacing"] = so.log_spacing;
    report["sampled_slopes"] = result.slopes.size();
    report["diverged"] = result.diverged;
    report["divergence_bound"] = result.divergence_bound;
    report["accepted"] = found;
    report["polished"] = polished;
    report["distinct"] = set->solutions.size();
    report["dedupe_tolerance"] = raw.dedupe_tolerance;
    plap::Json rejected = plap::Json::array();
    for (const auto& r : result.rejected) {
      rejected.push_back(plap::Json{{"slope", r.slope},
                                    {"terminal", std::isfinite(r.terminal) ? plap::Json(r.terminal) : plap::Json()},
                                    {"weak_residual", std::isfinite(r.weak_res) ? plap::Json(r.weak_res) : plap::Json()},
                                    {"min_value", std::isfinite(r.min_value) ? plap::Json(r.min_value) : plap::Json()},
                                    {"reason", r.reason}});
    }
    report["rejected"] = rejected;
    set->report = std::move(report);
    *out = set.release();
  });
}

void plap_solution_set_destroy(plap_solution_set* set) { delete set; }

plap_status plap_solution_count(const plap_solution_set* set, size_t* count) {
  return guard([&] {
    need(set, "solution set");
    need(count, "count");
    *count = set->solutions.size();
  });
}

plap_status plap_solution_set_report(const plap_solution_set* set, char** json) {
  return guard([&] {
    need(set, "solution set");
    need(json, "json");
    *json = copy_string(set->report.dump(2));
  });
}

plap_status plap_solution_info_get(const plap_solution_set* set, size_t index, plap_solution_info* info) {
  return guard([&] {
    const plap::Solution& s = solution_at(set, index);
    need(info, "info");
    info->slope = s.slope;
    info->p_norm = s.p_norm;
    info->phi = s.energy.phi;
    info->psi = s.energy.psi;
    info->energy = s.energy.energy;
    info->weak_residual = s.weak_res;
    info->sup = s.sup;
    info->min_value = s.min_value;
    info->polished = s.origin == plap::SolutionOrigin::Descent ? 1 : 0;
    info->nodes = s.v.mesh().node_count();
  });
}

plap_status plap_solution_values(const plap_solution_set* set, size_t index, double* t, double* v,
                                 size_t capacity) {
  return guard([&] {
    const plap::Solution& s = solution_at(set, index);
    const std::size_t n = std::min(capacity, s.v.mesh().node_count());
    for (std::size_t i = 0; i < n; ++i) {
      if (t != nullptr) t[i] = s.v.mesh().node(i);
      if (v != nullptr) v[i] = s.v.value(i);
    }
  });
}

plap_status plap_solution_write_csv(const plap_solution_set* set, size_t index, const char* path) {
  return guard([&] {
    const plap::Solution& s = solution_at(set, index);
    need(path, "path");
    plap::write_csv(s.v, path);
  });
}

plap_status plap_solution_pullback(const plap_problem* problem, const plap_solution_set* set, size_t index,
                                   size_t count, double* r, double* u, double* residual) {
  return guard([&] {
    need(problem, "problem");
    const plap::Solution& s = solution_at(set, index);
    const auto& spec = problem->map.spec();
    const std::vector<double> radii = plap::uniform_radii(spec, count);
    const plap::RadialProfile profile = plap::pullback(problem->map, s.v, radii);
    for (std::size_t i = 0; i < count; ++i) {
      if (r != nullptr) r[i] = profile.r[i];
      if (u != nullptr) u[i] = profile.u[i];
    }
    if (residual != nullptr) *residual = plap::radial_residual(profile, spec, set->nl, problem->g);
  });
}

}  // extern "C"
