#include "solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "errors.hpp"
#include "parallel.hpp"

namespace plap {

const char* to_string(SolutionOrigin origin) {
  return origin == SolutionOrigin::Shooting ? "shooting" : "descent";
}

ShootingTrajectory shoot(const WeightFunction& q, const Nonlinearity& nl, double p, double slope,
                         const Mesh& grid, int substeps, double bound) {
  require(p > 1.0, "shoot: p must be > 1");
  require(substeps >= 1, "shoot: substeps must be >= 1");
  ShootingTrajectory traj;
  const std::size_t nodes = grid.node_count();
  traj.t = grid.nodes();
  traj.v.assign(nodes, NAN);
  traj.w.assign(nodes, NAN);

  double v = 0.0;
  double w = phi_p(slope, p);
  traj.v[0] = v;
  traj.w[0] = w;
  auto dv = [p](double flux) { return phi_p_inv(flux, p); };
  auto dw = [&](double t, double value) { return -q(t) * nl.f(value); };

  for (std::size_t e = 0; e + 1 < nodes; ++e) {
    const double h = grid.width(e) / substeps;
    double t = grid.node(e);
    for (int s = 0; s < substeps; ++s) {
      const double k1v = dv(w);
      const double k1w = dw(t, v);
      const double k2v = dv(w + 0.5 * h * k1w);
      const double k2w = dw(t + 0.5 * h, v + 0.5 * h * k1v);
      const double k3v = dv(w + 0.5 * h * k2w);
      const double k3w = dw(t + 0.5 * h, v + 0.5 * h * k2v);
      const double k4v = dv(w + h * k3w);
      const double k4w = dw(t + h, v + h * k3v);
      v += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
      w += h / 6.0 * (k1w + 2.0 * k2w + 2.0 * k3w + k4w);
      t = s + 1 == substeps ? grid.node(e + 1) : t + h;
    }
    if (!(std::abs(v) <= bound && std::abs(w) <= bound)) {
      traj.status = ShotStatus::Diverged;
      traj.terminal = NAN;
      return traj;
    }
    traj.v[e + 1] = v;
    traj.w[e + 1] = w;
  }
  traj.terminal = v;
  return traj;
}

ShootingTrajectory shoot(const WeightFunction& q, const Nonlinearity& nl, double p, double slope,
                         std::size_t steps, double bound) {
  require(steps >= 64, "shoot: need at least 64 steps");
  return shoot(q, nl, p, slope, Mesh::uniform(steps), 1, bound);
}

Solution make_solution(FEFunction v, double p, const WeightFunction& q, const Nonlinearity& nl,
                       SolutionOrigin origin, double slope) {
  Solution sol{std::move(v), slope, 0.0, EnergyBreakdown{}, 0.0, 0.0, 0.0, origin};
  sol.slope = slope;
  sol.origin = origin;
  sol.energy = energy(sol.v, p, q, nl);
  sol.p_norm = sol.energy.psi;
  sol.weak_res = weak_residual(sol.v, p, q, nl);
  sol.sup = sup_norm(sol.v);
  sol.min_value = *std::min_element(sol.v.values().begin(), sol.v.values().end());
  return sol;
}

namespace {

double default_bound(const Nonlinearity& nl) {
  double top = 1.0;
  if (nl.sequences()) {
    for (double b : nl.sequences()->b) top = std::max(top, b);
  }
  return 1e3 * top;
}

std::vector<double> slope_grid(double lo, double hi, int count, bool log_spacing) {
  std::vector<double> s(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    const double x = static_cast<double>(i) / (count - 1);
    s[static_cast<std::size_t>(i)] =
        log_spacing ? lo * std::pow(hi / lo, x) : lo + (hi - lo) * x;
  }
  s.front() = lo;
  s.back() = hi;
  return s;
}

struct Bracket {
  double lo = 0.0;
  double hi = 0.0;
  double f_lo = 0.0;
  double f_hi = 0.0;
};

}  // namespace

ShootingResult find_solutions_shooting(const WeightFunction& q, const Nonlinearity& nl, double p,
                                       const ShootingOptions& options) {
  require(options.elements >= 1, "shooting: mesh needs at least one element");
  return find_solutions_shooting(q, nl, p, Mesh::uniform(options.elements), options);
}

ShootingResult find_solutions_shooting(const WeightFunction& q, const Nonlinearity& nl, double p,
                                       const Mesh& mesh, const ShootingOptions& options) {
  if (!(options.slope_hi > options.slope_lo)) {
    fail(ErrorCode::InvalidArgument, "shooting: empty slope range (need slope_lo < slope_hi)");
  }
  require(options.samples >= 16, "shooting: need at least 16 slope samples");
  require(!options.log_spacing || options.slope_lo > 0.0, "shooting: log spacing needs slope_lo > 0");
  require(options.refine_factor >= 2, "shooting: refine_factor must be >= 2");

  ShootingResult result;
  result.divergence_bound = options.divergence_bound > 0.0 ? options.divergence_bound : default_bound(nl);
  const double bound = result.divergence_bound;
  auto terminal = [&](double s) {
    const auto traj = shoot(q, nl, p, s, mesh, options.substeps, bound);
    return traj.status == ShotStatus::Ok ? traj.terminal : NAN;
  };
  auto evaluate = [&](const std::vector<double>& slopes) {
    std::vector<double> values(slopes.size());
    parallel_for(slopes.size(), options.threads, [&](std::size_t i) { values[i] = terminal(slopes[i]); });
    return values;
  };

  std::vector<double> slopes =
      slope_grid(options.slope_lo, options.slope_hi, options.samples, options.log_spacing);
  std::vector<double> values = evaluate(slopes);

  if (options.refine) {
    // Cells next to a sign change or a local minimum of |v(1)| may hide
    // several roots; resample them.
    const std::size_t n = slopes.size();
    std::vector<bool> mark(n - 1, false);
    for (std::size_t i = 0; i + 1 < n; ++i) {
      if (std::isnan(values[i]) || std::isnan(values[i + 1])) continue;
      if (values[i] * values[i + 1] < 0.0) mark[i] = true;
    }
    for (std::size_t i = 1; i + 1 < n; ++i) {
      const double a = std::abs(values[i - 1]);
      const double b = std::abs(values[i]);
      const double c = std::abs(values[i + 1]);
      if (b < a && b < c) {
        mark[i - 1] = true;
        mark[i] = true;
      }
    }
    std::vector<double> extra;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      if (!mark[i]) continue;
      for (int j = 1; j < options.refine_factor; ++j) {
        const double x = static_cast<double>(j) / options.refine_factor;
        extra.push_back(options.log_spacing ? slopes[i] * std::pow(slopes[i + 1] / slopes[i], x)
                                            : slopes[i] + (slopes[i + 1] - slopes[i]) * x);
      }
    }
    if (!extra.empty()) {
      const std::vector<double> extra_values = evaluate(extra);
      std::vector<std::size_t> order(n + extra.size());
      std::iota(order.begin(), order.end(), 0);
      auto slope_at = [&](std::size_t k) { return k < n ? slopes[k] : extra[k - n]; };
      auto value_at = [&](std::size_t k) { return k < n ? values[k] : extra_values[k - n]; };
      std::sort(order.begin(), order.end(),
                [&](std::size_t x, std::size_t y) { return slope_at(x) < slope_at(y); });
      std::vector<double> merged_s;
      std::vector<double> merged_v;
      for (std::size_t k : order) {
        merged_s.push_back(slope_at(k));
        merged_v.push_back(value_at(k));
      }
      slopes = std::move(merged_s);
      values = std::move(merged_v);
    }
  }

  result.slopes = slopes;
  result.terminals = values;
  result.diverged = static_cast<std::size_t>(
      std::count_if(values.begin(), values.end(), [](double v) { return std::isnan(v); }));
  if (result.diverged == values.size()) {
    std::ostringstream os;
    os << "shooting: every slope in [" << options.slope_lo << ", " << options.slope_hi
       << "] diverged (bound " << bound << ")";
    fail(ErrorCode::NumericalFailure, os.str());
  }

  std::vector<double> roots;
  std::vector<Bracket> brackets;
  for (std::size_t i = 0; i < slopes.size(); ++i) {
    if (values[i] == 0.0) roots.push_back(slopes[i]);
    if (i + 1 < slopes.size() && values[i] * values[i + 1] < 0.0) {
      brackets.push_back(Bracket{slopes[i], slopes[i + 1], values[i], values[i + 1]});
    }
  }

  // Bisection runs until the bracket collapses; the tolerance only decides
  // acceptance. The Dirichlet clamp at t = 1 turns any leftover v(1) into a
  // boundary kink, so the extra digits are not wasted. A bracket that shrinks
  // to adjacent doubles is also accepted: when dv(1)/ds is large one ulp of
  // slope can move v(1) by more than the tolerance, and the weak residual
  // test below still decides.
  struct Candidate {
    double slope = 0.0;
    double terminal = 0.0;
    bool converged = false;
  };
  std::vector<Candidate> candidates(brackets.size());
  parallel_for(brackets.size(), options.threads, [&](std::size_t i) {
    Bracket br = brackets[i];
    Candidate c;
    c.slope = std::abs(br.f_lo) < std::abs(br.f_hi) ? br.lo : br.hi;
    c.terminal = std::min(std::abs(br.f_lo), std::abs(br.f_hi));
    bool collapsed = false;
    for (int it = 0; it < options.max_bisections; ++it) {
      const double mid = 0.5 * (br.lo + br.hi);
      if (!(mid > br.lo && mid < br.hi)) {
        collapsed = true;
        break;
      }
      const double value = terminal(mid);
      if (std::isnan(value)) break;
      if (std::abs(value) < std::abs(c.terminal)) {
        c.slope = mid;
        c.terminal = value;
      }
      if (value == 0.0) break;
      if ((value < 0.0) == (br.f_lo < 0.0)) {
        br.lo = mid;
        br.f_lo = value;
      } else {
        br.hi = mid;
        br.f_hi = value;
      }
    }
    c.converged = std::abs(c.terminal) < options.terminal_tolerance || collapsed;
    candidates[i] = c;
  });
  for (double s : roots) candidates.push_back(Candidate{s, 0.0, true});
  std::sort(candidates.begin(), candidates.end(),
            [](const Candidate& x, const Candidate& y) { return x.slope < y.slope; });

  for (const auto& c : candidates) {
    if (!c.converged) {
      result.rejected.push_back({c.slope, c.terminal, NAN, NAN, "bisection stopped before |v(1)| tolerance"});
      continue;
    }
    const auto traj = shoot(q, nl, p, c.slope, mesh, options.substeps, bound);
    std::vector<double> values_at_nodes = traj.v;
    values_at_nodes.front() = 0.0;
    values_at_nodes.back() = 0.0;
    Solution sol = make_solution(FEFunction(mesh, std::move(values_at_nodes)), p, q, nl,
                                 SolutionOrigin::Shooting, c.slope);
    if (sol.min_value < -options.nonneg_tolerance) {
      result.rejected.push_back({c.slope, traj.terminal, sol.weak_res, sol.min_value, "negative nodal value"});
    } else if (!(sol.weak_res < options.residual_tolerance)) {
      result.rejected.push_back(
          {c.slope, traj.terminal, sol.weak_res, sol.min_value, "weak residual above tolerance"});
    } else {
      result.solutions.push_back(std::move(sol));
    }
  }
  return result;
}

namespace {

// Solves K x = rhs on interior nodes, K the P1 Dirichlet Laplacian.
std::vector<double> solve_laplacian(const Mesh& mesh, const std::vector<double>& rhs) {
  const std::size_t n = mesh.node_count();
  std::vector<double> x(n, 0.0);
  if (n < 3) return x;
  const std::size_t m = n - 2;
  std::vector<double> diag(m);
  std::vector<double> upper(m, 0.0);
  std::vector<double> b(m);
  for (std::size_t j = 0; j < m; ++j) {
    const std::size_t i = j + 1;
    diag[j] = 1.0 / mesh.width(i - 1) + 1.0 / mesh.width(i);
    if (j + 1 < m) upper[j] = -1.0 / mesh.width(i);
    b[j] = rhs[i];
  }
  // Thomas algorithm; K is symmetric so the lower band equals `upper`.
  for (std::size_t j = 1; j < m; ++j) {
    const double factor = upper[j - 1] / diag[j - 1];
    diag[j] -= factor * upper[j - 1];
    b[j] -= factor * b[j - 1];
  }
  x[m] = b[m - 1] / diag[m - 1];
  for (std::size_t j = m - 1; j-- > 0;) x[j + 1] = (b[j] - upper[j] * x[j + 2]) / diag[j];
  return x;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

DescentResult refine_descent(const FEFunction& start, double p, const WeightFunction& q,
                             const Nonlinearity& nl, const DescentOptions& options) {
  require(options.tolerance > 0.0, "descent: tolerance must be > 0");
  require(options.max_iterations >= 0, "descent: max_iterations must be >= 0");
  const Mesh& mesh = start.mesh();
  std::vector<double> v = start.values();
  double current = energy(start, p, q, nl).energy;
  std::vector<double> grad = energy_gradient(start, p, q, nl);
  std::vector<double> direction = solve_laplacian(mesh, grad);
  double norm = std::sqrt(std::max(dot(grad, direction), 0.0));

  DescentResult out{make_solution(start, p, q, nl, SolutionOrigin::Descent, initial_slope(start, p, q, nl)), 0, 0.0, false};
  const auto sup_abs = [](const std::vector<double>& x) {
    double m = 0.0;
    for (double y : x) m = std::max(m, std::abs(y));
    return m;
  };
  double step = 1.0;
  double bb_step = 0.0;
  int it = 0;
  std::vector<double> trial(v.size());
  while (norm >= options.tolerance && it < options.max_iterations) {
    const double decrease = norm * norm;
    step = bb_step > 0.0 ? bb_step : std::min(1.0, 2.0 * step);
    if (options.max_relative_move > 0.0) {
      const double dmax = sup_abs(direction);
      const double cap = options.max_relative_move * std::max(sup_abs(v), options.move_floor);
      if (dmax > 0.0) step = std::min(step, cap / dmax);
    }
    bool accepted = false;
    double trial_energy = current;
    std::vector<double> trial_grad;
    std::vector<double> trial_dir;
    double trial_norm = norm;
    for (int halving = 0; halving < 80; ++halving) {
      for (std::size_t i = 0; i < v.size(); ++i) trial[i] = v[i] - step * direction[i];
      trial.front() = 0.0;
      trial.back() = 0.0;
      const FEFunction candidate(mesh, trial);
      trial_energy = energy(candidate, p, q, nl).energy;
      const double noise = 64.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(current));
      if (trial_energy <= current - options.armijo * step * decrease &&
          current - trial_energy > noise) {
        accepted = true;
      } else if (trial_energy <= current + noise) {
        // Energy differences are at roundoff level: fall back on the gradient.
        trial_grad = energy_gradient(candidate, p, q, nl);
        trial_dir = solve_laplacian(mesh, trial_grad);
        trial_norm = std::sqrt(std::max(dot(trial_grad, trial_dir), 0.0));
        accepted = trial_norm < norm;
      }
      if (accepted) break;
      step *= 0.5;
    }
    if (!accepted) break;
    if (trial_grad.empty()) {
      const FEFunction iterate(mesh, trial);
      trial_grad = energy_gradient(iterate, p, q, nl);
      trial_dir = solve_laplacian(mesh, trial_grad);
      trial_norm = std::sqrt(std::max(dot(trial_grad, trial_dir), 0.0));
    }
    // Barzilai-Borwein length (s.y)/(y.K^{-1}y) for the next step.
    double sy = 0.0;
    double yky = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
      const double y = trial_grad[i] - grad[i];
      sy += (trial[i] - v[i]) * y;
      yky += y * (trial_dir[i] - direction[i]);
    }
    bb_step = sy > 0.0 && yky > 0.0 ? std::min(sy / yky, options.max_bb_step) : 0.0;
    v = trial;
    current = trial_energy;
    grad = std::move(trial_grad);
    direction = std::move(trial_dir);
    norm = trial_norm;
    ++it;
  }

  FEFunction result(mesh, v);
  out.solution = make_solution(result, p, q, nl, SolutionOrigin::Descent, initial_slope(result, p, q, nl));
  out.iterations = it;
  out.gradient_norm = norm;
  out.converged = norm < options.tolerance;
  return out;
}

double sup_distance(const FEFunction& v, const FEFunction& w) {
  double worst = 0.0;
  for (double t : v.mesh().nodes()) worst = std::max(worst, std::abs(v(t) - w(t)));
  for (double t : w.mesh().nodes()) worst = std::max(worst, std::abs(v(t) - w(t)));
  return worst;
}

std::vector<Solution> dedupe(std::vector<Solution> solutions, double tol_sup) {
  require(tol_sup > 0.0, "dedupe: tolerance must be > 0");
  std::stable_sort(solutions.begin(), solutions.end(),
                   [](const Solution& a, const Solution& b) { return a.weak_res < b.weak_res; });
  std::vector<Solution> representatives;
  for (auto& candidate : solutions) {
    const bool duplicate = std::any_of(representatives.begin(), representatives.end(), [&](const Solution& rep) {
      return sup_distance(rep.v, candidate.v) <= tol_sup;
    });
    if (!duplicate) representatives.push_back(std::move(candidate));
  }
  std::stable_sort(representatives.begin(), representatives.end(),
                   [](const Solution& a, const Solution& b) { return a.p_norm < b.p_norm; });
  return representatives;
}

}  // namespace plap
