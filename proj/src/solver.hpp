#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fe.hpp"
#include "flux.hpp"
#include "functional.hpp"
#include "nonlinearity.hpp"
#include "weight.hpp"

namespace plap {

enum class ShotStatus { Ok, Diverged };

// RK4 solution of v' = phi_p^{-1}(w), w' = -q(t) f(v), (v, w)(0) = (0, phi_p(s)).
struct ShootingTrajectory {
  std::vector<double> t;
  std::vector<double> v;
  std::vector<double> w;  // flux |v'|^{p-2} v'
  double terminal = 0.0;  // v(1)
  ShotStatus status = ShotStatus::Ok;
};

// Integrates over the given nodes with `substeps` RK4 steps per interval.
// A trajectory leaving |v|, |w| <= bound is cut short and marked Diverged.
ShootingTrajectory shoot(const WeightFunction& q, const Nonlinearity& nl, double p, double slope,
                         const Mesh& grid, int substeps = 1, double bound = INFINITY);
ShootingTrajectory shoot(const WeightFunction& q, const Nonlinearity& nl, double p, double slope,
                         std::size_t steps, double bound = INFINITY);

enum class SolutionOrigin { Shooting, Descent };

const char* to_string(SolutionOrigin origin);

struct Solution {
  FEFunction v;
  double slope = 0.0;  // v'(0) (shooting) or first-element slope (descent)
  double p_norm = 0.0; // ||v||^p
  EnergyBreakdown energy;
  double weak_res = 0.0;
  double sup = 0.0;
  double min_value = 0.0;
  SolutionOrigin origin = SolutionOrigin::Shooting;
};

Solution make_solution(FEFunction v, double p, const WeightFunction& q, const Nonlinearity& nl,
                       SolutionOrigin origin, double slope);

struct ShootingOptions {
  double slope_lo = 0.0;
  double slope_hi = 1.0;
  int samples = 200;           // M
  bool log_spacing = false;    // requires slope_lo > 0
  bool refine = true;          // subdivide cells around brackets and near-touches
  int refine_factor = 16;
  std::size_t elements = 4096;
  int substeps = 1;
  double terminal_tolerance = 1e-10;  // or until the slope bracket collapses
  double residual_tolerance = 1e-6;
  double nonneg_tolerance = 1e-8;
  // <= 0 selects 1e3 * max(b_K, 1) from the nonlinearity's sequences.
  double divergence_bound = 0.0;
  int max_bisections = 200;
  int threads = 1;
};

struct RejectedCandidate {
  double slope = 0.0;
  double terminal = 0.0;
  double weak_res = 0.0;
  double min_value = 0.0;
  std::string reason;
};

struct ShootingResult {
  std::vector<Solution> solutions;  // ordered by slope
  std::vector<RejectedCandidate> rejected;
  std::vector<double> slopes;       // every sampled slope, ascending
  std::vector<double> terminals;    // v(1; s) for each sampled slope (NaN if diverged)
  std::size_t diverged = 0;
  double divergence_bound = 0.0;
};

ShootingResult find_solutions_shooting(const WeightFunction& q, const Nonlinearity& nl, double p,
                                       const ShootingOptions& options);
// Same, on a caller-supplied mesh (options.elements is ignored).
ShootingResult find_solutions_shooting(const WeightFunction& q, const Nonlinearity& nl, double p,
                                       const Mesh& mesh, const ShootingOptions& options);

struct DescentOptions {
  double tolerance = 1e-8;  // on the H^{-1} norm of the gradient
  int max_iterations = 5000;
  double armijo = 1e-4;
  // Each step moves v by at most this fraction of max(sup|v|, floor) in sup
  // norm, so the iteration stays in the basin it starts in. <= 0 disables.
  double max_relative_move = 0.25;
  double move_floor = 1e-3;
  double max_bb_step = 1e3;
};

struct DescentResult {
  Solution solution;
  int iterations = 0;
  double gradient_norm = 0.0;
  bool converged = false;
};

// Preconditioned gradient descent on E = Phi + Psi/p with Armijo
// backtracking. The search direction is -K^{-1} grad E with K the discrete
// Dirichlet Laplacian on the same mesh, and the stopping test uses the
// matching dual norm sqrt(grad . K^{-1} grad). Trial step lengths come from
// the Barzilai-Borwein formula in the same metric. When the energy change of a
// trial step is below roundoff the step is accepted only if it reduces that
// norm. Descent only settles at local minima; started at a saddle it leaves.
DescentResult refine_descent(const FEFunction& start, double p, const WeightFunction& q,
                             const Nonlinearity& nl, const DescentOptions& options = {});

// max_t |v(t) - w(t)|, exact for piecewise-linear functions on any meshes.
double sup_distance(const FEFunction& v, const FEFunction& w);

// Greedy clustering by sup distance; keeps the smallest weak residual per
// cluster and returns representatives sorted by ||v||^p ascending.
std::vector<Solution> dedupe(std::vector<Solution> solutions, double tol_sup = 1e-3);

}  // namespace plap
