#pragma once

#include <span>
#include <vector>

#include "coordinates.hpp"
#include "fe.hpp"
#include "nonlinearity.hpp"

namespace plap {

// u(r) sampled on a radial grid.
struct RadialProfile {
  std::vector<double> r;
  std::vector<double> u;
};

// u(r_i) = v(t(r_i)).
RadialProfile pullback(const CoordinateMap& map, const FEFunction& v, std::span<const double> radii);

// Discrete dual norm of the centred flux-form residual
//   res_i = (r^{N-1} phi_p(u'))' + r^{N-1} g(r) f(u)   at interior r_i,
// with phi_p(u') from one-sided differences at the half points. The norm is
// max_i dr |res_i| / ||hat_i||_{W^{1,p}}, the same normalisation as
// weak_residual. For p > 2 a solution is only C^{1,1/(p-1)} at its maximum,
// so the pointwise residual there does not shrink with dr; the dual norm does.
// g defaults to 1. The grid must be uniform with at least 8 points and u must
// vanish at both ends.
double radial_residual(const RadialProfile& profile, const AnnulusSpec& spec, const Nonlinearity& nl,
                       const RadialFunction& g = {});

}  // namespace plap
