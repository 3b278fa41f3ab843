#include "radial.hpp"

#include <algorithm>
#include <cmath>

#include "errors.hpp"
#include "flux.hpp"

namespace plap {

RadialProfile pullback(const CoordinateMap& map, const FEFunction& v, std::span<const double> radii) {
  RadialProfile profile;
  profile.r.assign(radii.begin(), radii.end());
  profile.u.reserve(radii.size());
  for (double r : radii) profile.u.push_back(v(map.r_to_t(r)));
  return profile;
}

double radial_residual(const RadialProfile& profile, const AnnulusSpec& spec, const Nonlinearity& nl,
                       const RadialFunction& g) {
  const auto& r = profile.r;
  const auto& u = profile.u;
  require(r.size() == u.size(), "radial_residual: r and u must have the same length");
  require(r.size() >= 8, "radial_residual: grid too coarse (need at least 8 points)");
  const std::size_t n = r.size() - 1;
  const double dr = (r.back() - r.front()) / static_cast<double>(n);
  for (std::size_t i = 1; i <= n; ++i) {
    require(std::abs((r[i] - r[i - 1]) - dr) <= 1e-9 * dr, "radial_residual: grid must be uniform");
  }
  double scale = 0.0;
  for (double x : u) scale = std::max(scale, std::abs(x));
  require(std::abs(u.front()) <= 1e-10 * (1.0 + scale) && std::abs(u.back()) <= 1e-10 * (1.0 + scale),
          "radial_residual: profile must vanish at both radii");

  const double N = spec.dimension;
  const double p = spec.p;
  auto flux = [&](std::size_t i) {  // at r_{i+1/2}
    const double mid = 0.5 * (r[i] + r[i + 1]);
    return std::pow(mid, N - 1.0) * phi_p((u[i + 1] - u[i]) / dr, p);
  };
  // Pairing the centred residual with the hat function at r_i gives
  // dr * res_i (lumped mass); divide by the hat's W^{1,p} norm.
  const double hat = std::pow(2.0 * std::pow(dr, 1.0 - p), 1.0 / p);
  double worst = 0.0;
  double previous = flux(0);
  for (std::size_t i = 1; i < n; ++i) {
    const double next = flux(i);
    const double weight = g ? g(r[i]) : 1.0;
    const double res = (next - previous) / dr + std::pow(r[i], N - 1.0) * weight * nl.f(u[i]);
    worst = std::max(worst, std::abs(res) * dr / hat);
    previous = next;
  }
  return worst;
}

}  // namespace plap
