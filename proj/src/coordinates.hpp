#pragma once

#include <functional>
#include <vector>

#include "weight.hpp"

namespace plap {

// Annulus {a < |x| < b} in R^N with exponent 1 < p <= N.
struct AnnulusSpec {
  int dimension = 3;
  double p = 2.0;
  double inner = 1.0;
  double outer = 2.0;
};

void validate(const AnnulusSpec& spec);

enum class MapCase { Subcritical, Critical };

// Exact change of variables between the radial problem on [a,b] and the
// two-point problem on [0,1]. Orientation is t = 0 at r = a in both cases:
//   Subcritical (N > p): t = B - A / r^m, m = (N - p)/(p - 1)
//   Critical    (N = p): r = a (b/a)^t
class CoordinateMap {
 public:
  static CoordinateMap build(const AnnulusSpec& spec);

  MapCase map_case() const { return case_; }
  const AnnulusSpec& spec() const { return spec_; }
  // m, A and B are only meaningful in the subcritical case.
  double exponent() const { return m_; }
  double coefficient_a() const { return A_; }
  double coefficient_b() const { return B_; }

  double r_to_t(double r) const;
  double t_to_r(double t) const;

  // The weight q(t) of the transformed equation (|v'|^{p-2} v')' + q f(v) = 0.
  double weight(double t) const;
  // q is increasing in t in both cases, so the bounds are q(0) and q(1).
  double weight_min() const { return weight(0.0); }
  double weight_max() const { return weight(1.0); }

 private:
  CoordinateMap() = default;
  double log_r_over_a(double t) const;

  AnnulusSpec spec_;
  MapCase case_ = MapCase::Subcritical;
  double m_ = 0.0;
  double A_ = 0.0;
  double B_ = 0.0;
  double span_ = 0.0;  // 1 - (a/b)^m
  double log_ratio_ = 0.0;
  double weight_log_scale_ = 0.0;
  double weight_power_ = 0.0;
};

WeightFunction weight_q(const CoordinateMap& map);

using RadialFunction = std::function<double(double)>;

struct WeightParts {
  double h = 0.0;  // g(r(t))
  double k = 0.0;  // geometric factor, equal to weight_q
  double q = 0.0;  // h * k
};

// Weight of the transformed problem for -Delta_p u = g(|x|) f(u).
WeightParts weight_nonautonomous(const CoordinateMap& map, const RadialFunction& g, double t);

// Builds the weight q = h k for a radial factor g. Bounds are taken from a
// dense sample (10^4 + 1 points) since g is only known pointwise; throws if
// any sample of g is non-positive.
WeightFunction nonautonomous_weight(const CoordinateMap& map, RadialFunction g);

// Uniform grid of `count` radii from a to b inclusive.
std::vector<double> uniform_radii(const AnnulusSpec& spec, std::size_t count);

}  // namespace plap
