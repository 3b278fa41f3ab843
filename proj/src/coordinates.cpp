#include "coordinates.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "errors.hpp"

namespace plap {

void validate(const AnnulusSpec& spec) {
  require(spec.dimension >= 2, "annulus: dimension N must be >= 2");
  require(std::isfinite(spec.p) && spec.p > 1.0, "annulus: p must be > 1");
  require(spec.p <= spec.dimension, "annulus: p must not exceed N (p > N is not supported)");
  require(std::isfinite(spec.inner) && spec.inner > 0.0, "annulus: inner radius a must be > 0");
  require(std::isfinite(spec.outer) && spec.outer > spec.inner,
          "annulus: outer radius b must exceed the inner radius a");
}

CoordinateMap CoordinateMap::build(const AnnulusSpec& spec) {
  validate(spec);
  CoordinateMap map;
  map.spec_ = spec;
  const double N = spec.dimension;
  const double p = spec.p;
  const double a = spec.inner;
  const double b = spec.outer;
  map.log_ratio_ = std::log(b / a);
  map.weight_power_ = (N - 1.0) / (p - 1.0);
  if (p < N) {
    map.case_ = MapCase::Subcritical;
    map.m_ = (N - p) / (p - 1.0);
    // D = 1 - (a/b)^m; t = (1 - (a/r)^m) / D avoids the cancellation in B - A/r^m.
    map.span_ = -std::expm1(-map.m_ * map.log_ratio_);
    map.A_ = std::pow(a, map.m_) / map.span_;
    map.B_ = 1.0 / map.span_;
    // q = [a (D/m) (r/a)^{(N-1)/(p-1)}]^p, the closed form rewritten in r(t).
    map.weight_log_scale_ = std::log(a * map.span_ / map.m_);
  } else {
    map.case_ = MapCase::Critical;
    map.weight_log_scale_ = std::log(a * map.log_ratio_);
  }
  return map;
}

double CoordinateMap::r_to_t(double r) const {
  const double a = spec_.inner;
  const double b = spec_.outer;
  if (!(r >= a && r <= b)) {
    std::ostringstream os;
    os << "r_to_t: radius " << r << " outside [" << a << ", " << b << "]";
    fail(ErrorCode::OutOfRange, os.str());
  }
  if (r == a) return 0.0;
  if (r == b) return 1.0;
  const double s = std::log(r / a);
  const double t = case_ == MapCase::Subcritical ? -std::expm1(-m_ * s) / span_ : s / log_ratio_;
  return std::clamp(t, 0.0, 1.0);
}

double CoordinateMap::t_to_r(double t) const {
  if (!(t >= 0.0 && t <= 1.0)) {
    std::ostringstream os;
    os << "t_to_r: t = " << t << " outside [0, 1]";
    fail(ErrorCode::OutOfRange, os.str());
  }
  const double a = spec_.inner;
  const double b = spec_.outer;
  if (t == 0.0) return a;
  if (t == 1.0) return b;
  return std::clamp(a * std::exp(log_r_over_a(t)), a, b);
}

double CoordinateMap::log_r_over_a(double t) const {
  if (case_ == MapCase::Subcritical) return -std::log1p(-t * span_) / m_;
  return t * log_ratio_;
}

double CoordinateMap::weight(double t) const {
  return std::exp(spec_.p * (weight_log_scale_ + weight_power_ * log_r_over_a(t)));
}

WeightFunction weight_q(const CoordinateMap& map) {
  return WeightFunction{[map](double t) { return map.weight(t); }, map.weight_min(),
                        map.weight_max()};
}

WeightParts weight_nonautonomous(const CoordinateMap& map, const RadialFunction& g, double t) {
  WeightParts parts;
  parts.h = g(map.t_to_r(t));
  if (!(parts.h > 0.0)) {
    std::ostringstream os;
    os << "radial weight g must be positive; g(" << map.t_to_r(t) << ") = " << parts.h;
    fail(ErrorCode::InvalidArgument, os.str());
  }
  parts.k = map.weight(t);
  parts.q = parts.h * parts.k;
  return parts;
}

WeightFunction nonautonomous_weight(const CoordinateMap& map, RadialFunction g) {
  constexpr int kSamples = 10000;
  double lo = INFINITY;
  double hi = 0.0;
  for (int i = 0; i <= kSamples; ++i) {
    const double q = weight_nonautonomous(map, g, static_cast<double>(i) / kSamples).q;
    lo = std::min(lo, q);
    hi = std::max(hi, q);
  }
  auto eval = [map, g = std::move(g)](double t) { return g(map.t_to_r(t)) * map.weight(t); };
  return WeightFunction{std::move(eval), lo, hi};
}

std::vector<double> uniform_radii(const AnnulusSpec& spec, std::size_t count) {
  require(count >= 2, "uniform_radii: need at least two radii");
  std::vector<double> r(count);
  const double step = (spec.outer - spec.inner) / static_cast<double>(count - 1);
  for (std::size_t i = 0; i < count; ++i) r[i] = spec.inner + step * static_cast<double>(i);
  r.back() = spec.outer;
  return r;
}

}  // namespace plap
