#pragma once

#include <functional>
#include <utility>

namespace plap {

// t -> q(t) on [0,1] together with certified bounds 0 < q0 <= q(t) <= q1.
struct WeightFunction {
  std::function<double(double)> eval;
  double q0 = 0.0;
  double q1 = 0.0;

  double operator()(double t) const { return eval(t); }
};

// Test override: q(t) == c.
inline WeightFunction constant_weight(double c) {
  return WeightFunction{[c](double) { return c; }, c, c};
}

}  // namespace plap
