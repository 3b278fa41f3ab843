#pragma once

#include <cmath>

namespace plap {

// phi_p(s) = |s|^{p-2} s, the one-dimensional p-Laplacian flux.
inline double phi_p(double s, double p) {
  if (s == 0.0) return 0.0;
  return std::copysign(std::pow(std::abs(s), p - 1.0), s);
}

// Inverse of phi_p: |w|^{1/(p-1) - 1} w.
inline double phi_p_inv(double w, double p) {
  if (w == 0.0) return 0.0;
  return std::copysign(std::pow(std::abs(w), 1.0 / (p - 1.0)), w);
}

}  // namespace plap
