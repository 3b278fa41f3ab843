#pragma once

#include <vector>

#include "fe.hpp"
#include "nonlinearity.hpp"
#include "weight.hpp"

namespace plap {

// ||v||^p = int |v'|^p, exact for piecewise-linear v.
double norm_p(const FEFunction& v, double p);

// Psi(v) = ||v||^p.
inline double psi(const FEFunction& v, double p) { return norm_p(v, p); }

// Phi(v) = -int_0^1 q(t) F(v(t)) dt, five-point Gauss-Legendre per element.
double phi(const FEFunction& v, const WeightFunction& q, const Nonlinearity& nl);

struct EnergyBreakdown {
  double phi = 0.0;
  double psi = 0.0;
  double energy = 0.0;  // phi + psi / p
};

EnergyBreakdown energy(const FEFunction& v, double p, const WeightFunction& q, const Nonlinearity& nl);

// Component i = int |v'|^{p-2} v' phi_i' - int q f(v) phi_i for interior hat
// functions phi_i; boundary components are zero. This is the exact gradient
// of energy() with respect to the nodal values.
std::vector<double> energy_gradient(const FEFunction& v, double p, const WeightFunction& q,
                                    const Nonlinearity& nl);

// v'(0) recovered from the first element: the weak identity tested with the
// boundary hat function gives phi_p(v'(0)) = phi_p(v_0') + int q f(v) phi_0.
double initial_slope(const FEFunction& v, double p, const WeightFunction& q, const Nonlinearity& nl);

// ||phi_i|| for the interior hat function at node i.
double hat_norm(const Mesh& mesh, std::size_t i, double p);

// max_i |gradient_i| / ||phi_i||.
double weak_residual(const FEFunction& v, double p, const WeightFunction& q, const Nonlinearity& nl);
double weak_residual(const Mesh& mesh, const std::vector<double>& gradient, double p);

// max |v|, exact for piecewise-linear v.
double sup_norm(const FEFunction& v);

}  // namespace plap
