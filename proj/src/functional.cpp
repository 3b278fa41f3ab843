#include "functional.hpp"

#include <algorithm>
#include <array>
#include <boost/math/quadrature/gauss.hpp>
#include <cmath>

#include "errors.hpp"
#include "flux.hpp"

namespace plap {

namespace {

struct Rule {
  std::array<double, 5> x{};  // on [0, 1]
  std::array<double, 5> w{};
};

const Rule& gauss5() {
  static const Rule rule = [] {
    using boost::math::quadrature::gauss;
    const auto& abscissa = gauss<double, 5>::abscissa();  // 0, x1, x2 on [-1, 1]
    const auto& weights = gauss<double, 5>::weights();
    Rule r;
    const std::array<double, 5> xs{-abscissa[2], -abscissa[1], abscissa[0], abscissa[1], abscissa[2]};
    const std::array<double, 5> ws{weights[2], weights[1], weights[0], weights[1], weights[2]};
    for (std::size_t i = 0; i < 5; ++i) {
      r.x[i] = 0.5 * (xs[i] + 1.0);
      r.w[i] = 0.5 * ws[i];
    }
    return r;
  }();
  return rule;
}

}  // namespace

double norm_p(const FEFunction& v, double p) {
  require(p > 1.0, "norm_p: p must be > 1");
  const Mesh& mesh = v.mesh();
  double sum = 0.0;
  for (std::size_t e = 0; e < mesh.elements(); ++e) {
    sum += std::pow(std::abs(v.slope(e)), p) * mesh.width(e);
  }
  return sum;
}

double phi(const FEFunction& v, const WeightFunction& q, const Nonlinearity& nl) {
  const Rule& rule = gauss5();
  const Mesh& mesh = v.mesh();
  double sum = 0.0;
  for (std::size_t e = 0; e < mesh.elements(); ++e) {
    const double h = mesh.width(e);
    const double t0 = mesh.node(e);
    const double v0 = v.value(e);
    const double v1 = v.value(e + 1);
    double local = 0.0;
    for (std::size_t g = 0; g < 5; ++g) {
      const double s = rule.x[g];
      local += rule.w[g] * q(t0 + s * h) * nl.F((1.0 - s) * v0 + s * v1);
    }
    sum += local * h;
  }
  return -sum;
}

EnergyBreakdown energy(const FEFunction& v, double p, const WeightFunction& q, const Nonlinearity& nl) {
  EnergyBreakdown out;
  out.phi = phi(v, q, nl);
  out.psi = psi(v, p);
  out.energy = out.phi + out.psi / p;
  return out;
}

std::vector<double> energy_gradient(const FEFunction& v, double p, const WeightFunction& q,
                                    const Nonlinearity& nl) {
  const Rule& rule = gauss5();
  const Mesh& mesh = v.mesh();
  std::vector<double> grad(mesh.node_count(), 0.0);
  for (std::size_t e = 0; e < mesh.elements(); ++e) {
    const double h = mesh.width(e);
    const double t0 = mesh.node(e);
    const double v0 = v.value(e);
    const double v1 = v.value(e + 1);
    const double flux = phi_p(v.slope(e), p);
    double left = -flux;
    double right = flux;
    for (std::size_t g = 0; g < 5; ++g) {
      const double s = rule.x[g];
      const double load = rule.w[g] * h * q(t0 + s * h) * nl.f((1.0 - s) * v0 + s * v1);
      left -= load * (1.0 - s);
      right -= load * s;
    }
    grad[e] += left;
    grad[e + 1] += right;
  }
  grad.front() = 0.0;
  grad.back() = 0.0;
  return grad;
}

double initial_slope(const FEFunction& v, double p, const WeightFunction& q, const Nonlinearity& nl) {
  const Rule& rule = gauss5();
  const double h = v.mesh().width(0);
  const double t0 = v.mesh().node(0);
  double flux = phi_p(v.slope(0), p);
  for (std::size_t g = 0; g < 5; ++g) {
    const double s = rule.x[g];
    flux += rule.w[g] * h * q(t0 + s * h) * nl.f((1.0 - s) * v.value(0) + s * v.value(1)) * (1.0 - s);
  }
  return phi_p_inv(flux, p);
}

double hat_norm(const Mesh& mesh, std::size_t i, double p) {
  const double hl = mesh.width(i - 1);
  const double hr = mesh.width(i);
  return std::pow(std::pow(hl, 1.0 - p) + std::pow(hr, 1.0 - p), 1.0 / p);
}

double weak_residual(const Mesh& mesh, const std::vector<double>& gradient, double p) {
  double worst = 0.0;
  for (std::size_t i = 1; i + 1 < mesh.node_count(); ++i) {
    worst = std::max(worst, std::abs(gradient[i]) / hat_norm(mesh, i, p));
  }
  return worst;
}

double weak_residual(const FEFunction& v, double p, const WeightFunction& q, const Nonlinearity& nl) {
  return weak_residual(v.mesh(), energy_gradient(v, p, q, nl), p);
}

double sup_norm(const FEFunction& v) {
  double m = 0.0;
  for (double x : v.values()) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace plap
