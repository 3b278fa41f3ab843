#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>

#include "coordinates.hpp"
#include "doctest.h"
#include "errors.hpp"
#include "fe.hpp"
#include "functional.hpp"

using namespace plap;

namespace {

FEFunction tent(const Mesh& mesh) {
  std::vector<double> v(mesh.node_count());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = 1.0 - std::abs(2.0 * mesh.node(i) - 1.0);
  v.front() = v.back() = 0.0;
  return FEFunction(mesh, v);
}

Mesh random_mesh(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> w(0.5, 1.5);
  std::vector<double> widths(n);
  double total = 0.0;
  for (auto& x : widths) total += (x = w(rng));
  std::vector<double> nodes{0.0};
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) nodes.push_back((acc += widths[i]) / total);
  nodes.push_back(1.0);
  return Mesh::from_nodes(nodes);
}

FEFunction random_function(std::mt19937_64& rng, const Mesh& mesh, double scale) {
  std::normal_distribution<double> g(0.0, scale);
  std::vector<double> v(mesh.node_count());
  for (std::size_t i = 1; i + 1 < v.size(); ++i) v[i] = g(rng);
  return FEFunction(mesh, v);
}

FEFunction interpolate(const Mesh& mesh, const std::function<double(double)>& fn) {
  std::vector<double> v(mesh.node_count());
  for (std::size_t i = 1; i + 1 < v.size(); ++i) v[i] = fn(mesh.node(i));
  return FEFunction(mesh, v);
}

Nonlinearity identity_f() {
  return Nonlinearity::with_primitive(
      "x", [](double x) { return x; }, [](double x) { return x > 0.0 ? 0.5 * x * x : 0.0; });
}

}  // namespace

TEST_CASE("mesh construction") {
  auto m = Mesh::uniform(4);
  CHECK(m.elements() == 4);
  CHECK(m.node(0) == 0.0);
  CHECK(m.node(4) == 1.0);
  CHECK(m.width(2) == doctest::Approx(0.25));
  CHECK(m.locate(0.3) == 1);
  CHECK(m.locate(0.5) == 1);
  CHECK(m.locate(1.0) == 3);
  CHECK_THROWS_AS(Mesh::uniform(0), Error);
  CHECK_THROWS_AS(Mesh::from_nodes({0.0, 0.5, 0.5, 1.0}), Error);
  CHECK_THROWS_AS(Mesh::from_nodes({0.0, 0.5, 0.9}), Error);
  CHECK_THROWS_AS(Mesh::from_nodes({0.1, 0.5, 1.0}), Error);
  std::vector<double> extra{0.3, 0.5, 1.2, -1.0};
  auto refined = m.with_breakpoints(extra);
  CHECK(refined.elements() == 5);
  CHECK(std::is_sorted(refined.nodes().begin(), refined.nodes().end()));
}

TEST_CASE("FE function invariants") {
  auto m = Mesh::uniform(2);
  CHECK_THROWS_AS(FEFunction(m, {0.0, 1.0, 0.5}), Error);
  CHECK_THROWS_AS(FEFunction(m, {0.0, 1.0}), Error);
  CHECK_THROWS_AS(FEFunction(m, {0.0, NAN, 0.0}), Error);
  FEFunction v(m, {0.0, 1.0, 0.0});
  CHECK(v(0.25) == doctest::Approx(0.5));
  CHECK(v(0.5) == 1.0);
  CHECK(v.slope(1) == -2.0);
  FEFunction z(m);
  CHECK(z(0.7) == 0.0);
}

TEST_CASE("norm_p examples") {
  for (std::size_t n : {2, 4, 64, 1000}) {
    CHECK(norm_p(tent(Mesh::uniform(n)), 2.0) == doctest::Approx(4.0).epsilon(1e-14));
  }
  CHECK(norm_p(FEFunction(Mesh::uniform(8)), 2.0) == 0.0);
  CHECK_THROWS_AS(norm_p(tent(Mesh::uniform(2)), 1.0), Error);

  // Trapezoid of height 1 on (1/4, 3/4), flat on (3/8, 5/8): slopes +-8.
  auto m = Mesh::from_nodes({0.0, 0.25, 0.375, 0.625, 0.75, 1.0});
  FEFunction vk(m, {0.0, 0.0, 1.0, 1.0, 0.0, 0.0});
  CHECK(norm_p(vk, 2.0) == doctest::Approx(16.0).epsilon(1e-14));
}

TEST_CASE("energy examples") {
  auto m = Mesh::uniform(2);
  auto q1 = constant_weight(1.0);
  auto nl = identity_f();

  auto e0 = energy(FEFunction(m), 2.0, q1, nl);
  CHECK(e0.phi == 0.0);
  CHECK(e0.psi == 0.0);
  CHECK(e0.energy == 0.0);

  // int tent^2 = 1/3, so Phi = -1/6.
  auto e = energy(tent(m), 2.0, q1, nl);
  CHECK(e.phi == doctest::Approx(-1.0 / 6.0).epsilon(1e-14));
  CHECK(e.psi == doctest::Approx(4.0).epsilon(1e-14));
  CHECK(e.energy == doctest::Approx(-1.0 / 6.0 + 2.0).epsilon(1e-14));

  auto e2 = energy(tent(m), 2.0, constant_weight(2.0), nl);
  CHECK(e2.phi == doctest::Approx(2.0 * e.phi).epsilon(1e-14));
  CHECK(e2.psi == e.psi);
}

TEST_CASE("energy is zero at the origin") {
  auto map = CoordinateMap::build(AnnulusSpec{3, 2.0, 1.0, 2.0});
  auto q = weight_q(map);
  for (double p : {1.5, 2.0, 3.0}) {
    for (const auto& nl : {zero_nonlinearity(), power_nonlinearity(3.0, 2.0), identity_f()}) {
      auto e = energy(FEFunction(Mesh::uniform(32)), p, q, nl);
      CHECK(e.energy == 0.0);
    }
  }
}

TEST_CASE("energy breakdown is consistent") {
  std::mt19937_64 rng(11);
  auto map = CoordinateMap::build(AnnulusSpec{3, 2.0, 1.0, 2.0});
  auto q = weight_q(map);
  auto nl = power_nonlinearity(1.0, 3.0);
  for (int c = 0; c < 20; ++c) {
    auto v = random_function(rng, random_mesh(rng, 40), 1.0);
    for (double p : {1.5, 2.0, 3.0}) {
      auto e = energy(v, p, q, nl);
      CHECK(e.psi == norm_p(v, p));
      CHECK(e.phi == phi(v, q, nl));
      CHECK(e.energy == doctest::Approx(e.phi + e.psi / p).epsilon(1e-15));
    }
  }
}

TEST_CASE("gradient matches central differences") {
  std::mt19937_64 rng(2024);
  auto map = CoordinateMap::build(AnnulusSpec{3, 2.0, 1.0, 2.0});
  auto q = weight_q(map);
  auto nl = power_nonlinearity(1.0, 3.0);
  const double ps[] = {2.0, 2.5, 3.0};
  double worst = 0.0;
  for (int c = 0; c < 100; ++c) {
    const double p = ps[c % 3];
    auto mesh = c % 2 ? Mesh::uniform(256) : random_mesh(rng, 256);
    auto v = random_function(rng, mesh, 0.05 + 0.5 * (c % 4));
    auto g = energy_gradient(v, p, q, nl);
    REQUIRE(g.size() == mesh.node_count());
    CHECK(g.front() == 0.0);
    CHECK(g.back() == 0.0);
    double gmax = 0.0;
    double err = 0.0;
    auto vals = v.values();
    for (std::size_t i = 1; i + 1 < vals.size(); ++i) {
      const double step = 1e-5 * std::max(1.0, std::abs(vals[i]));
      auto up = vals;
      auto dn = vals;
      up[i] += step;
      dn[i] -= step;
      const double fd = (energy(FEFunction(mesh, up), p, q, nl).energy -
                         energy(FEFunction(mesh, dn), p, q, nl).energy) /
                        (2.0 * step);
      err = std::max(err, std::abs(fd - g[i]));
      gmax = std::max(gmax, std::abs(g[i]));
    }
    worst = std::max(worst, err / gmax);
  }
  CHECK(worst < 1e-6);
}

TEST_CASE("gradient vanishes at the origin") {
  auto map = CoordinateMap::build(AnnulusSpec{3, 2.0, 1.0, 2.0});
  auto q = weight_q(map);
  for (double p : {1.5, 2.0, 3.0}) {
    FEFunction z(Mesh::uniform(50));
    auto g = energy_gradient(z, p, q, power_nonlinearity(2.0, 1.5));
    CHECK(*std::max_element(g.begin(), g.end()) == 0.0);
    CHECK(*std::min_element(g.begin(), g.end()) == 0.0);
    CHECK(weak_residual(z, p, q, power_nonlinearity(2.0, 1.5)) == 0.0);
  }
}

TEST_CASE("weak residual of the interpolated sine") {
  const double pi = std::numbers::pi;
  auto q1 = constant_weight(1.0);
  auto nl = power_nonlinearity(pi * pi, 1.0);
  std::vector<double> res;
  for (std::size_t n = 32; n <= 2048; n *= 2) {
    auto v = interpolate(Mesh::uniform(n), [pi](double t) { return std::sin(pi * t); });
    res.push_back(weak_residual(v, 2.0, q1, nl));
  }
  for (std::size_t i = 1; i < res.size(); ++i) {
    CHECK(std::log2(res[i - 1] / res[i]) >= 1.0);
  }
  CHECK(res.back() < 1e-6);

  // A wrong eigenvalue leaves a residual orders of magnitude larger.
  auto v = interpolate(Mesh::uniform(512), [pi](double t) { return std::sin(pi * t); });
  CHECK(weak_residual(v, 2.0, q1, power_nonlinearity(2.0 * pi * pi, 1.0)) >
        1e3 * weak_residual(v, 2.0, q1, nl));
}

TEST_CASE("weak residual is the scaled gradient") {
  std::mt19937_64 rng(5);
  auto q1 = constant_weight(1.0);
  auto nl = power_nonlinearity(1.0, 2.0);
  for (int c = 0; c < 10; ++c) {
    auto mesh = random_mesh(rng, 30);
    auto v = random_function(rng, mesh, 1.0);
    const double p = 1.5 + 0.25 * c;
    auto g = energy_gradient(v, p, q1, nl);
    double expect = 0.0;
    for (std::size_t i = 1; i + 1 < g.size(); ++i) {
      expect = std::max(expect, std::abs(g[i]) / hat_norm(mesh, i, p));
    }
    CHECK(weak_residual(v, p, q1, nl) == doctest::Approx(expect).epsilon(1e-14));
    CHECK(weak_residual(mesh, g, p) == doctest::Approx(expect).epsilon(1e-14));
  }
  // ||phi_i||^p = h^{1-p} + h^{1-p} on a uniform mesh.
  auto m = Mesh::uniform(10);
  CHECK(hat_norm(m, 3, 2.0) == doctest::Approx(std::sqrt(20.0)));
}

TEST_CASE("norm_p scaling") {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> alpha(-5.0, 5.0);
  for (int c = 0; c < 50; ++c) {
    auto mesh = random_mesh(rng, 100);
    auto v = random_function(rng, mesh, 1.0);
    const double a = alpha(rng);
    auto scaled = v.values();
    for (auto& x : scaled) x *= a;
    for (double p : {1.5, 2.0, 2.5, 3.0}) {
      CHECK(norm_p(FEFunction(mesh, scaled), p) ==
            doctest::Approx(std::pow(std::abs(a), p) * norm_p(v, p)).epsilon(1e-13));
    }
  }
}

TEST_CASE("sup norm") {
  CHECK(sup_norm(tent(Mesh::uniform(4))) == 1.0);
  CHECK(sup_norm(FEFunction(Mesh::uniform(4))) == 0.0);
  CHECK(sup_norm(FEFunction(Mesh::uniform(2), {0.0, -3.0, 0.0})) == 3.0);
}

TEST_CASE("embedding inequality") {
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<std::size_t> size(1, 2048);
  const double ps[] = {1.5, 2.0, 3.0};
  int violations = 0;
  for (int c = 0; c < 1000; ++c) {
    const double p = ps[c % 3];
    const std::size_t n = std::max<std::size_t>(2, size(rng));
    auto mesh = c % 2 ? Mesh::uniform(n) : random_mesh(rng, n);
    auto v = random_function(rng, mesh, 1.0);
    if (sup_norm(v) > embedding_constant(p) * std::pow(norm_p(v, p), 1.0 / p)) ++violations;
  }
  CHECK(violations == 0);
}

TEST_CASE("csv round trip") {
  std::mt19937_64 rng(3);
  auto v = random_function(rng, random_mesh(rng, 57), 1e3);
  auto path = (std::filesystem::temp_directory_path() / "plap_fe_roundtrip.csv").string();
  write_csv(v, path);
  auto w = read_csv(path);
  CHECK(w.mesh().nodes() == v.mesh().nodes());
  CHECK(w.values() == v.values());
  std::filesystem::remove(path);
  CHECK_THROWS_AS(read_csv(path), Error);
}
