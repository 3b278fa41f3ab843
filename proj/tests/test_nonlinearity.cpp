#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "errors.hpp"
#include "nonlinearity.hpp"

using namespace plap;

namespace {

// Composite Simpson on n panels, independent of the library's primitives.
template <class Fn>
double simpson(Fn f, double lo, double hi, int n) {
  const double h = (hi - lo) / n;
  double s = f(lo) + f(hi);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(lo + i * h);
  return s * h / 3.0;
}

Nonlinearity builtin(Branch branch, int k_max = 5) {
  return build_oscillating_f(2.0, 0.25, 2.0 * growth_threshold(2.0, 0.25), k_max, branch);
}

}  // namespace

TEST_CASE("sigma examples") {
  auto s = sigma(2.0, 1.0);
  CHECK(s.sigma == doctest::Approx(4.0).epsilon(1e-15));
  CHECK(s.mu_bar == doctest::Approx(0.5).epsilon(1e-15));
  auto t = sigma(3.0, 2.0);
  CHECK(t.sigma == doctest::Approx(27.0 / 8.0).epsilon(1e-15));
  CHECK(t.mu_bar == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(growth_threshold(2.0, 1.0) == doctest::Approx(8.0).epsilon(1e-15));
  CHECK(growth_threshold(2.0, 0.25) == doctest::Approx(32.0).epsilon(1e-15));
  CHECK_THROWS_AS(sigma(1.0, 1.0), Error);
  CHECK_THROWS_AS(sigma(2.0, 0.0), Error);
}

TEST_CASE("sigma closed form equals the grid minimum") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> pd(1.0, 10.0);
  std::uniform_real_distribution<double> qd(0.0, 10.0);
  for (int trial = 0; trial < 20; ++trial) {
    double p = pd(rng);
    if (p <= 1.0) p = 1.5;
    double q0 = qd(rng);
    if (q0 <= 0.0) q0 = 1.0;
    auto s = sigma(p, q0);
    const double direct = 1.0 / (q0 * s.mu_bar * std::pow(1.0 - s.mu_bar, p - 1.0));
    CHECK(s.sigma == doctest::Approx(direct).epsilon(1e-12));
    CHECK(s.sigma == doctest::Approx(std::pow(p, p) / (q0 * std::pow(p - 1.0, p - 1.0))).epsilon(1e-12));
    CHECK(std::abs(s.grid_sigma - s.sigma) < 1e-6 * s.sigma);
    CHECK(std::abs(s.grid_argmin - 1.0 / p) < 1e-4);
    CHECK(s.grid_sigma >= s.sigma * (1.0 - 1e-14));
  }
}

TEST_CASE("embedding constant") {
  CHECK(embedding_constant(2.0) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-15));
  CHECK(embedding_constant(1.0 + 1e-9) == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(embedding_constant(3.0) == doctest::Approx(std::pow(0.5, 2.0 / 3.0)).epsilon(1e-15));
  // Tent min(t, 1-t): sup 1/2, ||v'||_2 = 1.
  CHECK(0.5 / 1.0 <= embedding_constant(2.0));
  CHECK_THROWS_AS(embedding_constant(1.0), Error);
}

TEST_CASE("f and F evaluation") {
  auto id = power_nonlinearity(1.0, 1.0);
  CHECK(id.f(2.0) == 2.0);
  CHECK(id.F(2.0) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(id.F(0.0) == 0.0);
  CHECK(id.f(-1.0) == 0.0);
  CHECK(id.kind() == PrimitiveKind::ClosedForm);

  // The negative-axis extension is enforced whatever the evaluator does.
  auto raw = Nonlinearity::with_quadrature("cubic", [](double x) { return x * x * x + x; });
  CHECK(raw.f(-1.0) == 0.0);
  CHECK(raw.F(-3.0) == 0.0);
  CHECK(raw.F(0.0) == 0.0);
  CHECK(raw.kind() == PrimitiveKind::Quadrature);
  CHECK(raw.F(2.0) == doctest::Approx(4.0 + 2.0).epsilon(1e-12));

  for (auto nl : {zero_nonlinearity(), power_nonlinearity(3.0, 2.5), builtin(Branch::Infinity)}) {
    CHECK(nl.f(0.0) == 0.0);
    CHECK(nl.F(0.0) == 0.0);
    CHECK(nl.f(-2.0) == 0.0);
  }
  CHECK_THROWS_AS(power_nonlinearity(1.0, -1.0), Error);
}

TEST_CASE("quadrature primitive matches closed forms") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> xd(0.0, 20.0);
  for (double e : {0.5, 1.0, 2.0, 3.7}) {
    auto closed = power_nonlinearity(1.5, e);
    auto quad = Nonlinearity::with_quadrature("power", [e](double x) { return 1.5 * std::pow(x, e); });
    for (int i = 0; i < 20; ++i) {
      const double x = xd(rng);
      CHECK(quad.F(x) == doctest::Approx(closed.F(x)).epsilon(1e-11));
    }
  }
}

TEST_CASE("F' = f by central differences") {
  std::mt19937_64 rng(5);
  std::vector<Nonlinearity> cases{power_nonlinearity(2.0, 3.0).with_sequences(oscillating_layout(5, Branch::Infinity)),
                                  builtin(Branch::Infinity), builtin(Branch::Zero)};
  for (const auto& nl : cases) {
    const auto& seqs = *nl.sequences();
    double hi = 0.0;
    double lo = INFINITY;
    for (std::size_t k = 0; k < seqs.size(); ++k) {
      hi = std::max(hi, seqs.b[k]);
      lo = std::min(lo, seqs.a[k]);
    }
    std::uniform_real_distribution<double> ld(std::log(lo / 2.0), std::log(hi));
    for (int i = 0; i < 100; ++i) {
      const double x = std::exp(ld(rng));
      const double d = 1e-5 * x;
      const double fd = (nl.F(x + d) - nl.F(x - d)) / (2.0 * d);
      const double scale = std::max({std::abs(nl.f(x)), nl.F(x + d) / x, 1e-300});
      CHECK(std::abs(fd - nl.f(x)) <= 1e-6 * scale);
    }
  }
}

TEST_CASE("oscillating layout") {
  auto inf = oscillating_layout(5, Branch::Infinity);
  auto zero = oscillating_layout(5, Branch::Zero);
  CHECK(inf.a[0] == 1.0);
  CHECK(zero.b[0] == 1.0);
  for (std::size_t k = 0; k < 5; ++k) {
    CHECK(inf.b[k] / inf.a[k] == std::ldexp(1.0, static_cast<int>(k) + 1));
    CHECK(zero.b[k] / zero.a[k] == std::ldexp(1.0, static_cast<int>(k) + 1));
    CHECK(inf.a[k] > 0.0);
    CHECK(inf.a[k] < inf.b[k]);
    if (k > 0) {
      CHECK(inf.a[k] == 2.0 * inf.b[k - 1]);
      CHECK(zero.b[k] == 0.5 * zero.a[k - 1]);
    }
  }
  CHECK(inf.a[1] == inf.b[1] / 4.0);
  CHECK_THROWS_AS(oscillating_layout(0, Branch::Infinity), Error);
  CHECK_THROWS_AS(oscillating_layout(60, Branch::Infinity), Error);
  CHECK_THROWS_AS(oscillating_layout(60, Branch::Zero), Error);
}

TEST_CASE("build_oscillating_f construction") {
  const double growth = 2.0 * growth_threshold(2.0, 0.25);
  for (Branch branch : {Branch::Infinity, Branch::Zero}) {
    auto nl = builtin(branch);
    const auto& seqs = *nl.sequences();
    const double lo = *std::min_element(seqs.a.begin(), seqs.a.end());
    const double hi = *std::max_element(seqs.b.begin(), seqs.b.end());
    for (std::size_t k = 0; k < seqs.size(); ++k) {
      for (int i = 0; i <= 1000; ++i) {
        CHECK(nl.f(seqs.a[k] + (seqs.b[k] - seqs.a[k]) * i / 1000.0) == 0.0);
      }
      CHECK(nl.F(seqs.a[k]) / std::pow(seqs.a[k], 2.0) == doctest::Approx(growth).epsilon(1e-12));
      // Independent quadrature of f reproduces the stored primitive.
      const double start = 0.5 * lo;
      const double direct = simpson([&](double x) { return nl.f(x); }, start, seqs.a[k], 200000);
      CHECK(direct == doctest::Approx(nl.F(seqs.a[k])).epsilon(1e-8));
    }
    double previous = 0.0;
    for (int i = 0; i <= 20000; ++i) {
      const double x = std::exp(std::log(lo / 4.0) + (std::log(4.0 * hi) - std::log(lo / 4.0)) * i / 20000.0);
      CHECK(nl.f(x) >= 0.0);
      const double F = nl.F(x);
      CHECK(F >= previous);
      previous = F;
    }
    CHECK(nl.f(0.49 * lo) == 0.0);
    CHECK(nl.f(1.01 * hi) == 0.0);
  }
  CHECK_THROWS_AS(build_oscillating_f(2.0, 0.25, growth_threshold(2.0, 0.25), 5, Branch::Infinity), Error);
  CHECK_THROWS_AS(build_oscillating_f(2.0, 0.25, 0.5 * growth_threshold(2.0, 0.25), 5, Branch::Zero), Error);
}

TEST_CASE("piecewise polynomial") {
  // f = 1 + 2(x-1) on [1,2], 3 on [3,4], zero elsewhere.
  auto nl = piecewise_polynomial({{1.0, 2.0, {1.0, 2.0}}, {3.0, 4.0, {3.0}}});
  CHECK(nl.f(0.5) == 0.0);
  CHECK(nl.f(1.5) == doctest::Approx(2.0));
  CHECK(nl.f(2.5) == 0.0);
  CHECK(nl.f(3.5) == doctest::Approx(3.0));
  CHECK(nl.F(1.0) == 0.0);
  CHECK(nl.F(2.0) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(nl.F(2.5) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(nl.F(3.5) == doctest::Approx(3.5).epsilon(1e-15));
  CHECK(nl.F(10.0) == doctest::Approx(5.0).epsilon(1e-15));
  CHECK_THROWS_AS(piecewise_polynomial({{2.0, 1.0, {1.0}}}), Error);
  CHECK_THROWS_AS(piecewise_polynomial({{1.0, 3.0, {1.0}}, {2.0, 4.0, {1.0}}}), Error);
  CHECK_THROWS_AS(piecewise_polynomial({{1.0, 2.0, {}}}), Error);
}

TEST_CASE("hypotheses on the built-in nonlinearity") {
  for (Branch branch : {Branch::Infinity, Branch::Zero}) {
    auto nl = builtin(branch);
    auto report = check_hypotheses(nl, 2.0, 0.25, 5, branch);
    CHECK(report.assumptions_hold);
    CHECK(report.ratios_hold);
    CHECK(report.plateaus_hold);
    CHECK(report.growth_holds);
    CHECK(report.all_hold());
    CHECK(report.threshold == doctest::Approx(32.0));
    CHECK(report.ratios.size() == 5);
    CHECK(report.ratios.back().ratio > 10.0 * report.ratios.front().ratio);
    CHECK(report.proxy.finite);
    CHECK(report.proxy.value > report.threshold);
    for (const auto& row : report.plateaus) CHECK(row.max_f <= 0.0);
  }
}

TEST_CASE("hypotheses with zero forcing") {
  auto nl = zero_nonlinearity().with_sequences(oscillating_layout(5, Branch::Infinity));
  auto report = check_hypotheses(nl, 2.0, 0.25, 5, Branch::Infinity);
  CHECK(report.plateaus_hold);
  CHECK_FALSE(report.growth_holds);
  CHECK(report.proxy.value == 0.0);
  CHECK_FALSE(report.all_hold());
}

TEST_CASE("hypotheses preconditions") {
  CHECK_THROWS_AS(check_hypotheses(power_nonlinearity(1.0, 2.0), 2.0, 1.0, 5, Branch::Infinity), Error);
  auto nl = builtin(Branch::Infinity);
  CHECK_THROWS_AS(check_hypotheses(nl, 2.0, 0.25, 2, Branch::Infinity), Error);
  CHECK_THROWS_AS(check_hypotheses(nl, 2.0, 0.25, 6, Branch::Infinity), Error);
}

TEST_CASE("plateau check is monotone in K") {
  // Sequences whose fourth plateau overlaps a bump of the built-in f.
  auto seqs = oscillating_layout(5, Branch::Infinity);
  seqs.a[3] = seqs.b[2] * 1.5;
  auto nl = builtin(Branch::Infinity).with_sequences(seqs);
  std::vector<bool> pass;
  for (int K = 3; K <= 5; ++K) pass.push_back(check_hypotheses(nl, 2.0, 0.25, K, Branch::Infinity).plateaus_hold);
  CHECK(pass[0]);
  CHECK_FALSE(pass[1]);
  CHECK_FALSE(pass[2]);
  for (std::size_t i = 1; i < pass.size(); ++i) {
    if (pass[i]) CHECK(pass[i - 1]);
  }
}

TEST_CASE("hypothesis reports are deterministic across thread counts") {
  auto nl = builtin(Branch::Infinity);
  HypothesisOptions serial;
  HypothesisOptions parallel;
  parallel.threads = 4;
  auto a = check_hypotheses(nl, 2.0, 0.25, 5, Branch::Infinity, serial);
  auto b = check_hypotheses(nl, 2.0, 0.25, 5, Branch::Infinity, parallel);
  REQUIRE(a.plateaus.size() == b.plateaus.size());
  for (std::size_t i = 0; i < a.plateaus.size(); ++i) {
    CHECK(a.plateaus[i].max_f == b.plateaus[i].max_f);
    CHECK(a.plateaus[i].argmax == b.plateaus[i].argmax);
  }
  CHECK(a.proxy.value == b.proxy.value);
  CHECK(a.inf_F == b.inf_F);
}
