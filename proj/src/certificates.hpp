#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fe.hpp"
#include "nonlinearity.hpp"
#include "weight.hpp"

namespace plap {

// Symmetric trapezoid test function around t0: zero outside
// (t0 - gamma, t0 + gamma), equal to `plateau` on the inner window
// (half-width gamma/2 for v_k, mu_bar*gamma for w_k) and linear between.
struct TestFnParams {
  double t0 = 0.5;
  double gamma = 0.25;
  double plateau = 1.0;
  double mu_bar = 0.5;  // w_k only
};

// The mesh is augmented with the four breakpoints when they are missing.
FEFunction make_vk(const TestFnParams& params, const Mesh& mesh);
FEFunction make_wk(const TestFnParams& params, const Mesh& mesh);

// ||v_k||^p = 2^p xi^p / gamma^{p-1}
double vk_norm_p(const TestFnParams& params, double p);
// ||w_k||^p = 2 eta^p / (gamma^{p-1} (1 - mu_bar)^{p-1})
double wk_norm_p(const TestFnParams& params, double p);

enum class CertificateKind { PhiBound, EnergyUnbounded, EnergyNegativeSmall };

const char* to_string(CertificateKind kind);

struct CertificateRow {
  int k = 0;
  std::vector<std::pair<std::string, double>> values;
  double margin = 0.0;  // > 0 iff the row's strict inequality holds
  bool holds = false;
};

struct Certificate {
  CertificateKind kind = CertificateKind::PhiBound;
  Branch branch = Branch::Infinity;
  std::vector<std::pair<std::string, double>> parameters;
  std::vector<std::pair<std::string, std::string>> provenance;
  std::vector<CertificateRow> rows;
  std::optional<int> first_holding_k;  // k*: first index from which every row holds
  bool verdict = false;
};

struct CertificateOptions {
  int count = 5;  // K
  Branch branch = Branch::Infinity;
  double t0 = 0.5;
  std::optional<double> gamma;
  std::optional<double> h;
  std::size_t elements = 1024;
  int threads = 1;
};

// Resolved constants shared by the certificates.
struct CertificateSetup {
  double p = 0.0;
  double q0 = 0.0;
  double sigma = 0.0;
  double mu_bar = 0.0;
  double threshold = 0.0;
  GrowthProxy proxy;
  double h = 0.0;
  double t0 = 0.5;
  double gamma = 0.0;
  double gamma_min = 0.0;  // (sigma / (p h))^{1/p}
  double gamma_max = 0.0;  // dist(t0, {0, 1})
  std::string h_source;
  std::string gamma_source;
  std::string t0_source;
};

// Picks h strictly between the threshold and the growth proxy (geometric
// mean unless overridden) and gamma in (gamma_min, gamma_max) (log-midpoint
// unless overridden). Throws when either interval is empty or an override
// falls outside it.
CertificateSetup resolve_setup(const Nonlinearity& nl, double p, double q0, const CertificateOptions& options);

// phi(r_k) < 1/p via the sufficient inequality with r_k = (b_k / c)^p.
Certificate check_phi_bound(const Nonlinearity& nl, double p, const WeightFunction& q, double c,
                            const CertificateOptions& options);

// E(w_k) <= 2 mu gamma q0 eta_k^p (sigma/(p gamma^p) - h) < 0 with eta_k >= k.
Certificate check_energy_unbounded(const Nonlinearity& nl, double p, const WeightFunction& q,
                                   const CertificateOptions& options);

// eta_k <= 1/k: ||w_k|| strictly decreasing and E(w_k) < 0 = E(0).
Certificate check_small_branch(const Nonlinearity& nl, double p, const WeightFunction& q,
                               const CertificateOptions& options);

}  // namespace plap
