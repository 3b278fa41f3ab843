#include "certificates.hpp"

#include <algorithm>
#include <array>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/minima.hpp>
#include <cmath>
#include <limits>
#include <sstream>

#include "errors.hpp"
#include "functional.hpp"
#include "parallel.hpp"

namespace plap {

namespace {

void validate_support(const TestFnParams& params) {
  require(std::isfinite(params.t0) && std::isfinite(params.gamma) && std::isfinite(params.plateau),
          "test function: parameters must be finite");
  require(params.gamma > 0.0, "test function: gamma must be positive");
  require(params.plateau > 0.0, "test function: plateau must be positive");
  if (!(params.t0 - params.gamma > 0.0 && params.t0 + params.gamma < 1.0)) {
    std::ostringstream msg;
    msg << "test function: support [" << params.t0 - params.gamma << ", " << params.t0 + params.gamma
        << "] not inside (0, 1)";
    fail(ErrorCode::InvalidArgument, msg.str());
  }
}

// Trapezoid: 0 outside (t0 - gamma, t0 + gamma), `plateau` on |t - t0| <= inner.
FEFunction trapezoid(const TestFnParams& params, double inner, const Mesh& mesh) {
  const double t0 = params.t0;
  const double gamma = params.gamma;
  const std::array<double, 5> breaks{t0 - gamma, t0 - inner, t0, t0 + inner, t0 + gamma};
  Mesh augmented = mesh.with_breakpoints(breaks);
  std::vector<double> values(augmented.node_count(), 0.0);
  // Classify against the breakpoints themselves so the support ends and the
  // plateau edges are hit exactly.
  for (std::size_t i = 1; i + 1 < values.size(); ++i) {
    const double t = augmented.node(i);
    if (t <= breaks[0] || t >= breaks[4]) continue;
    if (t >= breaks[1] && t <= breaks[3]) {
      values[i] = params.plateau;
    } else if (t < breaks[1]) {
      values[i] = params.plateau * (t - breaks[0]) / (breaks[1] - breaks[0]);
    } else {
      values[i] = params.plateau * (breaks[4] - t) / (breaks[4] - breaks[3]);
    }
  }
  return FEFunction(std::move(augmented), std::move(values));
}

double integrate_q(const WeightFunction& q, double lo, double hi) {
  return boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
      [&](double t) { return q(t); }, lo, hi, 15, 1e-13);
}

// argmax of F on [0, hi]: 10^4 samples then Brent around the best sample.
std::pair<double, double> maximize_F(const Nonlinearity& nl, double hi) {
  constexpr int kSamples = 10000;
  const double step = hi / kSamples;
  int best = 0;
  double best_value = nl.F(0.0);
  for (int i = 1; i <= kSamples; ++i) {
    const double value = nl.F(step * i);
    if (value > best_value) {
      best_value = value;
      best = i;
    }
  }
  double arg = step * best;
  const double lo_b = step * std::max(best - 1, 0);
  const double hi_b = step * std::min(best + 1, kSamples);
  if (hi_b > lo_b) {
    auto [x, neg] = boost::math::tools::brent_find_minima([&](double xi) { return -nl.F(xi); }, lo_b, hi_b,
                                                          std::numeric_limits<double>::digits / 2);
    if (-neg > best_value) {
      best_value = -neg;
      arg = x;
    }
  }
  if (!std::isfinite(best_value)) {
    std::ostringstream msg;
    msg << "maximizer of F on [0, " << hi << "] not found";
    fail(ErrorCode::NumericalFailure, msg.str());
  }
  return {arg, best_value};
}

// First run (scanning upward or downward on a log grid) where
// F(eta)/eta^p > h; returns the argmax of the ratio inside that run.
double find_eta(const Nonlinearity& nl, double p, double h, double lo, double hi, bool upward) {
  constexpr int kSamples = 10000;
  auto fail_window = [&] {
    std::ostringstream msg;
    msg << "no eta with F(eta)/eta^p > " << h << " in [" << lo << ", " << hi << "]";
    fail(ErrorCode::NotFound, msg.str());
  };
  if (!(lo > 0.0 && hi > lo)) fail_window();
  const double log_lo = std::log(lo);
  const double log_span = std::log(hi) - log_lo;
  auto at = [&](int i) {
    const int j = upward ? i : kSamples - i;
    return std::exp(log_lo + log_span * static_cast<double>(j) / kSamples);
  };
  auto ratio = [&](double eta) { return nl.F(eta) / std::pow(eta, p); };

  int first = -1;
  for (int i = 0; i <= kSamples; ++i) {
    if (ratio(at(i)) > h) {
      first = i;
      break;
    }
  }
  if (first < 0) fail_window();
  int best = first;
  double best_value = ratio(at(first));
  for (int i = first + 1; i <= kSamples; ++i) {
    const double value = ratio(at(i));
    if (!(value > h)) break;
    if (value > best_value) {
      best_value = value;
      best = i;
    }
  }
  double eta = at(best);
  const double x1 = at(std::max(best - 1, 0));
  const double x2 = at(std::min(best + 1, kSamples));
  const double a = std::min(x1, x2);
  const double b = std::max(x1, x2);
  if (b > a) {
    auto [x, neg] = boost::math::tools::brent_find_minima([&](double xi) { return -ratio(xi); }, a, b,
                                                          std::numeric_limits<double>::digits / 2);
    if (-neg > best_value) eta = x;
  }
  return eta;
}

const OscillationSequences& sequences_for(const Nonlinearity& nl, int count) {
  require(count >= 3, "certificate: K must be at least 3");
  if (!nl.sequences()) fail(ErrorCode::InvalidArgument, "certificate: nonlinearity has no oscillation sequences");
  const auto& seqs = *nl.sequences();
  if (seqs.size() < static_cast<std::size_t>(count)) {
    std::ostringstream msg;
    msg << "certificate: K = " << count << " exceeds the " << seqs.size() << " available sequence terms";
    fail(ErrorCode::InvalidArgument, msg.str());
  }
  return seqs;
}

void echo_setup(Certificate& cert, const CertificateSetup& s) {
  cert.parameters = {{"p", s.p},
                     {"q0", s.q0},
                     {"sigma", s.sigma},
                     {"mu_bar", s.mu_bar},
                     {"threshold", s.threshold},
                     {"proxy", s.proxy.value},
                     {"proxy_window_lo", s.proxy.window_lo},
                     {"proxy_window_hi", s.proxy.window_hi},
                     {"h", s.h},
                     {"t0", s.t0},
                     {"gamma", s.gamma},
                     {"gamma_min", s.gamma_min},
                     {"gamma_max", s.gamma_max}};
  cert.provenance = {{"h", s.h_source}, {"gamma", s.gamma_source}, {"t0", s.t0_source}};
}

// Energy certificates share everything except the eta window and the
// per-row monotone quantity.
struct EnergyRow {
  double eta = 0.0;
  double ratio = 0.0;
  double norm_p = 0.0;
  EnergyBreakdown energy;
  double bound = 0.0;
};

EnergyRow energy_row(const Nonlinearity& nl, double p, const WeightFunction& q, const CertificateSetup& s,
                     const Mesh& mesh, double eta) {
  TestFnParams params{s.t0, s.gamma, eta, s.mu_bar};
  const FEFunction w = make_wk(params, mesh);
  EnergyRow row;
  row.eta = eta;
  row.ratio = nl.F(eta) / std::pow(eta, p);
  row.norm_p = wk_norm_p(params, p);
  row.energy = energy(w, p, q, nl);
  row.bound = 2.0 * s.mu_bar * s.gamma * s.q0 * std::pow(eta, p) * (s.sigma / (p * std::pow(s.gamma, p)) - s.h);
  return row;
}

void set_first_holding(Certificate& cert) {
  cert.first_holding_k.reset();
  for (auto it = cert.rows.rbegin(); it != cert.rows.rend() && it->holds; ++it) cert.first_holding_k = it->k;
}

}  // namespace

FEFunction make_vk(const TestFnParams& params, const Mesh& mesh) {
  validate_support(params);
  return trapezoid(params, 0.5 * params.gamma, mesh);
}

FEFunction make_wk(const TestFnParams& params, const Mesh& mesh) {
  validate_support(params);
  if (!(params.mu_bar > 0.0 && params.mu_bar <= 1.0 - 1e-6)) {
    std::ostringstream msg;
    msg << "w_k: mu_bar = " << params.mu_bar << " outside (0, 1 - 1e-6]";
    fail(ErrorCode::InvalidArgument, msg.str());
  }
  return trapezoid(params, params.mu_bar * params.gamma, mesh);
}

double vk_norm_p(const TestFnParams& params, double p) {
  return std::pow(2.0, p) * std::pow(params.plateau, p) / std::pow(params.gamma, p - 1.0);
}

double wk_norm_p(const TestFnParams& params, double p) {
  return 2.0 * std::pow(params.plateau, p) /
         (std::pow(params.gamma, p - 1.0) * std::pow(1.0 - params.mu_bar, p - 1.0));
}

const char* to_string(CertificateKind kind) {
  switch (kind) {
    case CertificateKind::PhiBound: return "PhiBound";
    case CertificateKind::EnergyUnbounded: return "EnergyUnbounded";
    case CertificateKind::EnergyNegativeSmall: return "EnergyNegativeSmall";
  }
  return "unknown";
}

CertificateSetup resolve_setup(const Nonlinearity& nl, double p, double q0, const CertificateOptions& options) {
  require(p > 1.0, "certificate: p must exceed 1");
  require(q0 > 0.0, "certificate: q0 must be positive");
  const auto& seqs = sequences_for(nl, options.count);
  require(options.t0 > 0.0 && options.t0 < 1.0, "certificate: t0 must lie in (0, 1)");

  CertificateSetup s;
  s.p = p;
  s.q0 = q0;
  const SigmaResult sig = sigma(p, q0);
  s.sigma = sig.sigma;
  s.mu_bar = sig.mu_bar;
  s.threshold = growth_threshold(p, q0);
  const std::size_t last = static_cast<std::size_t>(options.count) - 1;
  if (options.branch == Branch::Infinity) {
    s.proxy = growth_proxy(nl, p, seqs.b[0], seqs.b[last]);
  } else {
    s.proxy = growth_proxy(nl, p, seqs.a[last], seqs.b[0]);
  }
  s.t0 = options.t0;
  s.t0_source = "configured";
  s.gamma_max = std::min(s.t0, 1.0 - s.t0);

  if (!(s.proxy.finite && s.proxy.value > s.threshold)) {
    std::ostringstream msg;
    msg << "certificate: no admissible h, growth proxy " << s.proxy.value << " does not exceed threshold "
        << s.threshold;
    fail(ErrorCode::InvalidArgument, msg.str());
  }
  if (options.h) {
    if (!(*options.h > s.threshold && *options.h < s.proxy.value)) {
      std::ostringstream msg;
      msg << "certificate: h = " << *options.h << " outside (" << s.threshold << ", " << s.proxy.value << ")";
      fail(ErrorCode::InvalidArgument, msg.str());
    }
    s.h = *options.h;
    s.h_source = "override";
  } else {
    s.h = std::sqrt(s.threshold * s.proxy.value);
    s.h_source = "geometric mean of threshold and growth proxy";
  }

  s.gamma_min = std::pow(s.sigma / (p * s.h), 1.0 / p);
  if (!(s.gamma_min < s.gamma_max)) {
    std::ostringstream msg;
    msg << "certificate: empty gamma interval (" << s.gamma_min << ", " << s.gamma_max << ")";
    fail(ErrorCode::InvalidArgument, msg.str());
  }
  if (options.gamma) {
    if (!(*options.gamma > s.gamma_min && *options.gamma < s.gamma_max)) {
      std::ostringstream msg;
      msg << "certificate: gamma = " << *options.gamma << " outside (" << s.gamma_min << ", " << s.gamma_max << ")";
      fail(ErrorCode::InvalidArgument, msg.str());
    }
    s.gamma = *options.gamma;
    s.gamma_source = "override";
  } else {
    s.gamma = std::sqrt(s.gamma_min * s.gamma_max);
    s.gamma_source = "log-midpoint of admissible interval";
  }
  return s;
}

Certificate check_phi_bound(const Nonlinearity& nl, double p, const WeightFunction& q, double c,
                            const CertificateOptions& options) {
  require(c > 0.0, "phi bound: embedding constant must be positive");
  const auto& seqs = sequences_for(nl, options.count);
  Certificate cert;
  cert.kind = CertificateKind::PhiBound;
  cert.branch = options.branch;

  // gamma only needs the support condition here, so fall back to a fixed
  // choice when no h is admissible (e.g. f == 0).
  double gamma = 0.0;
  try {
    const CertificateSetup s = resolve_setup(nl, p, q.q0, options);
    echo_setup(cert, s);
    gamma = s.gamma;
  } catch (const Error&) {
    require(options.t0 > 0.0 && options.t0 < 1.0, "certificate: t0 must lie in (0, 1)");
    const double gamma_max = std::min(options.t0, 1.0 - options.t0);
    if (options.gamma) {
      require(*options.gamma > 0.0 && *options.gamma < gamma_max, "phi bound: gamma outside (0, dist(t0))");
      gamma = *options.gamma;
    } else {
      gamma = 0.5 * gamma_max;
    }
    cert.parameters = {{"p", p}, {"q0", q.q0}, {"t0", options.t0}, {"gamma", gamma}};
    cert.provenance = {{"h", "not admissible"},
                       {"gamma", options.gamma ? "override" : "half the distance from t0 to the boundary"},
                       {"t0", "configured"}};
  }
  cert.parameters.emplace_back("c", c);
  cert.parameters.emplace_back("K", options.count);

  const double total_q = integrate_q(q, 0.0, 1.0);
  const double center_q = integrate_q(q, options.t0 - 0.5 * gamma, options.t0 + 0.5 * gamma);
  cert.parameters.emplace_back("int_q", total_q);
  cert.parameters.emplace_back("int_q_center", center_q);

  cert.rows.resize(static_cast<std::size_t>(options.count));
  parallel_for(cert.rows.size(), options.threads, [&](std::size_t i) {
    const double a = seqs.a[i];
    const double b = seqs.b[i];
    const double r = std::pow(b / c, p);
    const auto [xi, F_xi] = maximize_F(nl, a);
    const TestFnParams params{options.t0, gamma, std::max(xi, std::numeric_limits<double>::min()), 0.5};
    const double vk = xi > 0.0 ? vk_norm_p(params, p) : 0.0;
    const double lhs = F_xi * (total_q - center_q);
    const double rhs = (r - vk) / p;
    CertificateRow& row = cert.rows[i];
    row.k = static_cast<int>(i) + 1;
    row.values = {{"a_k", a},    {"b_k", b},         {"r_k", r},     {"xi_k", xi},
                  {"F_xi_k", F_xi}, {"vk_norm_p", vk}, {"lhs", lhs},   {"rhs", rhs},
                  {"r_over_xi_p", xi > 0.0 ? r / std::pow(xi, p) : INFINITY}};
    row.margin = std::min(rhs - lhs, r - vk);
    row.holds = lhs < rhs && vk < r;
  });
  set_first_holding(cert);
  cert.verdict = cert.first_holding_k.has_value();
  return cert;
}

Certificate check_energy_unbounded(const Nonlinearity& nl, double p, const WeightFunction& q,
                                   const CertificateOptions& options) {
  const auto& seqs = sequences_for(nl, options.count);
  const CertificateSetup s = resolve_setup(nl, p, q.q0, options);
  Certificate cert;
  cert.kind = CertificateKind::EnergyUnbounded;
  cert.branch = options.branch;
  echo_setup(cert, s);
  cert.parameters.emplace_back("K", options.count);

  const Mesh mesh = Mesh::uniform(options.elements);
  const double top = 10.0 * seqs.b[static_cast<std::size_t>(options.count) - 1];
  std::vector<EnergyRow> data(static_cast<std::size_t>(options.count));
  parallel_for(data.size(), options.threads, [&](std::size_t i) {
    const double k = static_cast<double>(i + 1);
    const double lo = std::max(k, i > 0 ? seqs.b[i - 1] : 0.0);
    const double eta = find_eta(nl, p, s.h, lo, top, true);
    data[i] = energy_row(nl, p, q, s, mesh, eta);
  });

  for (std::size_t i = 0; i < data.size(); ++i) {
    const EnergyRow& d = data[i];
    CertificateRow row;
    row.k = static_cast<int>(i) + 1;
    row.values = {{"eta_k", d.eta},          {"F_over_eta_p", d.ratio}, {"wk_norm_p", d.norm_p},
                  {"phi", d.energy.phi},     {"psi", d.energy.psi},     {"energy", d.energy.energy},
                  {"bound", d.bound}};
    row.margin = std::min(d.bound - d.energy.energy, -d.bound);
    row.holds = d.energy.energy <= d.bound && d.bound < 0.0;
    if (i > 0) {
      const double drop = data[i - 1].energy.energy - d.energy.energy;
      row.values.emplace_back("decrease", drop);
      row.margin = std::min(row.margin, drop);
      row.holds = row.holds && drop > 0.0;
    }
    cert.rows.push_back(std::move(row));
  }
  set_first_holding(cert);
  cert.verdict = std::all_of(cert.rows.begin(), cert.rows.end(), [](const CertificateRow& r) { return r.holds; });
  return cert;
}

Certificate check_small_branch(const Nonlinearity& nl, double p, const WeightFunction& q,
                               const CertificateOptions& options) {
  const auto& seqs = sequences_for(nl, options.count);
  CertificateOptions zero = options;
  zero.branch = Branch::Zero;
  const CertificateSetup s = resolve_setup(nl, p, q.q0, zero);
  Certificate cert;
  cert.kind = CertificateKind::EnergyNegativeSmall;
  cert.branch = Branch::Zero;
  echo_setup(cert, s);
  cert.parameters.emplace_back("K", options.count);
  cert.parameters.emplace_back("baseline_energy", 0.0);

  const Mesh mesh = Mesh::uniform(options.elements);
  const double bottom =
      0.25 * *std::min_element(seqs.a.begin(), seqs.a.begin() + static_cast<std::ptrdiff_t>(options.count));
  std::vector<EnergyRow> data(static_cast<std::size_t>(options.count));
  parallel_for(data.size(), options.threads, [&](std::size_t i) {
    const double k = static_cast<double>(i + 1);
    const double hi = std::min(1.0 / k, seqs.b[i]);
    const double eta = find_eta(nl, p, s.h, bottom, hi, false);
    data[i] = energy_row(nl, p, q, s, mesh, eta);
  });

  for (std::size_t i = 0; i < data.size(); ++i) {
    const EnergyRow& d = data[i];
    const double norm = std::pow(d.norm_p, 1.0 / p);
    CertificateRow row;
    row.k = static_cast<int>(i) + 1;
    row.values = {{"eta_k", d.eta},           {"F_over_eta_p", d.ratio}, {"wk_norm", norm},
                  {"wk_norm_p", d.norm_p},    {"phi", d.energy.phi},     {"psi", d.energy.psi},
                  {"energy", d.energy.energy}, {"bound", d.bound}};
    row.margin = -d.energy.energy;
    row.holds = d.energy.energy < 0.0;
    if (i > 0) {
      const double drop = std::pow(data[i - 1].norm_p, 1.0 / p) - norm;
      row.values.emplace_back("norm_decrease", drop);
      row.margin = std::min(row.margin, drop);
      row.holds = row.holds && drop > 0.0;
    }
    cert.rows.push_back(std::move(row));
  }
  set_first_holding(cert);
  cert.verdict = std::all_of(cert.rows.begin(), cert.rows.end(), [](const CertificateRow& r) { return r.holds; });
  return cert;
}

}  // namespace plap
