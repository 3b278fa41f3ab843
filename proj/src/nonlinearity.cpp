#include "nonlinearity.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/tools/minima.hpp>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "errors.hpp"
#include "parallel.hpp"

namespace plap {

const char* to_string(Branch branch) { return branch == Branch::Infinity ? "infinity" : "zero"; }

void validate(const OscillationSequences& seqs) {
  require(seqs.a.size() == seqs.b.size(), "sequences: a and b must have the same length");
  for (std::size_t i = 0; i < seqs.size(); ++i) {
    if (!(seqs.a[i] > 0.0 && seqs.a[i] < seqs.b[i] && std::isfinite(seqs.b[i]))) {
      std::ostringstream os;
      os << "sequences: need 0 < a_k < b_k, violated at k = " << i + 1;
      fail(ErrorCode::InvalidArgument, os.str());
    }
  }
}

Nonlinearity Nonlinearity::with_primitive(std::string name, Scalar f, Scalar primitive) {
  require(static_cast<bool>(f) && static_cast<bool>(primitive), "nonlinearity: empty evaluator");
  Nonlinearity nl;
  nl.name_ = std::move(name);
  nl.kind_ = PrimitiveKind::ClosedForm;
  nl.f_ = std::make_shared<const Scalar>(std::move(f));
  nl.primitive_ = std::make_shared<const Scalar>(std::move(primitive));
  return nl;
}

Nonlinearity Nonlinearity::with_quadrature(std::string name, Scalar f) {
  require(static_cast<bool>(f), "nonlinearity: empty evaluator");
  Nonlinearity nl;
  nl.name_ = std::move(name);
  nl.kind_ = PrimitiveKind::Quadrature;
  nl.f_ = std::make_shared<const Scalar>(std::move(f));
  return nl;
}

Nonlinearity Nonlinearity::with_sequences(OscillationSequences seqs) const {
  validate(seqs);
  Nonlinearity copy = *this;
  copy.seqs_ = std::move(seqs);
  return copy;
}

double Nonlinearity::f(double x) const {
  if (x < 0.0) return 0.0;
  return (*f_)(x);
}

double Nonlinearity::F(double xi) const {
  if (xi <= 0.0) return 0.0;
  if (kind_ == PrimitiveKind::ClosedForm) return (*primitive_)(xi);

  using boost::math::quadrature::gauss_kronrod;
  double error = 0.0;
  double l1 = 0.0;
  const auto& fn = *f_;
  const auto converged = [&](double value) {
    return std::isfinite(value) && error <= std::max(1e-12, 1e-13 * l1);
  };
  double value = gauss_kronrod<double, 15>::integrate(fn, 0.0, xi, 20, 1e-14, &error, &l1);
  if (converged(value)) return value;
  // Endpoint singularities in f' (e.g. x^{1/2}) defeat Gauss-Kronrod;
  // the double-exponential rule clusters nodes there.
  thread_local boost::math::quadrature::tanh_sinh<double> de;
  value = de.integrate([&fn](double x) { return fn(x); }, 0.0, xi, 1e-14, &error, &l1);
  if (converged(value)) return value;
  std::ostringstream os;
  os << "primitive of '" << name_ << "' at " << xi << ": quadrature did not converge (error estimate " << error
     << ")";
  fail(ErrorCode::NumericalFailure, os.str());
}

Nonlinearity zero_nonlinearity() {
  return Nonlinearity::with_primitive(
      "zero", [](double) { return 0.0; }, [](double) { return 0.0; });
}

Nonlinearity power_nonlinearity(double coefficient, double exponent) {
  require(std::isfinite(coefficient), "power nonlinearity: coefficient must be finite");
  require(exponent >= 0.0, "power nonlinearity: exponent must be >= 0");
  std::ostringstream name;
  name << "power(" << coefficient << "*x^" << exponent << ")";
  return Nonlinearity::with_primitive(
      name.str(), [=](double x) { return coefficient * std::pow(x, exponent); },
      [=](double x) { return coefficient * std::pow(x, exponent + 1.0) / (exponent + 1.0); });
}

namespace {

double poly_value(const std::vector<double>& c, double s) {
  double acc = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * s + *it;
  return acc;
}

double poly_integral(const std::vector<double>& c, double s) {
  double acc = 0.0;
  for (std::size_t j = c.size(); j-- > 0;) acc = acc * s + c[j] / static_cast<double>(j + 1);
  return acc * s;
}

struct PiecewiseTable {
  std::vector<PolynomialPiece> pieces;
  std::vector<double> before;  // F at each piece's left end

  const PolynomialPiece* locate(double x, std::size_t& index) const {
    auto it = std::upper_bound(pieces.begin(), pieces.end(), x,
                               [](double v, const PolynomialPiece& piece) { return v < piece.lo; });
    if (it == pieces.begin()) return nullptr;
    index = static_cast<std::size_t>(it - pieces.begin()) - 1;
    return &pieces[index];
  }

  double f(double x) const {
    std::size_t i = 0;
    const auto* piece = locate(x, i);
    if (piece == nullptr || x > piece->hi) return 0.0;
    return poly_value(piece->coeffs, x - piece->lo);
  }

  double primitive(double x) const {
    std::size_t i = 0;
    const auto* piece = locate(x, i);
    if (piece == nullptr) return 0.0;
    return before[i] + poly_integral(piece->coeffs, std::min(x, piece->hi) - piece->lo);
  }
};

// sin^2 bump on (lo, lo + width) with height `height`: area height*width/2.
struct Bump {
  double lo = 0.0;
  double width = 0.0;
  double height = 0.0;
  double before = 0.0;  // F(lo)
};

struct BumpTrain {
  std::vector<Bump> bumps;
  double total = 0.0;

  const Bump* locate(double x) const {
    auto it = std::upper_bound(bumps.begin(), bumps.end(), x,
                               [](double v, const Bump& b) { return v < b.lo; });
    if (it == bumps.begin()) return nullptr;
    return &*(it - 1);
  }

  double f(double x) const {
    const Bump* bump = locate(x);
    if (bump == nullptr || x >= bump->lo + bump->width) return 0.0;
    const double s = std::sin(std::numbers::pi * (x - bump->lo) / bump->width);
    return bump->height * s * s;
  }

  double primitive(double x) const {
    const Bump* bump = locate(x);
    if (bump == nullptr) return 0.0;
    const double u = std::min(x - bump->lo, bump->width);
    const double partial =
        bump->height * (0.5 * u - bump->width / (4.0 * std::numbers::pi) *
                                      std::sin(2.0 * std::numbers::pi * u / bump->width));
    return bump->before + partial;
  }
};

}  // namespace

Nonlinearity piecewise_polynomial(std::vector<PolynomialPiece> pieces) {
  auto table = std::make_shared<PiecewiseTable>();
  double running = 0.0;
  double last_hi = 0.0;
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    const auto& piece = pieces[i];
    if (!(piece.lo >= 0.0 && piece.hi > piece.lo && piece.lo >= last_hi) || piece.coeffs.empty()) {
      std::ostringstream os;
      os << "piecewise polynomial: piece " << i
         << " must satisfy 0 <= lo < hi, follow the previous piece, and have coefficients";
      fail(ErrorCode::InvalidArgument, os.str());
    }
    table->before.push_back(running);
    running += poly_integral(piece.coeffs, piece.hi - piece.lo);
    last_hi = piece.hi;
  }
  table->pieces = std::move(pieces);
  return Nonlinearity::with_primitive(
      "table", [table](double x) { return table->f(x); },
      [table](double x) { return table->primitive(x); });
}

OscillationSequences oscillating_layout(int k_max, Branch branch) {
  require(k_max >= 1, "oscillating layout: k_max must be >= 1");
  OscillationSequences seqs;
  seqs.a.resize(static_cast<std::size_t>(k_max));
  seqs.b.resize(static_cast<std::size_t>(k_max));
  for (int k = 1; k <= k_max; ++k) {
    const auto i = static_cast<std::size_t>(k - 1);
    const double ratio = std::ldexp(1.0, k);
    if (branch == Branch::Infinity) {
      seqs.a[i] = k == 1 ? 1.0 : 2.0 * seqs.b[i - 1];
      seqs.b[i] = ratio * seqs.a[i];
    } else {
      seqs.b[i] = k == 1 ? 1.0 : 0.5 * seqs.a[i - 1];
      seqs.a[i] = seqs.b[i] / ratio;
    }
    if (!(std::isfinite(seqs.b[i]) && std::isnormal(seqs.a[i]))) {
      std::ostringstream os;
      os << "oscillating layout leaves double range at k = " << k << "; reduce k_max below " << k;
      fail(ErrorCode::NumericalFailure, os.str());
    }
  }
  return seqs;
}

Nonlinearity build_oscillating_f(double p, double q0, double growth, int k_max, Branch branch) {
  require(p > 1.0, "oscillating f: p must be > 1");
  require(q0 > 0.0, "oscillating f: q0 must be > 0");
  require(k_max >= 1, "oscillating f: k_max must be >= 1");
  const double threshold = growth_threshold(p, q0);
  if (!(growth > threshold)) {
    std::ostringstream os;
    os << "oscillating f: growth " << growth << " must exceed the threshold " << threshold;
    fail(ErrorCode::InvalidArgument, os.str());
  }

  OscillationSequences seqs = oscillating_layout(k_max, branch);
  for (std::size_t i = 0; i < seqs.size(); ++i) {
    if (!std::isnormal(growth * std::pow(seqs.a[i], p))) {
      std::ostringstream os;
      os << "oscillating f: F(a_k) leaves double range at k = " << i + 1 << "; reduce k_max below " << i + 1;
      fail(ErrorCode::NumericalFailure, os.str());
    }
  }

  // Plateaus in ascending order of position.
  std::vector<std::pair<double, double>> plateaus;
  for (std::size_t i = 0; i < seqs.size(); ++i) plateaus.emplace_back(seqs.a[i], seqs.b[i]);
  std::sort(plateaus.begin(), plateaus.end());

  auto train = std::make_shared<BumpTrain>();
  double previous_end = 0.5 * plateaus.front().first;
  for (const auto& [lo, hi] : plateaus) {
    Bump bump;
    bump.lo = previous_end;
    bump.width = lo - previous_end;
    bump.before = train->total;
    const double area = std::max(growth * std::pow(lo, p) - train->total, 0.0);
    bump.height = 2.0 * area / bump.width;
    if (!std::isfinite(bump.height)) {
      fail(ErrorCode::NumericalFailure, "oscillating f: bump height overflows");
    }
    train->total += area;
    train->bumps.push_back(bump);
    previous_end = hi;
  }

  std::ostringstream name;
  name << "oscillating(" << to_string(branch) << ", growth=" << growth << ", k_max=" << k_max << ")";
  return Nonlinearity::with_primitive(
             name.str(), [train](double x) { return train->f(x); },
             [train](double x) { return train->primitive(x); })
      .with_sequences(std::move(seqs));
}

SigmaResult sigma(double p, double q0) {
  require(p > 1.0, "sigma: p must be > 1");
  require(q0 > 0.0, "sigma: q0 must be > 0");
  SigmaResult result;
  result.mu_bar = 1.0 / p;
  result.sigma = 1.0 / (q0 * result.mu_bar * std::pow(1.0 - result.mu_bar, p - 1.0));

  constexpr int kGrid = 100000;
  constexpr double kEdge = 1e-5;
  result.grid_sigma = INFINITY;
  for (int i = 0; i < kGrid; ++i) {
    const double mu = kEdge + (1.0 - 2.0 * kEdge) * static_cast<double>(i) / (kGrid - 1);
    const double value = 1.0 / (q0 * mu * std::pow(1.0 - mu, p - 1.0));
    if (value < result.grid_sigma) {
      result.grid_sigma = value;
      result.grid_argmin = mu;
    }
  }
  return result;
}

double embedding_constant(double p) {
  require(p > 1.0, "embedding_constant: p must be > 1");
  return std::pow(0.5, (p - 1.0) / p);
}

double growth_threshold(double p, double q0) {
  return sigma(p, q0).sigma / (p * std::pow(0.5, p));
}

GrowthProxy growth_proxy(const Nonlinearity& nl, double p, double window_lo, double window_hi) {
  require(window_lo > 0.0 && window_hi > window_lo, "growth proxy: need 0 < lo < hi");
  constexpr int kSamples = 10000;
  GrowthProxy proxy;
  proxy.window_lo = window_lo;
  proxy.window_hi = window_hi;
  proxy.value = -INFINITY;
  const double log_lo = std::log(window_lo);
  const double log_span = std::log(window_hi) - log_lo;
  auto at = [&](int i) { return std::exp(log_lo + log_span * static_cast<double>(i) / kSamples); };
  auto ratio = [&](double xi) { return nl.F(xi) / std::pow(xi, p); };
  int best = 0;
  for (int i = 0; i <= kSamples; ++i) {
    const double value = ratio(at(i));
    if (value > proxy.value) {
      proxy.value = value;
      best = i;
    }
  }
  proxy.argmax = at(best);
  const double lo = at(std::max(best - 1, 0));
  const double hi = at(std::min(best + 1, kSamples));
  if (hi > lo) {
    auto [x, neg] = boost::math::tools::brent_find_minima(
        [&](double xi) { return -ratio(xi); }, lo, hi, std::numeric_limits<double>::digits / 2);
    if (-neg > proxy.value) {
      proxy.value = -neg;
      proxy.argmax = x;
    }
  }
  proxy.finite = std::isfinite(proxy.value);
  return proxy;
}

namespace {

// Max of f over [lo, hi]: 10^4 uniform samples, then three rounds of
// bisection toward the larger half around every sample that is not clearly
// negative.
PlateauRow plateau_max(const Nonlinearity& nl, double lo, double hi) {
  constexpr int kSamples = 10000;
  constexpr int kRounds = 3;
  const double step = (hi - lo) / kSamples;
  std::vector<double> values(kSamples + 1);
  for (int i = 0; i <= kSamples; ++i) values[static_cast<std::size_t>(i)] = nl.f(lo + step * i);

  PlateauRow row;
  row.max_f = -INFINITY;
  for (int i = 0; i <= kSamples; ++i) {
    const double x = lo + step * i;
    double best = values[static_cast<std::size_t>(i)];
    double best_x = x;
    if (best >= -1e-12) {
      double left = std::max(lo, x - step);
      double right = std::min(hi, x + step);
      for (int round = 0; round < kRounds && right > left; ++round) {
        const double mid = 0.5 * (left + right);
        const double ql = 0.5 * (left + mid);
        const double qr = 0.5 * (mid + right);
        const double fl = nl.f(ql);
        const double fr = nl.f(qr);
        if (fl > best) { best = fl; best_x = ql; }
        if (fr > best) { best = fr; best_x = qr; }
        if (fl >= fr) right = mid; else left = mid;
      }
    }
    if (best > row.max_f) {
      row.max_f = best;
      row.argmax = best_x;
    }
  }
  row.holds = row.max_f <= 0.0;
  return row;
}

}  // namespace

HypothesisReport check_hypotheses(const Nonlinearity& nl, double p, double q0, int count, Branch branch,
                                  const HypothesisOptions& options) {
  require(nl.sequences().has_value(), "check_hypotheses: nonlinearity has no oscillation sequences");
  require(count >= 3, "check_hypotheses: need K >= 3");
  const auto& seqs = *nl.sequences();
  if (static_cast<std::size_t>(count) > seqs.size()) {
    std::ostringstream os;
    os << "check_hypotheses: K = " << count << " exceeds the " << seqs.size() << " available sequence terms";
    fail(ErrorCode::InvalidArgument, os.str());
  }

  HypothesisReport report;
  report.branch = branch;
  report.p = p;
  report.q0 = q0;
  report.count = count;
  const auto K = static_cast<std::size_t>(count);

  // Standing assumptions: f(0) = 0 and inf_{xi >= 0} F >= 0 (sampled).
  report.f_at_zero = nl.f(0.0);
  const double top = *std::max_element(seqs.b.begin(), seqs.b.begin() + count);
  const double bottom = *std::min_element(seqs.a.begin(), seqs.a.begin() + count);
  report.inf_F = 0.0;
  constexpr int kSignSamples = 10000;
  for (int i = 0; i <= kSignSamples; ++i) {
    const double s = static_cast<double>(i) / kSignSamples;
    report.inf_F = std::min(report.inf_F, nl.F(top * s));
    report.inf_F = std::min(report.inf_F, nl.F(bottom * std::pow(top / bottom, s)));
  }
  report.assumptions_hold = report.f_at_zero == 0.0 && report.inf_F >= -1e-12;

  // Ratios b_k/a_k.
  report.ratios.resize(K);
  for (std::size_t i = 0; i < K; ++i) {
    report.ratios[i] = RatioRow{static_cast<int>(i + 1), seqs.a[i], seqs.b[i], seqs.b[i] / seqs.a[i]};
  }
  bool increasing = true;
  for (std::size_t i = 1; i < K; ++i) increasing = increasing && report.ratios[i].ratio > report.ratios[i - 1].ratio;
  report.ratios_hold = increasing && report.ratios.back().ratio > 10.0 * report.ratios.front().ratio;

  // Sign on the plateaus.
  report.plateaus.resize(K);
  parallel_for(K, options.threads, [&](std::size_t i) {
    report.plateaus[i] = plateau_max(nl, seqs.a[i], seqs.b[i]);
    report.plateaus[i].k = static_cast<int>(i + 1);
  });
  report.plateaus_hold = std::all_of(report.plateaus.begin(), report.plateaus.end(),
                                     [](const PlateauRow& row) { return row.holds; });

  // Growth of F(x)/x^p along the window.
  report.sigma = sigma(p, q0).sigma;
  report.threshold = growth_threshold(p, q0);
  double lo = 0.0;
  double hi = 0.0;
  if (branch == Branch::Infinity) {
    lo = seqs.b.front();
    hi = seqs.b[K - 1];
  } else {
    lo = seqs.a[K - 1];
    hi = seqs.b.front();
  }
  lo = options.window_lo.value_or(lo);
  hi = options.window_hi.value_or(hi);
  report.proxy = growth_proxy(nl, p, lo, hi);
  report.growth_holds = report.proxy.finite && report.proxy.value > report.threshold;
  return report;
}

}  // namespace plap
