#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace plap {

enum class PrimitiveKind { ClosedForm, Quadrature };
enum class Branch { Infinity, Zero };

const char* to_string(Branch branch);

// Positive sequences a_k < b_k, k = 1..size(); index 0 holds k = 1.
struct OscillationSequences {
  std::vector<double> a;
  std::vector<double> b;

  std::size_t size() const { return a.size(); }
};

void validate(const OscillationSequences& seqs);

// One polynomial piece of a piecewise-polynomial nonlinearity:
// f(x) = sum_j coeffs[j] (x - lo)^j on [lo, hi].
struct PolynomialPiece {
  double lo = 0.0;
  double hi = 0.0;
  std::vector<double> coeffs;
};

// f : R -> R with f(x) = 0 for x < 0 (enforced here, whatever the supplied
// evaluator does) and its primitive F(xi) = int_0^xi f. Immutable; copies
// share the underlying evaluators.
class Nonlinearity {
 public:
  using Scalar = std::function<double(double)>;

  static Nonlinearity with_primitive(std::string name, Scalar f, Scalar primitive);
  // F by adaptive Gauss-Kronrod quadrature to absolute tolerance 1e-12
  // (relative to the integrand's L1 size once that exceeds one).
  static Nonlinearity with_quadrature(std::string name, Scalar f);

  Nonlinearity with_sequences(OscillationSequences seqs) const;

  double f(double x) const;
  double F(double xi) const;

  PrimitiveKind kind() const { return kind_; }
  const std::string& name() const { return name_; }
  const std::optional<OscillationSequences>& sequences() const { return seqs_; }

 private:
  Nonlinearity() = default;

  std::string name_;
  PrimitiveKind kind_ = PrimitiveKind::ClosedForm;
  std::shared_ptr<const Scalar> f_;
  std::shared_ptr<const Scalar> primitive_;
  std::optional<OscillationSequences> seqs_;
};

Nonlinearity zero_nonlinearity();
// f(x) = coefficient * x^exponent for x >= 0, exponent >= 0.
Nonlinearity power_nonlinearity(double coefficient, double exponent);
// Pieces must be sorted and non-overlapping; f vanishes off the pieces.
Nonlinearity piecewise_polynomial(std::vector<PolynomialPiece> pieces);

// Plateau layout used by build_oscillating_f:
//   Infinity: a_1 = 1, b_k = 2^k a_k, a_{k+1} = 2 b_k
//   Zero:     b_1 = 1, a_k = b_k / 2^k, b_{k+1} = a_k / 2
// so b_k / a_k = 2^k in both. Throws with the limiting k on overflow.
OscillationSequences oscillating_layout(int k_max, Branch branch);

// Non-negative f that vanishes on every [a_k, b_k] of oscillating_layout and
// rises through smooth sin^2 bumps between consecutive plateaus so that
// F(a_k) = growth * a_k^p. f = 0 below half the smallest plateau start and
// above the largest plateau. Requires growth above growth_threshold(p, q0).
Nonlinearity build_oscillating_f(double p, double q0, double growth, int k_max, Branch branch);

struct SigmaResult {
  double sigma = 0.0;        // 1 / (q0 mu_bar (1 - mu_bar)^{p-1}) = p^p / (q0 (p-1)^{p-1})
  double mu_bar = 0.0;       // 1 / p
  double grid_sigma = 0.0;   // brute-force minimum over a 10^5-point mu grid
  double grid_argmin = 0.0;
};

SigmaResult sigma(double p, double q0);

// c = (1/2)^{(p-1)/p}: sup|v| <= c ||v'||_p on W^{1,p}_0(0,1).
double embedding_constant(double p);

// sigma(p, q0) / (p (1/2)^p), the lower end of the growth condition.
double growth_threshold(double p, double q0);

// Sampled proxy for limsup F(xi)/xi^p over a finite window.
struct GrowthProxy {
  double window_lo = 0.0;
  double window_hi = 0.0;
  double value = 0.0;
  double argmax = 0.0;
  bool finite = false;
};

GrowthProxy growth_proxy(const Nonlinearity& nl, double p, double window_lo, double window_hi);

struct RatioRow {
  int k = 0;
  double a = 0.0;
  double b = 0.0;
  double ratio = 0.0;
};

struct PlateauRow {
  int k = 0;
  double max_f = 0.0;
  double argmax = 0.0;
  bool holds = false;
};

struct HypothesisReport {
  Branch branch = Branch::Infinity;
  double p = 0.0;
  double q0 = 0.0;
  int count = 0;

  double f_at_zero = 0.0;
  double inf_F = 0.0;        // sampled over [0, max b_k]
  bool assumptions_hold = false;

  std::vector<RatioRow> ratios;
  bool ratios_hold = false;  // b_k/a_k grows

  std::vector<PlateauRow> plateaus;
  bool plateaus_hold = false;  // f <= 0 on [a_k, b_k]

  double sigma = 0.0;
  double threshold = 0.0;
  GrowthProxy proxy;
  bool growth_holds = false;  // heuristic

  bool all_hold() const { return assumptions_hold && ratios_hold && plateaus_hold && growth_holds; }
};

struct HypothesisOptions {
  // Window for the growth proxy; defaults to [b_1, b_K] (Infinity) or
  // [a_K, b_1] (Zero) when unset.
  std::optional<double> window_lo;
  std::optional<double> window_hi;
  int threads = 1;
};

HypothesisReport check_hypotheses(const Nonlinearity& nl, double p, double q0, int count, Branch branch,
                                  const HypothesisOptions& options = {});

}  // namespace plap
