#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace plapcli {

// Raised for anything wrong with the config file itself; maps to exit code 3.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ProblemConfig {
  int dimension = 3;
  double p = 2.0;
  double inner = 1.0;
  double outer = 2.0;
  std::optional<double> weight_exponent;  // g(r) = r^e
  std::optional<double> constant_weight;  // q == c (testing)
};

enum class Family { Oscillating, Zero, Power, Table };
enum class SequenceSource { None, Builtin, Explicit };

struct Piece {
  double lo = 0.0;
  double hi = 0.0;
  std::vector<double> coeffs;
};

struct NonlinearityConfig {
  Family family = Family::Oscillating;
  bool zero_branch = false;
  std::optional<double> growth;  // default: growth_factor * threshold
  double growth_factor = 2.0;
  int k_max = 0;  // 0: use certificate.count
  double coefficient = 1.0;
  double exponent = 1.0;
  std::vector<Piece> table;
  SequenceSource sequences = SequenceSource::None;
  std::vector<double> seq_a;
  std::vector<double> seq_b;
};

struct SolverConfig {
  std::optional<double> slope_lo;  // branch-dependent defaults
  std::optional<double> slope_hi;
  int samples = 400;
  std::optional<bool> log_spacing;
  bool refine = true;
  int refine_factor = 16;
  std::size_t elements = 4096;
  int substeps = 1;
  double terminal_tolerance = 1e-10;
  double residual_tolerance = 1e-6;
  double nonneg_tolerance = 1e-8;
  double divergence_bound = 0.0;
  int max_bisections = 200;
  bool polish = false;
  double descent_tolerance = 1e-8;
  int descent_max_iterations = 5000;
  std::optional<double> dedupe_tolerance;
};

struct CertificateConfig {
  int count = 5;
  double t0 = 0.5;
  std::optional<double> gamma;
  std::optional<double> h;
  std::size_t elements = 1024;
  std::optional<double> window_lo;
  std::optional<double> window_hi;
};

struct OutputConfig {
  std::string directory = "out";
  std::size_t map_points = 1001;
  std::size_t radial_points = 4096;
  bool write_radial = true;
};

struct RunConfig {
  ProblemConfig problem;
  NonlinearityConfig nonlinearity;
  SolverConfig solver;
  CertificateConfig certificate;
  OutputConfig output;
};

// INI file with sections [problem], [nonlinearity], [mesh], [solver],
// [certificate], [output]. Unknown sections or keys are rejected by name.
// Relative table paths resolve against the config file's directory.
RunConfig load_config(const std::string& path);
RunConfig parse_config(const std::string& text, const std::string& base_dir = ".");

}  // namespace plapcli
