#include "config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace plapcli {

namespace {

namespace pt = boost::property_tree;

const std::map<std::string, std::set<std::string>>& schema() {
  static const std::map<std::string, std::set<std::string>> keys{
      {"problem", {"dimension", "p", "inner", "outer", "weight_exponent", "constant_weight"}},
      {"nonlinearity",
       {"family", "branch", "growth", "growth_factor", "k_max", "coefficient", "exponent", "table", "sequences", "a",
        "b"}},
      {"mesh", {"elements"}},
      {"solver",
       {"slope_lo", "slope_hi", "samples", "log_spacing", "refine", "refine_factor", "substeps", "terminal_tolerance",
        "residual_tolerance", "nonneg_tolerance", "divergence_bound", "max_bisections", "polish", "descent_tolerance",
        "descent_max_iterations", "dedupe_tolerance"}},
      {"certificate", {"count", "t0", "gamma", "h", "elements", "window_lo", "window_hi"}},
      {"output", {"directory", "map_points", "radial_points", "write_radial"}},
  };
  return keys;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const char* expected) {
  throw ConfigError("invalid value for '" + key + "': '" + value + "' (expected " + expected + ")");
}

double to_double(const std::string& key, const std::string& raw) {
  const std::string value = trim(raw);
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (value.empty() || ec != std::errc() || ptr != value.data() + value.size() || !std::isfinite(out)) {
    bad_value(key, raw, "a finite number");
  }
  return out;
}

long to_long(const std::string& key, const std::string& raw) {
  const std::string value = trim(raw);
  long out = 0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (value.empty() || ec != std::errc() || ptr != value.data() + value.size()) bad_value(key, raw, "an integer");
  return out;
}

bool to_bool(const std::string& key, const std::string& raw) {
  const std::string value = trim(raw);
  if (value == "true" || value == "yes" || value == "1") return true;
  if (value == "false" || value == "no" || value == "0") return false;
  bad_value(key, raw, "true or false");
}

std::vector<double> to_list(const std::string& key, const std::string& raw) {
  std::vector<double> out;
  std::stringstream ss(raw);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_double(key, item));
  if (out.empty()) bad_value(key, raw, "a comma-separated list of numbers");
  return out;
}

// Reads typed values out of one section, remembering which keys were used.
class Section {
 public:
  Section(const pt::ptree* tree, std::string name) : tree_(tree), name_(std::move(name)) {}

  std::optional<std::string> text(const std::string& key) const {
    if (tree_ == nullptr) return std::nullopt;
    auto child = tree_->get_child_optional(key);
    if (!child) return std::nullopt;
    return trim(child->data());
  }
  std::string full(const std::string& key) const { return name_ + "." + key; }

  void number(const std::string& key, double& out) const {
    if (auto v = text(key)) out = to_double(full(key), *v);
  }
  void number(const std::string& key, std::optional<double>& out) const {
    if (auto v = text(key)) out = to_double(full(key), *v);
  }
  void integer(const std::string& key, int& out, long lo, long hi) const {
    if (auto v = text(key)) {
      const long x = to_long(full(key), *v);
      if (x < lo || x > hi) range(key, *v, lo, hi);
      out = static_cast<int>(x);
    }
  }
  void size(const std::string& key, std::size_t& out, long lo, long hi) const {
    if (auto v = text(key)) {
      const long x = to_long(full(key), *v);
      if (x < lo || x > hi) range(key, *v, lo, hi);
      out = static_cast<std::size_t>(x);
    }
  }
  void flag(const std::string& key, bool& out) const {
    if (auto v = text(key)) out = to_bool(full(key), *v);
  }
  void flag(const std::string& key, std::optional<bool>& out) const {
    if (auto v = text(key)) out = to_bool(full(key), *v);
  }

  [[noreturn]] void range(const std::string& key, const std::string& value, long lo, long hi) const {
    throw ConfigError("value for '" + full(key) + "' out of range: " + value + " (allowed " + std::to_string(lo) +
                      ".." + std::to_string(hi) + ")");
  }

 private:
  const pt::ptree* tree_;
  std::string name_;
};

void positive(const std::string& key, double value) {
  if (!(value > 0.0)) throw ConfigError("'" + key + "' must be positive");
}

std::vector<Piece> read_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open nonlinearity table '" + path + "'");
  std::vector<Piece> pieces;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#' || line.rfind("lo,", 0) == 0) continue;
    const std::string where = path + ":" + std::to_string(lineno);
    const std::vector<double> values = to_list(where, line);
    if (values.size() < 3) throw ConfigError(where + ": need lo,hi and at least one coefficient");
    pieces.push_back(Piece{values[0], values[1], {values.begin() + 2, values.end()}});
  }
  if (pieces.empty()) throw ConfigError("nonlinearity table '" + path + "' has no pieces");
  return pieces;
}

}  // namespace

RunConfig parse_config(const std::string& text, const std::string& base_dir) {
  pt::ptree tree;
  try {
    std::istringstream in(text);
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config syntax error: ") + e.message() + " (line " + std::to_string(e.line()) +
                      ")");
  }

  for (const auto& [name, section] : tree) {
    if (!section.data().empty()) throw ConfigError("key '" + name + "' outside any section");
    auto known = schema().find(name);
    if (known == schema().end()) throw ConfigError("unknown section [" + name + "]");
    for (const auto& [key, value] : section) {
      if (!known->second.count(key)) throw ConfigError("unknown key '" + name + "." + key + "'");
    }
  }
  auto section = [&](const char* name) {
    auto child = tree.get_child_optional(name);
    return Section(child ? &*child : nullptr, name);
  };

  RunConfig cfg;

  const Section problem = section("problem");
  problem.integer("dimension", cfg.problem.dimension, 2, 1000);
  problem.number("p", cfg.problem.p);
  problem.number("inner", cfg.problem.inner);
  problem.number("outer", cfg.problem.outer);
  problem.number("weight_exponent", cfg.problem.weight_exponent);
  problem.number("constant_weight", cfg.problem.constant_weight);
  if (cfg.problem.weight_exponent && cfg.problem.constant_weight) {
    throw ConfigError("'problem.weight_exponent' and 'problem.constant_weight' are exclusive");
  }
  if (cfg.problem.constant_weight) positive("problem.constant_weight", *cfg.problem.constant_weight);

  const Section nl = section("nonlinearity");
  auto& n = cfg.nonlinearity;
  if (auto family = nl.text("family")) {
    if (*family == "oscillating") n.family = Family::Oscillating;
    else if (*family == "zero") n.family = Family::Zero;
    else if (*family == "power") n.family = Family::Power;
    else if (*family == "table") n.family = Family::Table;
    else bad_value("nonlinearity.family", *family, "oscillating, zero, power or table");
  }
  if (auto branch = nl.text("branch")) {
    if (*branch == "infinity") n.zero_branch = false;
    else if (*branch == "zero") n.zero_branch = true;
    else bad_value("nonlinearity.branch", *branch, "infinity or zero");
  }
  nl.number("growth", n.growth);
  nl.number("growth_factor", n.growth_factor);
  nl.integer("k_max", n.k_max, 1, 64);
  nl.number("coefficient", n.coefficient);
  nl.number("exponent", n.exponent);
  if (n.growth) positive("nonlinearity.growth", *n.growth);
  positive("nonlinearity.growth_factor", n.growth_factor);
  if (auto table = nl.text("table")) {
    if (n.family != Family::Table) throw ConfigError("'nonlinearity.table' requires family = table");
    std::filesystem::path path(*table);
    if (path.is_relative()) path = std::filesystem::path(base_dir) / path;
    n.table = read_table(path.string());
  } else if (n.family == Family::Table) {
    throw ConfigError("family = table requires 'nonlinearity.table'");
  }
  auto a = nl.text("a");
  auto b = nl.text("b");
  if (auto seq = nl.text("sequences")) {
    if (*seq == "none") n.sequences = SequenceSource::None;
    else if (*seq == "builtin") n.sequences = SequenceSource::Builtin;
    else if (*seq == "explicit") n.sequences = SequenceSource::Explicit;
    else bad_value("nonlinearity.sequences", *seq, "none, builtin or explicit");
  } else if (a || b) {
    n.sequences = SequenceSource::Explicit;
  }
  if (n.sequences == SequenceSource::Explicit) {
    if (!a || !b) throw ConfigError("explicit sequences need both 'nonlinearity.a' and 'nonlinearity.b'");
    n.seq_a = to_list("nonlinearity.a", *a);
    n.seq_b = to_list("nonlinearity.b", *b);
    if (n.seq_a.size() != n.seq_b.size()) throw ConfigError("'nonlinearity.a' and 'nonlinearity.b' differ in length");
  } else if (a || b) {
    throw ConfigError("'nonlinearity.a'/'nonlinearity.b' require sequences = explicit");
  }
  if (n.family == Family::Oscillating && n.sequences == SequenceSource::Explicit) {
    throw ConfigError("the oscillating family carries its own sequences");
  }

  section("mesh").size("elements", cfg.solver.elements, 16, 1 << 22);

  const Section solver = section("solver");
  auto& s = cfg.solver;
  solver.number("slope_lo", s.slope_lo);
  solver.number("slope_hi", s.slope_hi);
  solver.integer("samples", s.samples, 2, 1000000);
  solver.flag("log_spacing", s.log_spacing);
  solver.flag("refine", s.refine);
  solver.integer("refine_factor", s.refine_factor, 2, 1024);
  solver.integer("substeps", s.substeps, 1, 1024);
  solver.number("terminal_tolerance", s.terminal_tolerance);
  solver.number("residual_tolerance", s.residual_tolerance);
  solver.number("nonneg_tolerance", s.nonneg_tolerance);
  solver.number("divergence_bound", s.divergence_bound);
  solver.integer("max_bisections", s.max_bisections, 1, 10000);
  solver.flag("polish", s.polish);
  solver.number("descent_tolerance", s.descent_tolerance);
  solver.integer("descent_max_iterations", s.descent_max_iterations, 1, 10000000);
  solver.number("dedupe_tolerance", s.dedupe_tolerance);
  positive("solver.terminal_tolerance", s.terminal_tolerance);
  positive("solver.residual_tolerance", s.residual_tolerance);
  positive("solver.descent_tolerance", s.descent_tolerance);
  if (s.nonneg_tolerance < 0.0) throw ConfigError("'solver.nonneg_tolerance' must be non-negative");
  if (s.dedupe_tolerance && *s.dedupe_tolerance <= 0.0) {
    throw ConfigError("'solver.dedupe_tolerance' must be positive");
  }
  if (s.slope_lo && s.slope_hi && !(*s.slope_hi > *s.slope_lo)) {
    throw ConfigError("'solver.slope_hi' must exceed 'solver.slope_lo'");
  }

  const Section cert = section("certificate");
  auto& c = cfg.certificate;
  cert.integer("count", c.count, 3, 64);
  cert.number("t0", c.t0);
  cert.number("gamma", c.gamma);
  cert.number("h", c.h);
  cert.size("elements", c.elements, 16, 1 << 22);
  cert.number("window_lo", c.window_lo);
  cert.number("window_hi", c.window_hi);
  if (!(c.t0 > 0.0 && c.t0 < 1.0)) throw ConfigError("'certificate.t0' must lie in (0, 1)");
  if (c.window_lo.has_value() != c.window_hi.has_value()) {
    throw ConfigError("'certificate.window_lo' and 'certificate.window_hi' go together");
  }

  const Section out = section("output");
  if (auto dir = out.text("directory")) cfg.output.directory = *dir;
  out.size("map_points", cfg.output.map_points, 2, 10000000);
  out.size("radial_points", cfg.output.radial_points, 8, 10000000);
  out.flag("write_radial", cfg.output.write_radial);
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  const auto parent = std::filesystem::path(path).parent_path();
  return parse_config(buffer.str(), parent.empty() ? "." : parent.string());
}

}  // namespace plapcli
