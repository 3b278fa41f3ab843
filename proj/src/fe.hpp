#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace plap {

// Partition 0 = t_0 < t_1 < ... < t_n = 1.
class Mesh {
 public:
  static Mesh uniform(std::size_t elements);
  static Mesh from_nodes(std::vector<double> nodes);

  std::size_t elements() const { return nodes_.size() - 1; }
  std::size_t node_count() const { return nodes_.size(); }
  const std::vector<double>& nodes() const { return nodes_; }
  double node(std::size_t i) const { return nodes_[i]; }
  double width(std::size_t e) const { return nodes_[e + 1] - nodes_[e]; }

  // Index of the element containing t (the left one at interior nodes).
  std::size_t locate(double t) const;

  // Copy with extra breakpoints inserted (values outside (0,1) or already
  // present are ignored).
  Mesh with_breakpoints(std::span<const double> extra) const;

 private:
  Mesh() = default;
  std::vector<double> nodes_;
};

// Continuous piecewise-linear function with zero Dirichlet trace.
class FEFunction {
 public:
  explicit FEFunction(Mesh mesh);  // v == 0
  FEFunction(Mesh mesh, std::vector<double> values);

  const Mesh& mesh() const { return mesh_; }
  const std::vector<double>& values() const { return values_; }
  double value(std::size_t i) const { return values_[i]; }
  double slope(std::size_t e) const { return (values_[e + 1] - values_[e]) / mesh_.width(e); }

  double operator()(double t) const;

 private:
  Mesh mesh_;
  std::vector<double> values_;
};

// CSV with header `t,v`, nodes ascending, values printed with 17 significant
// digits so reading back is lossless.
void write_csv(const FEFunction& v, const std::string& path);
FEFunction read_csv(const std::string& path);

}  // namespace plap
