#include "fe.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "errors.hpp"

namespace plap {

Mesh Mesh::uniform(std::size_t elements) {
  require(elements >= 1, "mesh: need at least one element");
  std::vector<double> nodes(elements + 1);
  for (std::size_t i = 0; i <= elements; ++i) {
    nodes[i] = static_cast<double>(i) / static_cast<double>(elements);
  }
  return from_nodes(std::move(nodes));
}

Mesh Mesh::from_nodes(std::vector<double> nodes) {
  require(nodes.size() >= 2, "mesh: need at least two nodes");
  require(nodes.front() == 0.0 && nodes.back() == 1.0, "mesh: endpoints must be exactly 0 and 1");
  for (std::size_t i = 1; i < nodes.size(); ++i) {
    require(nodes[i] > nodes[i - 1], "mesh: nodes must be strictly increasing");
  }
  Mesh mesh;
  mesh.nodes_ = std::move(nodes);
  return mesh;
}

std::size_t Mesh::locate(double t) const {
  auto it = std::lower_bound(nodes_.begin() + 1, nodes_.end() - 1, t);
  return static_cast<std::size_t>(it - nodes_.begin()) - 1;
}

Mesh Mesh::with_breakpoints(std::span<const double> extra) const {
  std::vector<double> nodes = nodes_;
  for (double t : extra) {
    if (t > 0.0 && t < 1.0) nodes.push_back(t);
  }
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
  return from_nodes(std::move(nodes));
}

FEFunction::FEFunction(Mesh mesh) : mesh_(std::move(mesh)), values_(mesh_.node_count(), 0.0) {}

FEFunction::FEFunction(Mesh mesh, std::vector<double> values)
    : mesh_(std::move(mesh)), values_(std::move(values)) {
  require(values_.size() == mesh_.node_count(), "FE function: one value per node required");
  require(values_.front() == 0.0 && values_.back() == 0.0,
          "FE function: boundary values must be zero (W^{1,p}_0 trace)");
  for (double v : values_) require(std::isfinite(v), "FE function: values must be finite");
}

double FEFunction::operator()(double t) const {
  if (t <= 0.0 || t >= 1.0) return 0.0;
  const std::size_t e = mesh_.locate(t);
  const double w = (t - mesh_.node(e)) / mesh_.width(e);
  return (1.0 - w) * values_[e] + w * values_[e + 1];
}

void write_csv(const FEFunction& v, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::Io, "cannot open '" + path + "' for writing");
  out << "t,v\n";
  char line[96];
  for (std::size_t i = 0; i < v.values().size(); ++i) {
    std::snprintf(line, sizeof line, "%.17g,%.17g\n", v.mesh().node(i), v.value(i));
    out << line;
  }
  if (!out) fail(ErrorCode::Io, "write to '" + path + "' failed");
}

FEFunction read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line) || line != "t,v") {
    fail(ErrorCode::Io, "'" + path + "': expected header 't,v'");
  }
  std::vector<double> nodes;
  std::vector<double> values;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    const auto comma = line.find(',');
    char* end_t = nullptr;
    char* end_v = nullptr;
    const double t = std::strtod(line.c_str(), &end_t);
    const double v = comma == std::string::npos ? 0.0 : std::strtod(line.c_str() + comma + 1, &end_v);
    if (comma == std::string::npos || end_t != line.c_str() + comma || end_v == nullptr || *end_v != '\0') {
      std::ostringstream os;
      os << "'" << path << "': malformed row " << row;
      fail(ErrorCode::Io, os.str());
    }
    nodes.push_back(t);
    values.push_back(v);
  }
  return FEFunction(Mesh::from_nodes(std::move(nodes)), std::move(values));
}

}  // namespace plap
