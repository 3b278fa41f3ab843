#pragma once

#include <json.hpp>

#include "certificates.hpp"
#include "nonlinearity.hpp"
#include "solver.hpp"

namespace plap {

// Keys keep insertion order so reports diff cleanly between runs.
using Json = nlohmann::ordered_json;

Json to_json(const GrowthProxy& proxy);
Json to_json(const HypothesisReport& report);
Json to_json(const Certificate& certificate);
// Scalar summary of one solution (no nodal values).
Json to_json(const Solution& solution);

}  // namespace plap
