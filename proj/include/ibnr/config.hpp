#pragma once

#include <json.hpp>

#include "ibnr/hazard.hpp"
#include "ibnr/severity.hpp"
#include "ibnr/simulator.hpp"
#include "ibnr/zinb.hpp"

namespace ibnr {

using Json = nlohmann::ordered_json;

/// Missing keys keep their defaults; unknown keys are rejected.
SimConfig sim_config_from_json(const Json& j, SimConfig base = {});
Json sim_config_to_json(const SimConfig& config);

Json to_json(const FitDiagnostics& diagnostics);
Json to_json(const HazardModel& model);
Json to_json(const ZinbModel& model);
Json to_json(const SeverityModel& model);

HazardModel hazard_model_from_json(const Json& j);

}  // namespace ibnr
