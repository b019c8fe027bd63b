#pragma once

#include <functional>
#include <string>
#include <vector>

#include "config.hpp"
#include "output.hpp"

namespace ceqcli {

/// A validated command: the resolved parameters (defaults filled in) and
/// the work itself. Building a plan does no physics beyond cheap checks.
struct Plan {
  json parameters;
  std::function<RunOutput(const RunSettings&)> run;
};

const std::vector<std::string>& command_names();

/// Throws ValidationError for unknown commands, unknown fields, bad units,
/// empty grids and parameter values the physics modules reject.
Plan make_plan(const std::string& command, const json& parameters);

}  // namespace ceqcli
