#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "orbitnet/constellation.hpp"

namespace orbitnet {

/// Builds a Scenario from an already-parsed document. Keys listed in
/// `extra_keys` are ignored at the top level (the run config embeds the
/// scenario next to its "simulation" section); any other unknown key throws.
Scenario scenario_from_json(const nlohmann::json& doc, const std::string& base_dir,
                            const std::vector<std::string>& extra_keys = {});

}  // namespace orbitnet
