#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "orbitnet/constellation.hpp"
#include "orbitnet/simcore.hpp"

namespace orbitnet::config {

// Short option names used by the CLI and the config file.
routing::ForwardingStrategy parse_forwarding(std::string_view s);
routing::RoutingStrategy parse_routing(std::string_view s);
traffic::GravityStrategy parse_traffic(std::string_view s);
topology::BuilderKind parse_builder(std::string_view s);
std::string_view short_name(routing::ForwardingStrategy s);
std::string_view short_name(routing::RoutingStrategy s);
std::string_view short_name(traffic::GravityStrategy s);
std::string_view short_name(topology::BuilderKind s);

inline const std::vector<std::string> kForwardingNames = {"port", "early"};
inline const std::vector<std::string> kRoutingNames = {"baseline", "lsnd", "ksnd"};
inline const std::vector<std::string> kTrafficNames = {"linear", "exponential"};
inline const std::vector<std::string> kBuilderNames = {"mindist", "los"};

/// Reads the "simulation" section over `base`. Unknown keys throw.
sim::SimConfig sim_config_from_json(const nlohmann::json& section, sim::SimConfig base = {});
nlohmann::json sim_config_to_json(const sim::SimConfig& c);

/// Iridium over the ten default cities, in config-file form.
nlohmann::json default_scenario_document();

/// A scenario document plus its simulation section.
struct RunConfig {
  nlohmann::json scenario_doc;  // without "simulation"
  std::string base_dir = ".";
  sim::SimConfig sim;
  bool seed_from_file = false;

  Scenario scenario() const;
  /// Self-contained document: scenario keys (file paths made absolute) and
  /// the fully resolved simulation section.
  nlohmann::json resolved() const;
};

/// Loads `path`, or the built-in default when empty. The file's simulation
/// section is applied over `base`.
RunConfig load_run_config(const std::string& path, const sim::SimConfig& base = {});
RunConfig run_config_from_json(const nlohmann::json& doc, const std::string& base_dir,
                               const sim::SimConfig& base = {});

/// Named starting points: "table1" (the defaults) and "stress".
sim::SimConfig preset(std::string_view name);
inline const std::vector<std::string> kPresetNames = {"table1", "stress"};

}  // namespace orbitnet::config
