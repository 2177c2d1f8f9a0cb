#include "orbitnet/config.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "orbitnet/errors.hpp"
#include "orbitnet/scenario_json.hpp"

namespace orbitnet::config {

using nlohmann::json;

namespace {

template <typename E>
E parse_enum(std::string_view s, const std::vector<std::string>& names, const char* what) {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == s) return static_cast<E>(i);
  }
  std::string msg = "unknown " + std::string(what) + " '" + std::string(s) + "' (valid:";
  for (const auto& n : names) msg += " " + n;
  throw ValidationError(msg + ")");
}

template <typename T>
T field(const json& obj, const char* key, T fallback) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ValidationError(std::string("simulation: field '") + key + "' has the wrong type");
  }
}

}  // namespace

routing::ForwardingStrategy parse_forwarding(std::string_view s) {
  return parse_enum<routing::ForwardingStrategy>(s, kForwardingNames, "forwarding strategy");
}
routing::RoutingStrategy parse_routing(std::string_view s) {
  return parse_enum<routing::RoutingStrategy>(s, kRoutingNames, "routing strategy");
}
traffic::GravityStrategy parse_traffic(std::string_view s) {
  return parse_enum<traffic::GravityStrategy>(s, kTrafficNames, "traffic strategy");
}
topology::BuilderKind parse_builder(std::string_view s) {
  return parse_enum<topology::BuilderKind>(s, kBuilderNames, "topology builder");
}

std::string_view short_name(routing::ForwardingStrategy s) { return kForwardingNames[static_cast<int>(s)]; }
std::string_view short_name(routing::RoutingStrategy s) { return kRoutingNames[static_cast<int>(s)]; }
std::string_view short_name(traffic::GravityStrategy s) { return kTrafficNames[static_cast<int>(s)]; }
std::string_view short_name(topology::BuilderKind s) { return kBuilderNames[static_cast<int>(s)]; }

sim::SimConfig sim_config_from_json(const json& s, sim::SimConfig c) {
  static const std::vector<std::string> kKeys = {
      "duration_s",          "snapshot_interval_s", "weight_refresh_s",  "total_volume_bps",
      "provisioning_volume_bps", "link_rate_fraction", "trip_delay_s",  "link_switch_delay_s",
      "max_queuing_delay_s", "packet_size_bits",    "k_paths",           "ema_periods",
      "forwarding",          "routing",             "traffic",           "builder",
      "seed"};
  if (!s.is_object()) throw ValidationError("simulation: expected an object");
  for (const auto& [key, _] : s.items()) {
    if (std::find(kKeys.begin(), kKeys.end(), key) == kKeys.end()) {
      throw ValidationError("simulation: unknown key '" + key + "'");
    }
  }
  c.duration = field(s, "duration_s", c.duration);
  c.snapshot_interval = field(s, "snapshot_interval_s", c.snapshot_interval);
  c.weight_refresh_interval = field(s, "weight_refresh_s", c.weight_refresh_interval);
  c.total_volume = field(s, "total_volume_bps", c.total_volume);
  if (s.contains("provisioning_volume_bps") && !s.at("provisioning_volume_bps").is_null()) {
    c.provisioning_volume = field(s, "provisioning_volume_bps", 0.0);
  }
  c.link_rate_fraction = field(s, "link_rate_fraction", c.link_rate_fraction);
  c.trip_delay = field(s, "trip_delay_s", c.trip_delay);
  c.link_switch_delay = field(s, "link_switch_delay_s", c.link_switch_delay);
  c.max_queuing_delay = field(s, "max_queuing_delay_s", c.max_queuing_delay);
  c.packet_size_bits = field(s, "packet_size_bits", c.packet_size_bits);
  c.k_paths = field(s, "k_paths", c.k_paths);
  c.ema_periods = field(s, "ema_periods", c.ema_periods);
  if (s.contains("forwarding")) c.forwarding = parse_forwarding(field<std::string>(s, "forwarding", ""));
  if (s.contains("routing")) c.routing = parse_routing(field<std::string>(s, "routing", ""));
  if (s.contains("traffic")) c.traffic = parse_traffic(field<std::string>(s, "traffic", ""));
  if (s.contains("builder")) c.builder = parse_builder(field<std::string>(s, "builder", ""));
  c.seed = field(s, "seed", c.seed);
  return c;
}

json sim_config_to_json(const sim::SimConfig& c) {
  json j;
  j["duration_s"] = c.duration;
  j["snapshot_interval_s"] = c.snapshot_interval;
  j["weight_refresh_s"] = c.weight_refresh_interval;
  j["total_volume_bps"] = c.total_volume;
  j["provisioning_volume_bps"] = c.provisioning_volume ? json(*c.provisioning_volume) : json(nullptr);
  j["link_rate_fraction"] = c.link_rate_fraction;
  j["trip_delay_s"] = c.trip_delay;
  j["link_switch_delay_s"] = c.link_switch_delay;
  j["max_queuing_delay_s"] = c.max_queuing_delay;
  j["packet_size_bits"] = c.packet_size_bits;
  j["k_paths"] = c.k_paths;
  j["ema_periods"] = c.ema_periods;
  j["forwarding"] = std::string(short_name(c.forwarding));
  j["routing"] = std::string(short_name(c.routing));
  j["traffic"] = std::string(short_name(c.traffic));
  j["builder"] = std::string(short_name(c.builder));
  j["seed"] = c.seed;
  return j;
}

json default_scenario_document() {
  const auto p = ConstellationParams::iridium_next();
  json doc;
  doc["constellation"] = {
      {"num_planes", p.num_planes},
      {"sats_per_plane", p.sats_per_plane},
      {"inclination_deg", astro::rad_to_deg(p.inclination)},
      {"altitude_km", p.altitude},
      {"phase_factor", p.phase_factor},
      {"raan_spread_deg", astro::rad_to_deg(p.raan_spread)},
      {"seam_enabled", p.seam_enabled},
      {"epoch_s", 0.0},
  };
  json cities = json::array();
  for (const auto& c : default_cities()) {
    cities.push_back({{"id", c.id},
                      {"name", c.name},
                      {"latitude_deg", astro::rad_to_deg(c.location.latitude)},
                      {"longitude_deg", astro::rad_to_deg(c.location.longitude)},
                      {"population", c.population}});
  }
  doc["cities"] = cities;
  return doc;
}

Scenario RunConfig::scenario() const { return scenario_from_json(scenario_doc, base_dir); }

json RunConfig::resolved() const {
  json doc = scenario_doc;
  if (doc.contains("tle") && doc["tle"].contains("path")) {
    std::filesystem::path p = doc["tle"]["path"].get<std::string>();
    if (p.is_relative()) p = std::filesystem::absolute(std::filesystem::path(base_dir) / p);
    doc["tle"]["path"] = p.lexically_normal().string();
  }
  doc["simulation"] = sim_config_to_json(sim);
  return doc;
}

sim::SimConfig preset(std::string_view name) {
  if (name == "table1") return {};
  if (name == "stress") return sim::SimConfig::stress();
  throw ValidationError("unknown preset '" + std::string(name) + "' (valid: table1 stress)");
}

RunConfig run_config_from_json(const json& doc, const std::string& base_dir,
                               const sim::SimConfig& base) {
  if (!doc.is_object()) throw ValidationError("config: expected a JSON object");
  RunConfig rc;
  rc.base_dir = base_dir;
  rc.sim = base;
  rc.scenario_doc = doc;
  rc.scenario_doc.erase("simulation");
  if (doc.contains("simulation")) {
    rc.sim = sim_config_from_json(doc.at("simulation"), base);
    rc.seed_from_file = doc.at("simulation").contains("seed");
  }
  // Surface scenario problems now rather than mid-run.
  (void)scenario_from_json(rc.scenario_doc, base_dir);
  return rc;
}

RunConfig load_run_config(const std::string& path, const sim::SimConfig& base) {
  if (path.empty()) return run_config_from_json(default_scenario_document(), ".", base);
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config file '" + path + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError("config '" + path + "': " + e.what());
  }
  const auto dir = std::filesystem::path(path).parent_path();
  return run_config_from_json(doc, dir.empty() ? "." : dir.string(), base);
}

}  // namespace orbitnet::config
