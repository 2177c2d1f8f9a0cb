#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "orbitnet/errors.hpp"
#include "orbitnet/scenario_json.hpp"

namespace orbitnet {

namespace {

using nlohmann::json;

void reject_unknown(const json& obj, const std::vector<std::string>& allowed,
                    const std::string& where) {
  if (!obj.is_object()) throw ValidationError(where + ": expected an object");
  for (const auto& [key, _] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw ValidationError(where + ": unknown key '" + key + "'");
    }
  }
}

double number(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) throw ValidationError(where + ": missing required field '" + key + "'");
  const auto& v = obj.at(key);
  if (!v.is_number()) throw ValidationError(where + ": field '" + key + "' must be a number");
  return v.get<double>();
}

std::string text(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) throw ValidationError(where + ": missing required field '" + key + "'");
  const auto& v = obj.at(key);
  if (!v.is_string()) throw ValidationError(where + ": field '" + key + "' must be a string");
  return v.get<std::string>();
}

template <typename T>
T optional_value(const json& obj, const char* key, T fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ValidationError(where + ": field '" + key + "' has the wrong type");
  }
}

ConstellationParams params_from_json(const json& c) {
  const std::string where = "constellation";
  reject_unknown(c,
                 {"num_planes", "sats_per_plane", "inclination_deg", "altitude_km",
                  "phase_factor", "raan_spread_deg", "seam_enabled", "epoch_s"},
                 where);
  ConstellationParams p;
  p.num_planes = optional_value(c, "num_planes", p.num_planes, where);
  p.sats_per_plane = optional_value(c, "sats_per_plane", p.sats_per_plane, where);
  p.inclination = astro::deg_to_rad(
      optional_value(c, "inclination_deg", astro::rad_to_deg(p.inclination), where));
  p.altitude = optional_value(c, "altitude_km", p.altitude, where);
  p.phase_factor = optional_value(c, "phase_factor", p.phase_factor, where);
  p.raan_spread = astro::deg_to_rad(
      optional_value(c, "raan_spread_deg", astro::rad_to_deg(p.raan_spread), where));
  p.seam_enabled = optional_value(c, "seam_enabled", p.seam_enabled, where);
  p.validate();
  return p;
}

}  // namespace

Scenario scenario_from_json(const json& doc, const std::string& base_dir,
                            const std::vector<std::string>& extra_keys) {
  std::vector<std::string> allowed = {"description", "constellation", "tle",
                                      "ground_stations", "cities", "atmosphere_margin_km"};
  allowed.insert(allowed.end(), extra_keys.begin(), extra_keys.end());
  reject_unknown(doc, allowed, "scenario");

  Scenario s;
  if (doc.contains("constellation") && doc.contains("tle")) {
    throw ValidationError("scenario: give either 'constellation' or 'tle', not both");
  }
  if (doc.contains("tle")) {
    const json& t = doc.at("tle");
    reject_unknown(t, {"path", "seam_enabled"}, "tle");
    std::filesystem::path path = text(t, "path", "tle");
    if (path.is_relative()) path = std::filesystem::path(base_dir) / path;
    auto elements = astro::load_tle_file(path.string());
    if (elements.empty()) throw ValidationError("tle: file '" + path.string() + "' has no records");
    // Simulation time zero is the earliest epoch in the file.
    double origin = elements.front().epoch;
    for (const auto& e : elements) origin = std::min(origin, e.epoch);
    for (auto& e : elements) e.epoch -= origin;
    s.satellites = label_planes(std::move(elements), &s.num_planes);
    s.seam_enabled = optional_value(t, "seam_enabled", true, "tle");
    s.uniform_planes = false;
  } else {
    const ConstellationParams p =
        doc.contains("constellation") ? params_from_json(doc.at("constellation"))
                                      : ConstellationParams::iridium_next();
    const double epoch = doc.contains("constellation")
                             ? optional_value(doc.at("constellation"), "epoch_s", 0.0, "constellation")
                             : 0.0;
    s.satellites = walker_satellites(p, epoch);
    s.num_planes = p.num_planes;
    s.seam_enabled = p.seam_enabled;
    s.uniform_planes = true;
  }

  s.atmosphere_margin_km = optional_value(doc, "atmosphere_margin_km", 0.0, "scenario");

  if (!doc.contains("cities") || !doc.at("cities").is_array()) {
    throw ValidationError("scenario: missing required 'cities' list");
  }
  const bool explicit_stations = doc.contains("ground_stations");
  std::set<std::string> gs_ids;
  if (explicit_stations) {
    const json& list = doc.at("ground_stations");
    if (!list.is_array()) throw ValidationError("ground_stations: expected a list");
    for (std::size_t i = 0; i < list.size(); ++i) {
      const std::string where = "ground_stations[" + std::to_string(i) + "]";
      const json& row = list[i];
      reject_unknown(row, {"id", "latitude_deg", "longitude_deg", "altitude_km"}, where);
      GroundStation gs;
      gs.id = text(row, "id", where);
      if (!gs_ids.insert(gs.id).second) {
        throw ValidationError(where + ": duplicate id '" + gs.id + "'");
      }
      gs.location = astro::GeodeticPoint::from_degrees(number(row, "latitude_deg", where),
                                                       number(row, "longitude_deg", where),
                                                       optional_value(row, "altitude_km", 0.0, where));
      s.ground_stations.push_back(std::move(gs));
    }
  }

  std::set<std::string> city_ids;
  const json& cities = doc.at("cities");
  for (std::size_t i = 0; i < cities.size(); ++i) {
    const json& row = cities[i];
    std::string where = "cities[" + std::to_string(i) + "]";
    reject_unknown(row,
                   {"id", "name", "latitude_deg", "longitude_deg", "population", "ground_station"},
                   where);
    City c;
    c.id = text(row, "id", where);
    where += " (id '" + c.id + "')";
    if (!city_ids.insert(c.id).second) throw ValidationError(where + ": duplicate id");
    c.name = text(row, "name", where);
    const double lat = number(row, "latitude_deg", where);
    const double lon = number(row, "longitude_deg", where);
    if (std::abs(lat) > 90.0) throw ValidationError(where + ": latitude out of range");
    c.location = astro::GeodeticPoint::from_degrees(lat, lon);
    c.population = number(row, "population", where);
    if (!(c.population > 0.0)) throw ValidationError(where + ": population must be positive");

    if (explicit_stations) {
      const std::string gs = text(row, "ground_station", where);
      auto it = std::find_if(s.ground_stations.begin(), s.ground_stations.end(),
                             [&](const GroundStation& g) { return g.id == gs; });
      if (it == s.ground_stations.end()) {
        throw ValidationError(where + ": unknown ground_station '" + gs + "'");
      }
      s.city_to_gs.push_back(static_cast<int>(it - s.ground_stations.begin()));
    } else {
      if (row.contains("ground_station")) {
        throw ValidationError(where + ": 'ground_station' requires a ground_stations section");
      }
      s.ground_stations.push_back({c.id, c.location});
      s.city_to_gs.push_back(static_cast<int>(s.ground_stations.size()) - 1);
    }
    s.cities.push_back(std::move(c));
  }
  s.validate();
  return s;
}

Scenario parse_scenario(const std::string& json_text, const std::string& base_dir) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("scenario: invalid JSON: ") + e.what());
  }
  return scenario_from_json(doc, base_dir);
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open scenario file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  const auto dir = std::filesystem::path(path).parent_path();
  return parse_scenario(buf.str(), dir.empty() ? "." : dir.string());
}

}  // namespace orbitnet
