#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "orbitnet/astro.hpp"

namespace orbitnet {

/// Graph node index. Satellites occupy [0, S); ground stations [S, S + G).
using NodeId = int;
inline constexpr NodeId kNoNode = -1;

/// Walker constellation parameters, written α : h : N_L × M_L / M_L / F in
/// the usual notation.
struct ConstellationParams {
  int num_planes = 6;
  int sats_per_plane = 11;
  double inclination = astro::deg_to_rad(86.4);
  double altitude = 781.0;  // km
  int phase_factor = 0;
  double raan_spread = astro::kPi;  // pi: polar star, 2*pi: delta
  bool seam_enabled = true;

  static ConstellationParams iridium_next() { return {}; }

  /// Throws ValidationError naming the offending field.
  void validate() const;
};

struct Satellite {
  astro::OrbitalElements elements;
  int plane = 0;
  int slot = 0;
};

struct GroundStation {
  std::string id;
  astro::GeodeticPoint location;
};

struct City {
  std::string id;
  std::string name;
  astro::GeodeticPoint location;
  double population = 0.0;
};

/// Everything a run needs to know about the physical system. Immutable once
/// validated.
struct Scenario {
  std::vector<Satellite> satellites;
  int num_planes = 0;
  bool seam_enabled = false;
  /// Circular orbits with evenly spaced slots (true for generated Walker sets).
  bool uniform_planes = false;
  std::vector<GroundStation> ground_stations;
  std::vector<City> cities;
  /// city index -> ground-station index
  std::vector<int> city_to_gs;
  double atmosphere_margin_km = 0.0;

  int satellite_count() const { return static_cast<int>(satellites.size()); }
  int ground_station_count() const { return static_cast<int>(ground_stations.size()); }
  NodeId gs_node(int gs_index) const { return satellite_count() + gs_index; }

  /// Index of the plane reached by going right (+1) or left (-1) from `plane`,
  /// or -1 when that side has no inter-plane neighbour (seam or single plane).
  int adjacent_plane(int plane, int direction) const;

  void validate() const;
};

std::vector<astro::OrbitalElements> generate_walker_star(const ConstellationParams& p,
                                                         double epoch);

/// Generated constellation with plane/slot labels.
std::vector<Satellite> walker_satellites(const ConstellationParams& p, double epoch);

/// Groups element sets into planes by RAAN and orders slots by argument of
/// latitude at epoch. Used for TLE-loaded constellations.
std::vector<Satellite> label_planes(std::vector<astro::OrbitalElements> elements,
                                    int* num_planes_out);

/// Ten-city fixture shipped with the library (see data/default_scenario.json).
std::vector<City> default_cities();

/// Iridium NEXT over the ten default cities, one co-located station per city.
Scenario default_scenario();

Scenario make_scenario(const ConstellationParams& p, std::vector<City> cities, double epoch = 0.0);

/// Reads a scenario JSON file. Unknown keys are rejected; errors name the
/// offending record.
Scenario load_scenario(const std::string& path);
Scenario parse_scenario(const std::string& json_text, const std::string& base_dir = ".");

/// Satellite (index into `positions`' ids) closest to `gs` among those above
/// its horizon. Ties go to the lowest id. Throws NoVisibleSatelliteError.
int nearest_satellite(const astro::GeodeticPoint& gs,
                      std::span<const std::pair<int, astro::EciPosition>> positions, double t);

}  // namespace orbitnet
