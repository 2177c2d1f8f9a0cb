#include "orbitnet/constellation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "orbitnet/errors.hpp"

namespace orbitnet {

using astro::kPi;
using astro::kTwoPi;

void ConstellationParams::validate() const {
  std::vector<std::string> bad;
  if (num_planes < 1) bad.push_back("num_planes must be >= 1");
  if (sats_per_plane < 1) bad.push_back("sats_per_plane must be >= 1");
  if (!(inclination > 0.0 && inclination <= kPi / 2 + 1e-9)) {
    bad.push_back("inclination must be in (0, 90] degrees");
  }
  if (!(altitude > 0.0)) bad.push_back("altitude must be positive");
  if (phase_factor < 0 || (num_planes >= 1 && phase_factor >= num_planes)) {
    bad.push_back("phase_factor must be in [0, num_planes)");
  }
  if (!(raan_spread > 0.0 && raan_spread <= kTwoPi + 1e-9)) {
    bad.push_back("raan_spread must be in (0, 360] degrees");
  }
  if (!bad.empty()) {
    std::string msg = "invalid constellation parameters:";
    for (const auto& b : bad) msg += " " + b + ";";
    throw ValidationError(msg);
  }
}

int Scenario::adjacent_plane(int plane, int direction) const {
  if (num_planes <= 1) return -1;
  const int target = plane + direction;
  if (target >= 0 && target < num_planes) return target;
  // Wrapping closes the ring between planes N-1 and 0; that pair is the seam.
  if (seam_enabled || num_planes == 2) return -1;
  return (target + num_planes) % num_planes;
}

void Scenario::validate() const {
  if (satellites.empty()) throw ValidationError("scenario has no satellites");
  std::vector<std::vector<bool>> seen;
  for (std::size_t i = 0; i < satellites.size(); ++i) {
    const auto& s = satellites[i];
    astro::validate(s.elements);
    if (s.plane < 0 || s.plane >= num_planes) {
      throw ValidationError("satellite " + std::to_string(i) + ": plane index out of range");
    }
    if (s.slot < 0) throw ValidationError("satellite " + std::to_string(i) + ": negative slot");
    if (seen.size() < static_cast<std::size_t>(num_planes)) seen.resize(num_planes);
    auto& row = seen[s.plane];
    if (row.size() <= static_cast<std::size_t>(s.slot)) row.resize(s.slot + 1, false);
    if (row[s.slot]) {
      throw ValidationError("satellite " + std::to_string(i) + ": duplicate (plane, slot) label");
    }
    row[s.slot] = true;
  }
  if (cities.size() < 2) throw ValidationError("scenario needs at least 2 cities");
  if (ground_stations.empty()) throw ValidationError("scenario has no ground stations");
  if (city_to_gs.size() != cities.size()) {
    throw ValidationError("city_to_gs must map every city");
  }
  for (std::size_t i = 0; i < cities.size(); ++i) {
    if (!(cities[i].population > 0.0)) {
      throw ValidationError("cities[" + std::to_string(i) + "] (id '" + cities[i].id +
                            "'): population must be positive");
    }
    if (city_to_gs[i] < 0 || city_to_gs[i] >= ground_station_count()) {
      throw ValidationError("cities[" + std::to_string(i) + "]: ground station out of range");
    }
  }
  if (atmosphere_margin_km < 0.0) throw ValidationError("atmosphere_margin_km must be >= 0");
}

std::vector<astro::OrbitalElements> generate_walker_star(const ConstellationParams& p,
                                                         double epoch) {
  p.validate();
  const double a = astro::kEarthRadiusKm + p.altitude;
  const double n = astro::mean_motion_for(a);
  const double total = static_cast<double>(p.num_planes) * p.sats_per_plane;
  std::vector<astro::OrbitalElements> out;
  out.reserve(static_cast<std::size_t>(total));
  for (int plane = 0; plane < p.num_planes; ++plane) {
    for (int slot = 0; slot < p.sats_per_plane; ++slot) {
      astro::OrbitalElements el;
      el.satellite_id = static_cast<int>(out.size()) + 1;
      el.name = "P" + std::to_string(plane) + "S" + std::to_string(slot);
      el.epoch = epoch;
      el.semi_major_axis = a;
      el.eccentricity = 0.0;
      el.inclination = p.inclination;
      el.raan = plane * (p.raan_spread / p.num_planes);
      el.arg_perigee = 0.0;
      el.mean_anomaly_at_epoch =
          std::fmod(slot * (kTwoPi / p.sats_per_plane) + plane * p.phase_factor * (kTwoPi / total),
                    kTwoPi);
      el.mean_motion = n;
      out.push_back(std::move(el));
    }
  }
  return out;
}

std::vector<Satellite> walker_satellites(const ConstellationParams& p, double epoch) {
  auto elements = generate_walker_star(p, epoch);
  std::vector<Satellite> sats;
  sats.reserve(elements.size());
  for (std::size_t i = 0; i < elements.size(); ++i) {
    sats.push_back({std::move(elements[i]), static_cast<int>(i) / p.sats_per_plane,
                    static_cast<int>(i) % p.sats_per_plane});
  }
  return sats;
}

std::vector<Satellite> label_planes(std::vector<astro::OrbitalElements> elements,
                                    int* num_planes_out) {
  constexpr double kRaanTolerance = astro::deg_to_rad(1.0);
  if (elements.empty()) throw ValidationError("no element sets to label");
  auto wrap = [](double x) {
    double r = std::fmod(x, kTwoPi);
    return r < 0 ? r + kTwoPi : r;
  };
  std::vector<std::size_t> order(elements.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return wrap(elements[a].raan) < wrap(elements[b].raan);
  });

  std::vector<std::vector<std::size_t>> planes;
  double last = -1.0;
  for (std::size_t idx : order) {
    const double r = wrap(elements[idx].raan);
    if (planes.empty() || r - last > kRaanTolerance) planes.emplace_back();
    planes.back().push_back(idx);
    last = r;
  }
  if (planes.size() > 1) {
    const double first = wrap(elements[planes.front().front()].raan);
    const double final_raan = wrap(elements[planes.back().back()].raan);
    if (first + kTwoPi - final_raan <= kRaanTolerance) {
      planes.front().insert(planes.front().end(), planes.back().begin(), planes.back().end());
      planes.pop_back();
    }
  }

  std::vector<Satellite> out;
  out.reserve(elements.size());
  for (std::size_t p = 0; p < planes.size(); ++p) {
    auto& members = planes[p];
    std::stable_sort(members.begin(), members.end(), [&](std::size_t a, std::size_t b) {
      return wrap(elements[a].arg_perigee + elements[a].mean_anomaly_at_epoch) <
             wrap(elements[b].arg_perigee + elements[b].mean_anomaly_at_epoch);
    });
    for (std::size_t s = 0; s < members.size(); ++s) {
      out.push_back({elements[members[s]], static_cast<int>(p), static_cast<int>(s)});
    }
  }
  if (num_planes_out) *num_planes_out = static_cast<int>(planes.size());
  return out;
}

std::vector<City> default_cities() {
  // Approximate city-proper populations from the most recent national census
  // or official estimate (2011-2023); see data/default_scenario.json.
  auto city = [](const char* id, const char* name, double lat, double lon, double pop) {
    return City{id, name, astro::GeodeticPoint::from_degrees(lat, lon), pop};
  };
  return {
      city("NYC", "New York", 40.7128, -74.0060, 8335897),
      city("LON", "London", 51.5072, -0.1276, 8866180),
      city("TYO", "Tokyo", 35.6764, 139.6500, 14094034),
      city("SAO", "Sao Paulo", -23.5505, -46.6333, 11451245),
      city("SYD", "Sydney", -33.8688, 151.2093, 5450496),
      city("BOM", "Mumbai", 19.0760, 72.8777, 12442373),
      city("CAI", "Cairo", 30.0444, 31.2357, 10100166),
      city("MOW", "Moscow", 55.7558, 37.6173, 13010112),
      city("LAX", "Los Angeles", 34.0522, -118.2437, 3898747),
      city("JNB", "Johannesburg", -26.2041, 28.0473, 4803262),
  };
}

Scenario make_scenario(const ConstellationParams& p, std::vector<City> cities, double epoch) {
  Scenario s;
  s.satellites = walker_satellites(p, epoch);
  s.num_planes = p.num_planes;
  s.seam_enabled = p.seam_enabled;
  s.uniform_planes = true;
  for (std::size_t i = 0; i < cities.size(); ++i) {
    s.ground_stations.push_back({cities[i].id, cities[i].location});
    s.city_to_gs.push_back(static_cast<int>(i));
  }
  s.cities = std::move(cities);
  s.validate();
  return s;
}

Scenario default_scenario() {
  return make_scenario(ConstellationParams::iridium_next(), default_cities());
}

int nearest_satellite(const astro::GeodeticPoint& gs,
                      std::span<const std::pair<int, astro::EciPosition>> positions, double t) {
  if (positions.empty()) throw ContractError("nearest_satellite: no satellite positions");
  const astro::EciPosition ground = astro::ground_position(gs, t);
  int best = -1;
  double best_d = std::numeric_limits<double>::infinity();
  for (const auto& [id, pos] : positions) {
    if (pos.t != t) throw ContractError("nearest_satellite: position not at requested time");
    if (!astro::above_horizon(ground, pos)) continue;
    const double d = astro::separation(ground, pos);
    if (d < best_d || (d == best_d && id < best)) {
      best = id;
      best_d = d;
    }
  }
  if (best < 0) {
    throw NoVisibleSatelliteError("no visible satellite from (" +
                                  std::to_string(astro::rad_to_deg(gs.latitude)) + ", " +
                                  std::to_string(astro::rad_to_deg(gs.longitude)) + ")");
  }
  return best;
}

}  // namespace orbitnet
