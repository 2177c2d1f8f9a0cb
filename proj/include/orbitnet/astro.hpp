#pragma once

#include <iosfwd>
#include <numbers>
#include <string>
#include <string_view>
#include <vector>

namespace orbitnet::astro {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr double kEarthRadiusKm = 6378.137;
inline constexpr double kEarthMu = 398600.4418;              // km^3/s^2
inline constexpr double kEarthRotationRate = 7.2921159e-5;   // rad/s
inline constexpr double kSpeedOfLightKmS = 299792.458;
inline constexpr double kSecondsPerDay = 86400.0;

constexpr double deg_to_rad(double deg) { return deg * kPi / 180.0; }
constexpr double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

/// Keplerian state of one satellite, anchored at `epoch`.
///
/// Angles are radians, distances km, `mean_motion` rad/s. `epoch` is on the
/// same time axis as the `t` passed to propagate(): TLE ingestion yields Unix
/// seconds, scenario loading rebases to simulation time.
struct OrbitalElements {
  int satellite_id = 0;
  std::string name;
  double epoch = 0.0;
  double semi_major_axis = 0.0;
  double eccentricity = 0.0;
  double inclination = 0.0;
  double raan = 0.0;
  double arg_perigee = 0.0;
  double mean_anomaly_at_epoch = 0.0;
  double mean_motion = 0.0;
};

/// Earth-centered inertial position in km at time `t` (seconds).
struct EciPosition {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  double t = 0.0;

  double norm() const;
};

struct GeodeticPoint {
  double latitude = 0.0;   // rad
  double longitude = 0.0;  // rad, [-pi, pi)
  double altitude = 0.0;   // km

  static GeodeticPoint from_degrees(double lat_deg, double lon_deg, double alt_km = 0.0);
};

/// Kepler's third law, both directions.
double mean_motion_for(double semi_major_axis_km);
double semi_major_axis_for(double mean_motion_rad_s);
double orbital_period(const OrbitalElements& el);

/// Throws ValidationError when an element set breaks a physical invariant.
void validate(const OrbitalElements& el);

/// Decodes a 2-line or 3-line (named) TLE record. Epoch is returned as Unix
/// seconds. Throws ParseError naming the offending line and columns.
OrbitalElements parse_tle(std::string_view text);

/// Reads every record of a TLE file; blank lines and '#' comments are skipped.
std::vector<OrbitalElements> parse_tle_stream(std::istream& in);
std::vector<OrbitalElements> load_tle_file(const std::string& path);

/// Encodes an element set as a standard TLE record (name line first when the
/// name is non-empty). `epoch_unix_s` is written in the YYDDD.DDDDDDDD field.
std::string format_tle(const OrbitalElements& el, double epoch_unix_s);

/// Two-body propagation; Kepler's equation solved by Newton iteration.
EciPosition propagate(const OrbitalElements& el, double t);

/// Spherical-Earth ground point; ECI and ECEF coincide at t = 0.
EciPosition ground_position(const GeodeticPoint& p, double t);

/// Euclidean distance. Throws ContractError when the timestamps differ.
double separation(const EciPosition& a, const EciPosition& b);

/// Minimum distance from Earth's center to the closed segment [a, b].
double segment_clearance(const EciPosition& a, const EciPosition& b);

/// True when the segment [a, b] stays strictly outside the occlusion sphere of
/// radius kEarthRadiusKm + atmosphere_margin_km.
bool has_line_of_sight(const EciPosition& a, const EciPosition& b,
                       double atmosphere_margin_km = 0.0);

/// Visibility from a point on the Earth's surface: the segment toward `sat`
/// leaves the surface outward, i.e. the satellite is above the local horizon.
bool above_horizon(const EciPosition& ground, const EciPosition& sat);

/// Surface distance along the great circle, km.
double great_circle_distance(const GeodeticPoint& a, const GeodeticPoint& b);

}  // namespace orbitnet::astro
