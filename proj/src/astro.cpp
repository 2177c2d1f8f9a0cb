#include "orbitnet/astro.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <sstream>

#include "orbitnet/errors.hpp"

namespace orbitnet::astro {

namespace {

constexpr int kTleLineLength = 69;
constexpr double kKeplerTolerance = 1e-10;
constexpr int kKeplerMaxIterations = 50;

double wrap_two_pi(double angle) {
  double r = std::fmod(angle, kTwoPi);
  return r < 0.0 ? r + kTwoPi : r;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::string location(int line, int first_col, int last_col) {
  std::ostringstream os;
  os << "TLE line " << line << " columns " << first_col << "-" << last_col;
  return os.str();
}

// Columns are 1-based and inclusive, matching the published TLE layout.
std::string_view columns(std::string_view line, int first_col, int last_col) {
  return line.substr(static_cast<std::size_t>(first_col - 1),
                     static_cast<std::size_t>(last_col - first_col + 1));
}

double parse_double(std::string_view line, int line_no, int first_col, int last_col,
                    const char* what) {
  std::string_view field = trim(columns(line, first_col, last_col));
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (field.empty() || ec != std::errc{} || ptr != field.data() + field.size()) {
    throw ParseError(location(line_no, first_col, last_col) + ": cannot parse " + what +
                     " from '" + std::string(field) + "'");
  }
  return value;
}

int parse_int(std::string_view line, int line_no, int first_col, int last_col, const char* what) {
  std::string_view field = trim(columns(line, first_col, last_col));
  int value = 0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (field.empty() || ec != std::errc{} || ptr != field.data() + field.size()) {
    throw ParseError(location(line_no, first_col, last_col) + ": cannot parse " + what +
                     " from '" + std::string(field) + "'");
  }
  return value;
}

int checksum(std::string_view line) {
  int sum = 0;
  for (char c : line.substr(0, kTleLineLength - 1)) {
    if (c >= '0' && c <= '9') sum += c - '0';
    if (c == '-') sum += 1;
  }
  return sum % 10;
}

void check_line(std::string_view line, int line_no) {
  if (static_cast<int>(line.size()) != kTleLineLength) {
    std::ostringstream os;
    os << "TLE line " << line_no << ": expected " << kTleLineLength << " columns, got "
       << line.size();
    throw ParseError(os.str());
  }
  if (line[0] != static_cast<char>('0' + line_no)) {
    throw ParseError(location(line_no, 1, 1) + ": expected line number " +
                     std::to_string(line_no));
  }
  const char declared = line[kTleLineLength - 1];
  if (declared < '0' || declared > '9') {
    throw ParseError(location(line_no, 69, 69) + ": checksum is not a digit");
  }
  const int computed = checksum(line);
  if (computed != declared - '0') {
    throw ParseError(location(line_no, 69, 69) + ": checksum mismatch (declared " +
                     std::string(1, declared) + ", computed " + std::to_string(computed) + ")");
  }
}

double unix_seconds_of_year_start(int year) {
  using namespace std::chrono;
  const sys_days start{std::chrono::year{year} / January / 1};
  return static_cast<double>(start.time_since_epoch().count()) * kSecondsPerDay;
}

std::vector<std::string> split_lines(std::string_view text) {
  std::vector<std::string> lines;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view raw = text.substr(pos, end - pos);
    while (!raw.empty() && (raw.back() == '\r' || raw.back() == ' ')) raw.remove_suffix(1);
    if (!raw.empty()) lines.emplace_back(raw);
    pos = end + 1;
  }
  return lines;
}

}  // namespace

double EciPosition::norm() const { return std::sqrt(x * x + y * y + z * z); }

GeodeticPoint GeodeticPoint::from_degrees(double lat_deg, double lon_deg, double alt_km) {
  double lon = deg_to_rad(lon_deg);
  if (lon >= kPi) lon -= kTwoPi;
  if (lon < -kPi) lon += kTwoPi;
  return {deg_to_rad(lat_deg), lon, alt_km};
}

double mean_motion_for(double semi_major_axis_km) {
  return std::sqrt(kEarthMu / (semi_major_axis_km * semi_major_axis_km * semi_major_axis_km));
}

double semi_major_axis_for(double mean_motion_rad_s) {
  return std::cbrt(kEarthMu / (mean_motion_rad_s * mean_motion_rad_s));
}

double orbital_period(const OrbitalElements& el) { return kTwoPi / el.mean_motion; }

void validate(const OrbitalElements& el) {
  const std::string who = "satellite " + std::to_string(el.satellite_id) + ": ";
  if (!(el.semi_major_axis > kEarthRadiusKm)) {
    throw ValidationError(who + "semi_major_axis must exceed the Earth radius");
  }
  if (!(el.eccentricity >= 0.0 && el.eccentricity < 1.0)) {
    throw ValidationError(who + "eccentricity must be in [0, 1)");
  }
  if (!(el.mean_motion > 0.0)) {
    throw ValidationError(who + "mean_motion must be positive");
  }
}

OrbitalElements parse_tle(std::string_view text) {
  std::vector<std::string> lines = split_lines(text);
  if (lines.size() < 2 || lines.size() > 3) {
    throw ParseError("TLE record must have 2 or 3 lines, got " + std::to_string(lines.size()));
  }
  OrbitalElements el;
  if (lines.size() == 3) {
    std::string_view name = trim(lines[0]);
    if (!name.empty() && name.front() == '0' && name.size() > 1 && name[1] == ' ') {
      name.remove_prefix(2);
    }
    el.name = std::string(name);
    lines.erase(lines.begin());
  }
  const std::string_view l1 = lines[0];
  const std::string_view l2 = lines[1];
  check_line(l1, 1);
  check_line(l2, 2);

  const int satnum1 = parse_int(l1, 1, 3, 7, "catalog number");
  const int satnum2 = parse_int(l2, 2, 3, 7, "catalog number");
  if (satnum1 != satnum2) {
    throw ParseError(location(2, 3, 7) + ": catalog number differs from line 1");
  }
  el.satellite_id = satnum1;

  const int yy = parse_int(l1, 1, 19, 20, "epoch year");
  const double day_of_year = parse_double(l1, 1, 21, 32, "epoch day");
  const int year = yy < 57 ? 2000 + yy : 1900 + yy;
  el.epoch = unix_seconds_of_year_start(year) + (day_of_year - 1.0) * kSecondsPerDay;

  el.inclination = deg_to_rad(parse_double(l2, 2, 9, 16, "inclination"));
  el.raan = deg_to_rad(parse_double(l2, 2, 18, 25, "right ascension"));
  {
    // Implied leading decimal point.
    std::string_view ecc = trim(columns(l2, 27, 33));
    for (char c : ecc) {
      if (c < '0' || c > '9') {
        throw ParseError(location(2, 27, 33) + ": cannot parse eccentricity from '" +
                         std::string(ecc) + "'");
      }
    }
    el.eccentricity = parse_double("0." + std::string(ecc), 2, 1, 2 + static_cast<int>(ecc.size()),
                                   "eccentricity");
  }
  el.arg_perigee = deg_to_rad(parse_double(l2, 2, 35, 42, "argument of perigee"));
  el.mean_anomaly_at_epoch = deg_to_rad(parse_double(l2, 2, 44, 51, "mean anomaly"));
  const double revs_per_day = parse_double(l2, 2, 53, 63, "mean motion");
  if (!(revs_per_day > 0.0)) {
    throw ParseError(location(2, 53, 63) + ": mean motion must be positive");
  }
  el.mean_motion = revs_per_day * kTwoPi / kSecondsPerDay;
  el.semi_major_axis = semi_major_axis_for(el.mean_motion);
  try {
    validate(el);
  } catch (const ValidationError& e) {
    throw ParseError(std::string("TLE line 2: ") + e.what());
  }
  return el;
}

std::vector<OrbitalElements> parse_tle_stream(std::istream& in) {
  std::vector<OrbitalElements> out;
  std::vector<std::string> pending;
  std::string line;
  int line_no = 0;
  auto flush_error = [&](const std::string& msg) {
    throw ParseError("line " + std::to_string(line_no) + ": " + msg);
  };
  while (std::getline(in, line)) {
    ++line_no;
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    pending.push_back(line);
    const bool is_line2 = line.size() >= 2 && line[0] == '2' && line[1] == ' ';
    if (is_line2) {
      std::string record;
      for (const auto& l : pending) record += l + "\n";
      try {
        out.push_back(parse_tle(record));
      } catch (const ParseError& e) {
        flush_error(e.what());
      }
      pending.clear();
    } else if (pending.size() > 2) {
      flush_error("expected TLE line 2");
    }
  }
  if (!pending.empty()) {
    flush_error("truncated TLE record at end of input");
  }
  return out;
}

std::vector<OrbitalElements> load_tle_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open TLE file '" + path + "'");
  return parse_tle_stream(in);
}

std::string format_tle(const OrbitalElements& el, double epoch_unix_s) {
  using namespace std::chrono;
  const auto days_since = static_cast<long long>(std::floor(epoch_unix_s / kSecondsPerDay));
  const year_month_day ymd{sys_days{days{days_since}}};
  const int year = static_cast<int>(ymd.year());
  const double day_of_year = (epoch_unix_s - unix_seconds_of_year_start(year)) / kSecondsPerDay + 1.0;
  const long ecc = std::lround(el.eccentricity * 1e7);
  if (ecc >= 10'000'000) throw ValidationError("eccentricity too close to 1 for TLE encoding");

  char l1[160];
  char l2[160];
  std::snprintf(l1, sizeof l1, "1 %05dU %02d001A   %02d%012.8f  .00000000  00000-0  00000-0 0  999",
                el.satellite_id % 100000, year % 100, year % 100, day_of_year);
  std::snprintf(l2, sizeof l2, "2 %05d %8.4f %8.4f %07ld %8.4f %8.4f %11.8f%5d",
                el.satellite_id % 100000, rad_to_deg(el.inclination),
                rad_to_deg(wrap_two_pi(el.raan)), ecc, rad_to_deg(wrap_two_pi(el.arg_perigee)),
                rad_to_deg(wrap_two_pi(el.mean_anomaly_at_epoch)),
                el.mean_motion * kSecondsPerDay / kTwoPi, 0);
  std::string line1(l1);
  std::string line2(l2);
  if (line1.size() != kTleLineLength - 1 || line2.size() != kTleLineLength - 1) {
    throw ValidationError("element set does not fit the TLE column layout");
  }
  line1 += static_cast<char>('0' + checksum(line1 + "0"));
  line2 += static_cast<char>('0' + checksum(line2 + "0"));
  std::string out;
  if (!el.name.empty()) out += el.name + "\n";
  out += line1 + "\n" + line2 + "\n";
  return out;
}

EciPosition propagate(const OrbitalElements& el, double t) {
  const double e = el.eccentricity;
  const double mean_anomaly = wrap_two_pi(el.mean_anomaly_at_epoch + el.mean_motion * (t - el.epoch));

  double ecc_anomaly = e < 0.8 ? mean_anomaly : kPi;
  bool converged = false;
  for (int i = 0; i < kKeplerMaxIterations; ++i) {
    const double step = (ecc_anomaly - e * std::sin(ecc_anomaly) - mean_anomaly) /
                        (1.0 - e * std::cos(ecc_anomaly));
    ecc_anomaly -= step;
    if (std::abs(step) < kKeplerTolerance) {
      converged = true;
      break;
    }
  }
  if (!converged) {
    throw NumericError("Kepler's equation did not converge for satellite " +
                       std::to_string(el.satellite_id));
  }

  const double a = el.semi_major_axis;
  const double xp = a * (std::cos(ecc_anomaly) - e);
  const double yp = a * std::sqrt(1.0 - e * e) * std::sin(ecc_anomaly);

  const double co = std::cos(el.raan), so = std::sin(el.raan);
  const double ci = std::cos(el.inclination), si = std::sin(el.inclination);
  const double cw = std::cos(el.arg_perigee), sw = std::sin(el.arg_perigee);

  EciPosition p;
  p.x = (co * cw - so * sw * ci) * xp + (-co * sw - so * cw * ci) * yp;
  p.y = (so * cw + co * sw * ci) * xp + (-so * sw + co * cw * ci) * yp;
  p.z = (sw * si) * xp + (cw * si) * yp;
  p.t = t;
  return p;
}

EciPosition ground_position(const GeodeticPoint& p, double t) {
  const double r = kEarthRadiusKm + p.altitude;
  const double xe = r * std::cos(p.latitude) * std::cos(p.longitude);
  const double ye = r * std::cos(p.latitude) * std::sin(p.longitude);
  const double theta = kEarthRotationRate * t;
  const double c = std::cos(theta), s = std::sin(theta);
  return {xe * c - ye * s, xe * s + ye * c, r * std::sin(p.latitude), t};
}

double separation(const EciPosition& a, const EciPosition& b) {
  if (a.t != b.t) {
    throw ContractError("separation: positions at different times (" + std::to_string(a.t) +
                        " vs " + std::to_string(b.t) + ")");
  }
  const double dx = a.x - b.x, dy = a.y - b.y, dz = a.z - b.z;
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

double segment_clearance(const EciPosition& a, const EciPosition& b) {
  const double dx = b.x - a.x, dy = b.y - a.y, dz = b.z - a.z;
  const double len2 = dx * dx + dy * dy + dz * dz;
  if (len2 == 0.0) return a.norm();
  const double s = std::clamp(-(a.x * dx + a.y * dy + a.z * dz) / len2, 0.0, 1.0);
  const double px = a.x + s * dx, py = a.y + s * dy, pz = a.z + s * dz;
  return std::sqrt(px * px + py * py + pz * pz);
}

bool has_line_of_sight(const EciPosition& a, const EciPosition& b, double atmosphere_margin_km) {
  return segment_clearance(a, b) > kEarthRadiusKm + atmosphere_margin_km;
}

bool above_horizon(const EciPosition& ground, const EciPosition& sat) {
  const double dx = sat.x - ground.x, dy = sat.y - ground.y, dz = sat.z - ground.z;
  return dx * ground.x + dy * ground.y + dz * ground.z > 0.0;
}

double great_circle_distance(const GeodeticPoint& a, const GeodeticPoint& b) {
  const double dlat = b.latitude - a.latitude;
  const double dlon = b.longitude - a.longitude;
  const double h = std::sin(dlat / 2) * std::sin(dlat / 2) +
                   std::cos(a.latitude) * std::cos(b.latitude) * std::sin(dlon / 2) *
                       std::sin(dlon / 2);
  return 2.0 * kEarthRadiusKm * std::asin(std::min(1.0, std::sqrt(h)));
}

}  // namespace orbitnet::astro
