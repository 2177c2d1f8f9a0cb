#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "orbitnet/astro.hpp"
#include "orbitnet/constellation.hpp"
#include "orbitnet/errors.hpp"

using namespace orbitnet;
using namespace orbitnet::astro;

namespace {

const char* kLine1 = "1 24793U 97020B   24001.50000000  .00000000  00000-0  00000-0 0  9995";
const char* kLine2 = "2 24793  86.3940 123.4560 0001000  90.0000 270.0000 14.34000000 12349";

OrbitalElements circular(double a, double inc, double raan, double m0) {
  OrbitalElements el;
  el.semi_major_axis = a;
  el.inclination = inc;
  el.raan = raan;
  el.mean_anomaly_at_epoch = m0;
  el.mean_motion = std::sqrt(kEarthMu / (a * a * a));
  return el;
}

}  // namespace

TEST_SUITE("astro") {

TEST_CASE("tle decode: mean motion 14.34 rev/day gives a near 7155 km") {
  const auto el = parse_tle(std::string(kLine1) + "\n" + kLine2 + "\n");
  CHECK(el.satellite_id == 24793);
  CHECK(el.eccentricity == doctest::Approx(1e-4).epsilon(1e-12));
  CHECK(rad_to_deg(el.inclination) == doctest::Approx(86.394));
  // n in rad/s, then a = (mu / n^2)^(1/3)
  const double n = 14.34 * 2.0 * 3.141592653589793 / 86400.0;
  const double a = std::cbrt(398600.4418 / (n * n));
  CHECK(el.semi_major_axis == doctest::Approx(a).epsilon(1e-12));
  CHECK(std::abs(el.semi_major_axis - 7155.0) < 2.0);
  // 2024-01-01T00:00:00Z is 1704067200; day 001.5 is noon.
  CHECK(el.epoch == doctest::Approx(1704067200.0 + 43200.0).epsilon(1e-15));
}

TEST_CASE("tle decode: named three-line record") {
  const auto el = parse_tle(std::string("IRIDIUM 7\n") + kLine1 + "\n" + kLine2);
  CHECK(el.name == "IRIDIUM 7");
}

TEST_CASE("tle errors name the line") {
  const std::string l2 = kLine2;
  SUBCASE("truncated line 2") {
    try {
      parse_tle(std::string(kLine1) + "\n" + l2.substr(0, 40));
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
  }
  SUBCASE("bad checksum") {
    std::string bad = l2;
    bad.back() = bad.back() == '0' ? '1' : '0';
    CHECK_THROWS_AS(parse_tle(std::string(kLine1) + "\n" + bad), ParseError);
  }
  SUBCASE("garbage numeric field") {
    std::string bad = l2;
    bad[9] = 'x';
    // keep the checksum honest so the field parser is what fails
    int sum = 0;
    for (std::size_t i = 0; i + 1 < bad.size(); ++i) {
      if (bad[i] >= '0' && bad[i] <= '9') sum += bad[i] - '0';
      if (bad[i] == '-') sum += 1;
    }
    bad.back() = static_cast<char>('0' + sum % 10);
    try {
      parse_tle(std::string(kLine1) + "\n" + bad);
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(std::string(e.what()).find("inclination") != std::string::npos);
    }
  }
}

TEST_CASE("format_tle round-trips within TLE precision") {
  for (const auto& el : generate_walker_star(ConstellationParams::iridium_next(), 1704067200.0)) {
    const auto back = parse_tle(format_tle(el, el.epoch));
    CHECK(back.satellite_id == el.satellite_id);
    CHECK(back.inclination == doctest::Approx(el.inclination).epsilon(1e-6));
    CHECK(back.raan == doctest::Approx(el.raan).epsilon(1e-6));
    CHECK(back.mean_motion == doctest::Approx(el.mean_motion).epsilon(1e-8));
    CHECK(std::abs(back.epoch - el.epoch) < 1e-3);
  }
}

TEST_CASE("tle stream skips comments and blank lines") {
  std::istringstream in(std::string("# header\n\n") + kLine1 + "\n" + kLine2 + "\n\n");
  CHECK(parse_tle_stream(in).size() == 1);
}

TEST_CASE("propagation: circular orbit at epoch sits at radius a") {
  const auto el = circular(7159.137, deg_to_rad(86.4), 0.3, 1.1);
  CHECK(propagate(el, 0.0).norm() == doctest::Approx(7159.137).epsilon(1e-14));
}

TEST_CASE("propagation: one period returns to the epoch position") {
  const double a = 6378.137 + 781.0;
  const auto el = circular(a, deg_to_rad(86.4), deg_to_rad(30.0), 0.7);
  const double period = 2.0 * 3.141592653589793 * std::sqrt(a * a * a / 398600.4418);
  CHECK(orbital_period(el) == doctest::Approx(period).epsilon(1e-12));
  CHECK(period / 60.0 == doctest::Approx(100.5).epsilon(0.01));
  const auto p0 = propagate(el, 0.0);
  const auto p1 = propagate(el, period);
  const double d = std::hypot(p1.x - p0.x, p1.y - p0.y, p1.z - p0.z);
  CHECK(d < 1e-6);
}

TEST_CASE("propagation: eccentric orbit conserves the vis-viva energy") {
  auto el = circular(8000.0, 0.9, 0.2, 0.0);
  el.eccentricity = 0.3;
  el.arg_perigee = 0.4;
  const double dt = 1e-3;
  for (double t : {0.0, 500.0, 2000.0, 5000.0}) {
    const auto p = propagate(el, t);
    const auto q = propagate(el, t + dt);
    const double v = std::hypot(q.x - p.x, q.y - p.y, q.z - p.z) / dt;
    const double r = p.norm();
    CHECK(v * v == doctest::Approx(398600.4418 * (2.0 / r - 1.0 / 8000.0)).epsilon(1e-5));
    CHECK(r >= 8000.0 * 0.7 - 1e-6);
    CHECK(r <= 8000.0 * 1.3 + 1e-6);
  }
}

TEST_CASE("propagation: polar orbit a quarter turn past the node is on the z axis") {
  const auto el = circular(7000.0, deg_to_rad(90.0), 0.0, 3.141592653589793 / 2.0);
  const auto p = propagate(el, 0.0);
  CHECK(std::abs(p.x) < 1e-9);
  CHECK(std::abs(p.y) < 1e-9);
  CHECK(std::abs(p.z) == doctest::Approx(7000.0));
}

TEST_CASE("ground positions") {
  const auto origin = ground_position(GeodeticPoint::from_degrees(0, 0), 0.0);
  CHECK(origin.x == doctest::Approx(6378.137));
  CHECK(std::abs(origin.y) < 1e-9);
  const auto pole = ground_position(GeodeticPoint::from_degrees(90, 45), 12345.0);
  CHECK(pole.z == doctest::Approx(6378.137));
  CHECK(std::hypot(pole.x, pole.y) < 1e-9);
  const auto half = ground_position(GeodeticPoint::from_degrees(0, 0), 43082.0);
  CHECK(std::abs(half.x + 6378.137) < 1.0);
}

TEST_CASE("separation and line of sight") {
  const double a = 7159.137;
  const double step = 2.0 * 3.141592653589793 / 11.0;
  const EciPosition s0{a, 0, 0, 0};
  const EciPosition s1{a * std::cos(step), a * std::sin(step), 0, 0};
  CHECK(separation(s0, s0) == 0.0);
  CHECK(separation(s0, s1) == doctest::Approx(2.0 * a * std::sin(3.141592653589793 / 11.0)));
  CHECK(std::abs(separation(s0, s1) - 4034.0) < 1.0);
  CHECK(separation({1, 0, 0, 0}, {0, 1, 0, 0}) == doctest::Approx(std::sqrt(2.0)));
  CHECK_THROWS_AS(separation({1, 0, 0, 0}, {1, 0, 0, 1}), ContractError);

  CHECK(segment_clearance(s0, s1) == doctest::Approx(a * std::cos(3.141592653589793 / 11.0)));
  CHECK(has_line_of_sight(s0, s1));
  CHECK_FALSE(has_line_of_sight(s0, {-a, 0, 0, 0}));
  CHECK(has_line_of_sight(s0, s0));
  // a margin larger than the clearance gap occludes the pair
  CHECK_FALSE(has_line_of_sight(s0, s1, 500.0));
}

TEST_CASE("line of sight matches a sampled-segment oracle") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-9000.0, 9000.0);
  int checked = 0;
  while (checked < 500) {
    EciPosition a{u(rng), u(rng), u(rng), 0};
    EciPosition b{u(rng), u(rng), u(rng), 0};
    if (a.norm() < 6500 || b.norm() < 6500) continue;
    double best = 1e300;
    for (int i = 0; i <= 20000; ++i) {
      const double s = i / 20000.0;
      best = std::min(best, std::hypot(a.x + s * (b.x - a.x), a.y + s * (b.y - a.y),
                                       a.z + s * (b.z - a.z)));
    }
    CHECK(segment_clearance(a, b) <= best + 1e-9);
    CHECK(segment_clearance(a, b) >= best - 2.0);
    if (std::abs(best - kEarthRadiusKm) > 2.0) {
      CHECK(has_line_of_sight(a, b) == (best > kEarthRadiusKm));
    }
    ++checked;
  }
}

TEST_CASE("great circle distance") {
  const auto a = GeodeticPoint::from_degrees(0, 0);
  const auto b = GeodeticPoint::from_degrees(0, 90);
  CHECK(great_circle_distance(a, b) == doctest::Approx(6378.137 * 3.141592653589793 / 2.0));
}

}  // TEST_SUITE
