#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "doctest.h"
#include "orbitnet/constellation.hpp"
#include "orbitnet/errors.hpp"
#include "orbitnet/topology.hpp"
#include "support.hpp"

using namespace orbitnet;
using namespace orbitnet::topology;

namespace {

struct Degree {
  int intra = 0;
  int inter = 0;
  int gsl = 0;
};

std::vector<Degree> degrees(const TopologySnapshot& s) {
  std::vector<Degree> d(s.node_count());
  for (const auto& l : s.links()) {
    for (NodeId n : {l.u, l.v}) {
      if (l.kind == LinkKind::intra_plane) ++d[n].intra;
      if (l.kind == LinkKind::inter_plane) ++d[n].inter;
      if (l.kind == LinkKind::gsl) ++d[n].gsl;
    }
  }
  return d;
}

void check_walker_structure(const Scenario& sc, const TopologySnapshot& snap) {
  const auto d = degrees(snap);
  for (int i = 0; i < sc.satellite_count(); ++i) {
    const int plane = sc.satellites[i].plane;
    const bool seam_side = plane == 0 || plane == sc.num_planes - 1;
    CHECK(d[i].intra == 2);
    CHECK(d[i].inter == (seam_side ? 1 : 2));
  }
  for (const auto& l : snap.links()) {
    if (l.kind == LinkKind::intra_plane) {
      CHECK(sc.satellites[l.u].plane == sc.satellites[l.v].plane);
    }
    if (l.kind == LinkKind::inter_plane) {
      CHECK(std::abs(sc.satellites[l.u].plane - sc.satellites[l.v].plane) == 1);
    }
  }
}

}  // namespace

TEST_SUITE("constellation") {

TEST_CASE("walker star: Iridium layout") {
  const auto els = generate_walker_star(ConstellationParams::iridium_next(), 0.0);
  REQUIRE(els.size() == 66);
  std::set<long> raans;
  for (const auto& el : els) {
    raans.insert(std::lround(astro::rad_to_deg(el.raan)));
    CHECK(el.eccentricity == 0.0);
    CHECK(el.semi_major_axis == doctest::Approx(6378.137 + 781.0));
  }
  CHECK(raans == std::set<long>{0, 30, 60, 90, 120, 150});
}

TEST_CASE("walker star: slot spacing and phase factor") {
  ConstellationParams p;
  p.num_planes = 1;
  p.sats_per_plane = 2;
  auto els = generate_walker_star(p, 0.0);
  CHECK(els[0].mean_anomaly_at_epoch == doctest::Approx(0.0));
  CHECK(els[1].mean_anomaly_at_epoch == doctest::Approx(astro::kPi));

  p.num_planes = 2;
  p.phase_factor = 1;
  els = generate_walker_star(p, 0.0);
  const auto sats = walker_satellites(p, 0.0);
  for (std::size_t i = 0; i < sats.size(); ++i) {
    if (sats[i].plane == 1 && sats[i].slot == 0) {
      CHECK(els[i].mean_anomaly_at_epoch == doctest::Approx(astro::kPi / 2.0));
    }
  }
}

TEST_CASE("walker params are validated") {
  ConstellationParams p;
  p.num_planes = 0;
  CHECK_THROWS_AS(p.validate(), ValidationError);
  p = {};
  p.altitude = -1.0;
  CHECK_THROWS_AS(p.validate(), ValidationError);
  p = {};
  p.phase_factor = 6;
  CHECK_THROWS_AS(p.validate(), ValidationError);
}

TEST_CASE("bundled scenario loads ten cities with their stations") {
  const auto sc = load_scenario(std::string(ORBITNET_DATA_DIR) + "/default_scenario.json");
  CHECK(sc.cities.size() == 10);
  CHECK(sc.ground_stations.size() == 10);
  CHECK(sc.satellite_count() == 66);
  const auto builtin = default_scenario();
  REQUIRE(builtin.cities.size() == sc.cities.size());
  for (std::size_t i = 0; i < sc.cities.size(); ++i) {
    CHECK(builtin.cities[i].id == sc.cities[i].id);
    CHECK(builtin.cities[i].population == sc.cities[i].population);
  }
}

TEST_CASE("scenario validation") {
  const std::string head = R"({"constellation": {"num_planes": 6}, "cities": [)";
  CHECK_THROWS_AS(parse_scenario(head + "]}"), ValidationError);
  CHECK_THROWS_AS(
      parse_scenario(head +
                     R"({"id":"A","name":"a","latitude_deg":0,"longitude_deg":0,"population":0},
                        {"id":"B","name":"b","latitude_deg":1,"longitude_deg":1,"population":5}]})"),
      ValidationError);
  CHECK_THROWS_AS(
      parse_scenario(head +
                     R"({"id":"A","name":"a","latitude_deg":0,"longitude_deg":0,"population":3},
                        {"id":"A","name":"b","latitude_deg":1,"longitude_deg":1,"population":5}]})"),
      ValidationError);
  CHECK_THROWS_AS(parse_scenario(R"({"bogus": 1, "cities": []})"), ValidationError);
  const auto ok = parse_scenario(
      head + R"({"id":"A","name":"a","latitude_deg":0,"longitude_deg":0,"population":3},
               {"id":"B","name":"b","latitude_deg":1,"longitude_deg":1,"population":5}]})");
  CHECK(ok.cities.size() == 2);
}

TEST_CASE("nearest satellite") {
  const auto gs = astro::GeodeticPoint::from_degrees(0, 0);
  SUBCASE("overhead beats antipodal") {
    std::vector<std::pair<int, astro::EciPosition>> pos = {
        {0, {-7000, 0, 0, 0}}, {1, {7000, 0, 0, 0}}, {2, {0, -7000, 0, 0}}};
    CHECK(nearest_satellite(gs, pos, 0.0) == 1);
  }
  SUBCASE("ties go to the lower id") {
    std::vector<std::pair<int, astro::EciPosition>> pos = {{5, {7000, 100, 0, 0}},
                                                           {3, {7000, -100, 0, 0}}};
    CHECK(nearest_satellite(gs, pos, 0.0) == 3);
  }
  SUBCASE("nothing visible") {
    std::vector<std::pair<int, astro::EciPosition>> pos = {{0, {-7000, 0, 0, 0}}};
    CHECK_THROWS_AS(nearest_satellite(gs, pos, 0.0), NoVisibleSatelliteError);
  }
  SUBCASE("Iridium at epoch agrees with an exhaustive argmin") {
    const auto sc = default_scenario();
    const auto p = satellite_positions(sc, 0.0);
    std::vector<std::pair<int, astro::EciPosition>> pos;
    for (int i = 0; i < sc.satellite_count(); ++i) pos.emplace_back(i, p[i]);
    const auto g = astro::ground_position(gs, 0.0);
    int best = -1;
    double best_d = 1e300;
    for (int i = 0; i < sc.satellite_count(); ++i) {
      const double d = std::hypot(p[i].x - g.x, p[i].y - g.y, p[i].z - g.z);
      if (d < best_d) {
        best_d = d;
        best = i;
      }
    }
    CHECK(nearest_satellite(gs, pos, 0.0) == best);
  }
}

}  // TEST_SUITE

TEST_SUITE("topology") {

TEST_CASE("min-distance structure holds across an orbit") {
  const auto sc = default_scenario();
  for (double t : {0.0, 17.0, 600.0, 1500.0, 3000.0, 6000.0}) {
    CAPTURE(t);
    const auto snap = build_min_distance(sc, t);
    check_walker_structure(sc, snap);
    const auto d = degrees(snap);
    int gsls = 0;
    for (int g = 0; g < sc.ground_station_count(); ++g) gsls += d[sc.gs_node(g)].gsl;
    CHECK(gsls == sc.ground_station_count());
  }
}

TEST_CASE("intra-plane links are the slot neighbours at the chord length") {
  const auto sc = default_scenario();
  const auto snap = build_min_distance(sc, 0.0);
  const double chord = 2.0 * 7159.137 * std::sin(astro::kPi / 11.0);
  for (const auto& l : snap.links()) {
    if (l.kind != LinkKind::intra_plane) continue;
    const int ds = std::abs(sc.satellites[l.u].slot - sc.satellites[l.v].slot);
    CHECK((ds == 1 || ds == 10));
    CHECK(l.length == doctest::Approx(chord).epsilon(1e-9));
  }
}

TEST_CASE("single plane has no inter-plane links") {
  ConstellationParams p;
  p.num_planes = 1;
  auto sc = make_scenario(p, default_cities());
  const auto snap = build_min_distance(sc, 0.0);
  for (const auto& l : snap.links()) CHECK(l.kind != LinkKind::inter_plane);
}

TEST_CASE("los builder keeps links that still see each other") {
  const auto sc = default_scenario();
  const auto first = build_min_distance(sc, 0.0);
  const auto next = build_los(first, sc, 0.01);
  CHECK(diff_snapshots(first, next) == 0);
  CHECK(next.t() == 0.01);
  bool moved = false;
  for (std::size_t i = 0; i < next.links().size(); ++i) {
    const auto* l = first.link_between(next.links()[i].u, next.links()[i].v);
    REQUIRE(l != nullptr);
    if (l->length != next.links()[i].length) moved = true;
  }
  CHECK(moved);
}

TEST_CASE("los builder keeps the walker structure over an hour") {
  const auto sc = default_scenario();
  TopologyBuilder b(sc, BuilderKind::line_of_sight);
  for (int t = 0; t < 3600; t += 7) {
    const auto& snap = b.next(t);
    if (t % 301 == 0) check_walker_structure(sc, snap);
    const auto pu = satellite_positions(sc, t);
    for (const auto& l : snap.links()) {
      if (l.kind != LinkKind::gsl) CHECK(astro::has_line_of_sight(pu[l.u], pu[l.v]));
    }
  }
}

TEST_CASE("diff_snapshots") {
  const auto sc = default_scenario();
  const auto a = build_min_distance(sc, 0.0);
  CHECK(diff_snapshots(a, a) == 0);

  SUBCASE("rehoming one GSL counts two changes") {
    auto links = a.links();
    for (auto& l : links) {
      if (l.kind == LinkKind::gsl && l.v == sc.gs_node(0)) {
        // pick any satellite without a ground port for this station
        for (NodeId s = 0; s < sc.satellite_count(); ++s) {
          if (s != l.u && !a.port_toward(s, l.v)) {
            l.u = s;
            break;
          }
        }
        break;
      }
    }
    const TopologySnapshot b(0.0, a.satellite_count(), a.ground_station_count(),
                             BuilderKind::min_distance, links);
    CHECK(diff_snapshots(a, b) == 2);
  }

  SUBCASE("random graphs agree with a double loop") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 50; ++trial) {
      auto make = [&] {
        std::vector<Link> links;
        std::vector<int> next_port(8, 0);
        for (int u = 0; u < 8; ++u) {
          for (int v = u + 1; v < 8; ++v) {
            if (rng() % 3 == 0) {
              links.push_back(testsupport::isl(u, v, 1.0, next_port[u]++, next_port[v]++));
            }
          }
        }
        return TopologySnapshot(0.0, 8, 0, BuilderKind::min_distance, links);
      };
      const auto x = make();
      const auto y = make();
      std::size_t naive = 0;
      for (const auto& l : x.links()) {
        bool found = false;
        for (const auto& m : y.links()) found |= (std::min(l.u, l.v) == std::min(m.u, m.v) &&
                                                  std::max(l.u, l.v) == std::max(m.u, m.v));
        naive += !found;
      }
      for (const auto& m : y.links()) {
        bool found = false;
        for (const auto& l : x.links()) found |= (std::min(l.u, l.v) == std::min(m.u, m.v) &&
                                                  std::max(l.u, l.v) == std::max(m.u, m.v));
        naive += !found;
      }
      CHECK(diff_snapshots(x, y) == naive);
    }
  }

  SUBCASE("node sets must match") {
    const TopologySnapshot small(0.0, 3, 0, BuilderKind::min_distance, {});
    CHECK_THROWS_AS(diff_snapshots(a, small), ContractError);
  }
}

TEST_CASE("snapshot rejects malformed link sets") {
  using testsupport::isl;
  CHECK_THROWS_AS(TopologySnapshot(0, 3, 0, BuilderKind::min_distance, {isl(0, 0, 1, 0, 1)}),
                  ContractError);
  CHECK_THROWS_AS(TopologySnapshot(0, 3, 0, BuilderKind::min_distance,
                                   {isl(0, 1, 1, 0, 0), isl(1, 0, 1, 1, 1)}),
                  ContractError);
  CHECK_THROWS_AS(TopologySnapshot(0, 3, 0, BuilderKind::min_distance,
                                   {isl(0, 1, 1, 0, 0), isl(0, 2, 1, 0, 1)}),
                  ContractError);
}

TEST_CASE("stability series") {
  using testsupport::isl;
  const TopologySnapshot A(0, 3, 0, BuilderKind::min_distance, {isl(0, 1, 2.0, 0, 0)});
  const TopologySnapshot B(0, 3, 0, BuilderKind::min_distance,
                           {isl(0, 1, 2.0, 0, 0), isl(1, 2, 4.0, 1, 0)});
  SUBCASE("identical snapshots form one interval") {
    std::vector<TopologySnapshot> s(5, A);
    const auto r = stability_series(s);
    CHECK(r.stability_interval_lengths == std::vector<double>{5});
  }
  SUBCASE("A A B B B") {
    const std::vector<TopologySnapshot> s = {A, A, B, B, B};
    const auto r = stability_series(s);
    CHECK(r.stability_interval_lengths == std::vector<double>{2, 3});
    CHECK(r.link_change_count == std::vector<double>{0, 0, 1, 0, 0});
    CHECK(r.average_link_length[2] == doctest::Approx(3.0));
    CHECK(r.link_length.mean == doctest::Approx((2 + 2 + 3 + 3 + 3) / 5.0));
  }
  SUBCASE("empty input") {
    CHECK_THROWS_AS(stability_series({}), ContractError);
  }
}

TEST_CASE("summarize_series uses the sample variance") {
  const std::vector<double> v = {1, 2, 3, 4};
  const auto s = summarize_series(v);
  CHECK(s.mean == doctest::Approx(2.5));
  CHECK(s.min == 1);
  CHECK(s.max == 4);
  CHECK(s.variance == doctest::Approx(5.0 / 3.0));
}

}  // TEST_SUITE
