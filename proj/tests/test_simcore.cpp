#include <cmath>
#include <map>
#include <sstream>

#include "doctest.h"
#include "orbitnet/errors.hpp"
#include "orbitnet/simcore.hpp"
#include "support.hpp"

using namespace orbitnet;
using namespace orbitnet::sim;
namespace topo = orbitnet::topology;

namespace {

// Two cities, one station each; total volume split evenly in both directions.
SimInputs two_city_inputs(TopologySource* source, int satellites) {
  SimInputs in;
  in.topology = source;
  in.matrix.cities = {"A", "B"};
  in.matrix.rates = {0.0, 0.5, 0.5, 0.0};
  in.matrix.total_volume = 1.0;
  in.city_to_gs = {0, 1};
  in.satellite_count = satellites;
  return in;
}

SimInputs scaled(SimInputs in, double volume) {
  for (double& r : in.matrix.rates) r *= volume;
  in.matrix.total_volume = volume;
  return in;
}

SimConfig line_config(double volume, double rate) {
  SimConfig c;
  c.duration = 3.0;
  c.total_volume = volume;
  c.provisioning_volume = rate;
  c.link_rate_fraction = 1.0;
  c.routing = routing::RoutingStrategy::baseline;
  return c;
}

// s1's fore port moves from s2 to a spare satellite s4, which links on to s2.
topo::TopologySnapshot rehomed_line(double t) {
  using testsupport::gsl;
  using testsupport::isl;
  const int n = 5;
  std::vector<topo::Link> links = {
      gsl(0, 0, n, 900.0),
      isl(0, 1, 4000.0, topo::ports::kFore, topo::ports::kAft),
      isl(1, 4, 4000.0, topo::ports::kFore, topo::ports::kAft),
      isl(4, 2, 4000.0, topo::ports::kFore, topo::ports::kAft),
      isl(2, 3, 4000.0, topo::ports::kFore, topo::ports::kAft),
      gsl(3, 1, n, 900.0),
  };
  return {t, n, 2, topo::BuilderKind::min_distance, links};
}

// s0-s1-s2-s3 with s4 unconnected.
topo::TopologySnapshot line_with_spare(double t) {
  using testsupport::gsl;
  using testsupport::isl;
  const int n = 5;
  std::vector<topo::Link> links = {
      gsl(0, 0, n, 900.0),
      isl(0, 1, 4000.0, topo::ports::kFore, topo::ports::kAft),
      isl(1, 2, 4000.0, topo::ports::kFore, topo::ports::kAft),
      isl(2, 3, 4000.0, topo::ports::kFore, topo::ports::kAft),
      gsl(3, 1, n, 900.0),
  };
  return {t, n, 2, topo::BuilderKind::min_distance, links};
}

topo::TopologySnapshot plain_line(int n, double t) {
  std::vector<double> lens(n - 1, 4000.0);
  return testsupport::line_snapshot(n, lens, 900.0, t);
}

std::map<std::int64_t, double> launch_times(const std::vector<LogRecord>& log) {
  std::map<std::int64_t, double> m;
  for (const auto& r : log) {
    if (r.kind == EventKind::launch) m[r.packet_id] = r.time;
  }
  return m;
}

}  // namespace

TEST_SUITE("simcore") {

TEST_CASE("port queue capacity and service time") {
  PortQueue q(1.4e7, 0.05 * 1.4e7);
  CHECK(q.capacity() == doctest::Approx(7e5));
  const auto first = q.enqueue(12000, 2.0);
  REQUIRE(first);
  CHECK(*first - 2.0 == doctest::Approx(12000 / 1.4e7));
  CHECK(std::abs((*first - 2.0) * 1e3 - 0.857) < 1e-3);
  int accepted = 1;
  while (q.enqueue(12000, 2.0)) ++accepted;
  CHECK(accepted == static_cast<int>(std::floor(7e5 / 12000)));
  CHECK(accepted == 58);
  CHECK(q.length() == 58);
  CHECK_FALSE(q.enqueue(12000, 2.0));
  q.complete(12000);
  CHECK(q.length() == 57);
  CHECK(q.enqueue(12000, 2.0));
  q.clear();
  CHECK(q.length() == 0);
  CHECK(q.queued_bits() == 0.0);
  CHECK_THROWS_AS(q.complete(12000), ContractError);
}

TEST_CASE("back-to-back packets serialise") {
  PortQueue q(1e6, 1e9);
  CHECK(*q.enqueue(1000, 0.0) == doctest::Approx(1e-3));
  CHECK(*q.enqueue(1000, 0.0) == doctest::Approx(2e-3));
  CHECK(*q.enqueue(1000, 0.5) == doctest::Approx(0.501));
}

TEST_CASE("forward decisions") {
  const auto snap = plain_line(3, 0.0);
  const routing::Path path{{0, 1, 2}, 0.0};
  for (auto strategy : {routing::ForwardingStrategy::port_forwarding,
                        routing::ForwardingStrategy::early_discarding}) {
    auto route = std::make_shared<const routing::Route>(routing::build_route(path, snap, 1, strategy));
    Packet p;
    p.route = route;
    p.remaining = route->header.size();
    NodeId at = 0;
    int hops = 0;
    for (;;) {
      const auto d = forward(p, [&](int port) { return snap.neighbor_at(at, port); });
      REQUIRE(d.action == ForwardDecision::Action::enqueue);
      CHECK_FALSE(d.diverged);
      ++hops;
      at = d.far_end;
      if (!snap.is_satellite(at)) break;
    }
    CHECK(at == snap.gs_node(1));
    CHECK(hops == static_cast<int>(route->header.size()));
    const auto d = forward(p, [&](int) { return kNoNode; });
    CHECK(*d.reason == DropReason::header_exhausted);
  }
}

TEST_CASE("stale header: early discarding stops at the first mismatch") {
  const auto before = line_with_spare(0.0);
  const auto after = rehomed_line(0.0);
  const routing::Path path{{0, 1, 2, 3}, 0.0};
  std::map<routing::ForwardingStrategy, int> hops;
  for (auto strategy : {routing::ForwardingStrategy::port_forwarding,
                        routing::ForwardingStrategy::early_discarding}) {
    auto route = std::make_shared<const routing::Route>(routing::build_route(path, before, 1, strategy));
    Packet p;
    p.route = route;
    p.remaining = route->header.size();
    NodeId at = 0;
    int n = 0;
    for (;;) {
      const auto d = forward(p, [&](int port) { return after.neighbor_at(at, port); });
      if (d.action == ForwardDecision::Action::drop) {
        if (strategy == routing::ForwardingStrategy::early_discarding) {
          CHECK(*d.reason == DropReason::stale_route);
          CHECK(at == 1);
        }
        break;
      }
      ++n;
      at = d.far_end;
      if (!after.is_satellite(at)) break;
    }
    hops[strategy] = n;
  }
  CHECK(hops[routing::ForwardingStrategy::port_forwarding] >
        hops[routing::ForwardingStrategy::early_discarding]);
}

TEST_CASE("uncongested line: latency is propagation plus service") {
  const std::vector<double> isl = {4021.5, 3977.25, 4100.125};
  const double gsl_km = 1234.5;
  StaticTopology source(testsupport::line_snapshot(4, isl, gsl_km));
  auto in = scaled(two_city_inputs(&source, 4), 2.4e6);  // one packet per 10 ms each way
  auto cfg = line_config(2.4e6, 1.4e7);
  RecordingSink log;
  const auto r = run(cfg, in, &log);

  double expect = 2.0 * gsl_km / astro::kSpeedOfLightKmS + 5.0 * 12000.0 / 1.4e7;
  for (double l : isl) expect += l / astro::kSpeedOfLightKmS;

  const auto launched = launch_times(log.records);
  int delivered = 0;
  for (const auto& rec : log.records) {
    if (rec.kind != EventKind::deliver) continue;
    ++delivered;
    CHECK(std::abs(rec.time - launched.at(rec.packet_id) - expect) <= 1e-9);
    CHECK(rec.value == 4.0);
  }
  CHECK(delivered > 500);
  CHECK(r.dropped == 0);
  CHECK(std::abs(r.average_latency - expect) <= 1e-9);
  CHECK(r.average_hops == 4.0);
  CHECK(r.launched == r.delivered + r.dropped + r.in_flight);
}

TEST_CASE("saturated uplink samples the link rate") {
  StaticTopology source(plain_line(2, 0.0));
  auto in = scaled(two_city_inputs(&source, 2), 4e6);  // 2e6 per direction
  auto cfg = line_config(4e6, 1e6);
  cfg.duration = 5.0;
  RecordingSink log;
  const auto r = run(cfg, in, &log);
  CHECK(r.drop_counts[static_cast<int>(DropReason::buffer_overflow)] > 0);
  int checked = 0;
  for (const auto& rec : log.records) {
    if (rec.kind != EventKind::link_sample || rec.node != 2 || rec.time < 1.5) continue;
    CHECK(std::abs(rec.value - 1e6) <= 12000.0);
    ++checked;
  }
  CHECK(checked >= 3);
  CHECK(r.launched == r.delivered + r.dropped + r.in_flight);
}

TEST_CASE("link switch delay") {
  using testsupport::gsl;
  using testsupport::isl;
  auto make = [](bool shortcut) {
    std::vector<topo::Link> links = {gsl(0, 0, 3, 900.0),
                                     isl(0, 1, 4000.0, topo::ports::kFore, topo::ports::kAft),
                                     isl(1, 2, 4000.0, topo::ports::kFore, topo::ports::kAft),
                                     gsl(2, 1, 3, 900.0)};
    if (shortcut) links.push_back(isl(0, 2, 1000.0, topo::ports::kRight, topo::ports::kLeft));
    return topo::TopologySnapshot(0.0, 3, 2, topo::BuilderKind::min_distance, links);
  };
  std::map<double, MetricsReport> by_delay;
  for (double delay : {0.0, 0.25}) {
    ScriptedTopology source;
    source.add(0.0, make(false));
    source.add(1.0, make(true));
    auto in = scaled(two_city_inputs(&source, 3), 2.4e6);
    auto cfg = line_config(2.4e6, 1.4e7);
    cfg.link_switch_delay = delay;
    by_delay[delay] = run(cfg, in);
  }
  const auto down = static_cast<int>(DropReason::link_down);
  CHECK(by_delay[0.0].drop_counts[down] == 0);
  CHECK(by_delay[0.0].dropped == 0);
  // 0.25 s of both flows at 100 packets/s hit the dark shortcut
  CHECK(by_delay[0.25].drop_counts[down] == doctest::Approx(50).epsilon(0.05));
  // the initial snapshot is live at once
  CHECK(by_delay[0.25].delivered > 0);
}

TEST_CASE("rehomed link: forwarding strategies diverge on in-flight packets") {
  std::map<routing::ForwardingStrategy, MetricsReport> rep;
  for (auto strategy : {routing::ForwardingStrategy::port_forwarding,
                        routing::ForwardingStrategy::early_discarding}) {
    ScriptedTopology source;
    source.add(0.0, line_with_spare(0.0));
    source.add(1.0, rehomed_line(1.0));
    auto in = scaled(two_city_inputs(&source, 5), 2.4e7);
    auto cfg = line_config(2.4e7, 2.4e7);
    cfg.link_switch_delay = 0.0;
    cfg.forwarding = strategy;
    rep[strategy] = run(cfg, in);
    CHECK(rep[strategy].launched ==
          rep[strategy].delivered + rep[strategy].dropped + rep[strategy].in_flight);
  }
  const auto& pf = rep[routing::ForwardingStrategy::port_forwarding];
  const auto& ed = rep[routing::ForwardingStrategy::early_discarding];
  CHECK(pf.stale_packets > 0);
  CHECK(ed.stale_packets > 0);
  CHECK(ed.drop_counts[static_cast<int>(DropReason::stale_route)] > 0);
  CHECK(pf.drop_counts[static_cast<int>(DropReason::stale_route)] == 0);
  CHECK(ed.stale_mean_hops <= pf.stale_mean_hops);
}

TEST_CASE("identical snapshots leave packets alone") {
  StaticTopology source(plain_line(4, 0.0));
  auto in = scaled(two_city_inputs(&source, 4), 2.4e6);
  const auto r = run(line_config(2.4e6, 1.4e7), in);
  CHECK(r.dropped == 0);
  CHECK(r.stale_packets == 0);
}

TEST_CASE("zero duration gives an empty report") {
  SimConfig c;
  c.duration = 0.0;
  const auto r = run(c, default_scenario());
  CHECK(r.launched == 0);
  CHECK(r.series.empty());
  CHECK(r == MetricsReport{});
}

TEST_CASE("config validation") {
  SimConfig c;
  CHECK_NOTHROW(c.validate());
  c.weight_refresh_interval = 1.5;
  CHECK_THROWS_AS(c.validate(), ValidationError);
  c = {};
  c.link_rate_fraction = 0.0;
  CHECK_THROWS_AS(c.validate(), ValidationError);
  c = {};
  c.k_paths = 0;
  CHECK_THROWS_AS(c.validate(), ValidationError);

  c = {};
  CHECK(c.link_rate() == doctest::Approx(4.2e7));
  CHECK(c.buffer_capacity_bits() == doctest::Approx(2.1e6));
  const auto s = SimConfig::stress();
  CHECK(s.link_rate() == doctest::Approx(4.2e7));
  CHECK(s.total_volume / *s.provisioning_volume == doctest::Approx(1.3));
}

TEST_CASE("Iridium runs conserve packets and repeat exactly") {
  const auto sc = default_scenario();
  for (auto routing : {routing::RoutingStrategy::baseline, routing::RoutingStrategy::lsnd,
                       routing::RoutingStrategy::ksnd}) {
    for (auto fwd : {routing::ForwardingStrategy::port_forwarding,
                     routing::ForwardingStrategy::early_discarding}) {
      SimConfig c;
      c.duration = 4.0;
      c.routing = routing;
      c.forwarding = fwd;
      c.seed = 17;
      std::ostringstream a_csv;
      std::ostringstream b_csv;
      CsvEventWriter wa(a_csv);
      CsvEventWriter wb(b_csv);
      const auto a = run(c, sc, &wa);
      const auto b = run(c, sc, &wb);
      CHECK(a.launched > 0);
      CHECK(a.launched == a.delivered + a.dropped + a.in_flight);
      CHECK(a == b);
      CHECK(a_csv.str() == b_csv.str());
    }
  }
}

TEST_CASE("seed changes path draws but not the offered load") {
  const auto sc = default_scenario();
  SimConfig c;
  c.duration = 3.0;
  c.seed = 1;
  const auto a = run(c, sc);
  c.seed = 2;
  const auto b = run(c, sc);
  CHECK(a.launched == b.launched);
}

}  // TEST_SUITE
