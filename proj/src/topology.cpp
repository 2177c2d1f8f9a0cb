#include "orbitnet/topology.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <string>

#include "orbitnet/errors.hpp"

namespace orbitnet::topology {

using astro::EciPosition;

std::string_view to_string(LinkKind kind) {
  switch (kind) {
    case LinkKind::intra_plane: return "intra_plane";
    case LinkKind::inter_plane: return "inter_plane";
    case LinkKind::gsl: return "gsl";
  }
  return "?";
}

std::string_view to_string(BuilderKind kind) {
  return kind == BuilderKind::min_distance ? "min_distance" : "line_of_sight";
}

TopologySnapshot::TopologySnapshot(double t, int num_satellites, int num_ground_stations,
                                   BuilderKind builder, std::vector<Link> links,
                                   std::vector<int> unanchored_stations)
    : t_(t),
      num_satellites_(num_satellites),
      num_ground_stations_(num_ground_stations),
      builder_(builder),
      links_(std::move(links)),
      unanchored_(std::move(unanchored_stations)) {
  ports_.assign(static_cast<std::size_t>(node_count()), {});
  std::vector<std::pair<NodeId, NodeId>> keys;
  keys.reserve(links_.size());
  for (std::size_t i = 0; i < links_.size(); ++i) {
    const Link& l = links_[i];
    if (l.u < 0 || l.v < 0 || l.u >= node_count() || l.v >= node_count()) {
      throw ContractError("link endpoint out of range");
    }
    if (l.u == l.v) throw ContractError("self-loop on node " + std::to_string(l.u));
    if (!(l.length > 0.0)) throw ContractError("link length must be positive");
    const bool u_sat = is_satellite(l.u), v_sat = is_satellite(l.v);
    if ((l.kind == LinkKind::gsl) != (u_sat != v_sat)) {
      throw ContractError("gsl links must join one satellite and one ground station");
    }
    if (l.kind == LinkKind::gsl && !u_sat) throw ContractError("gsl link must list the satellite first");
    keys.emplace_back(std::min(l.u, l.v), std::max(l.u, l.v));
    ports_[l.u].push_back({l.port_u, l.v, static_cast<int>(i)});
    ports_[l.v].push_back({l.port_v, l.u, static_cast<int>(i)});
  }
  std::sort(keys.begin(), keys.end());
  if (std::adjacent_find(keys.begin(), keys.end()) != keys.end()) {
    throw ContractError("duplicate link between the same node pair");
  }
  for (NodeId n = 0; n < node_count(); ++n) {
    auto& p = ports_[n];
    std::sort(p.begin(), p.end(), [](const PortBinding& a, const PortBinding& b) { return a.port < b.port; });
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (p[i].port < 0) throw ContractError("negative port index");
      if (i > 0 && p[i].port == p[i - 1].port) {
        throw ContractError("port " + std::to_string(p[i].port) + " of node " + std::to_string(n) +
                            " used by more than one link");
      }
    }
  }
}

std::span<const PortBinding> TopologySnapshot::ports(NodeId node) const {
  if (node < 0 || node >= node_count()) return {};
  return ports_[node];
}

NodeId TopologySnapshot::neighbor_at(NodeId node, int port) const {
  for (const auto& b : ports(node)) {
    if (b.port == port) return b.neighbor;
  }
  return kNoNode;
}

std::optional<int> TopologySnapshot::port_toward(NodeId from, NodeId to) const {
  for (const auto& b : ports(from)) {
    if (b.neighbor == to) return b.port;
  }
  return std::nullopt;
}

const Link* TopologySnapshot::link_between(NodeId a, NodeId b) const {
  for (const auto& p : ports(a)) {
    if (p.neighbor == b) return &links_[p.link];
  }
  return nullptr;
}

NodeId TopologySnapshot::anchor_of(int gs_index) const {
  const auto p = ports(gs_node(gs_index));
  return p.empty() ? kNoNode : p.front().neighbor;
}

std::vector<std::pair<NodeId, NodeId>> TopologySnapshot::edge_keys() const {
  std::vector<std::pair<NodeId, NodeId>> keys;
  keys.reserve(links_.size());
  for (const auto& l : links_) keys.emplace_back(std::min(l.u, l.v), std::max(l.u, l.v));
  std::sort(keys.begin(), keys.end());
  return keys;
}

double TopologySnapshot::average_link_length() const {
  if (links_.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& l : links_) sum += l.length;
  return sum / static_cast<double>(links_.size());
}

std::vector<EciPosition> satellite_positions(const Scenario& scenario, double t) {
  std::vector<EciPosition> out;
  out.reserve(scenario.satellites.size());
  for (const auto& s : scenario.satellites) out.push_back(astro::propagate(s.elements, t));
  return out;
}

namespace {

struct Candidate {
  NodeId a;
  NodeId b;
  LinkKind kind;
  int port_a;
  int port_b;
  double length;
};

// Accepts candidates shortest first; a candidate is skipped when its pair is
// already linked or either port is taken.
class LinkAllocator {
 public:
  explicit LinkAllocator(int nodes) : used_(static_cast<std::size_t>(nodes)) {}

  bool port_free(NodeId n, int port) const {
    const auto& u = used_[n];
    return std::find(u.begin(), u.end(), port) == u.end();
  }

  bool linked(NodeId a, NodeId b) const {
    const auto key = std::minmax(a, b);
    return std::binary_search(pairs_.begin(), pairs_.end(), std::pair<NodeId, NodeId>(key));
  }

  bool try_add(const Candidate& c) {
    if (linked(c.a, c.b) || !port_free(c.a, c.port_a) || !port_free(c.b, c.port_b)) return false;
    used_[c.a].push_back(c.port_a);
    used_[c.b].push_back(c.port_b);
    const auto key = std::pair<NodeId, NodeId>(std::minmax(c.a, c.b));
    pairs_.insert(std::upper_bound(pairs_.begin(), pairs_.end(), key), key);
    Link l;
    // Lower id first; satellites precede stations, so GSLs list the satellite.
    const bool swap = c.a > c.b;
    l.u = swap ? c.b : c.a;
    l.v = swap ? c.a : c.b;
    l.port_u = swap ? c.port_b : c.port_a;
    l.port_v = swap ? c.port_a : c.port_b;
    l.kind = c.kind;
    l.length = c.length;
    links_.push_back(l);
    return true;
  }

  void accept_sorted(std::vector<Candidate>& candidates) {
    std::sort(candidates.begin(), candidates.end(), [](const Candidate& x, const Candidate& y) {
      if (x.length != y.length) return x.length < y.length;
      const auto kx = std::minmax(x.a, x.b), ky = std::minmax(y.a, y.b);
      if (kx != ky) return kx < ky;
      if (x.a != y.a) return x.a < y.a;
      return x.port_a < y.port_a;
    });
    for (const auto& c : candidates) try_add(c);
  }

  std::vector<Link> take_links() { return std::move(links_); }

 private:
  std::vector<std::vector<int>> used_;
  std::vector<std::pair<NodeId, NodeId>> pairs_;
  std::vector<Link> links_;
};

std::vector<std::vector<int>> plane_members(const Scenario& s) {
  std::vector<std::vector<int>> planes(static_cast<std::size_t>(s.num_planes));
  for (int i = 0; i < s.satellite_count(); ++i) planes[s.satellites[i].plane].push_back(i);
  return planes;
}

// True when `other` lies ahead of `self` along the direction of motion.
bool is_ahead(const Satellite& self, const EciPosition& p_self, const EciPosition& p_other) {
  const auto& el = self.elements;
  const double nx = std::sin(el.inclination) * std::sin(el.raan);
  const double ny = -std::sin(el.inclination) * std::cos(el.raan);
  const double nz = std::cos(el.inclination);
  const double cx = p_self.y * p_other.z - p_self.z * p_other.y;
  const double cy = p_self.z * p_other.x - p_self.x * p_other.z;
  const double cz = p_self.x * p_other.y - p_self.y * p_other.x;
  return cx * nx + cy * ny + cz * nz > 0.0;
}

int nearest_in(const std::vector<int>& members, int self, const std::vector<EciPosition>& pos,
               const std::vector<int>& exclude = {}) {
  int best = -1;
  double best_d = std::numeric_limits<double>::infinity();
  for (int j : members) {
    if (j == self || std::find(exclude.begin(), exclude.end(), j) != exclude.end()) continue;
    const double d = astro::separation(pos[self], pos[j]);
    if (d < best_d || (d == best_d && j < best)) {
      best = j;
      best_d = d;
    }
  }
  return best;
}

std::vector<std::pair<int, EciPosition>> labelled(const std::vector<EciPosition>& pos) {
  std::vector<std::pair<int, EciPosition>> out;
  out.reserve(pos.size());
  for (std::size_t i = 0; i < pos.size(); ++i) out.emplace_back(static_cast<int>(i), pos[i]);
  return out;
}

Candidate intra_candidate(const Scenario& s, const std::vector<EciPosition>& pos, int i, int j) {
  const bool ahead = is_ahead(s.satellites[i], pos[i], pos[j]);
  return {i, j, LinkKind::intra_plane, ahead ? ports::kFore : ports::kAft,
          ahead ? ports::kAft : ports::kFore, astro::separation(pos[i], pos[j])};
}

Candidate inter_candidate(const std::vector<EciPosition>& pos, int i, int j, int direction) {
  return {i, j, LinkKind::inter_plane, direction > 0 ? ports::kRight : ports::kLeft,
          direction > 0 ? ports::kLeft : ports::kRight, astro::separation(pos[i], pos[j])};
}

}  // namespace

TopologySnapshot build_min_distance(const Scenario& scenario, double t) {
  const auto pos = satellite_positions(scenario, t);
  const auto planes = plane_members(scenario);
  const int sats = scenario.satellite_count();
  const int stations = scenario.ground_station_count();

  std::vector<Candidate> candidates;
  for (int i = 0; i < sats; ++i) {
    const Satellite& sat = scenario.satellites[i];
    const auto& own = planes[sat.plane];

    const int first = nearest_in(own, i, pos);
    const int second = first < 0 ? -1 : nearest_in(own, i, pos, {first});
    for (int j : {first, second}) {
      if (j >= 0) candidates.push_back(intra_candidate(scenario, pos, i, j));
    }
    if (scenario.uniform_planes && own.size() >= 3) {
      const int m = static_cast<int>(own.size());
      auto slot_of = [&](int n) { return scenario.satellites[n].slot; };
      const int next = (sat.slot + 1) % m, prev = (sat.slot + m - 1) % m;
      const bool ok = (slot_of(first) == next && slot_of(second) == prev) ||
                      (slot_of(first) == prev && slot_of(second) == next);
      if (!ok) {
        throw ContractError("satellite " + std::to_string(i) +
                            ": closest in-plane satellites are not its slot neighbours");
      }
    }

    for (int direction : {+1, -1}) {
      const int plane = scenario.adjacent_plane(sat.plane, direction);
      if (plane < 0) continue;
      const int j = nearest_in(planes[plane], i, pos);
      if (j >= 0) candidates.push_back(inter_candidate(pos, i, j, direction));
    }
  }

  std::vector<int> unanchored;
  const auto ids = labelled(pos);
  for (int g = 0; g < stations; ++g) {
    const auto& loc = scenario.ground_stations[g].location;
    try {
      const int j = nearest_satellite(loc, ids, t);
      candidates.push_back({j, scenario.gs_node(g), LinkKind::gsl, ground_port(g), ports::kUplink,
                            astro::separation(astro::ground_position(loc, t), pos[j])});
    } catch (const NoVisibleSatelliteError&) {
      unanchored.push_back(g);
    }
  }

  LinkAllocator alloc(sats + stations);
  alloc.accept_sorted(candidates);
  return TopologySnapshot(t, sats, stations, BuilderKind::min_distance, alloc.take_links(),
                          std::move(unanchored));
}

TopologySnapshot build_los(const TopologySnapshot& prev, const Scenario& scenario, double t) {
  const int sats = scenario.satellite_count();
  const int stations = scenario.ground_station_count();
  if (prev.satellite_count() != sats || prev.ground_station_count() != stations) {
    throw ContractError("build_los: previous snapshot does not match the scenario");
  }
  const auto pos = satellite_positions(scenario, t);
  const auto planes = plane_members(scenario);
  const double margin = scenario.atmosphere_margin_km;
  std::vector<EciPosition> ground(static_cast<std::size_t>(stations));
  for (int g = 0; g < stations; ++g) {
    ground[g] = astro::ground_position(scenario.ground_stations[g].location, t);
  }

  LinkAllocator alloc(sats + stations);
  // Retention pass.
  for (const Link& l : prev.links()) {
    if (l.kind == LinkKind::gsl) {
      const int g = l.v - sats;
      if (!astro::above_horizon(ground[g], pos[l.u])) continue;
      alloc.try_add({l.u, l.v, l.kind, l.port_u, l.port_v, astro::separation(ground[g], pos[l.u])});
      continue;
    }
    const Satellite& su = scenario.satellites[l.u];
    const Satellite& sv = scenario.satellites[l.v];
    if (l.kind == LinkKind::intra_plane && su.plane != sv.plane) continue;
    if (l.kind == LinkKind::inter_plane) {
      const int direction = l.port_u == ports::kRight ? +1 : -1;
      if (scenario.adjacent_plane(su.plane, direction) != sv.plane) continue;
    }
    if (!astro::has_line_of_sight(pos[l.u], pos[l.v], margin)) continue;
    alloc.try_add({l.u, l.v, l.kind, l.port_u, l.port_v, astro::separation(pos[l.u], pos[l.v])});
  }

  // Refill every empty port from the eligible class, closest first.
  std::vector<Candidate> candidates;
  for (int i = 0; i < sats; ++i) {
    const Satellite& sat = scenario.satellites[i];
    for (int port : {ports::kFore, ports::kAft}) {
      if (!alloc.port_free(i, port)) continue;
      for (int j : planes[sat.plane]) {
        if (j == i || !astro::has_line_of_sight(pos[i], pos[j], margin)) continue;
        Candidate c = intra_candidate(scenario, pos, i, j);
        if (c.port_a == port) candidates.push_back(c);
      }
    }
    for (int direction : {+1, -1}) {
      const int port = direction > 0 ? ports::kRight : ports::kLeft;
      const int plane = scenario.adjacent_plane(sat.plane, direction);
      if (plane < 0 || !alloc.port_free(i, port)) continue;
      for (int j : planes[plane]) {
        if (!astro::has_line_of_sight(pos[i], pos[j], margin)) continue;
        candidates.push_back(inter_candidate(pos, i, j, direction));
      }
    }
  }
  for (int g = 0; g < stations; ++g) {
    if (!alloc.port_free(scenario.gs_node(g), ports::kUplink)) continue;
    for (int j = 0; j < sats; ++j) {
      if (!astro::above_horizon(ground[g], pos[j])) continue;
      candidates.push_back({j, scenario.gs_node(g), LinkKind::gsl, ground_port(g), ports::kUplink,
                            astro::separation(ground[g], pos[j])});
    }
  }
  alloc.accept_sorted(candidates);
  std::vector<Link> links = alloc.take_links();
  std::vector<bool> anchored(static_cast<std::size_t>(stations), false);
  for (const Link& l : links) {
    if (l.kind == LinkKind::gsl) anchored[l.v - sats] = true;
  }
  std::vector<int> unanchored;
  for (int g = 0; g < stations; ++g) {
    if (!anchored[g]) unanchored.push_back(g);
  }
  return TopologySnapshot(t, sats, stations, BuilderKind::line_of_sight, std::move(links),
                          std::move(unanchored));
}

const TopologySnapshot& TopologyBuilder::next(double t) {
  if (!current_ || kind_ == BuilderKind::min_distance) {
    current_ = build_min_distance(*scenario_, t);
  } else {
    current_ = build_los(*current_, *scenario_, t);
  }
  return *current_;
}

std::size_t diff_snapshots(const TopologySnapshot& a, const TopologySnapshot& b) {
  if (a.satellite_count() != b.satellite_count() ||
      a.ground_station_count() != b.ground_station_count()) {
    throw ContractError("diff_snapshots: node sets differ");
  }
  const auto ka = a.edge_keys(), kb = b.edge_keys();
  std::vector<std::pair<NodeId, NodeId>> diff;
  std::set_symmetric_difference(ka.begin(), ka.end(), kb.begin(), kb.end(), std::back_inserter(diff));
  return diff.size();
}

SeriesSummary summarize_series(std::span<const double> values) {
  SeriesSummary s;
  if (values.empty()) return s;
  double sum = 0.0;
  s.min = values.front();
  s.max = values.front();
  for (double v : values) {
    sum += v;
    s.min = std::min(s.min, v);
    s.max = std::max(s.max, v);
  }
  s.mean = sum / static_cast<double>(values.size());
  if (values.size() > 1) {
    double sq = 0.0;
    for (double v : values) sq += (v - s.mean) * (v - s.mean);
    s.variance = sq / static_cast<double>(values.size() - 1);
  }
  return s;
}

void StabilityAccumulator::add(const TopologySnapshot& snap) {
  auto edges = snap.edge_keys();
  auto& r = report_;
  if (!r.times.empty()) {
    if (snap.node_count() != nodes_) throw ContractError("stability_series: node sets differ");
    if (r.times.size() >= 2) {
      const double step = r.times[1] - r.times[0];
      const double expected = r.times.back() + step;
      if (std::abs(snap.t() - expected) > 1e-9 * std::max(1.0, std::abs(expected))) {
        throw ContractError("stability_series: snapshots are not uniformly spaced");
      }
    }
  }
  double changes = 0.0;
  if (!r.times.empty()) {
    std::vector<std::pair<NodeId, NodeId>> diff;
    std::set_symmetric_difference(prev_edges_.begin(), prev_edges_.end(), edges.begin(),
                                  edges.end(), std::back_inserter(diff));
    changes = static_cast<double>(diff.size());
  }
  if (r.times.empty() || changes > 0.0) {
    if (current_run_ > 0.0) r.stability_interval_lengths.push_back(current_run_);
    current_run_ = 0.0;
  }
  current_run_ += 1.0;
  nodes_ = snap.node_count();
  r.times.push_back(snap.t());
  r.average_link_length.push_back(snap.average_link_length());
  r.link_change_count.push_back(changes);
  prev_edges_ = std::move(edges);
}

StabilityReport StabilityAccumulator::report() const {
  if (report_.times.empty()) throw ContractError("stability_series: no snapshots");
  StabilityReport r = report_;
  r.stability_interval_lengths.push_back(current_run_);
  r.link_length = summarize_series(r.average_link_length);
  r.link_changes = summarize_series(r.link_change_count);
  r.stability_intervals = summarize_series(r.stability_interval_lengths);
  return r;
}

StabilityReport stability_series(std::span<const TopologySnapshot> snapshots) {
  StabilityAccumulator acc;
  for (const auto& s : snapshots) acc.add(s);
  return acc.report();
}

void write_snapshot_csv(std::ostream& out, const TopologySnapshot& snap, bool header) {
  if (header) out << "t,u,v,kind,length_km,port_u,port_v\n";
  char buf[64];
  for (const auto& l : snap.links()) {
    std::snprintf(buf, sizeof buf, "%.17g", l.length);
    out << snap.t() << ',' << l.u << ',' << l.v << ',' << to_string(l.kind) << ',' << buf << ','
        << l.port_u << ',' << l.port_v << '\n';
  }
}

}  // namespace orbitnet::topology
