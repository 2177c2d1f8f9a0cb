#include "orbitnet/routing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <string>

#include "orbitnet/errors.hpp"

namespace orbitnet::routing {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

using HeapItem = std::pair<double, NodeId>;
using MinHeap = std::priority_queue<HeapItem, std::vector<HeapItem>, std::greater<>>;

bool nearly_equal(double a, double b) {
  return std::abs(a - b) <= 1e-12 * std::max({1.0, std::abs(a), std::abs(b)});
}

WeightedDigraph reversed(const WeightedDigraph& g) {
  WeightedDigraph r(g.node_count());
  for (NodeId u = 0; u < g.node_count(); ++u) {
    for (const auto& a : g.arcs(u)) r.add_arc(a.to, u, a.weight);
  }
  return r;
}

bool lexicographically_less(const Path& a, const Path& b) {
  if (a.weight != b.weight) return a.weight < b.weight;
  return a.nodes < b.nodes;
}

}  // namespace

std::string_view to_string(ForwardingStrategy s) {
  return s == ForwardingStrategy::port_forwarding ? "port_forwarding" : "early_discarding";
}

std::string_view to_string(RoutingStrategy s) {
  switch (s) {
    case RoutingStrategy::baseline: return "baseline";
    case RoutingStrategy::lsnd: return "lsnd";
    case RoutingStrategy::ksnd: return "ksnd";
  }
  return "?";
}

double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

// --- telemetry --------------------------------------------------------------

double ema_alpha(int periods) {
  if (periods < 1) throw ValidationError("EMA period count must be >= 1");
  return 2.0 / (periods + 1.0);
}

LinkTelemetry update_ema(LinkTelemetry tel, double sample, double t) {
  if (sample < 0.0) throw ContractError("update_ema: negative sample");
  if (tel.initialized && t < tel.last_sample_time) throw ContractError("update_ema: time went backwards");
  tel.ema_utilization =
      tel.initialized ? tel.alpha * sample + (1.0 - tel.alpha) * tel.ema_utilization : sample;
  tel.initialized = true;
  tel.last_sample_time = t;
  return tel;
}

const LinkTelemetry& TelemetryView::find(NodeId from, NodeId to) const {
  static const LinkTelemetry kInitial{};
  auto it = links.find(link_key(from, to));
  return it == links.end() ? kInitial : it->second;
}

void TelemetryStore::record_sample(NodeId from, NodeId to, double sample_bps, double t) {
  auto [it, inserted] = live_.try_emplace(link_key(from, to));
  if (inserted) it->second.alpha = alpha_;
  it->second = update_ema(it->second, sample_bps, t);
}

void TelemetryStore::publish(double t) {
  TelemetryView v;
  v.links = live_;
  v.published_at = t;
  pending_.emplace_back(t + trip_delay_, std::move(v));
}

const TelemetryView& TelemetryStore::view_at(double t) {
  while (!pending_.empty() && pending_.front().first <= t) {
    visible_ = std::move(pending_.front().second);
    pending_.pop_front();
  }
  return visible_;
}

const LinkTelemetry* TelemetryStore::current(NodeId from, NodeId to) const {
  auto it = live_.find(link_key(from, to));
  return it == live_.end() ? nullptr : &it->second;
}

// --- weights and graphs -------------------------------------------------------

double link_weight(double length_km, const LinkTelemetry* tel, WeightMode mode, double link_rate) {
  if (!(length_km > 0.0)) throw ContractError("link_weight: length must be positive");
  if (mode != WeightMode::congestion_aware) return length_km;
  if (tel == nullptr) throw ContractError("link_weight: congestion-aware mode needs telemetry");
  if (!(link_rate > 0.0)) throw ContractError("link_weight: link rate must be positive");
  const double ratio = std::clamp(tel->ema_utilization / link_rate, kWeightFloor, 1.0);
  return ratio * length_km;
}

void WeightedDigraph::add_arc(NodeId from, NodeId to, double weight) {
  adj_[from].push_back({to, weight});
}

double WeightedDigraph::arc_weight(NodeId from, NodeId to) const {
  for (const auto& a : adj_[from]) {
    if (a.to == to) return a.weight;
  }
  return kInf;
}

WeightedDigraph satellite_graph(const topology::TopologySnapshot& snap, const ArcWeightFn& weight,
                                bool include_ground) {
  WeightedDigraph g(include_ground ? snap.node_count() : snap.satellite_count());
  for (const auto& l : snap.links()) {
    if (l.kind == topology::LinkKind::gsl && !include_ground) continue;
    g.add_arc(l.u, l.v, weight(l, l.u, l.v));
    g.add_arc(l.v, l.u, weight(l, l.v, l.u));
  }
  return g;
}

ArcWeightFn length_weights() {
  return [](const topology::Link& l, NodeId, NodeId) { return l.length; };
}

// --- shortest paths -------------------------------------------------------------

std::vector<double> shortest_distances(const WeightedDigraph& g, NodeId source) {
  std::vector<double> dist(static_cast<std::size_t>(g.node_count()), kInf);
  MinHeap heap;
  dist[source] = 0.0;
  heap.push({0.0, source});
  while (!heap.empty()) {
    auto [d, u] = heap.top();
    heap.pop();
    if (d > dist[u]) continue;
    for (const auto& a : g.arcs(u)) {
      const double nd = d + a.weight;
      if (nd < dist[a.to]) {
        dist[a.to] = nd;
        heap.push({nd, a.to});
      }
    }
  }
  return dist;
}

Path shortest_path(const WeightedDigraph& g, NodeId ingress, NodeId egress) {
  if (ingress < 0 || egress < 0 || ingress >= g.node_count() || egress >= g.node_count()) {
    throw ContractError("shortest_path: endpoint out of range");
  }
  if (ingress == egress) return {{ingress}, 0.0};
  const auto from_src = shortest_distances(g, ingress);
  if (from_src[egress] == kInf) {
    throw NoRouteError("no route from " + std::to_string(ingress) + " to " + std::to_string(egress));
  }
  const auto to_dst = shortest_distances(reversed(g), egress);
  const double total = from_src[egress];

  // Walk forward taking the smallest-id successor that stays on a shortest
  // path; this yields the lexicographically smallest optimal sequence.
  Path p;
  p.nodes.push_back(ingress);
  NodeId u = ingress;
  while (u != egress) {
    NodeId next = kNoNode;
    for (const auto& a : g.arcs(u)) {
      if (!nearly_equal(from_src[u] + a.weight, from_src[a.to])) continue;
      if (!nearly_equal(from_src[a.to] + to_dst[a.to], total)) continue;
      if (next == kNoNode || a.to < next) next = a.to;
    }
    if (next == kNoNode || p.nodes.size() > static_cast<std::size_t>(g.node_count())) {
      throw NumericError("shortest_path: could not reconstruct the optimal path");
    }
    p.weight += g.arc_weight(u, next);
    p.nodes.push_back(next);
    u = next;
  }
  return p;
}

Path shortest_path(const topology::TopologySnapshot& snap, int src_gs, int dst_gs,
                   const WeightedDigraph& g) {
  const NodeId a = snap.anchor_of(src_gs);
  const NodeId b = snap.anchor_of(dst_gs);
  if (a == kNoNode || b == kNoNode) {
    throw NoRouteError("ground station without a satellite link");
  }
  return shortest_path(g, a, b);
}

// --- node-disjoint paths ----------------------------------------------------------

namespace {

// Residual network for unit-capacity min-cost flow.
class FlowNetwork {
 public:
  struct Edge {
    int to;
    int cap;
    double cost;
    int rev;
    bool original;
  };

  explicit FlowNetwork(int n) : adj_(static_cast<std::size_t>(n)) {}

  void add_edge(int from, int to, int cap, double cost) {
    adj_[from].push_back({to, cap, cost, static_cast<int>(adj_[to].size()), true});
    adj_[to].push_back({from, 0, -cost, static_cast<int>(adj_[from].size()) - 1, false});
  }

  // Successive shortest paths with Johnson potentials; returns units pushed.
  int min_cost_flow(int s, int t, int max_units) {
    const int n = static_cast<int>(adj_.size());
    std::vector<double> potential(static_cast<std::size_t>(n), 0.0);
    std::vector<double> dist(static_cast<std::size_t>(n));
    std::vector<int> prev_node(static_cast<std::size_t>(n)), prev_edge(static_cast<std::size_t>(n));
    int pushed = 0;
    while (pushed < max_units) {
      std::fill(dist.begin(), dist.end(), kInf);
      dist[s] = 0.0;
      MinHeap heap;
      heap.push({0.0, s});
      while (!heap.empty()) {
        auto [d, u] = heap.top();
        heap.pop();
        if (d > dist[u]) continue;
        for (int i = 0; i < static_cast<int>(adj_[u].size()); ++i) {
          const Edge& e = adj_[u][i];
          if (e.cap <= 0) continue;
          const double reduced = std::max(0.0, e.cost + potential[u] - potential[e.to]);
          const double nd = d + reduced;
          if (nd < dist[e.to]) {
            dist[e.to] = nd;
            prev_node[e.to] = u;
            prev_edge[e.to] = i;
            heap.push({nd, e.to});
          }
        }
      }
      if (dist[t] == kInf) break;
      for (int v = 0; v < n; ++v) {
        if (dist[v] < kInf) potential[v] += dist[v];
      }
      for (int v = t; v != s; v = prev_node[v]) {
        Edge& e = adj_[prev_node[v]][prev_edge[v]];
        e.cap -= 1;
        adj_[v][e.rev].cap += 1;
      }
      ++pushed;
    }
    return pushed;
  }

  std::vector<Edge>& edges(int u) { return adj_[u]; }

 private:
  std::vector<std::vector<Edge>> adj_;
};

}  // namespace

std::vector<Path> node_disjoint_paths(const WeightedDigraph& g, NodeId ingress, NodeId egress,
                                      int k) {
  if (k < 1) throw ContractError("node_disjoint_paths: k must be >= 1");
  const int n = g.node_count();
  if (ingress < 0 || egress < 0 || ingress >= n || egress >= n) {
    throw ContractError("node_disjoint_paths: endpoint out of range");
  }
  if (ingress == egress) return {Path{{ingress}, 0.0}};

  // v_in = 2v, v_out = 2v + 1; interior nodes pass at most one unit.
  FlowNetwork net(2 * n);
  for (NodeId v = 0; v < n; ++v) {
    const int cap = (v == ingress || v == egress) ? k : 1;
    net.add_edge(2 * v, 2 * v + 1, cap, 0.0);
  }
  std::vector<std::pair<int, int>> arc_index;  // (net node, edge idx) of each original arc
  for (NodeId u = 0; u < n; ++u) {
    for (const auto& a : g.arcs(u)) {
      if (a.to == ingress || u == egress) continue;
      net.add_edge(2 * u + 1, 2 * a.to, 1, a.weight);
    }
  }
  const int source = 2 * ingress + 1;
  const int sink = 2 * egress;
  const int units = net.min_cost_flow(source, sink, k);
  if (units == 0) {
    throw NoRouteError("no route from " + std::to_string(ingress) + " to " + std::to_string(egress));
  }

  std::vector<Path> paths;
  for (int unit = 0; unit < units; ++unit) {
    Path p;
    p.nodes.push_back(ingress);
    int at = source;
    while (at != sink) {
      bool moved = false;
      for (auto& e : net.edges(at)) {
        // A saturated link arc (v_out -> w_in) still carrying undecomposed flow.
        if (!e.original || e.cap != 0 || e.to % 2 != 0) continue;
        auto& back = net.edges(e.to)[e.rev];
        if (back.cap <= 0) continue;
        back.cap -= 1;  // consume this unit of flow
        const NodeId v = e.to / 2;
        p.weight += e.cost;
        p.nodes.push_back(v);
        at = (v == egress) ? sink : 2 * v + 1;
        moved = true;
        break;
      }
      if (!moved) throw NumericError("node_disjoint_paths: flow decomposition failed");
    }
    paths.push_back(std::move(p));
  }
  std::sort(paths.begin(), paths.end(), lexicographically_less);
  return paths;
}

std::vector<double> selection_probabilities(std::span<const Path> paths) {
  if (paths.empty()) throw ContractError("select_path: no candidate paths");
  const std::size_t k = paths.size();
  if (k == 1) return {1.0};
  double total = 0.0;
  for (const auto& p : paths) total += p.weight;
  std::vector<double> probs(k, 1.0 / static_cast<double>(k));
  if (!(total > 0.0)) return probs;
  double q_sum = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    probs[i] = 1.0 - paths[i].weight / total;
    q_sum += probs[i];
  }
  for (double& p : probs) p /= q_sum;
  return probs;
}

std::size_t select_path(std::span<const Path> paths, Rng& rng) {
  const auto probs = selection_probabilities(paths);
  if (probs.size() == 1) return 0;
  const double u = uniform01(rng);
  double acc = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    acc += probs[i];
    if (u < acc) return i;
  }
  return probs.size() - 1;
}

// --- headers -----------------------------------------------------------------------

RouteHeader build_header(const Path& path, const topology::TopologySnapshot& snap, int dst_gs,
                         ForwardingStrategy strategy) {
  if (path.nodes.empty()) throw ContractError("build_header: empty path");
  RouteHeader h;
  h.strategy = strategy;
  const bool with_ids = strategy == ForwardingStrategy::early_discarding;
  auto hop = [&](NodeId from, NodeId to) {
    const auto port = snap.port_toward(from, to);
    if (!port) {
      throw ContractError("build_header: no link " + std::to_string(from) + " -> " +
                          std::to_string(to) + " in snapshot");
    }
    h.entries.push_back({*port, with_ids ? to : kNoNode});
  };
  for (std::size_t i = 0; i + 1 < path.nodes.size(); ++i) hop(path.nodes[i], path.nodes[i + 1]);
  hop(path.nodes.back(), snap.gs_node(dst_gs));
  std::reverse(h.entries.begin(), h.entries.end());
  return h;
}

Route build_route(const Path& path, const topology::TopologySnapshot& snap, int dst_gs,
                  ForwardingStrategy strategy) {
  Route r;
  r.header = build_header(path, snap, dst_gs, strategy);
  r.path = path.nodes;
  r.planned.assign(path.nodes.begin() + 1, path.nodes.end());
  r.planned.push_back(snap.gs_node(dst_gs));
  std::reverse(r.planned.begin(), r.planned.end());
  return r;
}

DecodedRoute decode_header(const RouteHeader& header, const topology::TopologySnapshot& snap,
                           NodeId ingress) {
  DecodedRoute r;
  r.satellites.push_back(ingress);
  NodeId at = ingress;
  for (auto it = header.entries.rbegin(); it != header.entries.rend(); ++it) {
    const NodeId next = snap.neighbor_at(at, it->port);
    if (next == kNoNode) throw ContractError("decode_header: port " + std::to_string(it->port) + " absent");
    if (header.strategy == ForwardingStrategy::early_discarding && next != it->next_node) {
      throw ContractError("decode_header: recorded satellite does not match the link");
    }
    if (!snap.is_satellite(next)) {
      if (std::next(it) != header.entries.rend()) {
        throw ContractError("decode_header: reached a ground station before the last entry");
      }
      r.ground_station = next;
      return r;
    }
    r.satellites.push_back(next);
    at = next;
  }
  throw ContractError("decode_header: header does not end at a ground station");
}

// --- controller ----------------------------------------------------------------------

void RouteController::set_topology(std::shared_ptr<const topology::TopologySnapshot> snap) {
  snap_ = std::move(snap);
  invalidate();
}

void RouteController::set_weights(const TelemetryView& view) {
  weights_ = view;
  invalidate();
}

void RouteController::invalidate() {
  graph_.reset();
  cache_.clear();
  if (snap_) {
    const auto g = static_cast<std::size_t>(snap_->ground_station_count());
    cache_.resize(g * g);
  }
}

RouteController::Entry& RouteController::entry(int src_gs, int dst_gs) {
  if (!snap_) throw ContractError("RouteController: no topology");
  const auto g = static_cast<std::size_t>(snap_->ground_station_count());
  Entry& e = cache_[static_cast<std::size_t>(src_gs) * g + static_cast<std::size_t>(dst_gs)];
  if (e.computed) return e;
  e.computed = true;

  const NodeId a = snap_->anchor_of(src_gs);
  const NodeId b = snap_->anchor_of(dst_gs);
  if (a == kNoNode || b == kNoNode) return e;

  if (!graph_) {
    ArcWeightFn w;
    if (cfg_.routing == RoutingStrategy::ksnd) {
      w = [this](const topology::Link& l, NodeId from, NodeId to) {
        return link_weight(l.length, &weights_.find(from, to), WeightMode::congestion_aware,
                           cfg_.link_rate);
      };
    } else {
      w = length_weights();
    }
    graph_ = std::make_unique<WeightedDigraph>(satellite_graph(*snap_, w));
  }
  try {
    if (cfg_.routing == RoutingStrategy::baseline) {
      e.paths.push_back(shortest_path(*graph_, a, b));
    } else {
      e.paths = node_disjoint_paths(*graph_, a, b, cfg_.k_paths);
    }
  } catch (const NoRouteError&) {
    e.paths.clear();
    return e;
  }
  const auto probs = selection_probabilities(e.paths);
  double acc = 0.0;
  for (std::size_t i = 0; i < e.paths.size(); ++i) {
    acc += probs[i];
    e.cumulative.push_back(acc);
    e.routes.push_back(
        std::make_shared<const Route>(build_route(e.paths[i], *snap_, dst_gs, cfg_.forwarding)));
  }
  return e;
}

const std::vector<Path>& RouteController::paths(int src_gs, int dst_gs) {
  return entry(src_gs, dst_gs).paths;
}

std::shared_ptr<const Route> RouteController::route(int src_gs, int dst_gs, Rng& rng) {
  Entry& e = entry(src_gs, dst_gs);
  if (e.paths.empty()) return nullptr;
  if (e.paths.size() == 1) return e.routes.front();
  const double u = uniform01(rng);
  for (std::size_t i = 0; i < e.cumulative.size(); ++i) {
    if (u < e.cumulative[i]) return e.routes[i];
  }
  return e.routes.back();
}

}  // namespace orbitnet::routing
