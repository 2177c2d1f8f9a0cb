#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <memory>
#include <random>
#include <span>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "orbitnet/topology.hpp"

namespace orbitnet::routing {

enum class ForwardingStrategy { port_forwarding, early_discarding };
enum class RoutingStrategy { baseline, lsnd, ksnd };
enum class WeightMode { baseline, lsnd, congestion_aware };

std::string_view to_string(ForwardingStrategy s);
std::string_view to_string(RoutingStrategy s);

using Rng = std::mt19937_64;

/// Uniform draw in [0, 1) with 53 bits, independent of the standard
/// library's distribution implementations.
double uniform01(Rng& rng);

// ---------------------------------------------------------------------------
// Telemetry

struct LinkTelemetry {
  double ema_utilization = 0.0;  // bit/s
  double last_sample_time = 0.0;
  double alpha = 0.2;
  bool initialized = false;
};

/// Smoothing factor 2 / (N + 1) for an N-period moving average.
double ema_alpha(int periods);

/// ema <- alpha * sample + (1 - alpha) * ema. The first sample is copied in.
LinkTelemetry update_ema(LinkTelemetry tel, double sample, double t);

/// Directed-link key (from, to).
constexpr std::uint64_t link_key(NodeId from, NodeId to) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(from)) << 32) |
         static_cast<std::uint32_t>(to);
}

/// EMA values as the controller sees them at some instant.
struct TelemetryView {
  std::unordered_map<std::uint64_t, LinkTelemetry> links;
  double published_at = -1.0;  // sample time; -1 when nothing has arrived yet

  /// Telemetry for a directed link; links never sampled read as the initial
  /// state (EMA 0).
  const LinkTelemetry& find(NodeId from, NodeId to) const;
};

/// Per-directed-link EMA store, written once per sampling interval by the
/// engine. Each publication becomes readable after the trip delay.
class TelemetryStore {
 public:
  TelemetryStore(double alpha, double trip_delay) : alpha_(alpha), trip_delay_(trip_delay) {}

  void record_sample(NodeId from, NodeId to, double sample_bps, double t);
  void publish(double t);
  /// Latest publication whose visibility time is <= t.
  const TelemetryView& view_at(double t);
  const LinkTelemetry* current(NodeId from, NodeId to) const;

 private:
  double alpha_;
  double trip_delay_;
  std::unordered_map<std::uint64_t, LinkTelemetry> live_;
  std::deque<std::pair<double, TelemetryView>> pending_;  // (visible_at, view)
  TelemetryView visible_;
};

// ---------------------------------------------------------------------------
// Weights and graphs

inline constexpr double kWeightFloor = 1e-6;

/// baseline / lsnd: the link length. congestion_aware: utilization / rate
/// times length, with the ratio clamped to [kWeightFloor, 1].
double link_weight(double length_km, const LinkTelemetry* tel, WeightMode mode, double link_rate);

class WeightedDigraph {
 public:
  struct Arc {
    NodeId to;
    double weight;
  };

  explicit WeightedDigraph(int nodes = 0) : adj_(static_cast<std::size_t>(nodes)) {}

  void add_arc(NodeId from, NodeId to, double weight);
  int node_count() const { return static_cast<int>(adj_.size()); }
  std::span<const Arc> arcs(NodeId from) const { return adj_[from]; }
  /// Weight of from->to; +inf when absent.
  double arc_weight(NodeId from, NodeId to) const;

 private:
  std::vector<std::vector<Arc>> adj_;
};

using ArcWeightFn = std::function<double(const topology::Link&, NodeId from, NodeId to)>;

/// Directed graph over the snapshot's satellites (both directions of every
/// ISL). With `include_ground`, GSLs and station nodes are added too.
WeightedDigraph satellite_graph(const topology::TopologySnapshot& snap, const ArcWeightFn& weight,
                                bool include_ground = false);

/// Length weights in both directions.
ArcWeightFn length_weights();

struct Path {
  std::vector<NodeId> nodes;
  double weight = 0.0;

  std::size_t hop_count() const { return nodes.empty() ? 0 : nodes.size() - 1; }
  bool operator==(const Path&) const = default;
};

/// Dijkstra distances from `source` (+inf where unreachable).
std::vector<double> shortest_distances(const WeightedDigraph& g, NodeId source);

/// Minimum-weight path; among equal-weight paths the lexicographically
/// smallest node sequence. Throws NoRouteError.
Path shortest_path(const WeightedDigraph& g, NodeId ingress, NodeId egress);

/// Anchor-to-anchor shortest path between two ground stations.
Path shortest_path(const topology::TopologySnapshot& snap, int src_gs, int dst_gs,
                   const WeightedDigraph& g);

/// Up to k paths from ingress to egress that share no interior node, found
/// by min-cost flow on the node-split graph: the set has maximum size (capped
/// at k) and, among such sets, minimum total weight. Sorted by weight.
/// Throws NoRouteError when egress is unreachable.
std::vector<Path> node_disjoint_paths(const WeightedDigraph& g, NodeId ingress, NodeId egress,
                                      int k);

/// p_i proportional to 1 - w_i / sum(w).
std::vector<double> selection_probabilities(std::span<const Path> paths);
std::size_t select_path(std::span<const Path> paths, Rng& rng);

// ---------------------------------------------------------------------------
// Source-route headers

struct HeaderEntry {
  int port = -1;
  NodeId next_node = kNoNode;  // early discarding only
  bool operator==(const HeaderEntry&) const = default;
};

/// Next hop at the tail; forwarding pops from the back.
struct RouteHeader {
  ForwardingStrategy strategy = ForwardingStrategy::port_forwarding;
  std::vector<HeaderEntry> entries;

  std::size_t size() const { return entries.size(); }
};

/// One entry per transmitting satellite on `path`: the outbound port (and for
/// early discarding the expected receiver), the last entry being the egress
/// ground port toward `dst_gs`. Throws ContractError if a hop is not a link.
RouteHeader build_header(const Path& path, const topology::TopologySnapshot& snap, int dst_gs,
                         ForwardingStrategy strategy);

struct DecodedRoute {
  std::vector<NodeId> satellites;
  NodeId ground_station = kNoNode;
};

/// A header plus the receiver each entry was planned for (aligned with
/// `header.entries`). The engine uses `planned` only to flag packets that
/// left their intended path; forwarding decisions read the header alone.
struct Route {
  RouteHeader header;
  std::vector<NodeId> planned;
  std::vector<NodeId> path;  // ingress .. egress satellite
};

Route build_route(const Path& path, const topology::TopologySnapshot& snap, int dst_gs,
                  ForwardingStrategy strategy);

/// Replays a header over `snap` starting at `ingress`.
DecodedRoute decode_header(const RouteHeader& header, const topology::TopologySnapshot& snap,
                           NodeId ingress);

// ---------------------------------------------------------------------------
// Controller

struct ControllerConfig {
  RoutingStrategy routing = RoutingStrategy::ksnd;
  ForwardingStrategy forwarding = ForwardingStrategy::port_forwarding;
  int k_paths = 4;
  double link_rate = 0.0;  // bit/s, for congestion-aware weights
};

/// Ground-segment path computation. Path sets are cached per station pair
/// until the topology or the weight view changes; every packet draws its own
/// path from the cached set.
class RouteController {
 public:
  explicit RouteController(ControllerConfig cfg) : cfg_(cfg) {}

  void set_topology(std::shared_ptr<const topology::TopologySnapshot> snap);
  void set_weights(const TelemetryView& view);

  /// Header for one packet, or nullptr when the pair has no route.
  std::shared_ptr<const Route> route(int src_gs, int dst_gs, Rng& rng);
  /// Current candidate paths for the pair (computing them if needed).
  const std::vector<Path>& paths(int src_gs, int dst_gs);

  const ControllerConfig& config() const { return cfg_; }

 private:
  struct Entry {
    bool computed = false;
    std::vector<Path> paths;
    std::vector<double> cumulative;
    std::vector<std::shared_ptr<const Route>> routes;
  };

  Entry& entry(int src_gs, int dst_gs);
  void invalidate();

  ControllerConfig cfg_;
  std::shared_ptr<const topology::TopologySnapshot> snap_;
  TelemetryView weights_;
  std::unique_ptr<WeightedDigraph> graph_;
  std::vector<Entry> cache_;
};

}  // namespace orbitnet::routing
