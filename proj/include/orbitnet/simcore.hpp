#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "orbitnet/constellation.hpp"
#include "orbitnet/events.hpp"
#include "orbitnet/metrics.hpp"
#include "orbitnet/routing.hpp"
#include "orbitnet/topology.hpp"
#include "orbitnet/traffic.hpp"

namespace orbitnet::sim {

struct SimConfig {
  double duration = 60.0;                  // s
  double snapshot_interval = 1.0;          // s
  double weight_refresh_interval = 1.0;    // s, multiple of snapshot_interval
  double total_volume = 3e8;               // bit/s offered
  std::optional<double> provisioning_volume;  // bit/s the link rate is sized for
  double link_rate_fraction = 0.14;
  double trip_delay = 0.350;               // s
  double link_switch_delay = 0.250;        // s
  double max_queuing_delay = 0.050;        // s
  double packet_size_bits = 12000.0;
  int k_paths = 4;
  int ema_periods = 9;
  routing::ForwardingStrategy forwarding = routing::ForwardingStrategy::port_forwarding;
  routing::RoutingStrategy routing = routing::RoutingStrategy::ksnd;
  traffic::GravityStrategy traffic = traffic::GravityStrategy::linear;
  topology::BuilderKind builder = topology::BuilderKind::min_distance;
  std::uint64_t seed = 1;

  /// link_rate_fraction of the provisioning volume (the offered volume when
  /// none is set).
  double link_rate() const;
  /// Bits one port may hold: link_rate * max_queuing_delay.
  double buffer_capacity_bits() const;
  void validate() const;

  /// Offered load raised 30% above the volume the links were sized for.
  static SimConfig stress();
};

// ---------------------------------------------------------------------------
// Topology feeds

class TopologySource {
 public:
  virtual ~TopologySource() = default;
  /// Snapshot in force from time t. Called with increasing t.
  virtual std::shared_ptr<const topology::TopologySnapshot> snapshot_at(double t) = 0;
};

/// Builds snapshots from a scenario with the configured builder.
class ScenarioTopology : public TopologySource {
 public:
  ScenarioTopology(const Scenario& scenario, topology::BuilderKind kind) : builder_(scenario, kind) {}
  std::shared_ptr<const topology::TopologySnapshot> snapshot_at(double t) override;

 private:
  topology::TopologyBuilder builder_;
};

/// The same links at every instant.
class StaticTopology : public TopologySource {
 public:
  explicit StaticTopology(topology::TopologySnapshot snap)
      : snap_(std::make_shared<const topology::TopologySnapshot>(std::move(snap))) {}
  std::shared_ptr<const topology::TopologySnapshot> snapshot_at(double) override { return snap_; }

 private:
  std::shared_ptr<const topology::TopologySnapshot> snap_;
};

/// Snapshots switched in at fixed times; the latest one at or before t wins.
class ScriptedTopology : public TopologySource {
 public:
  void add(double from_t, topology::TopologySnapshot snap);
  std::shared_ptr<const topology::TopologySnapshot> snapshot_at(double t) override;

 private:
  std::map<double, std::shared_ptr<const topology::TopologySnapshot>> script_;
};

// ---------------------------------------------------------------------------
// Engine pieces exposed for testing

struct Packet {
  std::int64_t id = -1;
  int src_city = -1;
  int dst_city = -1;
  int dst_gs = -1;
  double size_bits = 0.0;
  double created_at = 0.0;
  int hops_taken = 0;  // transmissions completed by satellites
  bool stale = false;
  std::shared_ptr<const routing::Route> route;
  std::size_t remaining = 0;  // header entries not yet consumed
};

struct ForwardDecision {
  enum class Action { enqueue, drop } action = Action::drop;
  int port = -1;
  NodeId far_end = kNoNode;
  std::optional<DropReason> reason;
  bool diverged = false;  // the link leads somewhere other than planned
};

/// Pops the tail header entry at `node` and checks it against the live port
/// map. `far_end_by_port(port)` returns the node at the other end of the port,
/// or kNoNode.
template <typename FarEnd>
ForwardDecision forward(Packet& pkt, FarEnd&& far_end_by_port) {
  ForwardDecision d;
  if (pkt.remaining == 0) {
    d.reason = DropReason::header_exhausted;
    return d;
  }
  const std::size_t idx = --pkt.remaining;
  const auto& entry = pkt.route->header.entries[idx];
  const NodeId far = far_end_by_port(entry.port);
  if (far == kNoNode) {
    d.reason = DropReason::no_such_port;
    return d;
  }
  if (pkt.route->header.strategy == routing::ForwardingStrategy::early_discarding &&
      far != entry.next_node) {
    d.reason = DropReason::stale_route;
    return d;
  }
  d.action = ForwardDecision::Action::enqueue;
  d.port = entry.port;
  d.far_end = far;
  d.diverged = far != pkt.route->planned[idx];
  return d;
}

/// FIFO transmission queue of one directed link end.
class PortQueue {
 public:
  PortQueue(double link_rate, double capacity_bits) : rate_(link_rate), capacity_(capacity_bits) {}

  /// Accepts iff the queued bits (including the packet in service) plus
  /// `size_bits` fit the capacity. On acceptance returns the time the
  /// packet's transmission completes.
  std::optional<double> enqueue(double size_bits, double t);
  /// Removes the head packet once its transmission completes.
  void complete(double size_bits);
  std::size_t length() const { return count_; }
  double queued_bits() const { return queued_bits_; }
  double rate() const { return rate_; }
  double capacity() const { return capacity_; }
  void clear();

 private:
  double rate_;
  double capacity_;
  double queued_bits_ = 0.0;
  std::size_t count_ = 0;
  double busy_until_ = 0.0;
};

// ---------------------------------------------------------------------------
// Runs

struct SimInputs {
  TopologySource* topology = nullptr;
  traffic::TrafficMatrix matrix;
  std::vector<int> city_to_gs;
  int satellite_count = 0;
};

RunInfo run_info(const SimConfig& config, int satellite_count);

/// Runs the event loop to config.duration. Every record goes to `sink`
/// (if any) and to the returned report's accumulator.
MetricsReport run(const SimConfig& config, SimInputs& inputs, EventSink* sink = nullptr);

/// Gravity traffic from city populations over the scenario's constellation.
MetricsReport run(const SimConfig& config, const Scenario& scenario, EventSink* sink = nullptr);

traffic::TrafficMatrix scenario_traffic(const SimConfig& config, const Scenario& scenario);

}  // namespace orbitnet::sim
