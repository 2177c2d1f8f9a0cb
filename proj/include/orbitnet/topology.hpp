#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "orbitnet/constellation.hpp"

namespace orbitnet::topology {

enum class LinkKind { intra_plane, inter_plane, gsl };
enum class BuilderKind { min_distance, line_of_sight };

std::string_view to_string(LinkKind kind);
std::string_view to_string(BuilderKind kind);

/// Port numbering. Satellites: fore/aft within the plane, left/right toward
/// the adjacent planes, and one ground port per ground station
/// (kGroundBase + station index). A ground station has a single port 0.
namespace ports {
inline constexpr int kFore = 0;
inline constexpr int kAft = 1;
inline constexpr int kLeft = 2;
inline constexpr int kRight = 3;
inline constexpr int kGroundBase = 4;
inline constexpr int kUplink = 0;
}  // namespace ports

constexpr int ground_port(int gs_index) { return ports::kGroundBase + gs_index; }

/// Undirected link. For GSLs `u` is the satellite and `v` the station.
struct Link {
  NodeId u = kNoNode;
  NodeId v = kNoNode;
  LinkKind kind = LinkKind::intra_plane;
  double length = 0.0;  // km
  int port_u = -1;
  int port_v = -1;

  NodeId other(NodeId n) const { return n == u ? v : u; }
  int port_of(NodeId n) const { return n == u ? port_u : port_v; }
};

struct PortBinding {
  int port = -1;
  NodeId neighbor = kNoNode;
  int link = -1;  // index into TopologySnapshot::links()
};

/// The network graph frozen at one instant. Construction indexes ports and
/// enforces the structural invariants (no self-loops, no duplicate pairs,
/// exclusive ports); a violation throws ContractError.
class TopologySnapshot {
 public:
  TopologySnapshot() = default;
  TopologySnapshot(double t, int num_satellites, int num_ground_stations, BuilderKind builder,
                   std::vector<Link> links, std::vector<int> unanchored_stations = {});

  double t() const { return t_; }
  int satellite_count() const { return num_satellites_; }
  int ground_station_count() const { return num_ground_stations_; }
  int node_count() const { return num_satellites_ + num_ground_stations_; }
  bool is_satellite(NodeId n) const { return n >= 0 && n < num_satellites_; }
  NodeId gs_node(int gs_index) const { return num_satellites_ + gs_index; }
  BuilderKind builder() const { return builder_; }

  const std::vector<Link>& links() const { return links_; }
  /// Occupied ports of `node`, ascending by port number.
  std::span<const PortBinding> ports(NodeId node) const;
  NodeId neighbor_at(NodeId node, int port) const;
  std::optional<int> port_toward(NodeId from, NodeId to) const;
  const Link* link_between(NodeId a, NodeId b) const;

  /// Satellite serving ground station `gs_index`, or kNoNode.
  NodeId anchor_of(int gs_index) const;
  /// Stations that had no visible satellite when the snapshot was built.
  const std::vector<int>& unanchored_stations() const { return unanchored_; }

  /// Sorted (min, max) endpoint pairs; the identity used for change counting.
  std::vector<std::pair<NodeId, NodeId>> edge_keys() const;
  double average_link_length() const;

 private:
  double t_ = 0.0;
  int num_satellites_ = 0;
  int num_ground_stations_ = 0;
  BuilderKind builder_ = BuilderKind::min_distance;
  std::vector<Link> links_;
  std::vector<int> unanchored_;
  std::vector<std::vector<PortBinding>> ports_;
};

std::vector<astro::EciPosition> satellite_positions(const Scenario& scenario, double t);

/// Nearest-neighbour construction: two closest same-plane satellites, the
/// closest satellite in each adjacent plane (never across the seam), and one
/// GSL per station to its closest visible satellite.
TopologySnapshot build_min_distance(const Scenario& scenario, double t);

/// Keeps every link of `prev` that still has line of sight at `t`; ports left
/// empty are refilled with the closest eligible satellite that has line of
/// sight.
TopologySnapshot build_los(const TopologySnapshot& prev, const Scenario& scenario, double t);

/// Sequential builder: the first snapshot is always min-distance, later ones
/// follow the configured strategy.
class TopologyBuilder {
 public:
  TopologyBuilder(const Scenario& scenario, BuilderKind kind) : scenario_(&scenario), kind_(kind) {}
  const TopologySnapshot& next(double t);
  const TopologySnapshot* current() const { return current_ ? &*current_ : nullptr; }

 private:
  const Scenario* scenario_;
  BuilderKind kind_;
  std::optional<TopologySnapshot> current_;
};

/// Size of the symmetric difference of the two edge sets.
std::size_t diff_snapshots(const TopologySnapshot& a, const TopologySnapshot& b);

struct SeriesSummary {
  double mean = 0.0;
  double min = 0.0;
  double max = 0.0;
  double variance = 0.0;  // sample variance (n - 1)
};

SeriesSummary summarize_series(std::span<const double> values);

struct StabilityReport {
  std::vector<double> times;
  std::vector<double> average_link_length;     // km, per snapshot
  std::vector<double> link_change_count;       // vs. previous snapshot; 0 for the first
  std::vector<double> stability_interval_lengths;  // snapshots per run of equal edge sets
  SeriesSummary link_length;
  SeriesSummary link_changes;
  SeriesSummary stability_intervals;
};

/// Streaming form of stability_series, so long runs need not keep snapshots.
class StabilityAccumulator {
 public:
  void add(const TopologySnapshot& snap);
  StabilityReport report() const;
  std::size_t size() const { return report_.times.size(); }

 private:
  StabilityReport report_;
  std::vector<std::pair<NodeId, NodeId>> prev_edges_;
  int nodes_ = -1;
  double current_run_ = 0.0;
};

StabilityReport stability_series(std::span<const TopologySnapshot> snapshots);

/// One row per link: t,u,v,kind,length_km,port_u,port_v
void write_snapshot_csv(std::ostream& out, const TopologySnapshot& snap, bool header = true);

}  // namespace orbitnet::topology
