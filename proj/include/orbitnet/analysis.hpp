#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "orbitnet/constellation.hpp"
#include "orbitnet/topology.hpp"

namespace orbitnet::analysis {

struct BuilderAnalysis {
  topology::BuilderKind builder = topology::BuilderKind::min_distance;
  topology::StabilityReport stability;
  /// Row-major cities x cities: mean shortest station-to-station distance
  /// (km, link lengths as weights) over the snapshots where the pair was
  /// connected; 0 on the diagonal.
  std::vector<double> pair_mean_km;
  std::vector<int> pair_samples;
};

struct TopologyAnalysis {
  std::vector<std::string> city_ids;
  double duration = 0.0;
  double interval = 1.0;
  std::vector<BuilderAnalysis> runs;
};

/// Shortest path length in km between two ground stations (GSLs included);
/// +inf when disconnected.
double station_distance(const topology::TopologySnapshot& snap, int src_gs, int dst_gs);

/// Builds snapshots at t = 0, interval, ... < duration for each builder.
TopologyAnalysis analyze_topology(const Scenario& scenario, double duration, double interval,
                                  std::span<const topology::BuilderKind> builders);

/// t,average_link_length_km,link_changes
void write_stability_csv(std::ostream& out, const topology::StabilityReport& r);
/// run_length_snapshots, one row per stability interval
void write_intervals_csv(std::ostream& out, const topology::StabilityReport& r);
/// builder,metric,mean,min,max,variance
void write_stability_summary_csv(std::ostream& out, const TopologyAnalysis& a);
/// src,dst,<builder>_mean_km...,relative_difference (first two builders)
void write_city_pairs_csv(std::ostream& out, const TopologyAnalysis& a);

/// Largest |a - b| / min(a, b) over city pairs between two builders' means.
double max_relative_pair_difference(const BuilderAnalysis& a, const BuilderAnalysis& b);

}  // namespace orbitnet::analysis
