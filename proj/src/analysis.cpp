#include "orbitnet/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "orbitnet/errors.hpp"
#include "orbitnet/metrics.hpp"
#include "orbitnet/routing.hpp"

namespace orbitnet::analysis {

using sim::format_double;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void add_pair_distances(const topology::TopologySnapshot& snap, const Scenario& scenario,
                        BuilderAnalysis& out) {
  const auto g = routing::satellite_graph(snap, routing::length_weights(), true);
  const std::size_t k = scenario.cities.size();
  for (std::size_t i = 0; i < k; ++i) {
    const int gi = scenario.city_to_gs[i];
    const auto dist = routing::shortest_distances(g, snap.gs_node(gi));
    for (std::size_t j = 0; j < k; ++j) {
      if (i == j) continue;
      const double d = dist[snap.gs_node(scenario.city_to_gs[j])];
      if (d == kInf) continue;
      out.pair_mean_km[i * k + j] += d;
      ++out.pair_samples[i * k + j];
    }
  }
}

}  // namespace

double station_distance(const topology::TopologySnapshot& snap, int src_gs, int dst_gs) {
  const auto g = routing::satellite_graph(snap, routing::length_weights(), true);
  return routing::shortest_distances(g, snap.gs_node(src_gs))[snap.gs_node(dst_gs)];
}

TopologyAnalysis analyze_topology(const Scenario& scenario, double duration, double interval,
                                  std::span<const topology::BuilderKind> builders) {
  if (!(interval > 0.0)) throw ValidationError("snapshot interval must be > 0");
  if (!(duration > 0.0)) throw ValidationError("analysis duration must be > 0");
  if (builders.empty()) throw ValidationError("at least one topology builder is required");
  scenario.validate();
  TopologyAnalysis a;
  a.duration = duration;
  a.interval = interval;
  for (const auto& c : scenario.cities) a.city_ids.push_back(c.id);
  const std::size_t k = scenario.cities.size();

  for (auto kind : builders) {
    BuilderAnalysis run;
    run.builder = kind;
    run.pair_mean_km.assign(k * k, 0.0);
    run.pair_samples.assign(k * k, 0);
    topology::TopologyBuilder builder(scenario, kind);
    topology::StabilityAccumulator acc;
    for (long step = 0;; ++step) {
      const double t = step * interval;
      if (t >= duration) break;
      const auto& snap = builder.next(t);
      acc.add(snap);
      add_pair_distances(snap, scenario, run);
    }
    for (std::size_t i = 0; i < k * k; ++i) {
      if (run.pair_samples[i] > 0) run.pair_mean_km[i] /= run.pair_samples[i];
    }
    run.stability = acc.report();
    a.runs.push_back(std::move(run));
  }
  return a;
}

void write_stability_csv(std::ostream& out, const topology::StabilityReport& r) {
  out << "t,average_link_length_km,link_changes\n";
  for (std::size_t i = 0; i < r.times.size(); ++i) {
    out << format_double(r.times[i]) << ',' << format_double(r.average_link_length[i]) << ','
        << format_double(r.link_change_count[i]) << '\n';
  }
}

void write_intervals_csv(std::ostream& out, const topology::StabilityReport& r) {
  out << "run_length_snapshots\n";
  for (double len : r.stability_interval_lengths) out << format_double(len) << '\n';
}

void write_stability_summary_csv(std::ostream& out, const TopologyAnalysis& a) {
  out << "builder,metric,mean,min,max,variance\n";
  for (const auto& run : a.runs) {
    const auto name = topology::to_string(run.builder);
    auto row = [&](const char* metric, const topology::SeriesSummary& s) {
      out << name << ',' << metric << ',' << format_double(s.mean) << ',' << format_double(s.min)
          << ',' << format_double(s.max) << ',' << format_double(s.variance) << '\n';
    };
    row("average_link_length_km", run.stability.link_length);
    row("link_changes", run.stability.link_changes);
    row("stability_interval_snapshots", run.stability.stability_intervals);
  }
}

double max_relative_pair_difference(const BuilderAnalysis& a, const BuilderAnalysis& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.pair_mean_km.size(); ++i) {
    if (a.pair_samples[i] == 0 || b.pair_samples[i] == 0) continue;
    const double lo = std::min(a.pair_mean_km[i], b.pair_mean_km[i]);
    if (lo <= 0.0) continue;
    worst = std::max(worst, std::abs(a.pair_mean_km[i] - b.pair_mean_km[i]) / lo);
  }
  return worst;
}

void write_city_pairs_csv(std::ostream& out, const TopologyAnalysis& a) {
  out << "src,dst";
  for (const auto& run : a.runs) out << ',' << topology::to_string(run.builder) << "_mean_km";
  if (a.runs.size() >= 2) out << ",relative_difference";
  out << '\n';
  const std::size_t k = a.city_ids.size();
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i + 1; j < k; ++j) {
      out << a.city_ids[i] << ',' << a.city_ids[j];
      for (const auto& run : a.runs) out << ',' << format_double(run.pair_mean_km[i * k + j]);
      if (a.runs.size() >= 2) {
        const double x = a.runs[0].pair_mean_km[i * k + j];
        const double y = a.runs[1].pair_mean_km[i * k + j];
        const double lo = std::min(x, y);
        out << ',' << format_double(lo > 0.0 ? std::abs(x - y) / lo : 0.0);
      }
      out << '\n';
    }
  }
}

}  // namespace orbitnet::analysis
