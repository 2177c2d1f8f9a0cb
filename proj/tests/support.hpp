#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <limits>
#include <queue>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "orbitnet/routing.hpp"
#include "orbitnet/topology.hpp"

namespace testsupport {

using orbitnet::NodeId;
using orbitnet::routing::WeightedDigraph;
namespace topo = orbitnet::topology;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Relaxes every arc |V|-1 times. Kept deliberately naive.
inline std::vector<double> bellman_ford(const WeightedDigraph& g, NodeId src) {
  std::vector<double> d(g.node_count(), kInf);
  d[src] = 0.0;
  for (int round = 0; round + 1 < g.node_count(); ++round) {
    bool changed = false;
    for (NodeId u = 0; u < g.node_count(); ++u) {
      if (d[u] == kInf) continue;
      for (const auto& a : g.arcs(u)) {
        if (d[u] + a.weight < d[a.to]) {
          d[a.to] = d[u] + a.weight;
          changed = true;
        }
      }
    }
    if (!changed) break;
  }
  return d;
}

// Undirected random graph with positive weights; symmetric arcs.
inline WeightedDigraph random_graph(std::mt19937_64& rng, int n, double edge_p) {
  WeightedDigraph g(n);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::uniform_real_distribution<double> w(0.5, 100.0);
  for (int u = 0; u < n; ++u) {
    for (int v = u + 1; v < n; ++v) {
      if (coin(rng) < edge_p) {
        const double x = w(rng);
        g.add_arc(u, v, x);
        g.add_arc(v, u, x);
      }
    }
  }
  return g;
}

// Maximum number of interior-disjoint src->dst paths, by Edmonds-Karp on
// the node-split graph (every interior node has capacity 1).
inline int max_disjoint_paths(const WeightedDigraph& g, NodeId src, NodeId dst) {
  const int n = g.node_count();
  const int N = 2 * n;
  std::vector<std::vector<int>> cap(N, std::vector<int>(N, 0));
  auto in = [](int v) { return 2 * v; };
  auto out = [](int v) { return 2 * v + 1; };
  const int big = n + 1;
  for (int v = 0; v < n; ++v) cap[in(v)][out(v)] = (v == src || v == dst) ? big : 1;
  for (int u = 0; u < n; ++u) {
    for (const auto& a : g.arcs(u)) {
      if (a.to == src || u == dst) continue;
      cap[out(u)][in(a.to)] = 1;
    }
  }
  if (src == dst) return 1;
  int flow = 0;
  const int s = out(src);
  const int t = in(dst);
  for (;;) {
    std::vector<int> parent(N, -1);
    parent[s] = s;
    std::queue<int> q;
    q.push(s);
    while (!q.empty() && parent[t] == -1) {
      const int x = q.front();
      q.pop();
      for (int y = 0; y < N; ++y) {
        if (parent[y] == -1 && cap[x][y] > 0) {
          parent[y] = x;
          q.push(y);
        }
      }
    }
    if (parent[t] == -1) return flow;
    for (int y = t; y != s; y = parent[y]) {
      --cap[parent[y]][y];
      ++cap[y][parent[y]];
    }
    ++flow;
  }
}

inline topo::Link isl(NodeId u, NodeId v, double len, int pu, int pv) {
  return {u, v, topo::LinkKind::intra_plane, len, pu, pv};
}

inline topo::Link gsl(NodeId sat, int gs_index, int num_sats, double len) {
  return {sat, num_sats + gs_index, topo::LinkKind::gsl, len, topo::ground_port(gs_index),
          topo::ports::kUplink};
}

// GS0 - s0 - s1 - ... - s(n-1) - GS1, ISL lengths `isl_km`, GSLs `gsl_km`.
inline topo::TopologySnapshot line_snapshot(int n, const std::vector<double>& isl_km,
                                            double gsl_km, double t = 0.0) {
  std::vector<topo::Link> links;
  links.push_back(gsl(0, 0, n, gsl_km));
  for (int i = 0; i + 1 < n; ++i) {
    links.push_back(isl(i, i + 1, isl_km[i], topo::ports::kFore, topo::ports::kAft));
  }
  links.push_back(gsl(n - 1, 1, n, gsl_km));
  return {t, n, 2, topo::BuilderKind::min_distance, std::move(links)};
}

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("orbitnet_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace testsupport
