#include "orbitnet/cli.hpp"

#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "orbitnet/analysis.hpp"
#include "orbitnet/astro.hpp"
#include "orbitnet/config.hpp"
#include "orbitnet/errors.hpp"
#include "orbitnet/metrics.hpp"
#include "orbitnet/simcore.hpp"

namespace orbitnet::cli {

namespace fs = std::filesystem;

namespace {

struct CommonFlags {
  std::string config;
  std::string preset = "table1";
  std::optional<std::uint64_t> seed;
  std::optional<double> duration;
  std::optional<double> volume;
  std::optional<double> refresh;
  std::optional<std::string> forwarding;
  std::optional<std::string> routing;
  std::optional<std::string> traffic;
  std::optional<std::string> builder;
  std::string out;
};

void add_common(CLI::App* cmd, CommonFlags& f, bool sim_flags) {
  cmd->add_option("--config", f.config, "scenario/config JSON file (default: built-in Iridium + 10 cities)");
  cmd->add_option("--seed", f.seed, "RNG seed (falls back to config, then $ORBITNET_SEED, then 1)");
  cmd->add_option("--duration", f.duration, "simulated seconds")->check(CLI::NonNegativeNumber);
  cmd->add_option("--builder", f.builder, "topology builder")
      ->check(CLI::IsMember(config::kBuilderNames));
  cmd->add_option("--out", f.out, "output directory")->required();
  if (!sim_flags) return;
  cmd->add_option("--preset", f.preset, "parameter preset")->check(CLI::IsMember(config::kPresetNames));
  cmd->add_option("--volume", f.volume, "total offered traffic, bit/s")->check(CLI::PositiveNumber);
  cmd->add_option("--refresh", f.refresh, "weight refresh interval, s")->check(CLI::PositiveNumber);
  cmd->add_option("--forwarding", f.forwarding, "forwarding strategy")
      ->check(CLI::IsMember(config::kForwardingNames));
  cmd->add_option("--routing", f.routing, "routing strategy")
      ->check(CLI::IsMember(config::kRoutingNames));
  cmd->add_option("--traffic", f.traffic, "gravity strategy")
      ->check(CLI::IsMember(config::kTrafficNames));
}

std::uint64_t env_seed() {
  const char* v = std::getenv("ORBITNET_SEED");
  if (v == nullptr || *v == '\0') return 1;
  std::uint64_t seed = 0;
  const std::string s(v);
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), seed);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ValidationError("ORBITNET_SEED must be a non-negative integer, got '" + s + "'");
  }
  return seed;
}

config::RunConfig resolve(const CommonFlags& f) {
  auto rc = config::load_run_config(f.config, config::preset(f.preset));
  auto& s = rc.sim;
  if (f.seed) {
    s.seed = *f.seed;
  } else if (!rc.seed_from_file) {
    s.seed = env_seed();
  }
  if (f.duration) s.duration = *f.duration;
  if (f.volume) s.total_volume = *f.volume;
  if (f.refresh) s.weight_refresh_interval = *f.refresh;
  if (f.forwarding) s.forwarding = config::parse_forwarding(*f.forwarding);
  if (f.routing) s.routing = config::parse_routing(*f.routing);
  if (f.traffic) s.traffic = config::parse_traffic(*f.traffic);
  if (f.builder) s.builder = config::parse_builder(*f.builder);
  s.validate();
  return rc;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
}

/// Everything is written to a sibling staging directory that replaces the
/// target only once complete.
void with_output_dir(const fs::path& target, const std::function<void(const fs::path&)>& body) {
  if (target.empty()) throw ValidationError("--out must not be empty");
  fs::path staging = target;
  staging += ".partial";
  fs::remove_all(staging);
  fs::create_directories(staging);
  try {
    body(staging);
  } catch (...) {
    std::error_code ec;
    fs::remove_all(staging, ec);
    throw;
  }
  fs::remove_all(target);
  fs::rename(staging, target);
}

sim::RunLabels labels_for(const sim::SimConfig& c) {
  return {{"forwarding", std::string(config::short_name(c.forwarding))},
          {"routing", std::string(config::short_name(c.routing))},
          {"traffic", std::string(config::short_name(c.traffic))},
          {"builder", std::string(config::short_name(c.builder))},
          {"refresh_s", sim::format_double(c.weight_refresh_interval)},
          {"total_volume_bps", sim::format_double(c.total_volume)},
          {"link_rate_bps", sim::format_double(c.link_rate())},
          {"seed", std::to_string(c.seed)}};
}

/// One simulation into `dir`: config.json, seed.txt, summary.csv, series.csv
/// and optionally events.csv.
sim::MetricsReport simulate_into(const config::RunConfig& rc, const fs::path& dir, bool events) {
  const Scenario scenario = rc.scenario();
  write_file(dir / "config.json", rc.resolved().dump(2) + "\n");
  write_file(dir / "seed.txt", std::to_string(rc.sim.seed) + "\n");
  sim::MetricsReport report;
  if (events) {
    std::ofstream ev(dir / "events.csv", std::ios::binary);
    sim::CsvEventWriter writer(ev);
    report = sim::run(rc.sim, scenario, &writer);
    if (!ev) throw std::runtime_error("cannot write events.csv");
  } else {
    report = sim::run(rc.sim, scenario);
  }
  std::ostringstream summary;
  sim::write_summary_csv(summary, {labels_for(rc.sim)}, {report});
  write_file(dir / "summary.csv", summary.str());
  std::ostringstream series;
  sim::write_series_csv(series, report);
  write_file(dir / "series.csv", series.str());
  return report;
}

int cmd_run(const CommonFlags& f, bool events, std::ostream& out) {
  const auto rc = resolve(f);
  sim::MetricsReport report;
  with_output_dir(f.out, [&](const fs::path& dir) { report = simulate_into(rc, dir, events); });
  sim::write_console_table(out, labels_for(rc.sim), report);
  return kExitOk;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else if (c != ' ') {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

double parse_value(const std::string& s) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ValidationError("sweep value '" + s + "' is not a number");
  }
  return v;
}

int cmd_sweep(const CommonFlags& f, const std::string& axis, const std::optional<std::string>& values,
              std::ostream& out, std::ostream& err) {
  const auto base = resolve(f);
  std::vector<std::string> items;
  if (values) {
    items = split_list(*values);
    if (items.empty()) throw ValidationError("sweep: the value list is empty");
  } else if (axis == "total_volume") {
    for (int i = 1; i <= 10; ++i) items.push_back(sim::format_double(i * 1e8));
  } else if (axis == "weight_refresh") {
    items = {"1", "30", "60"};
  } else {
    items = config::kRoutingNames;
  }

  std::vector<config::RunConfig> runs;
  for (const auto& item : items) {
    std::vector<routing::ForwardingStrategy> forwardings = {base.sim.forwarding};
    if (axis == "weight_refresh" && !f.forwarding) {
      forwardings = {routing::ForwardingStrategy::port_forwarding,
                     routing::ForwardingStrategy::early_discarding};
    }
    for (auto fw : forwardings) {
      config::RunConfig rc = base;
      rc.sim.forwarding = fw;
      if (axis == "total_volume") {
        // Links stay sized for the base volume while the offered load varies.
        rc.sim.provisioning_volume = base.sim.provisioning_volume.value_or(base.sim.total_volume);
        rc.sim.total_volume = parse_value(item);
      } else if (axis == "weight_refresh") {
        rc.sim.weight_refresh_interval = parse_value(item);
      } else {
        rc.sim.routing = config::parse_routing(item);
      }
      rc.sim.seed = base.sim.seed + runs.size();
      rc.sim.validate();
      runs.push_back(std::move(rc));
    }
  }

  int failures = 0;
  with_output_dir(f.out, [&](const fs::path& dir) {
    std::vector<sim::RunLabels> labels;
    std::vector<sim::MetricsReport> reports;
    std::ostringstream failed;
    for (std::size_t i = 0; i < runs.size(); ++i) {
      char name[32];
      std::snprintf(name, sizeof name, "run-%03zu", i);
      const fs::path run_dir = dir / name;
      fs::create_directories(run_dir);
      try {
        reports.push_back(simulate_into(runs[i], run_dir, false));
        auto l = labels_for(runs[i].sim);
        l.insert(l.begin(), {"run", name});
        labels.push_back(std::move(l));
        out << name << " done: delivered_fraction="
            << sim::format_double(reports.back().delivered_fraction) << '\n';
      } catch (const std::exception& e) {
        ++failures;
        failed << name << ": " << e.what() << '\n';
        err << name << " failed: " << e.what() << '\n';
      }
    }
    std::ostringstream summary;
    sim::write_summary_csv(summary, labels, reports);
    write_file(dir / "summary.csv", summary.str());
    if (failures > 0) write_file(dir / "failures.txt", failed.str());
  });
  return failures == 0 ? kExitOk : kExitFailure;
}

int cmd_topo_analyze(const CommonFlags& f, std::ostream& out) {
  auto rc = config::load_run_config(f.config);
  const double duration = f.duration.value_or(3600.0);
  std::vector<topology::BuilderKind> builders;
  if (f.builder) {
    builders.push_back(config::parse_builder(*f.builder));
  } else {
    builders = {topology::BuilderKind::min_distance, topology::BuilderKind::line_of_sight};
  }
  const Scenario scenario = rc.scenario();
  const auto a = analysis::analyze_topology(scenario, duration, rc.sim.snapshot_interval, builders);
  with_output_dir(f.out, [&](const fs::path& dir) {
    write_file(dir / "config.json", rc.resolved().dump(2) + "\n");
    for (const auto& run : a.runs) {
      const std::string name(config::short_name(run.builder));
      std::ostringstream s;
      analysis::write_stability_csv(s, run.stability);
      write_file(dir / ("stability_" + name + ".csv"), s.str());
      std::ostringstream iv;
      analysis::write_intervals_csv(iv, run.stability);
      write_file(dir / ("intervals_" + name + ".csv"), iv.str());
    }
    std::ostringstream summary;
    analysis::write_stability_summary_csv(summary, a);
    write_file(dir / "stability_summary.csv", summary.str());
    std::ostringstream pairs;
    analysis::write_city_pairs_csv(pairs, a);
    write_file(dir / "city_pairs.csv", pairs.str());
  });
  analysis::write_stability_summary_csv(out, a);
  return kExitOk;
}

struct GenFlags {
  ConstellationParams params = ConstellationParams::iridium_next();
  double inclination_deg = 0.0;
  double raan_spread_deg = 0.0;
  double epoch_unix = 1704067200.0;  // 2024-01-01T00:00:00Z
  std::string out;
};

int cmd_gen_constellation(GenFlags& g, std::ostream& out) {
  g.params.inclination = astro::deg_to_rad(g.inclination_deg);
  g.params.raan_spread = astro::deg_to_rad(g.raan_spread_deg);
  const auto elements = generate_walker_star(g.params, g.epoch_unix);
  std::string text;
  for (const auto& el : elements) text += astro::format_tle(el, g.epoch_unix);
  const fs::path target = g.out;
  fs::path staging = target;
  staging += ".partial";
  write_file(staging, text);
  fs::rename(staging, target);
  out << "wrote " << elements.size() << " TLE records to " << target.string() << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"LEO constellation routing simulator"};
  app.require_subcommand(1);

  CommonFlags run_flags;
  bool events = false;
  auto* run = app.add_subcommand("run", "simulate one configuration");
  add_common(run, run_flags, true);
  run->add_flag("--events", events, "also write the per-event CSV log");

  CommonFlags sweep_flags;
  std::string axis;
  std::optional<std::string> values;
  auto* sweep = app.add_subcommand("sweep", "one run per value of a parameter");
  add_common(sweep, sweep_flags, true);
  sweep->add_option("--axis", axis, "parameter to vary")
      ->required()
      ->check(CLI::IsMember({"total_volume", "weight_refresh", "strategy"}));
  sweep->add_option("--values", values, "comma-separated values (default: the standard grid)");

  CommonFlags topo_flags;
  auto* topo = app.add_subcommand("topo-analyze", "link length and stability statistics");
  add_common(topo, topo_flags, false);

  GenFlags gen;
  gen.inclination_deg = astro::rad_to_deg(gen.params.inclination);
  gen.raan_spread_deg = astro::rad_to_deg(gen.params.raan_spread);
  auto* gc = app.add_subcommand("gen-constellation", "write a Walker-star constellation as TLEs");
  gc->add_option("--planes", gen.params.num_planes, "number of orbital planes");
  gc->add_option("--sats-per-plane", gen.params.sats_per_plane, "satellites per plane");
  gc->add_option("--inclination", gen.inclination_deg, "inclination, degrees");
  gc->add_option("--altitude", gen.params.altitude, "altitude, km");
  gc->add_option("--phase", gen.params.phase_factor, "Walker phase factor F");
  gc->add_option("--raan-spread", gen.raan_spread_deg, "ascending-node spread, degrees");
  gc->add_option("--epoch", gen.epoch_unix, "epoch, Unix seconds");
  gc->add_option("--out", gen.out, "output TLE file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*run) return cmd_run(run_flags, events, out);
    if (*sweep) return cmd_sweep(sweep_flags, axis, values, out, err);
    if (*topo) return cmd_topo_analyze(topo_flags, out);
    if (*gc) return cmd_gen_constellation(gen, out);
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace orbitnet::cli
