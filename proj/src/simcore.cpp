#include "orbitnet/simcore.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <queue>
#include <string>

#include "orbitnet/errors.hpp"

namespace orbitnet::sim {

using routing::link_key;
using topology::TopologySnapshot;

// --- config --------------------------------------------------------------------

double SimConfig::link_rate() const {
  return link_rate_fraction * provisioning_volume.value_or(total_volume);
}

double SimConfig::buffer_capacity_bits() const { return link_rate() * max_queuing_delay; }

void SimConfig::validate() const {
  std::vector<std::string> bad;
  if (!(duration >= 0.0)) bad.push_back("duration must be >= 0");
  if (!(snapshot_interval > 0.0)) bad.push_back("snapshot_interval must be > 0");
  if (!(weight_refresh_interval > 0.0)) {
    bad.push_back("weight_refresh_interval must be > 0");
  } else if (snapshot_interval > 0.0) {
    const double ratio = weight_refresh_interval / snapshot_interval;
    if (ratio < 1.0 - 1e-9 || std::abs(ratio - std::round(ratio)) > 1e-9) {
      bad.push_back("weight_refresh_interval must be a whole number of snapshot intervals");
    }
  }
  if (!(total_volume > 0.0)) bad.push_back("total_volume must be > 0");
  if (provisioning_volume && !(*provisioning_volume > 0.0)) {
    bad.push_back("provisioning_volume must be > 0");
  }
  if (!(link_rate_fraction > 0.0 && link_rate_fraction <= 1.0)) {
    bad.push_back("link_rate_fraction must be in (0, 1]");
  }
  if (!(trip_delay >= 0.0)) bad.push_back("trip_delay must be >= 0");
  if (!(link_switch_delay >= 0.0)) bad.push_back("link_switch_delay must be >= 0");
  if (!(max_queuing_delay >= 0.0)) bad.push_back("max_queuing_delay must be >= 0");
  if (!(packet_size_bits > 0.0)) bad.push_back("packet_size_bits must be > 0");
  if (k_paths < 1) bad.push_back("k_paths must be >= 1");
  if (ema_periods < 1) bad.push_back("ema_periods must be >= 1");
  if (!bad.empty()) {
    std::string msg = "invalid simulation config:";
    for (const auto& b : bad) msg += " " + b + ";";
    throw ValidationError(msg);
  }
}

SimConfig SimConfig::stress() {
  SimConfig c;
  c.provisioning_volume = 3e8;
  c.total_volume = 3.9e8;
  return c;
}

RunInfo run_info(const SimConfig& config, int satellite_count) {
  return {config.duration, config.snapshot_interval, config.packet_size_bits, satellite_count,
          config.link_rate()};
}

// --- topology feeds ------------------------------------------------------------------

std::shared_ptr<const TopologySnapshot> ScenarioTopology::snapshot_at(double t) {
  return std::make_shared<const TopologySnapshot>(builder_.next(t));
}

void ScriptedTopology::add(double from_t, TopologySnapshot snap) {
  script_[from_t] = std::make_shared<const TopologySnapshot>(std::move(snap));
}

std::shared_ptr<const TopologySnapshot> ScriptedTopology::snapshot_at(double t) {
  auto it = script_.upper_bound(t);
  if (it == script_.begin()) throw ContractError("ScriptedTopology: no snapshot at or before t");
  return std::prev(it)->second;
}

// --- port queue ----------------------------------------------------------------------

std::optional<double> PortQueue::enqueue(double size_bits, double t) {
  if (queued_bits_ + size_bits > capacity_ * (1.0 + 1e-12)) return std::nullopt;
  busy_until_ = std::max(busy_until_, t) + size_bits / rate_;
  queued_bits_ += size_bits;
  ++count_;
  return busy_until_;
}

void PortQueue::complete(double size_bits) {
  if (count_ == 0) throw ContractError("PortQueue::complete on an empty queue");
  queued_bits_ = count_ == 1 ? 0.0 : queued_bits_ - size_bits;
  --count_;
}

void PortQueue::clear() {
  queued_bits_ = 0.0;
  count_ = 0;
  busy_until_ = 0.0;
}

// --- engine ------------------------------------------------------------------------------

namespace {

enum class EvType : std::uint8_t { launch, transmit_done, arrival };

struct Event {
  double time;
  std::uint64_t seq;
  EvType type;
  std::int64_t a;   // flow index, or packet slot
  std::uint64_t b;  // channel key
  std::uint64_t gen;

  bool operator>(const Event& o) const {
    if (time != o.time) return time > o.time;
    return seq > o.seq;
  }
};

struct Channel {
  NodeId from = kNoNode;
  NodeId to = kNoNode;
  int port = -1;
  double length = 0.0;
  double live_from = 0.0;
  std::uint64_t gen = 0;
  double bits_sent = 0.0;
  PortQueue queue;
  std::deque<std::int64_t> packets;  // slots, head in service
};

struct Flow {
  int src_city;
  int dst_city;
  double period;
  double offset;
  std::int64_t n = 0;
};

class Engine {
 public:
  Engine(const SimConfig& cfg, SimInputs& in, EventSink* sink)
      : cfg_(cfg),
        in_(in),
        sink_(sink),
        acc_(run_info(cfg, in.satellite_count)),
        store_(routing::ema_alpha(cfg.ema_periods), cfg.trip_delay),
        controller_({cfg.routing, cfg.forwarding, cfg.k_paths, cfg.link_rate()}),
        rng_(cfg.seed) {}

  MetricsReport run() {
    if (cfg_.duration <= 0.0) return acc_.finish();
    setup_flows();
    apply_snapshot(0.0, true);
    controller_.set_weights(store_.view_at(0.0));

    std::int64_t boundary = 1;
    const auto refresh_every =
        static_cast<std::int64_t>(std::llround(cfg_.weight_refresh_interval / cfg_.snapshot_interval));
    for (;;) {
      const double tb = boundary * cfg_.snapshot_interval;
      const bool has_boundary = tb < cfg_.duration;
      if (!events_.empty() && events_.top().time < cfg_.duration &&
          (!has_boundary || events_.top().time < tb)) {
        Event ev = events_.top();
        events_.pop();
        dispatch(ev);
        continue;
      }
      if (!has_boundary) break;
      sample_telemetry(tb);
      apply_snapshot(tb, false);
      if (boundary % refresh_every == 0) controller_.set_weights(store_.view_at(tb));
      ++boundary;
    }
    sample_telemetry(cfg_.duration);
    return acc_.finish();
  }

 private:
  void emit(const LogRecord& r) {
    acc_.on_record(r);
    if (sink_) sink_->on_record(r);
  }

  void push(double t, EvType type, std::int64_t a, std::uint64_t b = 0, std::uint64_t gen = 0) {
    events_.push({t, seq_++, type, a, b, gen});
  }

  void setup_flows() {
    const auto& m = in_.matrix;
    const std::size_t k = m.size();
    if (in_.city_to_gs.size() != k) throw ValidationError("city_to_gs must cover every matrix city");
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t j = 0; j < k; ++j) {
        if (i == j) continue;
        const auto period = traffic::interarrival(m, i, j, cfg_.packet_size_bits);
        if (!period) continue;
        Flow f{static_cast<int>(i), static_cast<int>(j), *period,
               traffic::first_launch_offset(i, j, k, *period)};
        flows_.push_back(f);
        if (f.offset < cfg_.duration) {
          push(f.offset, EvType::launch, static_cast<std::int64_t>(flows_.size() - 1));
        }
      }
    }
  }

  // --- packets ---

  std::int64_t new_slot() {
    if (!free_.empty()) {
      const auto s = free_.back();
      free_.pop_back();
      return s;
    }
    pool_.emplace_back();
    return static_cast<std::int64_t>(pool_.size() - 1);
  }

  void release(std::int64_t slot) {
    pool_[slot].route.reset();
    free_.push_back(slot);
  }

  void drop(std::int64_t slot, double t, NodeId node, int port, DropReason why) {
    const Packet& p = pool_[slot];
    LogRecord r;
    r.time = t;
    r.kind = EventKind::drop;
    r.packet_id = p.id;
    r.node = node;
    r.port = port;
    r.reason = why;
    r.value = p.hops_taken;
    r.stale = p.stale;
    emit(r);
    release(slot);
  }

  void deliver(std::int64_t slot, double t, NodeId node) {
    const Packet& p = pool_[slot];
    LogRecord r;
    r.time = t;
    r.kind = EventKind::deliver;
    r.packet_id = p.id;
    r.node = node;
    r.port = topology::ports::kUplink;
    r.value = p.hops_taken;
    r.stale = p.stale;
    emit(r);
    release(slot);
  }

  void enqueue(std::int64_t slot, double t, NodeId from, NodeId to, int port) {
    auto it = channels_.find(link_key(from, to));
    if (it == channels_.end()) throw ContractError("enqueue: no channel for a snapshot link");
    Channel& ch = it->second;
    if (t < ch.live_from) {
      drop(slot, t, from, port, DropReason::link_down);
      return;
    }
    const auto done = ch.queue.enqueue(pool_[slot].size_bits, t);
    if (!done) {
      drop(slot, t, from, port, DropReason::buffer_overflow);
      return;
    }
    ch.packets.push_back(slot);
    LogRecord r;
    r.time = t;
    r.kind = EventKind::enqueue;
    r.packet_id = pool_[slot].id;
    r.node = from;
    r.port = port;
    r.value = static_cast<double>(ch.queue.length());
    emit(r);
    push(*done, EvType::transmit_done, 0, it->first, ch.gen);
  }

  void on_launch(const Event& ev) {
    Flow& f = flows_[ev.a];
    ++f.n;
    const double next = f.offset + f.n * f.period;
    if (next < cfg_.duration) push(next, EvType::launch, ev.a);

    const int src_gs = in_.city_to_gs[f.src_city];
    const int dst_gs = in_.city_to_gs[f.dst_city];
    const NodeId src_node = snap_->gs_node(src_gs);
    const std::int64_t slot = new_slot();
    Packet& p = pool_[slot];
    p = Packet{};
    p.id = next_packet_id_++;
    p.src_city = f.src_city;
    p.dst_city = f.dst_city;
    p.dst_gs = dst_gs;
    p.size_bits = cfg_.packet_size_bits;
    p.created_at = ev.time;

    LogRecord r;
    r.time = ev.time;
    r.kind = EventKind::launch;
    r.packet_id = p.id;
    r.node = src_node;
    emit(r);

    auto route = controller_.route(src_gs, dst_gs, rng_);
    if (!route) {
      drop(slot, ev.time, src_node, -1, DropReason::no_route);
      return;
    }
    p.route = std::move(route);
    p.remaining = p.route->header.size();
    enqueue(slot, ev.time, src_node, p.route->path.front(), topology::ports::kUplink);
  }

  void on_transmit_done(const Event& ev) {
    auto it = channels_.find(ev.b);
    if (it == channels_.end() || it->second.gen != ev.gen) return;  // link was torn down
    Channel& ch = it->second;
    const std::int64_t slot = ch.packets.front();
    ch.packets.pop_front();
    ch.queue.complete(pool_[slot].size_bits);
    ch.bits_sent += pool_[slot].size_bits;
    if (snap_->is_satellite(ch.from)) ++pool_[slot].hops_taken;
    push(ev.time + ch.length / astro::kSpeedOfLightKmS, EvType::arrival, slot,
         static_cast<std::uint64_t>(ch.to));
  }

  void on_arrival(const Event& ev) {
    const std::int64_t slot = ev.a;
    const auto node = static_cast<NodeId>(ev.b);
    Packet& p = pool_[slot];
    if (!snap_->is_satellite(node)) {
      if (node == snap_->gs_node(p.dst_gs)) {
        deliver(slot, ev.time, node);
      } else {
        drop(slot, ev.time, node, -1, DropReason::header_exhausted);
      }
      return;
    }
    const auto d = forward(p, [&](int port) { return snap_->neighbor_at(node, port); });
    if (d.action == ForwardDecision::Action::drop) {
      if (*d.reason != DropReason::header_exhausted) p.stale = true;
      drop(slot, ev.time, node, d.port, *d.reason);
      return;
    }
    if (d.diverged) p.stale = true;
    enqueue(slot, ev.time, node, d.far_end, d.port);
  }

  void dispatch(const Event& ev) {
    switch (ev.type) {
      case EvType::launch: on_launch(ev); break;
      case EvType::transmit_done: on_transmit_done(ev); break;
      case EvType::arrival: on_arrival(ev); break;
    }
  }

  // --- boundaries ---

  void sample_telemetry(double t) {
    const double interval = t - last_sample_;
    if (interval <= 0.0) return;
    for (auto& [key, ch] : channels_) {
      const double bps = ch.bits_sent / interval;
      store_.record_sample(ch.from, ch.to, bps, t);
      LogRecord r;
      r.time = t;
      r.kind = EventKind::link_sample;
      r.packet_id = ch.to;
      r.node = ch.from;
      r.port = ch.port;
      r.value = bps;
      emit(r);
      ch.bits_sent = 0.0;
    }
    store_.publish(t);
    last_sample_ = t;
  }

  void apply_snapshot(double t, bool initial) {
    snap_ = in_.topology->snapshot_at(t);
    if (snap_->satellite_count() != in_.satellite_count) {
      throw ContractError("snapshot satellite count differs from the run's");
    }
    LogRecord rec;
    rec.time = t;
    rec.kind = EventKind::snapshot;
    rec.value = static_cast<double>(snap_->links().size());
    emit(rec);

    std::map<std::uint64_t, Channel> next;
    for (const auto& l : snap_->links()) {
      for (int dir = 0; dir < 2; ++dir) {
        const NodeId from = dir == 0 ? l.u : l.v;
        const NodeId to = l.other(from);
        const auto key = link_key(from, to);
        auto old = channels_.find(key);
        if (old != channels_.end()) {
          Channel ch = std::move(old->second);
          channels_.erase(old);
          ch.length = l.length;
          ch.port = l.port_of(from);
          next.emplace(key, std::move(ch));
        } else {
          Channel ch{from, to, l.port_of(from), l.length,
                     initial ? t : t + cfg_.link_switch_delay, ++gen_, 0.0,
                     PortQueue(cfg_.link_rate(), cfg_.buffer_capacity_bits()), {}};
          next.emplace(key, std::move(ch));
        }
      }
    }
    // Whatever is left was removed: its queued packets are lost.
    for (auto& [key, ch] : channels_) {
      for (std::int64_t slot : ch.packets) drop(slot, t, ch.from, ch.port, DropReason::link_down);
    }
    channels_ = std::move(next);
    controller_.set_topology(snap_);
  }

  const SimConfig& cfg_;
  SimInputs& in_;
  EventSink* sink_;
  MetricsAccumulator acc_;
  routing::TelemetryStore store_;
  routing::RouteController controller_;
  routing::Rng rng_;

  std::priority_queue<Event, std::vector<Event>, std::greater<>> events_;
  std::uint64_t seq_ = 0;
  std::uint64_t gen_ = 0;
  std::vector<Flow> flows_;
  std::vector<Packet> pool_;
  std::vector<std::int64_t> free_;
  std::int64_t next_packet_id_ = 0;
  std::map<std::uint64_t, Channel> channels_;
  std::shared_ptr<const TopologySnapshot> snap_;
  double last_sample_ = 0.0;
};

}  // namespace

MetricsReport run(const SimConfig& config, SimInputs& inputs, EventSink* sink) {
  config.validate();
  if (inputs.topology == nullptr) throw ContractError("run: no topology source");
  Engine engine(config, inputs, sink);
  return engine.run();
}

traffic::TrafficMatrix scenario_traffic(const SimConfig& config, const Scenario& scenario) {
  std::vector<double> pops;
  std::vector<std::string> ids;
  for (const auto& c : scenario.cities) {
    pops.push_back(c.population);
    ids.push_back(c.id);
  }
  const auto p = traffic::gravity_vector(pops, config.traffic);
  return traffic::traffic_matrix(p, p, config.total_volume, ids);
}

MetricsReport run(const SimConfig& config, const Scenario& scenario, EventSink* sink) {
  config.validate();
  scenario.validate();
  ScenarioTopology topo(scenario, config.builder);
  SimInputs in;
  in.topology = &topo;
  in.matrix = scenario_traffic(config, scenario);
  in.city_to_gs = scenario.city_to_gs;
  in.satellite_count = scenario.satellite_count();
  return run(config, in, sink);
}

}  // namespace orbitnet::sim
