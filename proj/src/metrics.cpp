#include "orbitnet/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "orbitnet/errors.hpp"

namespace orbitnet::sim {

namespace {

constexpr std::array<std::string_view, kDropReasonCount> kReasonNames = {
    "buffer_overflow", "no_such_port", "stale_route", "header_exhausted", "link_down", "no_route",
};
constexpr std::array<std::string_view, 6> kKindNames = {
    "launch", "enqueue", "deliver", "drop", "link_sample", "snapshot",
};

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

template <typename T>
bool parse_number(const std::string& s, T& out) {
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && ptr == end;
}

}  // namespace

std::string_view to_string(DropReason r) { return kReasonNames[static_cast<std::size_t>(r)]; }
std::string_view to_string(EventKind k) { return kKindNames[static_cast<std::size_t>(k)]; }

std::optional<DropReason> parse_drop_reason(std::string_view s) {
  for (std::size_t i = 0; i < kReasonNames.size(); ++i) {
    if (kReasonNames[i] == s) return static_cast<DropReason>(i);
  }
  return std::nullopt;
}

std::optional<EventKind> parse_event_kind(std::string_view s) {
  for (std::size_t i = 0; i < kKindNames.size(); ++i) {
    if (kKindNames[i] == s) return static_cast<EventKind>(i);
  }
  return std::nullopt;
}

std::string format_double(double x) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  if (ec != std::errc()) throw NumericError("format_double: conversion failed");
  return std::string(buf, ptr);
}

// --- accumulator -------------------------------------------------------------

MetricsAccumulator::MetricsAccumulator(RunInfo info) : info_(info) {
  active_.assign(static_cast<std::size_t>(std::max(0, info_.satellite_count)), 0);
}

void MetricsAccumulator::close_interval(double end) {
  const double len = end - interval_start_;
  SeriesRow row;
  row.t = interval_start_;
  row.throughput_bps = len > 0.0 ? interval_delivered_bits_ / len : 0.0;
  row.drops_cum = r_.dropped;
  row.mean_utilization_bps = interval_util_n_ > 0 ? interval_util_sum_ / interval_util_n_ : 0.0;
  r_.series.push_back(row);
  active_sum_ += std::count(active_.begin(), active_.end(), 1);
  ++intervals_;
  std::fill(active_.begin(), active_.end(), 0);
  interval_delivered_bits_ = 0.0;
  interval_util_sum_ = 0.0;
  interval_util_n_ = 0;
  open_ = false;
}

void MetricsAccumulator::on_record(const LogRecord& rec) {
  const std::int64_t index = records_++;
  auto fail = [&](const std::string& what) {
    throw IntegrityError("event record " + std::to_string(index) + " (" +
                         std::string(to_string(rec.kind)) + " at t=" + format_double(rec.time) +
                         "): " + what);
  };
  if (rec.time < last_time_) fail("time goes backwards");
  last_time_ = rec.time;

  auto live_packet = [&]() -> std::size_t {
    if (rec.packet_id < 0 || rec.packet_id >= r_.launched) fail("unknown packet id");
    const auto id = static_cast<std::size_t>(rec.packet_id);
    if (done_[id]) fail("packet already delivered or dropped");
    return id;
  };

  switch (rec.kind) {
    case EventKind::snapshot:
      if (open_) close_interval(rec.time);
      open_ = true;
      interval_start_ = rec.time;
      break;
    case EventKind::launch:
      if (rec.packet_id != r_.launched) fail("packet ids must be launched in sequence");
      launch_time_.push_back(rec.time);
      done_.push_back(0);
      ++r_.launched;
      break;
    case EventKind::enqueue: {
      live_packet();
      occupancy_sum_ += rec.value;
      ++enqueues_;
      if (rec.node >= 0 && rec.node < info_.satellite_count) active_[rec.node] = 1;
      break;
    }
    case EventKind::deliver: {
      const auto id = live_packet();
      done_[id] = 1;
      ++r_.delivered;
      latency_sum_ += rec.time - launch_time_[id];
      hops_sum_ += rec.value;
      interval_delivered_bits_ += info_.packet_size_bits;
      if (rec.stale) {
        ++r_.stale_packets;
        stale_hops_sum_ += rec.value;
      }
      break;
    }
    case EventKind::drop: {
      const auto id = live_packet();
      if (!rec.reason) fail("drop without a reason");
      done_[id] = 1;
      ++r_.dropped;
      ++r_.drop_counts[static_cast<std::size_t>(*rec.reason)];
      if (rec.stale) {
        ++r_.stale_packets;
        stale_hops_sum_ += rec.value;
      }
      break;
    }
    case EventKind::link_sample:
      if (rec.value < 0.0) fail("negative link sample");
      if (rec.value > 0.0) {
        util_sum_ += rec.value;
        ++util_samples_;
        interval_util_sum_ += rec.value;
        ++interval_util_n_;
      }
      break;
  }
}

MetricsReport MetricsAccumulator::finish() const {
  MetricsAccumulator tmp = *this;
  if (tmp.open_) tmp.close_interval(std::max(info_.duration, tmp.interval_start_));
  MetricsReport r = tmp.r_;
  r.in_flight = r.launched - r.delivered - r.dropped;
  if (r.launched > 0) {
    const auto n = static_cast<double>(r.launched);
    r.delivered_fraction = r.delivered / n;
    r.dropped_fraction = r.dropped / n;
    r.in_flight_fraction = r.in_flight / n;
  }
  if (r.dropped > 0) {
    for (std::size_t i = 0; i < kDropReasonCount; ++i) {
      r.drop_breakdown[i] = static_cast<double>(r.drop_counts[i]) / r.dropped;
    }
  }
  if (tmp.enqueues_ > 0) r.average_buffer_occupation = tmp.occupancy_sum_ / tmp.enqueues_;
  if (tmp.intervals_ > 0) {
    r.average_active_satellites = static_cast<double>(tmp.active_sum_) / tmp.intervals_;
  }
  if (r.delivered > 0) {
    r.average_latency = tmp.latency_sum_ / r.delivered;
    r.average_hops = tmp.hops_sum_ / r.delivered;
  }
  if (tmp.util_samples_ > 0) r.average_link_utilization = tmp.util_sum_ / tmp.util_samples_;
  if (r.stale_packets > 0) r.stale_mean_hops = tmp.stale_hops_sum_ / r.stale_packets;
  return r;
}

MetricsReport summarize(const std::vector<LogRecord>& log, const RunInfo& info) {
  MetricsAccumulator acc(info);
  for (const auto& rec : log) acc.on_record(rec);
  return acc.finish();
}

// --- event CSV ---------------------------------------------------------------------

CsvEventWriter::CsvEventWriter(std::ostream& out) : out_(&out) {
  *out_ << "time_s,event_kind,packet_id,node,port,reason,value,stale\n";
}

void CsvEventWriter::on_record(const LogRecord& rec) {
  *out_ << format_double(rec.time) << ',' << to_string(rec.kind) << ',' << rec.packet_id << ','
        << rec.node << ',' << rec.port << ',' << (rec.reason ? to_string(*rec.reason) : "") << ','
        << format_double(rec.value) << ',' << (rec.stale ? 1 : 0) << '\n';
}

std::vector<LogRecord> read_event_csv(std::istream& in) {
  std::vector<LogRecord> out;
  std::string line;
  int line_no = 0;
  auto fail = [&](const std::string& what) {
    throw ParseError("event CSV line " + std::to_string(line_no) + ": " + what);
  };
  if (!std::getline(in, line)) return out;
  ++line_no;
  if (line.rfind("time_s,", 0) != 0) fail("missing header");
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 8) fail("expected 8 fields, got " + std::to_string(f.size()));
    LogRecord r;
    if (!parse_number(f[0], r.time)) fail("bad time '" + f[0] + "'");
    auto kind = parse_event_kind(f[1]);
    if (!kind) fail("unknown event kind '" + f[1] + "'");
    r.kind = *kind;
    if (!parse_number(f[2], r.packet_id)) fail("bad packet id '" + f[2] + "'");
    if (!parse_number(f[3], r.node)) fail("bad node '" + f[3] + "'");
    if (!parse_number(f[4], r.port)) fail("bad port '" + f[4] + "'");
    if (!f[5].empty()) {
      r.reason = parse_drop_reason(f[5]);
      if (!r.reason) fail("unknown drop reason '" + f[5] + "'");
    }
    if (!parse_number(f[6], r.value)) fail("bad value '" + f[6] + "'");
    if (f[7] != "0" && f[7] != "1") fail("stale flag must be 0 or 1");
    r.stale = f[7] == "1";
    out.push_back(r);
  }
  return out;
}

// --- summary / series ---------------------------------------------------------------

std::vector<std::string> summary_columns() {
  std::vector<std::string> cols = {"launched",           "delivered",        "dropped",
                                   "in_flight",          "delivered_fraction", "dropped_fraction"};
  for (auto r : kAllDropReasons) cols.push_back("drop_share_" + std::string(to_string(r)));
  for (const char* c : {"average_buffer_occupation", "average_active_satellites",
                        "average_latency_s", "average_link_utilization_bps", "average_hops",
                        "stale_packets", "stale_mean_hops"}) {
    cols.emplace_back(c);
  }
  return cols;
}

std::vector<std::string> summary_values(const MetricsReport& r) {
  std::vector<std::string> v = {std::to_string(r.launched),       std::to_string(r.delivered),
                                std::to_string(r.dropped),        std::to_string(r.in_flight),
                                format_double(r.delivered_fraction), format_double(r.dropped_fraction)};
  for (double share : r.drop_breakdown) v.push_back(format_double(share));
  for (double x : {r.average_buffer_occupation, r.average_active_satellites, r.average_latency,
                   r.average_link_utilization, r.average_hops}) {
    v.push_back(format_double(x));
  }
  v.push_back(std::to_string(r.stale_packets));
  v.push_back(format_double(r.stale_mean_hops));
  return v;
}

void write_summary_csv(std::ostream& out, const std::vector<RunLabels>& labels,
                       const std::vector<MetricsReport>& reports) {
  if (labels.size() != reports.size()) throw ContractError("write_summary_csv: size mismatch");
  const auto cols = summary_columns();
  bool first = true;
  if (!labels.empty()) {
    for (const auto& [k, _] : labels.front()) {
      out << (first ? "" : ",") << k;
      first = false;
    }
  }
  for (const auto& c : cols) {
    out << (first ? "" : ",") << c;
    first = false;
  }
  out << '\n';
  for (std::size_t i = 0; i < reports.size(); ++i) {
    first = true;
    for (const auto& [_, v] : labels[i]) {
      out << (first ? "" : ",") << v;
      first = false;
    }
    for (const auto& v : summary_values(reports[i])) {
      out << (first ? "" : ",") << v;
      first = false;
    }
    out << '\n';
  }
  if (!out) throw std::runtime_error("failed writing summary CSV");
}

std::vector<std::map<std::string, std::string>> read_summary_csv(std::istream& in) {
  std::vector<std::map<std::string, std::string>> rows;
  std::string line;
  if (!std::getline(in, line)) return rows;
  const auto header = split(line, ',');
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != header.size()) {
      throw ParseError("summary CSV line " + std::to_string(line_no) + ": field count mismatch");
    }
    std::map<std::string, std::string> row;
    for (std::size_t i = 0; i < f.size(); ++i) row[header[i]] = f[i];
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_series_csv(std::ostream& out, const MetricsReport& r) {
  out << "t,throughput_bps,drops_cum,mean_utilization_bps\n";
  for (const auto& row : r.series) {
    out << format_double(row.t) << ',' << format_double(row.throughput_bps) << ',' << row.drops_cum
        << ',' << format_double(row.mean_utilization_bps) << '\n';
  }
  if (!out) throw std::runtime_error("failed writing series CSV");
}

void write_console_table(std::ostream& out, const RunLabels& labels, const MetricsReport& r) {
  const auto cols = summary_columns();
  const auto vals = summary_values(r);
  std::size_t width = 0;
  for (const auto& [k, _] : labels) width = std::max(width, k.size());
  for (const auto& c : cols) width = std::max(width, c.size());
  for (const auto& [k, v] : labels) out << std::left << std::setw(static_cast<int>(width) + 2) << k << v << '\n';
  for (std::size_t i = 0; i < cols.size(); ++i) {
    out << std::left << std::setw(static_cast<int>(width) + 2) << cols[i] << vals[i] << '\n';
  }
}

}  // namespace orbitnet::sim
