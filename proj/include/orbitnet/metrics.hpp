#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "orbitnet/events.hpp"

namespace orbitnet::sim {

/// Run facts the fold needs besides the records themselves.
struct RunInfo {
  double duration = 0.0;
  double snapshot_interval = 1.0;
  double packet_size_bits = 12000.0;
  int satellite_count = 0;
  double link_rate = 0.0;
};

struct SeriesRow {
  double t = 0.0;  // interval start
  double throughput_bps = 0.0;
  std::int64_t drops_cum = 0;
  double mean_utilization_bps = 0.0;

  bool operator==(const SeriesRow&) const = default;
};

struct MetricsReport {
  std::int64_t launched = 0;
  std::int64_t delivered = 0;
  std::int64_t dropped = 0;
  std::int64_t in_flight = 0;
  double delivered_fraction = 0.0;
  double dropped_fraction = 0.0;
  double in_flight_fraction = 0.0;
  std::array<std::int64_t, kDropReasonCount> drop_counts{};
  std::array<double, kDropReasonCount> drop_breakdown{};  // share of all drops
  double average_buffer_occupation = 0.0;  // packets
  double average_active_satellites = 0.0;
  double average_latency = 0.0;            // s, delivered packets
  double average_link_utilization = 0.0;   // bit/s
  double average_hops = 0.0;               // delivered packets
  std::int64_t stale_packets = 0;
  double stale_mean_hops = 0.0;
  std::vector<SeriesRow> series;

  bool operator==(const MetricsReport&) const = default;
};

/// Streaming fold over the event log. Records must arrive in log order;
/// an inconsistent sequence throws IntegrityError naming the record.
class MetricsAccumulator : public EventSink {
 public:
  explicit MetricsAccumulator(RunInfo info);

  void on_record(const LogRecord& rec) override;
  MetricsReport finish() const;

 private:
  void close_interval(double end);

  RunInfo info_;
  std::int64_t records_ = 0;
  double last_time_ = 0.0;
  std::vector<double> launch_time_;
  std::vector<char> done_;
  MetricsReport r_;
  double latency_sum_ = 0.0;
  double hops_sum_ = 0.0;
  double stale_hops_sum_ = 0.0;
  double occupancy_sum_ = 0.0;
  std::int64_t enqueues_ = 0;
  double util_sum_ = 0.0;
  std::int64_t util_samples_ = 0;

  // current snapshot interval
  bool open_ = false;
  double interval_start_ = 0.0;
  std::vector<char> active_;
  std::int64_t active_sum_ = 0;
  std::int64_t intervals_ = 0;
  double interval_delivered_bits_ = 0.0;
  double interval_util_sum_ = 0.0;
  std::int64_t interval_util_n_ = 0;
};

MetricsReport summarize(const std::vector<LogRecord>& log, const RunInfo& info);

/// Sink that keeps every record in memory.
class RecordingSink : public EventSink {
 public:
  void on_record(const LogRecord& rec) override { records.push_back(rec); }
  std::vector<LogRecord> records;
};

/// Fans one record stream out to several sinks.
class TeeSink : public EventSink {
 public:
  explicit TeeSink(std::vector<EventSink*> sinks) : sinks_(std::move(sinks)) {}
  void on_record(const LogRecord& rec) override {
    for (auto* s : sinks_) s->on_record(rec);
  }

 private:
  std::vector<EventSink*> sinks_;
};

// ---------------------------------------------------------------------------
// Event CSV: time_s,event_kind,packet_id,node,port,reason,value,stale

class CsvEventWriter : public EventSink {
 public:
  explicit CsvEventWriter(std::ostream& out);
  void on_record(const LogRecord& rec) override;

 private:
  std::ostream* out_;
};

std::vector<LogRecord> read_event_csv(std::istream& in);

// ---------------------------------------------------------------------------
// Summary and series output

/// Labels identifying a run in the summary table.
using RunLabels = std::vector<std::pair<std::string, std::string>>;

std::vector<std::string> summary_columns();
std::vector<std::string> summary_values(const MetricsReport& r);

void write_summary_csv(std::ostream& out, const std::vector<RunLabels>& labels,
                       const std::vector<MetricsReport>& reports);
/// Parses a summary CSV back into label/value maps, one per row.
std::vector<std::map<std::string, std::string>> read_summary_csv(std::istream& in);

void write_series_csv(std::ostream& out, const MetricsReport& r);
void write_console_table(std::ostream& out, const RunLabels& labels, const MetricsReport& r);

/// Shortest decimal form that reads back to the same double.
std::string format_double(double x);

}  // namespace orbitnet::sim
