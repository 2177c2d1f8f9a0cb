#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>

#include "orbitnet/constellation.hpp"

namespace orbitnet::sim {

enum class DropReason {
  buffer_overflow,
  no_such_port,
  stale_route,
  header_exhausted,
  link_down,
  no_route,
};
inline constexpr std::size_t kDropReasonCount = 6;
inline constexpr std::array<DropReason, kDropReasonCount> kAllDropReasons = {
    DropReason::buffer_overflow,  DropReason::no_such_port, DropReason::stale_route,
    DropReason::header_exhausted, DropReason::link_down,    DropReason::no_route,
};

/// launch: packet created (node = source station).
/// enqueue: accepted on a port queue; value = queue length in packets.
/// deliver / drop: terminal; value = hops taken.
/// link_sample: node -> port's far end carried `value` bit/s over the
///   interval ending at `time`; packet_id holds the far-end node.
/// snapshot: a topology snapshot took effect; value = link count.
enum class EventKind { launch, enqueue, deliver, drop, link_sample, snapshot };

std::string_view to_string(DropReason r);
std::string_view to_string(EventKind k);
std::optional<DropReason> parse_drop_reason(std::string_view s);
std::optional<EventKind> parse_event_kind(std::string_view s);

struct LogRecord {
  double time = 0.0;
  EventKind kind = EventKind::launch;
  std::int64_t packet_id = -1;
  NodeId node = kNoNode;
  int port = -1;
  std::optional<DropReason> reason;
  double value = 0.0;
  bool stale = false;  // terminal records: packet met a header/topology mismatch

  bool operator==(const LogRecord&) const = default;
};

class EventSink {
 public:
  virtual ~EventSink() = default;
  virtual void on_record(const LogRecord& rec) = 0;
};

}  // namespace orbitnet::sim
