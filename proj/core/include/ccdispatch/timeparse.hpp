#pragma once

#include <cstdint>
#include <string>

namespace ccd {

/// Seconds since the Unix epoch, UTC.
using Timestamp = std::int64_t;

/// Parses "YYYY-MM-DDTHH:MM:SS" with optional trailing 'Z'.
Timestamp parse_iso8601(const std::string& s);

std::string format_iso8601(Timestamp t);

/// Half-open interval [begin, end) of timestamps.
struct TimeWindow {
  Timestamp begin = 0;
  Timestamp end = 0;
  bool contains(Timestamp t) const { return begin <= t && t < end; }
};

constexpr std::int64_t kSecondsPerDay = 86400;

}  // namespace ccd
