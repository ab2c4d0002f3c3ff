#pragma once

#include <compare>
#include <cstdint>
#include <string>

namespace codegreen {

/// A point on the per-run monotonic timeline, in nanoseconds since an
/// arbitrary epoch. All timestamps taken within one measurement run share
/// the same epoch; the clock never goes backwards.
struct MonotonicTimestamp {
    std::uint64_t nanos{0};

    auto operator<=>(const MonotonicTimestamp&) const = default;
};

/// Current CLOCK_MONOTONIC reading.
MonotonicTimestamp monotonic_now();

/// Current CLOCK_REALTIME reading in nanoseconds. Used only for the
/// wall-clock anchor that aligns clocks across processes, never for
/// attribution math.
std::uint64_t wallclock_now_ns();

/// Parses a duration with a mandatory unit suffix (ns, us, ms, s) into
/// nanoseconds, e.g. "10ms" -> 10'000'000. Bare numbers are rejected.
std::uint64_t parse_duration_ns(const std::string& text);

/// Renders nanoseconds with the largest exact unit, e.g. 10'000'000 -> "10ms".
std::string format_duration_ns(std::uint64_t nanos);

} // namespace codegreen
