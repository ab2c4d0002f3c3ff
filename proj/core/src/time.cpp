#include "codegreen/time.hpp"

#include <cctype>
#include <ctime>

#include "codegreen/errors.hpp"

namespace codegreen {

MonotonicTimestamp monotonic_now() {
    timespec ts{};
    clock_gettime(CLOCK_MONOTONIC, &ts);
    return MonotonicTimestamp{static_cast<std::uint64_t>(ts.tv_sec) * 1'000'000'000ull +
                              static_cast<std::uint64_t>(ts.tv_nsec)};
}

std::uint64_t wallclock_now_ns() {
    timespec ts{};
    clock_gettime(CLOCK_REALTIME, &ts);
    return static_cast<std::uint64_t>(ts.tv_sec) * 1'000'000'000ull +
           static_cast<std::uint64_t>(ts.tv_nsec);
}

std::uint64_t parse_duration_ns(const std::string& text) {
    std::size_t pos = 0;
    while (pos < text.size() && (std::isdigit(static_cast<unsigned char>(text[pos])) || text[pos] == '.'))
        ++pos;
    if (pos == 0)
        raise(ErrorCode::bad_argument, "duration must start with a number: '" + text + "'");

    const std::string number = text.substr(0, pos);
    const std::string unit = text.substr(pos);
    double value = 0.0;
    try {
        value = std::stod(number);
    } catch (const std::exception&) {
        raise(ErrorCode::bad_argument, "unparseable duration value: '" + text + "'");
    }
    if (value < 0)
        raise(ErrorCode::bad_argument, "duration must be non-negative: '" + text + "'");

    double scale = 0.0;
    if (unit == "ns")
        scale = 1.0;
    else if (unit == "us")
        scale = 1e3;
    else if (unit == "ms")
        scale = 1e6;
    else if (unit == "s")
        scale = 1e9;
    else if (unit.empty())
        raise(ErrorCode::bad_argument,
              "duration needs a unit suffix (ns, us, ms, s): '" + text + "'");
    else
        raise(ErrorCode::bad_argument, "unknown duration unit '" + unit + "'");

    return static_cast<std::uint64_t>(value * scale + 0.5);
}

std::string format_duration_ns(std::uint64_t nanos) {
    if (nanos == 0)
        return "0ns";
    if (nanos % 1'000'000'000ull == 0)
        return std::to_string(nanos / 1'000'000'000ull) + "s";
    if (nanos % 1'000'000ull == 0)
        return std::to_string(nanos / 1'000'000ull) + "ms";
    if (nanos % 1'000ull == 0)
        return std::to_string(nanos / 1'000ull) + "us";
    return std::to_string(nanos) + "ns";
}

} // namespace codegreen
