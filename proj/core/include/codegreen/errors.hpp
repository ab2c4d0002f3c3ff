#pragma once

#include <stdexcept>
#include <string>

namespace codegreen {

enum class ErrorCode {
    // telemetry
    series_too_short,
    not_unwrapped,
    inverted_interval,
    zero_wrap_range,
    non_monotonic_timestamps,
    negative_power,
    too_few_points,
    duplicate_timestamp,
    // providers
    unknown_domain,
    read_failure,
    unsupported,
    // sampler
    provider_probe_failed,
    already_running,
    not_running,
    // checkpoint
    invalid_name,
    io_failure,
    no_files,
    // correlator
    fixture_missing,
    underdetermined_fit,
    zero_native_time,
    // instrumenter
    parse_error,
    unsupported_language,
    already_instrumented,
    crossing_ranges,
    shim_template_missing,
    offset_out_of_range,
    reparse_failed,
    // cli
    instrumentation_failed,
    spawn_failed,
    no_provider,
    bad_argument,
    bad_config,
};

const char* to_string(ErrorCode code);

/// Single exception type for all fatal library errors; non-fatal conditions
/// travel as diagnostics alongside results instead.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void raise(ErrorCode code, const std::string& message) {
    throw Error(code, message);
}

} // namespace codegreen
