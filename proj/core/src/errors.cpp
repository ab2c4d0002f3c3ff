#include "codegreen/errors.hpp"

namespace codegreen {

const char* to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::series_too_short: return "SeriesTooShort";
    case ErrorCode::not_unwrapped: return "NotUnwrapped";
    case ErrorCode::inverted_interval: return "InvertedInterval";
    case ErrorCode::zero_wrap_range: return "ZeroWrapRange";
    case ErrorCode::non_monotonic_timestamps: return "NonMonotonicTimestamps";
    case ErrorCode::negative_power: return "NegativePower";
    case ErrorCode::too_few_points: return "TooFewPoints";
    case ErrorCode::duplicate_timestamp: return "DuplicateTimestamp";
    case ErrorCode::unknown_domain: return "UnknownDomain";
    case ErrorCode::read_failure: return "ReadFailure";
    case ErrorCode::unsupported: return "Unsupported";
    case ErrorCode::provider_probe_failed: return "ProviderProbeFailed";
    case ErrorCode::already_running: return "AlreadyRunning";
    case ErrorCode::not_running: return "NotRunning";
    case ErrorCode::invalid_name: return "InvalidName";
    case ErrorCode::io_failure: return "IoFailure";
    case ErrorCode::no_files: return "NoFiles";
    case ErrorCode::fixture_missing: return "FixtureMissing";
    case ErrorCode::underdetermined_fit: return "UnderdeterminedFit";
    case ErrorCode::zero_native_time: return "ZeroNativeTime";
    case ErrorCode::parse_error: return "ParseError";
    case ErrorCode::unsupported_language: return "UnsupportedLanguage";
    case ErrorCode::already_instrumented: return "AlreadyInstrumented";
    case ErrorCode::crossing_ranges: return "CrossingRanges";
    case ErrorCode::shim_template_missing: return "ShimTemplateMissing";
    case ErrorCode::offset_out_of_range: return "OffsetOutOfRange";
    case ErrorCode::reparse_failed: return "ReparseFailed";
    case ErrorCode::instrumentation_failed: return "InstrumentationFailed";
    case ErrorCode::spawn_failed: return "SpawnFailed";
    case ErrorCode::no_provider: return "NoProvider";
    case ErrorCode::bad_argument: return "BadArgument";
    case ErrorCode::bad_config: return "BadConfig";
    }
    return "UnknownError";
}

} // namespace codegreen
