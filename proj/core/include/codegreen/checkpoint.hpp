#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "codegreen/time.hpp"

namespace codegreen {

/// Composite checkpoint identity: function name, 1-based per-thread
/// invocation counter, thread id. Rendered as `name#inv_N_tTID`.
struct CheckpointKey {
    std::string function_name;
    std::uint64_t invocation{0};
    std::uint64_t thread_id{0};

    auto operator<=>(const CheckpointKey&) const = default;
};

std::string to_string(const CheckpointKey& key);
std::optional<CheckpointKey> parse_key(std::string_view text);

/// Validates a function name (non-empty, no tab/newline/'#') and renders
/// the composite key.
CheckpointKey make_key(std::string_view function_name,
                       std::uint64_t invocation,
                       std::uint64_t thread_id);

enum class MarkerKind { begin, end };

struct CheckpointEvent {
    CheckpointKey key;
    MarkerKind kind{MarkerKind::begin};
    MonotonicTimestamp ts;
};

/// Clock anchor written once per log file: a (wall clock, monotonic clock)
/// pair that lets the CLI map a child process's monotonic epoch onto the
/// sampler's.
struct ClockAnchor {
    std::filesystem::path file;
    std::uint64_t wall_ns{0};
    std::uint64_t mono_ns{0};
};

/// Per-thread append-only checkpoint log writer (the native equivalent of
/// the shims injected into instrumented programs). One writer per thread;
/// writes are buffered and flushed at run end.
class CheckpointWriter {
public:
    /// Opens `<dir>/ckpt_<tid>.log` and writes the anchor line.
    explicit CheckpointWriter(const std::filesystem::path& dir);
    /// Test seam: explicit thread id and no anchor line unless asked.
    CheckpointWriter(const std::filesystem::path& dir, std::uint64_t thread_id, bool write_anchor);

    CheckpointWriter(const CheckpointWriter&) = delete;
    CheckpointWriter& operator=(const CheckpointWriter&) = delete;
    CheckpointWriter(CheckpointWriter&&) noexcept;
    CheckpointWriter& operator=(CheckpointWriter&&) noexcept;
    ~CheckpointWriter();

    /// Begin marker for this thread's next invocation of `function_name`;
    /// maintains the per-function counter and the open-invocation stack.
    CheckpointKey begin(std::string_view function_name);
    CheckpointKey begin_at(std::string_view function_name, MonotonicTimestamp ts);

    /// End marker for the most recent open begin.
    void end();
    void end_at(MonotonicTimestamp ts);

    /// Appends one already-formed event (the raw record operation).
    void record(const CheckpointEvent& event);

    void flush();
    const std::filesystem::path& path() const { return path_; }
    std::uint64_t thread_id() const { return thread_id_; }
    std::size_t open_depth() const { return open_stack_.size(); }

private:
    struct Counter {
        std::string name;
        std::uint64_t next{1};
    };

    std::uint64_t next_invocation(std::string_view function_name);

    std::filesystem::path path_;
    std::FILE* file_{nullptr};
    std::uint64_t thread_id_{0};
    std::vector<Counter> counters_;
    std::vector<CheckpointKey> open_stack_;
};

/// One line on disk: `<key>\tB|E\t<nanos>\n`.
std::string format_log_line(const CheckpointEvent& event);
std::optional<CheckpointEvent> parse_log_line(std::string_view line);

struct LogDiagnostic {
    std::filesystem::path file;
    std::size_t line_number{0};
    std::string line;
    std::string reason;
};

struct ParsedLog {
    std::vector<CheckpointEvent> events; // merged, stably time-sorted
    std::vector<ClockAnchor> anchors;
    std::vector<LogDiagnostic> malformed;
};

/// Parses per-thread checkpoint logs and merges them into one time-sorted
/// stream. Malformed lines become diagnostics, never failures.
ParsedLog parse_checkpoint_log(std::span<const std::filesystem::path> paths);

/// Convenience: all `ckpt_*.log` files under a directory.
std::vector<std::filesystem::path> find_checkpoint_logs(const std::filesystem::path& dir);

/// A paired begin/end yielding an attributable execution region.
struct Region {
    CheckpointKey key;
    MonotonicTimestamp t_begin;
    MonotonicTimestamp t_end;
    std::optional<CheckpointKey> parent;
    std::uint32_t depth{0};
};

enum class PairingIssue { unmatched_begin, unmatched_end, crossed_pairing };

const char* to_string(PairingIssue issue);

struct PairingDiagnostic {
    PairingIssue issue{PairingIssue::unmatched_begin};
    CheckpointKey key;
    MonotonicTimestamp ts;
};

struct PairingResult {
    std::vector<Region> regions; // ordered by t_begin
    std::vector<PairingDiagnostic> diagnostics;
};

/// Pairs time-sorted events into regions with a per-thread stack of open
/// begins. Ends that match a non-top stack entry are paired by key anyway
/// and reported as crossed_pairing; leftovers become unmatched diagnostics.
PairingResult pair_regions(std::span<const CheckpointEvent> events);

} // namespace codegreen
