#include "codegreen/checkpoint.hpp"

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cstring>
#include <fstream>
#include <unistd.h>

#include "codegreen/errors.hpp"

#ifdef __linux__
#include <sys/syscall.h>
#endif

namespace codegreen {

namespace {

std::uint64_t current_thread_id() {
#ifdef __linux__
    return static_cast<std::uint64_t>(::syscall(SYS_gettid));
#else
    return static_cast<std::uint64_t>(::getpid());
#endif
}

bool valid_function_name(std::string_view name) {
    if (name.empty())
        return false;
    for (char c : name)
        if (c == '\t' || c == '\n' || c == '#')
            return false;
    return true;
}

std::optional<std::uint64_t> parse_u64(std::string_view text) {
    if (text.empty())
        return std::nullopt;
    std::uint64_t value = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size())
        return std::nullopt;
    return value;
}

} // namespace

std::string to_string(const CheckpointKey& key) {
    return key.function_name + "#inv_" + std::to_string(key.invocation) + "_t" +
           std::to_string(key.thread_id);
}

std::optional<CheckpointKey> parse_key(std::string_view text) {
    const std::size_t hash = text.rfind('#');
    if (hash == std::string_view::npos || hash == 0)
        return std::nullopt;
    std::string_view tail = text.substr(hash + 1);
    if (tail.rfind("inv_", 0) != 0)
        return std::nullopt;
    tail.remove_prefix(4);
    const std::size_t t_pos = tail.rfind("_t");
    if (t_pos == std::string_view::npos)
        return std::nullopt;
    const auto invocation = parse_u64(tail.substr(0, t_pos));
    const auto thread_id = parse_u64(tail.substr(t_pos + 2));
    if (!invocation || !thread_id)
        return std::nullopt;
    const std::string_view name = text.substr(0, hash);
    if (!valid_function_name(name))
        return std::nullopt;
    return CheckpointKey{std::string(name), *invocation, *thread_id};
}

CheckpointKey make_key(std::string_view function_name,
                       std::uint64_t invocation,
                       std::uint64_t thread_id) {
    if (!valid_function_name(function_name))
        raise(ErrorCode::invalid_name,
              "function name must be non-empty and free of tab/newline/'#': '" +
                  std::string(function_name) + "'");
    return CheckpointKey{std::string(function_name), invocation, thread_id};
}

// ---------------------------------------------------------------------------
// Writer

CheckpointWriter::CheckpointWriter(const std::filesystem::path& dir)
    : CheckpointWriter(dir, current_thread_id(), true) {}

CheckpointWriter::CheckpointWriter(const std::filesystem::path& dir,
                                   std::uint64_t thread_id,
                                   bool write_anchor)
    : thread_id_(thread_id) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    path_ = dir / ("ckpt_" + std::to_string(thread_id) + ".log");
    file_ = std::fopen(path_.c_str(), "ae");
    if (!file_)
        raise(ErrorCode::io_failure, path_.string() + ": " + std::strerror(errno));
    if (write_anchor) {
        const std::uint64_t wall = wallclock_now_ns();
        const std::uint64_t mono = monotonic_now().nanos;
        std::fprintf(file_, "#anchor\t%llu\t%llu\n", static_cast<unsigned long long>(wall),
                     static_cast<unsigned long long>(mono));
    }
}

CheckpointWriter::CheckpointWriter(CheckpointWriter&& other) noexcept
    : path_(std::move(other.path_)),
      file_(other.file_),
      thread_id_(other.thread_id_),
      counters_(std::move(other.counters_)),
      open_stack_(std::move(other.open_stack_)) {
    other.file_ = nullptr;
}

CheckpointWriter& CheckpointWriter::operator=(CheckpointWriter&& other) noexcept {
    if (this != &other) {
        if (file_)
            std::fclose(file_);
        path_ = std::move(other.path_);
        file_ = other.file_;
        thread_id_ = other.thread_id_;
        counters_ = std::move(other.counters_);
        open_stack_ = std::move(other.open_stack_);
        other.file_ = nullptr;
    }
    return *this;
}

CheckpointWriter::~CheckpointWriter() {
    if (file_)
        std::fclose(file_);
}

std::uint64_t CheckpointWriter::next_invocation(std::string_view function_name) {
    for (Counter& c : counters_)
        if (c.name == function_name)
            return c.next++;
    counters_.push_back({std::string(function_name), 2});
    return 1;
}

CheckpointKey CheckpointWriter::begin(std::string_view function_name) {
    return begin_at(function_name, monotonic_now());
}

CheckpointKey CheckpointWriter::begin_at(std::string_view function_name, MonotonicTimestamp ts) {
    CheckpointKey key = make_key(function_name, 0, thread_id_);
    key.invocation = next_invocation(function_name);
    record({key, MarkerKind::begin, ts});
    open_stack_.push_back(key);
    return key;
}

void CheckpointWriter::end() { end_at(monotonic_now()); }

void CheckpointWriter::end_at(MonotonicTimestamp ts) {
    if (open_stack_.empty())
        raise(ErrorCode::invalid_name, "end() with no open begin on thread " +
                                           std::to_string(thread_id_));
    record({open_stack_.back(), MarkerKind::end, ts});
    open_stack_.pop_back();
}

void CheckpointWriter::record(const CheckpointEvent& event) {
    if (std::fprintf(file_, "%s\t%c\t%llu\n", to_string(event.key).c_str(),
                     event.kind == MarkerKind::begin ? 'B' : 'E',
                     static_cast<unsigned long long>(event.ts.nanos)) < 0)
        raise(ErrorCode::io_failure, path_.string() + ": write failed");
}

void CheckpointWriter::flush() {
    if (file_ && std::fflush(file_) != 0)
        raise(ErrorCode::io_failure, path_.string() + ": flush failed");
}

// ---------------------------------------------------------------------------
// Log format

std::string format_log_line(const CheckpointEvent& event) {
    return to_string(event.key) + '\t' + (event.kind == MarkerKind::begin ? 'B' : 'E') + '\t' +
           std::to_string(event.ts.nanos) + '\n';
}

std::optional<CheckpointEvent> parse_log_line(std::string_view line) {
    while (!line.empty() && (line.back() == '\n' || line.back() == '\r'))
        line.remove_suffix(1);
    const std::size_t tab1 = line.find('\t');
    if (tab1 == std::string_view::npos)
        return std::nullopt;
    const std::size_t tab2 = line.find('\t', tab1 + 1);
    if (tab2 == std::string_view::npos)
        return std::nullopt;
    const auto key = parse_key(line.substr(0, tab1));
    if (!key)
        return std::nullopt;
    const std::string_view kind = line.substr(tab1 + 1, tab2 - tab1 - 1);
    if (kind != "B" && kind != "E")
        return std::nullopt;
    const auto nanos = parse_u64(line.substr(tab2 + 1));
    if (!nanos)
        return std::nullopt;
    return CheckpointEvent{*key, kind == "B" ? MarkerKind::begin : MarkerKind::end,
                           MonotonicTimestamp{*nanos}};
}

ParsedLog parse_checkpoint_log(std::span<const std::filesystem::path> paths) {
    if (paths.empty())
        raise(ErrorCode::no_files, "no checkpoint log files given");

    ParsedLog out;
    for (const auto& path : paths) {
        std::ifstream in(path);
        if (!in)
            raise(ErrorCode::no_files, path.string() + ": cannot open");
        std::string line;
        std::size_t line_number = 0;
        while (std::getline(in, line)) {
            ++line_number;
            if (line.empty())
                continue;
            if (line[0] == '#') {
                // Metadata line; only #anchor is defined today.
                unsigned long long wall = 0, mono = 0;
                if (std::sscanf(line.c_str(), "#anchor\t%llu\t%llu", &wall, &mono) == 2)
                    out.anchors.push_back({path, wall, mono});
                else
                    out.malformed.push_back({path, line_number, line, "unknown metadata line"});
                continue;
            }
            if (auto event = parse_log_line(line))
                out.events.push_back(std::move(*event));
            else
                out.malformed.push_back({path, line_number, line, "unparseable event line"});
        }
    }
    std::stable_sort(out.events.begin(), out.events.end(),
                     [](const CheckpointEvent& a, const CheckpointEvent& b) { return a.ts < b.ts; });
    return out;
}

std::vector<std::filesystem::path> find_checkpoint_logs(const std::filesystem::path& dir) {
    std::vector<std::filesystem::path> logs;
    std::error_code ec;
    for (const auto& entry : std::filesystem::directory_iterator(dir, ec)) {
        const std::string name = entry.path().filename().string();
        if (name.rfind("ckpt_", 0) == 0 && entry.path().extension() == ".log")
            logs.push_back(entry.path());
    }
    std::sort(logs.begin(), logs.end());
    return logs;
}

// ---------------------------------------------------------------------------
// Pairing

const char* to_string(PairingIssue issue) {
    switch (issue) {
    case PairingIssue::unmatched_begin: return "unmatched_begin";
    case PairingIssue::unmatched_end: return "unmatched_end";
    case PairingIssue::crossed_pairing: return "crossed_pairing";
    }
    return "unknown";
}

namespace {

struct OpenBegin {
    CheckpointKey key;
    MonotonicTimestamp ts;
    std::uint32_t depth;
    std::optional<CheckpointKey> parent;
};

struct ThreadStack {
    std::uint64_t thread_id;
    std::vector<OpenBegin> stack;
};

} // namespace

PairingResult pair_regions(std::span<const CheckpointEvent> events) {
    PairingResult result;
    std::vector<ThreadStack> threads;

    auto stack_for = [&threads](std::uint64_t tid) -> std::vector<OpenBegin>& {
        for (ThreadStack& t : threads)
            if (t.thread_id == tid)
                return t.stack;
        threads.push_back({tid, {}});
        return threads.back().stack;
    };

    for (const CheckpointEvent& event : events) {
        std::vector<OpenBegin>& stack = stack_for(event.key.thread_id);
        if (event.kind == MarkerKind::begin) {
            OpenBegin open;
            open.key = event.key;
            open.ts = event.ts;
            open.depth = static_cast<std::uint32_t>(stack.size());
            if (!stack.empty())
                open.parent = stack.back().key;
            stack.push_back(std::move(open));
            continue;
        }

        // End: match by key, expected at the top of this thread's stack.
        auto match = std::find_if(stack.rbegin(), stack.rend(),
                                  [&](const OpenBegin& b) { return b.key == event.key; });
        if (match == stack.rend()) {
            result.diagnostics.push_back({PairingIssue::unmatched_end, event.key, event.ts});
            continue;
        }
        if (match != stack.rbegin())
            result.diagnostics.push_back({PairingIssue::crossed_pairing, event.key, event.ts});

        Region region;
        region.key = match->key;
        region.t_begin = match->ts;
        region.t_end = event.ts;
        region.parent = match->parent;
        region.depth = match->depth;
        result.regions.push_back(std::move(region));
        stack.erase(std::next(match).base());
    }

    for (const ThreadStack& t : threads)
        for (const OpenBegin& open : t.stack)
            result.diagnostics.push_back({PairingIssue::unmatched_begin, open.key, open.ts});

    std::stable_sort(result.regions.begin(), result.regions.end(),
                     [](const Region& a, const Region& b) { return a.t_begin < b.t_begin; });
    return result;
}

} // namespace codegreen
