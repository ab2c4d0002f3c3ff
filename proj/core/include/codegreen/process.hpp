#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace codegreen {

struct ProcessResult {
    int exit_code{0};
    std::uint64_t elapsed_ns{0};
    bool signalled{false};
    int term_signal{0};
};

/// Spawns argv[0] with the given arguments and extra environment entries,
/// inherits stdio, waits for exit. Elapsed time is wall time from just
/// before fork to wait completion on the monotonic clock.
ProcessResult run_process(const std::vector<std::string>& argv,
                          const std::map<std::string, std::string>& extra_env = {});

/// PATH lookup; empty string when not found.
std::string find_executable(const std::string& name);

} // namespace codegreen
