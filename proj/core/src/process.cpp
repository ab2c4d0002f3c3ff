#include "codegreen/process.hpp"

#include <cerrno>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <sys/wait.h>
#include <unistd.h>

#include "codegreen/errors.hpp"
#include "codegreen/time.hpp"

extern char** environ;

namespace codegreen {

ProcessResult run_process(const std::vector<std::string>& argv,
                          const std::map<std::string, std::string>& extra_env) {
    if (argv.empty())
        raise(ErrorCode::spawn_failed, "empty argv");

    std::vector<char*> c_argv;
    c_argv.reserve(argv.size() + 1);
    for (const std::string& arg : argv)
        c_argv.push_back(const_cast<char*>(arg.c_str()));
    c_argv.push_back(nullptr);

    const MonotonicTimestamp start = monotonic_now();
    const pid_t pid = ::fork();
    if (pid < 0)
        raise(ErrorCode::spawn_failed, std::string("fork: ") + std::strerror(errno));

    if (pid == 0) {
        for (const auto& [key, value] : extra_env)
            ::setenv(key.c_str(), value.c_str(), 1);
        ::execvp(c_argv[0], c_argv.data());
        std::fprintf(stderr, "codegreen: exec %s: %s\n", c_argv[0], std::strerror(errno));
        ::_exit(127);
    }

    int status = 0;
    while (::waitpid(pid, &status, 0) < 0) {
        if (errno != EINTR)
            raise(ErrorCode::spawn_failed, std::string("waitpid: ") + std::strerror(errno));
    }
    const MonotonicTimestamp end = monotonic_now();

    ProcessResult result;
    result.elapsed_ns = end.nanos - start.nanos;
    if (WIFEXITED(status)) {
        result.exit_code = WEXITSTATUS(status);
    } else if (WIFSIGNALED(status)) {
        result.signalled = true;
        result.term_signal = WTERMSIG(status);
        result.exit_code = 128 + WTERMSIG(status);
    }
    return result;
}

std::string find_executable(const std::string& name) {
    if (name.find('/') != std::string::npos)
        return std::filesystem::exists(name) ? name : std::string{};
    const char* path_env = std::getenv("PATH");
    if (!path_env)
        return {};
    std::string path(path_env);
    std::size_t begin = 0;
    while (begin <= path.size()) {
        const std::size_t end = path.find(':', begin);
        const std::string dir =
            path.substr(begin, end == std::string::npos ? std::string::npos : end - begin);
        if (!dir.empty()) {
            const std::filesystem::path candidate = std::filesystem::path(dir) / name;
            std::error_code ec;
            if (std::filesystem::is_regular_file(candidate, ec) &&
                ::access(candidate.c_str(), X_OK) == 0)
                return candidate.string();
        }
        if (end == std::string::npos)
            break;
        begin = end + 1;
    }
    return {};
}

} // namespace codegreen
