#include "codegreen/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "codegreen/errors.hpp"
#include "codegreen/time.hpp"

namespace codegreen {

namespace {

std::vector<std::string> split_list(const std::string& value) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(value);
    while (std::getline(in, item, ','))
        if (!item.empty())
            out.push_back(item);
    return out;
}

std::string join_list(const std::vector<std::string>& values) {
    std::string out;
    for (const std::string& v : values) {
        if (!out.empty())
            out += ',';
        out += v;
    }
    return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1" || value == "on")
        return true;
    if (value == "false" || value == "0" || value == "off")
        return false;
    raise(ErrorCode::bad_config, key + ": expected true/false, got '" + value + "'");
}

double parse_double(const std::string& key, const std::string& value) {
    try {
        return std::stod(value);
    } catch (const std::exception&) {
        raise(ErrorCode::bad_config, key + ": expected a number, got '" + value + "'");
    }
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
    try {
        return std::stoull(value);
    } catch (const std::exception&) {
        raise(ErrorCode::bad_config, key + ": expected an integer, got '" + value + "'");
    }
}

} // namespace

const std::vector<std::string>& ToolConfig::known_keys() {
    static const std::vector<std::string> keys{
        "interval",
        "output",
        "powercap_root",
        "providers",
        "scopes",
        "include",
        "exclude",
        "loop_mode",
        "synthetic_shape",
        "synthetic_base_watts",
        "synthetic_amplitude_watts",
        "synthetic_period",
        "synthetic_seed",
        "gpu_stub_watts",
        "buffer_capacity",
        "report_series",
        "report_invocations",
        "accuracy_threshold",
    };
    return keys;
}

void ToolConfig::set(const std::string& key, const std::string& value) {
    if (key == "interval") {
        const std::uint64_t ns = parse_duration_ns(value);
        if (ns == 0)
            raise(ErrorCode::bad_config, "interval must be positive");
        interval_ns = ns;
    } else if (key == "output") {
        if (value != "text" && value != "json")
            raise(ErrorCode::bad_config, "output must be text or json");
        output = value;
    } else if (key == "powercap_root") {
        powercap_root = value;
    } else if (key == "providers") {
        for (const std::string& p : split_list(value))
            if (p != "rapl" && p != "synthetic" && p != "gpu_stub")
                raise(ErrorCode::bad_config, "unknown provider '" + p + "'");
        providers = split_list(value);
    } else if (key == "scopes") {
        for (const std::string& s : split_list(value))
            if (!parse_scope_kind(s))
                raise(ErrorCode::bad_config, "unknown scope '" + s + "'");
        scopes = split_list(value);
    } else if (key == "include") {
        include_patterns = split_list(value);
    } else if (key == "exclude") {
        exclude_patterns = split_list(value);
    } else if (key == "loop_mode") {
        if (value != "whole_loop" && value != "per_iteration")
            raise(ErrorCode::bad_config, "loop_mode must be whole_loop or per_iteration");
        loop_mode = value;
    } else if (key == "synthetic_shape") {
        if (!parse_waveform_shape(value))
            raise(ErrorCode::bad_config, "unknown waveform shape '" + value + "'");
        synthetic_shape = value;
    } else if (key == "synthetic_base_watts") {
        synthetic_base_watts = parse_double(key, value);
    } else if (key == "synthetic_amplitude_watts") {
        synthetic_amplitude_watts = parse_double(key, value);
    } else if (key == "synthetic_period") {
        synthetic_period_ns = parse_duration_ns(value);
    } else if (key == "synthetic_seed") {
        synthetic_seed = parse_u64(key, value);
    } else if (key == "gpu_stub_watts") {
        gpu_stub_watts = parse_double(key, value);
    } else if (key == "buffer_capacity") {
        buffer_capacity = parse_u64(key, value);
    } else if (key == "report_series") {
        report_series = parse_bool(key, value);
    } else if (key == "report_invocations") {
        report_invocations = parse_bool(key, value);
    } else if (key == "accuracy_threshold") {
        accuracy_threshold = value; // reserved, not interpreted yet
    } else {
        raise(ErrorCode::bad_config, "unknown config key '" + key + "'");
    }
}

std::string ToolConfig::get(const std::string& key) const {
    if (key == "interval") return format_duration_ns(interval_ns);
    if (key == "output") return output;
    if (key == "powercap_root") return powercap_root;
    if (key == "providers") return join_list(providers);
    if (key == "scopes") return join_list(scopes);
    if (key == "include") return join_list(include_patterns);
    if (key == "exclude") return join_list(exclude_patterns);
    if (key == "loop_mode") return loop_mode;
    if (key == "synthetic_shape") return synthetic_shape;
    if (key == "synthetic_base_watts") return std::to_string(synthetic_base_watts);
    if (key == "synthetic_amplitude_watts") return std::to_string(synthetic_amplitude_watts);
    if (key == "synthetic_period") return format_duration_ns(synthetic_period_ns);
    if (key == "synthetic_seed") return std::to_string(synthetic_seed);
    if (key == "gpu_stub_watts") return std::to_string(gpu_stub_watts);
    if (key == "buffer_capacity") return std::to_string(buffer_capacity);
    if (key == "report_series") return report_series ? "true" : "false";
    if (key == "report_invocations") return report_invocations ? "true" : "false";
    if (key == "accuracy_threshold") return accuracy_threshold;
    raise(ErrorCode::bad_config, "unknown config key '" + key + "'");
}

std::string ToolConfig::serialize() const {
    std::string out = "# codegreen configuration\n";
    for (const std::string& key : known_keys()) {
        const std::string value = get(key);
        if (!value.empty())
            out += key + " " + value + "\n";
    }
    return out;
}

ToolConfig ToolConfig::parse(const std::string& text) {
    ToolConfig config;
    std::istringstream in(text);
    std::string line;
    std::size_t line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (line.empty() || line[0] == '#')
            continue;
        const std::size_t space = line.find(' ');
        if (space == std::string::npos)
            raise(ErrorCode::bad_config,
                  "config line " + std::to_string(line_number) + ": expected 'key value'");
        config.set(line.substr(0, space), line.substr(space + 1));
    }
    return config;
}

std::filesystem::path ToolConfig::config_dir() {
    if (const char* env = std::getenv("CODEGREEN_CONFIG_DIR"); env && *env)
        return env;
    if (const char* xdg = std::getenv("XDG_CONFIG_HOME"); xdg && *xdg)
        return std::filesystem::path(xdg) / "codegreen";
    if (const char* home = std::getenv("HOME"); home && *home)
        return std::filesystem::path(home) / ".config" / "codegreen";
    return std::filesystem::current_path() / ".codegreen";
}

std::filesystem::path ToolConfig::config_file() { return config_dir() / "config"; }

ToolConfig ToolConfig::load() {
    std::ifstream in(config_file());
    if (!in)
        return ToolConfig{};
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse(buffer.str());
}

void ToolConfig::save() const {
    std::filesystem::create_directories(config_dir());
    std::ofstream out(config_file());
    if (!out)
        raise(ErrorCode::io_failure, config_file().string() + ": cannot write");
    out << serialize();
}

GranularityConfig ToolConfig::granularity() const {
    GranularityConfig g;
    g.scopes.clear();
    for (const std::string& s : scopes)
        if (const auto kind = parse_scope_kind(s))
            g.scopes.insert(*kind);
    g.include_patterns = include_patterns;
    g.exclude_patterns = exclude_patterns;
    g.loop_mode =
        loop_mode == "per_iteration" ? LoopMode::per_iteration : LoopMode::whole_loop;
    return g;
}

SyntheticWaveform ToolConfig::synthetic_waveform() const {
    SyntheticWaveform w;
    if (const auto shape = parse_waveform_shape(synthetic_shape))
        w.shape = *shape;
    w.base_watts = synthetic_base_watts;
    w.amplitude_watts = synthetic_amplitude_watts;
    w.period_ns = synthetic_period_ns;
    w.seed = synthetic_seed;
    return w;
}

DiscoveryOptions ToolConfig::discovery_options() const {
    DiscoveryOptions options;
    options.powercap_root = powercap_root;
    options.synthetic = synthetic_waveform();
    options.enable_rapl = false;
    options.enable_synthetic = false;
    for (const std::string& p : providers) {
        if (p == "rapl")
            options.enable_rapl = true;
        else if (p == "synthetic")
            options.enable_synthetic = true;
        else if (p == "gpu_stub")
            options.enable_gpu_stub = true;
    }
    options.gpu_stub_watts = gpu_stub_watts;
    return options;
}

} // namespace codegreen
