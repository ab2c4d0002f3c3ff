#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "codegreen/instrumenter.hpp"
#include "codegreen/providers.hpp"

namespace codegreen {

/// Tool configuration: a flat key-value file in the user config directory.
/// Every field round-trips through serialize/parse losslessly.
struct ToolConfig {
    std::uint64_t interval_ns{10'000'000};
    std::string output{"text"}; // text | json
    std::string powercap_root;  // empty = $CODEGREEN_POWERCAP_ROOT or /sys/class/powercap
    std::vector<std::string> providers{"rapl", "synthetic"};
    std::vector<std::string> scopes{"function", "method"};
    std::vector<std::string> include_patterns;
    std::vector<std::string> exclude_patterns;
    std::string loop_mode{"whole_loop"};
    std::string synthetic_shape{"constant"};
    double synthetic_base_watts{10.0};
    double synthetic_amplitude_watts{0.0};
    std::uint64_t synthetic_period_ns{1'000'000};
    std::uint64_t synthetic_seed{0};
    double gpu_stub_watts{25.0};
    std::size_t buffer_capacity{0}; // 0 = auto
    bool report_series{false};
    bool report_invocations{false};
    // Reserved: accepted and persisted but not yet interpreted anywhere.
    std::string accuracy_threshold;

    /// Known keys in file order.
    static const std::vector<std::string>& known_keys();

    /// Sets one key from its textual value; throws BadConfig on unknown
    /// keys or unparseable values.
    void set(const std::string& key, const std::string& value);
    std::string get(const std::string& key) const;

    std::string serialize() const;
    static ToolConfig parse(const std::string& text);

    static std::filesystem::path config_dir();   // honors $CODEGREEN_CONFIG_DIR
    static std::filesystem::path config_file();  // <dir>/config
    static ToolConfig load();                    // file or defaults
    void save() const;

    GranularityConfig granularity() const;
    SyntheticWaveform synthetic_waveform() const;
    DiscoveryOptions discovery_options() const;
};

} // namespace codegreen
