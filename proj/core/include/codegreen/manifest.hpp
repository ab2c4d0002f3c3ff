#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "codegreen/providers.hpp"

namespace codegreen {

/// Everything needed to interpret one measure run after the fact: identity,
/// clocks, sampling setup and file locations. Written once per run; the
/// report references its run_id.
struct RunManifest {
    std::string run_id;
    std::vector<std::string> command;
    std::uint64_t start_wallclock_ns{0};
    std::int64_t clock_offset_ns{0}; // child monotonic -> sampler monotonic
    std::uint64_t interval_ns{10'000'000};
    std::size_t buffer_capacity{0};
    std::vector<ProviderDescriptor> providers;
    std::string checkpoint_dir;
    std::string report_path;
};

nlohmann::ordered_json to_json(const ProviderDescriptor& descriptor);
ProviderDescriptor provider_descriptor_from_json(const nlohmann::json& j);

nlohmann::ordered_json to_json(const RunManifest& manifest);
RunManifest manifest_from_json(const nlohmann::json& j);

} // namespace codegreen
