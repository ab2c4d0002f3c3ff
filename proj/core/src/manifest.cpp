#include "codegreen/manifest.hpp"

#include "codegreen/errors.hpp"

namespace codegreen {

namespace {

std::optional<ProviderKind> parse_provider_kind(const std::string& name) {
    if (name == "rapl_sysfs") return ProviderKind::rapl_sysfs;
    if (name == "synthetic") return ProviderKind::synthetic;
    if (name == "gpu_stub") return ProviderKind::gpu_stub;
    return std::nullopt;
}

} // namespace

nlohmann::ordered_json to_json(const ProviderDescriptor& descriptor) {
    nlohmann::ordered_json j;
    j["id"] = descriptor.id;
    j["kind"] = to_string(descriptor.kind);
    nlohmann::ordered_json domains = nlohmann::ordered_json::array();
    for (const DomainId& d : descriptor.domains)
        domains.push_back(to_string(d.domain));
    j["domains"] = std::move(domains);
    j["native_update_interval_ns"] = descriptor.native_update_interval_ns;
    nlohmann::ordered_json wraps = nlohmann::ordered_json::object();
    for (const auto& [domain, range] : descriptor.wrap_range_uj)
        wraps[to_string(domain)] = range;
    j["wrap_range_uj"] = std::move(wraps);
    j["requires_privilege"] = descriptor.requires_privilege;
    return j;
}

ProviderDescriptor provider_descriptor_from_json(const nlohmann::json& j) {
    ProviderDescriptor d;
    d.id = j.at("id").get<std::string>();
    const auto kind = parse_provider_kind(j.at("kind").get<std::string>());
    if (!kind)
        raise(ErrorCode::bad_config, "unknown provider kind in manifest");
    d.kind = *kind;
    for (const auto& name : j.at("domains")) {
        const auto domain = parse_domain(name.get<std::string>());
        if (!domain)
            raise(ErrorCode::bad_config, "unknown domain in manifest");
        d.domains.push_back(DomainId{d.id, *domain});
    }
    d.native_update_interval_ns = j.at("native_update_interval_ns").get<std::uint64_t>();
    if (j.contains("wrap_range_uj")) {
        for (const auto& [name, range] : j.at("wrap_range_uj").items()) {
            const auto domain = parse_domain(name);
            if (domain)
                d.wrap_range_uj[*domain] = range.get<std::uint64_t>();
        }
    }
    d.requires_privilege = j.value("requires_privilege", false);
    return d;
}

nlohmann::ordered_json to_json(const RunManifest& manifest) {
    nlohmann::ordered_json j;
    j["run_id"] = manifest.run_id;
    j["command"] = manifest.command;
    j["start_wallclock_ns"] = manifest.start_wallclock_ns;
    j["clock_offset_ns"] = manifest.clock_offset_ns;
    j["interval_ns"] = manifest.interval_ns;
    j["buffer_capacity"] = manifest.buffer_capacity;
    nlohmann::ordered_json providers = nlohmann::ordered_json::array();
    for (const ProviderDescriptor& d : manifest.providers)
        providers.push_back(to_json(d));
    j["providers"] = std::move(providers);
    j["checkpoint_dir"] = manifest.checkpoint_dir;
    j["report_path"] = manifest.report_path;
    return j;
}

RunManifest manifest_from_json(const nlohmann::json& j) {
    RunManifest m;
    m.run_id = j.at("run_id").get<std::string>();
    m.command = j.at("command").get<std::vector<std::string>>();
    m.start_wallclock_ns = j.at("start_wallclock_ns").get<std::uint64_t>();
    m.clock_offset_ns = j.at("clock_offset_ns").get<std::int64_t>();
    m.interval_ns = j.at("interval_ns").get<std::uint64_t>();
    m.buffer_capacity = j.at("buffer_capacity").get<std::size_t>();
    for (const auto& p : j.at("providers"))
        m.providers.push_back(provider_descriptor_from_json(p));
    m.checkpoint_dir = j.value("checkpoint_dir", "");
    m.report_path = j.value("report_path", "");
    return m;
}

} // namespace codegreen
