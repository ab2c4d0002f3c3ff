#include <cstdlib>

#include "codegreen/providers.hpp"
#include "codegreen/time.hpp"

namespace codegreen {

namespace detail {
void discover_rapl(const std::filesystem::path& root,
                   std::vector<std::unique_ptr<EnergyProvider>>& providers,
                   std::vector<ProbeDiagnostic>& diagnostics);
}

const char* to_string(ProviderKind kind) {
    switch (kind) {
    case ProviderKind::rapl_sysfs: return "rapl_sysfs";
    case ProviderKind::synthetic: return "synthetic";
    case ProviderKind::gpu_stub: return "gpu_stub";
    }
    return "unknown";
}

const char* to_string(ProbeStatus status) {
    switch (status) {
    case ProbeStatus::not_present: return "not_present";
    case ProbeStatus::permission_denied: return "permission_denied";
    case ProbeStatus::unreadable: return "unreadable";
    }
    return "unknown";
}

const char* to_string(SamplingVerdict verdict) {
    switch (verdict) {
    case SamplingVerdict::ok: return "ok";
    case SamplingVerdict::oversampling: return "oversampling";
    case SamplingVerdict::aliasing_risk: return "aliasing_risk";
    }
    return "unknown";
}

std::filesystem::path default_powercap_root() {
    if (const char* env = std::getenv("CODEGREEN_POWERCAP_ROOT"); env && *env)
        return env;
    return "/sys/class/powercap";
}

EnergyProvider* DiscoveryResult::find(ProviderKind kind) const {
    for (const auto& p : providers)
        if (p->descriptor().kind == kind)
            return p.get();
    return nullptr;
}

DiscoveryResult discover_providers(const DiscoveryOptions& options) {
    DiscoveryResult result;

    if (options.enable_rapl) {
        const auto root =
            options.powercap_root.empty() ? default_powercap_root() : options.powercap_root;
        detail::discover_rapl(root, result.providers, result.diagnostics);
    }

    // The synthetic provider is always available; it is what makes the rest
    // of the pipeline testable without hardware.
    if (options.enable_synthetic)
        result.providers.push_back(make_synthetic_provider(options.synthetic));

    if (options.enable_gpu_stub)
        result.providers.push_back(make_gpu_stub_provider(options.gpu_stub_watts));

    return result;
}

AdequacyResult check_sampling_adequacy(const ProviderDescriptor& descriptor,
                                       std::uint64_t requested_interval_ns) {
    const std::uint64_t native = descriptor.native_update_interval_ns;
    if (requested_interval_ns < native) {
        return {SamplingVerdict::oversampling,
                "interval " + format_duration_ns(requested_interval_ns) + " is below " +
                    descriptor.id + "'s native update interval " + format_duration_ns(native) +
                    "; reads will repeat stale counter values"};
    }
    if (requested_interval_ns > 10 * native) {
        return {SamplingVerdict::aliasing_risk,
                "interval " + format_duration_ns(requested_interval_ns) + " exceeds 10x " +
                    descriptor.id + "'s native update interval " + format_duration_ns(native) +
                    "; bursty power signals will alias"};
    }
    return {SamplingVerdict::ok,
            "interval " + format_duration_ns(requested_interval_ns) + " suits " + descriptor.id};
}

} // namespace codegreen
