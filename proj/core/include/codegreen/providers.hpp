#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "codegreen/telemetry.hpp"

namespace codegreen {

enum class ProviderKind {
    rapl_sysfs,
    synthetic,
    gpu_stub,
};

const char* to_string(ProviderKind kind);

/// Static description of one energy source: what it can measure and how
/// fast its counters actually update.
struct ProviderDescriptor {
    std::string id;
    ProviderKind kind{ProviderKind::synthetic};
    std::vector<DomainId> domains;
    std::uint64_t native_update_interval_ns{1'000'000};
    std::map<Domain, std::uint64_t> wrap_range_uj; // absent entry = wrap range unknown
    bool requires_privilege{false};
};

/// Deterministic power waveform backing the synthetic provider. Identical
/// parameters yield bit-identical readings at identical timestamps.
struct SyntheticWaveform {
    enum class Shape { constant, ramp, square, burst };

    Shape shape{Shape::constant};
    double base_watts{10.0};
    double amplitude_watts{0.0};
    std::uint64_t period_ns{1'000'000};
    std::uint64_t seed{0};
};

std::optional<SyntheticWaveform::Shape> parse_waveform_shape(const std::string& name);
const char* to_string(SyntheticWaveform::Shape shape);

/// Instantaneous power of the waveform at time t. Exposed so oracles can
/// integrate the exact same signal the provider integrates.
double waveform_power_at(const SyntheticWaveform& w, std::uint64_t t_ns);

/// Uniform driver interface. One instance is read from exactly one thread
/// (the sampler's polling thread); descriptors are immutable and shareable.
class EnergyProvider {
public:
    virtual ~EnergyProvider() = default;

    virtual const ProviderDescriptor& descriptor() const = 0;

    /// Raw cumulative counter for `domain` in microjoules. Hardware drivers
    /// read the counter now and ignore `at`; deterministic providers
    /// evaluate their closed form at `at`.
    virtual std::uint64_t read_cumulative_uj(const DomainId& domain, MonotonicTimestamp at) = 0;
};

std::unique_ptr<EnergyProvider> make_synthetic_provider(const SyntheticWaveform& waveform);
std::unique_ptr<EnergyProvider> make_gpu_stub_provider(double constant_watts);

/// Builds a RAPL sysfs powercap driver rooted at `powercap_root`; returns
/// nullptr (plus diagnostics) when no readable domain exists.
enum class ProbeStatus {
    not_present,
    permission_denied,
    unreadable,
};

const char* to_string(ProbeStatus status);

struct ProbeDiagnostic {
    ProviderKind kind{ProviderKind::rapl_sysfs};
    ProbeStatus status{ProbeStatus::not_present};
    std::string detail;
};

/// errno -> probe classification used by discovery and doctor.
ProbeStatus classify_probe_errno(int err);

struct DiscoveryOptions {
    /// Empty means: $CODEGREEN_POWERCAP_ROOT, else /sys/class/powercap.
    std::filesystem::path powercap_root;
    SyntheticWaveform synthetic{};
    bool enable_synthetic{true};
    bool enable_rapl{true};
    bool enable_gpu_stub{false};
    double gpu_stub_watts{25.0};
};

struct DiscoveryResult {
    std::vector<std::unique_ptr<EnergyProvider>> providers;
    std::vector<ProbeDiagnostic> diagnostics;

    EnergyProvider* find(ProviderKind kind) const;
};

/// Probes the environment for energy sources. Never fails outright: returns
/// whatever is usable plus one diagnostic per failed probe.
DiscoveryResult discover_providers(const DiscoveryOptions& options = {});

std::filesystem::path default_powercap_root();

enum class SamplingVerdict { ok, oversampling, aliasing_risk };

const char* to_string(SamplingVerdict verdict);

struct AdequacyResult {
    SamplingVerdict verdict{SamplingVerdict::ok};
    std::string message;
};

/// Nyquist-style advisory: an interval below the sensor's native update
/// interval just rereads stale counters; one far above it aliases bursty
/// signals. The aliasing threshold is 10x the native interval.
AdequacyResult check_sampling_adequacy(const ProviderDescriptor& descriptor,
                                       std::uint64_t requested_interval_ns);

} // namespace codegreen
