#include <cmath>
#include <vector>

#include "codegreen/errors.hpp"
#include "codegreen/providers.hpp"

namespace codegreen {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

// Deterministic per-period duty cycle in [0, 1) for the burst shape.
double burst_duty(std::uint64_t seed, std::uint64_t period_index) {
    const std::uint64_t h = splitmix64(seed ^ (period_index * 0xD1B54A32D192ED03ull));
    return static_cast<double>(h >> 11) * 0x1.0p-53;
}

// Integral of one full period, in nanojoules.
long double period_energy_nj(const SyntheticWaveform& w, std::uint64_t k) {
    const long double T = static_cast<long double>(w.period_ns);
    switch (w.shape) {
    case SyntheticWaveform::Shape::constant:
        return w.base_watts * T;
    case SyntheticWaveform::Shape::ramp:
    case SyntheticWaveform::Shape::square:
        return w.base_watts * T + 0.5L * w.amplitude_watts * T;
    case SyntheticWaveform::Shape::burst:
        return w.base_watts * T + w.amplitude_watts * burst_duty(w.seed, k) * T;
    }
    return 0.0L;
}

// Integral of the first r nanoseconds of period k, in nanojoules.
long double partial_energy_nj(const SyntheticWaveform& w, std::uint64_t k, std::uint64_t r) {
    const long double T = static_cast<long double>(w.period_ns);
    const long double rr = static_cast<long double>(r);
    switch (w.shape) {
    case SyntheticWaveform::Shape::constant:
        return w.base_watts * rr;
    case SyntheticWaveform::Shape::ramp:
        return w.base_watts * rr + w.amplitude_watts * rr * rr / (2.0L * T);
    case SyntheticWaveform::Shape::square: {
        // On-window centered in the period: [T/4, 3T/4).
        const long double lo = T / 4.0L;
        const long double hi = 3.0L * T / 4.0L;
        const long double on = std::max(0.0L, std::min<long double>(rr, hi) - lo);
        return w.base_watts * rr + w.amplitude_watts * on;
    }
    case SyntheticWaveform::Shape::burst: {
        const long double on_end = burst_duty(w.seed, k) * T;
        return w.base_watts * rr + w.amplitude_watts * std::min(rr, on_end);
    }
    }
    return 0.0L;
}

class SyntheticProvider final : public EnergyProvider {
public:
    explicit SyntheticProvider(const SyntheticWaveform& waveform, ProviderDescriptor descriptor)
        : waveform_(waveform), descriptor_(std::move(descriptor)) {
        period_prefix_nj_.push_back(0.0L);
    }

    const ProviderDescriptor& descriptor() const override { return descriptor_; }

    std::uint64_t read_cumulative_uj(const DomainId& domain, MonotonicTimestamp at) override {
        if (domain != descriptor_.domains.front())
            raise(ErrorCode::unknown_domain,
                  to_string(domain) + " not served by provider " + descriptor_.id);

        const std::uint64_t k = at.nanos / waveform_.period_ns;
        const std::uint64_t r = at.nanos % waveform_.period_ns;
        const long double total_nj = full_periods_nj(k) + partial_energy_nj(waveform_, k, r);
        return static_cast<std::uint64_t>(total_nj / 1000.0L); // truncate to uJ
    }

private:
    long double full_periods_nj(std::uint64_t k) {
        // Memoized prefix sums keep repeated reads O(1); only the sampler's
        // single polling thread calls this per instance.
        while (period_prefix_nj_.size() <= k)
            period_prefix_nj_.push_back(period_prefix_nj_.back() +
                                        period_energy_nj(waveform_, period_prefix_nj_.size() - 1));
        return period_prefix_nj_[k];
    }

    SyntheticWaveform waveform_;
    ProviderDescriptor descriptor_;
    std::vector<long double> period_prefix_nj_;
};

class GpuStubProvider final : public EnergyProvider {
public:
    explicit GpuStubProvider(double watts, ProviderDescriptor descriptor)
        : watts_(watts), descriptor_(std::move(descriptor)) {}

    const ProviderDescriptor& descriptor() const override { return descriptor_; }

    std::uint64_t read_cumulative_uj(const DomainId& domain, MonotonicTimestamp at) override {
        if (domain != descriptor_.domains.front())
            raise(ErrorCode::unknown_domain,
                  to_string(domain) + " not served by provider " + descriptor_.id);
        const long double nj = watts_ * static_cast<long double>(at.nanos);
        return static_cast<std::uint64_t>(nj / 1000.0L);
    }

private:
    double watts_;
    ProviderDescriptor descriptor_;
};

} // namespace

double waveform_power_at(const SyntheticWaveform& w, std::uint64_t t_ns) {
    const std::uint64_t k = t_ns / w.period_ns;
    const std::uint64_t r = t_ns % w.period_ns;
    const double frac = static_cast<double>(r) / static_cast<double>(w.period_ns);
    switch (w.shape) {
    case SyntheticWaveform::Shape::constant:
        return w.base_watts;
    case SyntheticWaveform::Shape::ramp:
        return w.base_watts + w.amplitude_watts * frac;
    case SyntheticWaveform::Shape::square:
        return (frac >= 0.25 && frac < 0.75) ? w.base_watts + w.amplitude_watts : w.base_watts;
    case SyntheticWaveform::Shape::burst:
        return frac < burst_duty(w.seed, k) ? w.base_watts + w.amplitude_watts : w.base_watts;
    }
    return 0.0;
}

std::optional<SyntheticWaveform::Shape> parse_waveform_shape(const std::string& name) {
    if (name == "constant") return SyntheticWaveform::Shape::constant;
    if (name == "ramp") return SyntheticWaveform::Shape::ramp;
    if (name == "square") return SyntheticWaveform::Shape::square;
    if (name == "burst") return SyntheticWaveform::Shape::burst;
    return std::nullopt;
}

const char* to_string(SyntheticWaveform::Shape shape) {
    switch (shape) {
    case SyntheticWaveform::Shape::constant: return "constant";
    case SyntheticWaveform::Shape::ramp: return "ramp";
    case SyntheticWaveform::Shape::square: return "square";
    case SyntheticWaveform::Shape::burst: return "burst";
    }
    return "unknown";
}

std::unique_ptr<EnergyProvider> make_synthetic_provider(const SyntheticWaveform& waveform) {
    if (waveform.period_ns == 0)
        raise(ErrorCode::bad_argument, "synthetic waveform period must be positive");
    if (waveform.base_watts < 0 || waveform.amplitude_watts < 0)
        raise(ErrorCode::negative_power, "synthetic waveform power must be non-negative");

    ProviderDescriptor d;
    d.id = "synthetic";
    d.kind = ProviderKind::synthetic;
    d.domains = {DomainId{"synthetic", Domain::synthetic}};
    d.native_update_interval_ns = 1'000'000; // behaves like a 1 kHz sensor
    d.requires_privilege = false;
    return std::make_unique<SyntheticProvider>(waveform, std::move(d));
}

std::unique_ptr<EnergyProvider> make_gpu_stub_provider(double constant_watts) {
    if (constant_watts < 0)
        raise(ErrorCode::negative_power, "gpu stub power must be non-negative");

    ProviderDescriptor d;
    d.id = "gpu_stub";
    d.kind = ProviderKind::gpu_stub;
    d.domains = {DomainId{"gpu_stub", Domain::gpu_total}};
    d.native_update_interval_ns = 100'000'000; // NVML-class slow averaging window
    d.requires_privilege = false;
    return std::make_unique<GpuStubProvider>(constant_watts, std::move(d));
}

} // namespace codegreen
