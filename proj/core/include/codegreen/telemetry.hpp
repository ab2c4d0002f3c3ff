#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "codegreen/time.hpp"

namespace codegreen {

/// A hardware energy domain within a provider.
enum class Domain {
    package,
    core,
    dram,
    gpu_total,
    synthetic,
};

const char* to_string(Domain d);
std::optional<Domain> parse_domain(const std::string& name);

/// Identifies one energy counter: (provider id, domain). Unique within a run.
struct DomainId {
    std::string provider;
    Domain domain{Domain::synthetic};

    auto operator<=>(const DomainId&) const = default;
};

/// "provider/domain", e.g. "synthetic/synthetic" or "rapl:0/package".
std::string to_string(const DomainId& id);

/// CPU-kind domains participate in the cpu_total convenience sum.
bool is_cpu_kind(Domain d);

/// One timestamped cumulative-energy reading. The owning series carries the
/// domain; samples stay trivially copyable so the polling loop never
/// allocates.
struct EnergySample {
    MonotonicTimestamp ts;
    std::uint64_t cumulative_uj{0};
};

/// An ordered cumulative-energy time series for one domain.
///
/// Appends enforce strictly increasing timestamps. Raw (possibly wrapped)
/// counter values may decrease; `unwrapped()` reports whether the series is
/// non-decreasing and therefore usable for interpolation.
class EnergySeries {
public:
    explicit EnergySeries(DomainId domain, std::optional<std::uint64_t> wrap_range_uj = {});

    void append(EnergySample sample);
    void reserve(std::size_t n) { samples_.reserve(n); }

    const DomainId& domain() const noexcept { return domain_; }
    std::span<const EnergySample> samples() const noexcept { return samples_; }
    std::size_t size() const noexcept { return samples_.size(); }
    bool empty() const noexcept { return samples_.empty(); }
    const EnergySample& front() const { return samples_.front(); }
    const EnergySample& back() const { return samples_.back(); }
    std::optional<std::uint64_t> wrap_range_uj() const noexcept { return wrap_range_uj_; }

    /// True while cumulative values have been non-decreasing.
    bool unwrapped() const noexcept { return non_decreasing_; }

private:
    DomainId domain_;
    std::vector<EnergySample> samples_;
    std::optional<std::uint64_t> wrap_range_uj_;
    bool non_decreasing_{true};
};

struct InterpolatedEnergy {
    std::uint64_t energy_uj{0};
    bool extrapolated{false};
};

/// Cumulative energy at t_c by binary search plus linear interpolation
/// between the bracketing samples. Outside the sampled window the value
/// clamps to the nearest endpoint and `extrapolated` is set.
///
/// Intermediate products run in 128-bit so microjoule counters cannot
/// overflow. Requires >= 2 samples and an unwrapped series.
InterpolatedEnergy interpolate_energy(const EnergySeries& series, MonotonicTimestamp t_c);

/// Energy attributed to [t_begin, t_end]: interpolate(t_end) - interpolate(t_begin).
/// Never negative; `extrapolated` set if either endpoint fell outside the window.
InterpolatedEnergy energy_between(const EnergySeries& series,
                                  MonotonicTimestamp t_begin,
                                  MonotonicTimestamp t_end);

/// Rebuilds a non-decreasing cumulative series from raw counter readings
/// that may have wrapped. Each decrease between consecutive samples adds one
/// wrap_range_uj to the running offset; at most one wrap per sampling
/// interval is assumed.
EnergySeries unwrap_counter(const DomainId& domain,
                            std::span<const EnergySample> raw,
                            std::uint64_t wrap_range_uj);

struct PowerPoint {
    MonotonicTimestamp ts;
    double watts{0.0};
};

/// Trapezoidal integration of an instantaneous-power trace into a cumulative
/// series; sample k holds the integral from t_0 to t_k, first sample is 0.
EnergySeries cumulative_from_power(const DomainId& domain, std::span<const PowerPoint> trace);

} // namespace codegreen
