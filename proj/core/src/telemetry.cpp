#include "codegreen/telemetry.hpp"

#include <algorithm>
#include <cmath>

#include "codegreen/errors.hpp"

namespace codegreen {

const char* to_string(Domain d) {
    switch (d) {
    case Domain::package: return "package";
    case Domain::core: return "core";
    case Domain::dram: return "dram";
    case Domain::gpu_total: return "gpu_total";
    case Domain::synthetic: return "synthetic";
    }
    return "unknown";
}

std::optional<Domain> parse_domain(const std::string& name) {
    if (name == "package") return Domain::package;
    if (name == "core") return Domain::core;
    if (name == "dram") return Domain::dram;
    if (name == "gpu_total") return Domain::gpu_total;
    if (name == "synthetic") return Domain::synthetic;
    return std::nullopt;
}

std::string to_string(const DomainId& id) {
    return id.provider + "/" + to_string(id.domain);
}

bool is_cpu_kind(Domain d) {
    switch (d) {
    case Domain::package:
    case Domain::core:
    case Domain::dram:
    case Domain::synthetic:
        return true;
    case Domain::gpu_total:
        return false;
    }
    return false;
}

EnergySeries::EnergySeries(DomainId domain, std::optional<std::uint64_t> wrap_range_uj)
    : domain_(std::move(domain)), wrap_range_uj_(wrap_range_uj) {}

void EnergySeries::append(EnergySample sample) {
    if (!samples_.empty()) {
        if (sample.ts == samples_.back().ts)
            raise(ErrorCode::duplicate_timestamp,
                  "duplicate timestamp " + std::to_string(sample.ts.nanos) + " in series " +
                      to_string(domain_));
        if (sample.ts < samples_.back().ts)
            raise(ErrorCode::non_monotonic_timestamps,
                  "timestamp " + std::to_string(sample.ts.nanos) + " precedes previous " +
                      std::to_string(samples_.back().ts.nanos));
        if (sample.cumulative_uj < samples_.back().cumulative_uj)
            non_decreasing_ = false;
    }
    samples_.push_back(sample);
}

namespace {

// E_i + (E_{i+1} - E_i) * (t_c - t_i) / (t_{i+1} - t_i), all quantities
// non-negative, intermediate product in 128 bits.
std::uint64_t lerp_uj(const EnergySample& lo, const EnergySample& hi, MonotonicTimestamp t_c) {
    const std::uint64_t dt = hi.ts.nanos - lo.ts.nanos;
    const std::uint64_t de = hi.cumulative_uj - lo.cumulative_uj;
    const std::uint64_t off = t_c.nanos - lo.ts.nanos;
    const unsigned __int128 num = static_cast<unsigned __int128>(de) * off;
    return lo.cumulative_uj + static_cast<std::uint64_t>(num / dt);
}

} // namespace

InterpolatedEnergy interpolate_energy(const EnergySeries& series, MonotonicTimestamp t_c) {
    const auto samples = series.samples();
    if (samples.size() < 2)
        raise(ErrorCode::series_too_short,
              "interpolation needs >= 2 samples, series " + to_string(series.domain()) + " has " +
                  std::to_string(samples.size()));
    if (!series.unwrapped())
        raise(ErrorCode::not_unwrapped,
              "series " + to_string(series.domain()) + " has decreasing cumulative values");

    if (t_c <= samples.front().ts)
        return {samples.front().cumulative_uj, t_c < samples.front().ts};
    if (t_c >= samples.back().ts)
        return {samples.back().cumulative_uj, t_c > samples.back().ts};

    // First sample with ts > t_c; its predecessor brackets from the left.
    const auto it = std::upper_bound(samples.begin(), samples.end(), t_c,
                                     [](MonotonicTimestamp t, const EnergySample& s) { return t < s.ts; });
    const EnergySample& hi = *it;
    const EnergySample& lo = *(it - 1);
    return {lerp_uj(lo, hi, t_c), false};
}

InterpolatedEnergy energy_between(const EnergySeries& series,
                                  MonotonicTimestamp t_begin,
                                  MonotonicTimestamp t_end) {
    if (t_begin > t_end)
        raise(ErrorCode::inverted_interval,
              "t_begin " + std::to_string(t_begin.nanos) + " > t_end " + std::to_string(t_end.nanos));
    const InterpolatedEnergy a = interpolate_energy(series, t_begin);
    const InterpolatedEnergy b = interpolate_energy(series, t_end);
    return {b.energy_uj - a.energy_uj, a.extrapolated || b.extrapolated};
}

EnergySeries unwrap_counter(const DomainId& domain,
                            std::span<const EnergySample> raw,
                            std::uint64_t wrap_range_uj) {
    if (wrap_range_uj == 0)
        raise(ErrorCode::zero_wrap_range, "wrap range must be positive");

    EnergySeries out(domain, wrap_range_uj);
    out.reserve(raw.size());
    std::uint64_t offset = 0;
    for (std::size_t i = 0; i < raw.size(); ++i) {
        if (i > 0 && raw[i].ts <= raw[i - 1].ts)
            raise(ErrorCode::non_monotonic_timestamps,
                  "raw timestamps not strictly increasing at index " + std::to_string(i));
        // A decrease means the counter wrapped (at most once per interval).
        if (i > 0 && raw[i].cumulative_uj < raw[i - 1].cumulative_uj)
            offset += wrap_range_uj;
        out.append({raw[i].ts, raw[i].cumulative_uj + offset});
    }
    return out;
}

EnergySeries cumulative_from_power(const DomainId& domain, std::span<const PowerPoint> trace) {
    if (trace.size() < 2)
        raise(ErrorCode::too_few_points, "power trace needs >= 2 points");

    EnergySeries out(domain);
    out.reserve(trace.size());
    long double cumulative_nj = 0.0L;
    for (std::size_t i = 0; i < trace.size(); ++i) {
        if (trace[i].watts < 0)
            raise(ErrorCode::negative_power,
                  "negative power " + std::to_string(trace[i].watts) + " at index " + std::to_string(i));
        if (i > 0) {
            if (trace[i].ts <= trace[i - 1].ts)
                raise(ErrorCode::non_monotonic_timestamps,
                      "trace timestamps not strictly increasing at index " + std::to_string(i));
            const std::uint64_t dt = trace[i].ts.nanos - trace[i - 1].ts.nanos;
            cumulative_nj += 0.5L * (trace[i].watts + trace[i - 1].watts) * static_cast<long double>(dt);
        }
        out.append({trace[i].ts, static_cast<std::uint64_t>(llroundl(cumulative_nj / 1000.0L))});
    }
    return out;
}

} // namespace codegreen
