#pragma once

// Independent oracles for derived expected values. These deliberately take
// different routes than the library: dense numeric integration instead of
// closed forms, and a from-scratch least-squares fit.

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "codegreen/providers.hpp"

namespace cgtest {

// Midpoint Riemann sum of the waveform's instantaneous power over [0, t_ns],
// in microjoules. Checks the provider's closed-form integral.
inline double riemann_cumulative_uj(const codegreen::SyntheticWaveform& w,
                                    std::uint64_t t_ns,
                                    std::size_t steps = 1'000'000) {
    if (t_ns == 0)
        return 0.0;
    const double dt = static_cast<double>(t_ns) / static_cast<double>(steps);
    double total_nj = 0.0;
    for (std::size_t i = 0; i < steps; ++i) {
        const double mid = (static_cast<double>(i) + 0.5) * dt;
        total_nj += codegreen::waveform_power_at(w, static_cast<std::uint64_t>(mid)) * dt;
    }
    return total_nj / 1000.0;
}

// Dense Riemann sum over an arbitrary piecewise-linear power trace.
inline double riemann_trace_uj(std::span<const codegreen::PowerPoint> trace,
                               std::size_t steps = 1'000'000) {
    const std::uint64_t t0 = trace.front().ts.nanos;
    const std::uint64_t t1 = trace.back().ts.nanos;
    const double dt = static_cast<double>(t1 - t0) / static_cast<double>(steps);
    auto power_at = [&](double t) {
        for (std::size_t i = 1; i < trace.size(); ++i) {
            const double a = static_cast<double>(trace[i - 1].ts.nanos);
            const double b = static_cast<double>(trace[i].ts.nanos);
            if (t <= b) {
                const double f = (t - a) / (b - a);
                return trace[i - 1].watts + f * (trace[i].watts - trace[i - 1].watts);
            }
        }
        return trace.back().watts;
    };
    double total_nj = 0.0;
    for (std::size_t i = 0; i < steps; ++i) {
        const double mid = static_cast<double>(t0) + (static_cast<double>(i) + 0.5) * dt;
        total_nj += power_at(mid) * dt;
    }
    return total_nj / 1000.0;
}

struct LineFit {
    double slope{0};
    double intercept{0};
    double r_squared{1};
};

// From-scratch least squares; the measuring stick for linearity criteria.
inline LineFit fit_line(std::span<const double> xs, std::span<const double> ys) {
    const double n = static_cast<double>(xs.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sx += xs[i];
        sy += ys[i];
        sxx += xs[i] * xs[i];
        sxy += xs[i] * ys[i];
    }
    LineFit fit;
    fit.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    fit.intercept = (sy - fit.slope * sx) / n;
    double ss_res = 0, ss_tot = 0;
    const double mean = sy / n;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double pred = fit.intercept + fit.slope * xs[i];
        ss_res += (ys[i] - pred) * (ys[i] - pred);
        ss_tot += (ys[i] - mean) * (ys[i] - mean);
    }
    fit.r_squared = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
    return fit;
}

} // namespace cgtest
