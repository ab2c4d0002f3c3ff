#pragma once

#include <atomic>
#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <thread>
#include <vector>

#include "codegreen/providers.hpp"
#include "codegreen/telemetry.hpp"

namespace codegreen {

struct SamplingConfig {
    std::uint64_t interval_ns{10'000'000};

    /// Providers are borrowed; they must outlive the session. Each entry
    /// enables a subset of the provider's domains (empty = all).
    struct ProviderSelection {
        EnergyProvider* provider{nullptr};
        std::vector<DomainId> domains;
    };
    std::vector<ProviderSelection> providers;

    /// Samples per domain; 0 sizes automatically from expected_duration_ns
    /// (x4 headroom, minimum 4096).
    std::size_t buffer_capacity{0};
    std::uint64_t expected_duration_ns{0};

    /// When true no background thread is launched and poll_once() drives
    /// the loop body directly; used by deterministic unit tests.
    bool manual_pacing{false};
};

enum class SessionState { idle, running, stopped };

struct SessionOutput {
    std::map<DomainId, EnergySeries> series;
    MonotonicTimestamp started_at;
    MonotonicTimestamp stopped_at;
    std::map<DomainId, std::uint64_t> dropped;
    std::vector<std::string> read_diagnostics;
};

/// One background-polled measurement window (the consumer side).
///
/// start() takes an initial sweep before returning and stop() takes a final
/// one, so every checkpoint recorded while the session runs is bracketed by
/// samples on both sides. Buffers are preallocated; the polling loop takes
/// no locks and allocates nothing — when a buffer fills, new samples are
/// dropped and counted instead.
class SamplingSession {
public:
    static SamplingSession start(SamplingConfig config);

    SamplingSession(SamplingSession&&) noexcept = default;
    SamplingSession& operator=(SamplingSession&&) noexcept = default;
    ~SamplingSession();

    /// Final sweep, thread join, unwrap. Session becomes stopped.
    SessionOutput stop();

    /// One sweep over all enabled domains with a single shared timestamp.
    /// Returns the number of samples recorded (drops excluded).
    std::size_t poll_once();

    SessionState state() const;
    const SamplingConfig& config() const;
    std::uint64_t dropped_count(const DomainId& domain) const;
    std::size_t buffered_count(const DomainId& domain) const;
    MonotonicTimestamp started_at() const;

private:
    struct Impl;
    explicit SamplingSession(std::unique_ptr<Impl> impl);
    std::unique_ptr<Impl> impl_;
};

} // namespace codegreen
