#include "codegreen/sampler.hpp"

#include <algorithm>
#include <chrono>

#include "codegreen/errors.hpp"
#include "codegreen/time.hpp"

namespace codegreen {

namespace {
constexpr std::size_t kMinBufferCapacity = 4096;
constexpr std::size_t kMaxReadDiagnostics = 64;
} // namespace

struct SamplingSession::Impl {
    struct DomainBuffer {
        DomainId id;
        EnergyProvider* provider{nullptr};
        std::optional<std::uint64_t> wrap_range_uj;
        std::vector<EnergySample> samples; // reserved to capacity+1 up front
        std::uint64_t dropped{0};
    };

    SamplingConfig config;
    std::size_t capacity{0};
    std::vector<DomainBuffer> buffers;
    std::vector<std::string> read_diagnostics;
    std::atomic<bool> stop_requested{false};
    std::atomic<SessionState> state{SessionState::idle};
    MonotonicTimestamp started_at;
    MonotonicTimestamp stopped_at;
    std::thread poller;

    // Loop body shared by the background thread and poll_once(). One
    // timestamp per sweep keeps all domains aligned.
    std::size_t sweep() {
        const MonotonicTimestamp now = monotonic_now();
        std::size_t recorded = 0;
        for (DomainBuffer& buf : buffers) {
            if (buf.samples.size() >= capacity) {
                ++buf.dropped;
                continue;
            }
            if (!buf.samples.empty() && now <= buf.samples.back().ts)
                continue; // same-nanosecond sweep; unreachable in practice
            std::uint64_t value = 0;
            try {
                value = buf.provider->read_cumulative_uj(buf.id, now);
            } catch (const Error& e) {
                if (read_diagnostics.size() < kMaxReadDiagnostics)
                    read_diagnostics.push_back(to_string(buf.id) + ": " + e.what());
                continue;
            }
            buf.samples.push_back({now, value});
            ++recorded;
        }
        return recorded;
    }

    // Boundary samples bypass the capacity check (one slot is reserved) so
    // the bracketing guarantee survives an overflowed run.
    void final_sweep() {
        const MonotonicTimestamp now = monotonic_now();
        stopped_at = now;
        for (DomainBuffer& buf : buffers) {
            if (!buf.samples.empty() && now <= buf.samples.back().ts)
                continue;
            try {
                buf.samples.push_back({now, buf.provider->read_cumulative_uj(buf.id, now)});
            } catch (const Error& e) {
                if (read_diagnostics.size() < kMaxReadDiagnostics)
                    read_diagnostics.push_back(to_string(buf.id) + ": " + e.what());
            }
        }
    }

    void run_loop() {
        const auto start = std::chrono::steady_clock::now();
        const auto interval = std::chrono::nanoseconds(config.interval_ns);
        // Deadlines are start + k*interval so scheduling jitter never
        // accumulates into drift over long runs.
        for (std::uint64_t k = 1; !stop_requested.load(std::memory_order_relaxed); ++k) {
            std::this_thread::sleep_until(start + k * interval);
            if (stop_requested.load(std::memory_order_relaxed))
                break;
            sweep();
        }
    }
};

SamplingSession::SamplingSession(std::unique_ptr<Impl> impl) : impl_(std::move(impl)) {}

SamplingSession::~SamplingSession() {
    if (impl_ && impl_->state.load() == SessionState::running) {
        impl_->stop_requested.store(true);
        if (impl_->poller.joinable())
            impl_->poller.join();
    }
}

SamplingSession SamplingSession::start(SamplingConfig config) {
    if (config.interval_ns == 0)
        raise(ErrorCode::bad_argument, "sampling interval must be positive");

    auto impl = std::make_unique<Impl>();
    impl->config = config;

    for (const auto& selection : config.providers) {
        if (!selection.provider)
            raise(ErrorCode::bad_argument, "null provider in sampling config");
        const ProviderDescriptor& desc = selection.provider->descriptor();
        const std::vector<DomainId>& wanted =
            selection.domains.empty() ? desc.domains : selection.domains;
        for (const DomainId& id : wanted) {
            if (std::find(desc.domains.begin(), desc.domains.end(), id) == desc.domains.end())
                raise(ErrorCode::unknown_domain,
                      to_string(id) + " not offered by provider " + desc.id);
            Impl::DomainBuffer buf;
            buf.id = id;
            buf.provider = selection.provider;
            if (auto it = desc.wrap_range_uj.find(id.domain); it != desc.wrap_range_uj.end())
                buf.wrap_range_uj = it->second;
            impl->buffers.push_back(std::move(buf));
        }
    }
    if (impl->buffers.empty())
        raise(ErrorCode::bad_argument, "sampling config enables no domains");

    impl->capacity = config.buffer_capacity;
    if (impl->capacity == 0) {
        impl->capacity = kMinBufferCapacity;
        if (config.expected_duration_ns > 0) {
            const std::uint64_t expected = config.expected_duration_ns / config.interval_ns;
            impl->capacity = std::max<std::size_t>(kMinBufferCapacity,
                                                   static_cast<std::size_t>(expected) * 4);
        }
    }
    for (auto& buf : impl->buffers)
        buf.samples.reserve(impl->capacity + 1); // +1 reserved for the stop boundary sample

    // Fail fast: every enabled domain must answer a test read.
    const MonotonicTimestamp probe_ts = monotonic_now();
    for (auto& buf : impl->buffers) {
        try {
            (void)buf.provider->read_cumulative_uj(buf.id, probe_ts);
        } catch (const Error& e) {
            raise(ErrorCode::provider_probe_failed,
                  "test read failed for " + to_string(buf.id) + ": " + e.what());
        }
    }

    impl->state.store(SessionState::running);
    impl->started_at = monotonic_now();
    // Initial sweep before returning: every later checkpoint has a sample
    // at-or-before it.
    {
        const MonotonicTimestamp now = impl->started_at;
        for (auto& buf : impl->buffers)
            buf.samples.push_back({now, buf.provider->read_cumulative_uj(buf.id, now)});
    }

    if (!config.manual_pacing) {
        Impl* raw = impl.get();
        impl->poller = std::thread([raw] { raw->run_loop(); });
    }
    return SamplingSession(std::move(impl));
}

SessionOutput SamplingSession::stop() {
    if (!impl_ || impl_->state.load() != SessionState::running)
        raise(ErrorCode::not_running, "session is not running");

    impl_->stop_requested.store(true);
    if (impl_->poller.joinable())
        impl_->poller.join();
    impl_->final_sweep();
    impl_->state.store(SessionState::stopped);

    SessionOutput out;
    out.started_at = impl_->started_at;
    out.stopped_at = impl_->stopped_at;
    out.read_diagnostics = impl_->read_diagnostics;
    for (auto& buf : impl_->buffers) {
        EnergySeries series =
            buf.wrap_range_uj
                ? unwrap_counter(buf.id, buf.samples, *buf.wrap_range_uj)
                : [&] {
                      EnergySeries s(buf.id);
                      s.reserve(buf.samples.size());
                      for (const EnergySample& sample : buf.samples)
                          s.append(sample);
                      return s;
                  }();
        out.dropped[buf.id] = buf.dropped;
        out.series.emplace(buf.id, std::move(series));
    }
    return out;
}

std::size_t SamplingSession::poll_once() {
    if (!impl_ || impl_->state.load() != SessionState::running)
        raise(ErrorCode::not_running, "session is not running");
    return impl_->sweep();
}

SessionState SamplingSession::state() const {
    return impl_ ? impl_->state.load() : SessionState::stopped;
}

const SamplingConfig& SamplingSession::config() const { return impl_->config; }

std::uint64_t SamplingSession::dropped_count(const DomainId& domain) const {
    for (const auto& buf : impl_->buffers)
        if (buf.id == domain)
            return buf.dropped;
    raise(ErrorCode::unknown_domain, to_string(domain) + " not in session");
}

std::size_t SamplingSession::buffered_count(const DomainId& domain) const {
    for (const auto& buf : impl_->buffers)
        if (buf.id == domain)
            return buf.samples.size();
    raise(ErrorCode::unknown_domain, to_string(domain) + " not in session");
}

MonotonicTimestamp SamplingSession::started_at() const { return impl_->started_at; }

} // namespace codegreen
