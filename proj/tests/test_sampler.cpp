#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <thread>

#include "codegreen/errors.hpp"
#include "codegreen/sampler.hpp"
#include "codegreen/time.hpp"
#include "support/test_util.hpp"

using namespace codegreen;

namespace {

// Provider that can be told to fail a domain on demand.
class FlakyProvider final : public EnergyProvider {
public:
    FlakyProvider() {
        descriptor_.id = "flaky";
        descriptor_.kind = ProviderKind::synthetic;
        descriptor_.domains = {DomainId{"flaky", Domain::package},
                               DomainId{"flaky", Domain::dram}};
        descriptor_.native_update_interval_ns = 1'000'000;
    }

    const ProviderDescriptor& descriptor() const override { return descriptor_; }

    std::uint64_t read_cumulative_uj(const DomainId& domain, MonotonicTimestamp at) override {
        if (fail_dram && domain.domain == Domain::dram)
            raise(ErrorCode::read_failure, "injected failure");
        return at.nanos / 100; // 10 W
    }

    bool fail_dram{false};

private:
    ProviderDescriptor descriptor_;
};

SamplingConfig synthetic_config(EnergyProvider* provider, std::uint64_t interval_ns,
                                bool manual = false) {
    SamplingConfig config;
    config.interval_ns = interval_ns;
    config.providers.push_back({provider, {}});
    config.manual_pacing = manual;
    return config;
}

} // namespace

TEST_CASE("start_session records an initial sample for every domain") {
    const auto provider = make_synthetic_provider({});
    auto session = SamplingSession::start(synthetic_config(provider.get(), 10'000'000, true));
    CHECK(session.state() == SessionState::running);
    CHECK(session.buffered_count(provider->descriptor().domains.front()) >= 1);
    auto output = session.stop();
    CHECK(output.series.begin()->second.size() >= 2); // initial + final
}

TEST_CASE("start_session fails fast when a domain cannot be read") {
    FlakyProvider provider;
    provider.fail_dram = true;
    CHECK_THROWS_WITH_AS(SamplingSession::start(synthetic_config(&provider, 10'000'000)),
                         doctest::Contains("ProviderProbeFailed"), Error);
    // The failing domain is named.
    try {
        SamplingSession::start(synthetic_config(&provider, 10'000'000));
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("flaky/dram") != std::string::npos);
    }
}

TEST_CASE("a 100ms run at 10ms interval yields the wall-clock-expected sample count") {
    const auto provider = make_synthetic_provider({});
    auto session = SamplingSession::start(synthetic_config(provider.get(), 10'000'000));
    std::this_thread::sleep_for(std::chrono::milliseconds(100));
    auto output = session.stop();
    const EnergySeries& series = output.series.begin()->second;
    const double elapsed_ns =
        static_cast<double>(output.stopped_at.nanos - output.started_at.nanos);
    const double expected_sweeps = elapsed_ns / 10e6;
    // 10 +/- 2 polling sweeps for the nominal window, plus the two boundary
    // samples, with the actual elapsed time as the oracle.
    CHECK(std::abs(static_cast<double>(series.size()) - (expected_sweeps + 2.0)) <= 3.0);
    CHECK(series.size() >= 8);
}

TEST_CASE("stop_session: boundary samples bracket the run and totals match the oracle") {
    const auto provider = make_synthetic_provider({}); // constant 10 W
    auto session = SamplingSession::start(synthetic_config(provider.get(), 10'000'000));
    std::this_thread::sleep_for(std::chrono::milliseconds(500));
    auto output = session.stop();
    const EnergySeries& series = output.series.begin()->second;
    const std::uint64_t total = series.back().cumulative_uj - series.front().cumulative_uj;
    const std::uint64_t elapsed = output.stopped_at.nanos - output.started_at.nanos;
    // Closed form P * dt with a 2-interval-widths jitter allowance.
    const double expected = 10.0 * static_cast<double>(elapsed) / 1000.0;
    const double slack = 2.0 * 10.0 * 10e6 / 1000.0;
    CHECK(std::abs(static_cast<double>(total) - expected) <= slack);
}

TEST_CASE("stop twice raises NotRunning") {
    const auto provider = make_synthetic_provider({});
    auto session = SamplingSession::start(synthetic_config(provider.get(), 10'000'000, true));
    (void)session.stop();
    CHECK_THROWS_WITH_AS(session.stop(), doctest::Contains("NotRunning"), Error);
    CHECK_THROWS_WITH_AS(session.poll_once(), doctest::Contains("NotRunning"), Error);
}

TEST_CASE("poll_once records one sample per enabled domain with a shared timestamp") {
    FlakyProvider provider;
    auto session = SamplingSession::start(synthetic_config(&provider, 10'000'000, true));
    const std::size_t recorded = session.poll_once();
    CHECK(recorded == 2);
    auto output = session.stop();
    REQUIRE(output.series.size() == 2);
    // One timestamp per sweep: the second sample of both domains matches.
    const auto& a = output.series.at(DomainId{"flaky", Domain::package});
    const auto& b = output.series.at(DomainId{"flaky", Domain::dram});
    REQUIRE(a.size() == 3);
    REQUIRE(b.size() == 3);
    CHECK(a.samples()[1].ts == b.samples()[1].ts);
}

TEST_CASE("full buffer drops the newest sample and counts it") {
    const auto provider = make_synthetic_provider({});
    SamplingConfig config = synthetic_config(provider.get(), 10'000'000, true);
    config.buffer_capacity = 1;
    auto session = SamplingSession::start(config);
    const DomainId domain = provider->descriptor().domains.front();
    CHECK(session.buffered_count(domain) == 1); // initial sample filled it
    CHECK(session.poll_once() == 0);
    CHECK(session.dropped_count(domain) == 1);
    // The stop boundary sample still lands in its reserved slot.
    auto output = session.stop();
    CHECK(output.series.at(domain).size() == 2);
    CHECK(output.dropped.at(domain) == 1);
}

TEST_CASE("a failing domain is isolated; others keep recording") {
    FlakyProvider provider;
    auto session = SamplingSession::start(synthetic_config(&provider, 10'000'000, true));
    provider.fail_dram = true;
    const std::size_t recorded = session.poll_once();
    CHECK(recorded == 1); // package only
    provider.fail_dram = false;
    auto output = session.stop();
    CHECK_FALSE(output.read_diagnostics.empty());
    CHECK(output.read_diagnostics.front().find("flaky/dram") != std::string::npos);
    CHECK(output.series.at(DomainId{"flaky", Domain::package}).size() == 3);
}

TEST_CASE("timestamps within each domain's series are strictly increasing") {
    const auto provider = make_synthetic_provider({});
    auto session = SamplingSession::start(synthetic_config(provider.get(), 1'000'000));
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
    auto output = session.stop();
    const auto samples = output.series.begin()->second.samples();
    for (std::size_t i = 1; i < samples.size(); ++i)
        CHECK(samples[i].ts.nanos > samples[i - 1].ts.nanos);
}

TEST_CASE("interval fidelity: median gap within 20% of the configured interval") {
    const auto provider = make_synthetic_provider({});
    auto session = SamplingSession::start(synthetic_config(provider.get(), 10'000'000));
    std::this_thread::sleep_for(std::chrono::milliseconds(300));
    auto output = session.stop();
    const auto samples = output.series.begin()->second.samples();
    REQUIRE(samples.size() >= 10);
    std::vector<std::uint64_t> gaps;
    // Interior gaps only; the boundary samples are not paced.
    for (std::size_t i = 2; i + 1 < samples.size(); ++i)
        gaps.push_back(samples[i].ts.nanos - samples[i - 1].ts.nanos);
    std::sort(gaps.begin(), gaps.end());
    const std::uint64_t median = gaps[gaps.size() / 2];
    CHECK(median > 8'000'000);
    CHECK(median < 12'000'000);
}
