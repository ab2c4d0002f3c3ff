#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cerrno>
#include <unistd.h>

#include "codegreen/errors.hpp"
#include "codegreen/providers.hpp"
#include "support/oracles.hpp"
#include "support/test_util.hpp"

using namespace codegreen;

namespace {
MonotonicTimestamp ns(std::uint64_t v) { return MonotonicTimestamp{v}; }
}

TEST_CASE("synthetic constant 10W: P*t closed form") {
    const auto provider = make_synthetic_provider({});
    const DomainId domain = provider->descriptor().domains.front();
    CHECK(provider->read_cumulative_uj(domain, ns(1'000'000'000)) == 10'000'000);
    CHECK(provider->read_cumulative_uj(domain, ns(0)) == 0);
}

TEST_CASE("synthetic square 0/10W period 2ms at 3ms: one on-phase plus half the next") {
    SyntheticWaveform w;
    w.shape = SyntheticWaveform::Shape::square;
    w.base_watts = 0.0;
    w.amplitude_watts = 10.0;
    w.period_ns = 2'000'000;
    const auto provider = make_synthetic_provider(w);
    const DomainId domain = provider->descriptor().domains.front();
    const std::uint64_t got = provider->read_cumulative_uj(domain, ns(3'000'000));
    CHECK(got == 15'000);
    // Independent dense-grid integration oracle agrees.
    const double oracle = cgtest::riemann_cumulative_uj(w, 3'000'000, 3'000'000);
    CHECK(std::abs(static_cast<double>(got) - oracle) <= oracle * 1e-4 + 1.0);
}

TEST_CASE("synthetic closed forms match dense Riemann oracle within 0.01% for all shapes") {
    for (const auto shape :
         {SyntheticWaveform::Shape::constant, SyntheticWaveform::Shape::ramp,
          SyntheticWaveform::Shape::square, SyntheticWaveform::Shape::burst}) {
        SyntheticWaveform w;
        w.shape = shape;
        w.base_watts = 3.0;
        w.amplitude_watts = 12.0;
        w.period_ns = 7'300'000; // deliberately not a divisor of the window
        w.seed = 42;
        const auto provider = make_synthetic_provider(w);
        const DomainId domain = provider->descriptor().domains.front();
        const std::uint64_t window_ns = 1'000'000'000;
        const std::uint64_t got = provider->read_cumulative_uj(domain, ns(window_ns));
        const double oracle = cgtest::riemann_cumulative_uj(w, window_ns, 2'000'000);
        CHECK_MESSAGE(std::abs(static_cast<double>(got) - oracle) <= oracle * 1e-4,
                      "shape ", to_string(shape), " got ", got, " oracle ", oracle);
    }
}

TEST_CASE("synthetic reads are deterministic and monotone for every shape") {
    for (const auto shape :
         {SyntheticWaveform::Shape::constant, SyntheticWaveform::Shape::ramp,
          SyntheticWaveform::Shape::square, SyntheticWaveform::Shape::burst}) {
        SyntheticWaveform w;
        w.shape = shape;
        w.base_watts = 1.0;
        w.amplitude_watts = 9.0;
        w.period_ns = 500'000;
        w.seed = 7;
        const auto a = make_synthetic_provider(w);
        const auto b = make_synthetic_provider(w);
        const DomainId domain = a->descriptor().domains.front();
        std::uint64_t previous = 0;
        for (std::uint64_t t = 0; t <= 20'000'000; t += 137'111) {
            const std::uint64_t va = a->read_cumulative_uj(domain, ns(t));
            const std::uint64_t vb = b->read_cumulative_uj(domain, ns(t));
            CHECK(va == vb);
            CHECK(va >= previous);
            previous = va;
        }
    }
}

TEST_CASE("gpu stub: fixed constant-power closed form") {
    const auto provider = make_gpu_stub_provider(25.0);
    const DomainId domain = provider->descriptor().domains.front();
    CHECK(domain.domain == Domain::gpu_total);
    CHECK(provider->read_cumulative_uj(domain, ns(2'000'000'000)) == 50'000'000);
    CHECK_THROWS_WITH_AS(
        provider->read_cumulative_uj(DomainId{"gpu_stub", Domain::package}, ns(0)),
        doctest::Contains("UnknownDomain"), Error);
}

TEST_CASE("discovery without a powercap tree yields synthetic plus not_present") {
    DiscoveryOptions options;
    options.powercap_root = "/nonexistent/powercap";
    const DiscoveryResult result = discover_providers(options);
    REQUIRE(result.providers.size() == 1);
    CHECK(result.providers[0]->descriptor().kind == ProviderKind::synthetic);
    REQUIRE_FALSE(result.diagnostics.empty());
    CHECK(result.diagnostics[0].status == ProbeStatus::not_present);
}

TEST_CASE("discovery against the golden fixture tree finds package and dram") {
    DiscoveryOptions options;
    options.powercap_root = cgtest::fixtures_dir() / "powercap";
    const DiscoveryResult result = discover_providers(options);
    EnergyProvider* rapl = result.find(ProviderKind::rapl_sysfs);
    REQUIRE(rapl != nullptr);
    const ProviderDescriptor& d = rapl->descriptor();
    REQUIRE(d.domains.size() == 2);
    CHECK(d.domains[0].domain == Domain::package);
    CHECK(d.domains[1].domain == Domain::dram);
    CHECK(d.wrap_range_uj.at(Domain::package) == 262'143'328'850ull);
    CHECK(d.wrap_range_uj.at(Domain::dram) == 65'712'999'613ull);
    CHECK(d.requires_privilege);

    SUBCASE("read_cumulative returns the fixture file values verbatim") {
        CHECK(rapl->read_cumulative_uj(d.domains[0], ns(0)) == 123'456);
        CHECK(rapl->read_cumulative_uj(d.domains[1], ns(0)) == 98'765);
    }
}

TEST_CASE("gpu stub included only when explicitly enabled") {
    DiscoveryOptions options;
    options.powercap_root = "/nonexistent";
    CHECK(discover_providers(options).find(ProviderKind::gpu_stub) == nullptr);
    options.enable_gpu_stub = true;
    CHECK(discover_providers(options).find(ProviderKind::gpu_stub) != nullptr);
}

TEST_CASE("probe errno classification") {
    CHECK(classify_probe_errno(ENOENT) == ProbeStatus::not_present);
    CHECK(classify_probe_errno(ENOTDIR) == ProbeStatus::not_present);
    CHECK(classify_probe_errno(EACCES) == ProbeStatus::permission_denied);
    CHECK(classify_probe_errno(EPERM) == ProbeStatus::permission_denied);
    CHECK(classify_probe_errno(EISDIR) == ProbeStatus::unreadable);
    CHECK(classify_probe_errno(EIO) == ProbeStatus::unreadable);
}

TEST_CASE("unreadable counter excludes the domain and leaves a diagnostic") {
    // A copy of the fixture tree whose dram energy_uj is a directory: the
    // open succeeds but the read fails, which must exclude the domain.
    cgtest::TempDir tmp("powercap-unreadable");
    const auto root = tmp.path() / "powercap";
    const auto pkg = root / "intel-rapl:0";
    std::filesystem::create_directories(pkg / "intel-rapl:0:0");
    cgtest::write_file(pkg / "name", "package-0\n");
    cgtest::write_file(pkg / "energy_uj", "111\n");
    cgtest::write_file(pkg / "intel-rapl:0:0" / "name", "dram\n");
    std::filesystem::create_directories(pkg / "intel-rapl:0:0" / "energy_uj");

    DiscoveryOptions options;
    options.powercap_root = root;
    const DiscoveryResult result = discover_providers(options);
    EnergyProvider* rapl = result.find(ProviderKind::rapl_sysfs);
    REQUIRE(rapl != nullptr);
    CHECK(rapl->descriptor().domains.size() == 1);
    bool saw_unreadable = false;
    for (const ProbeDiagnostic& diag : result.diagnostics)
        saw_unreadable = saw_unreadable || diag.status == ProbeStatus::unreadable;
    CHECK(saw_unreadable);
}

TEST_CASE("permission-denied counter excluded (skipped when running as root)") {
    if (::geteuid() == 0) {
        MESSAGE("running as root; chmod cannot produce EACCES, classification covered above");
        return;
    }
    cgtest::TempDir tmp("powercap-denied");
    const auto root = tmp.path() / "powercap";
    const auto pkg = root / "intel-rapl:0";
    std::filesystem::create_directories(pkg);
    cgtest::write_file(pkg / "name", "package-0\n");
    cgtest::write_file(pkg / "energy_uj", "111\n");
    std::filesystem::permissions(pkg / "energy_uj", std::filesystem::perms::none);

    DiscoveryOptions options;
    options.powercap_root = root;
    const DiscoveryResult result = discover_providers(options);
    CHECK(result.find(ProviderKind::rapl_sysfs) == nullptr);
    bool saw_denied = false;
    for (const ProbeDiagnostic& diag : result.diagnostics)
        saw_denied = saw_denied || diag.status == ProbeStatus::permission_denied;
    CHECK(saw_denied);
}

TEST_CASE("sampling adequacy verdicts") {
    ProviderDescriptor d;
    d.id = "rapl:0";
    d.native_update_interval_ns = 1'000'000; // 1 ms sensor

    CHECK(check_sampling_adequacy(d, 10'000'000).verdict == SamplingVerdict::ok);
    CHECK(check_sampling_adequacy(d, 100'000).verdict == SamplingVerdict::oversampling);
    CHECK(check_sampling_adequacy(d, 15'000'000'000).verdict == SamplingVerdict::aliasing_risk);
    // Boundary: exactly 10x native is still ok.
    CHECK(check_sampling_adequacy(d, 10'000'000).verdict == SamplingVerdict::ok);
    CHECK(check_sampling_adequacy(d, 10'000'001).verdict == SamplingVerdict::aliasing_risk);
}
