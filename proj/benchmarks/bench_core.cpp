#include <benchmark/benchmark.h>

#include <filesystem>
#include <random>

#include "codegreen/checkpoint.hpp"
#include "codegreen/correlator.hpp"
#include "codegreen/instrumenter.hpp"
#include "codegreen/providers.hpp"
#include "codegreen/telemetry.hpp"

using namespace codegreen;

namespace {

MonotonicTimestamp ns(std::uint64_t v) { return MonotonicTimestamp{v}; }

const DomainId kDomain{"synthetic", Domain::synthetic};

EnergySeries make_series(std::size_t samples) {
    EnergySeries s(kDomain);
    s.reserve(samples);
    for (std::size_t k = 0; k < samples; ++k)
        s.append({ns(k * 1'000'000), k * 10'000});
    return s;
}

} // namespace

static void BM_interpolate(benchmark::State& state) {
    const EnergySeries series = make_series(static_cast<std::size_t>(state.range(0)));
    std::mt19937_64 rng(1);
    const std::uint64_t span = series.back().ts.nanos;
    for (auto _ : state) {
        const auto r = interpolate_energy(series, ns(rng() % span));
        benchmark::DoNotOptimize(r.energy_uj);
    }
}
BENCHMARK(BM_interpolate)->Arg(1'000)->Arg(100'000)->Arg(1'000'000);

static void BM_unwrap_counter(benchmark::State& state) {
    const std::size_t n = static_cast<std::size_t>(state.range(0));
    std::vector<EnergySample> raw;
    raw.reserve(n);
    for (std::size_t k = 0; k < n; ++k)
        raw.push_back({ns(k * 1'000'000), (k * 10'000) % 1'000'000});
    for (auto _ : state) {
        const EnergySeries s = unwrap_counter(kDomain, raw, 1'000'000);
        benchmark::DoNotOptimize(s.size());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_unwrap_counter)->Arg(100'000);

static void BM_synthetic_read(benchmark::State& state) {
    SyntheticWaveform w;
    w.shape = SyntheticWaveform::Shape::square;
    w.amplitude_watts = 15.0;
    const auto provider = make_synthetic_provider(w);
    const DomainId domain = provider->descriptor().domains.front();
    std::uint64_t t = 0;
    for (auto _ : state) {
        t += 10'000'000;
        benchmark::DoNotOptimize(provider->read_cumulative_uj(domain, ns(t)));
    }
}
BENCHMARK(BM_synthetic_read);

static void BM_checkpoint_record(benchmark::State& state) {
    const std::filesystem::path dir =
        std::filesystem::temp_directory_path() / "codegreen-bench-ckpt";
    std::filesystem::create_directories(dir);
    CheckpointWriter writer(dir, 1, false);
    for (auto _ : state) {
        writer.begin("hot");
        writer.end();
    }
    state.SetItemsProcessed(state.iterations() * 2);
    std::error_code ec;
    std::filesystem::remove_all(dir, ec);
}
BENCHMARK(BM_checkpoint_record);

static void BM_parse_and_pair(benchmark::State& state) {
    const std::size_t pairs = static_cast<std::size_t>(state.range(0));
    const std::filesystem::path dir =
        std::filesystem::temp_directory_path() / "codegreen-bench-parse";
    std::filesystem::create_directories(dir);
    {
        CheckpointWriter writer(dir, 1, false);
        for (std::size_t i = 0; i < pairs; ++i) {
            writer.begin_at("hot", ns(i * 10));
            writer.end_at(ns(i * 10 + 5));
        }
        writer.flush();
    }
    const auto logs = find_checkpoint_logs(dir);
    for (auto _ : state) {
        const ParsedLog parsed = parse_checkpoint_log(logs);
        const PairingResult result = pair_regions(parsed.events);
        benchmark::DoNotOptimize(result.regions.size());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(pairs) * 2);
    std::error_code ec;
    std::filesystem::remove_all(dir, ec);
}
BENCHMARK(BM_parse_and_pair)->Arg(10'000)->Arg(100'000);

static void BM_attribute(benchmark::State& state) {
    const std::size_t count = static_cast<std::size_t>(state.range(0));
    const EnergySeries series = make_series(2'000);
    std::map<DomainId, EnergySeries> series_map;
    series_map.emplace(kDomain, series);
    std::vector<Region> regions;
    const CheckpointKey root = make_key("root", 1, 1);
    regions.push_back({root, ns(0), ns(1'900'000'000), std::nullopt, 0});
    for (std::size_t i = 0; i < count; ++i) {
        const std::uint64_t begin = 1'000'000 + i * 1'000;
        regions.push_back({make_key("leaf", i + 1, 1), ns(begin), ns(begin + 500), root, 1});
    }
    for (auto _ : state) {
        const auto attributed = attribute(regions, series_map);
        benchmark::DoNotOptimize(attributed.size());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(count));
}
BENCHMARK(BM_attribute)->Arg(1'000)->Arg(100'000);

static void BM_analyze_source(benchmark::State& state) {
    std::string source;
    for (int i = 0; i < 50; ++i) {
        source += "def fn_" + std::to_string(i) + "(x):\n";
        source += "    for k in range(x):\n";
        source += "        x += k\n";
        source += "    return x\n\n";
    }
    GranularityConfig config;
    config.scopes = {ScopeKind::function, ScopeKind::loop};
    for (auto _ : state) {
        const auto targets = analyze_source_text(source, Language::python, config);
        benchmark::DoNotOptimize(targets.size());
    }
}
BENCHMARK(BM_analyze_source);

BENCHMARK_MAIN();
