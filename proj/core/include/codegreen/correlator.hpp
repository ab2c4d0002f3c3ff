#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "codegreen/checkpoint.hpp"
#include "codegreen/manifest.hpp"
#include "codegreen/telemetry.hpp"

namespace codegreen {

/// A region with its per-domain energy attribution.
struct AttributedRegion {
    Region region;
    std::map<DomainId, std::uint64_t> energy_uj;
    std::uint64_t cpu_total_uj{0};
    std::uint64_t duration_ns{0};
    double avg_power_w{0.0}; // cpu_total / duration; 0 for zero-duration regions
    bool extrapolated{false};
    bool zero_duration{false};
    std::vector<AttributedRegion> children;
};

/// Maps a region forest onto the energy series: each region's per-domain
/// energy is energy_between(series, t_begin, t_end). Children mirror the
/// pairing forest; siblings are ordered by t_begin.
std::vector<AttributedRegion> attribute(std::span<const Region> regions,
                                        const std::map<DomainId, EnergySeries>& series);

/// Fixed + per-checkpoint instrumentation cost model for one runtime.
struct OverheadModel {
    double t_base_ns{0.0};
    double t_checkpoint_ns{0.0};
    std::size_t calibration_samples{0};
    double calibration_stddev_ns{0.0};
    double r_squared{1.0};
    bool linear_fit_ok{true}; // false when R^2 < 0.95: costs reported but flagged
};

nlohmann::ordered_json to_json(const OverheadModel& model);
OverheadModel overhead_model_from_json(const nlohmann::json& j);

struct CalibrationPoint {
    std::uint64_t checkpoint_count{0};
    double elapsed_ns{0.0}; // median across repetitions
};

/// Least-squares fit of elapsed = t_base + N * t_checkpoint over per-count
/// medians. Needs >= 2 distinct counts; negative fitted costs clamp to 0.
OverheadModel fit_overhead_model(std::span<const CalibrationPoint> points);

/// Runs the no-op calibration fixture for `language` once per (count,
/// repetition), instrumenting it through the production pipeline so the
/// measured per-checkpoint cost is the real shim cost.
struct CalibrationOptions {
    std::vector<std::uint64_t> checkpoint_counts{0, 1'000, 10'000};
    int repetitions{3};
    std::filesystem::path fixture; // empty = built-in fixture for the language
    std::filesystem::path work_dir;
};

OverheadModel calibrate(const std::string& language_name, const CalibrationOptions& options);

/// Overhead_norm = (T_inst - T_native - T_base - N * T_checkpoint) / T_native * 100.
/// May be negative (calibration overshoot); reported as-is.
double normalize_overhead(std::uint64_t t_inst_ns,
                          std::uint64_t t_native_ns,
                          std::uint64_t n_checkpoints,
                          const OverheadModel& model);

/// (T_inst - T_native) / T_native * 100.
double raw_overhead(std::uint64_t t_inst_ns, std::uint64_t t_native_ns);

struct OverheadSummary {
    std::uint64_t n_checkpoints{0};
    OverheadModel model;
    bool calibrated{false};
    std::uint64_t t_inst_ns{0};
    std::uint64_t t_native_ns{0}; // 0 = no native baseline run
    std::string note;
};

struct ReportOptions {
    bool include_series{false};
    bool include_invocations{false};
};

/// Assembles the versioned JSON report: totals, region tree, per-function
/// aggregates, overhead section and optionally the raw series. Field order
/// is fixed; numeric content is deterministic given identical inputs.
nlohmann::ordered_json build_report(const std::vector<AttributedRegion>& roots,
                                    const std::map<DomainId, EnergySeries>& series,
                                    const OverheadSummary& overhead,
                                    const RunManifest& manifest,
                                    const ReportOptions& options = {});

/// Human-oriented table rendering of a report (not a stability contract).
std::string render_report_text(const nlohmann::ordered_json& report);

} // namespace codegreen
