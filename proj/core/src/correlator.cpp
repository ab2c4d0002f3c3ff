#include "codegreen/correlator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <unistd.h>

#include "codegreen/assets.hpp"
#include "codegreen/errors.hpp"
#include "codegreen/instrumenter.hpp"
#include "codegreen/process.hpp"

namespace codegreen {

namespace {

struct Node {
    const Region* region;
    std::vector<std::size_t> children;
};

double median(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    return n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

AttributedRegion attribute_node(const std::vector<Node>& nodes,
                                std::size_t index,
                                const std::map<DomainId, EnergySeries>& series) {
    const Region& region = *nodes[index].region;
    AttributedRegion out;
    out.region = region;
    out.duration_ns = region.t_end.nanos - region.t_begin.nanos;
    out.zero_duration = out.duration_ns == 0;

    for (const auto& [id, s] : series) {
        const InterpolatedEnergy e = energy_between(s, region.t_begin, region.t_end);
        out.energy_uj[id] = e.energy_uj;
        out.extrapolated = out.extrapolated || e.extrapolated;
        if (is_cpu_kind(id.domain))
            out.cpu_total_uj += e.energy_uj;
    }
    // 1 uJ/ns == 1000 W
    out.avg_power_w = out.zero_duration
                          ? 0.0
                          : static_cast<double>(out.cpu_total_uj) * 1000.0 /
                                static_cast<double>(out.duration_ns);

    for (std::size_t child : nodes[index].children)
        out.children.push_back(attribute_node(nodes, child, series));
    return out;
}

} // namespace

std::vector<AttributedRegion> attribute(std::span<const Region> regions,
                                        const std::map<DomainId, EnergySeries>& series) {
    // Rebuild the forest: regions arrive flat (ordered by t_begin) with
    // parent keys. A parent whose own pairing failed degrades its children
    // to roots rather than dropping them.
    std::vector<Node> nodes;
    nodes.reserve(regions.size());
    for (const Region& r : regions)
        nodes.push_back({&r, {}});

    std::vector<std::size_t> order(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i)
        order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return nodes[a].region->t_begin < nodes[b].region->t_begin;
    });

    std::map<CheckpointKey, std::size_t> by_key;
    for (std::size_t i = 0; i < nodes.size(); ++i)
        by_key.emplace(nodes[i].region->key, i);

    std::vector<std::size_t> roots;
    for (std::size_t idx : order) {
        const Region& r = *nodes[idx].region;
        if (r.parent) {
            if (auto parent = by_key.find(*r.parent); parent != by_key.end()) {
                nodes[parent->second].children.push_back(idx);
                continue;
            }
        }
        roots.push_back(idx);
    }

    std::vector<AttributedRegion> out;
    out.reserve(roots.size());
    for (std::size_t root : roots)
        out.push_back(attribute_node(nodes, root, series));
    return out;
}

// ---------------------------------------------------------------------------
// Overhead model

OverheadModel fit_overhead_model(std::span<const CalibrationPoint> points) {
    std::vector<std::uint64_t> distinct;
    for (const CalibrationPoint& p : points)
        if (std::find(distinct.begin(), distinct.end(), p.checkpoint_count) == distinct.end())
            distinct.push_back(p.checkpoint_count);
    if (distinct.size() < 2)
        raise(ErrorCode::underdetermined_fit,
              "line fit needs >= 2 distinct checkpoint counts, got " +
                  std::to_string(distinct.size()));

    const double n = static_cast<double>(points.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const CalibrationPoint& p : points) {
        const double x = static_cast<double>(p.checkpoint_count);
        sx += x;
        sy += p.elapsed_ns;
        sxx += x * x;
        sxy += x * p.elapsed_ns;
    }
    const double denom = n * sxx - sx * sx;
    const double slope = (n * sxy - sx * sy) / denom;
    const double intercept = (sy - slope * sx) / n;

    double ss_res = 0, ss_tot = 0;
    const double mean_y = sy / n;
    for (const CalibrationPoint& p : points) {
        const double fit = intercept + slope * static_cast<double>(p.checkpoint_count);
        ss_res += (p.elapsed_ns - fit) * (p.elapsed_ns - fit);
        ss_tot += (p.elapsed_ns - mean_y) * (p.elapsed_ns - mean_y);
    }

    OverheadModel model;
    model.t_base_ns = std::max(0.0, intercept);
    model.t_checkpoint_ns = std::max(0.0, slope);
    model.calibration_samples = points.size();
    model.calibration_stddev_ns = std::sqrt(ss_res / n);
    model.r_squared = ss_tot > 0 ? 1.0 - ss_res / ss_tot : (ss_res > 0 ? 0.0 : 1.0);
    model.linear_fit_ok = model.r_squared >= 0.95;
    return model;
}

double normalize_overhead(std::uint64_t t_inst_ns,
                          std::uint64_t t_native_ns,
                          std::uint64_t n_checkpoints,
                          const OverheadModel& model) {
    if (t_native_ns == 0)
        raise(ErrorCode::zero_native_time, "native time must be positive");
    const double residual = static_cast<double>(t_inst_ns) - static_cast<double>(t_native_ns) -
                            model.t_base_ns -
                            static_cast<double>(n_checkpoints) * model.t_checkpoint_ns;
    return residual / static_cast<double>(t_native_ns) * 100.0;
}

double raw_overhead(std::uint64_t t_inst_ns, std::uint64_t t_native_ns) {
    if (t_native_ns == 0)
        raise(ErrorCode::zero_native_time, "native time must be positive");
    return (static_cast<double>(t_inst_ns) - static_cast<double>(t_native_ns)) /
           static_cast<double>(t_native_ns) * 100.0;
}

nlohmann::ordered_json to_json(const OverheadModel& model) {
    nlohmann::ordered_json j;
    j["t_base_ns"] = model.t_base_ns;
    j["t_checkpoint_ns"] = model.t_checkpoint_ns;
    j["calibration_samples"] = model.calibration_samples;
    j["calibration_stddev_ns"] = model.calibration_stddev_ns;
    j["r_squared"] = model.r_squared;
    j["linear_fit_ok"] = model.linear_fit_ok;
    return j;
}

OverheadModel overhead_model_from_json(const nlohmann::json& j) {
    OverheadModel m;
    m.t_base_ns = j.at("t_base_ns").get<double>();
    m.t_checkpoint_ns = j.at("t_checkpoint_ns").get<double>();
    m.calibration_samples = j.value("calibration_samples", std::size_t{0});
    m.calibration_stddev_ns = j.value("calibration_stddev_ns", 0.0);
    m.r_squared = j.value("r_squared", 1.0);
    m.linear_fit_ok = j.value("linear_fit_ok", true);
    return m;
}

// ---------------------------------------------------------------------------
// Calibration

namespace {

struct CalibrationRunner {
    std::vector<std::string> argv_prefix; // run command; count appended per run
};

const char* calibration_asset_name(Language lang) {
    switch (lang) {
    case Language::python: return "calibration/noop.py";
    case Language::c: return "calibration/noop.c";
    case Language::cpp: return "calibration/noop.cpp";
    case Language::java: return "calibration/Noop.java";
    }
    return "";
}

CalibrationRunner prepare_runner(Language lang,
                                 const std::filesystem::path& instrumented,
                                 const std::filesystem::path& work_dir) {
    switch (lang) {
    case Language::python: {
        const std::string python = find_executable("python3");
        if (python.empty())
            raise(ErrorCode::fixture_missing, "python3 not found on PATH");
        return {{python, instrumented.string()}};
    }
    case Language::c:
    case Language::cpp: {
        const std::string compiler =
            lang == Language::c ? find_executable("cc") : find_executable("c++");
        if (compiler.empty())
            raise(ErrorCode::fixture_missing,
                  std::string(lang == Language::c ? "cc" : "c++") + " not found on PATH");
        const std::filesystem::path binary = work_dir / "noop_bin";
        std::vector<std::string> compile{compiler, "-O2", instrumented.string(), "-o",
                                         binary.string()};
        if (lang == Language::cpp)
            compile.insert(compile.begin() + 1, "-std=c++17");
        const ProcessResult r = run_process(compile);
        if (r.exit_code != 0)
            raise(ErrorCode::fixture_missing, "calibration fixture failed to compile");
        return {{binary.string()}};
    }
    case Language::java: {
        const std::string javac = find_executable("javac");
        const std::string java = find_executable("java");
        if (javac.empty() || java.empty())
            raise(ErrorCode::fixture_missing, "JDK (javac/java) not found on PATH");
        const ProcessResult r = run_process({javac, instrumented.string()});
        if (r.exit_code != 0)
            raise(ErrorCode::fixture_missing, "calibration fixture failed to compile");
        return {{java, "-cp", instrumented.parent_path().string(),
                 instrumented.stem().string()}};
    }
    }
    raise(ErrorCode::unsupported_language, "unknown language");
}

} // namespace

OverheadModel calibrate(const std::string& language_name, const CalibrationOptions& options) {
    const auto lang = parse_language(language_name);
    if (!lang)
        raise(ErrorCode::unsupported_language, "unknown runtime '" + language_name + "'");
    if (options.repetitions < 1)
        raise(ErrorCode::bad_argument, "repetitions must be >= 1");

    std::filesystem::path work = options.work_dir;
    if (work.empty())
        work = std::filesystem::temp_directory_path() /
               ("codegreen-calib-" + std::to_string(::getpid()));
    std::filesystem::create_directories(work);

    // Materialize the fixture, then push it through the production
    // instrumentation pipeline so we time the real shim.
    std::filesystem::path fixture = options.fixture;
    if (fixture.empty()) {
        const auto text = load_asset(calibration_asset_name(*lang));
        if (!text)
            raise(ErrorCode::fixture_missing,
                  std::string("no calibration fixture asset for ") + to_string(*lang));
        fixture = work / std::filesystem::path(calibration_asset_name(*lang)).filename();
        std::ofstream(fixture) << *text;
    }
    if (!std::filesystem::exists(fixture))
        raise(ErrorCode::fixture_missing, fixture.string() + " does not exist");

    GranularityConfig gran;
    gran.scopes = {ScopeKind::function, ScopeKind::method};
    gran.include_patterns = {"noop"};
    const InstrumentedFile inst = instrument_file(fixture, gran, work / "instrumented");

    const CalibrationRunner runner = prepare_runner(*lang, inst.instrumented, work);

    std::map<std::uint64_t, std::vector<double>> elapsed_by_count;
    for (int rep = 0; rep < options.repetitions; ++rep) {
        // Counts interleave across repetitions so slow environmental drift
        // spreads over all of them instead of biasing the slope.
        for (const std::uint64_t count : options.checkpoint_counts) {
            const std::filesystem::path ckpt_dir =
                work / ("ckpt_" + std::to_string(count) + "_" + std::to_string(rep));
            std::filesystem::create_directories(ckpt_dir);
            std::vector<std::string> argv = runner.argv_prefix;
            argv.push_back(std::to_string(count));
            const ProcessResult r = run_process(
                argv, {{"CODEGREEN_CHECKPOINT_DIR", ckpt_dir.string()},
                       {"CODEGREEN_RUN_ID", "calibration"}});
            if (r.exit_code != 0)
                raise(ErrorCode::fixture_missing,
                      "calibration run exited with " + std::to_string(r.exit_code));
            elapsed_by_count[count].push_back(static_cast<double>(r.elapsed_ns));
        }
    }

    std::vector<CalibrationPoint> points;
    points.reserve(elapsed_by_count.size());
    for (auto& [count, values] : elapsed_by_count)
        points.push_back({count, median(std::move(values))});

    OverheadModel model = fit_overhead_model(points);
    model.calibration_samples = options.checkpoint_counts.size() *
                                static_cast<std::size_t>(options.repetitions);
    return model;
}

// ---------------------------------------------------------------------------
// Report

namespace {

nlohmann::ordered_json region_to_json(const AttributedRegion& r, const ReportOptions& options) {
    nlohmann::ordered_json j;
    j["key"] = to_string(r.region.key);
    j["function"] = r.region.key.function_name;
    j["thread_id"] = r.region.key.thread_id;
    j["invocation"] = r.region.key.invocation;
    nlohmann::ordered_json energies = nlohmann::ordered_json::object();
    for (const auto& [id, uj] : r.energy_uj)
        energies[to_string(id)] = uj;
    j["domain_energies_uj"] = std::move(energies);
    j["cpu_total_uj"] = r.cpu_total_uj;
    j["duration_ns"] = r.duration_ns;
    j["avg_power_w"] = r.avg_power_w;
    j["extrapolated"] = r.extrapolated;
    if (r.zero_duration)
        j["zero_duration"] = true;
    nlohmann::ordered_json children = nlohmann::ordered_json::array();
    for (const AttributedRegion& child : r.children)
        children.push_back(region_to_json(child, options));
    j["children"] = std::move(children);
    return j;
}

struct FunctionAggregate {
    std::uint64_t invocations{0};
    std::uint64_t total_uj{0};
    std::uint64_t min_uj{std::numeric_limits<std::uint64_t>::max()};
    std::uint64_t max_uj{0};
    std::uint64_t total_duration_ns{0};
    std::vector<const AttributedRegion*> detail;
};

void collect_aggregates(const AttributedRegion& r,
                        std::map<std::string, FunctionAggregate>& aggregates) {
    FunctionAggregate& agg = aggregates[r.region.key.function_name];
    agg.invocations += 1;
    agg.total_uj += r.cpu_total_uj;
    agg.min_uj = std::min(agg.min_uj, r.cpu_total_uj);
    agg.max_uj = std::max(agg.max_uj, r.cpu_total_uj);
    agg.total_duration_ns += r.duration_ns;
    agg.detail.push_back(&r);
    for (const AttributedRegion& child : r.children)
        collect_aggregates(child, aggregates);
}

} // namespace

nlohmann::ordered_json build_report(const std::vector<AttributedRegion>& roots,
                                    const std::map<DomainId, EnergySeries>& series,
                                    const OverheadSummary& overhead,
                                    const RunManifest& manifest,
                                    const ReportOptions& options) {
    nlohmann::ordered_json report;
    report["schema_version"] = 1;
    report["run_id"] = manifest.run_id;
    report["manifest"] = to_json(manifest);

    nlohmann::ordered_json totals = nlohmann::ordered_json::object();
    std::uint64_t cpu_total = 0;
    for (const auto& [id, s] : series) {
        const std::uint64_t total =
            s.size() >= 2 ? s.back().cumulative_uj - s.front().cumulative_uj : 0;
        totals[to_string(id)] = total;
        if (is_cpu_kind(id.domain))
            cpu_total += total;
    }
    totals["cpu_total_uj"] = cpu_total;
    report["totals"] = std::move(totals);

    nlohmann::ordered_json oh;
    oh["n_checkpoints"] = overhead.n_checkpoints;
    oh["calibrated"] = overhead.calibrated;
    oh["t_base_ns"] = overhead.model.t_base_ns;
    oh["t_checkpoint_ns"] = overhead.model.t_checkpoint_ns;
    if (overhead.t_native_ns > 0) {
        oh["raw_pct"] = raw_overhead(overhead.t_inst_ns, overhead.t_native_ns);
        oh["normalized_pct"] = normalize_overhead(overhead.t_inst_ns, overhead.t_native_ns,
                                                  overhead.n_checkpoints, overhead.model);
    } else {
        oh["raw_pct"] = nullptr;
        oh["normalized_pct"] = nullptr;
    }
    oh["t_inst_ns"] = overhead.t_inst_ns;
    oh["t_native_ns"] = overhead.t_native_ns;
    if (!overhead.note.empty())
        oh["note"] = overhead.note;
    report["overhead"] = std::move(oh);

    nlohmann::ordered_json regions = nlohmann::ordered_json::array();
    for (const AttributedRegion& r : roots)
        regions.push_back(region_to_json(r, options));
    report["regions"] = std::move(regions);

    std::map<std::string, FunctionAggregate> aggregates;
    for (const AttributedRegion& r : roots)
        collect_aggregates(r, aggregates);
    nlohmann::ordered_json aggs = nlohmann::ordered_json::object();
    for (const auto& [function, agg] : aggregates) {
        nlohmann::ordered_json a;
        a["invocations"] = agg.invocations;
        a["cpu_total_uj"] = agg.total_uj;
        a["min_uj"] = agg.invocations ? agg.min_uj : 0;
        a["mean_uj"] = agg.invocations
                           ? static_cast<double>(agg.total_uj) / static_cast<double>(agg.invocations)
                           : 0.0;
        a["max_uj"] = agg.max_uj;
        a["total_duration_ns"] = agg.total_duration_ns;
        if (options.include_invocations) {
            nlohmann::ordered_json detail = nlohmann::ordered_json::array();
            for (const AttributedRegion* r : agg.detail) {
                nlohmann::ordered_json d;
                d["key"] = to_string(r->region.key);
                d["cpu_total_uj"] = r->cpu_total_uj;
                d["duration_ns"] = r->duration_ns;
                detail.push_back(std::move(d));
            }
            a["invocations_detail"] = std::move(detail);
        }
        aggs[function] = std::move(a);
    }
    report["aggregates"] = std::move(aggs);

    if (options.include_series) {
        nlohmann::ordered_json all = nlohmann::ordered_json::object();
        for (const auto& [id, s] : series) {
            nlohmann::ordered_json samples = nlohmann::ordered_json::array();
            for (const EnergySample& sample : s.samples())
                samples.push_back({sample.ts.nanos, sample.cumulative_uj});
            all[to_string(id)] = std::move(samples);
        }
        report["series"] = std::move(all);
    }
    return report;
}

namespace {

void render_region(std::ostringstream& out, const nlohmann::ordered_json& region, int depth) {
    const double joules = region.at("cpu_total_uj").get<double>() / 1e6;
    const double ms = region.at("duration_ns").get<double>() / 1e6;
    out << "  ";
    for (int i = 0; i < depth; ++i)
        out << "  ";
    char line[256];
    std::snprintf(line, sizeof(line), "%-40s %12.6f J %12.3f ms %10.2f W",
                  region.at("key").get<std::string>().c_str(), joules, ms,
                  region.at("avg_power_w").get<double>());
    out << line;
    if (region.value("extrapolated", false))
        out << "  [extrapolated]";
    out << '\n';
    for (const auto& child : region.at("children"))
        render_region(out, child, depth + 1);
}

} // namespace

std::string render_report_text(const nlohmann::ordered_json& report) {
    std::ostringstream out;
    out << "run " << report.at("run_id").get<std::string>() << "\n\n";

    out << "totals:\n";
    for (const auto& [key, value] : report.at("totals").items()) {
        char line[160];
        std::snprintf(line, sizeof(line), "  %-28s %14.6f J", key.c_str(),
                      value.get<double>() / 1e6);
        out << line << '\n';
    }

    out << "\nregions:\n";
    for (const auto& region : report.at("regions"))
        render_region(out, region, 0);

    out << "\nper-function aggregates:\n";
    for (const auto& [name, agg] : report.at("aggregates").items()) {
        char line[256];
        std::snprintf(line, sizeof(line), "  %-32s x%-8llu total %12.6f J  mean %12.6f J",
                      name.c_str(),
                      static_cast<unsigned long long>(agg.at("invocations").get<std::uint64_t>()),
                      agg.at("cpu_total_uj").get<double>() / 1e6,
                      agg.at("mean_uj").get<double>() / 1e6);
        out << line << '\n';
    }

    const auto& oh = report.at("overhead");
    out << "\noverhead: n_checkpoints=" << oh.at("n_checkpoints").get<std::uint64_t>();
    if (oh.at("calibrated").get<bool>()) {
        char line[160];
        std::snprintf(line, sizeof(line), " t_base=%.3fms t_checkpoint=%.3fus",
                      oh.at("t_base_ns").get<double>() / 1e6,
                      oh.at("t_checkpoint_ns").get<double>() / 1e3);
        out << line;
    } else {
        out << " (uncalibrated)";
    }
    if (!oh.at("raw_pct").is_null()) {
        char line[160];
        std::snprintf(line, sizeof(line), " raw=%.1f%% normalized=%.1f%%",
                      oh.at("raw_pct").get<double>(), oh.at("normalized_pct").get<double>());
        out << line;
    }
    out << '\n';
    return out.str();
}

} // namespace codegreen
