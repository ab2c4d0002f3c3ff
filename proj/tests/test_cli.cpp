#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <nlohmann/json.hpp>

#include "codegreen/process.hpp"
#include "support/test_util.hpp"

using json = nlohmann::json;

namespace {

struct CliResult {
    int exit_code{0};
    std::string out;
    std::string err;
};

// Runs the built codegreen binary with a private config dir, capturing
// stdio through a shell redirect.
CliResult run_cli(const std::vector<std::string>& args,
                  const std::filesystem::path& config_dir,
                  const std::map<std::string, std::string>& extra_env = {}) {
    static int counter = 0;
    const std::filesystem::path out_file =
        config_dir / ("cli-out-" + std::to_string(counter) + ".txt");
    const std::filesystem::path err_file =
        config_dir / ("cli-err-" + std::to_string(counter) + ".txt");
    ++counter;

    std::string command = std::string("'") + CODEGREEN_CLI_PATH + "'";
    for (const std::string& arg : args)
        command += " '" + arg + "'";
    command += " > '" + out_file.string() + "' 2> '" + err_file.string() + "'";

    std::map<std::string, std::string> env = extra_env;
    env["CODEGREEN_CONFIG_DIR"] = config_dir.string();

    const codegreen::ProcessResult r = codegreen::run_process({"/bin/sh", "-c", command}, env);
    return {r.exit_code, cgtest::read_file(out_file), cgtest::read_file(err_file)};
}

void set_synthetic_only(const std::filesystem::path& config_dir) {
    cgtest::write_file(config_dir / "config", "providers synthetic\n");
}

} // namespace

TEST_CASE("analyze lists targets and exits zero") {
    cgtest::TempDir tmp("cli-analyze");
    set_synthetic_only(tmp.path());
    const auto r =
        run_cli({"analyze", (cgtest::fixtures_dir() / "sources/python/fib.py").string()}, tmp);
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("fib") != std::string::npos);
    CHECK(r.out.find("descend") != std::string::npos);
    CHECK(r.out.find("main") != std::string::npos);
}

TEST_CASE("analyze walks directories recursively") {
    cgtest::TempDir tmp("cli-analyze-dir");
    set_synthetic_only(tmp.path());
    const auto r = run_cli({"analyze", (cgtest::fixtures_dir() / "sources").string()}, tmp);
    CHECK(r.exit_code == 0);
    // One section per fixture file.
    CHECK(r.out.find("fib.py") != std::string::npos);
    CHECK(r.out.find("multiret.c") != std::string::npos);
    CHECK(r.out.find("Matrix.java") != std::string::npos);
    CHECK(r.out.find("accumulate.cpp") != std::string::npos);
}

TEST_CASE("analyze reports unparseable files as diagnostics and exits zero") {
    cgtest::TempDir tmp("cli-analyze-broken");
    set_synthetic_only(tmp.path());
    const auto r = run_cli({"analyze", (cgtest::fixtures_dir() / "broken.py").string()}, tmp);
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("diagnostic") != std::string::npos);
}

TEST_CASE("measure over the busy-loop fixture attributes about 2 J at 10 W") {
    cgtest::TempDir tmp("cli-measure");
    set_synthetic_only(tmp.path());
    const auto r = run_cli({"measure", (cgtest::fixtures_dir() / "busy_loop.py").string(),
                            "--output", "json"},
                           tmp, {{"CODEGREEN_WORKLOAD_SCALE", "5"}});
    REQUIRE(r.exit_code == 0);
    const json report = json::parse(r.out);

    // The busy() region burns ~200 ms at 10 W -> ~2 J, generously bounded.
    const auto& agg = report.at("aggregates").at("busy");
    CHECK(agg.at("invocations").get<int>() == 1);
    const double joules = agg.at("cpu_total_uj").get<double>() / 1e6;
    const double duration_s = agg.at("total_duration_ns").get<double>() / 1e9;
    CHECK(joules == doctest::Approx(duration_s * 10.0).epsilon(0.02));
    CHECK(joules > 0.2);

    // Whole-program consistency: root region equals series totals within
    // 2 intervals of energy at the observed max power (10 W constant).
    const double root_uj = report.at("regions")[0].at("cpu_total_uj").get<double>();
    const double total_uj = report.at("totals").at("cpu_total_uj").get<double>();
    const double slack_uj = 2.0 * 10e6 * 10.0 / 1000.0;
    CHECK(std::abs(root_uj - total_uj) <= slack_uj);
}

TEST_CASE("measure --interval records the override in the manifest") {
    cgtest::TempDir tmp("cli-measure-interval");
    set_synthetic_only(tmp.path());
    const auto r = run_cli({"measure", (cgtest::fixtures_dir() / "busy_loop.py").string(),
                            "--interval", "1ms", "--output", "json"},
                           tmp);
    REQUIRE(r.exit_code == 0);
    const json report = json::parse(r.out);
    CHECK(report.at("manifest").at("interval_ns").get<std::uint64_t>() == 1'000'000);
}

TEST_CASE("measure --output json emits a schema-conforming report") {
    cgtest::TempDir tmp("cli-measure-json");
    set_synthetic_only(tmp.path());
    const auto report_file = tmp.path() / "report.json";
    const auto r = run_cli({"measure", (cgtest::fixtures_dir() / "busy_loop.py").string(),
                            "--output", "json", "--report", report_file.string()},
                           tmp);
    REQUIRE(r.exit_code == 0);
    const json report = json::parse(r.out);
    for (const char* key :
         {"schema_version", "run_id", "manifest", "totals", "overhead", "regions", "aggregates"})
        CHECK_MESSAGE(report.contains(key), "missing key ", key);
    CHECK(report.at("schema_version").get<int>() == 1);
    CHECK(report.at("totals").contains("cpu_total_uj"));
    const auto& overhead = report.at("overhead");
    for (const char* key : {"n_checkpoints", "t_base_ns", "t_checkpoint_ns", "raw_pct",
                            "normalized_pct", "calibrated"})
        CHECK_MESSAGE(overhead.contains(key), "missing overhead key ", key);
    // --report writes the same document.
    const json copy = json::parse(cgtest::read_file(report_file));
    CHECK(copy == report);
}

TEST_CASE("measure on a zero-target script still reports the run root") {
    cgtest::TempDir tmp("cli-zero-targets");
    set_synthetic_only(tmp.path());
    const auto report_file = tmp.path() / "report.json";
    // The child prints to the shared stdout, so the report is read from
    // the --report copy rather than the interleaved stream.
    const auto r = run_cli({"measure", (cgtest::fixtures_dir() / "plain.py").string(),
                            "--report", report_file.string()},
                           tmp);
    REQUIRE(r.exit_code == 0);
    const json report = json::parse(cgtest::read_file(report_file));
    REQUIRE(report.at("regions").size() == 1);
    CHECK(report.at("regions")[0].at("function").get<std::string>() == "__run__");
    CHECK(report.at("regions")[0].at("children").empty());
    CHECK(report.at("overhead").at("n_checkpoints").get<int>() == 0);
}

TEST_CASE("measure propagates the child's exit code and still writes the report") {
    cgtest::TempDir tmp("cli-exit-codes");
    set_synthetic_only(tmp.path());
    for (const int code : {0, 3, 255}) {
        const auto report_file = tmp.path() / ("report-" + std::to_string(code) + ".json");
        const auto r = run_cli({"measure", (cgtest::fixtures_dir() / "exit_code.py").string(),
                                "--report", report_file.string()},
                               tmp, {{"CODEGREEN_EXIT_WITH", std::to_string(code)}});
        CHECK(r.exit_code == code);
        CHECK(std::filesystem::exists(report_file));
    }
}

TEST_CASE("two measures with a pinned run id are structurally identical") {
    cgtest::TempDir tmp("cli-determinism");
    set_synthetic_only(tmp.path());
    const std::vector<std::string> args{"measure",
                                        (cgtest::fixtures_dir() / "busy_loop.py").string(),
                                        "--output", "json"};
    const auto a = run_cli(args, tmp, {{"CODEGREEN_RUN_ID", "det"}});
    const auto b = run_cli(args, tmp, {{"CODEGREEN_RUN_ID", "det"}});
    REQUIRE(a.exit_code == 0);
    REQUIRE(b.exit_code == 0);

    // Normalization flag for comparison: timestamps, energies and thread
    // ids vary run to run; structure and naming must not.
    struct Normalize {
        static void apply(json& j) {
            if (j.is_object()) {
                for (auto& [key, value] : j.items())
                    apply(value);
            } else if (j.is_array()) {
                for (auto& value : j)
                    apply(value);
            } else if (j.is_number()) {
                j = 0;
            } else if (j.is_string()) {
                std::string s = j.get<std::string>();
                for (std::size_t pos = s.find("_t"); pos != std::string::npos;
                     pos = s.find("_t", pos + 1)) {
                    std::size_t digits = pos + 2;
                    while (digits < s.size() && std::isdigit(static_cast<unsigned char>(s[digits])))
                        ++digits;
                    if (digits > pos + 2)
                        s.replace(pos, digits - pos, "_tX");
                }
                j = s;
            }
        }
    };
    json ja = json::parse(a.out);
    json jb = json::parse(b.out);
    Normalize::apply(ja);
    Normalize::apply(jb);
    CHECK(ja == jb);
}

TEST_CASE("clock anchoring: offset is close to zero for same-clock children") {
    cgtest::TempDir tmp("cli-anchor");
    set_synthetic_only(tmp.path());
    const auto r = run_cli({"measure", (cgtest::fixtures_dir() / "busy_loop.py").string(),
                            "--output", "json"},
                           tmp);
    REQUIRE(r.exit_code == 0);
    const json report = json::parse(r.out);
    const double offset_ns =
        std::abs(report.at("manifest").at("clock_offset_ns").get<double>());
    CHECK(offset_ns < 1e6); // |offset| < 1 ms
}

TEST_CASE("benchmark validates duration before starting and reports a CI with --repeat") {
    cgtest::TempDir tmp("cli-benchmark");
    set_synthetic_only(tmp.path());
    const auto bad = run_cli({"benchmark", "--duration", "0s"}, tmp);
    CHECK(bad.exit_code != 0);
    const auto bare = run_cli({"benchmark", "--duration", "10"}, tmp);
    CHECK(bare.exit_code != 0); // bare numbers are ambiguous, rejected

    const auto r = run_cli({"benchmark", "--duration", "100ms", "--repeat", "3"}, tmp);
    REQUIRE(r.exit_code == 0);
    CHECK(r.out.find("mean") != std::string::npos);
    CHECK(r.out.find("95% CI") != std::string::npos);
}

TEST_CASE("benchmark totals track the synthetic closed form") {
    cgtest::TempDir tmp("cli-benchmark-oracle");
    set_synthetic_only(tmp.path());
    const auto r = run_cli({"benchmark", "--duration", "500ms"}, tmp);
    REQUIRE(r.exit_code == 0);
    // 10 W for 0.5 s -> 5 J; the run row carries the actual numbers.
    const auto pos = r.out.find("run 1");
    REQUIRE(pos != std::string::npos);
    double joules = 0, watts = 0, seconds = 0;
    REQUIRE(std::sscanf(r.out.c_str() + pos, "run %*d %lf %lf %lf", &joules, &watts, &seconds) ==
            3);
    CHECK(watts == doctest::Approx(10.0).epsilon(0.02));
    CHECK(joules == doctest::Approx(seconds * 10.0).epsilon(0.02));
}

TEST_CASE("init-sensors, info and doctor succeed on a synthetic-only host") {
    cgtest::TempDir tmp("cli-sysmgmt");
    set_synthetic_only(tmp.path());
    const auto init = run_cli({"init-sensors"}, tmp);
    CHECK(init.exit_code == 0);
    CHECK(std::filesystem::exists(tmp.path() / "sensors.json"));

    const auto info = run_cli({"info"}, tmp);
    CHECK(info.exit_code == 0);
    CHECK(info.out.find("synthetic") != std::string::npos);

    const auto doctor = run_cli({"doctor"}, tmp);
    CHECK(doctor.exit_code == 0);
    CHECK(doctor.out.find("FAIL") == std::string::npos);
}

TEST_CASE("info reflects the fixture powercap tree with wrap ranges") {
    cgtest::TempDir tmp("cli-info-rapl");
    cgtest::write_file(tmp.path() / "config", "providers rapl,synthetic\n");
    const auto r = run_cli({"info"}, tmp,
                           {{"CODEGREEN_POWERCAP_ROOT",
                             (cgtest::fixtures_dir() / "powercap").string()}});
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("rapl:0") != std::string::npos);
    CHECK(r.out.find("262143328850") != std::string::npos);
    CHECK(r.out.find("dram") != std::string::npos);
}

TEST_CASE("doctor fails and names the path when a powercap counter is unreadable") {
    cgtest::TempDir tmp("cli-doctor-unreadable");
    cgtest::write_file(tmp.path() / "config", "providers rapl,synthetic\n");
    // energy_uj as a directory: openable tree, unreadable counter.
    const auto root = tmp.path() / "powercap";
    const auto pkg = root / "intel-rapl:0";
    std::filesystem::create_directories(pkg / "energy_uj");
    cgtest::write_file(pkg / "name", "package-0\n");
    const auto r = run_cli({"doctor"}, tmp, {{"CODEGREEN_POWERCAP_ROOT", root.string()}});
    CHECK(r.exit_code != 0);
    CHECK(r.out.find("FAIL") != std::string::npos);
    CHECK(r.out.find("energy_uj") != std::string::npos);
}

TEST_CASE("config set/get round-trip is visible in info") {
    cgtest::TempDir tmp("cli-config");
    set_synthetic_only(tmp.path());
    const auto set = run_cli({"config", "interval", "1ms"}, tmp);
    REQUIRE(set.exit_code == 0);
    const auto info = run_cli({"info"}, tmp);
    CHECK(info.out.find("interval 1ms") != std::string::npos);
    const auto get = run_cli({"config", "interval"}, tmp);
    CHECK(get.out.find("1ms") != std::string::npos);

    const auto bad = run_cli({"config", "no_such_key", "1"}, tmp);
    CHECK(bad.exit_code != 0);
}
