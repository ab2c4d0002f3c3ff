#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace codegreen {

enum class Language { python, c, cpp, java };

const char* to_string(Language lang);
std::optional<Language> parse_language(const std::string& name);

/// Maps a file extension to its language; unknown extensions are rejected.
Language detect_language(const std::filesystem::path& path);
std::optional<Language> try_detect_language(const std::filesystem::path& path);

enum class ScopeKind { function, method, klass, loop };

const char* to_string(ScopeKind kind);
std::optional<ScopeKind> parse_scope_kind(const std::string& name);

enum class LoopMode { whole_loop, per_iteration };

/// What to instrument, per run: scope kinds, name filters, loop handling.
struct GranularityConfig {
    std::set<ScopeKind> scopes{ScopeKind::function};
    std::vector<std::string> include_patterns; // glob; empty = everything
    std::vector<std::string> exclude_patterns;
    LoopMode loop_mode{LoopMode::whole_loop};
};

/// Shell-style glob match ('*', '?'); used for include/exclude filters.
bool glob_match(std::string_view pattern, std::string_view name);

struct ByteRange {
    std::uint32_t start{0};
    std::uint32_t end{0};
};

/// One matched construct plus everything injection planning needs to know
/// about its shape.
struct InjectionTarget {
    Language language{Language::python};
    ScopeKind kind{ScopeKind::function};
    std::string name;
    ByteRange node;              // whole construct
    ByteRange body;              // function/loop body (block incl. braces)
    std::vector<ByteRange> exit_returns; // return statements directly in body (C family)
    std::optional<ByteRange> loop_iterable; // python for-loops: the iterated expression
    bool is_for_loop{false};
    bool body_is_block{true};
    std::uint32_t start_line{1}; // 1-based
    std::uint32_t end_line{1};
};

/// Grammar-driven target discovery: parses the file, runs the language's
/// scope query assets, filters by name patterns. Pure; deterministic source
/// order.
std::vector<InjectionTarget> analyze_source(const std::filesystem::path& file,
                                            Language language,
                                            const GranularityConfig& config);
std::vector<InjectionTarget> analyze_source_text(std::string_view source,
                                                 Language language,
                                                 const GranularityConfig& config,
                                                 const std::string& display_name = "<memory>");

struct Edit {
    std::uint32_t offset{0};
    std::string text;
};

struct InjectionPlan {
    std::filesystem::path file;
    Language language{Language::python};
    std::vector<Edit> edits; // ascending offset; applied back-to-front
    std::size_t site_count{0}; // instrumented sites; each fires one B/E pair per entry
    std::vector<std::string> notes;
};

/// Plans begin/end shims for each target plus the once-per-file prologue.
/// Exception-capable languages get protected-cleanup ends; C gets explicit
/// ends at each return and the fall-through.
InjectionPlan plan_injections(std::span<const InjectionTarget> targets,
                              Language language,
                              const GranularityConfig& config,
                              std::string_view source);

/// Pure text splice (descending offsets). The result must re-parse cleanly
/// under the same grammar or the plan is rejected with ReparseFailed.
std::string apply_injections(const InjectionPlan& plan, std::string_view source);

/// True when the text parses with no syntax errors under the grammar.
bool parses_cleanly(std::string_view source, Language language);

/// Idempotence guard: detects the prologue marker comment.
bool has_instrumentation_marker(std::string_view source, Language language);
std::string instrumentation_marker(Language language);

/// Convenience: analyze + plan + apply + reparse for one file, writing the
/// instrumented copy under `shadow_dir` with the same file name.
struct InstrumentedFile {
    std::filesystem::path original;
    std::filesystem::path instrumented;
    InjectionPlan plan;
};

InstrumentedFile instrument_file(const std::filesystem::path& file,
                                 const GranularityConfig& config,
                                 const std::filesystem::path& shadow_dir);

} // namespace codegreen
