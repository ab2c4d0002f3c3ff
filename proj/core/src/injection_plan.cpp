#include <algorithm>
#include <cstring>
#include <fstream>
#include <sstream>

#include <tree_sitter/api.h>

#include "codegreen/assets.hpp"
#include "codegreen/errors.hpp"
#include "codegreen/instrumenter.hpp"

extern "C" {
const TSLanguage* tree_sitter_python(void);
}

namespace codegreen {

namespace {

std::string shim_asset_name(Language lang) {
    switch (lang) {
    case Language::python: return "shims/python.tmpl";
    case Language::c: return "shims/c.tmpl";
    case Language::cpp: return "shims/cpp.tmpl";
    case Language::java: return "shims/java.tmpl";
    }
    return {};
}

std::string load_shim(Language lang) {
    const std::string name = shim_asset_name(lang);
    const auto text = load_asset(name);
    if (!text)
        raise(ErrorCode::shim_template_missing, "missing shim template " + name);
    return *text;
}

// Leading whitespace of the line containing `offset`.
std::string indent_at(std::string_view source, std::uint32_t offset) {
    std::uint32_t line_start = offset;
    while (line_start > 0 && source[line_start - 1] != '\n')
        --line_start;
    std::string indent;
    for (std::uint32_t i = line_start; i < source.size() && (source[i] == ' ' || source[i] == '\t'); ++i)
        indent.push_back(source[i]);
    return indent;
}

// Where the python prologue may go: after the module docstring and any
// `from __future__ import ...` lines (inserting above those would be a
// syntax error), but before the first real statement. Comments and the
// shebang stay where they are.
std::uint32_t python_prologue_offset(std::string_view source) {
    TSParser* parser = ts_parser_new();
    ts_parser_set_language(parser, tree_sitter_python());
    TSTree* tree =
        ts_parser_parse_string(parser, nullptr, source.data(), static_cast<std::uint32_t>(source.size()));
    std::uint32_t offset = static_cast<std::uint32_t>(source.size());
    bool docstring_seen = false;
    const TSNode root = ts_tree_root_node(tree);
    const std::uint32_t count = ts_node_child_count(root);
    for (std::uint32_t i = 0; i < count; ++i) {
        const TSNode child = ts_node_child(root, i);
        const char* type = ts_node_type(child);
        if (std::strcmp(type, "comment") == 0)
            continue;
        if (!docstring_seen && std::strcmp(type, "expression_statement") == 0 &&
            ts_node_named_child_count(child) == 1 &&
            std::strcmp(ts_node_type(ts_node_named_child(child, 0)), "string") == 0) {
            docstring_seen = true;
            continue;
        }
        if (std::strcmp(type, "future_import_statement") == 0)
            continue;
        if (std::strcmp(type, "import_from_statement") == 0) {
            const TSNode module = ts_node_child_by_field_name(child, "module_name", 11);
            if (!ts_node_is_null(module)) {
                const std::uint32_t s = ts_node_start_byte(module);
                const std::uint32_t e = ts_node_end_byte(module);
                if (source.substr(s, e - s) == "__future__")
                    continue;
            }
        }
        offset = ts_node_start_byte(child);
        break;
    }
    ts_tree_delete(tree);
    ts_parser_delete(parser);
    return offset;
}

bool python_target_is_async(std::string_view source, const InjectionTarget& t) {
    return source.substr(t.node.start, 5) == "async";
}

struct PlanBuilder {
    InjectionPlan plan;
    std::string_view source;

    void add(std::uint32_t offset, std::string text) {
        plan.edits.push_back({offset, std::move(text)});
    }
};

void plan_python(PlanBuilder& b, std::span<const InjectionTarget> targets,
                 const GranularityConfig& config) {
    b.add(python_prologue_offset(b.source), load_shim(Language::python));
    for (const InjectionTarget& t : targets) {
        switch (t.kind) {
        case ScopeKind::function:
        case ScopeKind::method:
        case ScopeKind::klass: {
            b.add(t.node.start,
                  "@_codegreen_fn(\"" + t.name + "\")\n" + indent_at(b.source, t.node.start));
            ++b.plan.site_count;
            break;
        }
        case ScopeKind::loop: {
            if (t.is_for_loop && t.loop_iterable) {
                if (python_target_is_async(b.source, t)) {
                    b.plan.notes.push_back(t.name + ": async for not instrumented");
                    break;
                }
                const char* wrapper = config.loop_mode == LoopMode::per_iteration
                                          ? "_codegreen_iterwrap"
                                          : "_codegreen_loopwrap";
                b.add(t.loop_iterable->start, std::string(wrapper) + "(\"" + t.name + "\", ");
                b.add(t.loop_iterable->end, ")");
                ++b.plan.site_count;
            } else {
                // while loops have no iterable to wrap; bracket the whole
                // statement. per_iteration degrades to whole_loop here.
                if (config.loop_mode == LoopMode::per_iteration)
                    b.plan.notes.push_back(t.name +
                                           ": per_iteration unavailable for while loops; "
                                           "instrumented as whole_loop");
                const std::string indent = indent_at(b.source, t.node.start);
                b.add(t.node.start, "_codegreen_begin(\"" + t.name + "\")\n" + indent);
                b.add(t.node.end, "\n" + indent + "_codegreen_end()");
                ++b.plan.site_count;
            }
            break;
        }
        }
    }
}

void plan_c(PlanBuilder& b, std::span<const InjectionTarget> targets,
            const GranularityConfig& config) {
    b.add(0, load_shim(Language::c));
    for (const InjectionTarget& t : targets) {
        switch (t.kind) {
        case ScopeKind::function:
        case ScopeKind::method:
        case ScopeKind::klass: {
            b.add(t.body.start + 1, " _codegreen_begin(\"" + t.name + "\");");
            for (const ByteRange& ret : t.exit_returns) {
                b.add(ret.start, "{ _codegreen_end(); ");
                b.add(ret.end, " }");
            }
            b.add(t.body.end - 1, " _codegreen_end(); ");
            ++b.plan.site_count;
            break;
        }
        case ScopeKind::loop: {
            if (config.loop_mode == LoopMode::per_iteration) {
                if (t.body_is_block) {
                    b.add(t.body.start + 1, " _codegreen_begin(\"" + t.name + "\");");
                    b.add(t.body.end - 1, " _codegreen_end(); ");
                } else {
                    b.add(t.body.start, "{ _codegreen_begin(\"" + t.name + "\"); ");
                    b.add(t.body.end, " _codegreen_end(); }");
                }
            } else {
                b.add(t.node.start, "{ _codegreen_begin(\"" + t.name + "\"); ");
                b.add(t.node.end, " _codegreen_end(); }");
            }
            ++b.plan.site_count;
            break;
        }
        }
    }
}

void plan_cpp(PlanBuilder& b, std::span<const InjectionTarget> targets,
              const GranularityConfig& config) {
    b.add(0, load_shim(Language::cpp));
    for (const InjectionTarget& t : targets) {
        switch (t.kind) {
        case ScopeKind::function:
        case ScopeKind::method:
        case ScopeKind::klass: {
            b.add(t.body.start + 1,
                  " codegreen_shim::Guard _codegreen_scope{\"" + t.name + "\"};");
            ++b.plan.site_count;
            break;
        }
        case ScopeKind::loop: {
            if (config.loop_mode == LoopMode::per_iteration) {
                if (t.body_is_block) {
                    b.add(t.body.start + 1,
                          " codegreen_shim::Guard _codegreen_iter{\"" + t.name + "\"};");
                } else {
                    b.add(t.body.start,
                          "{ codegreen_shim::Guard _codegreen_iter{\"" + t.name + "\"}; ");
                    b.add(t.body.end, " }");
                }
            } else {
                b.add(t.node.start,
                      "{ codegreen_shim::Guard _codegreen_loop{\"" + t.name + "\"}; ");
                b.add(t.node.end, " }");
            }
            ++b.plan.site_count;
            break;
        }
        }
    }
}

void plan_java(PlanBuilder& b, std::span<const InjectionTarget> targets,
               const GranularityConfig& config) {
    b.add(0, "/* codegreen-instrumented */\n");
    b.add(static_cast<std::uint32_t>(b.source.size()), "\n" + load_shim(Language::java));
    for (const InjectionTarget& t : targets) {
        switch (t.kind) {
        case ScopeKind::function:
        case ScopeKind::method:
        case ScopeKind::klass: {
            b.add(t.body.start + 1, " _CodegreenShim.begin(\"" + t.name + "\"); try {");
            b.add(t.body.end - 1, " } finally { _CodegreenShim.end(); } ");
            ++b.plan.site_count;
            break;
        }
        case ScopeKind::loop: {
            if (config.loop_mode == LoopMode::per_iteration) {
                if (t.body_is_block) {
                    b.add(t.body.start + 1, " _CodegreenShim.begin(\"" + t.name + "\"); try {");
                    b.add(t.body.end - 1, " } finally { _CodegreenShim.end(); } ");
                } else {
                    b.add(t.body.start, "{ _CodegreenShim.begin(\"" + t.name + "\"); try { ");
                    b.add(t.body.end, " } finally { _CodegreenShim.end(); } }");
                }
            } else {
                b.add(t.node.start, "{ _CodegreenShim.begin(\"" + t.name + "\"); try { ");
                b.add(t.node.end, " } finally { _CodegreenShim.end(); } }");
            }
            ++b.plan.site_count;
            break;
        }
        }
    }
}

} // namespace

InjectionPlan plan_injections(std::span<const InjectionTarget> targets,
                              Language language,
                              const GranularityConfig& config,
                              std::string_view source) {
    // Targets may nest but never cross.
    std::vector<const InjectionTarget*> sorted;
    sorted.reserve(targets.size());
    for (const InjectionTarget& t : targets)
        sorted.push_back(&t);
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const InjectionTarget* a, const InjectionTarget* b) {
                         if (a->node.start != b->node.start)
                             return a->node.start < b->node.start;
                         return a->node.end > b->node.end;
                     });
    for (std::size_t i = 1; i < sorted.size(); ++i) {
        const InjectionTarget* prev = sorted[i - 1];
        const InjectionTarget* cur = sorted[i];
        if (cur->node.start < prev->node.end && cur->node.end > prev->node.end)
            raise(ErrorCode::crossing_ranges,
                  prev->name + " and " + cur->name + " cross without nesting");
    }

    PlanBuilder builder;
    builder.source = source;
    builder.plan.language = language;

    std::vector<InjectionTarget> ordered;
    ordered.reserve(sorted.size());
    for (const InjectionTarget* t : sorted)
        ordered.push_back(*t);

    if (!ordered.empty()) {
        switch (language) {
        case Language::python: plan_python(builder, ordered, config); break;
        case Language::c: plan_c(builder, ordered, config); break;
        case Language::cpp: plan_cpp(builder, ordered, config); break;
        case Language::java: plan_java(builder, ordered, config); break;
        }
    }

    // Ascending offsets, creation order preserved within equal offsets;
    // apply_injections walks this back-to-front.
    std::stable_sort(builder.plan.edits.begin(), builder.plan.edits.end(),
                     [](const Edit& a, const Edit& b) { return a.offset < b.offset; });
    return builder.plan;
}

std::string apply_injections(const InjectionPlan& plan, std::string_view source) {
    for (const Edit& edit : plan.edits)
        if (edit.offset > source.size())
            raise(ErrorCode::offset_out_of_range,
                  "edit offset " + std::to_string(edit.offset) + " beyond source size " +
                      std::to_string(source.size()));

    std::string out(source);
    for (auto it = plan.edits.rbegin(); it != plan.edits.rend(); ++it)
        out.insert(it->offset, it->text);

    if (!plan.edits.empty() && !parses_cleanly(out, plan.language))
        raise(ErrorCode::reparse_failed,
              plan.file.empty() ? std::string("instrumented output does not re-parse")
                                : plan.file.string() + ": instrumented output does not re-parse");
    return out;
}

InstrumentedFile instrument_file(const std::filesystem::path& file,
                                 const GranularityConfig& config,
                                 const std::filesystem::path& shadow_dir) {
    const Language language = detect_language(file);

    std::ifstream in(file, std::ios::binary);
    if (!in)
        raise(ErrorCode::parse_error, file.string() + ": cannot open");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    const std::string source = buffer.str();

    const auto targets = analyze_source_text(source, language, config, file.string());
    InjectionPlan plan = plan_injections(targets, language, config, source);
    plan.file = file;
    const std::string instrumented = apply_injections(plan, source);

    std::filesystem::create_directories(shadow_dir);
    const std::filesystem::path out_path = shadow_dir / file.filename();
    std::ofstream out(out_path, std::ios::binary);
    if (!out)
        raise(ErrorCode::io_failure, out_path.string() + ": cannot write");
    out << instrumented;
    out.close();

    return {file, out_path, std::move(plan)};
}

} // namespace codegreen
