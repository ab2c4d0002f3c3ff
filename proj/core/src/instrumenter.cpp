#include "codegreen/instrumenter.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <sstream>

#include <tree_sitter/api.h>

#include "codegreen/assets.hpp"
#include "codegreen/errors.hpp"

extern "C" {
const TSLanguage* tree_sitter_python(void);
const TSLanguage* tree_sitter_c(void);
const TSLanguage* tree_sitter_cpp(void);
const TSLanguage* tree_sitter_java(void);
}

namespace codegreen {

namespace {

// ---------------------------------------------------------------------------
// Tree-sitter RAII plumbing

struct ParserHandle {
    TSParser* parser{ts_parser_new()};
    ~ParserHandle() { ts_parser_delete(parser); }
};

struct TreeHandle {
    TSTree* tree{nullptr};
    ~TreeHandle() {
        if (tree)
            ts_tree_delete(tree);
    }
};

struct QueryHandle {
    TSQuery* query{nullptr};
    ~QueryHandle() {
        if (query)
            ts_query_delete(query);
    }
};

struct QueryCursorHandle {
    TSQueryCursor* cursor{ts_query_cursor_new()};
    ~QueryCursorHandle() { ts_query_cursor_delete(cursor); }
};

const TSLanguage* grammar_for(Language lang) {
    switch (lang) {
    case Language::python: return tree_sitter_python();
    case Language::c: return tree_sitter_c();
    case Language::cpp: return tree_sitter_cpp();
    case Language::java: return tree_sitter_java();
    }
    return nullptr;
}

TSTree* parse_text(TSParser* parser, Language lang, std::string_view source) {
    ts_parser_set_language(parser, grammar_for(lang));
    return ts_parser_parse_string(parser, nullptr, source.data(),
                                  static_cast<std::uint32_t>(source.size()));
}

ByteRange range_of(TSNode node) {
    return {ts_node_start_byte(node), ts_node_end_byte(node)};
}

std::string text_of(TSNode node, std::string_view source) {
    const auto r = range_of(node);
    return std::string(source.substr(r.start, r.end - r.start));
}

bool is_type(TSNode node, const char* type) {
    return !ts_node_is_null(node) && std::strcmp(ts_node_type(node), type) == 0;
}

// First syntax-error node, depth first; used for ParseError locations.
TSNode find_error_node(TSNode node) {
    if (ts_node_is_error(node) || ts_node_is_missing(node))
        return node;
    const std::uint32_t count = ts_node_child_count(node);
    for (std::uint32_t i = 0; i < count; ++i) {
        TSNode child = ts_node_child(node, i);
        if (ts_node_has_error(child)) {
            TSNode found = find_error_node(child);
            if (!ts_node_is_null(found))
                return found;
        }
    }
    return TSNode{};
}

struct LineIndex {
    std::vector<std::uint32_t> line_starts{0};

    explicit LineIndex(std::string_view source) {
        for (std::uint32_t i = 0; i < source.size(); ++i)
            if (source[i] == '\n')
                line_starts.push_back(i + 1);
    }

    std::uint32_t line_of(std::uint32_t offset) const {
        const auto it = std::upper_bound(line_starts.begin(), line_starts.end(), offset);
        return static_cast<std::uint32_t>(it - line_starts.begin());
    }

    // Leading whitespace of the line containing `offset`, verbatim.
    std::string indent_at(std::string_view source, std::uint32_t offset) const {
        const std::uint32_t start = line_starts[line_of(offset) - 1];
        std::string indent;
        for (std::uint32_t i = start; i < source.size() && (source[i] == ' ' || source[i] == '\t'); ++i)
            indent.push_back(source[i]);
        return indent;
    }
};

// ---------------------------------------------------------------------------
// Query execution

struct QueryMatch {
    TSNode node{};
    TSNode name{};
    TSNode body{};
    TSNode iterable{};
};

std::vector<QueryMatch> run_query(const TSLanguage* grammar,
                                  TSNode root,
                                  const std::string& query_text,
                                  const std::string& query_name) {
    std::uint32_t error_offset = 0;
    TSQueryError error_kind = TSQueryErrorNone;
    QueryHandle q;
    q.query = ts_query_new(grammar, query_text.data(),
                           static_cast<std::uint32_t>(query_text.size()), &error_offset,
                           &error_kind);
    if (!q.query)
        raise(ErrorCode::parse_error, "query asset " + query_name + " invalid at offset " +
                                          std::to_string(error_offset));

    QueryCursorHandle cursor;
    ts_query_cursor_exec(cursor.cursor, q.query, root);

    std::vector<QueryMatch> matches;
    TSQueryMatch match;
    while (ts_query_cursor_next_match(cursor.cursor, &match)) {
        QueryMatch out;
        for (std::uint16_t i = 0; i < match.capture_count; ++i) {
            const TSQueryCapture& capture = match.captures[i];
            std::uint32_t len = 0;
            const char* name = ts_query_capture_name_for_id(q.query, capture.index, &len);
            const std::string_view capture_name(name, len);
            if (capture_name == "node")
                out.node = capture.node;
            else if (capture_name == "name")
                out.name = capture.node;
            else if (capture_name == "body")
                out.body = capture.node;
            else if (capture_name == "iterable")
                out.iterable = capture.node;
        }
        if (!ts_node_is_null(out.node))
            matches.push_back(out);
    }
    return matches;
}

std::string load_query_asset(Language lang, const char* scope_file) {
    const std::string name =
        std::string("queries/") + to_string(lang) + "/" + scope_file + ".scm";
    const auto text = load_asset(name);
    if (!text)
        raise(ErrorCode::shim_template_missing, "missing query asset " + name);
    return *text;
}

// ---------------------------------------------------------------------------
// Name filtering

bool passes_filters(const GranularityConfig& config, std::string_view name) {
    if (!config.include_patterns.empty()) {
        bool included = false;
        for (const std::string& pattern : config.include_patterns)
            if (glob_match(pattern, name)) {
                included = true;
                break;
            }
        if (!included)
            return false;
    }
    for (const std::string& pattern : config.exclude_patterns)
        if (glob_match(pattern, name))
            return false;
    return true;
}

// ---------------------------------------------------------------------------
// Language-specific analysis helpers

// Nearest enclosing class-like ancestor, or null.
TSNode enclosing_class(TSNode node, Language lang) {
    TSNode current = ts_node_parent(node);
    while (!ts_node_is_null(current)) {
        const char* type = ts_node_type(current);
        if (lang == Language::python && std::strcmp(type, "class_definition") == 0)
            return current;
        if (lang == Language::cpp && (std::strcmp(type, "class_specifier") == 0 ||
                                      std::strcmp(type, "struct_specifier") == 0))
            return current;
        if (lang == Language::java && std::strcmp(type, "class_declaration") == 0)
            return current;
        // Stop at an intervening function boundary: a function nested in a
        // method is not itself a method.
        if (std::strcmp(type, "function_definition") == 0 ||
            std::strcmp(type, "method_declaration") == 0)
            return TSNode{};
        current = ts_node_parent(current);
    }
    return TSNode{};
}

// Innermost declarator name for C/C++ function definitions.
std::string cpp_function_name(TSNode fn_def, std::string_view source) {
    TSNode decl = ts_node_child_by_field_name(fn_def, "declarator", 10);
    while (!ts_node_is_null(decl)) {
        const char* type = ts_node_type(decl);
        if (std::strcmp(type, "function_declarator") == 0 ||
            std::strcmp(type, "pointer_declarator") == 0 ||
            std::strcmp(type, "reference_declarator") == 0 ||
            std::strcmp(type, "parenthesized_declarator") == 0) {
            decl = ts_node_child_by_field_name(decl, "declarator", 10);
            continue;
        }
        break;
    }
    if (ts_node_is_null(decl))
        return {};
    return text_of(decl, source);
}

// Return statements in `body`, excluding ones inside nested lambdas or
// local functions (their own shims handle those).
void collect_returns(TSNode node, std::vector<ByteRange>& out) {
    const char* type = ts_node_type(node);
    if (std::strcmp(type, "lambda_expression") == 0 ||
        std::strcmp(type, "function_definition") == 0)
        return;
    if (std::strcmp(type, "return_statement") == 0) {
        out.push_back(range_of(node));
        return;
    }
    const std::uint32_t count = ts_node_child_count(node);
    for (std::uint32_t i = 0; i < count; ++i)
        collect_returns(ts_node_child(node, i), out);
}

const char* loop_display_name(TSNode node) {
    const char* type = ts_node_type(node);
    if (std::strcmp(type, "while_statement") == 0) return "while";
    if (std::strcmp(type, "do_statement") == 0) return "do";
    return "for";
}

struct AnalysisContext {
    Language language;
    std::string_view source;
    const GranularityConfig* config;
    const LineIndex* lines;
    std::vector<InjectionTarget>* out;
};

void finish_target(const AnalysisContext& ctx, InjectionTarget target) {
    target.language = ctx.language;
    target.start_line = ctx.lines->line_of(target.node.start);
    target.end_line = ctx.lines->line_of(target.node.end > 0 ? target.node.end - 1 : 0);
    ctx.out->push_back(std::move(target));
}

void analyze_functions(const AnalysisContext& ctx, TSNode root, const TSLanguage* grammar) {
    const GranularityConfig& config = *ctx.config;
    const bool want_function = config.scopes.contains(ScopeKind::function);
    const bool want_method = config.scopes.contains(ScopeKind::method);
    const bool want_class = config.scopes.contains(ScopeKind::klass);
    if (!want_function && !want_method && !want_class)
        return;

    const auto matches = run_query(grammar, root, load_query_asset(ctx.language, "function"),
                                   "function");
    for (const QueryMatch& m : matches) {
        if (ts_node_is_null(m.body))
            continue;

        std::string name;
        if (!ts_node_is_null(m.name))
            name = text_of(m.name, ctx.source);
        else if (ctx.language == Language::c || ctx.language == Language::cpp)
            name = cpp_function_name(m.node, ctx.source);
        if (name.empty())
            continue;

        const TSNode cls = enclosing_class(m.node, ctx.language);
        const bool qualified_definition =
            ctx.language == Language::cpp && name.find("::") != std::string::npos;
        const bool is_method =
            !ts_node_is_null(cls) || qualified_definition || ctx.language == Language::java;

        InjectionTarget target;
        target.kind = is_method ? ScopeKind::method : ScopeKind::function;
        target.name = name;
        target.node = range_of(m.node);
        target.body = range_of(m.body);
        if (ctx.language == Language::c || ctx.language == Language::cpp)
            collect_returns(m.body, target.exit_returns);

        bool selected = false;
        if (!is_method && want_function && passes_filters(config, name))
            selected = true;
        // Java has no free functions; `function` scope means methods there.
        if (is_method && ctx.language == Language::java && want_function &&
            passes_filters(config, name))
            selected = true;
        if (is_method && want_method && passes_filters(config, name))
            selected = true;
        if (is_method && !selected && want_class && !ts_node_is_null(cls)) {
            // Class scope instruments every method of a matching class.
            TSNode class_name = ts_node_child_by_field_name(cls, "name", 4);
            if (!ts_node_is_null(class_name) &&
                passes_filters(config, text_of(class_name, ctx.source)))
                selected = true;
        }
        if (selected)
            finish_target(ctx, std::move(target));
    }
}

void analyze_loops(const AnalysisContext& ctx, TSNode root, const TSLanguage* grammar) {
    if (!ctx.config->scopes.contains(ScopeKind::loop))
        return;

    const auto matches =
        run_query(grammar, root, load_query_asset(ctx.language, "loop"), "loop");
    for (const QueryMatch& m : matches) {
        InjectionTarget target;
        target.kind = ScopeKind::loop;
        target.node = range_of(m.node);
        target.is_for_loop = is_type(m.node, "for_statement") ||
                             is_type(m.node, "for_range_loop") ||
                             is_type(m.node, "enhanced_for_statement");
        target.name = std::string(loop_display_name(m.node)) + "@L" +
                      std::to_string(ctx.lines->line_of(target.node.start));
        if (!ts_node_is_null(m.body)) {
            target.body = range_of(m.body);
            target.body_is_block = is_type(m.body, "compound_statement") ||
                                   is_type(m.body, "block");
        } else {
            target.body = target.node;
            target.body_is_block = false;
        }
        if (!ts_node_is_null(m.iterable))
            target.loop_iterable = range_of(m.iterable);
        if (passes_filters(*ctx.config, target.name))
            finish_target(ctx, std::move(target));
    }
}

} // namespace

// ---------------------------------------------------------------------------
// Public surface

const char* to_string(Language lang) {
    switch (lang) {
    case Language::python: return "python";
    case Language::c: return "c";
    case Language::cpp: return "cpp";
    case Language::java: return "java";
    }
    return "unknown";
}

std::optional<Language> parse_language(const std::string& name) {
    if (name == "python") return Language::python;
    if (name == "c") return Language::c;
    if (name == "cpp" || name == "c++") return Language::cpp;
    if (name == "java") return Language::java;
    return std::nullopt;
}

const char* to_string(ScopeKind kind) {
    switch (kind) {
    case ScopeKind::function: return "function";
    case ScopeKind::method: return "method";
    case ScopeKind::klass: return "class";
    case ScopeKind::loop: return "loop";
    }
    return "unknown";
}

std::optional<ScopeKind> parse_scope_kind(const std::string& name) {
    if (name == "function") return ScopeKind::function;
    if (name == "method") return ScopeKind::method;
    if (name == "class") return ScopeKind::klass;
    if (name == "loop") return ScopeKind::loop;
    return std::nullopt;
}

std::optional<Language> try_detect_language(const std::filesystem::path& path) {
    const std::string ext = path.extension().string();
    if (ext == ".py") return Language::python;
    if (ext == ".c") return Language::c;
    if (ext == ".cc" || ext == ".cpp" || ext == ".cxx") return Language::cpp;
    if (ext == ".java") return Language::java;
    return std::nullopt;
}

Language detect_language(const std::filesystem::path& path) {
    if (const auto lang = try_detect_language(path))
        return *lang;
    raise(ErrorCode::unsupported_language,
          "no grammar for '" + path.extension().string() + "' (" + path.string() + ")");
}

bool glob_match(std::string_view pattern, std::string_view name) {
    // Iterative '*'/'?' matcher with backtracking to the last star.
    std::size_t p = 0, n = 0;
    std::size_t star = std::string_view::npos, star_n = 0;
    while (n < name.size()) {
        if (p < pattern.size() && (pattern[p] == '?' || pattern[p] == name[n])) {
            ++p;
            ++n;
        } else if (p < pattern.size() && pattern[p] == '*') {
            star = p++;
            star_n = n;
        } else if (star != std::string_view::npos) {
            p = star + 1;
            n = ++star_n;
        } else {
            return false;
        }
    }
    while (p < pattern.size() && pattern[p] == '*')
        ++p;
    return p == pattern.size();
}

std::string instrumentation_marker(Language lang) {
    return lang == Language::python ? "# codegreen-instrumented"
                                    : "/* codegreen-instrumented */";
}

bool has_instrumentation_marker(std::string_view source, Language lang) {
    return source.find(instrumentation_marker(lang)) != std::string_view::npos;
}

bool parses_cleanly(std::string_view source, Language lang) {
    ParserHandle parser;
    TreeHandle tree;
    tree.tree = parse_text(parser.parser, lang, source);
    return tree.tree && !ts_node_has_error(ts_tree_root_node(tree.tree));
}

std::vector<InjectionTarget> analyze_source_text(std::string_view source,
                                                 Language language,
                                                 const GranularityConfig& config,
                                                 const std::string& display_name) {
    if (has_instrumentation_marker(source, language))
        raise(ErrorCode::already_instrumented,
              display_name + " already carries the instrumentation marker");

    ParserHandle parser;
    TreeHandle tree;
    tree.tree = parse_text(parser.parser, language, source);
    if (!tree.tree)
        raise(ErrorCode::parse_error, display_name + ": parser failure");
    const TSNode root = ts_tree_root_node(tree.tree);
    const LineIndex lines(source);
    if (ts_node_has_error(root)) {
        const TSNode error = find_error_node(root);
        const std::uint32_t offset = ts_node_is_null(error) ? 0 : ts_node_start_byte(error);
        raise(ErrorCode::parse_error,
              display_name + ":" + std::to_string(lines.line_of(offset)) + ": syntax error");
    }

    std::vector<InjectionTarget> targets;
    AnalysisContext ctx{language, source, &config, &lines, &targets};
    analyze_functions(ctx, root, grammar_for(language));
    analyze_loops(ctx, root, grammar_for(language));

    std::stable_sort(targets.begin(), targets.end(),
                     [](const InjectionTarget& a, const InjectionTarget& b) {
                         if (a.node.start != b.node.start)
                             return a.node.start < b.node.start;
                         return a.node.end > b.node.end; // outer first
                     });
    targets.erase(std::unique(targets.begin(), targets.end(),
                              [](const InjectionTarget& a, const InjectionTarget& b) {
                                  return a.node.start == b.node.start &&
                                         a.node.end == b.node.end;
                              }),
                  targets.end());
    return targets;
}

std::vector<InjectionTarget> analyze_source(const std::filesystem::path& file,
                                            Language language,
                                            const GranularityConfig& config) {
    std::ifstream in(file, std::ios::binary);
    if (!in)
        raise(ErrorCode::parse_error, file.string() + ": cannot open");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return analyze_source_text(buffer.str(), language, config, file.string());
}

} // namespace codegreen
