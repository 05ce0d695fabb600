#pragma once

#include <charconv>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "graph.hpp"

namespace qgs {

enum class DiagnosticKind { Syntax, UnknownVertex, DuplicateName, ArityMismatch, MissingHeader };

inline const char* diagnostic_name(DiagnosticKind k)
{
    switch (k) {
    case DiagnosticKind::Syntax: return "Syntax";
    case DiagnosticKind::UnknownVertex: return "UnknownVertex";
    case DiagnosticKind::DuplicateName: return "DuplicateName";
    case DiagnosticKind::ArityMismatch: return "ArityMismatch";
    case DiagnosticKind::MissingHeader: return "MissingHeader";
    }
    return "Syntax";
}

struct ParseDiagnostic {
    int line = 0;
    int column = 0;
    DiagnosticKind kind = DiagnosticKind::Syntax;
    std::string message;
};

inline std::string format_diagnostic(const ParseDiagnostic& d)
{
    return std::to_string(d.line) + ":" + std::to_string(d.column) + ": " + diagnostic_name(d.kind) + ": " + d.message;
}

using ParseResult = std::variant<GraphSpec, std::vector<ParseDiagnostic>>;

namespace detail {

struct Token {
    std::string text;
    int column;
};

inline std::vector<Token> tokenize_line(std::string_view line)
{
    std::vector<Token> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
        if (i >= line.size() || line[i] == '#') break;
        std::size_t j = i;
        while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r' && line[j] != '#') ++j;
        out.push_back({std::string(line.substr(i, j - i)), static_cast<int>(i) + 1});
        i = j;
    }
    return out;
}

inline bool parse_int(const std::string& s, std::int64_t& v)
{
    if (s.empty()) return false;
    const char* b = s.data();
    const char* e = s.data() + s.size();
    if (*b == '+') {
        ++b;
        if (b == e || *b == '-') return false;
    }
    auto [p, ec] = std::from_chars(b, e, v);
    return ec == std::errc() && p == e;
}

} // namespace detail

inline ParseResult parse(std::string_view text)
{
    std::vector<ParseDiagnostic> diags;
    GraphSpec spec;
    bool seen_graph = false, seen_dim = false, seen_vertices = false;
    std::set<std::string> vertex_set, edge_set;
    int lineno = 0;

    auto diag = [&](int line, int col, DiagnosticKind k, std::string msg) {
        diags.push_back({line, col, k, std::move(msg)});
    };
    // Missing headers are only reported when no earlier error could explain them.
    auto require = [&](bool ok, int line, const char* what) {
        if (ok) return true;
        if (diags.empty()) diag(line, 1, DiagnosticKind::MissingHeader, std::string("expected '") + what + "' before this line");
        return false;
    };

    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t nl = text.find('\n', pos);
        std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        ++lineno;
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;

        auto toks = detail::tokenize_line(line);
        if (toks.empty()) continue;
        const std::string& kw = toks[0].text;

        if (kw == "graph") {
            if (seen_graph) {
                diag(lineno, toks[0].column, DiagnosticKind::Syntax, "duplicate 'graph' directive");
                continue;
            }
            seen_graph = true;
            if (toks.size() != 2) {
                diag(lineno, toks.size() < 2 ? toks[0].column : toks[2].column, DiagnosticKind::Syntax,
                     "expected 'graph <name>'");
                continue;
            }
            if (!is_identifier(toks[1].text)) {
                diag(lineno, toks[1].column, DiagnosticKind::Syntax, "invalid graph name '" + toks[1].text + "'");
                continue;
            }
            spec.name = toks[1].text;
        } else if (kw == "dim") {
            if (seen_dim) {
                diag(lineno, toks[0].column, DiagnosticKind::Syntax, "duplicate 'dim' directive");
                continue;
            }
            require(seen_graph, lineno, "graph");
            seen_dim = true;
            std::int64_t d = 0;
            if (toks.size() != 2) {
                diag(lineno, toks.size() < 2 ? toks[0].column : toks[2].column, DiagnosticKind::Syntax,
                     "expected 'dim <d>'");
                continue;
            }
            if (!detail::parse_int(toks[1].text, d) || d < 1 || d > 64) {
                diag(lineno, toks[1].column, DiagnosticKind::Syntax, "dimension must be an integer in [1, 64]");
                continue;
            }
            spec.dim = static_cast<int>(d);
        } else if (kw == "vertices") {
            if (seen_vertices) {
                diag(lineno, toks[0].column, DiagnosticKind::Syntax, "duplicate 'vertices' directive");
                continue;
            }
            require(seen_graph && seen_dim, lineno, seen_graph ? "dim" : "graph");
            seen_vertices = true;
            if (toks.size() < 2) {
                diag(lineno, toks[0].column, DiagnosticKind::Syntax, "expected at least one vertex name");
                continue;
            }
            for (std::size_t i = 1; i < toks.size(); ++i) {
                if (!is_identifier(toks[i].text)) {
                    diag(lineno, toks[i].column, DiagnosticKind::Syntax, "invalid vertex name '" + toks[i].text + "'");
                    continue;
                }
                if (!vertex_set.insert(toks[i].text).second) {
                    diag(lineno, toks[i].column, DiagnosticKind::DuplicateName, "duplicate vertex '" + toks[i].text + "'");
                    continue;
                }
                spec.vertex_names.push_back(toks[i].text);
            }
        } else if (kw == "edge") {
            if (!require(seen_vertices, lineno, "vertices")) continue;
            if (toks.size() < 5 || toks[4].text != "index") {
                int col = toks.size() < 5 ? toks.back().column : toks[4].column;
                diag(lineno, col, DiagnosticKind::Syntax, "expected 'edge <name> <tail> <head> index <ints>'");
                continue;
            }
            bool ok = true;
            EdgeDecl e;
            e.name = toks[1].text;
            e.tail = toks[2].text;
            e.head = toks[3].text;
            if (!is_identifier(e.name)) {
                diag(lineno, toks[1].column, DiagnosticKind::Syntax, "invalid edge name '" + e.name + "'");
                ok = false;
            } else if (edge_set.count(e.name)) {
                diag(lineno, toks[1].column, DiagnosticKind::DuplicateName, "duplicate edge '" + e.name + "'");
                ok = false;
            }
            for (int k = 2; k <= 3; ++k)
                if (!vertex_set.count(toks[k].text)) {
                    diag(lineno, toks[k].column, DiagnosticKind::UnknownVertex, "undeclared vertex '" + toks[k].text + "'");
                    ok = false;
                }
            for (std::size_t i = 5; i < toks.size(); ++i) {
                std::int64_t v = 0;
                if (!detail::parse_int(toks[i].text, v)) {
                    diag(lineno, toks[i].column, DiagnosticKind::Syntax, "index component '" + toks[i].text + "' is not an integer");
                    ok = false;
                    break;
                }
                e.index.push_back(v);
            }
            if (ok && seen_dim && spec.dim > 0 && static_cast<int>(e.index.size()) != spec.dim) {
                int col = toks.size() > 5 ? toks[5].column : toks[4].column;
                diag(lineno, col, DiagnosticKind::ArityMismatch,
                     "index has " + std::to_string(e.index.size()) + " components, dim is " + std::to_string(spec.dim));
                ok = false;
            }
            if (ok) {
                edge_set.insert(e.name);
                spec.edges.push_back(std::move(e));
            }
        } else {
            diag(lineno, toks[0].column, DiagnosticKind::Syntax, "unknown directive '" + kw + "'");
        }
    }

    if (diags.empty()) {
        int last = std::max(1, lineno);
        if (!seen_graph) diag(last, 1, DiagnosticKind::MissingHeader, "missing 'graph' directive");
        else if (!seen_dim) diag(last, 1, DiagnosticKind::MissingHeader, "missing 'dim' directive");
        else if (!seen_vertices) diag(last, 1, DiagnosticKind::MissingHeader, "missing 'vertices' directive");
    }
    if (!diags.empty()) return diags;
    return spec;
}

inline std::string serialize(const GraphSpec& spec)
{
    std::string out = "graph " + spec.name + "\n";
    out += "dim " + std::to_string(spec.dim) + "\n";
    out += "vertices";
    for (const auto& v : spec.vertex_names) out += " " + v;
    out += "\n";
    for (const auto& e : spec.edges) {
        out += "edge " + e.name + " " + e.tail + " " + e.head + " index";
        for (auto x : e.index) out += " " + std::to_string(x);
        out += "\n";
    }
    return out;
}

} // namespace qgs
