#pragma once

#include "convlab/method.hpp"
#include "convlab/problem.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

namespace convlab::dsl {

/// 1-based line and column, 0-based byte offset.
struct source_span {
    int line = 1;
    int column = 1;
    std::size_t offset = 0;
};

struct diagnostic {
    std::string code;     // parse-error, unknown-symbol, duplicate-edge,
                          // missing-transition, unresolved-state,
                          // unresolved-problem, duplicate-name, unknown-label
    std::string message;
    source_span span;
};

// ---------------------------------------------------------------------------
// AST. Spans are kept for diagnostics but excluded from structural equality,
// so a document compares equal to its reparsed print.

struct edge_decl {
    std::string from;
    std::optional<std::string> symbol;   // nullopt = "*" (all remaining symbols)
    std::string to;
    source_span span;
};

inline bool same_edge(const edge_decl& a, const edge_decl& b) {
    return a.from == b.from && a.symbol == b.symbol && a.to == b.to;
}

struct problem_decl {
    std::string name;
    std::vector<std::string> alphabet;
    std::vector<std::string> hypotheses;
    std::vector<std::pair<std::string, std::string>> states;   // name, label
    std::string init;
    std::vector<edge_decl> edges;
    source_span span;
};

struct method_decl {
    std::string name;
    std::string problem;
    std::vector<std::pair<std::string, std::string>> states;   // name, output ("?" = suspend)
    std::string init;
    std::vector<edge_decl> edges;
    source_span span;
};

using declaration = std::variant<problem_decl, method_decl>;

struct document {
    std::vector<declaration> decls;
};

inline bool structurally_equal(const problem_decl& a, const problem_decl& b) {
    if (a.name != b.name || a.alphabet != b.alphabet || a.hypotheses != b.hypotheses ||
        a.states != b.states || a.init != b.init || a.edges.size() != b.edges.size())
        return false;
    for (std::size_t i = 0; i < a.edges.size(); ++i)
        if (!same_edge(a.edges[i], b.edges[i])) return false;
    return true;
}

inline bool structurally_equal(const method_decl& a, const method_decl& b) {
    if (a.name != b.name || a.problem != b.problem || a.states != b.states ||
        a.init != b.init || a.edges.size() != b.edges.size())
        return false;
    for (std::size_t i = 0; i < a.edges.size(); ++i)
        if (!same_edge(a.edges[i], b.edges[i])) return false;
    return true;
}

inline bool structurally_equal(const document& a, const document& b) {
    if (a.decls.size() != b.decls.size()) return false;
    for (std::size_t i = 0; i < a.decls.size(); ++i) {
        if (a.decls[i].index() != b.decls[i].index()) return false;
        bool eq = std::visit(
            [&](const auto& da) {
                using T = std::decay_t<decltype(da)>;
                return structurally_equal(da, std::get<T>(b.decls[i]));
            },
            a.decls[i]);
        if (!eq) return false;
    }
    return true;
}

// ---------------------------------------------------------------------------
// Lexer

namespace detail {

enum class token_kind { name, punct, star, question, end };

struct token {
    token_kind kind = token_kind::end;
    std::string text;
    source_span span;
};

class lexer {
public:
    explicit lexer(std::string_view src) : src_(src) {}

    std::vector<token> run(std::vector<diagnostic>& diags) {
        std::vector<token> out;
        while (true) {
            skip_trivia();
            source_span sp = here();
            if (pos_ >= src_.size()) {
                out.push_back({token_kind::end, "", sp});
                return out;
            }
            char c = src_[pos_];
            if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
                std::size_t start = pos_;
                while (pos_ < src_.size() &&
                       (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
                    advance();
                out.push_back({token_kind::name, std::string(src_.substr(start, pos_ - start)), sp});
            } else if (c == '*') {
                advance();
                out.push_back({token_kind::star, "*", sp});
            } else if (c == '?') {
                advance();
                out.push_back({token_kind::question, "?", sp});
            } else if (c == '-') {
                if (src_.substr(pos_).starts_with("-->")) {
                    advance(); advance(); advance();
                    out.push_back({token_kind::punct, "-->", sp});
                } else if (src_.substr(pos_).starts_with("--")) {
                    advance(); advance();
                    out.push_back({token_kind::punct, "--", sp});
                } else {
                    diags.push_back({"parse-error", "stray '-'", sp});
                    advance();
                }
            } else if (std::string("{};:,[]").find(c) != std::string::npos) {
                advance();
                out.push_back({token_kind::punct, std::string(1, c), sp});
            } else {
                diags.push_back({"parse-error",
                                 std::string("unexpected character '") + c + "'", sp});
                advance();
            }
        }
    }

private:
    void skip_trivia() {
        while (pos_ < src_.size()) {
            char c = src_[pos_];
            if (c == '#') {
                while (pos_ < src_.size() && src_[pos_] != '\n') advance();
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                advance();
            } else {
                break;
            }
        }
    }

    source_span here() const { return {line_, col_, pos_}; }

    void advance() {
        if (src_[pos_] == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        ++pos_;
    }

    std::string_view src_;
    std::size_t pos_ = 0;
    int line_ = 1, col_ = 1;
};

} // namespace detail

// ---------------------------------------------------------------------------
// Parser: recursive descent with single-token lookahead (the grammar is
// LL(1)). Syntax errors stop the parse; semantic checks then run over the
// whole tree and may report several diagnostics at once.

struct parse_result {
    std::optional<document> doc;
    std::vector<diagnostic> diagnostics;

    bool ok() const { return doc.has_value() && diagnostics.empty(); }
};

namespace detail {

class parser {
public:
    parser(std::vector<token> toks, std::vector<diagnostic>& diags)
        : toks_(std::move(toks)), diags_(diags) {}

    std::optional<document> run() {
        document doc;
        while (peek().kind != token_kind::end) {
            if (peek().kind == token_kind::name && peek().text == "problem") {
                auto d = parse_problem();
                if (!d) return std::nullopt;
                doc.decls.emplace_back(std::move(*d));
            } else if (peek().kind == token_kind::name && peek().text == "method") {
                auto d = parse_method();
                if (!d) return std::nullopt;
                doc.decls.emplace_back(std::move(*d));
            } else {
                error("expected 'problem' or 'method'");
                return std::nullopt;
            }
        }
        return doc;
    }

private:
    const token& peek() const { return toks_[pos_]; }
    token take() { return toks_[pos_++]; }

    void error(const std::string& msg) {
        diags_.push_back({"parse-error", msg, peek().span});
    }

    bool expect_punct(const std::string& text) {
        if (peek().kind == token_kind::punct && peek().text == text) {
            take();
            return true;
        }
        error("expected '" + text + "'");
        return false;
    }

    std::optional<std::string> expect_name(const std::string& what) {
        if (peek().kind == token_kind::name) return take().text;
        error("expected " + what);
        return std::nullopt;
    }

    bool expect_keyword(const std::string& kw) {
        if (peek().kind == token_kind::name && peek().text == kw) {
            take();
            return expect_punct(":");
        }
        error("expected '" + kw + ":'");
        return false;
    }

    std::optional<std::vector<std::string>> parse_namelist() {
        std::vector<std::string> out;
        auto first = expect_name("a name");
        if (!first) return std::nullopt;
        out.push_back(*first);
        while (peek().kind == token_kind::punct && peek().text == ",") {
            take();
            auto next = expect_name("a name");
            if (!next) return std::nullopt;
            out.push_back(*next);
        }
        return out;
    }

    // statelist := NAME "[" (NAME | "?") "]" { "," ... }
    std::optional<std::vector<std::pair<std::string, std::string>>>
    parse_statelist(bool allow_question) {
        std::vector<std::pair<std::string, std::string>> out;
        while (true) {
            auto name = expect_name("a state name");
            if (!name) return std::nullopt;
            if (!expect_punct("[")) return std::nullopt;
            std::string tag;
            if (allow_question && peek().kind == token_kind::question) {
                tag = take().text;
            } else {
                auto t = expect_name(allow_question ? "a hypothesis or '?'" : "a hypothesis");
                if (!t) return std::nullopt;
                tag = *t;
            }
            if (!expect_punct("]")) return std::nullopt;
            out.emplace_back(*name, tag);
            if (peek().kind == token_kind::punct && peek().text == ",") {
                take();
                continue;
            }
            return out;
        }
    }

    std::optional<edge_decl> parse_edge() {
        edge_decl e;
        e.span = peek().span;
        auto from = expect_name("a state name");
        if (!from) return std::nullopt;
        e.from = *from;
        if (!expect_punct("--")) return std::nullopt;
        if (peek().kind == token_kind::star) {
            take();
            e.symbol = std::nullopt;
        } else {
            auto sym = expect_name("a symbol or '*'");
            if (!sym) return std::nullopt;
            e.symbol = *sym;
        }
        if (!expect_punct("-->")) return std::nullopt;
        auto to = expect_name("a state name");
        if (!to) return std::nullopt;
        e.to = *to;
        if (!expect_punct(";")) return std::nullopt;
        return e;
    }

    std::optional<problem_decl> parse_problem() {
        problem_decl d;
        d.span = peek().span;
        take();   // "problem"
        auto name = expect_name("a problem name");
        if (!name) return std::nullopt;
        d.name = *name;
        if (!expect_punct("{")) return std::nullopt;
        if (!expect_keyword("alphabet")) return std::nullopt;
        auto alpha = parse_namelist();
        if (!alpha || !expect_punct(";")) return std::nullopt;
        d.alphabet = *alpha;
        if (!expect_keyword("hypotheses")) return std::nullopt;
        auto hyps = parse_namelist();
        if (!hyps || !expect_punct(";")) return std::nullopt;
        d.hypotheses = *hyps;
        if (!expect_keyword("states")) return std::nullopt;
        auto states = parse_statelist(false);
        if (!states || !expect_punct(";")) return std::nullopt;
        d.states = *states;
        if (!expect_keyword("init")) return std::nullopt;
        auto init = expect_name("a state name");
        if (!init || !expect_punct(";")) return std::nullopt;
        d.init = *init;
        while (!(peek().kind == token_kind::punct && peek().text == "}")) {
            auto e = parse_edge();
            if (!e) return std::nullopt;
            d.edges.push_back(std::move(*e));
        }
        take();   // "}"
        return d;
    }

    std::optional<method_decl> parse_method() {
        method_decl d;
        d.span = peek().span;
        take();   // "method"
        auto name = expect_name("a method name");
        if (!name) return std::nullopt;
        d.name = *name;
        if (!expect_punct("{")) return std::nullopt;
        if (!expect_keyword("problem")) return std::nullopt;
        auto prob = expect_name("a problem name");
        if (!prob || !expect_punct(";")) return std::nullopt;
        d.problem = *prob;
        if (!expect_keyword("states")) return std::nullopt;
        auto states = parse_statelist(true);
        if (!states || !expect_punct(";")) return std::nullopt;
        d.states = *states;
        if (!expect_keyword("init")) return std::nullopt;
        auto init = expect_name("a state name");
        if (!init || !expect_punct(";")) return std::nullopt;
        d.init = *init;
        while (!(peek().kind == token_kind::punct && peek().text == "}")) {
            auto e = parse_edge();
            if (!e) return std::nullopt;
            d.edges.push_back(std::move(*e));
        }
        take();
        return d;
    }

    std::vector<token> toks_;
    std::size_t pos_ = 0;
    std::vector<diagnostic>& diags_;
};

template <typename Decl>
void check_edges(const Decl& d, const std::vector<std::string>& alphabet,
                 std::vector<diagnostic>& diags) {
    std::map<std::string, int> state_index;
    for (std::size_t i = 0; i < d.states.size(); ++i)
        state_index.emplace(d.states[i].first, static_cast<int>(i));

    if (!state_index.count(d.init))
        diags.push_back({"unresolved-state", "unresolved state '" + d.init + "' in init", d.span});

    // per state: which symbols are covered by explicit edges / wildcards
    std::map<std::string, std::map<std::string, int>> covered;   // state -> symbol -> count
    std::map<std::string, int> wildcards;
    for (const auto& e : d.edges) {
        if (!state_index.count(e.from)) {
            diags.push_back({"unresolved-state", "unresolved state '" + e.from + "'", e.span});
            continue;
        }
        if (!state_index.count(e.to))
            diags.push_back({"unresolved-state", "unresolved state '" + e.to + "'", e.span});
        if (e.symbol) {
            if (std::find(alphabet.begin(), alphabet.end(), *e.symbol) == alphabet.end()) {
                diags.push_back({"unknown-symbol",
                                 "symbol '" + *e.symbol + "' is not in the alphabet", e.span});
                continue;
            }
            if (++covered[e.from][*e.symbol] > 1)
                diags.push_back({"duplicate-edge",
                                 "symbol '" + *e.symbol + "' covered twice from state '" +
                                     e.from + "'", e.span});
        } else {
            if (++wildcards[e.from] > 1)
                diags.push_back({"duplicate-edge",
                                 "second wildcard edge from state '" + e.from + "'", e.span});
        }
    }
    // wildcard must cover something; explicit edges plus wildcard must cover all
    for (const auto& e : d.edges) {
        if (e.symbol || !state_index.count(e.from)) continue;
        if (wildcards[e.from] == 1 &&
            covered[e.from].size() == alphabet.size())
            diags.push_back({"duplicate-edge",
                             "wildcard from state '" + e.from + "' covers no symbols", e.span});
    }
    for (const auto& [name, idx] : state_index) {
        (void)idx;
        if (wildcards.count(name)) continue;
        for (const auto& sym : alphabet)
            if (!covered[name].count(sym))
                diags.push_back({"missing-transition",
                                 "state '" + name + "' has no transition on '" + sym + "'",
                                 d.span});
    }
}

inline int symbol_rank(const std::vector<std::string>& alphabet,
                       const std::optional<std::string>& sym) {
    if (!sym) return static_cast<int>(alphabet.size());   // "*" sorts last
    auto it = std::find(alphabet.begin(), alphabet.end(), *sym);
    return static_cast<int>(it - alphabet.begin());
}

template <typename Decl>
void sort_edges(Decl& d, const std::vector<std::string>& alphabet) {
    std::map<std::string, int> state_index;
    for (std::size_t i = 0; i < d.states.size(); ++i)
        state_index.emplace(d.states[i].first, static_cast<int>(i));
    std::stable_sort(d.edges.begin(), d.edges.end(), [&](const edge_decl& a, const edge_decl& b) {
        int sa = state_index.count(a.from) ? state_index[a.from] : -1;
        int sb = state_index.count(b.from) ? state_index[b.from] : -1;
        if (sa != sb) return sa < sb;
        return symbol_rank(alphabet, a.symbol) < symbol_rank(alphabet, b.symbol);
    });
}

} // namespace detail

/// Built-in problems a method declaration may reference without declaring.
inline const std::vector<empirical_problem>& builtin_problems() {
    static const std::vector<empirical_problem> reg{raven_problem(), first_observation_problem()};
    return reg;
}

inline parse_result parse(const std::string& text) {
    parse_result res;
    detail::lexer lex(text);
    auto tokens = lex.run(res.diagnostics);
    if (!res.diagnostics.empty()) return res;

    detail::parser p(std::move(tokens), res.diagnostics);
    auto doc = p.run();
    if (!doc) return res;

    // semantic checks
    std::map<std::string, const problem_decl*> problems;
    std::map<std::string, bool> method_names;
    auto check_distinct = [&](const std::vector<std::string>& names, const std::string& what,
                              const source_span& sp) {
        std::map<std::string, int> seen;
        for (const auto& n : names)
            if (++seen[n] == 2)
                res.diagnostics.push_back({"duplicate-name",
                                           "duplicate " + what + " '" + n + "'", sp});
    };

    for (auto& decl : doc->decls) {
        if (auto* pd = std::get_if<problem_decl>(&decl)) {
            if (problems.count(pd->name))
                res.diagnostics.push_back({"duplicate-name",
                                           "duplicate problem '" + pd->name + "'", pd->span});
            problems[pd->name] = pd;
            check_distinct(pd->alphabet, "symbol", pd->span);
            check_distinct(pd->hypotheses, "hypothesis", pd->span);
            std::vector<std::string> state_names;
            for (const auto& [n, label] : pd->states) {
                state_names.push_back(n);
                if (std::find(pd->hypotheses.begin(), pd->hypotheses.end(), label) ==
                    pd->hypotheses.end())
                    res.diagnostics.push_back({"unknown-label",
                                               "label '" + label + "' is not a declared hypothesis",
                                               pd->span});
            }
            check_distinct(state_names, "state", pd->span);
            detail::check_edges(*pd, pd->alphabet, res.diagnostics);
            detail::sort_edges(*pd, pd->alphabet);
        }
    }
    for (auto& decl : doc->decls) {
        if (auto* md = std::get_if<method_decl>(&decl)) {
            if (method_names.count(md->name))
                res.diagnostics.push_back({"duplicate-name",
                                           "duplicate method '" + md->name + "'", md->span});
            method_names[md->name] = true;

            const std::vector<std::string>* alphabet = nullptr;
            const std::vector<std::string>* hypotheses = nullptr;
            std::vector<std::string> builtin_alpha, builtin_hyps;
            if (auto it = problems.find(md->problem); it != problems.end()) {
                alphabet = &it->second->alphabet;
                hypotheses = &it->second->hypotheses;
            } else {
                for (const auto& bp : builtin_problems())
                    if (bp.name == md->problem) {
                        builtin_alpha = bp.alphabet;
                        for (const auto& h : bp.hypotheses) builtin_hyps.push_back(h.label);
                        alphabet = &builtin_alpha;
                        hypotheses = &builtin_hyps;
                    }
            }
            if (!alphabet) {
                res.diagnostics.push_back({"unresolved-problem",
                                           "method '" + md->name + "' references unknown problem '" +
                                               md->problem + "'", md->span});
                continue;
            }
            std::vector<std::string> state_names;
            for (const auto& [n, outp] : md->states) {
                state_names.push_back(n);
                if (outp != "?" &&
                    std::find(hypotheses->begin(), hypotheses->end(), outp) == hypotheses->end())
                    res.diagnostics.push_back({"unknown-label",
                                               "output '" + outp +
                                                   "' is not a hypothesis of problem '" +
                                                   md->problem + "'", md->span});
            }
            check_distinct(state_names, "state", md->span);
            detail::check_edges(*md, *alphabet, res.diagnostics);
            detail::sort_edges(*md, *alphabet);
        }
    }
    if (res.diagnostics.empty())
        res.doc = std::move(*doc);
    return res;
}

// ---------------------------------------------------------------------------
// Printer. Canonical form: declaration order preserved, edges sorted by
// source state then symbol ("*" last), one edge per line, two-space indent.
// Output reparses to a structurally equal document.

inline std::string print(const document& doc) {
    std::ostringstream os;
    auto join = [](const std::vector<std::string>& v) {
        std::string s;
        for (std::size_t i = 0; i < v.size(); ++i)
            s += (i ? ", " : "") + v[i];
        return s;
    };
    auto states_line = [](const std::vector<std::pair<std::string, std::string>>& v) {
        std::string s;
        for (std::size_t i = 0; i < v.size(); ++i)
            s += (i ? ", " : "") + v[i].first + " [" + v[i].second + "]";
        return s;
    };
    auto edges_block = [&os](const std::vector<edge_decl>& edges) {
        for (const auto& e : edges)
            os << "  " << e.from << " --" << (e.symbol ? *e.symbol : "*") << "--> " << e.to
               << ";\n";
    };
    bool first = true;
    for (const auto& decl : doc.decls) {
        if (!first) os << "\n";
        first = false;
        if (const auto* pd = std::get_if<problem_decl>(&decl)) {
            os << "problem " << pd->name << " {\n";
            os << "  alphabet: " << join(pd->alphabet) << ";\n";
            os << "  hypotheses: " << join(pd->hypotheses) << ";\n";
            os << "  states: " << states_line(pd->states) << ";\n";
            os << "  init: " << pd->init << ";\n";
            edges_block(pd->edges);
            os << "}\n";
        } else {
            const auto& md = std::get<method_decl>(decl);
            os << "method " << md.name << " {\n";
            os << "  problem: " << md.problem << ";\n";
            os << "  states: " << states_line(md.states) << ";\n";
            os << "  init: " << md.init << ";\n";
            edges_block(md.edges);
            os << "}\n";
        }
    }
    return os.str();
}

// ---------------------------------------------------------------------------
// Elaboration into core types. Wildcard edges lower to explicit transitions
// here; the AST keeps them as written.

struct elaborated {
    std::vector<empirical_problem> problems;
    std::vector<inference_method> methods;
};

namespace detail {

template <typename Decl>
std::vector<std::vector<state_id>> lower_edges(const Decl& d,
                                               const std::vector<std::string>& alphabet) {
    std::map<std::string, state_id> state_index;
    for (std::size_t i = 0; i < d.states.size(); ++i)
        state_index.emplace(d.states[i].first, static_cast<state_id>(i));
    std::map<std::string, symbol_id> sym_index;
    for (std::size_t i = 0; i < alphabet.size(); ++i)
        sym_index.emplace(alphabet[i], static_cast<symbol_id>(i));

    std::vector<std::vector<state_id>> next(d.states.size(),
                                            std::vector<state_id>(alphabet.size(), -1));
    for (const auto& e : d.edges) {
        if (!e.symbol) continue;   // wildcards fill the gaps afterwards
        next[state_index.at(e.from)][sym_index.at(*e.symbol)] = state_index.at(e.to);
    }
    for (const auto& e : d.edges) {
        if (e.symbol) continue;
        auto& row = next[state_index.at(e.from)];
        for (auto& cell : row)
            if (cell == -1) cell = state_index.at(e.to);
    }
    return next;
}

} // namespace detail

/// Turns a checked document into core problems and methods. Methods may
/// target problems declared in the same document or built-ins.
inline elaborated elaborate(const document& doc) {
    elaborated out;
    for (const auto& decl : doc.decls) {
        if (const auto* pd = std::get_if<problem_decl>(&decl)) {
            empirical_problem p;
            p.name = pd->name;
            p.alphabet = pd->alphabet;
            for (const auto& h : pd->hypotheses) p.hypotheses.push_back({h, h});
            for (const auto& [n, label] : pd->states) {
                p.truth.state_names.push_back(n);
                p.truth.labels.push_back(*p.hypothesis_index(label));
            }
            for (std::size_t i = 0; i < pd->states.size(); ++i)
                if (pd->states[i].first == pd->init)
                    p.truth.initial = static_cast<state_id>(i);
            p.truth.next = detail::lower_edges(*pd, pd->alphabet);
            out.problems.push_back(std::move(p));
        }
    }
    for (const auto& decl : doc.decls) {
        const auto* md = std::get_if<method_decl>(&decl);
        if (!md) continue;
        const empirical_problem* target = nullptr;
        for (const auto& p : out.problems)
            if (p.name == md->problem) target = &p;
        if (!target)
            for (const auto& p : builtin_problems())
                if (p.name == md->problem) target = &p;
        if (!target)
            throw input_error("unresolved problem '" + md->problem + "'");

        inference_method m;
        m.name = md->name;
        m.problem_name = md->problem;
        for (const auto& [n, outp] : md->states) {
            m.state_names.push_back(n);
            m.outputs.push_back(outp == "?" ? suspend : *target->hypothesis_index(outp));
        }
        for (std::size_t i = 0; i < md->states.size(); ++i)
            if (md->states[i].first == md->init)
                m.initial = static_cast<state_id>(i);
        m.next = detail::lower_edges(*md, target->alphabet);
        out.methods.push_back(std::move(m));
    }
    return out;
}

} // namespace convlab::dsl
