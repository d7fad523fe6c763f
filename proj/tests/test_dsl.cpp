#include "convlab/dsl.hpp"
#include "convlab/rng.hpp"
#include "doc_gen.hpp"

#include <doctest.h>

#include <fstream>
#include <sstream>
#include <string>

using namespace convlab;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE_MESSAGE(in.good(), "cannot open " << path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

std::string fixture(const std::string& name) {
    return std::string(CONVLAB_FIXTURE_DIR) + "/" + name;
}

} // namespace

TEST_CASE("golden fixtures parse cleanly and reprint byte-identically") {
    for (const std::string name : {"raven.cvl", "first_observation.cvl"}) {
        CAPTURE(name);
        std::string text = read_file(fixture(name));
        auto res = dsl::parse(text);
        REQUIRE(res.ok());
        CHECK(dsl::print(*res.doc) == text);
    }
}

TEST_CASE("fixture raven elaborates to the built-in raven problem") {
    auto res = dsl::parse(read_file(fixture("raven.cvl")));
    REQUIRE(res.ok());
    auto elab = dsl::elaborate(*res.doc);
    REQUIRE(elab.problems.size() == 1);
    REQUIRE(elab.methods.size() == 1);

    const auto& p = elab.problems[0];
    auto ref = raven_problem();
    CHECK(p.name == ref.name);
    CHECK(p.alphabet == ref.alphabet);
    CHECK(p.truth.initial == ref.truth.initial);
    CHECK(p.truth.labels == ref.truth.labels);
    CHECK(p.truth.next == ref.truth.next);
    CHECK(validate_problem(p).empty());

    const auto& m = elab.methods[0];
    auto mref = ordinary_induction();
    CHECK(m.outputs == mref.outputs);
    CHECK(m.next == mref.next);
    CHECK(m.initial == mref.initial);
}

TEST_CASE("fixture first_observation elaborates against the built-in registry") {
    auto res = dsl::parse(read_file(fixture("first_observation.cvl")));
    REQUIRE(res.ok());
    auto elab = dsl::elaborate(*res.doc);
    REQUIRE(elab.problems.size() == 1);
    const auto& p = elab.problems[0];
    auto ref = first_observation_problem();
    CHECK(p.truth.next == ref.truth.next);
    CHECK(p.truth.labels == ref.truth.labels);
    REQUIRE(elab.methods.size() == 1);
    CHECK(validate_method(elab.methods[0], p).empty());
}

TEST_CASE("methods may reference built-in problems without declaring them") {
    const std::string src =
        "method lazy {\n"
        "  problem: raven;\n"
        "  states: s0 [?];\n"
        "  init: s0;\n"
        "  s0 --*--> s0;\n"
        "}\n";
    auto res = dsl::parse(src);
    REQUIRE(res.ok());
    auto elab = dsl::elaborate(*res.doc);
    REQUIRE(elab.methods.size() == 1);
    CHECK(elab.methods[0].outputs == std::vector<int>{suspend});
    CHECK(elab.methods[0].next == std::vector<std::vector<state_id>>{{0, 0}});
}

TEST_CASE("parser normalizes edge order to the canonical form") {
    const std::string scrambled =
        "problem raven {\n"
        "  alphabet: black, nonblack;\n"
        "  hypotheses: yes, no;\n"
        "  states: q0 [yes], q1 [no];\n"
        "  init: q0;\n"
        "  q1 --*--> q1;\n"
        "  q0 --nonblack--> q1;\n"
        "  q0 --black--> q0;\n"
        "}\n";
    auto res = dsl::parse(scrambled);
    REQUIRE(res.ok());
    std::string canonical = dsl::print(*res.doc);
    CHECK(canonical !=
          scrambled);   // order actually changed
    auto again = dsl::parse(canonical);
    REQUIRE(again.ok());
    CHECK(dsl::structurally_equal(*res.doc, *again.doc));
    // within q0, black (alphabet position 0) precedes nonblack; "*" sorts last
    auto& pd = std::get<dsl::problem_decl>(res.doc->decls[0]);
    REQUIRE(pd.edges.size() == 3);
    CHECK(pd.edges[0].symbol == std::optional<std::string>("black"));
    CHECK(pd.edges[1].symbol == std::optional<std::string>("nonblack"));
    CHECK(!pd.edges[2].symbol.has_value());
}

TEST_CASE("wildcard edges are preserved in the AST, not expanded") {
    auto res = dsl::parse(read_file(fixture("raven.cvl")));
    REQUIRE(res.ok());
    auto& pd = std::get<dsl::problem_decl>(res.doc->decls[0]);
    int wildcards = 0;
    for (const auto& e : pd.edges)
        if (!e.symbol) ++wildcards;
    CHECK(wildcards == 1);
    CHECK(dsl::print(*res.doc).find("--*-->") != std::string::npos);
}

TEST_CASE("elaboration lowers wildcards to the uncovered symbols only") {
    const std::string src =
        "problem p {\n"
        "  alphabet: a, b, c;\n"
        "  hypotheses: h0, h1;\n"
        "  states: s0 [h0], s1 [h1];\n"
        "  init: s0;\n"
        "  s0 --a--> s1;\n"
        "  s0 --*--> s0;\n"
        "  s1 --*--> s1;\n"
        "}\n";
    auto res = dsl::parse(src);
    REQUIRE(res.ok());
    auto elab = dsl::elaborate(*res.doc);
    REQUIRE(elab.problems.size() == 1);
    // explicit a-edge wins; wildcard fills b and c
    CHECK(elab.problems[0].truth.next[0] == std::vector<state_id>{1, 0, 0});
    CHECK(elab.problems[0].truth.next[1] == std::vector<state_id>{1, 1, 1});
}

TEST_CASE("each negative fixture reports its diagnostic code") {
    const std::pair<const char*, const char*> cases[] = {
        {"negative/bad_parse_error.cvl", "parse-error"},
        {"negative/bad_unknown_symbol.cvl", "unknown-symbol"},
        {"negative/bad_duplicate_edge.cvl", "duplicate-edge"},
        {"negative/bad_missing_transition.cvl", "missing-transition"},
        {"negative/bad_unresolved_state.cvl", "unresolved-state"},
        {"negative/bad_unresolved_problem.cvl", "unresolved-problem"},
        {"negative/bad_duplicate_name.cvl", "duplicate-name"},
        {"negative/bad_unknown_label.cvl", "unknown-label"},
    };
    for (const auto& [file, code] : cases) {
        CAPTURE(file);
        auto res = dsl::parse(read_file(fixture(file)));
        CHECK(!res.ok());
        REQUIRE(!res.diagnostics.empty());
        bool found = false;
        for (const auto& d : res.diagnostics)
            if (d.code == code) found = true;
        CHECK_MESSAGE(found, "expected code " << code << ", got "
                                              << res.diagnostics.front().code << ": "
                                              << res.diagnostics.front().message);
    }
}

TEST_CASE("diagnostics carry usable source positions") {
    auto res = dsl::parse(read_file(fixture("negative/bad_unknown_symbol.cvl")));
    REQUIRE(!res.diagnostics.empty());
    const auto& d = res.diagnostics.front();
    CHECK(d.span.line > 1);      // the bad edge is not on the first line
    CHECK(d.span.column >= 1);
    CHECK(d.span.offset > 0);
}

TEST_CASE("comments and flexible whitespace are accepted") {
    const std::string src =
        "# a raven-style problem\nproblem p { alphabet: a, b; # inline\n"
        "hypotheses: h0, h1; states: s0 [h0]; init: s0; s0 --*--> s0; }";
    auto res = dsl::parse(src);
    REQUIRE(res.ok());
}

TEST_CASE("random documents survive print/parse round trips") {
    split_mix64 rng(derive_seed(0x9e3779b97f4a7c15ULL, 71));
    for (int trial = 0; trial < 500; ++trial) {
        CAPTURE(trial);
        auto doc = testgen::random_document(rng);
        std::string text = dsl::print(doc);
        auto res = dsl::parse(text);
        REQUIRE_MESSAGE(res.ok(), "trial " << trial << ": "
                                           << (res.diagnostics.empty()
                                                   ? "no doc"
                                                   : res.diagnostics.front().message));
        CHECK(dsl::structurally_equal(doc, *res.doc));
        CHECK(dsl::print(*res.doc) == text);   // printer is idempotent
        auto elab = dsl::elaborate(*res.doc);
        for (const auto& p : elab.problems)
            for (const auto& row : p.truth.next)
                for (state_id t : row) CHECK(t >= 0);
    }
}
