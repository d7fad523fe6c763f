#include "convlab/generate.hpp"
#include "convlab/method.hpp"
#include "convlab/rng.hpp"

#include <doctest.h>

using namespace convlab;

namespace {
const symbol_id B = 0;
const symbol_id N = 1;
evidence_sequence seq(std::initializer_list<symbol_id> xs) { return evidence_sequence(xs); }
} // namespace

TEST_CASE("ordinary induction outputs match the yes-until-counterexample rule") {
    auto p = raven_problem();
    auto m = ordinary_induction();
    CHECK(validate_method(m, p).empty());
    CHECK(apply(m, p, {}) == 0);
    CHECK(apply(m, p, seq({B, N})) == 1);
    CHECK(apply(m, p, seq({B, B, B})) == 0);
    CHECK(apply(m, p, seq({N, B})) == 1);

    // exhaustive to depth 12: output is "no" iff the evidence contains a
    // nonblack observation
    for (int len = 0; len <= 12; ++len) {
        evidence_sequence e(len, B);
        while (true) {
            bool has_cx = false;
            for (symbol_id x : e) has_cx = has_cx || x == N;
            CHECK(apply(m, p, e) == (has_cx ? 1 : 0));
            int i = len - 1;
            while (i >= 0 && ++e[i] == 2) e[i--] = B;
            if (i < 0) break;
        }
    }
}

TEST_CASE("skeptic always suspends") {
    auto p = raven_problem();
    auto m = skeptic();
    CHECK(validate_method(m, p).empty());
    CHECK(apply(m, p, {}) == suspend);
    CHECK(apply(m, p, seq({N, B, N})) == suspend);
}

TEST_CASE("occasional counterinduction flips exactly at the given depths") {
    auto p = raven_problem();
    auto m = occasional_counterinduction({2});
    CHECK(validate_method(m, p).empty());
    CHECK(apply(m, p, seq({B, B})) == 1);
    CHECK(apply(m, p, seq({B, B, B})) == 0);
    CHECK(apply(m, p, seq({B})) == 0);
    CHECK(apply(m, p, {}) == 0);
    CHECK(apply(m, p, seq({B, N})) == 1);
    CHECK(apply(m, p, seq({B, N, B})) == 1);

    auto m13 = occasional_counterinduction({1, 3});
    CHECK(apply(m13, p, seq({B})) == 1);
    CHECK(apply(m13, p, seq({B, B})) == 0);
    CHECK(apply(m13, p, seq({B, B, B})) == 1);
    CHECK(apply(m13, p, seq({B, B, B, B})) == 0);

    CHECK_THROWS_AS(occasional_counterinduction({}), input_error);
}

TEST_CASE("delayed induction suspends through the delay") {
    auto p = raven_problem();
    auto m = delayed_induction(2);
    CHECK(validate_method(m, p).empty());
    CHECK(apply(m, p, seq({B})) == suspend);
    CHECK(apply(m, p, seq({B, B})) == 0);
    CHECK(apply(m, p, seq({B, B, B})) == 0);
    CHECK(apply(m, p, seq({N})) == 1);
    CHECK(apply(m, p, seq({B, N, B})) == 1);
}

TEST_CASE("apply is a function of the evidence alone") {
    auto p = raven_problem();
    auto m = occasional_counterinduction({1, 3});
    evidence_sequence e = seq({B, B, N, B});
    auto first = apply(m, p, e);
    apply(m, p, seq({N}));
    apply(m, p, {});
    CHECK(apply(m, p, e) == first);
}

TEST_CASE("built-in constructors produce valid transducers") {
    auto p = raven_problem();
    CHECK(validate_method(ordinary_induction(), p).empty());
    CHECK(validate_method(skeptic(), p).empty());
    CHECK(validate_method(occasional_counterinduction({0, 2, 5}), p).empty());
    CHECK(validate_method(delayed_induction(0), p).empty());
    CHECK(validate_method(delayed_induction(7), p).empty());
}

TEST_CASE("counterinductive node detection") {
    auto p = raven_problem();

    auto oi = counterinductive_nodes(ordinary_induction(), p, 10);
    CHECK(oi.nodes.empty());
    CHECK(oi.empty_certified);

    auto oc = counterinductive_nodes(occasional_counterinduction({2}), p, 10);
    CHECK(!oc.empty_certified);
    REQUIRE(oc.nodes.size() == 1);
    CHECK(oc.nodes[0] == seq({B, B}));

    auto sk = counterinductive_nodes(skeptic(), p, 10);
    CHECK(sk.nodes.empty());
    CHECK(sk.empty_certified);
}

TEST_CASE("certified emptiness is stable under doubling the depth bound") {
    auto p = raven_problem();
    split_mix64 rng(17);
    for (int trial = 0; trial < 100; ++trial) {
        auto m = random_method(rng, p, 5);
        auto scan = counterinductive_nodes(m, p, 6);
        auto deeper = counterinductive_nodes(m, p, 12);
        if (scan.empty_certified) {
            CHECK(scan.nodes.empty());
            CHECK(deeper.nodes.empty());
        }
        CHECK(scan.empty_certified == deeper.empty_certified);
        CHECK(scan.empty_certified == (deeper.nodes.empty() && scan.nodes.empty()));
    }
}
