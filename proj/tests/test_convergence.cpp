#include "convlab/convergence.hpp"
#include "convlab/generate.hpp"
#include "convlab/oracle.hpp"

#include <doctest.h>

using namespace convlab;

namespace {
const symbol_id B = 0;
const symbol_id N = 1;

/// Replays a fail witness: the violating pattern must be visible at the
/// reported indices through apply() and truth_of_world() alone.
void check_witness_replays(const convergence_verdict& v, const inference_method& m,
                           const empirical_problem& p) {
    REQUIRE(v.witness);
    REQUIRE(v.witness_times);
    const auto& w = *v.witness;
    hypothesis_id truth = truth_of_world(p, w);
    auto evidence_at = [&](int len) {
        evidence_sequence e;
        for (int t = 0; t < len; ++t) e.push_back(w.at(t));
        return e;
    };
    auto [i, j] = *v.witness_times;
    if (v.mode == "pointwise" || v.mode == "uniform") {
        CHECK(apply(m, p, evidence_at(i)) != truth);
    } else if (v.mode == "stability" || v.mode == "stable_pointwise") {
        method_output at_i = apply(m, p, evidence_at(i));
        method_output at_j = apply(m, p, evidence_at(j));
        // either a recurring-error witness (pointwise side) or a hold-then-drop
        if (at_i == truth) {
            CHECK(j > i);
            CHECK(at_j != truth);
        } else {
            CHECK(at_i != truth);
        }
    }
}
} // namespace

TEST_CASE("raven case study verdicts") {
    auto p = raven_problem();
    auto oi = ordinary_induction();
    auto sk = skeptic();
    auto oc = occasional_counterinduction({2});

    CHECK(check_pointwise(oi, p).pass);
    CHECK(check_stability(oi, p).pass);
    CHECK(check_stable_pointwise(oi, p).pass);
    CHECK_FALSE(check_uniform(oi, p).pass);

    auto sk_pw = check_pointwise(sk, p);
    CHECK_FALSE(sk_pw.pass);
    check_witness_replays(sk_pw, sk, p);
    // the all-black world is the natural witness: suspension recurs forever
    CHECK(truth_of_world(p, *sk_pw.witness) == 0);
    CHECK(check_stability(sk, p).pass);   // vacuous: never outputs any truth
    CHECK_FALSE(check_uniform(sk, p).pass);

    CHECK(check_pointwise(oc, p).pass);   // errors only at finitely many depths
    auto oc_st = check_stability(oc, p);
    CHECK_FALSE(oc_st.pass);
    check_witness_replays(oc_st, oc, p);
    CHECK_FALSE(check_stable_pointwise(oc, p).pass);
    CHECK_FALSE(check_uniform(oc, p).pass);

    CHECK(check_stable_pointwise(delayed_induction(3), p).pass);
}

TEST_CASE("stability witness for occasional counterinduction holds then drops the truth") {
    auto p = raven_problem();
    auto oc = occasional_counterinduction({2});
    auto v = check_stability(oc, p);
    REQUIRE_FALSE(v.pass);
    const auto& w = *v.witness;
    hypothesis_id truth = truth_of_world(p, w);
    auto [i, j] = *v.witness_times;
    evidence_sequence ei, ej;
    for (int t = 0; t < i; ++t) ei.push_back(w.at(t));
    for (int t = 0; t < j; ++t) ej.push_back(w.at(t));
    CHECK(apply(oc, p, ei) == truth);
    CHECK(apply(oc, p, ej) != truth);
    CHECK(j > i);
}

TEST_CASE("uniform convergence is achievable on the first-observation problem") {
    auto p = first_observation_problem();
    auto copycat = canonical_induction(p);
    auto v = check_uniform(copycat, p);
    CHECK(v.pass);
    REQUIRE(v.modulus);
    CHECK(*v.modulus == 1);
}

TEST_CASE("brute-force oracle on the named methods") {
    auto p = raven_problem();

    auto oi = brute_force_oracle(ordinary_induction(), p, 8, 2);
    CHECK(oi.violations.empty() == false);   // uniform violation is real
    CHECK_FALSE(oi.has("pointwise"));
    CHECK_FALSE(oi.has("stability"));
    CHECK(oi.has("uniform"));

    auto oc = brute_force_oracle(occasional_counterinduction({2}), p, 8, 2);
    CHECK(oc.has("stability"));
    CHECK_FALSE(oc.has("pointwise"));

    auto sk = brute_force_oracle(skeptic(), p, 8, 2);
    CHECK(sk.has("pointwise"));
    CHECK(sk.has("uniform"));
    CHECK_FALSE(sk.has("stability"));
}

TEST_CASE("exact checkers and oracle agree on random method/problem pairs") {
    split_mix64 rng(2024);
    for (int trial = 0; trial < 120; ++trial) {
        auto p = random_problem(rng, 4);
        auto m = random_method(rng, p, 4);
        auto pw = check_pointwise(m, p);
        auto st = check_stability(m, p);
        auto un = check_uniform(m, p);
        auto oracle = brute_force_oracle(m, p, 8, 3);

        // soundness: the oracle never reports a violation of a passing mode
        if (pw.pass) CHECK_FALSE(oracle.has("pointwise"));
        if (st.pass) CHECK_FALSE(oracle.has("stability"));
        if (un.pass) CHECK_FALSE(oracle.has("uniform"));

        // every exact-fail witness replays as a real violation
        if (!pw.pass) {
            check_witness_replays(pw, m, p);
            auto run = simulate_world(m, p, *pw.witness);
            CHECK(run.recurrent_error);
        }
        if (!st.pass) {
            auto run = simulate_world(m, p, *st.witness);
            CHECK(run.stability_violation.has_value());
        }
        if (!un.pass) {
            check_witness_replays(un, m, p);
        }
    }
}

TEST_CASE("hierarchy is monotone: uniform implies stable pointwise implies pointwise") {
    split_mix64 rng(555);
    for (int trial = 0; trial < 200; ++trial) {
        auto p = random_problem(rng, 4);
        auto m = random_method(rng, p, 4);
        bool un = check_uniform(m, p).pass;
        bool sp = check_stable_pointwise(m, p).pass;
        bool pw = check_pointwise(m, p).pass;
        if (un) CHECK(sp);
        if (sp) CHECK(pw);
    }
}

TEST_CASE("no generated method achieves uniform convergence on the raven problem") {
    auto p = raven_problem();
    split_mix64 rng(31);
    for (int trial = 0; trial < 300; ++trial) {
        auto m = random_method(rng, p, 5);
        CHECK_FALSE(check_uniform(m, p).pass);
    }
}

TEST_CASE("canonical induction") {
    auto raven = raven_problem();
    auto canon = canonical_induction(raven);
    auto oi = ordinary_induction();

    // identical output tables to depth 12
    evidence_sequence e;
    for (int len = 0; len <= 12; ++len) {
        e.assign(len, B);
        while (true) {
            CHECK(apply(canon, raven, e) == apply(oi, raven, e));
            int i = len - 1;
            while (i >= 0 && ++e[i] == 2) e[i--] = B;
            if (i < 0) break;
        }
    }
    CHECK(check_stable_pointwise(canon, raven).pass);

    // canonical induction converges pointwise on every valid finite problem
    split_mix64 rng(77);
    for (int trial = 0; trial < 150; ++trial) {
        auto p = random_problem(rng, 5);
        CHECK(check_pointwise(canonical_induction(p), p).pass);
    }
}

TEST_CASE("achievability reports") {
    auto raven = raven_problem();
    auto rep = achievability(raven);
    REQUIRE(rep.modes.size() == 3);
    CHECK(rep.modes[0].mode == "uniform");
    CHECK(rep.modes[0].status == "unachievable");
    CHECK(rep.modes[0].certificate.find("q0") != std::string::npos);
    CHECK(rep.modes[1].mode == "stable_pointwise");
    CHECK(rep.modes[1].status == "achievable");
    CHECK(rep.modes[2].status == "achievable");
    CHECK(rep.highest == "stable_pointwise");

    auto fo = first_observation_problem();
    auto rep2 = achievability(fo);
    CHECK(rep2.highest == "uniform");
    REQUIRE(rep2.modes[0].modulus);
    CHECK(*rep2.modes[0].modulus == 1);

    // monotone structure of the report
    split_mix64 rng(404);
    for (int trial = 0; trial < 60; ++trial) {
        auto p = random_problem(rng, 4);
        auto r = achievability(p);
        bool u = r.modes[0].status == "achievable";
        bool s = r.modes[1].status == "achievable";
        bool w = r.modes[2].status == "achievable";
        if (u) CHECK(s);
        if (s) CHECK(w);
    }
}

TEST_CASE("theorem property test finds no counterexamples (small run)") {
    auto rep = theorem_property_test(500, 42);
    CHECK(rep.trials == 500);
    CHECK(rep.counterexamples.empty());
    CHECK(rep.antecedent_true > 0);

    // ordinary induction: antecedent true, consequent holds
    auto p = raven_problem();
    CHECK(check_stable_pointwise(ordinary_induction(), p).pass);
    CHECK(counterinductive_nodes(ordinary_induction(), p, 0).empty_certified);
    // skeptic: antecedent false, implication vacuous
    CHECK(counterinductive_nodes(skeptic(), p, 0).empty_certified);
}
