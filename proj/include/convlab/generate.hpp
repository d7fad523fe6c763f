#pragma once

#include "convlab/convergence.hpp"
#include "convlab/method.hpp"
#include "convlab/problem.hpp"
#include "convlab/rng.hpp"

#include <string>
#include <vector>

namespace convlab {

/// Uniformly random transducer over the problem's alphabet with at most
/// max_states states, restricted to its reachable part so it validates.
/// Outputs are drawn from the problem's hypotheses plus suspension.
inline inference_method random_method(split_mix64& rng, const empirical_problem& p,
                                      int max_states) {
    const int k = static_cast<int>(p.alphabet.size());
    const int nh = static_cast<int>(p.hypotheses.size());
    const int n = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(max_states)));

    std::vector<std::vector<state_id>> next(n, std::vector<state_id>(k));
    std::vector<method_output> outputs(n);
    for (int s = 0; s < n; ++s) {
        for (int x = 0; x < k; ++x)
            next[s][x] = static_cast<state_id>(rng.below(n));
        int o = static_cast<int>(rng.below(nh + 1));
        outputs[s] = o == nh ? suspend : o;
    }

    // keep only states reachable from 0
    std::vector<int> renumber(n, -1), order;
    renumber[0] = 0;
    order.push_back(0);
    for (std::size_t head = 0; head < order.size(); ++head)
        for (int x = 0; x < k; ++x) {
            int w = next[order[head]][x];
            if (renumber[w] == -1) {
                renumber[w] = static_cast<int>(order.size());
                order.push_back(w);
            }
        }

    inference_method m;
    m.name = "random";
    m.problem_name = p.name;
    m.initial = 0;
    for (std::size_t i = 0; i < order.size(); ++i) {
        m.state_names.push_back("r" + std::to_string(i));
        m.outputs.push_back(outputs[order[i]]);
        std::vector<state_id> row(k);
        for (int x = 0; x < k; ++x)
            row[x] = renumber[next[order[i]][x]];
        m.next.push_back(std::move(row));
    }
    return m;
}

/// Random valid empirical problem: random total transition structure, then
/// labels assigned per SCC so well-posedness holds by construction.
inline empirical_problem random_problem(split_mix64& rng, int max_states,
                                        int alphabet_size = 2, int num_hypotheses = 2) {
    const int n = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(max_states)));
    std::vector<std::vector<state_id>> next(n, std::vector<state_id>(alphabet_size));
    for (int s = 0; s < n; ++s)
        for (int x = 0; x < alphabet_size; ++x)
            next[s][x] = static_cast<state_id>(rng.below(n));

    std::vector<int> renumber(n, -1), order;
    renumber[0] = 0;
    order.push_back(0);
    for (std::size_t head = 0; head < order.size(); ++head)
        for (int x = 0; x < alphabet_size; ++x) {
            int w = next[order[head]][x];
            if (renumber[w] == -1) {
                renumber[w] = static_cast<int>(order.size());
                order.push_back(w);
            }
        }

    empirical_problem p;
    p.name = "random_problem";
    for (int x = 0; x < alphabet_size; ++x)
        p.alphabet.push_back(std::string(1, static_cast<char>('a' + x)));
    for (int h = 0; h < num_hypotheses; ++h)
        p.hypotheses.push_back({"h" + std::to_string(h), "hypothesis " + std::to_string(h)});
    p.truth.initial = 0;
    for (std::size_t i = 0; i < order.size(); ++i) {
        p.truth.state_names.push_back("q" + std::to_string(i));
        std::vector<state_id> row(alphabet_size);
        for (int x = 0; x < alphabet_size; ++x)
            row[x] = renumber[next[order[i]][x]];
        p.truth.next.push_back(std::move(row));
        p.truth.labels.push_back(0);   // set below, per SCC
    }
    auto sccs = compute_sccs(p.truth);
    std::vector<hypothesis_id> scc_label(sccs.count);
    for (int c = 0; c < sccs.count; ++c)
        scc_label[c] = static_cast<hypothesis_id>(rng.below(num_hypotheses));
    for (int s = 0; s < p.truth.num_states(); ++s)
        p.truth.labels[s] = scc_label[sccs.component[s]];
    return p;
}

/// Replication of the ruling-out direction of the raven theorem: a method
/// that passes stable pointwise convergence never has a counterinductive
/// node. Runs seeded random methods and reports any counterexample found
/// (expected: none).
struct theorem_test_report {
    int trials = 0;
    int antecedent_true = 0;   // methods that passed stable pointwise
    std::vector<inference_method> counterexamples;
    std::uint64_t seed = 0;
};

inline theorem_test_report theorem_property_test(int trials, std::uint64_t seed,
                                                 int max_states = 5) {
    theorem_test_report rep;
    rep.trials = trials;
    rep.seed = seed;
    empirical_problem raven = raven_problem();
    for (int i = 0; i < trials; ++i) {
        split_mix64 rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
        inference_method m = random_method(rng, raven, max_states);
        if (!check_stable_pointwise(m, raven).pass) continue;
        ++rep.antecedent_true;
        if (!counterinductive_nodes(m, raven, 0).empty_certified)
            rep.counterexamples.push_back(m);
    }
    return rep;
}

} // namespace convlab
