#pragma once

#include "convlab/problem.hpp"

#include <set>
#include <string>
#include <vector>

namespace convlab {

/// A method output is either a hypothesis index of the target problem or
/// judgment suspension ("?").
inline constexpr int suspend = -1;
using method_output = int;

inline bool is_hypothesis(method_output o) { return o >= 0; }

/// Finite-state transducer from evidence sequences to outputs. The output at
/// evidence e is the output attached to the state reached after reading e;
/// the output at the root is the output of the initial state.
struct inference_method {
    std::string name;
    std::string problem_name;
    state_id initial = 0;
    std::vector<std::string> state_names;
    std::vector<method_output> outputs;          // per state
    std::vector<std::vector<state_id>> next;     // [state][symbol]

    int num_states() const { return static_cast<int>(state_names.size()); }
};

struct method_violation {
    std::string code;
    std::string message;
};

inline std::vector<method_violation> validate_method(const inference_method& m,
                                                     const empirical_problem& p) {
    std::vector<method_violation> out;
    const int n = m.num_states();
    const int k = static_cast<int>(p.alphabet.size());
    if (n == 0 || m.initial < 0 || m.initial >= n) {
        out.push_back({"bad-transition", "missing or out-of-range initial state"});
        return out;
    }
    for (state_id s = 0; s < n; ++s) {
        if (static_cast<int>(m.next[s].size()) != k) {
            out.push_back({"bad-transition",
                           "state '" + m.state_names[s] + "' does not cover the whole alphabet"});
            continue;
        }
        for (symbol_id x = 0; x < k; ++x)
            if (m.next[s][x] < 0 || m.next[s][x] >= n)
                out.push_back({"bad-transition",
                               "state '" + m.state_names[s] + "' has an out-of-range successor"});
        if (m.outputs[s] != suspend &&
            (m.outputs[s] < 0 || m.outputs[s] >= static_cast<int>(p.hypotheses.size())))
            out.push_back({"bad-output",
                           "state '" + m.state_names[s] + "' outputs an undeclared hypothesis"});
    }
    if (!out.empty()) return out;

    std::vector<bool> seen(n, false);
    std::vector<state_id> queue{m.initial};
    seen[m.initial] = true;
    while (!queue.empty()) {
        state_id v = queue.back();
        queue.pop_back();
        for (state_id w : m.next[v])
            if (!seen[w]) {
                seen[w] = true;
                queue.push_back(w);
            }
    }
    for (state_id s = 0; s < n; ++s)
        if (!seen[s])
            out.push_back({"unreachable-state",
                           "state '" + m.state_names[s] + "' is unreachable"});
    return out;
}

inline method_output apply(const inference_method& m, const empirical_problem& p,
                           const evidence_sequence& e) {
    state_id s = m.initial;
    for (symbol_id x : e) {
        if (x < 0 || x >= static_cast<int>(p.alphabet.size()))
            throw input_error("symbol outside the problem alphabet");
        s = m.next[s][x];
    }
    return m.outputs[s];
}

// ---------------------------------------------------------------------------
// Built-in methods for the raven problem (alphabet black/nonblack,
// hypotheses yes/no).

/// Conjecture "yes" until a counterexample appears, "no" forever after.
inline inference_method ordinary_induction() {
    inference_method m;
    m.name = "ordinary_induction";
    m.problem_name = "raven";
    m.initial = 0;
    m.state_names = {"s0", "s1"};
    m.outputs = {0, 1};
    m.next = {{0, 1}, {1, 1}};
    return m;
}

/// Always suspends judgment.
inline inference_method skeptic() {
    inference_method m;
    m.name = "skeptic";
    m.problem_name = "raven";
    m.initial = 0;
    m.state_names = {"s0"};
    m.outputs = {suspend};
    m.next = {{0, 0}};
    return m;
}

/// On all-black evidence of a length in flip_depths, output "no" against the
/// run of uniform experience; on other all-black evidence output "yes";
/// after a counterexample output "no" forever. Counting states c0..c(d*+1)
/// track the all-black length, with c(d*+1) absorbing past the last flip.
inline inference_method occasional_counterinduction(const std::set<int>& flip_depths) {
    if (flip_depths.empty())
        throw input_error("flip_depths must be nonempty");
    for (int d : flip_depths)
        if (d < 0) throw input_error("flip depths must be nonnegative");
    const int dmax = *flip_depths.rbegin();
    inference_method m;
    m.name = "occasional_counterinduction";
    m.problem_name = "raven";
    m.initial = 0;
    const int dead = dmax + 2;                  // after a counterexample
    for (int i = 0; i <= dmax + 1; ++i) {
        m.state_names.push_back("c" + std::to_string(i));
        m.outputs.push_back(flip_depths.count(i) ? 1 : 0);
        int on_black = (i <= dmax) ? i + 1 : i;
        m.next.push_back({on_black, dead});
    }
    m.state_names.push_back("dead");
    m.outputs.push_back(1);
    m.next.push_back({dead, dead});
    return m;
}

/// Suspend on the first k observations (absent a counterexample), then
/// behave as ordinary induction; "no" forever after a counterexample.
inline inference_method delayed_induction(int k) {
    if (k < 0) throw input_error("delay must be nonnegative");
    inference_method m;
    m.name = "delayed_induction";
    m.problem_name = "raven";
    m.initial = 0;
    const int yes_state = k;
    const int dead = k + 1;
    for (int i = 0; i < k; ++i) {
        m.state_names.push_back("w" + std::to_string(i));
        m.outputs.push_back(suspend);
        m.next.push_back({i + 1, dead});
    }
    m.state_names.push_back("yes");
    m.outputs.push_back(0);
    m.next.push_back({yes_state, dead});
    m.state_names.push_back("dead");
    m.outputs.push_back(1);
    m.next.push_back({dead, dead});
    return m;
}

// ---------------------------------------------------------------------------
// Counterinduction detection

/// A node counts as counterinductive when the truth-state reached by the
/// evidence sits in a cyclic SCC labeled h (uniform experience so far could
/// continue forever and make h true) and the method outputs a different,
/// still-possible hypothesis there.
struct counterinduction_scan {
    std::vector<evidence_sequence> nodes;   // all offending nodes up to the depth bound
    /// True when no reachable (method-state, truth-state) pair is
    /// counterinductive, which decides emptiness at every depth: the set of
    /// reachable pairs is finite and evidence beyond the bound revisits them.
    bool empty_certified = false;
    std::vector<std::pair<state_id, state_id>> offending_pairs;
};

inline counterinduction_scan counterinductive_nodes(const inference_method& m,
                                                    const empirical_problem& p,
                                                    int depth_bound) {
    if (depth_bound < 0) throw input_error("depth bound must be nonnegative");
    const int k = static_cast<int>(p.alphabet.size());
    const auto& a = p.truth;
    auto sccs = compute_sccs(a);

    // Per truth-state: set of still-possible truths, as a bitmask.
    std::vector<unsigned> possible(a.num_states(), 0);
    for (state_id q = 0; q < a.num_states(); ++q)
        for (hypothesis_id h : possible_truths_from(p, q))
            possible[q] |= 1u << h;

    auto offending = [&](state_id ms, state_id qs) {
        if (!sccs.cyclic[sccs.component[qs]]) return false;
        hypothesis_id h = a.labels[qs];
        method_output o = m.outputs[ms];
        return is_hypothesis(o) && o != h && (possible[qs] & (1u << o)) != 0;
    };

    counterinduction_scan out;

    // Exact emptiness: scan every reachable product pair.
    std::vector<bool> seen(static_cast<std::size_t>(m.num_states()) * a.num_states(), false);
    std::vector<std::pair<state_id, state_id>> queue{{m.initial, a.initial}};
    seen[static_cast<std::size_t>(m.initial) * a.num_states() + a.initial] = true;
    bool any_offending = false;
    while (!queue.empty()) {
        auto [ms, qs] = queue.back();
        queue.pop_back();
        if (offending(ms, qs)) {
            any_offending = true;
            out.offending_pairs.emplace_back(ms, qs);
        }
        for (symbol_id x = 0; x < k; ++x) {
            state_id mn = m.next[ms][x], qn = a.next[qs][x];
            std::size_t idx = static_cast<std::size_t>(mn) * a.num_states() + qn;
            if (!seen[idx]) {
                seen[idx] = true;
                queue.emplace_back(mn, qn);
            }
        }
    }
    out.empty_certified = !any_offending;

    // Enumerate offending evidence sequences up to the bound (BFS by depth).
    struct node { evidence_sequence e; state_id ms, qs; };
    std::vector<node> layer{{{}, m.initial, a.initial}};
    for (int depth = 0; depth <= depth_bound; ++depth) {
        for (const node& nd : layer)
            if (offending(nd.ms, nd.qs))
                out.nodes.push_back(nd.e);
        if (depth == depth_bound) break;
        std::vector<node> next_layer;
        next_layer.reserve(layer.size() * k);
        for (const node& nd : layer)
            for (symbol_id x = 0; x < k; ++x) {
                node nx{nd.e, m.next[nd.ms][x], a.next[nd.qs][x]};
                nx.e.push_back(x);
                next_layer.push_back(std::move(nx));
            }
        layer = std::move(next_layer);
    }
    return out;
}

} // namespace convlab
