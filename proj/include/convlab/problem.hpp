#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace convlab {

/// Symbols, states and hypotheses are indices into the owning problem's
/// name tables. Keeping them as plain ints makes product constructions and
/// transition tables cheap; names are only consulted at the I/O boundary.
using symbol_id = int;
using state_id = int;
using hypothesis_id = int;

struct hypothesis {
    std::string label;
    std::string display;

    friend bool operator==(const hypothesis&, const hypothesis&) = default;
};

using evidence_sequence = std::vector<symbol_id>;

/// An infinite evidence branch represented finitely: prefix followed by the
/// cycle repeated forever. The cycle must be nonempty.
struct ultimately_periodic_world {
    evidence_sequence prefix;
    evidence_sequence cycle;

    symbol_id at(std::size_t t) const {
        if (t < prefix.size())
            return prefix[t];
        return cycle[(t - prefix.size()) % cycle.size()];
    }

    friend bool operator==(const ultimately_periodic_world&,
                           const ultimately_periodic_world&) = default;
};

/// Deterministic, total automaton whose state labels determine the truth of
/// every infinite branch: a run is eventually trapped in one strongly
/// connected component, and well-posedness forces all states of that
/// component to share a label.
struct truth_automaton {
    state_id initial = 0;
    std::vector<std::string> state_names;
    std::vector<hypothesis_id> labels;           // per state
    std::vector<std::vector<state_id>> next;     // [state][symbol]

    int num_states() const { return static_cast<int>(state_names.size()); }
};

struct empirical_problem {
    std::string name;
    std::vector<std::string> alphabet;
    std::vector<hypothesis> hypotheses;
    truth_automaton truth;

    std::optional<symbol_id> symbol_index(const std::string& s) const {
        auto it = std::find(alphabet.begin(), alphabet.end(), s);
        if (it == alphabet.end()) return std::nullopt;
        return static_cast<symbol_id>(it - alphabet.begin());
    }

    std::optional<hypothesis_id> hypothesis_index(const std::string& label) const {
        for (std::size_t i = 0; i < hypotheses.size(); ++i)
            if (hypotheses[i].label == label) return static_cast<hypothesis_id>(i);
        return std::nullopt;
    }
};

struct input_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Strongly connected components (Tarjan, iterative).

struct scc_info {
    std::vector<int> component;   // state -> scc id, in reverse topological order of discovery
    int count = 0;
    std::vector<bool> cyclic;     // scc id -> contains a cycle (size > 1 or a self-loop)
};

/// Generic Tarjan over a graph given as an out-edge callback. Implemented
/// iteratively so deep products cannot overflow the stack.
inline scc_info compute_sccs(int n, const std::function<void(int, const std::function<void(int)>&)>& for_each_edge) {
    scc_info out;
    out.component.assign(n, -1);
    std::vector<int> index(n, -1), lowlink(n, 0), stack;
    std::vector<bool> on_stack(n, false);
    int next_index = 0;

    std::vector<std::vector<int>> adj(n);
    for (int v = 0; v < n; ++v)
        for_each_edge(v, [&](int w) { adj[v].push_back(w); });

    struct frame { int v; std::size_t edge; };
    for (int root = 0; root < n; ++root) {
        if (index[root] != -1) continue;
        std::vector<frame> frames{{root, 0}};
        index[root] = lowlink[root] = next_index++;
        stack.push_back(root);
        on_stack[root] = true;
        while (!frames.empty()) {
            frame& f = frames.back();
            if (f.edge < adj[f.v].size()) {
                int w = adj[f.v][f.edge++];
                if (index[w] == -1) {
                    index[w] = lowlink[w] = next_index++;
                    stack.push_back(w);
                    on_stack[w] = true;
                    frames.push_back({w, 0});
                } else if (on_stack[w]) {
                    lowlink[f.v] = std::min(lowlink[f.v], index[w]);
                }
            } else {
                int v = f.v;
                if (lowlink[v] == index[v]) {
                    int id = out.count++;
                    int size = 0;
                    while (true) {
                        int w = stack.back();
                        stack.pop_back();
                        on_stack[w] = false;
                        out.component[w] = id;
                        ++size;
                        if (w == v) break;
                    }
                    // size>1 components always contain a cycle; singletons only
                    // if the lone member has a self-loop.
                    bool cyc = size > 1;
                    if (!cyc)
                        for (int w : adj[v])
                            if (w == v) cyc = true;
                    out.cyclic.push_back(cyc);
                }
                frames.pop_back();
                if (!frames.empty())
                    lowlink[frames.back().v] = std::min(lowlink[frames.back().v], lowlink[v]);
            }
        }
    }
    return out;
}

inline scc_info compute_sccs(const truth_automaton& a) {
    return compute_sccs(a.num_states(), [&](int v, const std::function<void(int)>& emit) {
        for (state_id w : a.next[v]) emit(w);
    });
}

// ---------------------------------------------------------------------------
// Validation

struct problem_violation {
    std::string code;     // "mixed-scc", "unreachable-state", "bad-transition", "bad-label"
    std::string message;
    std::vector<state_id> states;
};

inline std::vector<bool> reachable_states(const truth_automaton& a) {
    std::vector<bool> seen(a.num_states(), false);
    std::vector<state_id> queue{a.initial};
    seen[a.initial] = true;
    while (!queue.empty()) {
        state_id v = queue.back();
        queue.pop_back();
        for (state_id w : a.next[v]) {
            if (w >= 0 && w < a.num_states() && !seen[w]) {
                seen[w] = true;
                queue.push_back(w);
            }
        }
    }
    return seen;
}

inline std::vector<problem_violation> validate_problem(const empirical_problem& p) {
    std::vector<problem_violation> out;
    const auto& a = p.truth;
    const int n = a.num_states();
    const int k = static_cast<int>(p.alphabet.size());

    if (n == 0 || a.initial < 0 || a.initial >= n) {
        out.push_back({"bad-transition", "missing or out-of-range initial state", {}});
        return out;
    }
    for (state_id s = 0; s < n; ++s) {
        if (static_cast<int>(a.next[s].size()) != k) {
            out.push_back({"bad-transition",
                           "state '" + a.state_names[s] + "' does not cover the whole alphabet",
                           {s}});
            continue;
        }
        for (symbol_id x = 0; x < k; ++x)
            if (a.next[s][x] < 0 || a.next[s][x] >= n)
                out.push_back({"bad-transition",
                               "state '" + a.state_names[s] + "' has an out-of-range successor",
                               {s}});
        if (a.labels[s] < 0 || a.labels[s] >= static_cast<int>(p.hypotheses.size()))
            out.push_back({"bad-label",
                           "state '" + a.state_names[s] + "' is labeled with an undeclared hypothesis",
                           {s}});
    }
    if (!out.empty()) return out;   // structural defects make the graph checks meaningless

    auto seen = reachable_states(a);
    for (state_id s = 0; s < n; ++s)
        if (!seen[s])
            out.push_back({"unreachable-state",
                           "state '" + a.state_names[s] + "' is unreachable from the initial state",
                           {s}});

    auto sccs = compute_sccs(a);
    for (int c = 0; c < sccs.count; ++c) {
        std::set<hypothesis_id> labels;
        std::vector<state_id> members;
        for (state_id s = 0; s < n; ++s)
            if (sccs.component[s] == c) {
                labels.insert(a.labels[s]);
                members.push_back(s);
            }
        if (labels.size() > 1) {
            std::string names;
            for (state_id s : members) names += (names.empty() ? "" : ", ") + a.state_names[s];
            out.push_back({"mixed-scc",
                           "strongly connected component {" + names + "} carries more than one label",
                           members});
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Runs and truth

inline state_id step(const truth_automaton& a, state_id s, symbol_id x, const empirical_problem& p) {
    if (x < 0 || x >= static_cast<int>(p.alphabet.size()))
        throw input_error("symbol outside the problem alphabet");
    return a.next[s][x];
}

inline state_id run_state(const empirical_problem& p, const evidence_sequence& e) {
    state_id s = p.truth.initial;
    for (symbol_id x : e) s = step(p.truth, s, x, p);
    return s;
}

/// Truth of an ultimately periodic world: run the prefix, then iterate the
/// cycle until the state at a cycle boundary repeats. From that point the
/// run loops through a fixed set of states, all in one SCC, whose shared
/// label is the truth. The boundary state must repeat within |states|+1
/// cycle iterations by pigeonhole.
inline hypothesis_id truth_of_world(const empirical_problem& p, const ultimately_periodic_world& w) {
    if (w.cycle.empty())
        throw input_error("world cycle must be nonempty");
    state_id s = run_state(p, w.prefix);
    std::vector<int> seen_at(p.truth.num_states(), -1);
    for (int iter = 0; iter <= p.truth.num_states(); ++iter) {
        if (seen_at[s] >= 0)
            return p.truth.labels[s];
        seen_at[s] = iter;
        for (symbol_id x : w.cycle) s = step(p.truth, s, x, p);
    }
    return p.truth.labels[s];   // unreachable for valid automata
}

/// Labels of the cyclic SCCs reachable from a state. Transitions are total,
/// so a run from any state is eventually trapped in some reachable cyclic
/// SCC; transient labels never decide the truth of a branch.
inline std::set<hypothesis_id> possible_truths_from(const empirical_problem& p, state_id start) {
    const auto& a = p.truth;
    auto sccs = compute_sccs(a);
    std::vector<bool> seen(a.num_states(), false);
    std::vector<state_id> queue{start};
    seen[start] = true;
    std::set<hypothesis_id> out;
    while (!queue.empty()) {
        state_id v = queue.back();
        queue.pop_back();
        if (sccs.cyclic[sccs.component[v]])
            out.insert(a.labels[v]);
        for (state_id w : a.next[v])
            if (!seen[w]) {
                seen[w] = true;
                queue.push_back(w);
            }
    }
    return out;
}

inline std::set<hypothesis_id> possible_truths(const empirical_problem& p, const evidence_sequence& e) {
    return possible_truths_from(p, run_state(p, e));
}

// ---------------------------------------------------------------------------
// Built-in problems

/// Two hypotheses: yes = "all ravens are black", no = "not all are". State
/// q0 loops on black and is left forever on the first nonblack observation.
inline empirical_problem raven_problem() {
    empirical_problem p;
    p.name = "raven";
    p.alphabet = {"black", "nonblack"};
    p.hypotheses = {{"yes", "Yes, all ravens are black"},
                    {"no", "No, not all are"}};
    p.truth.initial = 0;
    p.truth.state_names = {"q0", "q1"};
    p.truth.labels = {0, 1};
    p.truth.next = {{0, 1}, {1, 1}};
    return p;
}

/// Truth is fixed by the very first observation: two absorbing states, one
/// per hypothesis. Uniform convergence is achievable here with modulus 1.
inline empirical_problem first_observation_problem() {
    empirical_problem p;
    p.name = "first_observation";
    p.alphabet = {"a", "b"};
    p.hypotheses = {{"ha", "first observation is a"},
                    {"hb", "first observation is b"}};
    p.truth.initial = 0;
    p.truth.state_names = {"q0", "qa", "qb"};
    p.truth.labels = {0, 0, 1};
    p.truth.next = {{1, 2}, {1, 1}, {2, 2}};
    return p;
}

} // namespace convlab
