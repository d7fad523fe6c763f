#pragma once

#include "convlab/method.hpp"
#include "convlab/problem.hpp"

#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace convlab {

/// Verdict of one mode check. On fail, the witness is an ultimately periodic
/// world that exhibits the violation when replayed through apply() and
/// truth_of_world(); witness_times are the evidence lengths at which the
/// violating outputs occur. On a uniform pass, modulus is the amount of
/// evidence after which every world is answered correctly.
struct convergence_verdict {
    std::string mode;
    bool pass = false;
    std::optional<ultimately_periodic_world> witness;
    std::optional<std::pair<int, int>> witness_times;
    std::optional<int> modulus;
};

// ---------------------------------------------------------------------------
// Product graph: the joint run of a method and a truth automaton. All three
// mode checks reduce to reachability/SCC questions on this finite graph,
// which is what makes the branch-quantified definitions decidable.

struct product_graph {
    std::vector<std::pair<state_id, state_id>> nodes;   // (method state, truth state)
    std::vector<std::vector<int>> next;                 // [node][symbol]
    std::vector<int> parent;                            // BFS tree (shortest evidence)
    std::vector<symbol_id> parent_symbol;
    scc_info sccs;                                      // SCCs of the product
    scc_info truth_sccs;                                // SCCs of the truth automaton
    std::vector<unsigned> possible;                     // truth state -> bitmask of reachable cyclic-SCC labels
    std::vector<int> settled_label;                     // truth state -> the one label if settled, else -1
};

inline product_graph build_product(const inference_method& m, const empirical_problem& p) {
    const int k = static_cast<int>(p.alphabet.size());
    if (m.num_states() == 0 || k == 0)
        throw input_error("empty method or alphabet");
    for (state_id s = 0; s < m.num_states(); ++s)
        if (static_cast<int>(m.next[s].size()) != k)
            throw input_error("method alphabet does not match the problem alphabet");

    product_graph g;
    const int np = p.truth.num_states();
    std::vector<int> node_of(static_cast<std::size_t>(m.num_states()) * np, -1);
    auto intern = [&](state_id ms, state_id qs) {
        int& slot = node_of[static_cast<std::size_t>(ms) * np + qs];
        if (slot == -1) {
            slot = static_cast<int>(g.nodes.size());
            g.nodes.emplace_back(ms, qs);
            g.next.emplace_back(k, -1);
            g.parent.push_back(-1);
            g.parent_symbol.push_back(-1);
        }
        return slot;
    };
    intern(m.initial, p.truth.initial);
    for (std::size_t head = 0; head < g.nodes.size(); ++head) {
        auto [ms, qs] = g.nodes[head];
        for (symbol_id x = 0; x < k; ++x) {
            int w = intern(m.next[ms][x], p.truth.next[qs][x]);
            g.next[head][x] = w;
            if (g.parent[w] == -1 && w != 0) {
                g.parent[w] = static_cast<int>(head);
                g.parent_symbol[w] = x;
            }
        }
    }

    g.sccs = compute_sccs(static_cast<int>(g.nodes.size()),
                          [&](int v, const std::function<void(int)>& emit) {
                              for (int w : g.next[v]) emit(w);
                          });
    g.truth_sccs = compute_sccs(p.truth);
    g.possible.assign(np, 0);
    g.settled_label.assign(np, -1);
    for (state_id q = 0; q < np; ++q) {
        for (hypothesis_id h : possible_truths_from(p, q))
            g.possible[q] |= 1u << h;
        unsigned mask = g.possible[q];
        if (mask != 0 && (mask & (mask - 1)) == 0) {
            int h = 0;
            while (!(mask & 1u)) { mask >>= 1; ++h; }
            g.settled_label[q] = h;
        }
    }
    return g;
}

/// Evidence along the BFS tree from the initial node (shortest path).
inline evidence_sequence evidence_to(const product_graph& g, int node) {
    evidence_sequence e;
    while (node != 0) {
        e.push_back(g.parent_symbol[node]);
        node = g.parent[node];
    }
    std::reverse(e.begin(), e.end());
    return e;
}

/// Shortest path between two product nodes with at least min_steps steps,
/// optionally restricted to one product SCC. Returns the symbol word.
inline std::optional<evidence_sequence> product_path(const product_graph& g, int from, int to,
                                                     int min_steps, int within_scc = -1) {
    const int n = static_cast<int>(g.nodes.size());
    const int k = static_cast<int>(g.next[0].size());
    // BFS over (node, steps capped at min_steps); cap keeps the state space finite.
    std::vector<int> prev(static_cast<std::size_t>(n) * (min_steps + 1), -2);
    std::vector<symbol_id> prev_sym(prev.size(), -1);
    auto idx = [&](int v, int s) { return static_cast<std::size_t>(v) * (min_steps + 1) + s; };
    std::vector<std::pair<int, int>> queue{{from, 0}};
    prev[idx(from, 0)] = -1;
    for (std::size_t head = 0; head < queue.size(); ++head) {
        auto [v, s] = queue[head];
        if (v == to && s >= min_steps) {
            evidence_sequence e;
            int cv = v, cs = s;
            while (prev[idx(cv, cs)] != -1) {
                symbol_id x = prev_sym[idx(cv, cs)];
                e.push_back(x);
                int pv = prev[idx(cv, cs)];
                cv = pv / (min_steps + 1);
                cs = pv % (min_steps + 1);
            }
            std::reverse(e.begin(), e.end());
            return e;
        }
        for (symbol_id x = 0; x < k; ++x) {
            int w = g.next[v][x];
            if (within_scc >= 0 && g.sccs.component[w] != within_scc) continue;
            int s2 = std::min(s + 1, min_steps);
            if (prev[idx(w, s2)] == -2) {
                prev[idx(w, s2)] = static_cast<int>(idx(v, s));
                prev_sym[idx(w, s2)] = x;
                queue.emplace_back(w, s2);
            }
        }
    }
    return std::nullopt;
}

/// Shortest nonempty cycle word through a truth-automaton state, staying
/// within its (cyclic) SCC.
inline evidence_sequence truth_cycle_word(const empirical_problem& p, const scc_info& sccs,
                                          state_id r) {
    const int k = static_cast<int>(p.alphabet.size());
    const int comp = sccs.component[r];
    struct entry { state_id s; int prev; symbol_id sym; };
    std::vector<entry> queue;
    std::vector<bool> seen(p.truth.num_states(), false);
    // seed with the one-step successors so the cycle is nonempty
    for (symbol_id x = 0; x < k; ++x) {
        state_id w = p.truth.next[r][x];
        if (sccs.component[w] != comp || seen[w]) continue;
        seen[w] = true;
        queue.push_back({w, -1, x});
    }
    for (std::size_t head = 0; head < queue.size(); ++head) {
        if (queue[head].s == r) {
            evidence_sequence e;
            int cur = static_cast<int>(head);
            while (cur != -1) {
                e.push_back(queue[cur].sym);
                cur = queue[cur].prev;
            }
            std::reverse(e.begin(), e.end());
            return e;
        }
        for (symbol_id x = 0; x < k; ++x) {
            state_id w = p.truth.next[queue[head].s][x];
            if (sccs.component[w] != comp || seen[w]) continue;
            seen[w] = true;
            queue.push_back({w, static_cast<int>(head), x});
        }
    }
    throw input_error("state is not in a cyclic SCC");
}

/// Path in the truth automaton from a state to some state of a cyclic SCC
/// with the given label; returns (word, target state).
inline std::optional<std::pair<evidence_sequence, state_id>>
path_to_labeled_scc(const empirical_problem& p, const scc_info& sccs, state_id from,
                    hypothesis_id target) {
    const int k = static_cast<int>(p.alphabet.size());
    struct entry { state_id s; int prev; symbol_id sym; };
    std::vector<entry> queue{{from, -1, -1}};
    std::vector<bool> seen(p.truth.num_states(), false);
    seen[from] = true;
    for (std::size_t head = 0; head < queue.size(); ++head) {
        state_id s = queue[head].s;
        if (sccs.cyclic[sccs.component[s]] && p.truth.labels[s] == target) {
            evidence_sequence e;
            int cur = static_cast<int>(head);
            while (queue[cur].prev != -1) {
                e.push_back(queue[cur].sym);
                cur = queue[cur].prev;
            }
            std::reverse(e.begin(), e.end());
            return std::make_pair(e, s);
        }
        for (symbol_id x = 0; x < k; ++x) {
            state_id w = p.truth.next[s][x];
            if (!seen[w]) {
                seen[w] = true;
                queue.push_back({w, static_cast<int>(head), x});
            }
        }
    }
    return std::nullopt;
}

inline evidence_sequence concat(evidence_sequence a, const evidence_sequence& b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
}

// ---------------------------------------------------------------------------
// Pointwise convergence.
//
// Equivalence argument. A branch's run through the product eventually visits
// exactly its infinitely-often node set, which is strongly connected, so each
// of those nodes lies on a product cycle; the branch's truth is the label of
// the truth-SCC those nodes project into. Hence the method errs infinitely
// often on some branch iff some product node on a cycle outputs something
// other than the label of its truth state's SCC. Conversely, any such node u
// yields an ultimately periodic counterexample: reach u, then loop on a cycle
// through u, which pins the world's truth to that SCC label while the wrong
// output recurs forever.

inline convergence_verdict check_pointwise(const inference_method& m, const empirical_problem& p) {
    product_graph g = build_product(m, p);
    convergence_verdict v;
    v.mode = "pointwise";
    for (int u = 0; u < static_cast<int>(g.nodes.size()); ++u) {
        if (!g.sccs.cyclic[g.sccs.component[u]]) continue;
        state_id q = g.nodes[u].second;
        hypothesis_id h = p.truth.labels[q];   // = label of q's SCC (well-posedness)
        if (m.outputs[g.nodes[u].first] == h) continue;
        v.pass = false;
        ultimately_periodic_world w;
        w.prefix = evidence_to(g, u);
        w.cycle = *product_path(g, u, u, 1, g.sccs.component[u]);
        v.witness = w;
        int t = static_cast<int>(w.prefix.size());
        v.witness_times = {t, t + static_cast<int>(w.cycle.size())};
        return v;
    }
    v.pass = true;
    return v;
}

// ---------------------------------------------------------------------------
// Stability.
//
// Equivalence argument. A violation is a branch whose truth is t on which the
// method outputs t at some time i and something else at a later time j. In
// product terms: a reachable node u with output t, a nonempty path u -> v
// with output(v) != t, and from v's truth state some cyclic SCC labeled t
// still reachable (so the deviation happens on a branch whose truth really is
// t). Any such triple is realized by an ultimately periodic world: evidence
// to u, then to v, then into a t-labeled cyclic SCC, looping there.

inline convergence_verdict check_stability(const inference_method& m, const empirical_problem& p) {
    product_graph g = build_product(m, p);
    const int n = static_cast<int>(g.nodes.size());
    const int k = static_cast<int>(p.alphabet.size());
    convergence_verdict v;
    v.mode = "stability";
    for (int u = 0; u < n; ++u) {
        method_output t = m.outputs[g.nodes[u].first];
        if (!is_hypothesis(t)) continue;
        // BFS over nodes reachable from u in >= 1 step
        struct entry { int node; int prev; symbol_id sym; };
        std::vector<entry> queue;
        std::vector<bool> seen(n, false);
        for (symbol_id x = 0; x < k; ++x) {
            int w = g.next[u][x];
            if (!seen[w]) {
                seen[w] = true;
                queue.push_back({w, -1, x});
            }
        }
        for (std::size_t head = 0; head < queue.size(); ++head) {
            int node = queue[head].node;
            state_id q = g.nodes[node].second;
            if (m.outputs[g.nodes[node].first] != t && (g.possible[q] >> t & 1u)) {
                evidence_sequence mid;
                int cur = static_cast<int>(head);
                while (cur != -1) {
                    mid.push_back(queue[cur].sym);
                    cur = queue[cur].prev;
                }
                std::reverse(mid.begin(), mid.end());
                auto tail = path_to_labeled_scc(p, g.truth_sccs, q, t);
                ultimately_periodic_world w;
                w.prefix = concat(concat(evidence_to(g, u), mid), tail->first);
                w.cycle = truth_cycle_word(p, g.truth_sccs, tail->second);
                v.pass = false;
                v.witness = w;
                int i = static_cast<int>(evidence_to(g, u).size());
                v.witness_times = {i, i + static_cast<int>(mid.size())};
                return v;
            }
            for (symbol_id x = 0; x < k; ++x) {
                int w = g.next[node][x];
                if (!seen[w]) {
                    seen[w] = true;
                    queue.push_back({w, static_cast<int>(head), x});
                }
            }
        }
    }
    v.pass = true;
    return v;
}

// ---------------------------------------------------------------------------
// Uniform convergence.
//
// Equivalence argument. Call a product node conforming when its truth state
// is settled (all reachable cyclic SCCs share one label) and the output
// equals that label; at a conforming node no branch through it is answered
// wrongly, and at a non-conforming node some branch is. Uniform convergence
// holds iff wrong answers stop at some fixed depth n, i.e. iff every node
// reachable at unbounded depths conforms. The nodes reachable at unbounded
// depths are exactly those on a product cycle or reachable from one; all
// paths to the remaining non-conforming nodes are acyclic, so the modulus is
// one more than the longest such path.

inline convergence_verdict check_uniform(const inference_method& m, const empirical_problem& p) {
    product_graph g = build_product(m, p);
    const int n = static_cast<int>(g.nodes.size());
    convergence_verdict v;
    v.mode = "uniform";

    std::vector<bool> conforming(n);
    for (int u = 0; u < n; ++u) {
        state_id q = g.nodes[u].second;
        conforming[u] = g.settled_label[q] != -1 &&
                        m.outputs[g.nodes[u].first] == g.settled_label[q];
    }

    // Nodes reachable from a product cycle (including cycle nodes).
    std::vector<bool> recurrent(n, false);
    std::vector<int> queue;
    for (int u = 0; u < n; ++u)
        if (g.sccs.cyclic[g.sccs.component[u]]) {
            recurrent[u] = true;
            queue.push_back(u);
        }
    while (!queue.empty()) {
        int u = queue.back();
        queue.pop_back();
        for (int w : g.next[u])
            if (!recurrent[w]) {
                recurrent[w] = true;
                queue.push_back(w);
            }
    }

    int bad = -1;
    for (int u = 0; u < n && bad == -1; ++u)
        if (recurrent[u] && !conforming[u]) bad = u;

    if (bad == -1) {
        v.pass = true;
        // Longest path from the initial node to a non-conforming node. All
        // non-conforming nodes are non-recurrent here, successors of
        // recurrent nodes are recurrent, and the non-recurrent subgraph is
        // acyclic, so a memoized DFS suffices.
        constexpr int none = std::numeric_limits<int>::min();
        std::vector<int> memo(n, none);
        std::vector<bool> done(n, false);
        std::function<int(int)> farthest = [&](int u) -> int {
            if (done[u]) return memo[u];
            done[u] = true;
            int best = conforming[u] ? none : 0;
            for (int w : g.next[u])
                if (!recurrent[w]) {
                    int fw = farthest(w);
                    if (fw != none) best = std::max(best, fw + 1);
                }
            memo[u] = best;
            return best;
        };
        int d0 = recurrent[0] ? none : farthest(0);
        v.modulus = d0 == none ? 0 : d0 + 1;
        return v;
    }

    // Prefer a recurrent-error witness when pointwise also fails; it shows
    // the error recurring at arbitrarily late times directly.
    convergence_verdict pw = check_pointwise(m, p);
    if (!pw.pass) {
        v.pass = false;
        v.witness = pw.witness;
        v.witness_times = pw.witness_times;
        return v;
    }

    // Otherwise: a non-conforming node after a cycle. Some branch through it
    // is answered wrongly there, and pumping the preceding cycle pushes that
    // error past any candidate modulus.
    state_id q = g.nodes[bad].second;
    method_output o = m.outputs[g.nodes[bad].first];
    hypothesis_id target = -1;
    for (hypothesis_id h = 0; h < static_cast<int>(p.hypotheses.size()); ++h)
        if ((g.possible[q] >> h & 1u) && h != o) { target = h; break; }
    auto tail = path_to_labeled_scc(p, g.truth_sccs, q, target);
    ultimately_periodic_world w;
    w.prefix = concat(evidence_to(g, bad), tail->first);
    w.cycle = truth_cycle_word(p, g.truth_sccs, tail->second);
    v.pass = false;
    v.witness = w;
    int t = static_cast<int>(evidence_to(g, bad).size());
    v.witness_times = {t, t};
    return v;
}

inline convergence_verdict check_stable_pointwise(const inference_method& m,
                                                  const empirical_problem& p) {
    convergence_verdict pw = check_pointwise(m, p);
    if (!pw.pass) {
        pw.mode = "stable_pointwise";
        return pw;
    }
    convergence_verdict st = check_stability(m, p);
    st.mode = "stable_pointwise";
    return st;
}

inline convergence_verdict check_mode(const std::string& mode, const inference_method& m,
                                      const empirical_problem& p) {
    if (mode == "uniform") return check_uniform(m, p);
    if (mode == "pointwise") return check_pointwise(m, p);
    if (mode == "stability") return check_stability(m, p);
    if (mode == "stable_pointwise") return check_stable_pointwise(m, p);
    throw input_error("unknown mode: " + mode);
}

// ---------------------------------------------------------------------------
// Problem-level achievability.

/// Generalizes ordinary induction: same state graph as the truth automaton,
/// each state outputs its own label.
inline inference_method canonical_induction(const empirical_problem& p) {
    inference_method m;
    m.name = "canonical_induction";
    m.problem_name = p.name;
    m.initial = p.truth.initial;
    m.state_names = p.truth.state_names;
    m.outputs.assign(p.truth.labels.begin(), p.truth.labels.end());
    m.next = p.truth.next;
    return m;
}

/// Witness for uniform achievability: output the settled label wherever the
/// truth is already determined, suspend elsewhere. Suspending on unsettled
/// states means the method never commits to a hypothesis it could be forced
/// to drop, so a uniform pass also carries stability.
inline inference_method settled_label_method(const empirical_problem& p) {
    product_graph g = build_product(canonical_induction(p), p);
    inference_method m = canonical_induction(p);
    m.name = "settled_label_method";
    for (state_id q = 0; q < p.truth.num_states(); ++q)
        m.outputs[q] = g.settled_label[q] != -1 ? g.settled_label[q] : suspend;
    return m;
}

struct achievability_entry {
    std::string mode;
    std::string status;   // "achievable", "unachievable", "unknown"
    std::optional<inference_method> witness;
    std::optional<int> modulus;
    std::string certificate;
};

struct achievability_report {
    std::vector<achievability_entry> modes;   // hierarchy order, high to low
    std::string highest;                      // "" when nothing is achievable
};

/// The hierarchy is a pluggable ordered list; this is the default, high to
/// low.
inline const std::vector<std::string>& default_hierarchy() {
    static const std::vector<std::string> h{"uniform", "stable_pointwise", "pointwise"};
    return h;
}

inline achievability_report achievability(const empirical_problem& p,
                                          const std::vector<std::string>& hierarchy = default_hierarchy()) {
    achievability_report rep;
    inference_method canon = canonical_induction(p);
    product_graph g = build_product(canon, p);
    auto p_sccs = compute_sccs(p.truth);

    for (const std::string& mode : hierarchy) {
        achievability_entry e;
        e.mode = mode;
        if (mode == "uniform") {
            // Uniform is achievable iff every truth state on a cycle is
            // settled: then the settled-label method answers every branch
            // correctly past the acyclic lead-in; and an unsettled cyclic
            // state q defeats every method, because reaching q can be
            // deferred past any modulus by looping, while branches through q
            // still realize two different truths.
            state_id offender = -1;
            for (state_id q = 0; q < p.truth.num_states() && offender == -1; ++q)
                if (p_sccs.cyclic[p_sccs.component[q]] && g.settled_label[q] == -1)
                    offender = q;
            if (offender == -1) {
                inference_method w = settled_label_method(p);
                convergence_verdict cv = check_uniform(w, p);
                e.status = "achievable";
                e.witness = w;
                e.modulus = cv.modulus;
            } else {
                e.status = "unachievable";
                e.certificate = "cyclic state '" + p.truth.state_names[offender] +
                                "' is unsettled (multiple truths remain possible forever)";
            }
        } else {
            convergence_verdict cv = check_mode(mode, canon, p);
            if (cv.pass) {
                e.status = "achievable";
                e.witness = canon;
            } else if (inference_method alt = settled_label_method(p);
                       check_mode(mode, alt, p).pass) {
                // keeps the report monotone when the uniform witness exists
                // but canonical induction is unstable on transient labels
                e.status = "achievable";
                e.witness = alt;
            } else {
                // Failure of both constructions does not prove problem-level
                // unachievability.
                e.status = "unknown";
                e.certificate = "no constructed witness achieves this mode on this problem";
            }
        }
        rep.modes.push_back(std::move(e));
    }
    for (const auto& e : rep.modes)
        if (e.status == "achievable") {
            rep.highest = e.mode;
            break;
        }
    return rep;
}

} // namespace convlab
