#pragma once

#include "convlab/method.hpp"
#include "convlab/problem.hpp"

#include <optional>
#include <string>
#include <vector>

namespace convlab {

/// What a single ultimately periodic world exhibits when the method is
/// simulated along it. Errors are judged against an independent truth
/// computation (plain simulation with tail inspection), not against
/// truth_of_world or the product checkers.
struct world_run {
    hypothesis_id truth = -1;
    bool recurrent_error = false;            // errors persist in the periodic part
    std::optional<int> first_recurrent_error_time;
    std::optional<int> last_error_time;      // within the simulated horizon
    std::optional<std::pair<int, int>> stability_violation;   // truth held at i, dropped at j
    int horizon = 0;
};

/// Simulates the method along the world until the joint state at cycle
/// boundaries repeats, which bounds everything the infinite run can do.
inline world_run simulate_world(const inference_method& m, const empirical_problem& p,
                                const ultimately_periodic_world& w) {
    if (w.cycle.empty())
        throw input_error("world cycle must be nonempty");
    world_run out;
    const int np = p.truth.num_states();
    const int pre = static_cast<int>(w.prefix.size());
    const int cyc = static_cast<int>(w.cycle.size());

    // Independent truth: run the automaton alone long enough that the
    // boundary state has repeated, then read the label of the final state.
    {
        state_id q = p.truth.initial;
        const int steps = pre + 2 * np * cyc + cyc;
        for (int t = 0; t < steps; ++t)
            q = step(p.truth, q, w.at(t), p);
        out.truth = p.truth.labels[q];
    }

    // Joint simulation until the product boundary state repeats.
    const int max_boundaries = m.num_states() * np + 1;
    const int horizon = pre + cyc * (max_boundaries + 1);
    out.horizon = horizon;
    state_id ms = m.initial, qs = p.truth.initial;
    std::vector<int> seen_boundary(static_cast<std::size_t>(m.num_states()) * np, -1);
    int loop_start = -1, loop_end = -1;

    std::optional<int> truth_held_at;
    for (int t = 0; t <= horizon; ++t) {
        // boundary check at t = pre + i*cyc
        if (t >= pre && (t - pre) % cyc == 0 && loop_start == -1) {
            std::size_t key = static_cast<std::size_t>(ms) * np + qs;
            if (seen_boundary[key] >= 0) {
                loop_start = seen_boundary[key];
                loop_end = t;
            } else {
                seen_boundary[key] = t;
            }
        }
        method_output o = m.outputs[ms];
        if (o != out.truth) {
            out.last_error_time = t;
            if (loop_start != -1 && !out.first_recurrent_error_time) {
                // inside or past the detected loop: this error recurs forever
                out.recurrent_error = true;
                out.first_recurrent_error_time = t;
            }
            if (truth_held_at && !out.stability_violation)
                out.stability_violation = {*truth_held_at, t};
        } else if (is_hypothesis(o) && !truth_held_at) {
            truth_held_at = t;
        }
        if (loop_start != -1 && t >= loop_end + cyc * max_boundaries)
            break;   // one full loop scanned past detection; nothing new follows
        if (t < horizon) {
            symbol_id x = w.at(t);
            ms = m.next[ms][x];
            qs = step(p.truth, qs, x, p);
        }
    }
    return out;
}

struct oracle_violation {
    std::string mode;   // "pointwise", "stability", "uniform"
    ultimately_periodic_world world;
    std::pair<int, int> times;
};

struct oracle_report {
    std::vector<oracle_violation> violations;
    long worlds_checked = 0;
    bool partial = false;   // world cap hit; coverage incomplete

    bool has(const std::string& mode) const {
        for (const auto& v : violations)
            if (v.mode == mode) return true;
        return false;
    }
};

/// Enumerates every ultimately periodic world with |prefix| <= depth and
/// |cycle| <= max_period (plus any extra worlds supplied) and reports each
/// mode violation observed. Sound for fail: every reported violation is a
/// real one. Conclusive for pass only relative to the enumerated family.
///
/// The uniform clause needs care: finitely many worlds cannot show that no
/// modulus exists. But when uniform convergence holds, errors can only occur
/// at non-recurrent product nodes, all within depth |method|*|problem| of the
/// root; so an error at or past that depth, or a recurrent error, soundly
/// refutes uniformity.
inline oracle_report brute_force_oracle(const inference_method& m, const empirical_problem& p,
                                        int depth, int max_period,
                                        const std::vector<ultimately_periodic_world>& extra = {},
                                        long max_worlds = 2'000'000) {
    if (depth < 0 || max_period < 1)
        throw input_error("oracle needs depth >= 0 and max_period >= 1");
    const int k = static_cast<int>(p.alphabet.size());
    const int uniform_cap = m.num_states() * p.truth.num_states();
    oracle_report rep;
    bool pointwise_found = false, stability_found = false, uniform_found = false;

    auto inspect = [&](const ultimately_periodic_world& w) {
        world_run r = simulate_world(m, p, w);
        if (r.recurrent_error && !pointwise_found) {
            pointwise_found = true;
            int t = *r.first_recurrent_error_time;
            rep.violations.push_back({"pointwise", w, {t, t + static_cast<int>(w.cycle.size())}});
        }
        if (r.stability_violation && !stability_found) {
            stability_found = true;
            rep.violations.push_back({"stability", w, *r.stability_violation});
        }
        bool late_error = r.last_error_time && *r.last_error_time >= uniform_cap;
        if ((r.recurrent_error || late_error) && !uniform_found) {
            uniform_found = true;
            int t = r.recurrent_error ? *r.first_recurrent_error_time : *r.last_error_time;
            rep.violations.push_back({"uniform", w, {t, t}});
        }
    };

    // prefixes of length 0..depth and cycles of length 1..max_period, all
    // symbol combinations, enumerated by odometer
    std::vector<evidence_sequence> cycles;
    for (int cl = 1; cl <= max_period; ++cl) {
        evidence_sequence c(cl, 0);
        while (true) {
            cycles.push_back(c);
            int i = cl - 1;
            while (i >= 0 && ++c[i] == k) c[i--] = 0;
            if (i < 0) break;
        }
    }
    for (int pl = 0; pl <= depth && !rep.partial; ++pl) {
        evidence_sequence pre(pl, 0);
        while (true) {
            for (const auto& c : cycles) {
                if (rep.worlds_checked >= max_worlds) {
                    rep.partial = true;
                    break;
                }
                ++rep.worlds_checked;
                inspect({pre, c});
            }
            if (rep.partial) break;
            int i = pl - 1;
            while (i >= 0 && ++pre[i] == k) pre[i--] = 0;
            if (i < 0) break;
        }
    }
    for (const auto& w : extra) {
        ++rep.worlds_checked;
        inspect(w);
    }
    return rep;
}

} // namespace convlab
