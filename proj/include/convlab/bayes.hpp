#pragma once

#include "convlab/problem.hpp"
#include "convlab/rational.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace convlab {

struct conditioning_on_null : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// World-hypotheses for the raven setting: "all observations black", "first
/// counterexample at position k" for k = 1..K, and a tail lump standing for
/// every world whose first counterexample comes after K. The tail keeps the
/// masses summing to one exactly instead of silently dropping the remainder.
struct discrete_prior {
    int truncation = 0;               // K
    rational all_black;
    std::vector<rational> cx_at;      // index k-1 holds mass of "first cx at k"
    rational tail;

    rational total() const {
        rational t = all_black + tail;
        for (const auto& m : cx_at) t += m;
        return t;
    }
};

inline void validate_prior(const discrete_prior& prior) {
    if (prior.truncation < 1 || static_cast<int>(prior.cx_at.size()) != prior.truncation)
        throw std::invalid_argument("prior support size must match the truncation bound");
    if (prior.all_black < 0 || prior.tail < 0)
        throw std::invalid_argument("prior masses must be nonnegative");
    for (const auto& m : prior.cx_at)
        if (m < 0) throw std::invalid_argument("prior masses must be nonnegative");
    if (prior.total() != 1)
        throw std::invalid_argument("prior masses must sum to 1 exactly");
}

/// all_black = 1/2, cx at k = 2^-(k+1) for k = 1..K, tail = 2^-(K+1); sums
/// to 1 exactly.
inline discrete_prior geometric_prior(int truncation) {
    discrete_prior p;
    p.truncation = truncation;
    p.all_black = rational(1, 2);
    rational mass(1, 2);
    for (int k = 1; k <= truncation; ++k) {
        mass /= 2;
        p.cx_at.push_back(mass);
    }
    p.tail = mass;   // 2^-(K+1), everything not yet assigned
    return p;
}

// ---------------------------------------------------------------------------
// Evidence and likelihoods. Evidence symbols are the raven problem's: 0 =
// black, 1 = nonblack (a counterexample). World-hypotheses fix deterministic
// constraints, so likelihoods are 0 or 1 and conditionalization is just
// exact renormalization over the consistent support.

inline constexpr symbol_id obs_black = 0;
inline constexpr symbol_id obs_nonblack = 1;

namespace detail {

inline bool consistent_all_black(const evidence_sequence& e) {
    for (symbol_id x : e)
        if (x != obs_black) return false;
    return true;
}

/// "First counterexample at position k" (1-based): black before k, nonblack
/// at k, unconstrained after.
inline bool consistent_cx_at(const evidence_sequence& e, int k) {
    for (int i = 0; i < static_cast<int>(e.size()); ++i) {
        int pos = i + 1;
        if (pos < k && e[i] != obs_black) return false;
        if (pos == k && e[i] != obs_nonblack) return false;
    }
    return true;
}

/// Tail lump ("first counterexample after K"): black through position K.
/// Beyond K the lump is not subdivided, so evidence longer than K is judged
/// only on its first K observations; the induced error is bounded by the
/// tail mass itself.
inline bool consistent_tail(const evidence_sequence& e, int truncation) {
    int upto = std::min<int>(truncation, static_cast<int>(e.size()));
    for (int i = 0; i < upto; ++i)
        if (e[i] != obs_black) return false;
    return true;
}

} // namespace detail

/// Exact conditionalization on evidence: zero out inconsistent support
/// elements and renormalize. Conditioning on e then e' equals conditioning
/// on their concatenation, because the consistency constraints are per
/// position.
inline discrete_prior conditionalize(const discrete_prior& prior, const evidence_sequence& e) {
    discrete_prior post = prior;
    if (!detail::consistent_all_black(e)) post.all_black = 0;
    for (int k = 1; k <= prior.truncation; ++k)
        if (!detail::consistent_cx_at(e, k)) post.cx_at[k - 1] = 0;
    if (!detail::consistent_tail(e, prior.truncation)) post.tail = 0;

    rational z = post.total();
    if (z == 0)
        throw conditioning_on_null("evidence has zero probability under the prior");
    post.all_black /= z;
    for (auto& m : post.cx_at) m /= z;
    post.tail /= z;
    return post;
}

// ---------------------------------------------------------------------------
// Consistency simulation

enum class world_class { all_black, cx_at, tail };

struct classified_world {
    world_class cls = world_class::all_black;
    int k = 0;   // first counterexample position when cls == cx_at or tail
};

/// The true world-hypothesis of an ultimately periodic raven world: the
/// position of its first counterexample, if any.
inline classified_world classify_world(const ultimately_periodic_world& w, int truncation) {
    if (w.cycle.empty())
        throw input_error("world cycle must be nonempty");
    std::size_t scan = w.prefix.size() + w.cycle.size();
    for (std::size_t t = 0; t < scan; ++t)
        if (w.at(t) != obs_black) {
            int k = static_cast<int>(t) + 1;
            return {k <= truncation ? world_class::cx_at : world_class::tail, k};
        }
    return {world_class::all_black, 0};
}

struct posterior_trace {
    classified_world truth;
    std::vector<std::pair<int, rational>> points;   // (evidence length, mass on truth)
    std::optional<int> null_conditioning_at;        // evidence length where mass ran out
    rational tail_mass_bound;                       // truncation error carried with the trace

    rational final_mass() const { return points.empty() ? rational(0) : points.back().second; }
};

/// Posterior credence on the world's true hypothesis after each observation
/// up to the horizon. A world whose truth lies in the tail lump cannot be
/// traced faithfully, so the horizon must not reach past the truncation
/// bound in the all-black direction; the tail bound is reported alongside.
inline posterior_trace bayes_consistency_sim(const discrete_prior& prior,
                                             const ultimately_periodic_world& world,
                                             int horizon) {
    if (horizon < 1) throw std::invalid_argument("horizon must be >= 1");
    posterior_trace trace;
    trace.truth = classify_world(world, prior.truncation);
    trace.tail_mass_bound = prior.tail;

    discrete_prior current = prior;
    evidence_sequence so_far;
    for (int t = 1; t <= horizon; ++t) {
        so_far.push_back(world.at(t - 1));
        try {
            current = conditionalize(prior, so_far);
        } catch (const conditioning_on_null&) {
            trace.null_conditioning_at = t;
            break;
        }
        rational mass;
        switch (trace.truth.cls) {
            case world_class::all_black: mass = current.all_black; break;
            case world_class::cx_at: mass = current.cx_at[trace.truth.k - 1]; break;
            case world_class::tail: mass = current.tail; break;
        }
        trace.points.emplace_back(t, mass);
    }
    return trace;
}

struct bayes_failure {
    ultimately_periodic_world world;
    posterior_trace trace;
    std::string reason;
};

struct bayes_verdict {
    bool pass = false;
    rational threshold;
    int horizon = 0;
    rational tail_mass;
    long worlds_checked = 0;
    std::vector<bayes_failure> failures;
    /// "High chance" over worlds is read universally here: every enumerated
    /// world must reach the threshold. The deterministic setting gives no
    /// distribution over worlds to average against.
    std::string quantification = "universal over enumerated worlds";
};

/// Enumerates the ultimately periodic raven worlds with bounded prefix and
/// period (the all-black limit world is the empty-prefix, black-cycle case)
/// and demands posterior mass on each world's truth reach the threshold by
/// the horizon. Conditioning-on-null and zero-mass truths are failures, not
/// errors.
inline bayes_verdict consistency_verdict(const discrete_prior& prior, int horizon,
                                         const rational& threshold, int max_prefix = 8,
                                         int max_period = 2) {
    validate_prior(prior);
    bayes_verdict verdict;
    verdict.threshold = threshold;
    verdict.horizon = horizon;
    verdict.tail_mass = prior.tail;

    auto consider = [&](const ultimately_periodic_world& w) {
        ++verdict.worlds_checked;
        posterior_trace tr = bayes_consistency_sim(prior, w, horizon);
        if (tr.null_conditioning_at) {
            verdict.failures.push_back({w, tr,
                                        "conditioning on null at length " +
                                            std::to_string(*tr.null_conditioning_at)});
            return;
        }
        if (tr.final_mass() < threshold)
            verdict.failures.push_back({w, tr,
                                        "posterior on truth is " + to_decimal(tr.final_mass(), 6) +
                                            " at the horizon, below the threshold"});
    };

    for (int pl = 0; pl <= max_prefix; ++pl) {
        evidence_sequence pre(pl, obs_black);
        while (true) {
            for (int cl = 1; cl <= max_period; ++cl) {
                evidence_sequence cyc(cl, obs_black);
                while (true) {
                    consider({pre, cyc});
                    int i = cl - 1;
                    while (i >= 0 && ++cyc[i] == 2) cyc[i--] = obs_black;
                    if (i < 0) break;
                }
            }
            int i = pl - 1;
            while (i >= 0 && ++pre[i] == 2) pre[i--] = obs_black;
            if (i < 0) break;
        }
    }
    verdict.pass = verdict.failures.empty();
    return verdict;
}

} // namespace convlab
