#pragma once

#include "convlab/rational.hpp"
#include "convlab/rng.hpp"

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace convlab {

/// The white-ball problem's unknown: the true proportion of white balls.
struct urn {
    rational p;   // in [0,1]
};

struct sample {
    int n = 0;
    int whites = 0;
    std::string seed_lineage;   // "master:<seed>/stream:<i>" style identifier
};

/// epsilon: closeness threshold (> 0); delta: one minus the probability
/// threshold (in (0,1)).
struct consistency_spec {
    rational epsilon;
    rational delta;

    bool valid() const {
        return epsilon > 0 && delta > 0 && delta < 1;
    }
};

struct undefined_estimate : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Sampling

namespace detail {

/// Bernoulli(p) from one 64-bit draw: white iff r/2^64 < p, compared exactly
/// in 128-bit arithmetic. The bias against true p is below 2^-64.
inline bool bernoulli(split_mix64& g, std::uint64_t num, std::uint64_t den) {
    unsigned __int128 r = g.next();
    return r * den < (static_cast<unsigned __int128>(num) << 64);
}

inline void to_u64_fraction(const rational& p, std::uint64_t& num, std::uint64_t& den) {
    big_int n = boost::multiprecision::numerator(p);
    big_int d = boost::multiprecision::denominator(p);
    if (n < 0 || n > d)
        throw std::invalid_argument("proportion must lie in [0,1]");
    if (d > std::numeric_limits<std::uint64_t>::max())
        throw std::invalid_argument("proportion denominator too large");
    num = static_cast<std::uint64_t>(n);
    den = static_cast<std::uint64_t>(d);
}

} // namespace detail

/// n independent draws with replacement; identical (seed, n, p) give an
/// identical sample on every platform.
inline sample draw_sample(const urn& u, int n, std::uint64_t seed) {
    if (n < 0) throw std::invalid_argument("sample size must be nonnegative");
    std::uint64_t num, den;
    detail::to_u64_fraction(u.p, num, den);
    split_mix64 g(seed);
    sample s;
    s.n = n;
    s.seed_lineage = std::string(prng_id) + ":" + std::to_string(seed);
    for (int i = 0; i < n; ++i)
        if (detail::bernoulli(g, num, den)) ++s.whites;
    return s;
}

/// whites / n, exactly.
inline rational frequency_estimate(const sample& s) {
    if (s.n == 0)
        throw undefined_estimate("frequency estimate undefined for an empty sample");
    return rational(s.whites, s.n);
}

/// Smallest n with 2 exp(-2 n epsilon^2) <= delta, i.e. the Hoeffding sample
/// size guaranteeing coverage >= 1 - delta for the frequency estimator at
/// every p.
inline int hoeffding_sample_size(const consistency_spec& spec) {
    if (!spec.valid())
        throw std::invalid_argument("invalid consistency spec");
    long double eps = spec.epsilon.convert_to<long double>();
    long double del = spec.delta.convert_to<long double>();
    long double bound = std::log(2.0L / del) / (2.0L * eps * eps);
    int n = static_cast<int>(std::ceil(bound));
    if (n < 1) n = 1;
    return n;
}

// ---------------------------------------------------------------------------
// Monte Carlo consistency

using estimator = std::function<rational(const sample&)>;

struct consistency_entry {
    rational p;
    long hits = 0;
    rational coverage;   // hits / replicates
};

struct consistency_report {
    consistency_spec spec;
    int n = 0;
    long replicates = 0;
    std::uint64_t master_seed = 0;
    std::string prng = prng_id;
    std::vector<consistency_entry> per_p;

    rational min_coverage() const {
        rational m = 1;
        for (const auto& e : per_p)
            if (e.coverage < m) m = e.coverage;
        return m;
    }
};

/// Per p in the grid: the fraction of replicates whose estimate lands within
/// epsilon of p. Replicate seeds are derived from the master seed, so the
/// report is reproducible and replicate order is irrelevant.
inline consistency_report monte_carlo_consistency(const estimator& est,
                                                  const std::vector<rational>& p_grid,
                                                  const consistency_spec& spec, int n,
                                                  long replicates, std::uint64_t master_seed) {
    if (replicates < 1 || n < 1)
        throw std::invalid_argument("need replicates >= 1 and n >= 1");
    consistency_report rep;
    rep.spec = spec;
    rep.n = n;
    rep.replicates = replicates;
    rep.master_seed = master_seed;
    for (std::size_t pi = 0; pi < p_grid.size(); ++pi) {
        consistency_entry entry;
        entry.p = p_grid[pi];
        urn u{p_grid[pi]};
        for (long r = 0; r < replicates; ++r) {
            sample s = draw_sample(u, n, derive_seed(master_seed, pi, static_cast<std::uint64_t>(r)));
            rational e = est(s);
            rational diff = e > entry.p ? e - entry.p : entry.p - e;
            if (diff < spec.epsilon) ++entry.hits;
        }
        entry.coverage = rational(entry.hits, replicates);
        rep.per_p.push_back(std::move(entry));
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Progressiveness

/// A statistical test method: maps a sample to hypothesis 0, hypothesis 1,
/// or suspension (2).
struct test_method {
    std::string description;
    std::function<int(const sample&)> decide;
};

inline constexpr int test_suspend = 2;

/// Output hypothesis 0 ("more than half white") iff the sample frequency
/// exceeds 1/2.
inline test_method frequency_threshold_test() {
    return {"frequency threshold: output 0 iff whites/n > 1/2",
            [](const sample& s) { return 2 * s.whites > s.n ? 0 : 1; }};
}

/// Wraps a base test and answers the other hypothesis whenever the sample
/// size is odd. Its chance-of-truth curve collapses at odd n, which is the
/// kind of drop progressiveness is meant to flag.
inline test_method odd_n_adversarial_test(test_method base = frequency_threshold_test()) {
    auto decide = [base = std::move(base.decide)](const sample& s) {
        int o = base(s);
        if (s.n % 2 == 1 && o != test_suspend) return 1 - o;
        return o;
    };
    return {"odd-n adversarial: flips the frequency test's answer at odd n", decide};
}

inline test_method constant_test(int output) {
    return {"constant test: always outputs " + std::to_string(output),
            [output](const sample&) { return output; }};
}

struct progressiveness_entry {
    int n = 0;
    long hits = 0;
    rational chance;   // estimated chance of outputting the true hypothesis
};

struct progressiveness_report {
    std::string test_description;
    rational p;
    int truth = 0;   // index of the true hypothesis for this urn
    long replicates = 0;
    std::uint64_t master_seed = 0;
    std::string prng = prng_id;
    std::vector<progressiveness_entry> curve;
    rational max_drop;   // max over i<j of chance[i] - chance[j]
};

inline progressiveness_report progressiveness_curve(const test_method& test, const urn& u,
                                                    int truth, const std::vector<int>& n_grid,
                                                    long replicates, std::uint64_t master_seed) {
    for (std::size_t i = 1; i < n_grid.size(); ++i)
        if (n_grid[i] <= n_grid[i - 1])
            throw std::invalid_argument("n_grid must be strictly increasing");
    if (replicates < 1)
        throw std::invalid_argument("need replicates >= 1");
    progressiveness_report rep;
    rep.test_description = test.description;
    rep.p = u.p;
    rep.truth = truth;
    rep.replicates = replicates;
    rep.master_seed = master_seed;
    for (std::size_t ni = 0; ni < n_grid.size(); ++ni) {
        progressiveness_entry e;
        e.n = n_grid[ni];
        for (long r = 0; r < replicates; ++r) {
            sample s = draw_sample(u, e.n, derive_seed(master_seed, ni, static_cast<std::uint64_t>(r)));
            if (test.decide(s) == truth) ++e.hits;
        }
        e.chance = rational(e.hits, replicates);
        rep.curve.push_back(e);
    }
    rep.max_drop = 0;
    rational running_max = 0;
    for (const auto& e : rep.curve) {
        if (running_max - e.chance > rep.max_drop)
            rep.max_drop = running_max - e.chance;
        if (e.chance > running_max) running_max = e.chance;
    }
    return rep;
}

} // namespace convlab
