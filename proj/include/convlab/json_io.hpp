#pragma once

#include "convlab/bayes.hpp"
#include "convlab/convergence.hpp"
#include "convlab/method.hpp"
#include "convlab/problem.hpp"
#include "convlab/rational.hpp"
#include "convlab/statistics.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace convlab {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Problems and methods: the canonical JSON form mirrors the automaton
// directly (states, transitions, labels, initial), with names rather than
// indices so files remain diffable.

inline json problem_to_json(const empirical_problem& p) {
    json j;
    j["name"] = p.name;
    j["alphabet"] = p.alphabet;
    json hyps = json::array();
    for (const auto& h : p.hypotheses)
        hyps.push_back({{"label", h.label}, {"display", h.display}});
    j["hypotheses"] = hyps;
    j["states"] = p.truth.state_names;
    j["initial"] = p.truth.state_names[p.truth.initial];
    json labels = json::object();
    for (int s = 0; s < p.truth.num_states(); ++s)
        labels[p.truth.state_names[s]] = p.hypotheses[p.truth.labels[s]].label;
    j["labels"] = labels;
    json trans = json::array();
    for (int s = 0; s < p.truth.num_states(); ++s)
        for (std::size_t x = 0; x < p.alphabet.size(); ++x)
            trans.push_back({{"from", p.truth.state_names[s]},
                             {"symbol", p.alphabet[x]},
                             {"to", p.truth.state_names[p.truth.next[s][x]]}});
    j["transitions"] = trans;
    return j;
}

inline empirical_problem problem_from_json(const json& j) {
    empirical_problem p;
    p.name = j.at("name").get<std::string>();
    p.alphabet = j.at("alphabet").get<std::vector<std::string>>();
    for (const auto& h : j.at("hypotheses"))
        p.hypotheses.push_back({h.at("label").get<std::string>(),
                                h.value("display", h.at("label").get<std::string>())});
    p.truth.state_names = j.at("states").get<std::vector<std::string>>();
    auto state_index = [&](const std::string& n) -> state_id {
        for (std::size_t i = 0; i < p.truth.state_names.size(); ++i)
            if (p.truth.state_names[i] == n) return static_cast<state_id>(i);
        throw input_error("unknown state '" + n + "' in JSON");
    };
    p.truth.initial = state_index(j.at("initial").get<std::string>());
    p.truth.labels.assign(p.truth.state_names.size(), -1);
    for (const auto& [name, label] : j.at("labels").items()) {
        auto h = p.hypothesis_index(label.get<std::string>());
        if (!h) throw input_error("unknown hypothesis in JSON labels");
        p.truth.labels[state_index(name)] = *h;
    }
    p.truth.next.assign(p.truth.state_names.size(),
                        std::vector<state_id>(p.alphabet.size(), -1));
    for (const auto& t : j.at("transitions")) {
        auto sym = p.symbol_index(t.at("symbol").get<std::string>());
        if (!sym) throw input_error("unknown symbol in JSON transitions");
        p.truth.next[state_index(t.at("from").get<std::string>())][*sym] =
            state_index(t.at("to").get<std::string>());
    }
    return p;
}

inline json method_to_json(const inference_method& m, const empirical_problem& p) {
    json j;
    j["name"] = m.name;
    j["problem"] = m.problem_name;
    j["states"] = m.state_names;
    j["initial"] = m.state_names[m.initial];
    json outs = json::object();
    for (int s = 0; s < m.num_states(); ++s)
        outs[m.state_names[s]] =
            is_hypothesis(m.outputs[s]) ? p.hypotheses[m.outputs[s]].label : "?";
    j["outputs"] = outs;
    json trans = json::array();
    for (int s = 0; s < m.num_states(); ++s)
        for (std::size_t x = 0; x < p.alphabet.size(); ++x)
            trans.push_back({{"from", m.state_names[s]},
                             {"symbol", p.alphabet[x]},
                             {"to", m.state_names[m.next[s][x]]}});
    j["transitions"] = trans;
    return j;
}

inline inference_method method_from_json(const json& j, const empirical_problem& p) {
    inference_method m;
    m.name = j.at("name").get<std::string>();
    m.problem_name = j.at("problem").get<std::string>();
    m.state_names = j.at("states").get<std::vector<std::string>>();
    auto state_index = [&](const std::string& n) -> state_id {
        for (std::size_t i = 0; i < m.state_names.size(); ++i)
            if (m.state_names[i] == n) return static_cast<state_id>(i);
        throw input_error("unknown state '" + n + "' in JSON");
    };
    m.initial = state_index(j.at("initial").get<std::string>());
    m.outputs.assign(m.state_names.size(), suspend);
    for (const auto& [name, out] : j.at("outputs").items()) {
        std::string o = out.get<std::string>();
        if (o == "?") continue;
        auto h = p.hypothesis_index(o);
        if (!h) throw input_error("unknown hypothesis in JSON outputs");
        m.outputs[state_index(name)] = *h;
    }
    m.next.assign(m.state_names.size(), std::vector<state_id>(p.alphabet.size(), -1));
    for (const auto& t : j.at("transitions")) {
        auto sym = p.symbol_index(t.at("symbol").get<std::string>());
        if (!sym) throw input_error("unknown symbol in JSON transitions");
        m.next[state_index(t.at("from").get<std::string>())][*sym] =
            state_index(t.at("to").get<std::string>());
    }
    return m;
}

// ---------------------------------------------------------------------------
// Verdicts and reports

inline json world_to_json(const ultimately_periodic_world& w, const empirical_problem& p) {
    json j;
    json pre = json::array(), cyc = json::array();
    for (symbol_id x : w.prefix) pre.push_back(p.alphabet[x]);
    for (symbol_id x : w.cycle) cyc.push_back(p.alphabet[x]);
    j["prefix"] = pre;
    j["cycle"] = cyc;
    return j;
}

inline json verdict_to_json(const convergence_verdict& v, const std::string& method_name,
                            const empirical_problem& p) {
    json j;
    j["method"] = method_name;
    j["problem"] = p.name;
    j["mode"] = v.mode;
    j["verdict"] = v.pass ? "pass" : "fail";
    if (v.witness) j["witness"] = world_to_json(*v.witness, p);
    if (v.witness_times) j["times"] = {v.witness_times->first, v.witness_times->second};
    if (v.modulus) j["modulus"] = *v.modulus;
    return j;
}

inline json achievability_to_json(const achievability_report& rep, const empirical_problem& p) {
    json j;
    j["problem"] = p.name;
    j["highest_achievable"] = rep.highest;
    json modes = json::array();
    for (const auto& e : rep.modes) {
        json m;
        m["mode"] = e.mode;
        m["status"] = e.status;
        if (e.witness) m["witness_method"] = method_to_json(*e.witness, p);
        if (e.modulus) m["modulus"] = *e.modulus;
        if (!e.certificate.empty()) m["certificate"] = e.certificate;
        modes.push_back(m);
    }
    j["modes"] = modes;
    return j;
}

inline json consistency_report_to_json(const consistency_report& rep) {
    json j;
    j["kind"] = "consistency";
    j["epsilon"] = to_string(rep.spec.epsilon);
    j["delta"] = to_string(rep.spec.delta);
    j["n"] = rep.n;
    j["replicates"] = rep.replicates;
    j["seed"] = rep.master_seed;
    j["prng"] = rep.prng;
    json rows = json::array();
    for (const auto& e : rep.per_p)
        rows.push_back({{"p", to_string(e.p)},
                        {"hits", e.hits},
                        {"coverage", to_string(e.coverage)},
                        {"coverage_decimal", to_decimal(e.coverage, 6)}});
    j["per_p"] = rows;
    return j;
}

inline json progressiveness_report_to_json(const progressiveness_report& rep) {
    json j;
    j["kind"] = "progressiveness";
    j["test"] = rep.test_description;
    j["p"] = to_string(rep.p);
    j["truth"] = rep.truth;
    j["replicates"] = rep.replicates;
    j["seed"] = rep.master_seed;
    j["prng"] = rep.prng;
    json rows = json::array();
    for (const auto& e : rep.curve)
        rows.push_back({{"n", e.n},
                        {"hits", e.hits},
                        {"chance_of_truth", to_string(e.chance)},
                        {"chance_decimal", to_decimal(e.chance, 6)}});
    j["curve"] = rows;
    j["max_drop"] = to_string(rep.max_drop);
    j["max_drop_decimal"] = to_decimal(rep.max_drop, 6);
    return j;
}

inline json prior_to_json(const discrete_prior& prior) {
    json j;
    j["all_black"] = to_string(prior.all_black);
    json cx = json::object();
    for (int k = 1; k <= prior.truncation; ++k)
        cx[std::to_string(k)] = to_string(prior.cx_at[k - 1]);
    j["cx_at"] = cx;
    j["tail"] = to_string(prior.tail);
    j["truncation"] = prior.truncation;
    return j;
}

/// Accepts {"all_black": "1/2", "cx_at": {"1": "1/4", ...}} with an optional
/// "tail"; when tail is omitted it absorbs the mass left over, so the sum is
/// exactly one. Truncation defaults to the largest cx_at key.
inline discrete_prior prior_from_json(const json& j) {
    discrete_prior prior;
    prior.all_black = parse_rational(j.at("all_black").get<std::string>());
    int max_k = 0;
    for (const auto& [key, val] : j.at("cx_at").items()) {
        (void)val;
        max_k = std::max(max_k, std::stoi(key));
    }
    prior.truncation = j.value("truncation", max_k);
    if (prior.truncation < max_k)
        throw std::invalid_argument("truncation below the largest cx_at index");
    prior.cx_at.assign(prior.truncation, rational(0));
    for (const auto& [key, val] : j.at("cx_at").items())
        prior.cx_at[std::stoi(key) - 1] = parse_rational(val.get<std::string>());
    if (j.contains("tail")) {
        prior.tail = parse_rational(j.at("tail").get<std::string>());
    } else {
        rational assigned = prior.all_black;
        for (const auto& m : prior.cx_at) assigned += m;
        if (assigned > 1)
            throw std::invalid_argument("prior masses exceed 1");
        prior.tail = 1 - assigned;
    }
    validate_prior(prior);
    return prior;
}

inline json trace_to_json(const posterior_trace& tr) {
    json j;
    j["kind"] = "posterior_trace";
    switch (tr.truth.cls) {
        case world_class::all_black: j["truth"] = "all_black"; break;
        case world_class::cx_at: j["truth"] = "cx_at_" + std::to_string(tr.truth.k); break;
        case world_class::tail: j["truth"] = "tail"; break;
    }
    json pts = json::array();
    for (const auto& [len, mass] : tr.points)
        pts.push_back({{"length", len},
                       {"mass", to_string(mass)},
                       {"mass_decimal", to_decimal(mass, 6)}});
    j["points"] = pts;
    if (tr.null_conditioning_at) j["null_conditioning_at"] = *tr.null_conditioning_at;
    j["tail_mass_bound"] = to_string(tr.tail_mass_bound);
    return j;
}

inline json bayes_verdict_to_json(const bayes_verdict& v, const empirical_problem& raven) {
    json j;
    j["kind"] = "bayes_consistency";
    j["verdict"] = v.pass ? "pass" : "fail";
    j["threshold"] = to_string(v.threshold);
    j["horizon"] = v.horizon;
    j["tail_mass"] = to_string(v.tail_mass);
    j["worlds_checked"] = v.worlds_checked;
    j["quantification"] = v.quantification;
    json fails = json::array();
    for (const auto& f : v.failures)
        fails.push_back({{"world", world_to_json(f.world, raven)},
                         {"reason", f.reason},
                         {"trace", trace_to_json(f.trace)}});
    j["failures"] = fails;
    return j;
}

} // namespace convlab
