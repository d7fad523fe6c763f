#pragma once

#include "convlab/convergence.hpp"
#include "convlab/dsl.hpp"
#include "convlab/json_io.hpp"
#include "convlab/method.hpp"
#include "convlab/oracle.hpp"
#include "convlab/problem.hpp"
#include "convlab/rational.hpp"
#include "convlab/statistics.hpp"
#include "convlab/version.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iomanip>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace convlab::cli {

// Exit codes, used consistently across subcommands.
inline constexpr int exit_pass = 0;       // all requested properties hold
inline constexpr int exit_violated = 1;   // a checked property failed
inline constexpr int exit_usage = 2;      // bad flags, names, or schemas
inline constexpr int exit_parse = 3;      // input files failed to parse

namespace detail {

inline std::string fnv1a_hex(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << h;
    return os.str();
}

/// Canonical key=value dump of a run's effective configuration. The hash is
/// over effective values, so flag, env, and config-file spellings of the
/// same run share a hash (and therefore byte-identical reports).
class config_digest {
public:
    explicit config_digest(std::string subcommand) : text_(std::move(subcommand)) {}

    template <typename T>
    config_digest& add(const std::string& key, const T& value) {
        std::ostringstream os;
        os << value;
        entries_.emplace(key, os.str());
        return *this;
    }

    std::string hash() const {
        std::string s = text_;
        for (const auto& [k, v] : entries_) s += "\n" + k + "=" + v;
        return fnv1a_hex(s);
    }

private:
    std::string text_;
    std::map<std::string, std::string> entries_;
};

inline json envelope(const std::string& kind, const config_digest& digest) {
    json j;
    j["tool"] = tool_name;
    j["version"] = tool_version;
    j["kind"] = kind;
    j["prng"] = prng_id;
    j["config_hash"] = digest.hash();
    return j;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    std::filesystem::create_directories(path.parent_path().empty() ? "." : path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
}

inline void write_json(const std::filesystem::path& path, const json& j) {
    write_text(path, j.dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// JSON config files for CLI11. Top-level keys map to main options; nested
// objects follow the subcommand tree, e.g. {"simulate": {"consistency":
// {"seed": 7}}}. Command-line flags always win over config values.

class json_config : public CLI::Config {
public:
    std::string to_config(const CLI::App* app, bool default_also, bool, std::string) const override {
        json j = app_to_json(app, default_also);
        return j.dump(2) + "\n";
    }

    std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
        json j;
        try {
            input >> j;
        } catch (const json::parse_error& e) {
            throw CLI::FileError(std::string("config is not valid JSON: ") + e.what());
        }
        std::vector<CLI::ConfigItem> items;
        walk(j, {}, items);
        return items;
    }

private:
    static std::string scalar(const json& v) {
        if (v.is_string()) return v.get<std::string>();
        if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
        return v.dump();
    }

    static void walk(const json& j, std::vector<std::string> parents,
                     std::vector<CLI::ConfigItem>& items) {
        if (!j.is_object())
            throw CLI::FileError("config must be a JSON object");
        for (const auto& [key, value] : j.items()) {
            if (value.is_object()) {
                auto deeper = parents;
                deeper.push_back(key);
                walk(value, deeper, items);
            } else {
                CLI::ConfigItem item;
                item.parents = parents;
                item.name = key;
                if (value.is_array())
                    for (const auto& e : value) item.inputs.push_back(scalar(e));
                else
                    item.inputs.push_back(scalar(value));
                items.push_back(std::move(item));
            }
        }
    }

    static json app_to_json(const CLI::App* app, bool default_also) {
        json j = json::object();
        for (const CLI::Option* opt : app->get_options()) {
            if (opt->get_lnames().empty() || !opt->get_configurable()) continue;
            if (opt->count() > 0)
                j[opt->get_lnames()[0]] = opt->results().size() == 1
                                              ? json(opt->results()[0])
                                              : json(opt->results());
            else if (default_also && !opt->get_default_str().empty())
                j[opt->get_lnames()[0]] = opt->get_default_str();
        }
        for (const CLI::App* sub : app->get_subcommands({})) {
            json inner = app_to_json(sub, default_also);
            if (!inner.empty()) j[sub->get_name()] = inner;
        }
        return j;
    }
};

// ---------------------------------------------------------------------------
// Shared input loading

struct loaded_inputs {
    std::vector<empirical_problem> problems;   // file problems first, then builtins
    std::vector<inference_method> methods;
    std::size_t from_files = 0;   // how many leading problems came from the files
};

/// Parses and elaborates .cvl files; prints diagnostics with spans to err.
inline std::optional<loaded_inputs> load_files(const std::vector<std::string>& files,
                                               std::ostream& err) {
    loaded_inputs in;
    for (const auto& file : files) {
        std::ifstream stream(file, std::ios::binary);
        if (!stream) {
            err << file << ": cannot open file\n";
            return std::nullopt;
        }
        std::ostringstream text;
        text << stream.rdbuf();
        auto res = dsl::parse(text.str());
        if (!res.ok()) {
            for (const auto& d : res.diagnostics)
                err << file << ":" << d.span.line << ":" << d.span.column << ": " << d.code
                    << ": " << d.message << "\n";
            return std::nullopt;
        }
        dsl::elaborated elab;
        try {
            elab = dsl::elaborate(*res.doc);
        } catch (const input_error& e) {
            err << file << ": " << e.what() << "\n";
            return std::nullopt;
        }
        for (auto& p : elab.problems) {
            auto violations = validate_problem(p);
            if (!violations.empty()) {
                for (const auto& v : violations)
                    err << file << ": problem '" << p.name << "': " << v.code << ": "
                        << v.message << "\n";
                return std::nullopt;
            }
            in.problems.push_back(std::move(p));
        }
        for (auto& m : elab.methods) in.methods.push_back(std::move(m));
    }
    in.from_files = in.problems.size();
    for (const auto& bp : dsl::builtin_problems()) {
        bool shadowed = false;
        for (const auto& p : in.problems)
            if (p.name == bp.name) shadowed = true;
        if (!shadowed) in.problems.push_back(bp);
    }
    return in;
}

inline const empirical_problem* find_problem(const loaded_inputs& in, const std::string& name) {
    for (const auto& p : in.problems)
        if (p.name == name) return &p;
    return nullptr;
}

/// Builtin method specs: "ordinary_induction", "skeptic",
/// "delayed_induction:K", "occasional_counterinduction:1,3".
inline std::optional<inference_method> builtin_method(const std::string& spec) {
    auto colon = spec.find(':');
    std::string head = spec.substr(0, colon);
    std::string arg = colon == std::string::npos ? "" : spec.substr(colon + 1);
    try {
        if (head == "ordinary_induction" && arg.empty()) return ordinary_induction();
        if (head == "skeptic" && arg.empty()) return skeptic();
        if (head == "delayed_induction" && !arg.empty()) return delayed_induction(std::stoi(arg));
        if (head == "occasional_counterinduction" && !arg.empty()) {
            std::set<int> flips;
            std::istringstream is(arg);
            std::string piece;
            while (std::getline(is, piece, ',')) flips.insert(std::stoi(piece));
            return occasional_counterinduction(flips);
        }
    } catch (const std::exception&) {
        return std::nullopt;
    }
    return std::nullopt;
}

inline std::string mode_display(const std::string& mode, std::optional<int> modulus = {}) {
    if (mode == "uniform")
        return modulus ? "uniform convergence, modulus " + std::to_string(*modulus)
                       : "uniform convergence";
    if (mode == "stable_pointwise") return "pointwise convergence with stability";
    if (mode == "pointwise") return "pointwise convergence";
    if (mode == "stability") return "stability";
    return mode;
}

inline std::vector<rational> parse_rational_list(const std::string& text) {
    std::vector<rational> out;
    std::istringstream is(text);
    std::string piece;
    while (std::getline(is, piece, ',')) out.push_back(parse_rational(piece));
    return out;
}

inline std::vector<int> parse_int_list(const std::string& text) {
    std::vector<int> out;
    std::istringstream is(text);
    std::string piece;
    while (std::getline(is, piece, ',')) out.push_back(std::stoi(piece));
    return out;
}

inline std::set<std::string> parse_formats(const std::string& text) {
    std::set<std::string> out;
    std::istringstream is(text);
    std::string piece;
    while (std::getline(is, piece, ',')) out.insert(piece);
    return out;
}

// ---------------------------------------------------------------------------
// Deterministic SVG line charts: plain generated markup, fixed palette.

struct chart_series {
    std::string label;
    std::vector<std::pair<double, double>> points;
};

inline std::string svg_chart(const std::string& title, const std::string& x_label,
                             const std::string& y_label,
                             const std::vector<chart_series>& series) {
    const double width = 640, height = 400, left = 70, right = 20, top = 40, bottom = 50;
    double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
    bool first = true;
    for (const auto& s : series)
        for (const auto& [x, y] : s.points) {
            if (first || x < xmin) xmin = x;
            if (first || x > xmax) xmax = x;
            if (first || y < ymin) ymin = y;
            if (first || y > ymax) ymax = y;
            first = false;
        }
    if (xmax == xmin) xmax = xmin + 1;
    if (ymax == ymin) ymax = ymin + 1;
    auto fx = [&](double x) {
        return left + (x - xmin) / (xmax - xmin) * (width - left - right);
    };
    auto fy = [&](double y) {
        return height - bottom - (y - ymin) / (ymax - ymin) * (height - top - bottom);
    };
    auto num = [](double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.2f", v);
        return std::string(buf);
    };
    static const char* palette[] = {"#1b6ca8", "#c0392b", "#27ae60", "#8e44ad",
                                    "#d68910", "#16a085", "#7f8c8d", "#2c3e50"};
    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
       << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
    os << "<text x=\"" << width / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">"
       << title << "</text>\n";
    os << "<line x1=\"" << left << "\" y1=\"" << height - bottom << "\" x2=\"" << width - right
       << "\" y2=\"" << height - bottom << "\" stroke=\"black\"/>\n";
    os << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\""
       << height - bottom << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << width / 2 << "\" y=\"" << height - 12
       << "\" text-anchor=\"middle\" font-size=\"12\">" << x_label << "</text>\n";
    os << "<text x=\"16\" y=\"" << height / 2 << "\" text-anchor=\"middle\" font-size=\"12\" "
       << "transform=\"rotate(-90 16 " << height / 2 << ")\">" << y_label << "</text>\n";
    os << "<text x=\"" << left - 6 << "\" y=\"" << fy(ymin) + 4
       << "\" text-anchor=\"end\" font-size=\"10\">" << num(ymin) << "</text>\n";
    os << "<text x=\"" << left - 6 << "\" y=\"" << fy(ymax) + 4
       << "\" text-anchor=\"end\" font-size=\"10\">" << num(ymax) << "</text>\n";
    os << "<text x=\"" << fx(xmin) << "\" y=\"" << height - bottom + 16
       << "\" text-anchor=\"middle\" font-size=\"10\">" << num(xmin) << "</text>\n";
    os << "<text x=\"" << fx(xmax) << "\" y=\"" << height - bottom + 16
       << "\" text-anchor=\"middle\" font-size=\"10\">" << num(xmax) << "</text>\n";
    for (std::size_t i = 0; i < series.size(); ++i) {
        const char* color = palette[i % (sizeof palette / sizeof palette[0])];
        os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
        for (const auto& [x, y] : series[i].points) os << num(fx(x)) << "," << num(fy(y)) << " ";
        os << "\"/>\n";
        os << "<text x=\"" << width - right - 4 << "\" y=\"" << top + 14 * (i + 1)
           << "\" text-anchor=\"end\" font-size=\"10\" fill=\"" << color << "\">"
           << series[i].label << "</text>\n";
    }
    os << "</svg>\n";
    return os.str();
}

inline std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

// ---------------------------------------------------------------------------
// CSV renderers for each report kind (reused by simulate and report).

inline std::string consistency_csv_header() { return "p,n,replicates,hits,coverage,coverage_decimal"; }

inline void consistency_csv_rows(const json& report, const std::string& source,
                                 std::vector<std::string>& rows, bool with_source) {
    for (const auto& row : report.at("per_p")) {
        std::string line;
        if (with_source) line += csv_escape(source) + ",";
        line += row.at("p").get<std::string>() + "," +
                std::to_string(report.at("n").get<long>()) + "," +
                std::to_string(report.at("replicates").get<long>()) + "," +
                std::to_string(row.at("hits").get<long>()) + "," +
                row.at("coverage").get<std::string>() + "," +
                row.at("coverage_decimal").get<std::string>();
        rows.push_back(std::move(line));
    }
}

inline std::string progressiveness_csv_header() {
    return "n,replicates,hits,chance_of_truth,chance_decimal";
}

inline void progressiveness_csv_rows(const json& report, const std::string& source,
                                     std::vector<std::string>& rows, bool with_source) {
    for (const auto& row : report.at("curve")) {
        std::string line;
        if (with_source) line += csv_escape(source) + ",";
        line += std::to_string(row.at("n").get<int>()) + "," +
                std::to_string(report.at("replicates").get<long>()) + "," +
                std::to_string(row.at("hits").get<long>()) + "," +
                row.at("chance_of_truth").get<std::string>() + "," +
                row.at("chance_decimal").get<std::string>();
        rows.push_back(std::move(line));
    }
}

inline std::string bayes_csv_header() {
    return "world,length,mass_numerator,mass_denominator,mass_decimal";
}

inline void bayes_csv_rows(const json& report, const std::string& source,
                           std::vector<std::string>& rows, bool with_source) {
    for (const auto& entry : report.at("traces")) {
        std::string world = entry.at("label").get<std::string>();
        for (const auto& pt : entry.at("trace").at("points")) {
            rational mass = parse_rational(pt.at("mass").get<std::string>());
            std::string line;
            if (with_source) line += csv_escape(source) + ",";
            line += csv_escape(world) + "," + std::to_string(pt.at("length").get<int>()) + "," +
                    boost::multiprecision::numerator(mass).str() + "," +
                    boost::multiprecision::denominator(mass).str() + "," +
                    pt.at("mass_decimal").get<std::string>();
            rows.push_back(std::move(line));
        }
    }
}

inline std::vector<chart_series> chart_for(const json& report, const std::string& label) {
    std::vector<chart_series> series;
    std::string kind = report.at("kind").get<std::string>();
    if (kind == "consistency") {
        chart_series s{label + " (n=" + std::to_string(report.at("n").get<long>()) + ")", {}};
        for (const auto& row : report.at("per_p"))
            s.points.emplace_back(parse_rational(row.at("p").get<std::string>()).convert_to<double>(),
                                  std::stod(row.at("coverage_decimal").get<std::string>()));
        series.push_back(std::move(s));
    } else if (kind == "progressiveness") {
        chart_series s{label, {}};
        for (const auto& row : report.at("curve"))
            s.points.emplace_back(row.at("n").get<int>(),
                                  std::stod(row.at("chance_decimal").get<std::string>()));
        series.push_back(std::move(s));
    } else if (kind == "bayes_consistency") {
        for (const auto& entry : report.at("traces")) {
            chart_series s{label + " " + entry.at("label").get<std::string>(), {}};
            for (const auto& pt : entry.at("trace").at("points"))
                s.points.emplace_back(pt.at("length").get<int>(),
                                      std::stod(pt.at("mass_decimal").get<std::string>()));
            series.push_back(std::move(s));
        }
    }
    return series;
}

} // namespace detail

// ---------------------------------------------------------------------------
// Subcommand bodies. Each returns an exit code and writes machine JSON to
// files under --out, human summaries to `out`, and diagnostics to `err`.

inline int cmd_check(const std::vector<std::string>& files,
                     std::vector<std::string> method_names,
                     const std::vector<std::string>& modes, const std::string& out_dir,
                     std::ostream& out, std::ostream& err) {
    static const std::set<std::string> known_modes{"pointwise", "stability", "uniform",
                                                   "stable_pointwise"};
    for (const auto& mode : modes)
        if (!known_modes.count(mode)) {
            err << "unknown mode '" << mode << "'\n";
            return exit_usage;
        }
    auto loaded = detail::load_files(files, err);
    if (!loaded) return exit_parse;

    if (method_names.empty())
        for (const auto& m : loaded->methods) method_names.push_back(m.name);
    if (method_names.empty()) {
        err << "no methods to check: pass --method or a file declaring methods\n";
        return exit_usage;
    }

    std::vector<inference_method> methods;
    for (const auto& name : method_names) {
        const inference_method* from_file = nullptr;
        for (const auto& m : loaded->methods)
            if (m.name == name) from_file = &m;
        if (from_file) {
            methods.push_back(*from_file);
        } else if (auto bm = detail::builtin_method(name)) {
            methods.push_back(std::move(*bm));
        } else {
            err << "unknown method '" << name << "'\n";
            return exit_usage;
        }
    }

    detail::config_digest digest("check");
    for (std::size_t i = 0; i < files.size(); ++i) digest.add("file" + std::to_string(i), files[i]);
    for (std::size_t i = 0; i < method_names.size(); ++i)
        digest.add("method" + std::to_string(i), method_names[i]);
    for (std::size_t i = 0; i < modes.size(); ++i) digest.add("mode" + std::to_string(i), modes[i]);

    json report = detail::envelope("check", digest);
    json checks = json::array();
    bool any_fail = false;
    for (const auto& m : methods) {
        const empirical_problem* p = detail::find_problem(*loaded, m.problem_name);
        if (!p) {
            err << "method '" << m.name << "' targets unknown problem '" << m.problem_name
                << "'\n";
            return exit_usage;
        }
        for (const auto& mode : modes) {
            convergence_verdict v = check_mode(mode, m, *p);
            if (!v.pass) any_fail = true;
            out << m.name << " on " << p->name << ": " << mode << " "
                << (v.pass ? "PASS" : "FAIL");
            if (v.pass && v.modulus) out << " (modulus " << *v.modulus << ")";
            out << "\n";
            checks.push_back(verdict_to_json(v, m.name, *p));
        }
    }
    report["checks"] = checks;
    detail::write_json(std::filesystem::path(out_dir) / "check_report.json", report);
    return any_fail ? exit_violated : exit_pass;
}

inline int cmd_achieve(const std::string& target, const std::string& out_dir, std::ostream& out,
                       std::ostream& err) {
    std::vector<empirical_problem> problems;
    if (std::filesystem::exists(target)) {
        auto loaded = detail::load_files({target}, err);
        if (!loaded) return exit_parse;
        // only problems declared in the file (builtins are appended after them)
        for (std::size_t i = 0; i < loaded->from_files; ++i)
            problems.push_back(loaded->problems[i]);
        if (problems.empty()) {
            err << target << ": no problem declarations\n";
            return exit_parse;
        }
    } else {
        const empirical_problem* bp = nullptr;
        for (const auto& p : dsl::builtin_problems())
            if (p.name == target) bp = &p;
        if (!bp) {
            err << "'" << target << "' is neither a file nor a built-in problem\n";
            return exit_usage;
        }
        problems.push_back(*bp);
    }

    detail::config_digest digest("achieve");
    digest.add("target", target);
    json report = detail::envelope("achievability", digest);
    json entries = json::array();
    bool all_have_highest = true;
    for (const auto& p : problems) {
        achievability_report rep = achievability(p);
        std::optional<int> modulus;
        std::string witness_name;
        for (const auto& e : rep.modes)
            if (e.mode == rep.highest) {
                modulus = e.modulus;
                if (e.witness) witness_name = e.witness->name;
            }
        if (rep.highest.empty()) {
            all_have_highest = false;
            out << p.name << ": no mode in the hierarchy is achievable by the constructed"
                   " witnesses\n";
        } else {
            out << p.name << ": highest achievable: "
                << detail::mode_display(rep.highest, modulus);
            if (!witness_name.empty()) out << " (witness method: " << witness_name << ")";
            out << "\n";
        }
        entries.push_back(achievability_to_json(rep, p));
    }
    report["problems"] = entries;
    detail::write_json(std::filesystem::path(out_dir) / "achievability.json", report);
    return all_have_highest ? exit_pass : exit_violated;
}

struct simulate_options {
    std::uint64_t seed = 0;
    long replicates = 1000;
    std::string epsilon = "1/10";
    std::string delta = "1/20";
    std::string threshold = "99/100";
    std::string margin = "1/100";
    std::string drop = "1/20";
    int n = 0;   // 0 = derive from the Hoeffding bound
    std::string p_grid = "0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9";
    std::string p = "3/5";
    std::string n_grid = "10,20,30,40,50,60,70,80,90,100,110,120,130,140,150,160,170,180,190,200";
    std::string test = "frequency";
    std::string prior = "geometric";
    int truncation = 64;
    int horizon = 12;
    int max_prefix = 6;
    int max_period = 2;
    std::string out_dir = ".";
    std::string format = "json,csv";
};

inline int cmd_simulate_consistency(const simulate_options& opt, std::ostream& out,
                                    std::ostream& err) {
    consistency_spec spec{parse_rational(opt.epsilon), parse_rational(opt.delta)};
    rational margin = parse_rational(opt.margin);
    if (!spec.valid()) {
        err << "epsilon must be > 0 and delta in (0,1)\n";
        return exit_usage;
    }
    int n = opt.n > 0 ? opt.n : hoeffding_sample_size(spec);
    auto grid = detail::parse_rational_list(opt.p_grid);
    auto rep = monte_carlo_consistency(frequency_estimate, grid, spec, n, opt.replicates,
                                       opt.seed);

    detail::config_digest digest("simulate consistency");
    digest.add("seed", opt.seed)
        .add("replicates", opt.replicates)
        .add("epsilon", to_string(spec.epsilon))
        .add("delta", to_string(spec.delta))
        .add("margin", to_string(margin))
        .add("n", n)
        .add("p_grid", opt.p_grid);

    rational target = 1 - spec.delta - margin;
    bool certified = rep.min_coverage() >= target;
    json j = detail::envelope("consistency", digest);
    j.update(consistency_report_to_json(rep));
    j["certified"] = certified;
    j["coverage_target"] = to_string(target);

    auto formats = detail::parse_formats(opt.format);
    std::filesystem::path dir(opt.out_dir);
    if (formats.count("json")) detail::write_json(dir / "consistency.json", j);
    if (formats.count("csv")) {
        std::vector<std::string> rows;
        detail::consistency_csv_rows(j, "", rows, false);
        std::string csv = detail::consistency_csv_header() + "\n";
        for (const auto& r : rows) csv += r + "\n";
        detail::write_text(dir / "consistency.csv", csv);
    }
    if (formats.count("svg"))
        detail::write_text(dir / "consistency.svg",
                           detail::svg_chart("estimator coverage", "p", "coverage",
                                             detail::chart_for(j, "coverage")));

    out << "n = " << n << ", replicates = " << opt.replicates << ", min coverage = "
        << to_decimal(rep.min_coverage(), 6) << " (target " << to_decimal(target, 6) << ")\n";
    out << (certified ? "certified consistent" : "consistency not certified") << "\n";
    return certified ? exit_pass : exit_violated;
}

inline int cmd_simulate_progressiveness(const simulate_options& opt, std::ostream& out,
                                        std::ostream& err) {
    test_method test;
    if (opt.test == "frequency")
        test = frequency_threshold_test();
    else if (opt.test == "adversarial")
        test = odd_n_adversarial_test();
    else if (opt.test == "constant:0")
        test = constant_test(0);
    else if (opt.test == "constant:1")
        test = constant_test(1);
    else {
        err << "unknown test '" << opt.test << "'\n";
        return exit_usage;
    }
    rational p = parse_rational(opt.p);
    rational drop = parse_rational(opt.drop);
    int truth = p > rational(1, 2) ? 0 : 1;
    auto grid = detail::parse_int_list(opt.n_grid);
    auto rep = progressiveness_curve(test, urn{p}, truth, grid, opt.replicates, opt.seed);

    detail::config_digest digest("simulate progressiveness");
    digest.add("seed", opt.seed)
        .add("replicates", opt.replicates)
        .add("p", to_string(p))
        .add("drop", to_string(drop))
        .add("n_grid", opt.n_grid)
        .add("test", opt.test);

    bool certified = rep.max_drop <= drop;
    json j = detail::envelope("progressiveness", digest);
    j.update(progressiveness_report_to_json(rep));
    j["certified"] = certified;
    j["drop_threshold"] = to_string(drop);

    auto formats = detail::parse_formats(opt.format);
    std::filesystem::path dir(opt.out_dir);
    if (formats.count("json")) detail::write_json(dir / "progressiveness.json", j);
    if (formats.count("csv")) {
        std::vector<std::string> rows;
        detail::progressiveness_csv_rows(j, "", rows, false);
        std::string csv = detail::progressiveness_csv_header() + "\n";
        for (const auto& r : rows) csv += r + "\n";
        detail::write_text(dir / "progressiveness.csv", csv);
    }
    if (formats.count("svg"))
        detail::write_text(dir / "progressiveness.svg",
                           detail::svg_chart("chance of outputting the truth", "n",
                                             "chance of truth", detail::chart_for(j, opt.test)));

    out << "test: " << test.description << "\n";
    out << "max drop = " << to_decimal(rep.max_drop, 6) << " (threshold "
        << to_decimal(drop, 6) << ")\n";
    out << (certified ? "progressive within threshold" : "progressiveness violated") << "\n";
    return certified ? exit_pass : exit_violated;
}

inline int cmd_simulate_bayes(const simulate_options& opt, std::ostream& out, std::ostream& err) {
    discrete_prior prior;
    if (opt.prior == "geometric") {
        prior = geometric_prior(opt.truncation);
    } else {
        std::ifstream in(opt.prior, std::ios::binary);
        if (!in) {
            err << opt.prior << ": cannot open prior file\n";
            return exit_parse;
        }
        try {
            json pj;
            in >> pj;
            prior = prior_from_json(pj);
        } catch (const std::exception& e) {
            err << opt.prior << ": " << e.what() << "\n";
            return exit_parse;
        }
    }
    rational threshold = parse_rational(opt.threshold);
    bayes_verdict verdict =
        consistency_verdict(prior, opt.horizon, threshold, opt.max_prefix, opt.max_period);

    detail::config_digest digest("simulate bayes");
    digest.add("prior", opt.prior)
        .add("truncation", prior.truncation)
        .add("threshold", to_string(threshold))
        .add("horizon", opt.horizon)
        .add("max_prefix", opt.max_prefix)
        .add("max_period", opt.max_period);

    const empirical_problem raven = raven_problem();
    json j = detail::envelope("bayes_consistency", digest);
    j.update(bayes_verdict_to_json(verdict, raven));
    json traces = json::array();
    {
        posterior_trace tr = bayes_consistency_sim(prior, {{}, {obs_black}}, opt.horizon);
        traces.push_back({{"label", "all_black"},
                          {"world", world_to_json({{}, {obs_black}}, raven)},
                          {"trace", trace_to_json(tr)}});
    }
    for (int k = 1; k <= std::min(8, prior.truncation); ++k) {
        evidence_sequence pre(k - 1, obs_black);
        pre.push_back(obs_nonblack);
        ultimately_periodic_world w{pre, {obs_black}};
        posterior_trace tr = bayes_consistency_sim(prior, w, opt.horizon);
        traces.push_back({{"label", "cx_at_" + std::to_string(k)},
                          {"world", world_to_json(w, raven)},
                          {"trace", trace_to_json(tr)}});
    }
    j["traces"] = traces;

    auto formats = detail::parse_formats(opt.format);
    std::filesystem::path dir(opt.out_dir);
    if (formats.count("json")) detail::write_json(dir / "bayes.json", j);
    if (formats.count("csv")) {
        std::vector<std::string> rows;
        detail::bayes_csv_rows(j, "", rows, false);
        std::string csv = detail::bayes_csv_header() + "\n";
        for (const auto& r : rows) csv += r + "\n";
        detail::write_text(dir / "bayes.csv", csv);
    }
    if (formats.count("svg"))
        detail::write_text(dir / "bayes.svg",
                           detail::svg_chart("posterior on the truth", "evidence length",
                                             "posterior mass", detail::chart_for(j, "")));

    out << "worlds checked: " << verdict.worlds_checked << ", threshold "
        << to_decimal(threshold, 6) << " by horizon " << opt.horizon << "\n";
    if (verdict.pass) {
        out << "bayesian consistency certified (tail mass bound "
            << to_decimal(verdict.tail_mass, 9) << ")\n";
    } else {
        out << "bayesian consistency FAILED on " << verdict.failures.size() << " world(s); first: "
            << verdict.failures.front().reason << "\n";
    }
    return verdict.pass ? exit_pass : exit_violated;
}

inline int cmd_report(const std::vector<std::string>& inputs, const std::string& out_dir,
                      std::ostream& out, std::ostream& err) {
    std::vector<std::pair<std::string, json>> reports;
    std::string kind;
    for (const auto& path : inputs) {
        std::ifstream in(path, std::ios::binary);
        json j;
        if (!in) {
            err << path << ": cannot open file\n";
            return exit_usage;
        }
        try {
            in >> j;
        } catch (const json::parse_error& e) {
            err << path << ": not valid JSON: " << e.what() << "\n";
            return exit_usage;
        }
        if (!j.is_object() || !j.contains("kind") || j.value("tool", "") != tool_name) {
            err << path << ": not a " << tool_name << " report\n";
            return exit_usage;
        }
        std::string k = j.at("kind").get<std::string>();
        if (kind.empty()) kind = k;
        if (k != kind) {
            err << path << ": kind '" << k << "' does not match '" << kind << "'\n";
            return exit_usage;
        }
        reports.emplace_back(std::filesystem::path(path).stem().string(), j);
    }
    std::string header;
    if (kind == "consistency")
        header = "source," + detail::consistency_csv_header();
    else if (kind == "progressiveness")
        header = "source," + detail::progressiveness_csv_header();
    else if (kind == "bayes_consistency")
        header = "source," + detail::bayes_csv_header();
    else {
        err << "kind '" << kind << "' has no merged report form\n";
        return exit_usage;
    }

    std::vector<std::string> rows;
    std::vector<detail::chart_series> series;
    for (const auto& [label, j] : reports) {
        if (kind == "consistency")
            detail::consistency_csv_rows(j, label, rows, true);
        else if (kind == "progressiveness")
            detail::progressiveness_csv_rows(j, label, rows, true);
        else
            detail::bayes_csv_rows(j, label, rows, true);
        for (auto& s : detail::chart_for(j, label)) series.push_back(std::move(s));
    }
    std::string csv = header + "\n";
    for (const auto& r : rows) csv += r + "\n";
    std::filesystem::path dir(out_dir);
    detail::write_text(dir / "merged.csv", csv);
    std::string y = kind == "consistency" ? "coverage"
                    : kind == "progressiveness" ? "chance of truth" : "posterior mass";
    std::string x = kind == "consistency" ? "p"
                    : kind == "progressiveness" ? "n" : "evidence length";
    detail::write_text(dir / "merged.svg", detail::svg_chart("merged " + kind, x, y, series));
    out << "merged " << reports.size() << " " << kind << " report(s), " << rows.size()
        << " rows\n";
    return exit_pass;
}

// ---------------------------------------------------------------------------
// Entry point: builds the CLI11 app and dispatches. Exposed as a function of
// an argument vector so tests can drive it in process.

inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"convergentist evaluation of inference methods"};
    app.set_config("--config", "", "JSON config file mirroring the flags (flags win)");
    app.config_formatter(std::make_shared<detail::json_config>());

    std::vector<std::string> files, method_names;
    std::vector<std::string> modes{"pointwise", "stability", "uniform", "stable_pointwise"};
    std::string out_dir = ".";
    std::string achieve_target;
    std::vector<std::string> report_inputs;
    simulate_options sim;

    CLI::App* check = app.add_subcommand("check", "run convergence-mode checks");
    check->add_option("files", files, "problem/method files (.cvl)");
    check->add_option("--method", method_names,
                      "method names (declared or built-in specs like delayed_induction:3)");
    check->add_option("--modes", modes, "modes to check")->capture_default_str();
    check->add_option("--out", out_dir, "output directory")->capture_default_str()->envname("CONVLAB_OUT");

    CLI::App* achieve = app.add_subcommand("achieve", "report achievable convergence modes");
    achieve->add_option("target", achieve_target, "problem file or built-in problem name")
        ->required();
    achieve->add_option("--out", out_dir, "output directory")->capture_default_str()->envname("CONVLAB_OUT");

    CLI::App* simulate = app.add_subcommand("simulate", "statistical and Bayesian simulations");
    simulate->require_subcommand(1);
    CLI::App* s_cons = simulate->add_subcommand("consistency", "Monte Carlo estimator coverage");
    CLI::App* s_prog = simulate->add_subcommand("progressiveness", "chance-of-truth curves");
    CLI::App* s_bayes = simulate->add_subcommand("bayes", "exact posterior convergence");

    for (CLI::App* s : {s_cons, s_prog}) {
        s->add_option("--seed", sim.seed, "master PRNG seed")
            ->required()
            ->envname("CONVLAB_SEED");
        s->add_option("--replicates", sim.replicates, "Monte Carlo replicates")->capture_default_str()
            ->envname("CONVLAB_REPLICATES");
    }
    for (CLI::App* s : {s_cons, s_prog, s_bayes}) {
        s->add_option("--out", sim.out_dir, "output directory")->capture_default_str()->envname("CONVLAB_OUT");
        s->add_option("--format", sim.format, "comma-separated: json,csv,svg")->capture_default_str()
            ->envname("CONVLAB_FORMAT");
    }
    s_cons->add_option("--epsilon", sim.epsilon, "closeness threshold")->capture_default_str()
        ->envname("CONVLAB_EPSILON");
    s_cons->add_option("--delta", sim.delta, "one minus the confidence level")->capture_default_str()
        ->envname("CONVLAB_DELTA");
    s_cons->add_option("--margin", sim.margin, "allowed Monte Carlo slack on coverage")->capture_default_str();
    s_cons->add_option("--n", sim.n, "sample size (0 = Hoeffding bound)")->capture_default_str();
    s_cons->add_option("--p-grid", sim.p_grid, "comma-separated true proportions")->capture_default_str();

    s_prog->add_option("--p", sim.p, "true proportion")->capture_default_str();
    s_prog->add_option("--n-grid", sim.n_grid, "comma-separated sample sizes")->capture_default_str();
    s_prog->add_option("--test", sim.test,
                       "frequency | adversarial | constant:0 | constant:1")->capture_default_str();
    s_prog->add_option("--drop", sim.drop, "maximum tolerated drop")->capture_default_str();

    s_bayes->add_option("--prior", sim.prior, "'geometric' or a prior JSON file")->capture_default_str();
    s_bayes->add_option("--k", sim.truncation, "geometric prior truncation")->capture_default_str();
    s_bayes->add_option("--horizon", sim.horizon, "evidence lengths to trace")->capture_default_str();
    s_bayes->add_option("--threshold", sim.threshold, "posterior mass to certify")->capture_default_str()
        ->envname("CONVLAB_THRESHOLD");
    s_bayes->add_option("--max-prefix", sim.max_prefix, "world prefix bound")->capture_default_str();
    s_bayes->add_option("--max-period", sim.max_period, "world period bound")->capture_default_str();

    CLI::App* report = app.add_subcommand("report", "merge JSON reports into CSV/SVG");
    report->add_option("inputs", report_inputs, "report JSON files")->required();
    report->add_option("--out", out_dir, "output directory")->capture_default_str()->envname("CONVLAB_OUT");

    app.require_subcommand(1);

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return exit_pass;
    } catch (const CLI::ParseError& e) {
        err << e.what() << "\n";
        return exit_usage;
    }

    try {
        if (app.got_subcommand(check)) return cmd_check(files, method_names, modes, out_dir, out, err);
        if (app.got_subcommand(achieve)) return cmd_achieve(achieve_target, out_dir, out, err);
        if (app.got_subcommand(simulate)) {
            if (simulate->got_subcommand(s_cons)) return cmd_simulate_consistency(sim, out, err);
            if (simulate->got_subcommand(s_prog)) return cmd_simulate_progressiveness(sim, out, err);
            return cmd_simulate_bayes(sim, out, err);
        }
        return cmd_report(report_inputs, out_dir, out, err);
    } catch (const input_error& e) {
        err << e.what() << "\n";
        return exit_parse;
    } catch (const std::invalid_argument& e) {
        err << e.what() << "\n";
        return exit_usage;
    } catch (const std::exception& e) {
        err << e.what() << "\n";
        return exit_usage;
    }
}

} // namespace convlab::cli
