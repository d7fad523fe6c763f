#include "convlab/cli.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

using namespace convlab;
namespace fs = std::filesystem;

namespace {

struct run_result {
    int code;
    std::string out;
    std::string err;
};

run_result run_cli(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::string fixture(const std::string& name) {
    return std::string(CONVLAB_FIXTURE_DIR) + "/" + name;
}

struct temp_dir {
    fs::path path;
    explicit temp_dir(const std::string& tag) {
        path = fs::temp_directory_path() / ("convlab_test_" + tag);
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~temp_dir() { fs::remove_all(path); }
    std::string str() const { return path.string(); }
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE_MESSAGE(in.good(), "cannot open " << p.string());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

} // namespace

TEST_CASE("check: ordinary induction passes the stable pointwise combination") {
    temp_dir dir("check_pass");
    auto r = run_cli({"check", "--method", "ordinary_induction", "--modes", "stable_pointwise",
                      "--out", dir.str()});
    CHECK(r.code == cli::exit_pass);
    CHECK(r.out.find("PASS") != std::string::npos);
    auto j = json::parse(slurp(dir.path / "check_report.json"));
    CHECK(j.at("tool") == "convlab");
    CHECK(j.at("checks").size() == 1);
    CHECK(j.at("checks")[0].at("verdict") == "pass");
}

TEST_CASE("check: counterinduction fails with a witness world in the JSON") {
    temp_dir dir("check_fail");
    auto r = run_cli({"check", "--method", "occasional_counterinduction:2", "--modes",
                      "stable_pointwise", "--out", dir.str()});
    CHECK(r.code == cli::exit_violated);
    auto j = json::parse(slurp(dir.path / "check_report.json"));
    REQUIRE(j.at("checks").size() == 1);
    CHECK(j.at("checks")[0].at("verdict") == "fail");
    CHECK(j.at("checks")[0].contains("witness"));
    CHECK(j.at("checks")[0].at("witness").contains("prefix"));
    CHECK(j.at("checks")[0].at("witness").contains("cycle"));
}

TEST_CASE("check: methods from a file run against their declared problem") {
    temp_dir dir("check_file");
    auto r = run_cli({"check", fixture("first_observation.cvl"), "--modes", "uniform", "--out",
                      dir.str()});
    CHECK(r.code == cli::exit_pass);
    CHECK(r.out.find("copy_first on first_observation: uniform PASS") != std::string::npos);
    CHECK(r.out.find("modulus 1") != std::string::npos);
}

TEST_CASE("check: malformed file exits 3 with a span diagnostic") {
    temp_dir dir("check_parse");
    auto r = run_cli({"check", fixture("negative/bad_parse_error.cvl"), "--out", dir.str()});
    CHECK(r.code == cli::exit_parse);
    CHECK(r.err.find("parse-error") != std::string::npos);
    CHECK(r.err.find(":") != std::string::npos);   // file:line:column prefix
}

TEST_CASE("check: unknown method or mode is a usage error") {
    temp_dir dir("check_usage");
    CHECK(run_cli({"check", "--method", "nonexistent_method", "--out", dir.str()}).code ==
          cli::exit_usage);
    CHECK(run_cli({"check", "--method", "skeptic", "--modes", "sideways", "--out", dir.str()})
              .code == cli::exit_usage);
    CHECK(run_cli({"definitely-not-a-subcommand"}).code == cli::exit_usage);
}

TEST_CASE("achieve: raven selects pointwise convergence with stability") {
    temp_dir dir("achieve_raven");
    auto r = run_cli({"achieve", "raven", "--out", dir.str()});
    CHECK(r.code == cli::exit_pass);
    CHECK(r.out.find("highest achievable: pointwise convergence with stability") !=
          std::string::npos);
    auto j = json::parse(slurp(dir.path / "achievability.json"));
    CHECK(j.at("problems")[0].at("highest_achievable") == "stable_pointwise");
}

TEST_CASE("achieve: first observation reaches uniform with modulus 1") {
    temp_dir dir("achieve_first");
    auto r = run_cli({"achieve", fixture("first_observation.cvl"), "--out", dir.str()});
    CHECK(r.code == cli::exit_pass);
    CHECK(r.out.find("uniform convergence, modulus 1") != std::string::npos);
}

TEST_CASE("achieve: invalid problem file exits 3; unknown name exits 2") {
    temp_dir dir("achieve_bad");
    CHECK(run_cli({"achieve", fixture("negative/bad_unknown_label.cvl"), "--out", dir.str()})
              .code == cli::exit_parse);
    CHECK(run_cli({"achieve", "no_such_problem", "--out", dir.str()}).code == cli::exit_usage);
}

TEST_CASE("simulate consistency: auto n hits the hoeffding size and certifies") {
    temp_dir dir("sim_cons");
    auto r = run_cli({"simulate", "consistency", "--seed", "1", "--replicates", "400", "--out",
                      dir.str()});
    CHECK(r.code == cli::exit_pass);
    CHECK(r.out.find("n = 185") != std::string::npos);
    auto j = json::parse(slurp(dir.path / "consistency.json"));
    CHECK(j.at("n") == 185);
    CHECK(j.at("certified") == true);
    CHECK(j.at("prng") == std::string(prng_id));
    // CSV exists with one row per grid point plus header
    std::string csv = slurp(dir.path / "consistency.csv");
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 10);
}

TEST_CASE("simulate consistency: a tiny n fails certification") {
    temp_dir dir("sim_cons_fail");
    auto r = run_cli({"simulate", "consistency", "--seed", "1", "--replicates", "200", "--n",
                      "2", "--out", dir.str()});
    CHECK(r.code == cli::exit_violated);
}

TEST_CASE("simulate consistency: seed is required") {
    temp_dir dir("sim_seed");
    auto r = run_cli({"simulate", "consistency", "--out", dir.str()});
    CHECK(r.code == cli::exit_usage);
}

TEST_CASE("simulate progressiveness: adversarial test is flagged with its drop") {
    temp_dir dir("sim_prog");
    auto r = run_cli({"simulate", "progressiveness", "--seed", "2", "--replicates", "500",
                      "--test", "adversarial", "--n-grid",
                      "10,15,20,25,30,35,40,45,50", "--out", dir.str()});
    CHECK(r.code == cli::exit_violated);
    CHECK(r.out.find("max drop") != std::string::npos);
    auto j = json::parse(slurp(dir.path / "progressiveness.json"));
    CHECK(j.at("certified") == false);
    CHECK(parse_rational(j.at("max_drop").get<std::string>()) >= rational(1, 10));
}

TEST_CASE("simulate progressiveness: frequency test passes on even grid") {
    temp_dir dir("sim_prog_ok");
    auto r = run_cli({"simulate", "progressiveness", "--seed", "2", "--replicates", "2000",
                      "--out", dir.str()});
    CHECK(r.code == cli::exit_pass);
}

TEST_CASE("simulate bayes: geometric prior certifies at threshold 0.99") {
    temp_dir dir("sim_bayes");
    auto r = run_cli({"simulate", "bayes", "--max-prefix", "4", "--out", dir.str(), "--format",
                      "json,csv,svg"});
    CHECK(r.code == cli::exit_pass);
    auto j = json::parse(slurp(dir.path / "bayes.json"));
    CHECK(j.at("verdict") == "pass");
    CHECK(j.at("traces").size() == 9);   // all-black plus cx at 1..8
    std::string svg = slurp(dir.path / "bayes.svg");
    CHECK(std::count(svg.begin(), svg.end(), '<') > 5);
    CHECK(svg.find("<polyline") != std::string::npos);
    std::string csv = slurp(dir.path / "bayes.csv");
    CHECK(csv.rfind("world,length,mass_numerator", 0) == 0);
}

TEST_CASE("simulate bayes: a dogmatic prior file fails") {
    temp_dir dir("sim_bayes_fail");
    json prior = {{"all_black", "1/2"}, {"cx_at", {{"1", "1/2"}, {"2", "0"}}}, {"tail", "0"},
                  {"truncation", 2}};
    std::ofstream(dir.path / "prior.json") << prior.dump();
    auto r = run_cli({"simulate", "bayes", "--prior", (dir.path / "prior.json").string(),
                      "--max-prefix", "3", "--max-period", "1", "--horizon", "6", "--out",
                      dir.str()});
    CHECK(r.code == cli::exit_violated);
    CHECK(r.out.find("FAILED") != std::string::npos);
}

TEST_CASE("simulate bayes: unreadable prior file exits 3") {
    temp_dir dir("sim_bayes_parse");
    std::ofstream(dir.path / "prior.json") << "{not json";
    CHECK(run_cli({"simulate", "bayes", "--prior", (dir.path / "prior.json").string(), "--out",
                   dir.str()})
              .code == cli::exit_parse);
}

TEST_CASE("report: merging two consistency reports sums the row counts") {
    temp_dir dir("report_merge");
    fs::path a = dir.path / "a", b = dir.path / "b";
    REQUIRE(run_cli({"simulate", "consistency", "--seed", "3", "--replicates", "50", "--n",
                     "50", "--epsilon", "1/4", "--out", a.string()})
                .code == cli::exit_pass);
    REQUIRE(run_cli({"simulate", "consistency", "--seed", "4", "--replicates", "50", "--n",
                     "100", "--epsilon", "1/4", "--out", b.string()})
                .code == cli::exit_pass);
    auto r = run_cli({"report", (a / "consistency.json").string(),
                      (b / "consistency.json").string(), "--out", dir.str()});
    CHECK(r.code == cli::exit_pass);
    std::string csv = slurp(dir.path / "merged.csv");
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 19);   // header + 9 + 9
    std::string svg = slurp(dir.path / "merged.svg");
    CHECK(std::count(svg.begin(), svg.end(), '<') > 0);
    CHECK(svg.find("<polyline") != std::string::npos);
}

TEST_CASE("report: mixed report kinds exit 2") {
    temp_dir dir("report_mixed");
    fs::path a = dir.path / "a", b = dir.path / "b";
    REQUIRE(run_cli({"simulate", "consistency", "--seed", "3", "--replicates", "50", "--n",
                     "50", "--epsilon", "1/4", "--out", a.string()})
                .code == cli::exit_pass);
    REQUIRE(run_cli({"simulate", "bayes", "--max-prefix", "2", "--out", b.string()}).code ==
            cli::exit_pass);
    auto r = run_cli({"report", (a / "consistency.json").string(), (b / "bayes.json").string(),
                      "--out", dir.str()});
    CHECK(r.code == cli::exit_usage);
}

TEST_CASE("report: non-report JSON exits 2") {
    temp_dir dir("report_alien");
    std::ofstream(dir.path / "alien.json") << "{\"hello\": 1}";
    CHECK(run_cli({"report", (dir.path / "alien.json").string(), "--out", dir.str()}).code ==
          cli::exit_usage);
}

TEST_CASE("identical configs give byte-identical outputs") {
    temp_dir dir("repro");
    fs::path a = dir.path / "a", b = dir.path / "b";
    std::vector<std::string> base{"simulate", "consistency", "--seed", "9", "--replicates",
                                  "300", "--n", "100", "--epsilon", "1/4"};
    auto run_a = base;
    run_a.insert(run_a.end(), {"--out", a.string(), "--format", "json,csv,svg"});
    auto run_b = base;
    run_b.insert(run_b.end(), {"--out", b.string(), "--format", "json,csv,svg"});
    REQUIRE(run_cli(run_a).code == cli::exit_pass);
    REQUIRE(run_cli(run_b).code == cli::exit_pass);
    CHECK(slurp(a / "consistency.json") == slurp(b / "consistency.json"));
    CHECK(slurp(a / "consistency.csv") == slurp(b / "consistency.csv"));
    CHECK(slurp(a / "consistency.svg") == slurp(b / "consistency.svg"));
}

TEST_CASE("a JSON config file mirrors the flags, and flags win") {
    temp_dir dir("config_file");
    fs::path a = dir.path / "a", b = dir.path / "b";
    json cfg = {{"simulate",
                 {{"consistency",
                   {{"seed", 9}, {"replicates", 300}, {"n", 100}, {"epsilon", "1/4"},
                    {"out", a.string()}}}}}};
    std::ofstream(dir.path / "cfg.json") << cfg.dump();
    auto r = run_cli({"--config", (dir.path / "cfg.json").string(), "simulate", "consistency"});
    REQUIRE(r.code == cli::exit_pass);
    auto flags = run_cli({"simulate", "consistency", "--seed", "9", "--replicates", "300",
                          "--n", "100", "--epsilon", "1/4", "--out", b.string()});
    REQUIRE(flags.code == cli::exit_pass);
    CHECK(slurp(a / "consistency.json") == slurp(b / "consistency.json"));

    // a flag on the command line beats the config value
    fs::path c = dir.path / "c";
    auto over = run_cli({"--config", (dir.path / "cfg.json").string(), "simulate", "consistency",
                         "--out", c.string(), "--n", "50"});
    REQUIRE(over.code == cli::exit_pass);
    auto j = json::parse(slurp(c / "consistency.json"));
    CHECK(j.at("n") == 50);
}

TEST_CASE("config hash is stable across runs and sensitive to the config") {
    temp_dir dir("hash");
    fs::path a = dir.path / "a", b = dir.path / "b", c = dir.path / "c";
    run_cli({"simulate", "consistency", "--seed", "9", "--replicates", "100", "--n", "50",
             "--out", a.string()});
    run_cli({"simulate", "consistency", "--seed", "9", "--replicates", "100", "--n", "50",
             "--out", b.string()});
    run_cli({"simulate", "consistency", "--seed", "10", "--replicates", "100", "--n", "50",
             "--out", c.string()});
    auto ja = json::parse(slurp(a / "consistency.json"));
    auto jb = json::parse(slurp(b / "consistency.json"));
    auto jc = json::parse(slurp(c / "consistency.json"));
    CHECK(ja.at("config_hash") == jb.at("config_hash"));
    CHECK(ja.at("config_hash") != jc.at("config_hash"));
}
