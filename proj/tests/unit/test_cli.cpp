#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "pioneer/cli.hpp"
#include "pioneer/error.hpp"
#include "pioneer/experiments.hpp"
#include "pioneer/path.hpp"

using namespace pioneer;

namespace {

struct Run {
    int code;
    std::string out, err;
};

Run run(std::vector<std::string> args) {
    args.insert(args.begin(), "pioneer");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = cli_main(int(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::string temp_path(const std::string& tag) {
    auto p = std::filesystem::temp_directory_path() / ("pioneer_cli_" + tag + "_" + std::to_string(::getpid()));
    std::filesystem::remove(p);
    return p.string();
}

std::string slurp(const std::string& path) {
    std::ifstream f(path);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

int lines(const std::string& s) { return int(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST_CASE("cli usage errors") {
    CHECK(run({}).code == 2);
    CHECK(run({"frobnicate"}).code == 2);
    CHECK(run({"exponent", "closed", "--bogus"}).code == 2);
    CHECK(run({"--help"}).code == 0);
    Run r = run({"experiment", "existence-decay", "--kind", "ptp", "--trials", "0"});
    CHECK(r.code == int(ErrorCode::config));
    CHECK(r.err.find("error:") == 0);
    CHECK(run({"experiment", "existence-decay", "--kind", "ptp", "--delta", "0.1"}).code == int(ErrorCode::config));
}

TEST_CASE("cli exponents") {
    Run r = run({"exponent", "closed", "--kind", "disconnection", "--k", "5"});
    REQUIRE(r.code == 0);
    CHECK(r.out == "kind,k,lambda,c,value\ndisconnection,5,0,0,2\n");
    CHECK(run({"exponent", "closed", "--kind", "generalized", "--k", "2", "--c", "2"}).code == int(ErrorCode::invalid_argument));

    Run e = run({"exponent", "estimate", "--kind", "disconnection", "--levels", "3..7", "--trials", "200", "--seed", "4"});
    REQUIRE(e.code == 0);
    CHECK(e.out.find("# estimate") != std::string::npos);
    CHECK(e.out == run({"exponent", "estimate", "--kind", "disconnection", "--levels", "3..7", "--trials", "200", "--seed", "4"}).out);
}

TEST_CASE("cli good boxes and soups") {
    Run g = run({"good-boxes", "--kind", "ptp", "--n", "8..9", "--R", "512", "--seed", "3"});
    REQUIRE(g.code == 0);
    CHECK(std::count(g.out.begin(), g.out.end(), '#') == 2);

    // a path file gives the same report as the sampled path it came from
    RngStream rng(3, derive_stream(1, 0));
    LatticePath w = sample_walk(2, {}, StopRule::exit_disc(Center2{}, 512), rng);
    const std::string file = temp_path("path");
    std::ofstream(file) << to_step_string(w);
    Run f = run({"good-boxes", "--kind", "ptp", "--n", "8..9", "--R", "512", "--path", file});
    CHECK(f.out == g.out);
    std::filesystem::remove(file);

    CHECK(run({"good-boxes", "--kind", "ptp", "--n", "8", "--R", "512", "--delta", "0.125"}).code == 0);
    CHECK(run({"good-boxes", "--kind", "ptp", "--n", "8", "--R", "512", "--delta", "0.25"}).code == int(ErrorCode::config));

    Run s = run({"loop-soup", "--R", "16", "--c", "1", "--seed", "2"});
    REQUIRE(s.code == 0);
    CHECK(LoopSoup::parse(s.out).serialize() == s.out);
    CHECK(run({"loop-soup", "--R", "16"}).code == 2);
}

TEST_CASE("cli experiments, stores and merges") {
    const std::vector<std::string> base{"experiment", "existence-decay", "--kind", "ptp", "--n", "8..9", "--R", "512", "--seed", "7"};
    auto with = [&](std::vector<std::string> extra) {
        auto a = base;
        a.insert(a.end(), extra.begin(), extra.end());
        return a;
    };
    Run full = run(with({"--trials", "8", "--format", "jsonl"}));
    REQUIRE(full.code == 0);
    CHECK(lines(full.out) == 1);
    ExperimentRecord rec = ExperimentRecord::from_json(full.out.substr(0, full.out.size() - 1));
    CHECK(rec.rows.size() == 2);
    Run again = run(with({"--trials", "8", "--format", "jsonl"}));
    CHECK(ExperimentRecord::from_json(again.out.substr(0, again.out.size() - 1)).stats_json() == rec.stats_json());

    Run csv = run(with({"--trials", "8"}));
    CHECK(lines(csv.out) == 3);

    const std::string a = temp_path("a.jsonl"), b = temp_path("b.jsonl");
    REQUIRE(run(with({"--trials", "3", "--out", a})).code == 0);
    REQUIRE(run(with({"--trials", "5", "--first-trial", "3", "--out", b})).code == 0);
    Run merged = run({"experiment", "merge", a, b, "--format", "jsonl"});
    REQUIRE(merged.code == 0);
    CHECK(ExperimentRecord::from_json(merged.out.substr(0, merged.out.size() - 1)).stats_json() == rec.stats_json());

    // the same store rejects a record whose hash is taken by another spec
    std::string text = slurp(a);
    const auto pos = text.find("experiment=existence-decay");
    REQUIRE(pos != std::string::npos);
    text.insert(pos + std::string("experiment=existence-decay").size(), "x");
    std::ofstream(a) << text;
    CHECK(run(with({"--trials", "2", "--first-trial", "20", "--out", a})).code == int(ErrorCode::hash_collision));

    CHECK(run({"experiment", "merge", temp_path("missing")}).code == int(ErrorCode::io));
    CHECK(run(with({"--trials", "1", "--out", "/nonexistent-dir/x.jsonl"})).code == int(ErrorCode::io));
    std::filesystem::remove(a);
    std::filesystem::remove(b);
}

TEST_CASE("cli discrete decay") {
    Run r = run({"experiment", "discrete-ptp-decay", "--N", "64..256", "--delta", "0.05", "--trials", "20", "--seed", "1"});
    REQUIRE(r.code == 0);
    CHECK(lines(r.out) == 4);
    CHECK(run({"experiment", "discrete-ptp-decay", "--N", "60..256", "--trials", "2"}).code != 0);
}

TEST_CASE("outputs match the frozen baselines") {
    // regenerate with the same command lines after an intentional change
    const std::string dir = PIONEER_GOLDEN_DIR;
    CHECK(run({"good-boxes", "--kind", "ptp", "--n", "8..10", "--R", "1024", "--seed", "11"}).out ==
          slurp(dir + "/good_boxes_ptp_R1024_seed11.txt"));
    CHECK(run({"good-boxes", "--kind", "pdcp", "--n", "8..9", "--R", "512", "--seed", "12"}).out ==
          slurp(dir + "/good_boxes_pdcp_R512_seed12.txt"));
    CHECK(run({"exponent", "estimate", "--kind", "disconnection", "--k", "2", "--levels", "3..7", "--trials", "300", "--seed", "13"})
              .out == slurp(dir + "/disconnection_k2_seed13.csv"));
}
