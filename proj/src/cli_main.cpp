#include "pioneer/cli.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "pioneer/detectors.hpp"
#include "pioneer/error.hpp"
#include "pioneer/experiments.hpp"
#include "pioneer/exponents.hpp"
#include "pioneer/loop_soup.hpp"
#include "pioneer/path.hpp"

namespace pioneer {

namespace {

std::pair<std::int64_t, std::int64_t> parse_range(const std::string& text, const char* what) {
    auto dots = text.find("..");
    try {
        std::size_t used = 0;
        if (dots == std::string::npos) {
            auto v = std::stoll(text, &used);
            require(used == text.size(), ErrorCode::invalid_argument, std::string("bad ") + what + " '" + text + "'");
            return {v, v};
        }
        const std::string a = text.substr(0, dots), b = text.substr(dots + 2);
        auto lo = std::stoll(a, &used);
        require(used == a.size(), ErrorCode::invalid_argument, std::string("bad ") + what + " '" + text + "'");
        auto hi = std::stoll(b, &used);
        require(used == b.size(), ErrorCode::invalid_argument, std::string("bad ") + what + " '" + text + "'");
        return {lo, hi};
    } catch (const std::logic_error&) {
        fail(ErrorCode::invalid_argument, std::string("bad ") + what + " '" + text + "'");
    }
}

int log2_exact(std::int64_t v) {
    require(v > 0 && (v & (v - 1)) == 0, ErrorCode::invalid_argument, "N must be a power of two");
    int m = 0;
    while ((std::int64_t(1) << m) < v) ++m;
    return m;
}

ExponentKind parse_exponent_kind(const std::string& s) {
    if (s == "intersection") return ExponentKind::intersection;
    if (s == "disconnection") return ExponentKind::disconnection;
    if (s == "generalized") return ExponentKind::generalized;
    fail(ErrorCode::invalid_argument, "unknown exponent kind '" + s + "'");
}

void write_output(const std::string& path, const std::string& text, std::ostream& out) {
    if (path.empty() || path == "-") {
        out << text;
        return;
    }
    const std::string tmp = path + ".tmp";
    {
        std::ofstream f(tmp, std::ios::trunc);
        require(bool(f), ErrorCode::io, "cannot write " + path);
        f << text;
        require(bool(f), ErrorCode::io, "write failed for " + path);
    }
    require(std::rename(tmp.c_str(), path.c_str()) == 0, ErrorCode::io, "cannot write " + path);
}

std::string read_file(const std::string& path) {
    std::ifstream f(path);
    require(bool(f), ErrorCode::io, "cannot read " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

std::vector<ExperimentRecord> merge_all(const std::vector<std::string>& inputs) {
    std::vector<ExperimentRecord> all;
    for (const auto& in : inputs) {
        std::ifstream f(in);
        require(bool(f), ErrorCode::io, "cannot read " + in);
        for (auto& r : ResultStore(in).load()) all.push_back(std::move(r));
    }
    std::stable_sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
        return a.config_hash != b.config_hash ? a.config_hash < b.config_hash : a.first_trial < b.first_trial;
    });
    std::vector<ExperimentRecord> merged;
    for (const auto& r : all) {
        if (!merged.empty() && merged.back().config_hash == r.config_hash) merged.back() = merge_records(merged.back(), r);
        else merged.push_back(r);
    }
    return merged;
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"pioneer: exceptional points of planar random walks"};
    app.require_subcommand(1);

    // shared option values
    std::string kind, n_range = "8", levels = "3..8", format = "csv", out_path, N_range = "1024..65536", method = "regression";
    std::string mode = "closed", path_file, fit_levels;
    double delta = 0.05, iota = 0.25, c = 0.0, lambda = 0.0;
    int k = 1, l = 0, dim = 2, K = 4;
    std::int64_t resolution = 1024, cutoff = 4;
    std::uint64_t trials = 1000, population = 1000, seed = 1, first_trial = 0, budget = 0, verify = 0;
    bool two_loop = false;

    auto* exponent = app.add_subcommand("exponent", "closed forms and Monte Carlo exponent estimates");
    exponent->add_option("mode", mode, "closed | estimate | split")->check(CLI::IsMember({"closed", "estimate", "split"}));
    exponent->add_option("--kind", kind, "closed: intersection|disconnection|generalized; else nonintersection|disconnection|generalized")
        ->required();
    exponent->add_option("--k", k, "walks in the first packet");
    exponent->add_option("--l", l, "walks in the second packet");
    exponent->add_option("--lambda", lambda, "closed-form second argument");
    exponent->add_option("--c", c, "loop-soup intensity");
    exponent->add_option("--dim", dim, "lattice dimension")->check(CLI::IsMember({2, 3}));
    exponent->add_option("--levels", levels, "levels j0..j1 (radius 2^j)");
    exponent->add_option("--fit", fit_levels, "fit range j0..j1 (default drops the two smallest levels)");
    exponent->add_option("--method", method, "regression | ratio")->check(CLI::IsMember({"regression", "ratio"}));
    exponent->add_option("--trials", trials, "direct trials");
    exponent->add_option("--population", population, "splitting population M");
    exponent->add_option("--budget", budget, "direct: total walk step budget (0: none)");
    exponent->add_option("--seed", seed, "master seed");
    exponent->add_option("--format", format, "csv")->check(CLI::IsMember({"csv", "jsonl"}));
    exponent->add_option("--out", out_path, "output file");

    auto* good = app.add_subcommand("good-boxes", "good dyadic boxes of one sampled path (or loop and soup)");
    good->add_option("--kind", kind, "ptp | pdcp | bdp")->required();
    good->add_option("--n", n_range, "scale or range lo..hi");
    good->add_option("--K", K, "delta = 2^(1-K)");
    good->add_option("--delta", delta, "delta (overrides --K; must be a power of two)");
    good->add_option("--iota", iota, "bulk margin");
    good->add_option("--R", resolution, "unit-disc radius in lattice units");
    good->add_option("--dim", dim, "lattice dimension")->check(CLI::IsMember({2, 3}));
    good->add_option("--c", c, "bdp: soup intensity");
    good->add_option("--cutoff", cutoff, "bdp: soup diameter cutoff");
    good->add_flag("--two-loop", two_loop, "bdp: two-loop variant");
    good->add_option("--path", path_file, "read the path from a step file instead of sampling");
    good->add_option("--seed", seed, "master seed");
    good->add_option("--out", out_path, "output file");

    auto* soup = app.add_subcommand("loop-soup", "sample a random-walk loop soup in a disc");
    soup->add_option("--R", resolution, "disc radius");
    soup->add_option("--c", c, "intensity")->required();
    soup->add_option("--cutoff", cutoff, "minimal diameter");
    soup->add_option("--seed", seed, "master seed");
    soup->add_option("--out", out_path, "output file");

    auto* exper = app.add_subcommand("experiment", "run an experiment driver or merge records");
    std::string exp_name;
    std::vector<std::string> merge_inputs;
    exper->add_option("name", exp_name, "moment-scaling | pair-correlation | existence-decay | annulus-profile | discrete-ptp-decay | merge")
        ->required();
    exper->add_option("inputs", merge_inputs, "merge: record files");
    exper->add_option("--kind", kind, "ptp | pdcp | bdp");
    exper->add_option("--n", n_range, "scale range lo..hi");
    exper->add_option("--N", N_range, "discrete-ptp-decay: N range (powers of two)");
    exper->add_option("--K", K, "delta = 2^(1-K)");
    exper->add_option("--delta", delta, "detector delta (power of two) or discrete-ptp-decay gap fraction");
    exper->add_option("--iota", iota, "bulk margin");
    exper->add_option("--R", resolution, "unit-disc radius in lattice units");
    exper->add_option("--dim", dim, "lattice dimension")->check(CLI::IsMember({2, 3}));
    exper->add_option("--c", c, "bdp: soup intensity");
    exper->add_option("--cutoff", cutoff, "bdp: soup diameter cutoff");
    exper->add_flag("--two-loop", two_loop, "bdp: two-loop variant");
    exper->add_option("--trials", trials, "number of trials");
    exper->add_option("--first-trial", first_trial, "index of the first trial");
    exper->add_option("--verify", verify, "trials also scanned without pruning");
    exper->add_option("--seed", seed, "master seed");
    exper->add_option("--out", out_path, "result store (jsonl, appended)");
    exper->add_option("--format", format, "stdout format")->check(CLI::IsMember({"csv", "jsonl"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e, out, err);
        return rc == 0 ? 0 : 2;
    }

    auto delta_to_K = [&](CLI::App* sub) {
        if (sub->count("--delta") == 0) return;
        const double k_real = 1.0 - std::log2(delta);
        require(std::abs(k_real - std::round(k_real)) < 1e-12, ErrorCode::config, "detector delta must be a power of two");
        K = int(std::round(k_real));
    };

    try {
        if (*exponent) {
            std::ostringstream os;
            os.precision(17);
            if (mode == "closed") {
                os << "kind,k,lambda,c,value\n"
                   << kind << ',' << k << ',' << lambda << ',' << c << ',' << closed_form_exponent(parse_exponent_kind(kind), k, lambda, c)
                   << '\n';
            } else {
                EventParams p;
                p.kind = parse_event_kind(kind);
                p.k = k;
                p.l = l;
                p.dim = dim;
                p.c = c;
                auto [j0, j1] = parse_range(levels, "levels");
                ProbabilityCurve curve = mode == "split" ? split_estimate(p, int(j0), int(j1), population, seed)
                                                         : estimate_crossing_prob(p, int(j0), int(j1), trials, seed, budget);
                int f0 = -1, f1 = -1;
                if (!fit_levels.empty()) {
                    auto [a, b] = parse_range(fit_levels, "fit range");
                    f0 = int(a);
                    f1 = int(b);
                }
                os << curve.to_csv();
                if (curve.levels.size() >= 2) {
                    auto est = fit_exponent(curve, f0, f1, method == "ratio" ? FitMethod::ratio : FitMethod::regression);
                    os << "# estimate\nkind,params,slope,stderr,j0,j1,method,seed\n" << est.to_csv_row(curve) << '\n';
                }
            }
            write_output(out_path, os.str(), out);
        } else if (*good) {
            delta_to_K(good);
            DetectorConfig cfg;
            cfg.kind = parse_detector_kind(kind);
            cfg.dim = dim;
            cfg.K = K;
            cfg.iota = iota;
            cfg.resolution = resolution;
            cfg.two_loop = two_loop;
            auto [lo, hi] = parse_range(n_range, "scale");
            cfg.n = int(lo);
            cfg.validate();
            std::vector<GoodBoxReport> reps;
            if (cfg.kind == DetectorKind::bdp) {
                RngStream rng(seed, derive_stream(1, 0));
                LatticeLoop loop = sample_conditioned_loop(iota, resolution, rng);
                RngStream srng(seed, derive_stream(2, 0));
                LoopSoup s = sample_loop_soup(Region::disc(2, Center2{}, resolution), c, cutoff, srng);
                reps = scan_scales_bdp(loop, s, cfg, int(lo), int(hi));
            } else {
                LatticePath path;
                if (!path_file.empty()) {
                    path = from_step_string(read_file(path_file));
                } else {
                    RngStream rng(seed, derive_stream(1, 0));
                    path = sample_walk(dim, LatticePoint{}, StopRule::exit_disc(Center2{}, resolution), rng);
                }
                reps = scan_scales(path, cfg, int(lo), int(hi));
            }
            std::string text;
            for (const auto& r : reps) text += r.to_text();
            write_output(out_path, text, out);
        } else if (*soup) {
            RngStream rng(seed, derive_stream(2, 0));
            LoopSoup s = sample_loop_soup(Region::disc(2, Center2{}, resolution), c, cutoff, rng);
            write_output(out_path, s.serialize(), out);
        } else if (*exper) {
            if (exp_name == "merge") {
                require(!merge_inputs.empty(), ErrorCode::invalid_argument, "merge needs record files");
                std::string text;
                for (const auto& r : merge_all(merge_inputs)) text += (format == "jsonl" ? r.to_json() + "\n" : summary_csv(r));
                write_output(out_path, text, out);
                return 0;
            }
            require(merge_inputs.empty(), ErrorCode::invalid_argument, "unexpected positional arguments");
            ExperimentSpec spec;
            spec.name = exp_name;
            spec.trials = trials;
            spec.first_trial = first_trial;
            spec.seed = seed;
            spec.verify_paths = verify;
            if (exp_name == "discrete-ptp-decay") {
                auto [lo, hi] = parse_range(N_range, "N range");
                spec.log2N_lo = log2_exact(lo);
                spec.log2N_hi = log2_exact(hi);
                spec.delta = delta;
            } else {
                delta_to_K(exper);
                require(!kind.empty(), ErrorCode::config, "--kind is required");
                spec.detector.kind = parse_detector_kind(kind);
                spec.detector.dim = dim;
                spec.detector.K = K;
                spec.detector.iota = iota;
                spec.detector.resolution = resolution;
                spec.detector.two_loop = two_loop;
                auto [lo, hi] = parse_range(n_range, "scale range");
                spec.n_lo = int(lo);
                spec.n_hi = int(hi);
                spec.c = c;
                spec.cutoff = cutoff;
            }
            ExperimentRecord rec = run_experiment(spec);
            if (!out_path.empty()) ResultStore(out_path).append(rec);
            out << (format == "jsonl" ? rec.to_json() + "\n" : summary_csv(rec));
        }
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return int(e.code());
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

}  // namespace pioneer
