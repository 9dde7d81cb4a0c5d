#include "pioneer/experiments.hpp"

#include <fftw3.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <numeric>
#include <mutex>
#include <sstream>

#include "pioneer/error.hpp"
#include "pioneer/loop_soup.hpp"
#include "pioneer/parallel.hpp"
#include "pioneer/rng.hpp"

namespace pioneer {

using json = nlohmann::json;

namespace {

const std::vector<std::string>& experiment_names() {
    static const std::vector<std::string> names{"moment-scaling", "pair-correlation", "existence-decay", "annulus-profile",
                                                "discrete-ptp-decay"};
    return names;
}

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (char c : s) h = (h ^ std::uint8_t(c)) * 1099511628211ull;
    return h;
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

// stream tags for the per-trial generators
constexpr std::uint64_t kPathTag = 1, kSoupTag = 2, kPickTag = 3, kTripleTag = 4;

using TrialRows = std::vector<StatRow>;

void add_rows(std::vector<StatRow>& into, const TrialRows& rows) {
    for (const auto& r : rows) {
        auto it = std::find_if(into.begin(), into.end(), [&](const StatRow& x) { return x.scale == r.scale; });
        if (it == into.end()) {
            into.push_back(r);
            continue;
        }
        for (const auto& [k, v] : r.sums) it->sums[k] += v;
    }
}

template <class F>
ExperimentRecord run_trials(const ExperimentSpec& spec, F&& trial) {
    spec.validate();
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<TrialRows> per(spec.trials);
    parallel_for(spec.trials, [&](std::size_t i) { per[i] = trial(spec.first_trial + i); });
    ExperimentRecord rec;
    rec.experiment = spec.name;
    rec.config = spec.canonical();
    rec.config_hash = spec.hash();
    rec.seed = spec.seed;
    rec.first_trial = spec.first_trial;
    rec.trials = spec.trials;
    for (const auto& rows : per) add_rows(rec.rows, rows);
    std::sort(rec.rows.begin(), rec.rows.end(), [](const StatRow& a, const StatRow& b) { return a.scale < b.scale; });
    rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rec;
}

DetectorConfig config_at(const ExperimentSpec& spec, int n) {
    DetectorConfig c = spec.detector;
    c.n = n;
    return c;
}

LatticePath sample_detector_path(const ExperimentSpec& spec, std::uint64_t trial) {
    RngStream rng(spec.seed, derive_stream(kPathTag, trial));
    return sample_walk(spec.detector.dim, LatticePoint{}, StopRule::exit_disc(Center2{}, spec.detector.resolution), rng);
}

DetectorWorkspace& thread_workspace() {
    thread_local DetectorWorkspace ws;
    return ws;
}

// Good-box reports at scales n_lo..n_hi for one trial; also checks the
// pruned scan against independent per-scale scans when asked.
std::vector<GoodBoxReport> scan_trial(const ExperimentSpec& spec, std::uint64_t trial, bool verify, bool& mismatch) {
    const DetectorConfig cfg = config_at(spec, spec.n_lo);
    mismatch = false;
    if (cfg.kind == DetectorKind::bdp) {
        RngStream rng(spec.seed, derive_stream(kPathTag, trial));
        LatticeLoop loop = sample_conditioned_loop(cfg.iota, cfg.resolution, rng);
        RngStream soup_rng(spec.seed, derive_stream(kSoupTag, trial));
        LoopSoup soup = sample_loop_soup(Region::disc(2, Center2{}, cfg.resolution), spec.c, spec.cutoff, soup_rng);
        return scan_scales_bdp(loop, soup, cfg, spec.n_lo, spec.n_hi);
    }
    LatticePath path = sample_detector_path(spec, trial);
    auto reps = scan_scales(path, cfg, spec.n_lo, spec.n_hi, true, &thread_workspace());
    if (verify) {
        auto full = scan_scales(path, cfg, spec.n_lo, spec.n_hi, false, &thread_workspace());
        for (std::size_t k = 0; k < reps.size(); ++k) mismatch = mismatch || reps[k].boxes != full[k].boxes;
    }
    return reps;
}

TrialRows scan_rows(const ExperimentSpec& spec, std::uint64_t trial) {
    const bool verify = trial < spec.verify_paths;
    bool mismatch = false;
    auto reps = scan_trial(spec, trial, verify, mismatch);
    TrialRows rows;
    bool prev_nonempty = true;
    for (const auto& rep : reps) {
        StatRow r;
        r.scale = rep.config.n;
        const auto c = double(rep.count());
        r.sums["trials"] = 1;
        r.sums["count_sum"] = c;
        r.sums["count_sq_sum"] = c * c;
        r.sums["nonempty"] = c > 0 ? 1 : 0;
        r.sums["monotone_violations"] = (c > 0 && !prev_nonempty) ? 1 : 0;
        r.sums["prune_checked"] = verify ? 1 : 0;
        r.sums["prune_mismatch"] = mismatch ? 1 : 0;
        prev_nonempty = c > 0;
        rows.push_back(std::move(r));
    }
    return rows;
}

std::int64_t center_d2_boxes(const DyadicBox& a, const DyadicBox& b) {
    std::int64_t s = 0;
    for (int k = 0; k < a.dim; ++k) s += (a.idx[k] - b.idx[k]) * (a.idx[k] - b.idx[k]);
    return s;
}

std::string triple_key(int m1, int m2) { return "triples_m1=" + std::to_string(m1) + ";m2=" + std::to_string(m2); }

}  // namespace

void ExperimentSpec::validate() const {
    require(std::find(experiment_names().begin(), experiment_names().end(), name) != experiment_names().end(), ErrorCode::config,
            "unknown experiment '" + name + "'");
    require(trials >= 1, ErrorCode::config, "trials must be at least 1");
    if (name == "discrete-ptp-decay") {
        require(log2N_lo >= 1 && log2N_lo <= log2N_hi && log2N_hi <= 26, ErrorCode::config, "N range must be 2^1..2^26 and nonempty");
        require(delta > 0.0 && delta < 1.0, ErrorCode::config, "delta must lie in (0, 1)");
        return;
    }
    require(n_lo <= n_hi, ErrorCode::config, "empty scale range");
    for (int n = n_lo; n <= n_hi; ++n) config_at(*this, n).validate();
    if (name == "annulus-profile") require(detector.kind == DetectorKind::ptp, ErrorCode::config, "annulus profile uses ptp");
    if (name == "pair-correlation") {
        require(n_lo == n_hi, ErrorCode::config, "pair correlation runs at a single scale");
        require(detector.dim == 2, ErrorCode::config, "pair correlation is planar");
    }
    if (detector.kind == DetectorKind::bdp) require(c >= 0.0 && cutoff >= 0, ErrorCode::config, "bad soup parameters");
}

std::string ExperimentSpec::canonical() const {
    std::ostringstream os;
    os.precision(17);
    os << "experiment=" << name << ";seed=" << seed;
    if (name == "discrete-ptp-decay") {
        os << ";N=2^" << log2N_lo << "..2^" << log2N_hi << ";delta=" << delta;
        return os.str();
    }
    DetectorConfig d = detector;
    d.n = 0;
    os << ";" << d.canonical() << ";n=" << n_lo << ".." << n_hi;
    if (detector.kind == DetectorKind::bdp) os << ";c=" << c << ";cutoff=" << cutoff;
    return os.str();
}

std::uint64_t ExperimentSpec::hash() const { return fnv1a(canonical()); }

std::string ExperimentRecord::stats_json() const {
    json rows_j = json::array();
    for (const auto& r : rows) {
        json f = json::object();
        for (const auto& [k, v] : r.sums) f[k] = v;
        rows_j.push_back({{"scale", r.scale}, {"sums", f}});
    }
    return rows_j.dump();
}

std::string ExperimentRecord::to_json() const {
    json j;
    j["schema_version"] = kSchemaVersion;
    j["experiment"] = experiment;
    j["config"] = config;
    j["config_hash"] = hex64(config_hash);
    j["seed"] = seed;
    j["first_trial"] = first_trial;
    j["trials"] = trials;
    j["version"] = version;
    j["wall_seconds"] = wall_seconds;
    j["stats"] = json::parse(stats_json());
    return j.dump();
}

ExperimentRecord ExperimentRecord::from_json(const std::string& line) {
    ExperimentRecord r;
    try {
        json j = json::parse(line);
        require(j.at("schema_version").get<int>() == kSchemaVersion, ErrorCode::io, "unsupported record schema version");
        r.experiment = j.at("experiment").get<std::string>();
        r.config = j.at("config").get<std::string>();
        r.config_hash = std::stoull(j.at("config_hash").get<std::string>(), nullptr, 16);
        r.seed = j.at("seed").get<std::uint64_t>();
        r.first_trial = j.at("first_trial").get<std::uint64_t>();
        r.trials = j.at("trials").get<std::uint64_t>();
        r.version = j.at("version").get<std::string>();
        r.wall_seconds = j.at("wall_seconds").get<double>();
        for (const auto& row : j.at("stats")) {
            StatRow s;
            s.scale = row.at("scale").get<int>();
            for (const auto& [k, v] : row.at("sums").items()) s.sums[k] = v.get<double>();
            r.rows.push_back(std::move(s));
        }
    } catch (const json::exception& e) {
        fail(ErrorCode::io, std::string("malformed record: ") + e.what());
    }
    return r;
}

const StatRow& ExperimentRecord::row(int scale) const {
    for (const auto& r : rows)
        if (r.scale == scale) return r;
    fail(ErrorCode::invalid_argument, "no row for scale " + std::to_string(scale));
}

double ExperimentRecord::sum(int scale, const std::string& field) const {
    const auto& r = row(scale);
    auto it = r.sums.find(field);
    return it == r.sums.end() ? 0.0 : it->second;
}

ExperimentRecord merge_records(const ExperimentRecord& a, const ExperimentRecord& b) {
    require(a.config_hash == b.config_hash && a.config == b.config, ErrorCode::config, "records come from different specs");
    const bool disjoint = a.first_trial + a.trials <= b.first_trial || b.first_trial + b.trials <= a.first_trial;
    require(disjoint, ErrorCode::config, "records cover overlapping trial ranges");
    require(a.first_trial + a.trials == b.first_trial || b.first_trial + b.trials == a.first_trial, ErrorCode::config,
            "records do not cover adjacent trial ranges");
    ExperimentRecord m = a.first_trial < b.first_trial ? a : b;
    const ExperimentRecord& other = a.first_trial < b.first_trial ? b : a;
    m.trials = a.trials + b.trials;
    m.wall_seconds = a.wall_seconds + b.wall_seconds;
    add_rows(m.rows, other.rows);
    std::sort(m.rows.begin(), m.rows.end(), [](const StatRow& x, const StatRow& y) { return x.scale < y.scale; });
    return m;
}

std::vector<ExperimentRecord> ResultStore::load() const {
    std::vector<ExperimentRecord> out;
    std::ifstream in(path_);
    if (!in) return out;
    std::string line;
    while (std::getline(in, line))
        if (!line.empty()) out.push_back(ExperimentRecord::from_json(line));
    return out;
}

void ResultStore::append(const ExperimentRecord& rec) const {
    std::string body;
    {
        std::ifstream in(path_);
        std::string line;
        while (in && std::getline(in, line)) {
            if (line.empty()) continue;
            ExperimentRecord old = ExperimentRecord::from_json(line);
            require(!(old.config_hash == rec.config_hash && old.config != rec.config), ErrorCode::hash_collision,
                    "config hash " + hex64(rec.config_hash) + " already used by a different spec");
            body += line + "\n";
        }
    }
    body += rec.to_json() + "\n";
    const std::string tmp = path_ + ".tmp";
    {
        std::ofstream out(tmp, std::ios::trunc);
        require(bool(out), ErrorCode::io, "cannot write " + tmp);
        out << body;
        out.flush();
        require(bool(out), ErrorCode::io, "write failed for " + tmp);
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path_, ec);
    require(!ec, ErrorCode::io, "cannot replace " + path_ + ": " + ec.message());
}

std::optional<ExperimentRecord> ResultStore::find(std::uint64_t config_hash) const {
    std::vector<ExperimentRecord> hits;
    for (auto& r : load())
        if (r.config_hash == config_hash) hits.push_back(std::move(r));
    if (hits.empty()) return std::nullopt;
    std::sort(hits.begin(), hits.end(), [](const auto& a, const auto& b) { return a.first_trial < b.first_trial; });
    ExperimentRecord m = hits.front();
    for (std::size_t i = 1; i < hits.size(); ++i) m = merge_records(m, hits[i]);
    return m;
}

ExperimentRecord run_moment_scaling(const ExperimentSpec& spec) {
    require(spec.name == "moment-scaling", ErrorCode::config, "spec is not a moment-scaling run");
    return run_trials(spec, [&](std::uint64_t t) { return scan_rows(spec, t); });
}

ExperimentRecord run_existence_decay(const ExperimentSpec& spec) {
    require(spec.name == "existence-decay", ErrorCode::config, "spec is not an existence-decay run");
    return run_trials(spec, [&](std::uint64_t t) { return scan_rows(spec, t); });
}

ExperimentRecord run_pair_correlation(const ExperimentSpec& spec) {
    require(spec.name == "pair-correlation", ErrorCode::config, "spec is not a pair-correlation run");
    return run_trials(spec, [&](std::uint64_t t) {
        bool mismatch = false;
        auto reps = scan_trial(spec, t, false, mismatch);
        const auto& boxes = reps.front().boxes;
        const int n = spec.n_lo;
        TrialRows rows;
        StatRow total;
        total.scale = -1;
        total.sums["trials"] = 1;
        total.sums["count_sum"] = double(boxes.size());
        total.sums["count_sq_sum"] = double(boxes.size() * boxes.size());
        std::map<int, double> pairs;
        std::map<std::pair<int, int>, double> triples;
        std::vector<std::vector<int>> bin(boxes.size(), std::vector<int>(boxes.size(), 0));
        for (std::size_t a = 0; a < boxes.size(); ++a)
            for (std::size_t b = a + 1; b < boxes.size(); ++b) {
                int m = distance_bin(center_d2_boxes(boxes[a].box, boxes[b].box), n);
                bin[a][b] = bin[b][a] = m;
                pairs[m] += 1;
            }
        for (std::size_t a = 0; a < boxes.size(); ++a)
            for (std::size_t b = a + 1; b < boxes.size(); ++b)
                for (std::size_t c = b + 1; c < boxes.size(); ++c) {
                    // larger m = shorter distance: D1 (min) has the largest bin
                    int m1 = std::max({bin[a][b], bin[b][c], bin[a][c]});
                    int m2 = std::min({bin[a][b], bin[b][c], bin[a][c]});
                    triples[{m1, m2}] += 1;
                }
        rows.push_back(total);
        for (const auto& [m, v] : pairs) {
            StatRow r;
            r.scale = m;
            r.sums["pairs"] = v;
            r.sums["pairs_sq"] = v * v;
            rows.push_back(std::move(r));
        }
        for (const auto& [mm, v] : triples) {
            auto it = std::find_if(rows.begin(), rows.end(), [&](const StatRow& r) { return r.scale == mm.first; });
            if (it == rows.end()) {
                rows.push_back(StatRow{mm.first, {}});
                it = rows.end() - 1;
            }
            it->sums[triple_key(mm.first, mm.second)] += v;
        }
        return rows;
    });
}

ExperimentRecord run_annulus_profile(const ExperimentSpec& spec) {
    require(spec.name == "annulus-profile", ErrorCode::config, "spec is not an annulus-profile run");
    return run_trials(spec, [&](std::uint64_t t) {
        bool mismatch = false;
        auto reps = scan_trial(spec, t, false, mismatch);
        RngStream pick(spec.seed, derive_stream(kPickTag, t));
        TrialRows rows;
        for (const auto& rep : reps) {
            const int n = rep.config.n;
            const int L = int(std::floor(std::sqrt(double(n))));
            StatRow r;
            r.scale = n;
            r.sums["trials"] = 1;
            const auto count = rep.count();
            r.sums["count_sum"] = double(count);
            for (int i = 1; i <= L / 2; ++i) {
                r.sums["N" + std::to_string(i)] += 0;
                r.sums["truncated" + std::to_string(i)] += 0;
            }
            if (count > 0) {
                const DyadicBox& s = rep.boxes[pick.below64(count)].box;
                r.sums["nonempty"] = 1;
                r.sums["inv_sum"] = 1.0 / double(count);
                r.sums["inv_sq_sum"] = 1.0 / double(count) / double(count);
                const double u = double(s.unit);
                const double cx = (double(s.idx[0]) + 0.5) * u, cy = (double(s.idx[1]) + 0.5) * u;
                const double rc = std::hypot(cx, cy);
                for (int i = 1; i <= L / 2; ++i) {
                    const double r1 = u * std::ldexp(1.0, i * L), r2 = u * std::ldexp(1.0, (i + 1) * L);
                    std::size_t ni = 0;
                    for (const auto& g : rep.boxes) {
                        double d = u * std::sqrt(double(center_d2_boxes(g.box, s)));
                        if (d >= r1 && d < r2) ++ni;
                    }
                    r.sums["N" + std::to_string(i)] += double(ni);
                    const double R = double(rep.config.resolution);
                    if (rc - r2 < rep.config.iota * R || rc + r2 > (1.0 - rep.config.iota) * R) r.sums["truncated" + std::to_string(i)] += 1;
                }
            } else {
                r.sums["nonempty"] = 0;
                r.sums["inv_sum"] = 0;
                r.sums["inv_sq_sum"] = 0;
            }
            rows.push_back(std::move(r));
        }
        return rows;
    });
}

ExperimentRecord run_discrete_ptp_decay(const ExperimentSpec& spec) {
    require(spec.name == "discrete-ptp-decay", ErrorCode::config, "spec is not a discrete-ptp-decay run");
    return run_trials(spec, [&](std::uint64_t t) {
        RngStream rng(spec.seed, derive_stream(kPathTag, t));
        LatticePath walk = sample_walk(2, LatticePoint{}, StopRule::fixed_length(TimeIndex(1) << spec.log2N_hi), rng);
        TrialRows rows;
        for (int m = spec.log2N_lo; m <= spec.log2N_hi; ++m) {
            StatRow r;
            r.scale = m;
            r.sums["trials"] = 1;
            r.sums["hits"] = has_macroscopic_ptp(walk, TimeIndex(1) << m, spec.delta, &thread_workspace()) ? 1 : 0;
            rows.push_back(std::move(r));
        }
        return rows;
    });
}

ExperimentRecord run_experiment(const ExperimentSpec& spec) {
    if (spec.name == "moment-scaling") return run_moment_scaling(spec);
    if (spec.name == "pair-correlation") return run_pair_correlation(spec);
    if (spec.name == "existence-decay") return run_existence_decay(spec);
    if (spec.name == "annulus-profile") return run_annulus_profile(spec);
    if (spec.name == "discrete-ptp-decay") return run_discrete_ptp_decay(spec);
    fail(ErrorCode::config, "unknown experiment '" + spec.name + "'");
}

int distance_bin(std::int64_t d2, int n) {
    require(d2 > 0, ErrorCode::invalid_argument, "distance bin of coincident boxes");
    int k = 0;
    while ((std::int64_t(1) << (2 * k)) < d2) ++k;
    return n - k;
}

std::map<int, double> bulk_pair_counts(const DetectorConfig& cfg, int n) {
    DetectorConfig c = cfg;
    c.n = n;
    c.validate();
    require(c.dim == 2, ErrorCode::config, "pair counts are planar");
    const Bulk bulk = Bulk::of(c);
    const Resolution res = c.res();
    const std::int64_t h = std::int64_t(1) << n;  // box indices in [-h, h)
    const std::int64_t side = 2 * h, P = 2 * side;
    std::vector<double> in(std::size_t(P * P), 0.0);
    for (std::int64_t j = -h; j < h; ++j)
        for (std::int64_t i = -h; i < h; ++i)
            if (bulk.contains(DyadicBox::make(res, n, i, j))) in[std::size_t((j + h) * P + (i + h))] = 1.0;
    const std::int64_t Pc = P / 2 + 1;
    fftw_complex* freq = fftw_alloc_complex(std::size_t(P * Pc));
    std::vector<double> auto_corr(std::size_t(P * P));
    {
        static std::mutex plan_mu;  // planner calls are not thread safe
        std::lock_guard<std::mutex> lock(plan_mu);
        fftw_plan fwd = fftw_plan_dft_r2c_2d(int(P), int(P), in.data(), freq, FFTW_ESTIMATE);
        fftw_execute(fwd);
        fftw_destroy_plan(fwd);
        for (std::int64_t k = 0; k < P * Pc; ++k) {
            const double re = freq[k][0], im = freq[k][1];
            freq[k][0] = re * re + im * im;
            freq[k][1] = 0.0;
        }
        fftw_plan inv = fftw_plan_dft_c2r_2d(int(P), int(P), freq, auto_corr.data(), FFTW_ESTIMATE);
        fftw_execute(inv);
        fftw_destroy_plan(inv);
    }
    fftw_free(freq);
    std::map<int, double> out;
    const double norm = double(P) * double(P);
    for (std::int64_t y = 0; y < P; ++y)
        for (std::int64_t x = 0; x < P; ++x) {
            const std::int64_t dx = x < P / 2 ? x : x - P, dy = y < P / 2 ? y : y - P;
            if (dx == 0 && dy == 0) continue;
            const double v = std::round(auto_corr[std::size_t(y * P + x)] / norm);
            if (v > 0) out[distance_bin(dx * dx + dy * dy, n)] += v / 2.0;
        }
    return out;
}

namespace {

// Fraction of unordered bulk box triples per (m1, m2) bin, by uniform sampling.
std::map<std::pair<int, int>, double> bulk_triple_fractions(const DetectorConfig& cfg, int n, std::uint64_t samples, std::uint64_t seed,
                                                            double& total) {
    DetectorConfig c = cfg;
    c.n = n;
    const Bulk bulk = Bulk::of(c);
    const Resolution res = c.res();
    const std::int64_t h = std::int64_t(1) << n;
    std::vector<std::array<std::int64_t, 2>> boxes;
    for (std::int64_t j = -h; j < h; ++j)
        for (std::int64_t i = -h; i < h; ++i)
            if (bulk.contains(DyadicBox::make(res, n, i, j))) boxes.push_back({i, j});
    const double nb = double(boxes.size());
    total = nb * (nb - 1) * (nb - 2) / 6.0;
    RngStream rng(seed, kTripleTag);
    std::map<std::pair<int, int>, double> out;
    std::uint64_t taken = 0;
    while (taken < samples) {
        auto a = rng.below64(boxes.size()), b = rng.below64(boxes.size()), d = rng.below64(boxes.size());
        if (a == b || b == d || a == d) continue;
        auto dist = [&](std::uint64_t p, std::uint64_t q) {
            std::int64_t dx = boxes[p][0] - boxes[q][0], dy = boxes[p][1] - boxes[q][1];
            return distance_bin(dx * dx + dy * dy, n);
        };
        int x = dist(a, b), y = dist(b, d), z = dist(a, d);
        out[{std::max({x, y, z}), std::min({x, y, z})}] += 1;
        ++taken;
    }
    for (auto& [k, v] : out) v /= double(samples);
    return out;
}

double mean_of(double sum, double n) { return n > 0 ? sum / n : 0.0; }
double sem_of(double sum, double sq, double n) {
    if (n <= 1) return 0.0;
    const double m = sum / n;
    return std::sqrt(std::max(0.0, (sq / n - m * m)) * n / (n - 1) / n);
}

ExperimentSpec spec_from_config(const std::string& canonical) {
    ExperimentSpec s;
    std::stringstream in(canonical);
    std::string item;
    while (std::getline(in, item, ';')) {
        auto eq = item.find('=');
        if (eq == std::string::npos) continue;
        std::string k = item.substr(0, eq), v = item.substr(eq + 1);
        if (k == "experiment") s.name = v;
        else if (k == "seed") s.seed = std::stoull(v);
        else if (k == "kind") s.detector.kind = parse_detector_kind(v);
        else if (k == "dim") s.detector.dim = std::stoi(v);
        else if (k == "K") s.detector.K = std::stoi(v);
        else if (k == "iota") s.detector.iota = std::stod(v);
        else if (k == "R") s.detector.resolution = std::stoll(v);
        else if (k == "n") {
            // the detector part carries a bare n=0; the range comes later
            auto dots = v.find("..");
            s.n_lo = std::stoi(v.substr(0, dots));
            s.n_hi = dots == std::string::npos ? s.n_lo : std::stoi(v.substr(dots + 2));
        }
    }
    return s;
}

}  // namespace

std::vector<SummaryRow> summarize(const ExperimentRecord& rec) {
    std::vector<SummaryRow> out;
    const double T = double(rec.trials);
    if (rec.experiment == "moment-scaling" || rec.experiment == "existence-decay") {
        double prev_mean = 0.0;
        for (const auto& r : rec.rows) {
            SummaryRow s;
            s.scale = r.scale;
            s.trials = rec.trials;
            const double mean = mean_of(r.sums.at("count_sum"), T);
            const double sem = sem_of(r.sums.at("count_sum"), r.sums.at("count_sq_sum"), T);
            const double p = r.sums.at("nonempty") / T;
            if (rec.experiment == "moment-scaling") {
                s.estimate = mean;
                s.stderr_est = sem;
                s.extra["p_nonempty"] = p;
            } else {
                s.estimate = p;
                s.stderr_est = std::sqrt(p * (1 - p) / T);
                s.extra["mean_count"] = mean;
            }
            s.extra["ratio_to_previous"] = (&r != &rec.rows.front() && prev_mean > 0) ? mean / prev_mean : 0.0;
            s.extra["monotone_violations"] = r.sums.at("monotone_violations");
            s.extra["prune_checked"] = r.sums.at("prune_checked");
            s.extra["prune_mismatch"] = r.sums.at("prune_mismatch");
            prev_mean = mean;
            out.push_back(std::move(s));
        }
    } else if (rec.experiment == "annulus-profile") {
        for (const auto& r : rec.rows) {
            SummaryRow s;
            s.scale = r.scale;
            s.trials = rec.trials;
            const double ne = r.sums.at("nonempty");
            s.estimate = mean_of(r.sums.at("inv_sum"), ne);
            s.stderr_est = sem_of(r.sums.at("inv_sum"), r.sums.at("inv_sq_sum"), ne);
            s.extra["nonempty"] = ne;
            for (const auto& [k, v] : r.sums)
                if (k[0] == 'N' || k.rfind("truncated", 0) == 0) s.extra[k + (k[0] == 'N' ? "_mean" : "")] = mean_of(v, ne);
            out.push_back(std::move(s));
        }
    } else if (rec.experiment == "discrete-ptp-decay") {
        for (const auto& r : rec.rows) {
            SummaryRow s;
            s.scale = r.scale;
            s.trials = rec.trials;
            s.estimate = r.sums.at("hits") / T;
            s.stderr_est = std::sqrt(s.estimate * (1 - s.estimate) / T);
            out.push_back(std::move(s));
        }
    } else if (rec.experiment == "pair-correlation") {
        const ExperimentSpec spec = spec_from_config(rec.config);
        const int n = spec.n_lo;
        const auto denom = bulk_pair_counts(spec.detector, n);
        double total_triples = 0;
        const auto tri = bulk_triple_fractions(spec.detector, n, 2'000'000, 1, total_triples);
        const int d = spec.detector.dim;
        std::size_t bulk_boxes = 0;
        {
            DetectorConfig c = spec.detector;
            c.n = n;
            const Bulk bulk = Bulk::of(c);
            const std::int64_t h = std::int64_t(1) << n;
            for (std::int64_t j = -h; j < h; ++j)
                for (std::int64_t i = -h; i < h; ++i) bulk_boxes += bulk.contains(DyadicBox::make(c.res(), n, i, j));
        }
        const double p_single = rec.sum(-1, "count_sum") / T / double(bulk_boxes);
        for (const auto& r : rec.rows) {
            if (r.scale < 0) continue;
            SummaryRow s;
            s.scale = r.scale;
            s.trials = rec.trials;
            auto it = denom.find(r.scale);
            const double pairs_bin = it == denom.end() ? 0.0 : it->second;
            auto f = r.sums.find("pairs");
            const double ps = f == r.sums.end() ? 0.0 : f->second;
            const double pq = r.sums.count("pairs_sq") ? r.sums.at("pairs_sq") : 0.0;
            s.estimate = pairs_bin > 0 ? ps / T / pairs_bin : 0.0;
            s.stderr_est = pairs_bin > 0 ? sem_of(ps, pq, T) / pairs_bin : 0.0;
            s.extra["bulk_pairs"] = pairs_bin;
            s.extra["p_single"] = p_single;
            // third moment: the fitted constant per (m1 = this bin, m2) cell
            for (const auto& [k, v] : r.sums) {
                if (k.rfind("triples_", 0) != 0) continue;
                const int m2 = std::stoi(k.substr(k.find("m2=") + 3));
                auto tf = tri.find({r.scale, m2});
                if (tf == tri.end() || tf->second <= 0) continue;
                const double ptri = v / T / (tf->second * total_triples);
                const double shape = std::ldexp(1.0, d * r.scale) * std::ldexp(1.0, d * m2) * std::ldexp(1.0, -3 * d * n);
                s.extra["C_m2=" + std::to_string(m2)] = ptri / shape;
            }
            out.push_back(std::move(s));
        }
    }
    return out;
}

std::string summary_csv(const ExperimentRecord& rec) {
    std::ostringstream os;
    os.precision(10);
    os << "schema_version,experiment,config_hash,scale,trials,estimate,stderr,extra\n";
    for (const auto& s : summarize(rec)) {
        os << kSchemaVersion << ',' << rec.experiment << ',' << hex64(rec.config_hash) << ',' << s.scale << ',' << s.trials << ','
           << s.estimate << ',' << s.stderr_est << ',';
        bool first = true;
        for (const auto& [k, v] : s.extra) {
            os << (first ? "" : ";") << k << '=' << v;
            first = false;
        }
        os << '\n';
    }
    return os.str();
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    require(x.size() == y.size() && x.size() >= 2, ErrorCode::invalid_argument, "line fit needs at least two points");
    const double n = double(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n, my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    require(sxx > 0, ErrorCode::invalid_argument, "line fit needs distinct x values");
    LineFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    if (x.size() > 2) {
        double rss = 0;
        for (std::size_t i = 0; i < x.size(); ++i) rss += std::pow(y[i] - f.intercept - f.slope * x[i], 2);
        f.stderr_slope = std::sqrt(rss / (n - 2) / sxx);
    }
    return f;
}

}  // namespace pioneer
