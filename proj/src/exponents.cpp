#include "pioneer/exponents.hpp"

#include <algorithm>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <numeric>
#include <optional>
#include <sstream>

#include "pioneer/error.hpp"
#include "pioneer/loop_soup.hpp"
#include "pioneer/parallel.hpp"
#include "pioneer/path.hpp"

namespace pioneer {

double closed_form_exponent(ExponentKind kind, double k, double lambda, double c) {
    require(k >= 1.0 && std::floor(k) == k, ErrorCode::invalid_argument, "k must be a positive integer");
    switch (kind) {
        case ExponentKind::intersection: {
            require(lambda >= 0.0, ErrorCode::invalid_argument, "lambda must be nonnegative");
            const double s = std::sqrt(24.0 * k + 1.0) + std::sqrt(24.0 * lambda + 1.0) - 2.0;
            return (s * s - 4.0) / 48.0;
        }
        case ExponentKind::disconnection: {
            const double s = std::sqrt(24.0 * k + 1.0) - 1.0;
            return (s * s - 4.0) / 48.0;
        }
        case ExponentKind::generalized: {
            require(c >= 0.0 && c <= 1.0, ErrorCode::invalid_argument, "intensity c must lie in [0, 1]");
            const double s = std::sqrt(24.0 * k + 1.0 - c) - std::sqrt(1.0 - c);
            return (s * s - 4.0 * (1.0 - c)) / 48.0;
        }
    }
    fail(ErrorCode::invalid_argument, "unknown exponent kind");
}

std::string to_string(EventKind k) {
    switch (k) {
        case EventKind::nonintersection: return "nonintersection";
        case EventKind::disconnection: return "disconnection";
        case EventKind::generalized: return "generalized";
    }
    return "?";
}

EventKind parse_event_kind(const std::string& s) {
    if (s == "nonintersection" || s == "intersection") return EventKind::nonintersection;
    if (s == "disconnection") return EventKind::disconnection;
    if (s == "generalized") return EventKind::generalized;
    fail(ErrorCode::invalid_argument, "unknown event kind '" + s + "'");
}

void EventParams::validate() const {
    require(dim == 2 || dim == 3, ErrorCode::config, "dimension must be 2 or 3");
    require(k >= 0 && l >= 0 && k + l <= 64, ErrorCode::config, "walk counts out of range");
    require(inner_radius >= 2, ErrorCode::config, "inner radius must be at least 2");
    if (kind == EventKind::nonintersection) {
        require(k >= 1 && l >= 1, ErrorCode::config, "non-intersection needs two nonempty packets");
    } else {
        require(dim == 2, ErrorCode::config, to_string(kind) + " is planar");
        require(l == 0, ErrorCode::config, "second packet only applies to non-intersection");
    }
    if (kind == EventKind::generalized) require(c >= 0.0 && c <= 1.0, ErrorCode::config, "intensity c must lie in [0, 1]");
}

std::string EventParams::describe() const {
    std::ostringstream os;
    os << "k=" << k << ";l=" << l << ";d=" << dim << ";c=" << c << ";r0=" << inner_radius;
    return os.str();
}

const CurveLevel& ProbabilityCurve::at(int j) const {
    for (const auto& lv : levels)
        if (lv.j == j) return lv;
    fail(ErrorCode::invalid_argument, "level " + std::to_string(j) + " not in curve");
}

std::string ProbabilityCurve::to_csv() const {
    std::ostringstream os;
    os.precision(10);
    os << "schema_version,kind,params,method,seed,j,trials,successes,p,stderr,truncated\n";
    for (const auto& lv : levels)
        os << 1 << ',' << to_string(params.kind) << ',' << params.describe() << ',' << method << ',' << seed << ',' << lv.j << ','
           << lv.trials << ',' << lv.successes << ',' << lv.p << ',' << lv.stderr_p << ',' << int(truncated) << '\n';
    return os.str();
}

namespace {

// Walk stored as 4-bit directions.
struct PackedWalk {
    LatticePoint start{}, end{};
    std::int64_t length = 0;
    std::vector<std::uint8_t> nib;

    void push(unsigned d) {
        if (length % 2 == 0)
            nib.push_back(std::uint8_t(d));
        else
            nib.back() = std::uint8_t(nib.back() | (d << 4));
        ++length;
    }
    template <class F>
    void for_each_site(F&& f) const {
        LatticePoint p = start;
        f(p);
        for (std::int64_t t = 0; t < length; ++t) {
            unsigned d = (nib[std::size_t(t / 2)] >> ((t % 2) * 4)) & 15u;
            p = step(p, d);
            f(p);
        }
    }
    std::vector<LatticePoint> sites() const {
        std::vector<LatticePoint> out;
        out.reserve(std::size_t(length) + 1);
        for_each_site([&](const LatticePoint& p) { out.push_back(p); });
        return out;
    }
};

constexpr Center2 kOrigin{0, 0, 0};

// Walks of one trial (or one particle), plus soup loops for the generalized event.
struct TrialState {
    std::vector<PackedWalk> walks;
    std::vector<LatticePath> loops;
    std::int64_t radius = 0;  // walks stopped at the first site with distance >= radius
};

// Dense stamp grids over [-h, h]^d.
class Workspace {
  public:
    Workspace(int dim, std::int64_t h) : dim_(dim), h_(h), side_(2 * h + 1) {
        std::size_t n = std::size_t(side_ * side_ * (dim == 3 ? side_ : 1));
        a_.assign(n, 0);
        b_.assign(n, 0);
    }
    bool inside(const LatticePoint& p) const {
        return std::abs(std::int64_t(p.x)) <= h_ && std::abs(std::int64_t(p.y)) <= h_ && std::abs(std::int64_t(p.z)) <= h_;
    }
    std::size_t index(const LatticePoint& p) const {
        const std::int64_t z = dim_ == 3 ? std::int64_t(p.z) + h_ : 0;
        return std::size_t((std::int64_t(p.x) + h_) + side_ * ((std::int64_t(p.y) + h_) + side_ * z));
    }
    std::uint32_t next_epoch() {
        if (++epoch_ == 0) {
            std::fill(a_.begin(), a_.end(), 0);
            std::fill(b_.begin(), b_.end(), 0);
            epoch_ = 1;
        }
        return epoch_;
    }
    std::vector<std::uint32_t>& occupied() { return a_; }
    std::vector<std::uint32_t>& visited() { return b_; }
    int dim() const { return dim_; }

  private:
    int dim_;
    std::int64_t h_, side_;
    std::vector<std::uint32_t> a_, b_;
    std::uint32_t epoch_ = 0;
};

LatticePoint uniform_start(const std::vector<LatticePoint>& band, RngStream& rng) { return band[rng.below64(band.size())]; }

// Extends w until it first reaches distance >= r. Returns false once the
// budget is spent.
bool extend_walk(PackedWalk& w, int dim, std::int64_t r, RngStream& rng, std::uint64_t& budget) {
    const std::int64_t m = 4 * r * r;
    LatticePoint p = w.end;
    while (sq_dist2(p, kOrigin) < m) {
        const double gap = double(r) - std::sqrt(double(sq_dist2(p, kOrigin))) / 2.0;
        auto free_steps = std::uint64_t(std::max<std::int64_t>(1, std::int64_t(gap) - 1));
        if (budget < free_steps) {
            w.end = p;
            return false;
        }
        budget -= free_steps;
        for (std::uint64_t s = 0; s < free_steps; ++s) {
            unsigned d = rng.direction(dim);
            p = step(p, d);
            w.push(d);
        }
    }
    w.end = p;
    return true;
}

class EventModel {
  public:
    EventModel(const EventParams& params, int j_max)
        : params_(params), band_(circle_band(params.dim, kOrigin, params.inner_radius)), half_((std::int64_t(1) << j_max) + 3) {
        const std::int64_t r0 = params.inner_radius - 1;
        for (std::int64_t y = -r0; y <= r0; ++y)
            for (std::int64_t x = -r0; x <= r0; ++x)
                for (std::int64_t z = (params.dim == 3 ? -r0 : 0); z <= (params.dim == 3 ? r0 : 0); ++z) {
                    LatticePoint p{std::int32_t(x), std::int32_t(y), std::int32_t(z)};
                    if (sq_dist2(p, kOrigin) < 4 * r0 * r0) inner_.push_back(p);
                }
    }

    std::int64_t half_width() const { return half_; }

    TrialState fresh(RngStream& rng) const {
        TrialState s;
        s.walks.resize(std::size_t(params_.k + params_.l));
        for (auto& w : s.walks) w.start = w.end = uniform_start(band_, rng);
        s.radius = params_.inner_radius;
        return s;
    }

    // Moves the state to radius 2^j. Returns the steps used, or nullopt when
    // the budget runs out.
    std::optional<std::uint64_t> extend(TrialState& s, int j, RngStream& rng, std::uint64_t budget) const {
        const std::int64_t r = std::int64_t(1) << j;
        if (r <= s.radius) return 0;
        const std::uint64_t before = budget;
        for (auto& w : s.walks)
            if (!extend_walk(w, params_.dim, r, rng, budget)) return std::nullopt;
        if (params_.kind == EventKind::generalized && params_.c > 0.0) {
            // loops inside the disc of radius r not already inside the previous disc, and not inside the inner disc
            LoopSoup layer = sample_loop_soup(Region::disc(2, kOrigin, r), params_.c, 0, rng);
            const Region prev = Region::disc(2, kOrigin, s.radius);
            const std::int64_t inner2 = 4 * std::int64_t(params_.inner_radius) * params_.inner_radius;
            for (auto& lp : layer.loops) {
                const auto& sites = lp.path().sites();
                bool in_prev = std::all_of(sites.begin(), sites.end(), [&](const LatticePoint& q) { return prev.contains(q); });
                bool in_inner = std::all_of(sites.begin(), sites.end(), [&](const LatticePoint& q) { return sq_dist2(q, kOrigin) < inner2; });
                if (!in_prev && !in_inner) s.loops.push_back(lp.path());
            }
        }
        s.radius = r;
        return before - budget;
    }

    bool survives(const TrialState& s, Workspace& ws) const {
        if (s.radius <= params_.inner_radius) return true;
        return params_.kind == EventKind::nonintersection ? disjoint_packets(s, ws) : not_disconnected(s, ws);
    }

  private:
    bool disjoint_packets(const TrialState& s, Workspace& ws) const {
        const std::uint32_t e = ws.next_epoch();
        auto& occ = ws.occupied();
        for (int i = 0; i < params_.k; ++i) s.walks[std::size_t(i)].for_each_site([&](const LatticePoint& p) { occ[ws.index(p)] = e; });
        bool hit = false;
        for (int i = params_.k; i < params_.k + params_.l && !hit; ++i)
            s.walks[std::size_t(i)].for_each_site([&](const LatticePoint& p) { hit = hit || occ[ws.index(p)] == e; });
        return !hit;
    }

    bool not_disconnected(const TrialState& s, Workspace& ws) const {
        const std::uint32_t e = ws.next_epoch();
        auto& occ = ws.occupied();
        auto& vis = ws.visited();
        for (const auto& w : s.walks) w.for_each_site([&](const LatticePoint& p) { occ[ws.index(p)] = e; });
        if (!s.loops.empty()) {
            // loop clusters touching the walks join the obstacle
            std::vector<const LatticePath*> refs;
            for (const auto& l : s.loops) refs.push_back(&l);
            ClusterPartition part = clusters(refs);
            std::vector<std::uint8_t> touch(part.size(), 0);
            for (std::size_t c = 0; c < part.size(); ++c)
                for (const auto& p : part.cluster_sites[c])
                    if (occ[ws.index(p)] == e) {
                        touch[c] = 1;
                        break;
                    }
            for (std::size_t c = 0; c < part.size(); ++c)
                if (touch[c])
                    for (const auto& p : part.cluster_sites[c]) occ[ws.index(p)] = e;
        }
        // flood from the inner set; any free site beyond every obstacle escapes
        const std::int64_t escape2 = 4 * (s.radius + 1) * (s.radius + 1);
        std::vector<LatticePoint> stack;
        auto push = [&](const LatticePoint& p) {
            std::size_t i = ws.index(p);
            if (occ[i] == e || vis[i] == e) return;
            vis[i] = e;
            stack.push_back(p);
        };
        for (const auto& p : inner_) {
            push(p);
            for (unsigned d = 0; d < unsigned(2 * params_.dim); ++d) push(step(p, d));
        }
        while (!stack.empty()) {
            LatticePoint p = stack.back();
            stack.pop_back();
            if (sq_dist2(p, kOrigin) >= escape2) return true;
            for (unsigned d = 0; d < unsigned(2 * params_.dim); ++d) push(step(p, d));
        }
        return false;
    }

    EventParams params_;
    std::vector<LatticePoint> band_;
    std::vector<LatticePoint> inner_;
    std::int64_t half_;
};

std::vector<int> level_list(int j0, int j1) {
    require(j0 >= 0 && j0 <= j1, ErrorCode::config, "empty level range");
    require(j1 <= 14, ErrorCode::config, "levels beyond 2^14 are out of budget");
    std::vector<int> out;
    for (int j = j0; j <= j1; ++j) out.push_back(j);
    return out;
}

constexpr std::uint64_t kUnbounded = ~std::uint64_t(0);

}  // namespace

ProbabilityCurve estimate_crossing_prob(const EventParams& params, int j0, int j1, std::uint64_t trials, std::uint64_t seed,
                                        std::uint64_t step_budget) {
    params.validate();
    require(trials >= 1, ErrorCode::config, "trials must be at least 1");
    const auto levels = level_list(j0, j1);
    const EventModel model(params, j1);
    const std::uint64_t per_trial = step_budget == 0 ? kUnbounded : std::max<std::uint64_t>(1, step_budget / trials);

    struct Outcome {
        int survived = -1;   // last level index survived
        int truncated = -1;  // level index where the budget ran out
        std::uint64_t steps = 0;
    };
    std::vector<Outcome> out(trials);
    const int workers = std::max(1, worker_count());
    std::vector<std::unique_ptr<Workspace>> spaces(static_cast<std::size_t>(workers));
    std::mutex mu;
    std::vector<Workspace*> free_spaces;
    auto acquire = [&]() -> Workspace* {
        std::lock_guard<std::mutex> lock(mu);
        if (!free_spaces.empty()) {
            Workspace* w = free_spaces.back();
            free_spaces.pop_back();
            return w;
        }
        for (auto& s : spaces)
            if (!s) {
                s = std::make_unique<Workspace>(params.dim, model.half_width());
                return s.get();
            }
        fail(ErrorCode::precondition, "workspace pool exhausted");
    };
    auto release = [&](Workspace* w) {
        std::lock_guard<std::mutex> lock(mu);
        free_spaces.push_back(w);
    };

    parallel_for(trials, [&](std::size_t t) {
        RngStream rng(seed, derive_stream(0, t));
        Workspace* ws = acquire();
        TrialState s = model.fresh(rng);
        Outcome& o = out[t];
        std::uint64_t budget = per_trial;
        for (std::size_t L = 0; L < levels.size(); ++L) {
            auto used = model.extend(s, levels[L], rng, budget);
            if (!used) {
                o.truncated = int(L);
                break;
            }
            budget -= *used;
            o.steps += *used;
            if (!model.survives(s, *ws)) break;
            o.survived = int(L);
        }
        release(ws);
    });

    ProbabilityCurve curve;
    curve.params = params;
    curve.method = "direct";
    curve.seed = seed;
    int cut = int(levels.size());
    for (const auto& o : out) {
        if (o.truncated >= 0) cut = std::min(cut, o.truncated);
        curve.steps += o.steps;
    }
    curve.truncated = cut < int(levels.size());
    for (int L = 0; L < cut; ++L) {
        CurveLevel lv;
        lv.j = levels[std::size_t(L)];
        lv.trials = trials;
        for (const auto& o : out) lv.successes += o.survived >= L;
        lv.p = double(lv.successes) / double(trials);
        lv.stderr_p = std::sqrt(lv.p * (1.0 - lv.p) / double(trials));
        curve.levels.push_back(lv);
    }
    return curve;
}

ProbabilityCurve split_estimate(const EventParams& params, int j0, int j1, std::uint64_t population, std::uint64_t seed) {
    params.validate();
    require(population >= 100, ErrorCode::config, "population must be at least 100");
    const auto levels = level_list(j0, j1);
    const EventModel model(params, j1);
    const std::size_t M = population;

    ProbabilityCurve curve;
    curve.params = params;
    curve.method = "split";
    curve.seed = seed;

    const int workers = std::max(1, worker_count());
    std::vector<std::unique_ptr<Workspace>> spaces;
    for (int w = 0; w < std::min<int>(workers, int(M)); ++w) spaces.push_back(std::make_unique<Workspace>(params.dim, model.half_width()));
    std::mutex mu;
    std::vector<Workspace*> free_spaces;
    for (auto& s : spaces) free_spaces.push_back(s.get());

    std::vector<TrialState> parents;
    std::vector<std::size_t> assign;
    double p = 1.0, rel_var = 0.0;
    for (std::size_t L = 0; L < levels.size(); ++L) {
        const std::uint64_t stream_base = derive_stream(L + 1, 0);
        std::vector<TrialState> children(M);
        std::vector<std::uint8_t> alive(M, 0);
        std::vector<std::uint64_t> steps(M, 0);
        parallel_for(M, [&](std::size_t i) {
            RngStream rng(seed, derive_stream(stream_base, i));
            Workspace* ws;
            {
                std::lock_guard<std::mutex> lock(mu);
                ws = free_spaces.back();
                free_spaces.pop_back();
            }
            TrialState s = L == 0 ? model.fresh(rng) : parents[assign[i]];
            auto used = model.extend(s, levels[L], rng, kUnbounded);
            steps[i] = used.value_or(0);
            alive[i] = model.survives(s, *ws) ? 1 : 0;
            if (alive[i]) children[i] = std::move(s);
            std::lock_guard<std::mutex> lock(mu);
            free_spaces.push_back(ws);
        });
        curve.steps += std::accumulate(steps.begin(), steps.end(), std::uint64_t(0));
        std::vector<std::size_t> survivors;
        for (std::size_t i = 0; i < M; ++i)
            if (alive[i]) survivors.push_back(i);
        if (survivors.empty()) {
            std::string last = L == 0 ? "none" : std::to_string(levels[L - 1]);
            fail(ErrorCode::extinction, "population died out at level " + std::to_string(levels[L]) + "; last completed level " + last);
        }
        const double f = double(survivors.size()) / double(M);
        p *= f;
        rel_var += (1.0 - f) / (double(M) * f);
        curve.levels.push_back({levels[L], M, survivors.size(), p, p * std::sqrt(rel_var)});

        // balanced resampling: floor(M/s) copies each, the remainder to distinct random survivors
        parents.clear();
        for (std::size_t i : survivors) parents.push_back(std::move(children[i]));
        const std::size_t s = parents.size();
        assign.clear();
        for (std::size_t i = 0; i < s; ++i)
            for (std::size_t c = 0; c < M / s; ++c) assign.push_back(i);
        std::vector<std::size_t> order(s);
        std::iota(order.begin(), order.end(), 0);
        RngStream pick(seed, derive_stream(stream_base, ~std::uint64_t(0)));
        for (std::size_t i = 0; i < M % s; ++i) {
            std::size_t k = i + std::size_t(pick.below64(s - i));
            std::swap(order[i], order[k]);
            assign.push_back(order[i]);
        }
        std::sort(assign.begin(), assign.end());
    }
    return curve;
}

double t_quantile_975(int dof) {
    require(dof >= 1, ErrorCode::invalid_argument, "t quantile needs at least one degree of freedom");
    boost::math::students_t dist(dof);
    return boost::math::quantile(boost::math::complement(dist, 0.025));
}

std::string ExponentEstimate::to_csv_row(const ProbabilityCurve& curve) const {
    std::ostringstream os;
    os.precision(10);
    os << 1 << ',' << to_string(curve.params.kind) << ',' << curve.params.describe() << ',' << slope << ',' << stderr_slope << ',' << j0
       << ',' << j1 << ',' << (method == FitMethod::regression ? "regression" : "ratio") << ',' << curve.seed;
    return os.str();
}

ExponentEstimate fit_exponent(const ProbabilityCurve& curve, int j0, int j1, FitMethod method) {
    if (j0 < 0 && j1 < 0) {
        require(curve.levels.size() >= 5, ErrorCode::precondition, "default fit range needs at least 5 levels");
        j0 = curve.levels[2].j;
        j1 = curve.levels.back().j;
    }
    std::vector<double> xs, ys;
    for (const auto& lv : curve.levels) {
        if (lv.j < j0 || lv.j > j1) continue;
        require(lv.p > 0.0, ErrorCode::precondition,
                "level " + std::to_string(lv.j) + " has no successes; use split_estimate for deeper levels");
        xs.push_back(lv.j);
        ys.push_back(-std::log2(lv.p));
    }
    require(xs.size() >= 3, ErrorCode::precondition, "fit needs at least 3 levels in range");
    require(xs.front() == j0 && xs.back() == j1, ErrorCode::precondition, "fit range exceeds the curve levels");
    ExponentEstimate est;
    est.j0 = j0;
    est.j1 = j1;
    est.method = method;
    const auto n = double(xs.size());
    if (method == FitMethod::regression) {
        const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n, my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
        double sxx = 0, sxy = 0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            sxx += (xs[i] - mx) * (xs[i] - mx);
            sxy += (xs[i] - mx) * (ys[i] - my);
        }
        est.slope = sxy / sxx;
        est.intercept = my - est.slope * mx;
        double rss = 0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            double r = ys[i] - est.intercept - est.slope * xs[i];
            rss += r * r;
        }
        est.dof = int(xs.size()) - 2;
        est.stderr_slope = std::sqrt(rss / double(est.dof) / sxx);
    } else {
        std::vector<double> r;
        for (std::size_t i = 0; i + 1 < xs.size(); ++i) r.push_back((ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i]));
        const double m = std::accumulate(r.begin(), r.end(), 0.0) / double(r.size());
        double ss = 0;
        for (double v : r) ss += (v - m) * (v - m);
        est.slope = m;
        est.intercept = ys.front() - m * xs.front();
        est.dof = int(r.size()) - 1;
        est.stderr_slope = std::sqrt(ss / double(est.dof) / double(r.size()));
    }
    return est;
}

}  // namespace pioneer
