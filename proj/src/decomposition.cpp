#include "pioneer/decomposition.hpp"

#include <string>

#include "pioneer/error.hpp"

namespace pioneer {

BoxRadii BoxRadii::of(const DyadicBox& s, int K) {
    require(K >= 1, ErrorCode::config, "K must be a positive integer");
    require(s.resolution % (std::int64_t(1) << K) == 0, ErrorCode::config, "resolution too coarse for delta = 2^{1-K}");
    BoxRadii b;
    b.center = s.center();
    b.unit = s.unit;
    b.delta = s.resolution >> (K - 1);
    b.rho = DoubledRadius{2 * b.delta, -s.unit};
    b.reach_rho = b.rho.minus(1).reach_threshold();
    b.within_rho = b.rho.within_threshold();
    return b;
}

namespace {

struct Scanner {
    const LatticePath& path;
    const DyadicBox& box;
    BoxRadii r;
    std::int64_t half;  // delta / 2

    std::int64_t m(TimeIndex t) const { return sq_dist2(path[t], r.center); }
    TimeIndex size() const { return TimeIndex(path.size()); }

    TimeIndex first(TimeIndex from, auto pred, const char* what) const {
        for (TimeIndex t = from; t < size(); ++t)
            if (pred(t)) return t;
        fail(ErrorCode::precondition, std::string("visit pattern fails: missing ") + what);
    }
    TimeIndex last(TimeIndex before, TimeIndex floor, auto pred, const char* what) const {
        for (TimeIndex t = before; t >= floor; --t)
            if (pred(t)) return t;
        fail(ErrorCode::precondition, std::string("visit pattern fails: missing ") + what);
    }
    bool in_s(TimeIndex t) const { return box.contains(path[t]); }
    bool on_half(TimeIndex t) const { return in_band(path[t], r.center, half); }
    bool on_c(TimeIndex t) const { return in_band(path[t], r.center, r.unit); }
};

void cut(const Scanner& sc, Decomposition& d, int visits, TimeIndex start) {
    // u_1, v_1, u_2, v_2, ... ; loops take one extra exit u_{k+1}
    TimeIndex t = sc.first(start, [&](TimeIndex x) { return sc.m(x) <= sc.r.within_rho; }, "first entry into the rho ball");
    d.u.push_back(t);
    for (int i = 0; i < visits; ++i) {
        t = sc.first(t, [&](TimeIndex x) { return sc.in_s(x); }, ("visit " + std::to_string(i + 1) + " to S").c_str());
        d.v.push_back(t);
        if (i + 1 < visits || d.loop) {
            t = sc.first(t + 1, [&](TimeIndex x) { return sc.m(x) >= sc.r.reach_rho; },
                         ("exit " + std::to_string(i + 1) + " to the rho circle").c_str());
            d.u.push_back(t);
        }
    }
    const int pairs = d.loop ? visits : visits - 1;
    TimeIndex lo = 0;
    for (int i = 0; i < visits; ++i) {
        TimeIndex s1 = sc.last(d.v[i], lo, [&](TimeIndex x) { return sc.on_half(x); }, "delta/2 crossing before a visit");
        TimeIndex t1 = sc.first(s1, [&](TimeIndex x) { return sc.on_c(x); }, "inner circle crossing");
        d.s.push_back(s1);
        d.t.push_back(t1);
        if (i < pairs) {
            TimeIndex s2 = sc.last(d.u[i + 1], d.v[i], [&](TimeIndex x) { return sc.on_c(x); }, "inner circle crossing before an exit");
            TimeIndex t2 = sc.first(s2, [&](TimeIndex x) { return sc.on_half(x); }, "delta/2 crossing after an exit");
            d.s.push_back(s2);
            d.t.push_back(t2);
            lo = t2;
        }
    }
}

}  // namespace

Decomposition excursion_bridge_decompose(const LatticePath& path, const DyadicBox& s, int visits, int K) {
    require(visits == 2 || visits == 3, ErrorCode::invalid_argument, "visits must be 2 or 3");
    require(path.dim() == s.dim, ErrorCode::invalid_argument, "path and box dimensions differ");
    Scanner sc{path, s, BoxRadii::of(s, K), 0};
    sc.half = sc.r.delta / 2;
    Decomposition d;
    cut(sc, d, visits, 0);
    d.end = d.v.back();
    const std::size_t ne = d.s.size();
    for (std::size_t i = 0; i < ne; ++i) {
        LatticePath w = path.slice(d.s[i], d.t[i]);
        d.excursions.push_back(i % 2 == 0 ? reverse(w) : w);
    }
    d.bridges.push_back(path.slice(0, d.s[0]));
    for (std::size_t i = 0; i + 1 < ne; ++i) d.bridges.push_back(path.slice(d.t[i], d.s[i + 1]));
    d.bridges.push_back(path.slice(d.t[ne - 1], d.end));
    return d;
}

LatticePath rotate_loop(const LatticePath& loop, TimeIndex rotation) {
    const TimeIndex len = loop.length();
    std::vector<LatticePoint> out;
    out.reserve(loop.size());
    for (TimeIndex k = 0; k <= len; ++k) out.push_back(loop[(rotation + k) % len]);
    return LatticePath(loop.dim(), std::move(out));
}

Decomposition loop_bridge_decompose(const LatticePath& loop, const DyadicBox& s, int K) {
    require(loop.length() >= 4 && loop.front() == loop.back(), ErrorCode::invalid_argument, "not a closed loop");
    BoxRadii r = BoxRadii::of(s, K);
    TimeIndex rot = 0;
    if (sq_dist2(loop.front(), r.center) < r.reach_rho) {
        std::int64_t best = -1;
        for (TimeIndex t = 0; t < loop.length(); ++t) {
            std::int64_t m = sq_dist2(loop[t], r.center);
            if (m > best) {
                best = m;
                rot = t;
            }
        }
    }
    LatticePath g = rotate_loop(loop, rot);
    Scanner sc{g, s, r, r.delta / 2};
    Decomposition d;
    d.loop = true;
    d.rotation = rot;
    cut(sc, d, 2, 0);
    d.end = g.length();
    for (std::size_t i = 0; i < 4; ++i) {
        LatticePath w = g.slice(d.s[i], d.t[i]);
        d.excursions.push_back(i % 2 == 0 ? reverse(w) : w);
    }
    for (std::size_t i = 0; i < 3; ++i) d.bridges.push_back(g.slice(d.t[i], d.s[i + 1]));
    // X^4 = g[t4, end] followed by g[0, s1]
    std::vector<LatticePoint> tail(g.sites().begin() + d.t[3], g.sites().end());
    tail.insert(tail.end(), g.sites().begin() + 1, g.sites().begin() + d.s[0] + 1);
    d.bridges.push_back(LatticePath(g.dim(), std::move(tail)));
    return d;
}

LatticePath Decomposition::reconstruct() const {
    std::vector<LatticePoint> out;
    auto append = [&](const LatticePath& p, bool rev) {
        std::vector<LatticePoint> s = p.sites();
        if (rev) s.assign(p.sites().rbegin(), p.sites().rend());
        if (!out.empty()) {
            require(out.back() == s.front(), ErrorCode::precondition, "pieces do not join");
            out.insert(out.end(), s.begin() + 1, s.end());
        } else {
            out = std::move(s);
        }
    };
    const int dim = bridges.empty() ? 2 : bridges.front().dim();
    if (!loop) {
        for (std::size_t i = 0; i < excursions.size(); ++i) {
            append(bridges[i], false);
            append(excursions[i], i % 2 == 0);
        }
        append(bridges.back(), false);
    } else {
        for (std::size_t i = 0; i < excursions.size(); ++i) {
            append(excursions[i], i % 2 == 0);
            append(bridges[i], false);
        }
    }
    return LatticePath(dim, std::move(out));
}

}  // namespace pioneer
