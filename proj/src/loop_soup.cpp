#include "pioneer/loop_soup.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "pioneer/error.hpp"

namespace pioneer {

LatticeLoop::LatticeLoop(LatticePath path) : path_(std::move(path)) {
    require(path_.dim() == 2, ErrorCode::invalid_argument, "loops are planar");
    require(!path_.empty() && path_.front() == path_.back(), ErrorCode::invalid_argument, "loop is not closed");
    require(path_.length() >= 4 && path_.length() % 2 == 0, ErrorCode::invalid_argument, "loop length must be even and >= 4");
}

namespace {

std::int64_t cross(const LatticePoint& o, const LatticePoint& a, const LatticePoint& b) {
    return (std::int64_t(a.x) - o.x) * (std::int64_t(b.y) - o.y) - (std::int64_t(a.y) - o.y) * (std::int64_t(b.x) - o.x);
}

std::int64_t diameter_sq_of(std::vector<LatticePoint> pts) {
    std::sort(pts.begin(), pts.end(), [](const LatticePoint& a, const LatticePoint& b) {
        return a.x != b.x ? a.x < b.x : a.y < b.y;
    });
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    if (pts.size() < 2) return 0;
    std::vector<LatticePoint> hull(2 * pts.size());
    std::size_t k = 0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        while (k >= 2 && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
        hull[k++] = pts[i];
    }
    for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
        while (k >= t && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
        hull[k++] = pts[i];
    }
    hull.resize(k - 1);
    std::int64_t best = 0;
    for (std::size_t i = 0; i < hull.size(); ++i)
        for (std::size_t j = i + 1; j < hull.size(); ++j) {
            std::int64_t dx = std::int64_t(hull[i].x) - hull[j].x, dy = std::int64_t(hull[i].y) - hull[j].y;
            best = std::max(best, dx * dx + dy * dy);
        }
    return best;
}

// per-root length distribution for l in [lmin, lmax], weights p_l / l
struct LengthTable {
    std::int64_t lmin = 4, lmax = 4;
    double mass = 0.0;  // sum of weights
    std::vector<double> cdf;

    std::int64_t draw(RngStream& rng) const {
        double u = rng.uniform() * mass;
        auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
        std::size_t i = std::min<std::size_t>(std::size_t(it - cdf.begin()), cdf.size() - 1);
        return lmin + 2 * std::int64_t(i);
    }
};

std::shared_ptr<const LengthTable> length_table(std::int64_t lmin, std::int64_t lmax) {
    static std::mutex mu;
    static std::map<std::pair<std::int64_t, std::int64_t>, std::shared_ptr<const LengthTable>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto key = std::make_pair(lmin, lmax);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
    auto t = std::make_shared<LengthTable>();
    t->lmin = lmin;
    t->lmax = lmax;
    double a = 1.0;  // C(l, l/2) 2^{-l}
    double acc = 0.0;
    for (std::int64_t l = 0; l <= lmax; l += 2) {
        if (l >= lmin) {
            acc += a * a / double(l);
            t->cdf.push_back(acc);
        }
        a *= double(l + 1) / double(l + 2);
    }
    t->mass = acc;
    if (cache.size() > 64) cache.clear();
    cache.emplace(key, t);
    return t;
}

std::int64_t even_at_least(std::int64_t v) { return v % 2 == 0 ? v : v + 1; }

}  // namespace

std::int64_t LatticeLoop::diameter_sq() const { return diameter_sq_of(path_.sites()); }

double return_probability_2d(std::int64_t length) {
    if (length < 0 || length % 2) return 0.0;
    double a = 1.0;
    for (std::int64_t l = 0; l < length; l += 2) a *= double(l + 1) / double(l + 2);
    return a * a;
}

std::int64_t default_max_length(const Region& domain) {
    Rect b = domain.bounds();
    double diam = std::sqrt(double(b.extent(0)) * double(b.extent(0)) + double(b.extent(1)) * double(b.extent(1)));
    return even_at_least(static_cast<std::int64_t>(16.0 * diam * diam));
}

std::int64_t sample_poisson(double mean, RngStream& rng) {
    require(mean >= 0.0 && std::isfinite(mean), ErrorCode::invalid_argument, "Poisson mean must be finite and >= 0");
    if (mean == 0.0) return 0;
    if (mean < 12.0) {
        const double limit = std::exp(-mean);
        std::int64_t k = 0;
        double p = rng.uniform();
        while (p > limit) {
            ++k;
            p *= rng.uniform();
        }
        return k;
    }
    // PTRS (Hormann 1993)
    const double slam = std::sqrt(mean), loglam = std::log(mean);
    const double b = 0.931 + 2.53 * slam, a = -0.059 + 0.02483 * b;
    const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4), vr = 0.9277 - 3.6224 / (b - 2.0);
    for (;;) {
        const double u = rng.uniform() - 0.5, v = rng.uniform();
        const double us = 0.5 - std::abs(u);
        const auto k = static_cast<std::int64_t>(std::floor((2.0 * a / us + b) * u + mean + 0.43));
        if (us >= 0.07 && v <= vr) return k;
        if (k < 0 || (us < 0.013 && v > us)) continue;
        if (std::log(v) + std::log(inv_alpha) - std::log(a / (us * us) + b) <= -mean + double(k) * loglam - std::lgamma(double(k) + 1.0))
            return k;
    }
}

LatticePath sample_closed_walk(const LatticePoint& root, std::int64_t length, RngStream& rng) {
    require(length >= 0 && length % 2 == 0, ErrorCode::invalid_argument, "closed walk length must be even");
    // in rotated coordinates u = x + y, v = x - y the walk is two independent +-1 bridges
    std::vector<std::int8_t> du(std::size_t(length), 1), dv(std::size_t(length), 1);
    for (std::size_t i = std::size_t(length / 2); i < std::size_t(length); ++i) du[i] = dv[i] = -1;
    for (auto* seq : {&du, &dv})
        for (std::size_t i = seq->size(); i > 1; --i) std::swap((*seq)[i - 1], (*seq)[rng.below(std::uint32_t(i))]);
    std::vector<LatticePoint> sites(std::size_t(length) + 1);
    sites[0] = root;
    for (std::size_t i = 0; i < std::size_t(length); ++i) {
        LatticePoint p = sites[i];
        p.x += (du[i] + dv[i]) / 2;
        p.y += (du[i] - dv[i]) / 2;
        sites[i + 1] = p;
    }
    return LatticePath(2, std::move(sites));
}

LoopSoup sample_loop_soup(const Region& domain, double c, std::int64_t cutoff, RngStream& rng, std::int64_t max_length) {
    require(c >= 0.0 && std::isfinite(c), ErrorCode::invalid_argument, "intensity must be >= 0");
    require(cutoff >= 0, ErrorCode::invalid_argument, "diameter cutoff must be >= 0");
    require(domain.dim == 2, ErrorCode::invalid_argument, "loop soups are planar");
    LoopSoup soup;
    soup.intensity = c;
    soup.domain = domain;
    soup.cutoff = cutoff;
    soup.max_length = max_length > 0 ? max_length : default_max_length(domain);
    // a loop of length l has diameter <= l/2, so shorter lengths never pass the cutoff
    const std::int64_t lmin = std::max<std::int64_t>(4, even_at_least(2 * cutoff));
    if (c == 0.0 || lmin > soup.max_length) return soup;
    const std::vector<LatticePoint> roots = domain.sites();
    if (roots.empty()) return soup;
    auto table = length_table(lmin, soup.max_length - soup.max_length % 2);
    const std::int64_t count = sample_poisson(0.5 * c * table->mass * double(roots.size()), rng);
    const std::int64_t cut2 = cutoff * cutoff;
    for (std::int64_t i = 0; i < count; ++i) {
        const LatticePoint& root = roots[rng.below64(roots.size())];
        std::int64_t len = table->draw(rng);
        LatticePath walk = sample_closed_walk(root, len, rng);
        bool inside = std::all_of(walk.sites().begin(), walk.sites().end(), [&](const LatticePoint& p) { return domain.contains(p); });
        if (!inside) continue;
        LatticeLoop loop(std::move(walk));
        if (cut2 > 0 && loop.diameter_sq() < cut2) continue;
        soup.loops.push_back(std::move(loop));
    }
    return soup;
}

LatticeLoop sample_conditioned_loop(double iota, std::int64_t radius, RngStream& rng, ConditionedLoopStats* stats, std::int64_t max_attempts) {
    require(iota > 0.0 && iota < 0.5, ErrorCode::invalid_argument, "iota must lie in (0, 1/2)");
    require(radius >= 4, ErrorCode::invalid_argument, "disc radius too small");
    const Region disc = Region::disc(2, Center2{}, radius);
    const double r_in = iota * double(radius), r_out = (1.0 - iota) * double(radius), min_diam = 0.5 * iota * double(radius);
    // diameter <= l/2, so l must exceed iota R
    const std::int64_t lmin = std::max<std::int64_t>(4, even_at_least(static_cast<std::int64_t>(std::floor(2.0 * min_diam)) + 1));
    const std::int64_t lmax = default_max_length(disc);
    require(lmin <= lmax, ErrorCode::invalid_argument, "conditioning unreachable at this radius");
    auto table = length_table(lmin, lmax);
    const std::vector<LatticePoint> roots = disc.sites();
    for (std::int64_t attempt = 1; attempt <= max_attempts; ++attempt) {
        const LatticePoint& root = roots[rng.below64(roots.size())];
        LatticePath walk = sample_closed_walk(root, table->draw(rng), rng);
        std::int64_t far = 0;
        bool inside = true;
        for (const auto& p : walk.sites()) {
            std::int64_t m = std::int64_t(p.x) * p.x + std::int64_t(p.y) * p.y;
            if (m > radius * radius) {
                inside = false;
                break;
            }
            far = std::max(far, m);
        }
        if (!inside) continue;
        if (!(double(far) > r_in * r_in && double(far) < r_out * r_out)) continue;
        LatticeLoop loop(std::move(walk));
        if (!(double(loop.diameter_sq()) > min_diam * min_diam)) continue;
        if (stats) stats->attempts = attempt;
        return loop;
    }
    fail(ErrorCode::budget_exceeded, "conditioned loop rejection budget exceeded");
}

namespace {

struct Dsu {
    std::vector<std::int32_t> p;
    explicit Dsu(std::size_t n) : p(n) { std::iota(p.begin(), p.end(), 0); }
    std::int32_t find(std::int32_t a) {
        while (p[std::size_t(a)] != a) a = p[std::size_t(a)] = p[std::size_t(p[std::size_t(a)])];
        return a;
    }
    void unite(std::int32_t a, std::int32_t b) {
        a = find(a), b = find(b);
        if (a != b) p[std::size_t(std::max(a, b))] = std::min(a, b);
    }
};

}  // namespace

ClusterPartition clusters(const std::vector<const LatticePath*>& loops) {
    Dsu dsu(loops.size());
    std::unordered_map<std::uint64_t, std::int32_t> owner;
    for (std::size_t i = 0; i < loops.size(); ++i)
        for (const auto& p : loops[i]->sites()) {
            auto [it, fresh] = owner.emplace(pack(p), std::int32_t(i));
            if (!fresh) dsu.unite(it->second, std::int32_t(i));
        }
    ClusterPartition part;
    part.cluster_of.assign(loops.size(), -1);
    std::vector<std::int32_t> id_of_root(loops.size(), -1);
    for (std::size_t i = 0; i < loops.size(); ++i) {
        std::int32_t r = dsu.find(std::int32_t(i));
        if (id_of_root[std::size_t(r)] < 0) {
            id_of_root[std::size_t(r)] = std::int32_t(part.members.size());
            part.members.emplace_back();
        }
        part.cluster_of[i] = id_of_root[std::size_t(r)];
        part.members[std::size_t(part.cluster_of[i])].push_back(std::int32_t(i));
    }
    part.cluster_sites.resize(part.members.size());
    for (std::size_t c = 0; c < part.members.size(); ++c) {
        auto& s = part.cluster_sites[c];
        for (auto i : part.members[c]) s.insert(s.end(), loops[std::size_t(i)]->sites().begin(), loops[std::size_t(i)]->sites().end());
        std::sort(s.begin(), s.end());
        s.erase(std::unique(s.begin(), s.end()), s.end());
    }
    return part;
}

ClusterPartition clusters(const LoopSoup& soup) {
    std::vector<const LatticePath*> ptrs;
    ptrs.reserve(soup.loops.size());
    for (const auto& l : soup.loops) ptrs.push_back(&l.path());
    return clusters(ptrs);
}

std::string ClusterPartition::report() const {
    std::ostringstream os;
    for (std::size_t i = 0; i < cluster_of.size(); ++i) os << i << ' ' << cluster_of[i] << '\n';
    return os.str();
}

GridMask cluster_outer_boundary(const ClusterPartition& partition, std::int32_t id, const Rect& window) {
    require(id >= 0 && std::size_t(id) < partition.size(), ErrorCode::invalid_argument, "unknown cluster id");
    const auto& sites = partition.cluster_sites[std::size_t(id)];
    require(!sites.empty(), ErrorCode::invalid_argument, "empty cluster");
    GridMask occ = rasterize(sites, window);
    std::vector<std::uint8_t> ext(occ.size(), 0);
    std::vector<std::size_t> stack;
    for (const auto& p : window_edge(window))
        if (!occ.occupied(p)) {
            ext[occ.index(p)] = 1;
            stack.push_back(occ.index(p));
        }
    LatticePoint nb[6];
    while (!stack.empty()) {
        std::size_t i = stack.back();
        stack.pop_back();
        int k = neighbours(window, occ.site(i), nb);
        for (int j = 0; j < k; ++j) {
            std::size_t q = occ.index(nb[j]);
            if (ext[q] || occ.occupied(nb[j])) continue;
            ext[q] = 1;
            stack.push_back(q);
        }
    }
    GridMask out(window);
    for (const auto& p : sites) {
        if (!window.contains(p)) continue;
        bool boundary = window.on_edge(p);
        int k = neighbours(window, p, nb);
        for (int j = 0; j < k && !boundary; ++j) boundary = ext[occ.index(nb[j])] != 0;
        if (boundary) out.set(p);
    }
    return out;
}

LoopSoup restrict_soup(const LoopSoup& soup, const Region& sub) {
    for (const auto& p : sub.sites())
        require(soup.domain.contains(p), ErrorCode::invalid_argument, "subdomain is not contained in the soup domain");
    LoopSoup out = soup;
    out.domain = sub;
    out.loops.clear();
    for (const auto& l : soup.loops)
        if (std::all_of(l.path().sites().begin(), l.path().sites().end(), [&](const LatticePoint& p) { return sub.contains(p); }))
            out.loops.push_back(l);
    return out;
}

namespace {

std::string region_text(const Region& r) {
    std::ostringstream os;
    switch (r.kind) {
        case Region::Kind::disc:
            os << "disc " << r.center.x2 << ' ' << r.center.y2 << ' ' << r.r2;
            break;
        case Region::Kind::annulus:
            os << "annulus " << r.center.x2 << ' ' << r.center.y2 << ' ' << r.r1 << ' ' << r.r2;
            break;
        case Region::Kind::rect:
            os << "rect " << r.rect.lo[0] << ' ' << r.rect.lo[1] << ' ' << r.rect.hi[0] << ' ' << r.rect.hi[1];
            break;
    }
    return os.str();
}

Region parse_region(std::istream& is) {
    std::string kind;
    is >> kind;
    if (kind == "disc") {
        Center2 c;
        std::int64_t r = 0;
        is >> c.x2 >> c.y2 >> r;
        return Region::disc(2, c, r);
    }
    if (kind == "annulus") {
        Center2 c;
        std::int64_t r1 = 0, r2 = 0;
        is >> c.x2 >> c.y2 >> r1 >> r2;
        return Region::annulus(2, c, r1, r2);
    }
    require(kind == "rect", ErrorCode::invalid_argument, "bad soup domain");
    Rect b;
    b.dim = 2;
    is >> b.lo[0] >> b.lo[1] >> b.hi[0] >> b.hi[1];
    return Region::box(b);
}

}  // namespace

std::string LoopSoup::serialize() const {
    std::ostringstream os;
    os.precision(17);
    os << "soup " << intensity << ' ' << cutoff << ' ' << max_length << ' ' << loops.size() << ' ' << region_text(domain) << '\n';
    for (const auto& l : loops) os << to_string(l.root(), 2) << ' ' << step_letters(l.path()) << '\n';
    return os.str();
}

LoopSoup LoopSoup::parse(const std::string& text) {
    std::istringstream is(text);
    std::string tag;
    std::size_t n = 0;
    LoopSoup s;
    is >> tag >> s.intensity >> s.cutoff >> s.max_length >> n;
    require(bool(is) && tag == "soup", ErrorCode::invalid_argument, "bad soup header");
    s.domain = parse_region(is);
    for (std::size_t i = 0; i < n; ++i) {
        std::string root, letters;
        is >> root >> letters;
        require(bool(is), ErrorCode::invalid_argument, "truncated soup");
        LatticePoint p;
        char comma = 0;
        std::istringstream rs(root);
        rs >> p.x >> comma >> p.y;
        s.loops.emplace_back(from_letters(2, p, letters));
    }
    return s;
}

}  // namespace pioneer
