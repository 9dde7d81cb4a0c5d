#include "pioneer/lattice.hpp"

#include <algorithm>
#include <cmath>

#include "pioneer/error.hpp"

namespace pioneer {

std::size_t SiteHash::operator()(const LatticePoint& p) const noexcept {
    std::uint64_t h = pack(p) * 0x9E3779B97F4A7C15ull;
    return static_cast<std::size_t>(h ^ (h >> 29));
}

bool unit_step(const LatticePoint& a, const LatticePoint& b) noexcept {
    std::int64_t d = std::abs(std::int64_t(a.x) - b.x) + std::abs(std::int64_t(a.y) - b.y) + std::abs(std::int64_t(a.z) - b.z);
    return d == 1;
}

std::string to_string(const LatticePoint& p, int dim) {
    std::string s = std::to_string(p.x) + "," + std::to_string(p.y);
    if (dim == 3) s += "," + std::to_string(p.z);
    return s;
}

std::int64_t isqrt(unsigned __int128 v) {
    if (v == 0) return 0;
    auto r = static_cast<unsigned __int128>(std::sqrt(static_cast<long double>(v)));
    while (r * r > v) --r;
    while ((r + 1) * (r + 1) <= v) ++r;
    return static_cast<std::int64_t>(r);
}

std::int64_t isqrt64(std::int64_t v) { return v <= 0 ? 0 : isqrt(static_cast<unsigned __int128>(v)); }

double DoubledRadius::value() const { return 0.5 * (double(p) + double(q) * std::sqrt(2.0)); }

namespace {

// sign of p + q*sqrt(2)
int radius_sign(std::int64_t p, std::int64_t q) {
    if (p >= 0 && q >= 0) return (p == 0 && q == 0) ? 0 : 1;
    if (p <= 0 && q <= 0) return -1;
    __int128 pp = __int128(p) * p, qq = 2 * __int128(q) * q;
    if (p > 0) return pp > qq ? 1 : -1;
    return qq > pp ? 1 : -1;
}

// floor((p + q sqrt 2)^2) for p + q sqrt 2 >= 0; `exact` reports an integer square
__int128 floor_square(std::int64_t p, std::int64_t q, bool& exact) {
    __int128 base = __int128(p) * p + 2 * __int128(q) * q;
    __int128 s = 2 * __int128(p) * q;  // cross term s*sqrt(2)
    if (s == 0) {
        exact = true;
        return base;
    }
    exact = false;
    auto mag = static_cast<unsigned __int128>(s < 0 ? -s : s);
    __int128 root = isqrt(2 * mag * mag);  // floor(|s| sqrt 2), never exact
    return s > 0 ? base + root : base - root - 1;
}

}  // namespace

std::int64_t DoubledRadius::reach_threshold() const {
    if (radius_sign(p, q) <= 0) return 0;
    bool exact = false;
    __int128 f = floor_square(p, q, exact);
    return static_cast<std::int64_t>(exact ? f : f + 1);
}

std::int64_t DoubledRadius::within_threshold() const {
    int sg = radius_sign(p, q);
    if (sg < 0) return -1;
    if (sg == 0) return 0;
    bool exact = false;
    return static_cast<std::int64_t>(floor_square(p, q, exact));
}

bool Rect::empty() const {
    for (int a = 0; a < dim; ++a)
        if (hi[a] < lo[a]) return true;
    return false;
}

bool Rect::contains(const LatticePoint& p) const {
    std::int64_t c[3] = {p.x, p.y, p.z};
    for (int a = 0; a < dim; ++a)
        if (c[a] < lo[a] || c[a] > hi[a]) return false;
    return dim == 3 || p.z == 0;
}

std::int64_t Rect::volume() const {
    if (empty()) return 0;
    std::int64_t v = 1;
    for (int a = 0; a < dim; ++a) v *= extent(a);
    return v;
}

bool Rect::on_edge(const LatticePoint& p) const {
    std::int64_t c[3] = {p.x, p.y, p.z};
    for (int a = 0; a < dim; ++a)
        if (c[a] == lo[a] || c[a] == hi[a]) return true;
    return false;
}

Rect Rect::square(int dim, std::int64_t h) {
    Rect r;
    r.dim = dim;
    for (int a = 0; a < dim; ++a) {
        r.lo[a] = -h;
        r.hi[a] = h;
    }
    return r;
}

Region Region::disc(int dim, Center2 c, std::int64_t r, std::int64_t resolution) {
    Region g;
    g.kind = Kind::disc;
    g.dim = dim;
    g.center = c;
    g.r2 = r;
    g.resolution = resolution;
    return g;
}

Region Region::annulus(int dim, Center2 c, std::int64_t r1, std::int64_t r2, std::int64_t resolution) {
    require(r1 < r2, ErrorCode::invalid_argument, "degenerate annulus: r1 >= r2");
    require(r1 >= 1, ErrorCode::invalid_argument, "annulus inner radius must be >= 1");
    Region g;
    g.kind = Kind::annulus;
    g.dim = dim;
    g.center = c;
    g.r1 = r1;
    g.r2 = r2;
    g.resolution = resolution;
    return g;
}

Region Region::box(const Rect& r, std::int64_t resolution) {
    Region g;
    g.kind = Kind::rect;
    g.dim = r.dim;
    g.rect = r;
    g.resolution = resolution;
    return g;
}

bool Region::contains(const LatticePoint& p) const {
    if (dim == 2 && p.z != 0) return false;
    switch (kind) {
        case Kind::rect:
            return rect.contains(p);
        case Kind::disc:
            return sq_dist2(p, center) <= 4 * r2 * r2;
        case Kind::annulus: {
            std::int64_t m = sq_dist2(p, center);
            std::int64_t a = r1 - 1;
            return m >= 4 * a * a && m <= 4 * r2 * r2;
        }
    }
    return false;
}

bool in_band(const LatticePoint& p, Center2 c, std::int64_t v) {
    std::int64_t m = sq_dist2(p, c), a = std::max<std::int64_t>(v - 1, 0);
    return m >= 4 * a * a && m <= 4 * v * v;
}

bool Region::in_inner_band(const LatticePoint& p) const {
    return kind == Kind::annulus && contains(p) && in_band(p, center, r1);
}

bool Region::in_outer_band(const LatticePoint& p) const {
    return kind == Kind::annulus && contains(p) && in_band(p, center, r2);
}

Rect Region::bounds() const {
    if (kind == Kind::rect) return rect;
    Rect r;
    r.dim = dim;
    std::int64_t c[3] = {center.x2, center.y2, center.z2};
    for (int a = 0; a < dim; ++a) {
        // sites x with |2x - c| <= 2 r2
        r.lo[a] = static_cast<std::int64_t>(std::ceil((double(c[a]) - 2.0 * double(r2)) / 2.0));
        r.hi[a] = static_cast<std::int64_t>(std::floor((double(c[a]) + 2.0 * double(r2)) / 2.0));
    }
    return r;
}

namespace {

template <class F>
void for_each_site(const Rect& r, F&& f) {
    if (r.empty()) return;
    std::int64_t zlo = r.dim == 3 ? r.lo[2] : 0, zhi = r.dim == 3 ? r.hi[2] : 0;
    for (std::int64_t z = zlo; z <= zhi; ++z)
        for (std::int64_t y = r.lo[1]; y <= r.hi[1]; ++y)
            for (std::int64_t x = r.lo[0]; x <= r.hi[0]; ++x)
                f(LatticePoint{std::int32_t(x), std::int32_t(y), std::int32_t(z)});
}

}  // namespace

std::vector<LatticePoint> Region::sites() const {
    std::vector<LatticePoint> out;
    for_each_site(bounds(), [&](const LatticePoint& p) {
        if (contains(p)) out.push_back(p);
    });
    return out;
}

std::vector<LatticePoint> circle_band(int dim, Center2 c, std::int64_t v) {
    std::vector<LatticePoint> out;
    for_each_site(Region::disc(dim, c, v).bounds(), [&](const LatticePoint& p) {
        if (in_band(p, c, v)) out.push_back(p);
    });
    return out;
}

Resolution Resolution::from_levels(int dim, int n_max, int oversampling) {
    require(dim == 2 || dim == 3, ErrorCode::invalid_argument, "dimension must be 2 or 3");
    require(n_max >= 0 && oversampling >= 0 && n_max + oversampling <= 20, ErrorCode::invalid_argument,
            "resolution exponent out of range");
    return Resolution{dim, std::int64_t(1) << (n_max + oversampling)};
}

std::int64_t Resolution::unit(int n) const {
    require(n >= 0 && (radius >> n) >= 1, ErrorCode::config,
            "scale n=" + std::to_string(n) + " is finer than the lattice resolution " + std::to_string(radius));
    return radius >> n;
}

namespace {
std::int64_t floor_div(std::int64_t a, std::int64_t b) {
    std::int64_t q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}
}  // namespace

DyadicBox DyadicBox::make(const Resolution& res, int n, std::int64_t i, std::int64_t j, std::int64_t k) {
    DyadicBox b;
    b.dim = res.dim;
    b.n = n;
    b.idx = {i, j, res.dim == 3 ? k : 0};
    b.unit = res.unit(n);
    b.resolution = res.radius;
    return b;
}

DyadicBox DyadicBox::containing(const LatticePoint& p, int n, const Resolution& res) {
    std::int64_t u = res.unit(n);
    return make(res, n, floor_div(p.x, u), floor_div(p.y, u), res.dim == 3 ? floor_div(p.z, u) : 0);
}

bool DyadicBox::contains(const LatticePoint& p) const {
    std::int64_t c[3] = {p.x, p.y, p.z};
    for (int a = 0; a < dim; ++a)
        if (floor_div(c[a], unit) != idx[a]) return false;
    return dim == 3 || p.z == 0;
}

Center2 DyadicBox::center() const {
    Center2 c;
    c.x2 = 2 * idx[0] * unit + unit - 1;
    c.y2 = 2 * idx[1] * unit + unit - 1;
    c.z2 = dim == 3 ? 2 * idx[2] * unit + unit - 1 : 0;
    return c;
}

Rect DyadicBox::rect() const {
    Rect r;
    r.dim = dim;
    for (int a = 0; a < dim; ++a) {
        r.lo[a] = idx[a] * unit;
        r.hi[a] = idx[a] * unit + unit - 1;
    }
    return r;
}

DyadicBox DyadicBox::parent() const {
    require(n >= 1, ErrorCode::invalid_argument, "scale-0 box has no parent");
    DyadicBox b = *this;
    b.n = n - 1;
    b.unit = unit * 2;
    for (int a = 0; a < dim; ++a) b.idx[a] = floor_div(idx[a], 2);
    return b;
}

std::vector<DyadicBox> DyadicBox::children() const {
    require(unit >= 2, ErrorCode::config, "box cannot be subdivided at this resolution");
    std::vector<DyadicBox> out;
    int kmax = dim == 3 ? 2 : 1;
    for (int k = 0; k < kmax; ++k)
        for (int j = 0; j < 2; ++j)
            for (int i = 0; i < 2; ++i) {
                DyadicBox b = *this;
                b.n = n + 1;
                b.unit = unit / 2;
                b.idx = {2 * idx[0] + i, 2 * idx[1] + j, dim == 3 ? 2 * idx[2] + k : 0};
                out.push_back(b);
            }
    return out;
}

std::vector<LatticePoint> DyadicBox::sites() const {
    std::vector<LatticePoint> out;
    for_each_site(rect(), [&](const LatticePoint& p) { out.push_back(p); });
    return out;
}

std::vector<LatticePoint> DyadicBox::margin_disc() const { return Region::disc(dim, center(), unit).sites(); }

namespace {

// Row-wise check: the disc is a union of axis-x segments; along a segment the
// distance to the region center is convex in x, so the extremes sit at the
// segment ends (farthest) and at the clamped projection (nearest).
bool disc_inside(const Center2& c, std::int64_t r, int dim, const Region& a) {
    const std::int64_t mmax = 4 * r * r;
    std::int64_t ylo = static_cast<std::int64_t>(std::ceil((double(c.y2) - 2.0 * r) / 2.0));
    std::int64_t yhi = static_cast<std::int64_t>(std::floor((double(c.y2) + 2.0 * r) / 2.0));
    std::int64_t zlo = 0, zhi = 0;
    if (dim == 3) {
        zlo = static_cast<std::int64_t>(std::ceil((double(c.z2) - 2.0 * r) / 2.0));
        zhi = static_cast<std::int64_t>(std::floor((double(c.z2) + 2.0 * r) / 2.0));
    }
    for (std::int64_t z = zlo; z <= zhi; ++z) {
        std::int64_t dz = 2 * z - c.z2;
        for (std::int64_t y = ylo; y <= yhi; ++y) {
            std::int64_t dy = 2 * y - c.y2;
            std::int64_t rest = mmax - dy * dy - dz * dz;
            if (rest < 0) continue;
            std::int64_t s = isqrt64(rest);
            // x with |2x - cx| <= s
            std::int64_t xlo = floor_div(c.x2 - s + 1, 2), xhi = floor_div(c.x2 + s, 2);
            if (xlo > xhi) continue;
            LatticePoint lo{std::int32_t(xlo), std::int32_t(y), std::int32_t(z)};
            LatticePoint hi{std::int32_t(xhi), std::int32_t(y), std::int32_t(z)};
            switch (a.kind) {
                case Region::Kind::rect:
                    if (!a.rect.contains(lo) || !a.rect.contains(hi)) return false;
                    break;
                case Region::Kind::disc:
                case Region::Kind::annulus: {
                    const std::int64_t outer = 4 * a.r2 * a.r2;
                    if (sq_dist2(lo, a.center) > outer || sq_dist2(hi, a.center) > outer) return false;
                    if (a.kind == Region::Kind::annulus) {
                        const std::int64_t inner = 4 * (a.r1 - 1) * (a.r1 - 1);
                        std::int64_t near = std::clamp(floor_div(a.center.x2, 2), xlo, xhi);
                        std::int64_t best = INT64_MAX;
                        for (std::int64_t x : {near, std::clamp(near + 1, xlo, xhi)}) {
                            LatticePoint p{std::int32_t(x), std::int32_t(y), std::int32_t(z)};
                            best = std::min(best, sq_dist2(p, a.center));
                        }
                        if (best < inner) return false;
                    }
                    break;
                }
            }
        }
    }
    return true;
}

}  // namespace

bool box_margin_contained(const DyadicBox& s, const Region& a) {
    require(a.resolution == s.resolution, ErrorCode::invalid_argument,
            "box and region use different lattice resolutions");
    require(a.dim == s.dim, ErrorCode::invalid_argument, "box and region dimensions differ");
    return disc_inside(s.center(), s.unit, s.dim, a);
}

}  // namespace pioneer
