#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace pioneer {

struct LatticePoint {
    std::int32_t x = 0, y = 0, z = 0;
    auto operator<=>(const LatticePoint&) const = default;
};

inline constexpr std::array<std::array<int, 3>, 6> kSteps{{{1, 0, 0}, {0, 1, 0}, {-1, 0, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1}}};

inline LatticePoint step(LatticePoint p, unsigned dir) noexcept {
    p.x += kSteps[dir][0];
    p.y += kSteps[dir][1];
    p.z += kSteps[dir][2];
    return p;
}

// 21 bits per coordinate, offset binary
inline std::uint64_t pack(const LatticePoint& p) noexcept {
    constexpr std::uint64_t off = 1u << 20, mask = (1u << 21) - 1;
    return ((std::uint64_t(p.x + off) & mask) << 42) | ((std::uint64_t(p.y + off) & mask) << 21) |
           (std::uint64_t(p.z + off) & mask);
}

struct SiteHash {
    std::size_t operator()(const LatticePoint& p) const noexcept;
};

bool unit_step(const LatticePoint& a, const LatticePoint& b) noexcept;
std::string to_string(const LatticePoint& p, int dim);

// Point given in doubled coordinates, so box centers (half-integers) are exact.
struct Center2 {
    std::int64_t x2 = 0, y2 = 0, z2 = 0;
    auto operator<=>(const Center2&) const = default;
    static Center2 of(const LatticePoint& p) { return {2 * std::int64_t(p.x), 2 * std::int64_t(p.y), 2 * std::int64_t(p.z)}; }
};

// squared distance in doubled units: |2p - c2|^2
inline std::int64_t sq_dist2(const LatticePoint& p, const Center2& c) noexcept {
    std::int64_t dx = 2 * std::int64_t(p.x) - c.x2, dy = 2 * std::int64_t(p.y) - c.y2, dz = 2 * std::int64_t(p.z) - c.z2;
    return dx * dx + dy * dy + dz * dz;
}

// A radius r with 2r = p + q*sqrt(2), p and q integers. Comparisons of lattice
// distances against such radii are exact.
struct DoubledRadius {
    std::int64_t p = 0, q = 0;

    static DoubledRadius integer(std::int64_t r) { return {2 * r, 0}; }
    DoubledRadius minus(std::int64_t r) const { return {p - 2 * r, q}; }
    double value() const;

    // minimal M such that sqrt(M) >= 2r; dist >= r  <=>  sq_dist2 >= reach_threshold()
    std::int64_t reach_threshold() const;
    // maximal M such that sqrt(M) <= 2r (-1 when r < 0); dist <= r  <=>  sq_dist2 <= within_threshold()
    std::int64_t within_threshold() const;
};

struct Rect {
    int dim = 2;
    std::array<std::int64_t, 3> lo{}, hi{};  // inclusive

    bool empty() const;
    bool contains(const LatticePoint& p) const;
    std::int64_t extent(int axis) const { return hi[axis] - lo[axis] + 1; }
    std::int64_t volume() const;
    bool on_edge(const LatticePoint& p) const;
    static Rect square(int dim, std::int64_t half_width);  // [-h, h]^d
    auto operator<=>(const Rect&) const = default;
};

// Region: disc, annulus or rectangle. Discs hold the sites at distance <= r,
// annuli hold the sites at distance in [r1-1, r2] (both boundary bands).
// `resolution` tags the lattice radius of the unit disc; 0 means untagged.
struct Region {
    enum class Kind { disc, annulus, rect };
    Kind kind = Kind::rect;
    int dim = 2;
    Center2 center{};
    std::int64_t r1 = 0, r2 = 0;
    Rect rect{};
    std::int64_t resolution = 0;

    static Region disc(int dim, Center2 c, std::int64_t r, std::int64_t resolution = 0);
    static Region annulus(int dim, Center2 c, std::int64_t r1, std::int64_t r2, std::int64_t resolution = 0);
    static Region box(const Rect& r, std::int64_t resolution = 0);

    bool contains(const LatticePoint& p) const;
    bool in_inner_band(const LatticePoint& p) const;  // annulus: dist in [r1-1, r1]
    bool in_outer_band(const LatticePoint& p) const;  // annulus: dist in [r2-1, r2]
    Rect bounds() const;
    std::vector<LatticePoint> sites() const;
};

// Discrete circle band: sites at distance in [v-1, v] from c.
std::vector<LatticePoint> circle_band(int dim, Center2 c, std::int64_t v);
bool in_band(const LatticePoint& p, Center2 c, std::int64_t v);

// Unit disc radius in lattice units; a power of two.
struct Resolution {
    int dim = 2;
    std::int64_t radius = 1;
    static Resolution from_levels(int dim, int n_max, int oversampling);
    std::int64_t unit(int n) const;  // sites per side of an n-box
};

struct DyadicBox {
    int dim = 2;
    int n = 0;
    std::array<std::int64_t, 3> idx{};
    std::int64_t unit = 1;        // sites per side
    std::int64_t resolution = 1;  // unit-disc radius in sites

    static DyadicBox containing(const LatticePoint& p, int n, const Resolution& res);
    static DyadicBox make(const Resolution& res, int n, std::int64_t i, std::int64_t j, std::int64_t k = 0);

    bool contains(const LatticePoint& p) const;
    Center2 center() const;
    Rect rect() const;
    DyadicBox parent() const;
    std::vector<DyadicBox> children() const;
    std::vector<LatticePoint> sites() const;
    // D_{-n}(S): sites within distance unit of the center
    std::vector<LatticePoint> margin_disc() const;
    auto operator<=>(const DyadicBox&) const = default;
};

// S < A: the disc of radius 2^{-n} about S's center lies inside A (site-wise).
bool box_margin_contained(const DyadicBox& s, const Region& a);

std::int64_t isqrt(unsigned __int128 v);
std::int64_t isqrt64(std::int64_t v);

}  // namespace pioneer
