#include <doctest.h>

#include "../support/masks.hpp"
#include "../support/oracles.hpp"
#include "pioneer/error.hpp"
#include "pioneer/grid_mask.hpp"
#include "pioneer/lattice.hpp"
#include "pioneer/path.hpp"
#include "pioneer/rng.hpp"

using namespace pioneer;

namespace {

GridMask to_mask(const std::set<LatticePoint>& occ, int h) {
    return rasterize(std::vector<LatticePoint>(occ.begin(), occ.end()), Rect::square(2, h));
}

std::vector<LatticePoint> ring_sites(double r, int h) {
    std::vector<LatticePoint> v;
    for (int y = -h; y <= h; ++y)
        for (int x = -h; x <= h; ++x) {
            const double d = std::hypot(x, y);
            if (d >= r - 1 && d <= r) v.push_back({x, y, 0});
        }
    return v;
}

}  // namespace

TEST_CASE("dyadic boxes map to exact lattice squares") {
    Resolution res{2, 256};
    DyadicBox b = DyadicBox::make(res, 4, 3, -2);
    CHECK(b.unit == 16);
    CHECK(b.rect().lo[0] == 48);
    CHECK(b.rect().hi[1] == -17);
    CHECK(b.center() == Center2{2 * 48 + 15, 2 * -32 + 15, 0});
    CHECK(b.parent() == DyadicBox::make(res, 3, 1, -1));
    auto kids = b.children();
    REQUIRE(kids.size() == 4);
    for (const auto& k : kids) CHECK(k.parent() == b);
    CHECK(DyadicBox::containing(LatticePoint{50, -20, 0}, 4, res) == b);
    CHECK(b.sites().size() == 256);
    CHECK_THROWS_AS(res.unit(9), Error);
}

TEST_CASE("box_margin_contained examples") {
    const std::int64_t R = 256;
    Resolution res{2, R};
    const int n = 4;  // unit 16
    Region a = Region::annulus(2, Center2{}, 4 * 16, 32 * 16, R);
    CHECK(box_margin_contained(DyadicBox::make(res, n, 8, 0), a));
    // a box whose margin disc pokes through the outer circle
    Region small = Region::annulus(2, Center2{}, 16, 100, R);
    CHECK_FALSE(box_margin_contained(DyadicBox::make(res, n, 5, 0), small));
    CHECK_THROWS_AS(box_margin_contained(DyadicBox::make(res, n, 5, 0), Region::annulus(2, Center2{}, 16, 100, 512)), Error);
}

TEST_CASE("box_margin_contained matches site-by-site check on random pairs") {
    RngStream rng(11, 0);
    const std::int64_t R = 32;
    Resolution res{2, R};
    for (int trial = 0; trial < 100; ++trial) {
        const int n = 2 + int(rng.below(4));
        const std::int64_t u = res.unit(n), span = R / u;
        DyadicBox b = DyadicBox::make(res, n, std::int64_t(rng.below(std::uint32_t(2 * span))) - span,
                                      std::int64_t(rng.below(std::uint32_t(2 * span))) - span);
        Center2 c{std::int64_t(rng.below(20)) - 10, std::int64_t(rng.below(20)) - 10, 0};
        const std::int64_t r1 = 1 + rng.below(12), r2 = r1 + 1 + rng.below(20);
        Region a = Region::annulus(2, c, r1, r2, R);
        const oracle::Ann ann{c.x2 / 2.0, c.y2 / 2.0, r1, r2};
        const double bx = b.center().x2 / 2.0, by = b.center().y2 / 2.0;
        bool inside = true;
        for (int y = int(by) - int(u) - 2; y <= int(by) + int(u) + 2; ++y)
            for (int x = int(bx) - int(u) - 2; x <= int(bx) + int(u) + 2; ++x) {
                LatticePoint p{x, y, 0};
                if (oracle::d2(p, bx, by) <= 4 * u * u && !ann.in(p)) inside = false;
            }
        CHECK(box_margin_contained(b, a) == inside);
    }
}

TEST_CASE("rasterize uses set semantics") {
    Rect w = Rect::square(2, 4);
    LatticePath line(2, {{0, 0, 0}, {1, 0, 0}, {2, 0, 0}});
    GridMask m = rasterize(std::vector<LatticePath>{line}, w);
    CHECK(m.count() == 3);
    LatticePath other(2, {{2, 0, 0}, {2, 1, 0}});
    CHECK(rasterize(std::vector<LatticePath>{line, other}, w).count() == 4);
    CHECK_THROWS_AS(GridMask(Rect{2, {1, 1, 0}, {0, 0, 0}}), Error);

    RngStream rng(3, 1);
    LatticePath walk = sample_walk(2, {}, StopRule::fixed_length(1000), rng);
    Rect big = Rect::square(2, 1000);
    std::set<LatticePoint> uniq(walk.sites().begin(), walk.sites().end());
    auto occ = rasterize(std::vector<LatticePath>{walk}, big).occupied_sites();
    CHECK(std::set<LatticePoint>(occ.begin(), occ.end()) == uniq);
}

TEST_CASE("grid mask run-length text round trips") {
    RngStream rng(5, 5);
    for (int style = 0; style < 4; ++style) {
        GridMask m = to_mask(masks::random_mask(8, style, rng), 8);
        CHECK(GridMask::from_rle(m.to_rle()) == m);
    }
    CHECK_THROWS_AS(GridMask::from_rle("nonsense"), Error);
}

TEST_CASE("is_disconnected examples") {
    const int h = 8;
    Rect w = Rect::square(2, h);
    std::vector<LatticePoint> inner{{0, 0, 0}}, outer = window_edge(w);
    CHECK(is_disconnected(rasterize(ring_sites(5, h), w), inner, outer));
    std::vector<LatticePoint> seg;
    for (int x = -3; x <= 3; ++x) seg.push_back({x, 2, 0});
    CHECK_FALSE(is_disconnected(rasterize(seg, w), inner, outer));
    CHECK_THROWS_AS(is_disconnected(GridMask(w), {{h, 0, 0}}, outer), Error);
}

TEST_CASE("is_disconnected agrees with path search on random 17x17 masks") {
    const int h = 8;
    Rect w = Rect::square(2, h);
    const oracle::Box2 box{-h, -h, h, h};
    auto edge = window_edge(w);
    const oracle::SiteSet outer(edge.begin(), edge.end());
    RngStream rng(17, 0);
    int disconnected = 0;
    for (int trial = 0; trial < 240; ++trial) {
        auto occ = masks::random_mask(h, trial % 4, rng);
        std::vector<LatticePoint> inner;
        for (int y = -1; y <= 1; ++y)
            for (int x = -1; x <= 1; ++x)
                if (rng.below(2) || (x == 0 && y == 0)) inner.push_back({x, y, 0});
        oracle::SiteSet in_set(inner.begin(), inner.end());
        const bool expect = oracle::disconnected(box, occ, in_set, outer);
        disconnected += expect;
        CHECK(is_disconnected(to_mask(occ, h), inner, edge) == expect);
    }
    CHECK(disconnected > 10);
}

TEST_CASE("is_disconnected is monotone in the mask") {
    const int h = 8;
    Rect w = Rect::square(2, h);
    auto edge = window_edge(w);
    RngStream rng(19, 0);
    for (int trial = 0; trial < 50; ++trial) {
        auto occ = masks::random_mask(h, trial % 4, rng);
        occ.erase({0, 0, 0});
        bool prev = is_disconnected(to_mask(occ, h), {{0, 0, 0}}, edge);
        for (int k = 0; k < 30; ++k) {
            LatticePoint p{int(rng.below(17)) - 8, int(rng.below(17)) - 8, 0};
            if (p == LatticePoint{}) continue;
            occ.insert(p);
            bool now = is_disconnected(to_mask(occ, h), {{0, 0, 0}}, edge);
            CHECK((!prev || now));
            prev = now;
        }
    }
}

TEST_CASE("openings examples") {
    const int h = 8;
    Rect w = Rect::square(2, h);
    Region a = Region::annulus(2, Center2{}, 3, 8);
    GridMask empty(w);
    auto o = openings(empty, a);
    REQUIRE(o.components.size() == 1);
    CHECK(o.components[0].size() == a.sites().size());
    CHECK(openings(rasterize(ring_sites(5.5, h), w), a).components.empty());
    std::vector<LatticePoint> walls;
    for (int x = 1; x <= 8; ++x) {
        walls.push_back({x, 0, 0});
        walls.push_back({-x, 0, 0});
    }
    auto two = openings(rasterize(walls, w), a);
    CHECK(two.components.size() == 2);
    const oracle::Box2 box{-h, -h, h, h};
    CHECK(two.components == oracle::openings(box, oracle::SiteSet(walls.begin(), walls.end()), oracle::Ann{0, 0, 3, 8}));
    CHECK_THROWS_AS(openings(empty, Region::annulus(2, Center2{}, 5, 5)), Error);
}

TEST_CASE("openings match union-find labelling on random masks") {
    const int h = 8;
    const oracle::Box2 box{-h, -h, h, h};
    RngStream rng(23, 0);
    for (int trial = 0; trial < 200; ++trial) {
        auto occ = masks::random_mask(h, trial % 4, rng);
        const std::int64_t r1 = 2 + rng.below(3), r2 = r1 + 2 + rng.below(std::uint32_t(7 - r1));
        auto got = openings(to_mask(occ, h), Region::annulus(2, Center2{}, r1, r2)).components;
        CHECK(got == oracle::openings(box, occ, oracle::Ann{0, 0, r1, r2}));
    }
}

TEST_CASE("cut_set examples") {
    const int h = 8;
    Rect w = Rect::square(2, h);
    Region a = Region::annulus(2, Center2{}, 2, 8);
    // empty mask: every band site facing the inside of the circle
    std::vector<LatticePoint> face;
    for (const auto& p : circle_band(2, Center2{}, 5)) {
        bool touches = false;
        for (const auto& q : oracle::nbrs2(p)) touches |= q.x * q.x + q.y * q.y < 16;
        if (touches) face.push_back(p);
    }
    std::sort(face.begin(), face.end());
    CHECK(face.size() > 20);
    CHECK(cut_set(GridMask(w), a, 5) == face);
    CHECK(cut_set(rasterize(ring_sites(7, h), w), a, 5).empty());
    CHECK_THROWS_AS(cut_set(GridMask(w), a, 8), Error);
}

TEST_CASE("cut_set drops a dead-end pocket") {
    // cup above the circle of radius 4: side walls reach into the inner disc,
    // so the only way out of the pocket is back through the circle
    const int h = 8;
    Rect w = Rect::square(2, h);
    Region a = Region::annulus(2, Center2{}, 2, 8);
    std::vector<LatticePoint> occ;
    for (int y = 2; y <= 6; ++y) {
        occ.push_back({-2, y, 0});
        occ.push_back({2, y, 0});
    }
    for (int x = -1; x <= 1; ++x) occ.push_back({x, 6, 0});
    GridMask m = rasterize(occ, w);
    auto o0 = first_hit_set(m, a, 4);
    auto cut = cut_set(m, a, 4);
    for (int x = -1; x <= 1; ++x) {
        const LatticePoint p{x, 3, 0};
        CHECK(std::binary_search(o0.begin(), o0.end(), p));
        CHECK_FALSE(std::binary_search(cut.begin(), cut.end(), p));
    }
    CHECK(cut.size() + 3 == o0.size());
    const oracle::Box2 box{-h, -h, h, h};
    const oracle::SiteSet s(occ.begin(), occ.end());
    CHECK(o0 == oracle::first_hits(box, s, oracle::Ann{0, 0, 2, 8}, 4));
    CHECK(cut == oracle::cut_set(box, s, oracle::Ann{0, 0, 2, 8}, 4));
}

TEST_CASE("cut_set and first hits match path search on random masks") {
    RngStream rng(29, 0);
    for (int trial = 0; trial < 200; ++trial) {
        const int h = trial % 2 ? 8 : 5;
        const oracle::Box2 box{-h, -h, h, h};
        auto occ = masks::random_mask(h, trial % 4, rng);
        const std::int64_t r1 = 2, r2 = h, v = 3 + rng.below(std::uint32_t(h - 3));
        GridMask m = to_mask(occ, h);
        Region a = Region::annulus(2, Center2{}, r1, r2);
        const oracle::Ann ann{0, 0, r1, r2};
        CHECK(first_hit_set(m, a, v) == oracle::first_hits(box, occ, ann, v));
        CHECK(cut_set(m, a, v) == oracle::cut_set(box, occ, ann, v));
    }
}

TEST_CASE("cut set of a lone opening lies in its first crossings") {
    RngStream rng(31, 0);
    const int h = 8;
    for (int trial = 0; trial < 60; ++trial) {
        auto occ = masks::random_mask(h, 2, rng);
        GridMask m = to_mask(occ, h);
        Region a = Region::annulus(2, Center2{}, 2, 8);
        auto o = openings(m, a);
        if (o.components.size() != 1) continue;
        auto cut = cut_set(m, a, 5);
        for (const auto& p : cut) {
            CHECK(std::binary_search(o.components[0].begin(), o.components[0].end(), p));
            CHECK(in_band(p, Center2{}, 5));
        }
    }
}

TEST_CASE("all geometry operations match the oracles on random 33x33 masks") {
    const int h = 16;
    const oracle::Box2 box{-h, -h, h, h};
    const auto edge = window_edge(Rect::square(2, h));
    const oracle::SiteSet outer(edge.begin(), edge.end());
    RngStream rng(37, 0);
    for (int trial = 0; trial < 200; ++trial) {
        auto occ = masks::random_mask(h, trial % 4, rng);
        occ.erase({0, 0, 0});
        const std::int64_t r1 = 2 + rng.below(4), r2 = h - rng.below(3);
        const std::int64_t v = r1 + 1 + rng.below(std::uint32_t(r2 - r1 - 1));
        GridMask m = to_mask(occ, h);
        Region a = Region::annulus(2, Center2{}, r1, r2);
        const oracle::Ann ann{0, 0, r1, r2};
        CHECK(openings(m, a).components == oracle::openings(box, occ, ann));
        CHECK(first_hit_set(m, a, v) == oracle::first_hits(box, occ, ann, v));
        CHECK(cut_set(m, a, v) == oracle::cut_set(box, occ, ann, v));
        CHECK(is_disconnected(m, {{0, 0, 0}}, edge) == oracle::disconnected(box, occ, {{0, 0, 0}}, outer));
    }
}
