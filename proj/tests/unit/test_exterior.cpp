#include <doctest.h>

#include "../support/oracles.hpp"
#include "pioneer/exterior.hpp"
#include "pioneer/grid_mask.hpp"
#include "pioneer/rng.hpp"

using namespace pioneer;

namespace {

void check_against_flood(const LatticePath& w, int h) {
    const Rect win = Rect::square(2, h);
    ExteriorOracle ext(win);
    ext.build(w.sites());
    const oracle::Box2 box{-h, -h, h, h};
    const GridMask grid(win);
    const TimeIndex L = w.length();
    for (TimeIndex t : {TimeIndex(0), L / 7, L / 3, L / 2, (2 * L) / 3, L}) {
        const auto flood = oracle::exterior(box, oracle::prefix_sites(w, t));
        const auto lib = exterior_mask_bruteforce(w.sites(), t, win);
        for (const auto& p : box.all()) {
            const bool want = flood.count(p) > 0;
            REQUIRE(ext.exterior_at(p, t) == want);
            REQUIRE((lib[grid.index(p)] != 0) == want);
        }
    }
    for (TimeIndex t = 0; t <= L; ++t) REQUIRE(ext.first_visit(w[t]) <= t);
    for (TimeIndex t = 0; t <= L; ++t) REQUIRE(ext.first_visit_at(std::size_t(t)) == ext.first_visit(w[t]));
}

}  // namespace

TEST_CASE("exterior oracle on scripted traces") {
    // a closed square: the inside stops being exterior once the square closes
    LatticePath sq = from_letters(2, {-3, -3, 0}, "EEEEEENNNNNNWWWWWWSSSSSS");
    ExteriorOracle ext(Rect::square(2, 8));
    ext.build(sq.sites());
    CHECK(ext.exterior_at({0, 0, 0}, 22));
    CHECK_FALSE(ext.exterior_at({0, 0, 0}, 23));
    CHECK(ext.escape_time({0, 0, 0}) == 22);
    CHECK(ext.escape_time({7, 7, 0}) == ExteriorOracle::kAlways);
    CHECK(ext.escape_time({-3, -3, 0}) == -1);
    CHECK(ext.first_visit({3, 3, 0}) == 12);
    CHECK(ext.first_visit({0, 0, 0}) == -1);
    CHECK(ext.distinct() == 24);
    check_against_flood(sq, 8);

    // a spiral keeps a corridor open until the last step
    check_against_flood(from_letters(2, {0, 0, 0}, "ENWWSSEEENNNWWWWSSSSEEEEENNNNN"), 7);
}

TEST_CASE("exterior oracle matches flood fill on random walks") {
    for (int k = 0; k < 40; ++k) {
        RngStream rng(41, std::uint64_t(k));
        const int h = 6 + int(rng.below(10));
        LatticePath w = sample_walk(2, {0, 0, 0}, StopRule::exit_box(h - 1), rng);
        if (w.length() > 3000) w = w.slice(0, 3000);
        check_against_flood(w, h);
    }
}

TEST_CASE("workspace reuse gives the same answers") {
    ExteriorOracle ext(Rect::square(2, 12));
    for (int k = 0; k < 5; ++k) {
        RngStream rng(42, std::uint64_t(k));
        LatticePath w = sample_walk(2, {0, 0, 0}, StopRule::exit_box(11), rng);
        ext.build(w.sites());
        ExteriorOracle fresh(Rect::square(2, 12));
        fresh.build(w.sites());
        for (const auto& p : oracle::Box2{-12, -12, 12, 12}.all()) REQUIRE(ext.escape_time(p) == fresh.escape_time(p));
    }
}
