#include <doctest.h>

#include <cmath>
#include <map>
#include <set>

#include "pioneer/decomposition.hpp"
#include "pioneer/error.hpp"
#include "pioneer/lattice.hpp"
#include "pioneer/path.hpp"
#include "pioneer/rng.hpp"

using namespace pioneer;

namespace {

LatticePath straight_moves(LatticePoint start, const std::vector<std::pair<int, int>>& legs) {
    // legs: (dx, count)
    std::vector<LatticePoint> s{start};
    for (auto [dx, count] : legs)
        for (int k = 0; k < count; ++k) {
            start.x += dx;
            s.push_back(start);
        }
    return LatticePath(2, s);
}

}  // namespace

TEST_CASE("sampled walks take unit steps and are reproducible") {
    RngStream a(42, 7), b(42, 7);
    LatticePath p = sample_walk(2, {}, StopRule::exit_disc(Center2{}, 20), a);
    LatticePath q = sample_walk(2, {}, StopRule::exit_disc(Center2{}, 20), b);
    CHECK(p == q);
    for (TimeIndex t = 1; t <= p.length(); ++t) CHECK(unit_step(p[t - 1], p[t]));
    CHECK(sq_dist2(p.back(), Center2{}) >= 4 * 20 * 20);
    for (TimeIndex t = 0; t < p.length(); ++t) CHECK(sq_dist2(p[t], Center2{}) < 4 * 20 * 20);

    RngStream c(1, 1);
    LatticePath one = sample_walk(2, {}, StopRule::exit_disc(Center2{}, 1), c);
    CHECK(one.length() >= 1);
    RngStream d(1, 2);
    LatticePath p3 = sample_walk(3, {}, StopRule::fixed_length(500), d);
    CHECK(p3.length() == 500);
    for (TimeIndex t = 1; t <= p3.length(); ++t) CHECK(unit_step(p3[t - 1], p3[t]));
}

TEST_CASE("unreachable hit set exhausts the step budget") {
    RngStream rng(9, 9);
    SiteSet far{{1000000, 0, 0}};
    try {
        sample_walk(2, {}, StopRule::hit_set(far, 5000), rng);
        FAIL("expected a budget error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::budget_exceeded);
    }
}

TEST_CASE("exit sides of a square are uniform") {
    std::array<int, 4> side{};
    for (std::uint64_t t = 0; t < 10000; ++t) {
        RngStream rng(5, t);
        LatticePath p = sample_walk(2, {}, StopRule::exit_box(8), rng);
        const auto& e = p.back();
        side[e.x >= 8 ? 0 : e.x <= -8 ? 1 : e.y >= 8 ? 2 : 3]++;
    }
    double chi2 = 0;
    for (int s : side) chi2 += (s - 2500.0) * (s - 2500.0) / 2500.0;
    CHECK(chi2 < 16.27);  // 3 dof, p = 0.001
}

TEST_CASE("mean exit time from a disc is close to R^2") {
    // planar walk: E|X_t|^2 = t, so E[tau] is R^2 up to the overshoot
    const std::int64_t R = 32;
    double sum = 0;
    for (std::uint64_t t = 0; t < 10000; ++t) {
        RngStream rng(6, t);
        sum += double(sample_walk(2, {}, StopRule::exit_disc(Center2{}, R), rng).length());
    }
    const double mean = sum / 10000;
    CHECK(mean > 0.8 * R * R);
    CHECK(mean < 1.2 * R * R);
}

TEST_CASE("hitting times on short paths") {
    LatticePoint a{0, 0, 0}, b{1, 0, 0}, c{2, 0, 0};
    LatticePath p(2, {a, b, c});
    CHECK(hitting_time(p, SiteSet{b}) == 1);
    CHECK_FALSE(hitting_time(p, SiteSet{{5, 5, 0}}).has_value());
    LatticePath q(2, {a, b, a});
    CHECK(last_hitting_time(q, SiteSet{a}, 3) == 2);
    CHECK_FALSE(last_hitting_time(q, SiteSet{{5, 5, 0}}, 3).has_value());
}

TEST_CASE("chained hitting times follow the sequential definition") {
    // 20 steps: east 5, north 5, west 5, south 5 (a square loop)
    std::string letters = "EEEEENNNNNWWWWWSSSSS";
    LatticePath p = from_letters(2, {}, letters);
    REQUIRE(p.length() == 20);
    SiteSet corner_ne{{5, 5, 0}}, corner_nw{{0, 5, 0}}, origin{{0, 0, 0}}, east_edge;
    for (int y = 0; y <= 5; ++y) east_edge.insert({5, y, 0});
    CHECK(hitting_time_chain(p, {east_edge}) == 5);
    CHECK(hitting_time_chain(p, {corner_ne, corner_nw}) == 15);
    CHECK(hitting_time_chain(p, {corner_nw, origin}) == 20);
    CHECK(hitting_time_chain(p, {origin, corner_ne, origin}) == 20);
    CHECK_FALSE(hitting_time_chain(p, {corner_nw, corner_ne}).has_value());
    CHECK(hitting_time(p, origin, 1) == 20);
}

TEST_CASE("last hitting time is hitting time of the reversal") {
    for (std::uint64_t t = 0; t < 100; ++t) {
        RngStream rng(12, t);
        LatticePath p = sample_walk(2, {}, StopRule::fixed_length(200), rng);
        LatticePath r = reverse(p);
        SiteSet target{p[TimeIndex(rng.below(201))], {int(rng.below(9)) - 4, int(rng.below(9)) - 4, 0}};
        const TimeIndex L = p.length();
        auto last = last_hitting_time(p, target, L + 1);
        auto first = hitting_time(r, target, 0);
        REQUIRE(last.has_value() == first.has_value());
        if (last) CHECK(*last == L - *first);
    }
}

TEST_CASE("reverse") {
    LatticePoint a{0, 0, 0}, b{1, 0, 0}, c{1, 1, 0};
    CHECK(reverse(LatticePath(2, {a, b, c})) == LatticePath(2, {c, b, a}));
    CHECK(reverse(LatticePath(2, {a})) == LatticePath(2, {a}));
    for (std::uint64_t t = 0; t < 20; ++t) {
        RngStream rng(13, t);
        LatticePath p = sample_walk(2, {}, StopRule::fixed_length(300), rng);
        LatticePath r = reverse(p);
        CHECK(reverse(r) == p);
        const TimeIndex L = p.length();
        for (TimeIndex k = 0; k <= L; k += 17) {
            auto fwd = p.visits(p[k]);
            auto bwd = r.visits(p[k]);
            REQUIRE(fwd.size() == bwd.size());
            for (std::size_t i = 0; i < fwd.size(); ++i) CHECK(bwd[bwd.size() - 1 - i] == L - fwd[i]);
        }
    }
}

TEST_CASE("step-letter text round trips") {
    RngStream rng(14, 0);
    LatticePath p = sample_walk(3, {3, -2, 1}, StopRule::fixed_length(100), rng);
    CHECK(from_step_string(to_step_string(p)) == p);
    LatticePath q = sample_walk(2, {5, 5, 0}, StopRule::fixed_length(100), rng);
    CHECK(from_step_string(to_step_string(q)) == q);
    CHECK_THROWS_AS(from_step_string("2 0,0 3\nEX"), Error);
}

TEST_CASE("annulus excursions") {
    Region a = Region::annulus(2, Center2{}, 4, 32);
    std::map<LatticePoint, int> starts;
    const int samples = 10000;
    for (int t = 0; t < samples; ++t) {
        RngStream rng(15, std::uint64_t(t));
        LatticePath e = sample_excursion(a, rng);
        REQUIRE(in_band(e.front(), Center2{}, 4));
        REQUIRE(in_band(e.back(), Center2{}, 32));
        for (TimeIndex k = 1; k <= e.length(); ++k) REQUIRE(sq_dist2(e[k], Center2{}) >= 4 * 3 * 3);
        for (TimeIndex k = 0; k < e.length(); ++k) REQUIRE(sq_dist2(e[k], Center2{}) < 4 * 31 * 31);
        starts[e.front()]++;
    }
    auto band = circle_band(2, Center2{}, 4);
    // sites shielded by the rest of the band are rarely the last exit; compare
    // over the band sites that face outward
    int outward = 0, lo = samples, hi = 0;
    for (const auto& p : band) {
        bool faces_out = false;
        for (unsigned d = 0; d < 4; ++d) faces_out |= sq_dist2(step(p, d), Center2{}) > 4 * 4 * 4;
        if (!faces_out) continue;
        ++outward;
        lo = std::min(lo, starts[p]);
        hi = std::max(hi, starts[p]);
    }
    const double uniform = double(samples) / outward;
    CHECK(lo > uniform / 3);
    CHECK(hi < uniform * 3);
    RngStream rng(1, 1);
    CHECK_THROWS_AS(sample_excursion(Region::annulus(2, Center2{}, 4, 5), rng), Error);
}

TEST_CASE("decomposition of a scripted triple visit") {
    // box at (100, 0) on a 256 lattice, n = 8 (one site), K = 4: delta = 32,
    // rho = 32 - 1/sqrt(2), half radius 16
    Resolution res{2, 256};
    DyadicBox s = DyadicBox::make(res, 8, 100, 0);
    LatticePath p = straight_moves({140, 0, 0}, {{-1, 40}, {1, 31}, {-1, 31}, {1, 31}, {-1, 31}});
    Decomposition d = excursion_bridge_decompose(p, s, 3, 4);
    CHECK(d.u == std::vector<TimeIndex>{9, 71, 133});
    CHECK(d.v == std::vector<TimeIndex>{40, 102, 164});
    CHECK(d.s == std::vector<TimeIndex>{25, 41, 87, 103, 149});
    CHECK(d.t == std::vector<TimeIndex>{39, 55, 101, 117, 163});
    CHECK(d.excursions.size() == 5);
    CHECK(d.bridges.size() == 6);
    CHECK(d.end == 164);
    CHECK(d.reconstruct() == p);
    for (const auto& e : d.excursions) {
        CHECK(in_band(e.front(), s.center(), 1));
        CHECK(in_band(e.back(), s.center(), 16));
    }

    Decomposition two = excursion_bridge_decompose(p, s, 2, 4);
    CHECK(two.excursions.size() == 3);
    CHECK(two.bridges.size() == 4);
    CHECK(two.reconstruct() == p.slice(0, 102));

    LatticePath short_path = straight_moves({140, 0, 0}, {{-1, 40}, {1, 31}});
    try {
        excursion_bridge_decompose(short_path, s, 2, 4);
        FAIL("expected a precondition error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::precondition);
        CHECK(std::string(e.what()).find("visit 2") != std::string::npos);
    }
}

TEST_CASE("decompositions of random walks reassemble exactly") {
    Resolution res{2, 256};
    int found3 = 0, found2 = 0;
    for (std::uint64_t t = 0; t < 40 && (found3 < 50 || found2 < 50); ++t) {
        RngStream rng(16, t);
        LatticePath p = sample_walk(2, {}, StopRule::exit_disc(Center2{}, 256), rng);
        std::set<DyadicBox> tried;
        for (TimeIndex k = 0; k <= p.length(); k += 97) {
            DyadicBox s = DyadicBox::containing(p[k], 8, res);
            if (!tried.insert(s).second) continue;
            for (int visits : {2, 3}) {
                try {
                    Decomposition d = excursion_bridge_decompose(p, s, visits, 4);
                    CHECK(d.excursions.size() == std::size_t(2 * visits - 1));
                    CHECK(d.bridges.size() == std::size_t(2 * visits));
                    CHECK(d.reconstruct() == p.slice(0, d.end));
                    (visits == 3 ? found3 : found2)++;
                } catch (const Error& e) {
                    CHECK(e.code() == ErrorCode::precondition);
                }
            }
        }
    }
    CHECK(found3 >= 50);
    CHECK(found2 >= 50);
}

TEST_CASE("loop decomposition has four excursions") {
    Resolution res{2, 256};
    DyadicBox s = DyadicBox::make(res, 8, 100, 0);
    LatticePath p = straight_moves({140, 0, 0}, {{-1, 40}, {1, 31}, {-1, 31}, {1, 40}});
    REQUIRE(p.front() == p.back());
    Decomposition d = loop_bridge_decompose(p, s, 4);
    CHECK(d.excursions.size() == 4);
    CHECK(d.bridges.size() == 4);
    // the reassembled loop is rooted at the first cut time
    CHECK(d.reconstruct() == rotate_loop(p, (d.rotation + d.s[0]) % p.length()));
}
