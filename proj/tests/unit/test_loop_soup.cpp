#include <doctest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>

#include "../support/oracles.hpp"
#include "pioneer/error.hpp"
#include "pioneer/loop_soup.hpp"

using namespace pioneer;

namespace {

Region square_domain(int h) { return Region::box(Rect{2, {-h, -h, 0}, {h, h, 0}}); }

// c/2 * sum over roots and lengths 4..8 of (closed walks inside) 4^-l / l
double enumerated_mean(double c, int h, int max_len) {
    double mass = 0;
    auto inside = [&](const LatticePoint& p) { return std::abs(p.x) <= h && std::abs(p.y) <= h; };
    for (int y = -h; y <= h; ++y)
        for (int x = -h; x <= h; ++x)
            for (auto [len, count] : oracle::closed_walk_counts({x, y, 0}, max_len, inside))
                if (len >= 4) mass += double(count) * std::pow(4.0, -len) / len;
    return 0.5 * c * mass;
}

LatticeLoop square_loop(int x0, int y0, int side) {
    std::string letters = std::string(side, 'E') + std::string(side, 'N') + std::string(side, 'W') + std::string(side, 'S');
    return LatticeLoop(from_letters(2, {x0, y0, 0}, letters));
}

}  // namespace

TEST_CASE("return probabilities") {
    CHECK(return_probability_2d(0) == 1.0);
    CHECK(return_probability_2d(2) == doctest::Approx(0.25));
    CHECK(return_probability_2d(4) == doctest::Approx(36.0 / 256.0));
    CHECK(return_probability_2d(3) == 0.0);
}

TEST_CASE("closed walk counts match the central binomial squares") {
    // unrestricted: C(l, l/2)^2 closed walks of length l
    auto all = [](const LatticePoint&) { return true; };
    auto counts = oracle::closed_walk_counts({}, 8, all);
    CHECK(counts[2] == 4);
    CHECK(counts[4] == 36);
    CHECK(counts[6] == 400);
    CHECK(counts[8] == 4900);
}

TEST_CASE("empty soup at zero intensity and parameter errors") {
    RngStream rng(1, 0);
    CHECK(sample_loop_soup(square_domain(2), 0.0, 0, rng, 8).loops.empty());
    CHECK_THROWS_AS(sample_loop_soup(square_domain(2), -1.0, 0, rng, 8), Error);
}

TEST_CASE("loop counts on a 5x5 window match the enumerated measure") {
    const int samples = 500;
    for (double c : {1.0, 2.0}) {
        const double mean = enumerated_mean(c, 2, 8);
        double sum = 0;
        for (int s = 0; s < samples; ++s) {
            RngStream rng(100 + std::uint64_t(c), std::uint64_t(s));
            LoopSoup soup = sample_loop_soup(square_domain(2), c, 0, rng, 8);
            for (const auto& l : soup.loops) {
                CHECK(l.length() >= 4);
                CHECK(l.length() <= 8);
                CHECK(l.length() % 2 == 0);
                CHECK(l.path().front() == l.path().back());
            }
            sum += double(soup.loops.size());
        }
        const double sigma = std::sqrt(mean / samples);
        CHECK(std::abs(sum / samples - mean) < 3 * sigma);
    }
}

TEST_CASE("restriction and superposition") {
    const int samples = 300;
    double restricted = 0, direct = 0, merged = 0, whole = 0;
    for (int s = 0; s < samples; ++s) {
        RngStream a(200, std::uint64_t(s)), b(201, std::uint64_t(s)), c(202, std::uint64_t(s)), d(203, std::uint64_t(s)),
            e(204, std::uint64_t(s));
        LoopSoup big = sample_loop_soup(square_domain(3), 1.0, 0, a, 10);
        LoopSoup sub = restrict_soup(big, square_domain(1));
        for (const auto& l : sub.loops)
            for (const auto& p : l.path().sites()) CHECK(square_domain(1).contains(p));
        CHECK(restrict_soup(sub, square_domain(1)).loops.size() == sub.loops.size());
        restricted += double(sub.loops.size());
        direct += double(sample_loop_soup(square_domain(1), 1.0, 0, b, 10).loops.size());
        merged += double(sample_loop_soup(square_domain(2), 0.5, 0, c, 8).loops.size() +
                         sample_loop_soup(square_domain(2), 1.0, 0, d, 8).loops.size());
        whole += double(sample_loop_soup(square_domain(2), 1.5, 0, e, 8).loops.size());
    }
    // Poisson counts: the difference of two means has variance (m1 + m2) / samples
    CHECK(std::abs(restricted - direct) / samples < 3 * std::sqrt((restricted + direct) / samples / samples));
    CHECK(std::abs(merged - whole) / samples < 3 * std::sqrt((merged + whole) / samples / samples));

    RngStream rng(5, 5);
    LoopSoup soup = sample_loop_soup(square_domain(2), 2.0, 0, rng, 8);
    CHECK(restrict_soup(soup, square_domain(2)).loops.size() == soup.loops.size());
    CHECK(restrict_soup(soup, Region::box(Rect{2, {2, 2, 0}, {2, 2, 0}})).loops.empty());
    CHECK_THROWS_AS(restrict_soup(soup, square_domain(3)), Error);
}

TEST_CASE("soup text round trips") {
    RngStream rng(7, 7);
    LoopSoup soup = sample_loop_soup(Region::disc(2, Center2{}, 10), 1.0, 2, rng);
    LoopSoup back = LoopSoup::parse(soup.serialize());
    REQUIRE(back.loops.size() == soup.loops.size());
    for (std::size_t i = 0; i < soup.loops.size(); ++i) CHECK(back.loops[i] == soup.loops[i]);
    for (const auto& l : soup.loops) CHECK(l.diameter_sq() >= 4);
}

TEST_CASE("clusters") {
    LatticeLoop a = square_loop(0, 0, 2), b = square_loop(10, 0, 2), c = square_loop(2, 2, 2);
    LoopSoup soup;
    soup.loops = {a, b};
    CHECK(clusters(soup).size() == 2);
    soup.loops = {a, c};  // share (2, 2)
    CHECK(clusters(soup).size() == 1);

    RngStream rng(8, 8);
    LoopSoup big = sample_loop_soup(Region::disc(2, Center2{}, 24), 3.0, 0, rng, 64);
    if (big.loops.size() > 50) big.loops.resize(50);
    REQUIRE(big.loops.size() >= 20);
    ClusterPartition part = clusters(big);
    const std::size_t n = big.loops.size();
    // pairwise intersection, then transitive closure
    std::vector<std::vector<bool>> conn(n, std::vector<bool>(n, false));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            const auto& si = big.loops[i].path().sites();
            const auto& sj = big.loops[j].path().sites();
            conn[i][j] = i == j || std::any_of(si.begin(), si.end(), [&](const LatticePoint& p) {
                             return std::find(sj.begin(), sj.end(), p) != sj.end();
                         });
        }
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                if (conn[i][k] && conn[k][j]) conn[i][j] = true;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) CHECK(conn[i][j] == (part.cluster_of[i] == part.cluster_of[j]));

    // reordering the loops leaves the partition unchanged up to labels
    LoopSoup rev = big;
    std::reverse(rev.loops.begin(), rev.loops.end());
    ClusterPartition part2 = clusters(rev);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            CHECK((part.cluster_of[i] == part.cluster_of[j]) == (part2.cluster_of[n - 1 - i] == part2.cluster_of[n - 1 - j]));
}

TEST_CASE("cluster outer boundaries") {
    Rect w = Rect::square(2, 12);
    LoopSoup soup;
    soup.loops = {square_loop(0, 0, 4)};
    ClusterPartition part = clusters(soup);
    auto bnd = cluster_outer_boundary(part, 0, w).occupied_sites();
    std::sort(bnd.begin(), bnd.end());
    CHECK(bnd == part.cluster_sites[0]);

    // a snake covering the 3x3 block: the centre site has no exterior neighbour
    LatticeLoop snake(from_letters(2, {0, 0, 0}, "EENWWNEESSWW"));
    soup.loops = {snake};
    part = clusters(soup);
    auto b2 = cluster_outer_boundary(part, 0, w).occupied_sites();
    CHECK(b2.size() == 8);
    CHECK(std::find(b2.begin(), b2.end(), LatticePoint{1, 1, 0}) == b2.end());

    // nested loops joined by a shared site, against the flood from the edge
    soup.loops = {square_loop(-6, -6, 12), square_loop(-6, -2, 4), square_loop(-2, -2, 4)};
    part = clusters(soup);
    REQUIRE(part.size() == 1);
    auto b3 = cluster_outer_boundary(part, 0, w).occupied_sites();
    std::sort(b3.begin(), b3.end());
    const oracle::SiteSet occ(part.cluster_sites[0].begin(), part.cluster_sites[0].end());
    const auto ext = oracle::exterior(oracle::Box2{-12, -12, 12, 12}, occ);
    std::vector<LatticePoint> expect;
    for (const auto& p : part.cluster_sites[0])
        for (const auto& q : oracle::nbrs2(p))
            if (ext.count(q)) {
                expect.push_back(p);
                break;
            }
    CHECK(b3 == expect);
    CHECK(b3.size() < part.cluster_sites[0].size());
    CHECK_THROWS_AS(cluster_outer_boundary(part, 5, w), Error);
}

TEST_CASE("conditioned loops satisfy the conditioning") {
    const std::int64_t R = 16;
    const double iota = 0.25;
    std::array<double, 2> rate{};
    for (int seed = 0; seed < 2; ++seed) {
        double attempts = 0;
        const int loops = 300;
        for (int i = 0; i < loops; ++i) {
            RngStream rng(300 + std::uint64_t(seed), std::uint64_t(i));
            ConditionedLoopStats st;
            LatticeLoop l = sample_conditioned_loop(iota, R, rng, &st);
            attempts += double(st.attempts);
            CHECK(double(l.diameter_sq()) > std::pow(iota * R / 2, 2));
            std::int64_t far = 0;
            for (const auto& p : l.path().sites()) far = std::max<std::int64_t>(far, std::int64_t(p.x) * p.x + std::int64_t(p.y) * p.y);
            CHECK(double(far) > std::pow(iota * R, 2));
            CHECK(double(far) < std::pow((1 - iota) * R, 2));
        }
        rate[std::size_t(seed)] = loops / attempts;
    }
    CHECK(rate[0] / rate[1] > 0.8);
    CHECK(rate[0] / rate[1] < 1.25);
}
