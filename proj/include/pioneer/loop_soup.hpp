#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pioneer/grid_mask.hpp"
#include "pioneer/lattice.hpp"
#include "pioneer/path.hpp"
#include "pioneer/rng.hpp"

namespace pioneer {

// Rooted lattice loop: closed path, first site = last site = root.
class LatticeLoop {
  public:
    LatticeLoop() = default;
    explicit LatticeLoop(LatticePath path);

    const LatticePath& path() const { return path_; }
    const LatticePoint& root() const { return path_.front(); }
    TimeIndex length() const { return path_.length(); }
    // squared Euclidean diameter of the site set
    std::int64_t diameter_sq() const;
    bool operator==(const LatticeLoop& o) const { return path_ == o.path_; }

  private:
    LatticePath path_;
};

struct LoopSoup {
    std::vector<LatticeLoop> loops;
    double intensity = 0.0;
    Region domain{};
    std::int64_t cutoff = 0;       // minimal diameter, lattice units
    std::int64_t max_length = 0;   // longest loop length considered

    // one loop per line: "x,y LETTERS", after a header line
    std::string serialize() const;
    static LoopSoup parse(const std::string& text);
};

// Random-walk loop measure on Z^2: a rooted closed walk of length l has
// weight 4^{-l}/l; per root, the mass of length l is p_l/l with
// p_l = (C(l, l/2) 2^{-l})^2 the return probability.
double return_probability_2d(std::int64_t length);
std::int64_t default_max_length(const Region& domain);

LoopSoup sample_loop_soup(const Region& domain, double c, std::int64_t cutoff, RngStream& rng, std::int64_t max_length = 0);

// Uniform closed walk of the given even length from root (planar).
LatticePath sample_closed_walk(const LatticePoint& root, std::int64_t length, RngStream& rng);

struct ConditionedLoopStats {
    std::int64_t attempts = 0;
};

// One loop from the loop measure restricted to the disc of radius R about the
// origin, conditioned on: farthest distance from the origin in (iota R, (1-iota) R)
// and diameter > iota R / 2.
LatticeLoop sample_conditioned_loop(double iota, std::int64_t radius, RngStream& rng, ConditionedLoopStats* stats = nullptr,
                                    std::int64_t max_attempts = 10'000'000);

struct ClusterPartition {
    std::vector<std::int32_t> cluster_of;                  // loop -> cluster id
    std::vector<std::vector<LatticePoint>> cluster_sites;  // sorted, distinct
    std::vector<std::vector<std::int32_t>> members;        // cluster -> loops (ascending)
    std::size_t size() const { return cluster_sites.size(); }
    std::string report() const;                            // "loop cluster" lines
};

ClusterPartition clusters(const LoopSoup& soup);
ClusterPartition clusters(const std::vector<const LatticePath*>& loops);

GridMask cluster_outer_boundary(const ClusterPartition& partition, std::int32_t cluster_id, const Rect& window);

LoopSoup restrict_soup(const LoopSoup& soup, const Region& subdomain);

// Poisson variate (inversion for small means, PTRS otherwise).
std::int64_t sample_poisson(double mean, RngStream& rng);

}  // namespace pioneer
