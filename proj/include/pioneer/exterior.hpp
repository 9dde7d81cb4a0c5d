#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "pioneer/lattice.hpp"
#include "pioneer/path.hpp"

namespace pioneer {

// Planar exterior structure for a trace W[0..L-1] inside a window.
//
// escape_time(x) is the largest T such that x is free of W[0..T] and joined to
// the window edge through sites free of W[0..T]; kAlways when that holds for
// the whole trace, -1 when it never does. Connectivity to the edge only
// shrinks as T grows, so "x is exterior at time T" <=> escape_time(x) >= T.
//
// Computed once per trace by a reverse-time union-find over visited sites and
// maximal row runs of never-visited sites.
class ExteriorOracle {
  public:
    static constexpr TimeIndex kAlways = INT64_MAX;

    explicit ExteriorOracle(const Rect& window);
    void build(std::span<const LatticePoint> trace);

    const Rect& window() const { return window_; }
    TimeIndex escape_time(const LatticePoint& p) const;
    bool exterior_at(const LatticePoint& p, TimeIndex t) const { return escape_time(p) >= t; }
    TimeIndex first_visit(const LatticePoint& p) const;  // -1 if unvisited
    std::size_t distinct() const { return pos_.size(); }
    // first-visit time of the site at step t of the trace
    TimeIndex first_visit_at(std::size_t t) const { return first_[std::size_t(step_id_[t])]; }

  private:
    std::int32_t node_of(const LatticePoint& p) const;  // -1: outside component
    // 16x16 tiles keep a walk's neighbourhood within a few pages
    std::size_t cell(const LatticePoint& p) const {
        const std::int64_t x = p.x - window_.lo[0], y = p.y - window_.lo[1];
        return std::size_t((((y >> 4) * tiles_x_ + (x >> 4)) << 8) | ((y & 15) << 4) | (x & 15));
    }
    void clear();

    Rect window_;
    std::int64_t width_ = 0, height_ = 0, tiles_x_ = 0;
    std::vector<std::int32_t> grid_;  // site -> discovery id, -1 unvisited
    std::vector<LatticePoint> pos_;
    std::vector<TimeIndex> first_;
    std::vector<std::int32_t> step_id_;
    std::vector<std::int32_t> row_start_, xs_, csr_of_;  // visited sites sorted by (y, x)
    std::vector<TimeIndex> escape_;                      // per node: visited ids, then gap slots
};

// Reference implementation: flood from the window edge through sites free of trace[0..t].
std::vector<std::uint8_t> exterior_mask_bruteforce(std::span<const LatticePoint> trace, TimeIndex t, const Rect& window);

}  // namespace pioneer
