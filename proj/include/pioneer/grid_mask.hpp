#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "pioneer/lattice.hpp"

namespace pioneer {

class LatticePath;

// Occupancy of a finite lattice window. Sites outside the window count as free.
class GridMask {
  public:
    GridMask() = default;
    explicit GridMask(const Rect& window);

    const Rect& window() const { return window_; }
    int dim() const { return window_.dim; }
    bool in_window(const LatticePoint& p) const { return window_.contains(p); }
    bool occupied(const LatticePoint& p) const { return in_window(p) && bits_[index(p)] != 0; }
    void set(const LatticePoint& p, bool v = true);
    std::size_t count() const;
    std::vector<LatticePoint> occupied_sites() const;

    std::size_t index(const LatticePoint& p) const {
        std::size_t i = std::size_t(p.x - window_.lo[0]) + std::size_t(p.y - window_.lo[1]) * sx_;
        if (window_.dim == 3) i += std::size_t(p.z - window_.lo[2]) * sx_ * sy_;
        return i;
    }
    LatticePoint site(std::size_t i) const;
    std::size_t size() const { return bits_.size(); }

    // one text row per (y, z): runs like "3.2#5." ('.' free, '#' occupied)
    std::string to_rle() const;
    static GridMask from_rle(const std::string& text);

    bool operator==(const GridMask& o) const { return window_ == o.window_ && bits_ == o.bits_; }

  private:
    Rect window_{};
    std::size_t sx_ = 0, sy_ = 0;
    std::vector<std::uint8_t> bits_;
};

// In-window lattice neighbours of p (4 in 2D, 6 in 3D).
int neighbours(const Rect& window, const LatticePoint& p, LatticePoint out[6]);

GridMask rasterize(const std::vector<LatticePath>& paths, const Rect& window);
GridMask rasterize(const std::vector<LatticePoint>& sites, const Rect& window);

// True iff no path through free window sites joins a site of inner or adjacent
// to inner with a site of outer.
bool is_disconnected(const GridMask& mask, const std::vector<LatticePoint>& inner, const std::vector<LatticePoint>& outer);

// Sites on the window edge (the lattice surrogate for infinity).
std::vector<LatticePoint> window_edge(const Rect& window);

struct OpeningSet {
    std::vector<std::vector<LatticePoint>> components;             // sorted sites
    std::map<std::int64_t, std::vector<LatticePoint>> cut_points;  // radius -> sorted sites
};

// Components of A minus the mask meeting both boundary bands of the annulus A.
OpeningSet openings(const GridMask& mask, const Region& annulus);

// Cut set on the circle band of radius v: first hits of inner-to-outer paths
// whose continuation never returns to the first-hit set (dead ends removed).
std::vector<LatticePoint> cut_set(const GridMask& mask, const Region& annulus, std::int64_t v);

// First-hit set on circle v before the dead-end filter.
std::vector<LatticePoint> first_hit_set(const GridMask& mask, const Region& annulus, std::int64_t v);

}  // namespace pioneer
