#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "pioneer/exterior.hpp"
#include "pioneer/lattice.hpp"
#include "pioneer/loop_soup.hpp"
#include "pioneer/path.hpp"

namespace pioneer {

enum class DetectorKind { ptp, pdcp, bdp };
std::string to_string(DetectorKind k);
DetectorKind parse_detector_kind(const std::string& s);

struct DetectorConfig {
    DetectorKind kind = DetectorKind::ptp;
    int dim = 2;
    int n = 8;
    int K = 4;            // delta = 2^{1-K}
    double iota = 0.25;   // bulk margin
    std::int64_t resolution = 1024;  // unit-disc radius in lattice units
    bool two_loop = false;           // boundary double points: two-loop variant

    double delta() const;
    int n_min() const { return K + 4; }  // N(delta): least n with 2^{-n} < delta/16
    Resolution res() const { return Resolution{dim, resolution}; }
    void validate() const;
    std::string canonical() const;
    std::uint64_t hash() const;
};

// Bulk annulus A(0, iota, 1 - iota); a box counts as bulk when its ancestor at
// scale N(delta) lies inside it (so bulk membership nests across scales).
struct Bulk {
    int dim = 2;
    int n_base = 8;
    std::int64_t resolution = 1;
    double r_in = 0, r_out = 0;
    static Bulk of(const DetectorConfig& cfg);
    bool box_inside(const DyadicBox& b) const;  // every site of b in the annulus
    bool contains(const DyadicBox& b) const;    // via the scale-N(delta) ancestor
};

struct GoodBox {
    DyadicBox box;
    TimeIndex stop = 0;  // T(S)
    auto operator<=>(const GoodBox&) const = default;
};

struct GoodBoxReport {
    DetectorConfig config;
    std::vector<GoodBox> boxes;  // sorted
    Bulk bulk;
    std::size_t count() const { return boxes.size(); }
    bool contains(const DyadicBox& b) const;
    std::string to_text() const;  // "n i j T" per box, then "# count hash"
};

// Reusable scratch for repeated scans at one window size.
class DetectorWorkspace {
  public:
    ExteriorOracle& oracle(const Rect& window);

  private:
    std::unique_ptr<ExteriorOracle> oracle_;
};

GoodBoxReport good_boxes_ptp(const LatticePath& path, const DetectorConfig& cfg, DetectorWorkspace* ws = nullptr);
GoodBoxReport good_boxes_pdcp(const LatticePath& path, const DetectorConfig& cfg, DetectorWorkspace* ws = nullptr);
GoodBoxReport good_boxes_bdp(const LatticeLoop& loop, const LoopSoup& soup, const DetectorConfig& cfg);
GoodBoxReport good_boxes_bdp_pair(const LatticeLoop& first, const LatticeLoop& second, const LoopSoup& soup, const DetectorConfig& cfg);

// Reports for scales n_lo..n_hi on one path. PTP scans only children of good
// boxes below the coarsest scale (exact by nesting); with prune = false every
// scale is scanned independently.
std::vector<GoodBoxReport> scan_scales(const LatticePath& path, const DetectorConfig& cfg, int n_lo, int n_hi, bool prune = true,
                                       DetectorWorkspace* ws = nullptr);
std::vector<GoodBoxReport> scan_scales_bdp(const LatticeLoop& loop, const LoopSoup& soup, const DetectorConfig& cfg, int n_lo, int n_hi);

// Discrete delta-macroscopic pioneer triple point in X[0, N].
bool has_macroscopic_ptp(const LatticePath& walk, TimeIndex N, double delta, DetectorWorkspace* ws = nullptr);

}  // namespace pioneer
