#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <unordered_set>
#include <variant>
#include <vector>

#include "pioneer/lattice.hpp"
#include "pioneer/rng.hpp"

namespace pioneer {

using TimeIndex = std::int64_t;
using SiteSet = std::unordered_set<LatticePoint, SiteHash>;

class SiteIndex;

// A nearest-neighbour lattice path; immutable after construction.
class LatticePath {
  public:
    LatticePath() = default;
    LatticePath(int dim, std::vector<LatticePoint> sites);

    int dim() const { return dim_; }
    std::size_t size() const { return sites_.size(); }
    TimeIndex length() const { return TimeIndex(sites_.size()) - 1; }  // steps
    bool empty() const { return sites_.empty(); }
    const LatticePoint& operator[](TimeIndex t) const { return sites_[std::size_t(t)]; }
    const LatticePoint& front() const { return sites_.front(); }
    const LatticePoint& back() const { return sites_.back(); }
    const std::vector<LatticePoint>& sites() const { return sites_; }

    // sorted visit times of a site (built lazily, thread-safe)
    std::span<const TimeIndex> visits(const LatticePoint& p) const;
    std::size_t distinct_sites() const;

    LatticePath slice(TimeIndex from, TimeIndex to) const;  // sites [from, to]
    bool operator==(const LatticePath& o) const { return dim_ == o.dim_ && sites_ == o.sites_; }

  private:
    const SiteIndex& index() const;

    int dim_ = 2;
    std::vector<LatticePoint> sites_;
    std::shared_ptr<struct IndexSlot> slot_;
};

struct ExitDisc {
    Center2 center;
    std::int64_t radius;  // stop at the first site with distance >= radius
};
struct ExitBox {
    std::int64_t half_width;  // stop at the first site with some |coordinate| >= half_width
};
struct HitSet {
    SiteSet target;
};
struct FixedLength {
    TimeIndex steps;
};
using StopCondition = std::variant<ExitDisc, ExitBox, HitSet, FixedLength>;

struct StopRule {
    StopCondition condition;
    TimeIndex budget = 0;  // 0: derived default (64 R^2)

    static StopRule exit_disc(Center2 c, std::int64_t r) { return {ExitDisc{c, r}, 0}; }
    static StopRule exit_box(std::int64_t h) { return {ExitBox{h}, 0}; }
    static StopRule hit_set(SiteSet s, TimeIndex budget) { return {HitSet{std::move(s)}, budget}; }
    static StopRule fixed_length(TimeIndex n) { return {FixedLength{n}, 0}; }
};

LatticePath sample_walk(int dim, const LatticePoint& start, const StopRule& stop, RngStream& rng);

std::optional<TimeIndex> hitting_time(const LatticePath& path, const SiteSet& target, TimeIndex from = 0);
std::optional<TimeIndex> last_hitting_time(const LatticePath& path, const SiteSet& target, TimeIndex before);
// tau(A1, ..., An): successive first hits, each after the previous one
std::optional<TimeIndex> hitting_time_chain(const LatticePath& path, const std::vector<SiteSet>& targets, TimeIndex from = 0);

LatticePath reverse(const LatticePath& path);

// Post-last-exit excursion across an annulus (center site of the annulus region).
LatticePath sample_excursion(const Region& annulus, RngStream& rng);

// Step-letter format: header "dim x,y[,z] length", then letters N/E/S/W/U/D.
std::string to_step_string(const LatticePath& path);
LatticePath from_step_string(const std::string& text);
std::string step_letters(const LatticePath& path);
LatticePath from_letters(int dim, const LatticePoint& start, const std::string& letters);

// direction index (0..5) of the unit step a -> b
unsigned direction_of(const LatticePoint& a, const LatticePoint& b);

}  // namespace pioneer
