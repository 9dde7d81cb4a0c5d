#pragma once

#include <array>
#include <optional>
#include <span>
#include <vector>

#include "pioneer/lattice.hpp"
#include "pioneer/path.hpp"

namespace pioneer {

// Bounding boxes of aligned time blocks (64, 4096, 262144 steps), used to
// jump over stretches of a long trace that cannot cross a given radius.
class PathBlocks {
  public:
    PathBlocks() = default;
    explicit PathBlocks(std::span<const LatticePoint> trace);

    std::span<const LatticePoint> trace() const { return trace_; }
    TimeIndex size() const { return TimeIndex(trace_.size()); }

    // first t >= from with sq_dist2(trace[t], c) >= m
    std::optional<TimeIndex> first_reach(TimeIndex from, const Center2& c, std::int64_t m) const;
    // first t >= from with sq_dist2(trace[t], c) <= m
    std::optional<TimeIndex> first_within(TimeIndex from, const Center2& c, std::int64_t m) const;

  private:
    struct Box {
        std::int32_t lo[3], hi[3];
    };
    static constexpr int kShift[3] = {6, 12, 18};

    template <bool Reach>
    std::optional<TimeIndex> scan(TimeIndex from, const Center2& c, std::int64_t m) const;

    std::span<const LatticePoint> trace_;
    std::array<std::vector<Box>, 3> levels_;
};

}  // namespace pioneer
