#include "pioneer/path_blocks.hpp"

#include <algorithm>

namespace pioneer {

PathBlocks::PathBlocks(std::span<const LatticePoint> trace) : trace_(trace) {
    const std::size_t n = trace.size();
    for (int lv = 0; lv < 3; ++lv) {
        const std::size_t bs = std::size_t(1) << kShift[lv];
        const std::size_t nb = (n + bs - 1) / bs;
        levels_[std::size_t(lv)].resize(nb);
        for (std::size_t b = 0; b < nb; ++b) {
            Box box{{INT32_MAX, INT32_MAX, INT32_MAX}, {INT32_MIN, INT32_MIN, INT32_MIN}};
            if (lv == 0) {
                for (std::size_t t = b * bs; t < std::min(n, (b + 1) * bs); ++t) {
                    const LatticePoint& p = trace[t];
                    box.lo[0] = std::min(box.lo[0], p.x), box.hi[0] = std::max(box.hi[0], p.x);
                    box.lo[1] = std::min(box.lo[1], p.y), box.hi[1] = std::max(box.hi[1], p.y);
                    box.lo[2] = std::min(box.lo[2], p.z), box.hi[2] = std::max(box.hi[2], p.z);
                }
            } else {
                const auto& below = levels_[std::size_t(lv - 1)];
                const std::size_t ratio = std::size_t(1) << (kShift[lv] - kShift[lv - 1]);
                for (std::size_t c = b * ratio; c < std::min(below.size(), (b + 1) * ratio); ++c)
                    for (int a = 0; a < 3; ++a) {
                        box.lo[a] = std::min(box.lo[a], below[c].lo[a]);
                        box.hi[a] = std::max(box.hi[a], below[c].hi[a]);
                    }
            }
            levels_[std::size_t(lv)][b] = box;
        }
    }
}

namespace {

inline std::int64_t axis_max(std::int64_t lo, std::int64_t hi, std::int64_t c2) {
    std::int64_t a = std::max(std::abs(2 * lo - c2), std::abs(2 * hi - c2));
    return a * a;
}

inline std::int64_t axis_min(std::int64_t lo, std::int64_t hi, std::int64_t c2) {
    if (2 * lo <= c2 && c2 <= 2 * hi) return 0;
    std::int64_t a = std::min(std::abs(2 * lo - c2), std::abs(2 * hi - c2));
    return a * a;
}

}  // namespace

template <bool Reach>
std::optional<TimeIndex> PathBlocks::scan(TimeIndex from, const Center2& c, std::int64_t m) const {
    const TimeIndex n = size();
    TimeIndex t = std::max<TimeIndex>(from, 0);
    auto skippable = [&](const Box& b) {
        if constexpr (Reach) {
            return axis_max(b.lo[0], b.hi[0], c.x2) + axis_max(b.lo[1], b.hi[1], c.y2) + axis_max(b.lo[2], b.hi[2], c.z2) < m;
        } else {
            return axis_min(b.lo[0], b.hi[0], c.x2) + axis_min(b.lo[1], b.hi[1], c.y2) + axis_min(b.lo[2], b.hi[2], c.z2) > m;
        }
    };
    while (t < n) {
        bool jumped = false;
        for (int lv = 2; lv >= 0; --lv) {
            const TimeIndex bs = TimeIndex(1) << kShift[lv];
            if ((t & (bs - 1)) != 0) continue;
            if (skippable(levels_[std::size_t(lv)][std::size_t(t >> kShift[lv])])) {
                t += bs;
                jumped = true;
                break;
            }
        }
        if (jumped) continue;
        const std::int64_t d = sq_dist2(trace_[std::size_t(t)], c);
        if (Reach ? d >= m : d <= m) return t;
        ++t;
    }
    return std::nullopt;
}

std::optional<TimeIndex> PathBlocks::first_reach(TimeIndex from, const Center2& c, std::int64_t m) const {
    return scan<true>(from, c, m);
}

std::optional<TimeIndex> PathBlocks::first_within(TimeIndex from, const Center2& c, std::int64_t m) const {
    return scan<false>(from, c, m);
}

}  // namespace pioneer
