#pragma once

#include <vector>

#include "pioneer/lattice.hpp"
#include "pioneer/path.hpp"

namespace pioneer {

// Radii attached to a box S at scale n with delta = 2^{1-K}, in lattice units.
struct BoxRadii {
    Center2 center;
    std::int64_t unit = 1;       // 2^{-n}
    std::int64_t delta = 0;      // delta * R
    DoubledRadius rho;           // delta - 2^{-n-1/2}
    std::int64_t reach_rho = 0;  // sq_dist2 >= reach_rho  <=>  on or beyond the rho band
    std::int64_t within_rho = 0; // sq_dist2 <= within_rho <=>  inside the closed rho ball

    static BoxRadii of(const DyadicBox& s, int K);
};

struct Decomposition {
    std::vector<LatticePath> excursions;  // all oriented inside -> outside
    std::vector<LatticePath> bridges;
    std::vector<TimeIndex> u, v, s, t;    // cut times, 1-based in the usual notation (index 0 = u_1)
    bool loop = false;
    TimeIndex rotation = 0;               // loops: root shift applied before cutting
    TimeIndex end = 0;                    // stopping time T(S) for paths

    // Concatenate bridges and re-reversed excursions in path order.
    LatticePath reconstruct() const;
};

// visits = 3 (pioneer triple point pattern) or 2 (double cut point pattern).
Decomposition excursion_bridge_decompose(const LatticePath& path, const DyadicBox& s, int visits, int K);

// Loop analogue: 4 excursions, 4 bridges; the last bridge wraps through the root.
Decomposition loop_bridge_decompose(const LatticePath& loop, const DyadicBox& s, int K);

// The loop re-rooted so the decomposition starts at time `rotation`.
LatticePath rotate_loop(const LatticePath& loop, TimeIndex rotation);

}  // namespace pioneer
