#include "pioneer/grid_mask.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>
#include <unordered_set>

#include "pioneer/error.hpp"
#include "pioneer/path.hpp"

namespace pioneer {

GridMask::GridMask(const Rect& window) : window_(window) {
    require(!window.empty(), ErrorCode::invalid_argument, "empty window");
    sx_ = std::size_t(window.extent(0));
    sy_ = std::size_t(window.extent(1));
    bits_.assign(std::size_t(window.volume()), 0);
}

void GridMask::set(const LatticePoint& p, bool v) {
    if (in_window(p)) bits_[index(p)] = v ? 1 : 0;
}

std::size_t GridMask::count() const { return std::size_t(std::count(bits_.begin(), bits_.end(), std::uint8_t(1))); }

LatticePoint GridMask::site(std::size_t i) const {
    LatticePoint p;
    p.x = std::int32_t(window_.lo[0] + std::int64_t(i % sx_));
    p.y = std::int32_t(window_.lo[1] + std::int64_t((i / sx_) % sy_));
    p.z = window_.dim == 3 ? std::int32_t(window_.lo[2] + std::int64_t(i / (sx_ * sy_))) : 0;
    return p;
}

std::vector<LatticePoint> GridMask::occupied_sites() const {
    std::vector<LatticePoint> out;
    for (std::size_t i = 0; i < bits_.size(); ++i)
        if (bits_[i]) out.push_back(site(i));
    return out;
}

std::string GridMask::to_rle() const {
    std::ostringstream os;
    os << "gridmask " << window_.dim;
    for (int a = 0; a < window_.dim; ++a) os << ' ' << window_.lo[a] << ' ' << window_.hi[a];
    os << '\n';
    std::size_t rows = bits_.size() / sx_;
    for (std::size_t r = 0; r < rows; ++r) {
        const std::uint8_t* row = bits_.data() + r * sx_;
        std::size_t i = 0;
        while (i < sx_) {
            std::size_t j = i;
            while (j < sx_ && row[j] == row[i]) ++j;
            os << (j - i) << (row[i] ? '#' : '.');
            i = j;
        }
        os << '\n';
    }
    return os.str();
}

GridMask GridMask::from_rle(const std::string& text) {
    std::istringstream is(text);
    std::string tag;
    Rect w;
    is >> tag >> w.dim;
    require(tag == "gridmask" && (w.dim == 2 || w.dim == 3), ErrorCode::invalid_argument, "bad gridmask header");
    for (int a = 0; a < w.dim; ++a) is >> w.lo[a] >> w.hi[a];
    require(bool(is), ErrorCode::invalid_argument, "bad gridmask header");
    GridMask m(w);
    std::string line;
    std::getline(is, line);
    std::size_t rows = m.bits_.size() / m.sx_;
    for (std::size_t r = 0; r < rows; ++r) {
        require(bool(std::getline(is, line)), ErrorCode::invalid_argument, "gridmask row missing");
        std::size_t col = 0, pos = 0;
        while (pos < line.size()) {
            std::size_t len = 0;
            bool digits = false;
            while (pos < line.size() && std::isdigit(static_cast<unsigned char>(line[pos]))) {
                len = len * 10 + std::size_t(line[pos++] - '0');
                digits = true;
            }
            require(digits && pos < line.size() && (line[pos] == '.' || line[pos] == '#'), ErrorCode::invalid_argument,
                    "bad gridmask run");
            bool occ = line[pos++] == '#';
            require(col + len <= m.sx_, ErrorCode::invalid_argument, "gridmask row too long");
            for (std::size_t k = 0; k < len; ++k) m.bits_[r * m.sx_ + col + k] = occ;
            col += len;
        }
        require(col == m.sx_, ErrorCode::invalid_argument, "gridmask row too short");
    }
    return m;
}

int neighbours(const Rect& window, const LatticePoint& p, LatticePoint out[6]) {
    int k = 0;
    for (unsigned d = 0; d < unsigned(2 * window.dim); ++d) {
        LatticePoint q = step(p, d);
        if (window.contains(q)) out[k++] = q;
    }
    return k;
}

GridMask rasterize(const std::vector<LatticePoint>& sites, const Rect& window) {
    GridMask m(window);
    for (const auto& p : sites) m.set(p);
    return m;
}

GridMask rasterize(const std::vector<LatticePath>& paths, const Rect& window) {
    GridMask m(window);
    for (const auto& path : paths)
        for (const auto& p : path.sites()) m.set(p);
    return m;
}

std::vector<LatticePoint> window_edge(const Rect& window) {
    std::vector<LatticePoint> out;
    GridMask probe(window);
    for (std::size_t i = 0; i < probe.size(); ++i) {
        LatticePoint p = probe.site(i);
        if (window.on_edge(p)) out.push_back(p);
    }
    return out;
}

bool is_disconnected(const GridMask& mask, const std::vector<LatticePoint>& inner, const std::vector<LatticePoint>& outer) {
    const Rect& w = mask.window();
    std::vector<std::uint8_t> state(mask.size(), 0);  // 1 outer, 2 seen
    for (const auto& p : outer) {
        require(w.contains(p), ErrorCode::invalid_argument, "outer site outside window");
        state[mask.index(p)] = 1;
    }
    std::vector<std::size_t> stack;
    LatticePoint nb[6];
    auto seed = [&](const LatticePoint& q) {
        if (!w.contains(q) || mask.occupied(q)) return;
        std::size_t i = mask.index(q);
        if (state[i] == 2) return;
        if (state[i] == 1) stack.push_back(SIZE_MAX);  // marker: reached
        state[i] = 2;
        stack.push_back(i);
    };
    for (const auto& p : inner) {
        require(w.contains(p), ErrorCode::invalid_argument, "inner site outside window");
        require(state[mask.index(p)] != 1, ErrorCode::invalid_argument, "inner and outer sets intersect");
    }
    for (const auto& p : inner) {
        seed(p);
        int k = neighbours(w, p, nb);
        for (int j = 0; j < k; ++j) seed(nb[j]);
    }
    if (std::find(stack.begin(), stack.end(), SIZE_MAX) != stack.end()) return false;
    while (!stack.empty()) {
        std::size_t i = stack.back();
        stack.pop_back();
        LatticePoint p = mask.site(i);
        int k = neighbours(w, p, nb);
        for (int j = 0; j < k; ++j) {
            if (mask.occupied(nb[j])) continue;
            std::size_t t = mask.index(nb[j]);
            if (state[t] == 2) continue;
            if (state[t] == 1) return false;
            state[t] = 2;
            stack.push_back(t);
        }
    }
    return true;
}

namespace {

void check_annulus(const GridMask& mask, const Region& a) {
    require(a.kind == Region::Kind::annulus, ErrorCode::invalid_argument, "region is not an annulus");
    require(a.r1 < a.r2, ErrorCode::invalid_argument, "degenerate annulus: r1 >= r2");
    require(a.dim == mask.dim(), ErrorCode::invalid_argument, "annulus and mask dimensions differ");
    Rect b = a.bounds();
    for (int ax = 0; ax < a.dim; ++ax)
        require(b.lo[ax] >= mask.window().lo[ax] && b.hi[ax] <= mask.window().hi[ax], ErrorCode::invalid_argument,
                "annulus not inside window");
}

// flood over window indices: `pass(i)` admits a site, seeds already marked
template <class Pass>
void flood(const GridMask& mask, std::vector<std::uint8_t>& mark, std::vector<std::size_t> stack, Pass pass) {
    LatticePoint nb[6];
    const Rect& w = mask.window();
    while (!stack.empty()) {
        std::size_t i = stack.back();
        stack.pop_back();
        int k = neighbours(w, mask.site(i), nb);
        for (int j = 0; j < k; ++j) {
            std::size_t t = mask.index(nb[j]);
            if (mark[t] || !pass(t)) continue;
            mark[t] = 1;
            stack.push_back(t);
        }
    }
}

struct AnnulusView {
    std::vector<std::uint8_t> free, inner, outer;
};

AnnulusView view(const GridMask& mask, const Region& a) {
    AnnulusView v;
    v.free.assign(mask.size(), 0);
    v.inner.assign(mask.size(), 0);
    v.outer.assign(mask.size(), 0);
    for (std::size_t i = 0; i < mask.size(); ++i) {
        LatticePoint p = mask.site(i);
        if (!a.contains(p) || mask.occupied(p)) continue;
        v.free[i] = 1;
        v.inner[i] = a.in_inner_band(p);
        v.outer[i] = a.in_outer_band(p);
    }
    return v;
}

std::vector<LatticePoint> sorted_sites(const GridMask& mask, const std::vector<std::size_t>& idx) {
    std::vector<LatticePoint> out;
    out.reserve(idx.size());
    for (auto i : idx) out.push_back(mask.site(i));
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace

OpeningSet openings(const GridMask& mask, const Region& a) {
    check_annulus(mask, a);
    AnnulusView v = view(mask, a);
    std::vector<std::uint8_t> mark(mask.size(), 0);
    OpeningSet out;
    LatticePoint nb[6];
    for (std::size_t s = 0; s < mask.size(); ++s) {
        if (!v.free[s] || mark[s]) continue;
        std::vector<std::size_t> comp{s}, stack{s};
        mark[s] = 1;
        bool hit_in = v.inner[s], hit_out = v.outer[s];
        while (!stack.empty()) {
            std::size_t i = stack.back();
            stack.pop_back();
            int k = neighbours(mask.window(), mask.site(i), nb);
            for (int j = 0; j < k; ++j) {
                std::size_t t = mask.index(nb[j]);
                if (mark[t] || !v.free[t]) continue;
                mark[t] = 1;
                hit_in |= v.inner[t];
                hit_out |= v.outer[t];
                comp.push_back(t);
                stack.push_back(t);
            }
        }
        if (hit_in && hit_out) out.components.push_back(sorted_sites(mask, comp));
    }
    std::sort(out.components.begin(), out.components.end());
    return out;
}

std::vector<LatticePoint> first_hit_set(const GridMask& mask, const Region& a, std::int64_t radius) {
    check_annulus(mask, a);
    require(a.r1 < radius && radius < a.r2, ErrorCode::invalid_argument, "cut radius must lie strictly between r1 and r2");
    AnnulusView v = view(mask, a);
    const std::size_t n = mask.size();
    std::vector<std::uint8_t> band(n, 0);
    for (std::size_t i = 0; i < n; ++i) band[i] = v.free[i] && in_band(mask.site(i), a.center, radius);

    // interior region reachable from the inner boundary without touching the band
    std::vector<std::uint8_t> interior(n, 0);
    std::vector<std::size_t> seeds;
    for (std::size_t i = 0; i < n; ++i)
        if (v.inner[i] && !band[i]) {
            interior[i] = 1;
            seeds.push_back(i);
        }
    flood(mask, interior, seeds, [&](std::size_t t) { return v.free[t] && !band[t]; });

    // sites joined to the outer boundary
    std::vector<std::uint8_t> to_outer(n, 0);
    seeds.clear();
    for (std::size_t i = 0; i < n; ++i)
        if (v.outer[i]) {
            to_outer[i] = 1;
            seeds.push_back(i);
        }
    flood(mask, to_outer, seeds, [&](std::size_t t) { return v.free[t] != 0; });

    std::vector<std::size_t> hits;
    LatticePoint nb[6];
    for (std::size_t i = 0; i < n; ++i) {
        if (!band[i] || !to_outer[i]) continue;
        bool first = v.inner[i];
        int k = neighbours(mask.window(), mask.site(i), nb);
        for (int j = 0; j < k && !first; ++j) first = interior[mask.index(nb[j])];
        if (first) hits.push_back(i);
    }
    return sorted_sites(mask, hits);
}

std::vector<LatticePoint> cut_set(const GridMask& mask, const Region& a, std::int64_t radius) {
    std::vector<LatticePoint> o0 = first_hit_set(mask, a, radius);
    AnnulusView v = view(mask, a);
    const std::size_t n = mask.size();
    std::vector<std::uint8_t> in_o0(n, 0);
    for (const auto& p : o0) in_o0[mask.index(p)] = 1;

    // continuation avoiding the first-hit set
    std::vector<std::uint8_t> escape(n, 0);
    std::vector<std::size_t> seeds;
    for (std::size_t i = 0; i < n; ++i)
        if (v.outer[i] && !in_o0[i]) {
            escape[i] = 1;
            seeds.push_back(i);
        }
    flood(mask, escape, seeds, [&](std::size_t t) { return v.free[t] && !in_o0[t]; });

    std::vector<LatticePoint> out;
    LatticePoint nb[6];
    for (const auto& p : o0) {
        bool ok = v.outer[mask.index(p)];
        int k = neighbours(mask.window(), p, nb);
        for (int j = 0; j < k && !ok; ++j) ok = escape[mask.index(nb[j])];
        if (ok) out.push_back(p);
    }
    return out;
}

}  // namespace pioneer
