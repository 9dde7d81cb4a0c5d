#include "pioneer/exterior.hpp"

#include <algorithm>

#include "pioneer/error.hpp"
#include "pioneer/grid_mask.hpp"

namespace pioneer {

namespace {

struct Interval {
    std::int64_t lo, hi;
    std::int32_t node;
};

// Union-find whose sets carry member lists; when a set first joins the
// outside set every member receives the current time.
class EscapeUnion {
  public:
    void reset(std::size_t n, std::int32_t outside, std::vector<TimeIndex>& escape) {
        node_.resize(n);
        for (std::size_t i = 0; i < n; ++i) node_[i] = {std::int32_t(i), 1, -1, std::int32_t(i)};
        escape.assign(n, -1);
        escape[std::size_t(outside)] = ExteriorOracle::kAlways;
        escape_ = &escape;
        outside_ = outside;
    }

    std::int32_t find(std::int32_t a) {
        std::int32_t r = a;
        while (node_[std::size_t(r)].parent != r) r = node_[std::size_t(r)].parent;
        while (node_[std::size_t(a)].parent != r) {
            std::int32_t nx = node_[std::size_t(a)].parent;
            node_[std::size_t(a)].parent = r;
            a = nx;
        }
        return r;
    }

    void unite(std::int32_t a, std::int32_t b, TimeIndex time) {
        std::int32_t ra = find(a), rb = find(b);
        if (ra == rb) return;
        std::int32_t ro = find(outside_);
        if (ra == ro || rb == ro) {
            std::int32_t other = ra == ro ? rb : ra;
            for (std::int32_t m = other; m != -1; m = node_[std::size_t(m)].next) (*escape_)[std::size_t(m)] = time;
            node_[std::size_t(other)].parent = ro;
            return;
        }
        if (node_[std::size_t(ra)].size < node_[std::size_t(rb)].size) std::swap(ra, rb);
        Node& A = node_[std::size_t(ra)];
        Node& B = node_[std::size_t(rb)];
        B.parent = ra;
        A.size += B.size;
        node_[std::size_t(A.tail)].next = rb;
        A.tail = B.tail;
    }

  private:
    struct Node {
        std::int32_t parent, size, next, tail;
    };
    std::vector<Node> node_;
    std::vector<TimeIndex>* escape_ = nullptr;
    std::int32_t outside_ = 0;
};

}  // namespace

ExteriorOracle::ExteriorOracle(const Rect& window) : window_(window) {
    require(window.dim == 2, ErrorCode::invalid_argument, "exterior oracle is planar");
    require(!window.empty(), ErrorCode::invalid_argument, "empty window");
    width_ = window.extent(0);
    height_ = window.extent(1);
    tiles_x_ = (width_ + 15) / 16;
    grid_.assign(std::size_t(tiles_x_ * ((height_ + 15) / 16) * 256), -1);
}

void ExteriorOracle::clear() {
    for (const auto& p : pos_) grid_[cell(p)] = -1;
    pos_.clear();
    first_.clear();
    step_id_.clear();
}

void ExteriorOracle::build(std::span<const LatticePoint> trace) {
    clear();
    step_id_.resize(trace.size());
    for (std::size_t t = 0; t < trace.size(); ++t) {
        const LatticePoint& p = trace[t];
        if (p.x <= window_.lo[0] || p.x >= window_.hi[0] || p.y <= window_.lo[1] || p.y >= window_.hi[1] || p.z != 0) [[unlikely]]
            fail(ErrorCode::invalid_argument, "trace reaches the window edge");
        std::int32_t& g = grid_[cell(p)];
        if (g < 0) {
            g = std::int32_t(pos_.size());
            pos_.push_back(p);
            first_.push_back(TimeIndex(t));
        }
        step_id_[t] = g;
    }
    const std::size_t d = pos_.size();

    // visited sites sorted by (y, x): counting sort on x, then stable on y
    std::vector<std::int32_t> by_x(d), cnt(std::size_t(std::max(width_, height_)) + 1, 0);
    for (const auto& p : pos_) ++cnt[std::size_t(p.x - window_.lo[0]) + 1];
    for (std::size_t i = 1; i < cnt.size(); ++i) cnt[i] += cnt[i - 1];
    for (std::size_t k = 0; k < d; ++k) by_x[std::size_t(cnt[std::size_t(pos_[k].x - window_.lo[0])]++)] = std::int32_t(k);
    row_start_.assign(std::size_t(height_) + 1, 0);
    for (const auto& p : pos_) ++row_start_[std::size_t(p.y - window_.lo[1]) + 1];
    for (std::size_t i = 1; i < row_start_.size(); ++i) row_start_[i] += row_start_[i - 1];
    std::vector<std::int32_t> fill(row_start_.begin(), row_start_.end() - 1);
    xs_.resize(d);
    csr_of_.resize(d);
    for (std::int32_t k : by_x) {
        const LatticePoint& p = pos_[std::size_t(k)];
        std::int32_t at = fill[std::size_t(p.y - window_.lo[1])]++;
        xs_[std::size_t(at)] = p.x;
        csr_of_[std::size_t(k)] = at;
    }

    // nodes: visited ids [0, d), gap after csr slot p -> d + p, outside -> 2d
    const auto outside = std::int32_t(2 * d);
    EscapeUnion uf;
    uf.reset(2 * d + 1, outside, escape_);

    auto row_intervals = [&](std::int64_t r, std::vector<Interval>& out) {
        out.clear();
        std::int32_t a = row_start_[std::size_t(r)], b = row_start_[std::size_t(r) + 1];
        if (a == b) {
            out.push_back({window_.lo[0], window_.hi[0], outside});
            return;
        }
        out.push_back({window_.lo[0], xs_[std::size_t(a)] - 1, outside});
        for (std::int32_t p = a; p + 1 < b; ++p)
            if (xs_[std::size_t(p) + 1] > xs_[std::size_t(p)] + 1)
                out.push_back({xs_[std::size_t(p)] + 1, xs_[std::size_t(p) + 1] - 1, std::int32_t(d) + p});
        out.push_back({xs_[std::size_t(b) - 1] + 1, window_.hi[0], outside});
    };
    std::vector<Interval> cur, nxt;
    row_intervals(0, cur);
    for (std::int64_t r = 0; r + 1 < height_; ++r) {
        row_intervals(r + 1, nxt);
        bool both_empty = cur.size() == 1 && nxt.size() == 1;
        if (!both_empty) {
            std::size_t i = 0, j = 0;
            while (i < cur.size() && j < nxt.size()) {
                if (cur[i].hi >= nxt[j].lo && nxt[j].hi >= cur[i].lo) uf.unite(cur[i].node, nxt[j].node, kAlways);
                if (cur[i].hi < nxt[j].hi)
                    ++i;
                else
                    ++j;
            }
        }
        std::swap(cur, nxt);
    }

    // reverse time: site k becomes free once T < first_[k]
    for (std::size_t k = d; k-- > 0;) {
        const LatticePoint p = pos_[k];
        const TimeIndex time = first_[k] - 1;
        const std::int32_t at = csr_of_[k];
        const std::int64_t r = p.y - window_.lo[1];
        for (unsigned dir = 0; dir < 4; ++dir) {
            LatticePoint q = step(p, dir);
            std::int32_t g = grid_[cell(q)];
            std::int32_t other;
            if (g >= 0) {
                if (std::size_t(g) < k) continue;  // still occupied
                other = g;
            } else if (dir == 0) {
                other = at + 1 < row_start_[std::size_t(r) + 1] ? std::int32_t(d) + at : outside;
            } else if (dir == 2) {
                other = at > row_start_[std::size_t(r)] ? std::int32_t(d) + at - 1 : outside;
            } else {
                other = node_of(q);
                if (other < 0) other = outside;
            }
            uf.unite(std::int32_t(k), other, time);
        }
    }
}

std::int32_t ExteriorOracle::node_of(const LatticePoint& q) const {
    const std::int64_t r = q.y - window_.lo[1];
    const std::int32_t a = row_start_[std::size_t(r)], b = row_start_[std::size_t(r) + 1];
    auto it = std::upper_bound(xs_.begin() + a, xs_.begin() + b, q.x);
    auto j = std::int32_t(it - xs_.begin());
    if (j == a || j == b) return -1;
    return std::int32_t(pos_.size()) + j - 1;
}

TimeIndex ExteriorOracle::escape_time(const LatticePoint& p) const {
    if (!window_.contains(p)) return kAlways;
    std::int32_t g = grid_[cell(p)];
    if (g >= 0) return escape_[std::size_t(g)];
    std::int32_t n = node_of(p);
    return n < 0 ? kAlways : escape_[std::size_t(n)];
}

TimeIndex ExteriorOracle::first_visit(const LatticePoint& p) const {
    if (!window_.contains(p)) return -1;
    std::int32_t g = grid_[cell(p)];
    return g >= 0 ? first_[std::size_t(g)] : -1;
}

std::vector<std::uint8_t> exterior_mask_bruteforce(std::span<const LatticePoint> trace, TimeIndex t, const Rect& window) {
    GridMask occ(window);
    for (TimeIndex s = 0; s <= t && s < TimeIndex(trace.size()); ++s) occ.set(trace[std::size_t(s)]);
    std::vector<std::uint8_t> ext(occ.size(), 0);
    std::vector<std::size_t> stack;
    for (std::size_t i = 0; i < occ.size(); ++i) {
        LatticePoint p = occ.site(i);
        if (window.on_edge(p) && !occ.occupied(p)) {
            ext[i] = 1;
            stack.push_back(i);
        }
    }
    LatticePoint nb[6];
    while (!stack.empty()) {
        std::size_t i = stack.back();
        stack.pop_back();
        int k = neighbours(window, occ.site(i), nb);
        for (int j = 0; j < k; ++j) {
            std::size_t q = occ.index(nb[j]);
            if (ext[q] || occ.occupied(nb[j])) continue;
            ext[q] = 1;
            stack.push_back(q);
        }
    }
    return ext;
}

}  // namespace pioneer
