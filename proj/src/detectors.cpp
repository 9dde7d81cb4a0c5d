#include "pioneer/detectors.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <unordered_map>

#include "pioneer/decomposition.hpp"
#include "pioneer/error.hpp"
#include "pioneer/grid_mask.hpp"
#include "pioneer/path_blocks.hpp"

namespace pioneer {

std::string to_string(DetectorKind k) {
    switch (k) {
        case DetectorKind::ptp: return "ptp";
        case DetectorKind::pdcp: return "pdcp";
        case DetectorKind::bdp: return "bdp";
    }
    return "?";
}

DetectorKind parse_detector_kind(const std::string& s) {
    if (s == "ptp") return DetectorKind::ptp;
    if (s == "pdcp") return DetectorKind::pdcp;
    if (s == "bdp") return DetectorKind::bdp;
    fail(ErrorCode::invalid_argument, "unknown detector kind '" + s + "'");
}

double DetectorConfig::delta() const { return std::ldexp(1.0, 1 - K); }

void DetectorConfig::validate() const {
    require(dim == 2 || dim == 3, ErrorCode::config, "dimension must be 2 or 3");
    require(kind == DetectorKind::pdcp || dim == 2, ErrorCode::config, to_string(kind) + " detection is planar");
    require(K >= 1 && K <= 20, ErrorCode::config, "K out of range");
    require(iota > 0.0 && iota < 0.5, ErrorCode::config, "iota must lie in (0, 1/2)");
    require(delta() <= iota / 2.0, ErrorCode::config, "delta must not exceed iota/2");
    require(n >= n_min(), ErrorCode::config,
            "scale n=" + std::to_string(n) + " is below N(delta)=" + std::to_string(n_min()));
    require(resolution >= 1 && (resolution & (resolution - 1)) == 0, ErrorCode::config, "resolution must be a power of two");
    require((resolution >> n) >= 1, ErrorCode::config,
            "scale n=" + std::to_string(n) + " is finer than the lattice resolution " + std::to_string(resolution));
}

std::string DetectorConfig::canonical() const {
    std::ostringstream os;
    os << "kind=" << to_string(kind) << ";dim=" << dim << ";n=" << n << ";K=" << K << ";iota=" << iota << ";R=" << resolution
       << ";two_loop=" << int(two_loop);
    return os.str();
}

std::uint64_t DetectorConfig::hash() const {
    std::uint64_t h = 1469598103934665603ull;
    for (char c : canonical()) h = (h ^ std::uint8_t(c)) * 1099511628211ull;
    return h;
}

Bulk Bulk::of(const DetectorConfig& cfg) {
    Bulk b;
    b.dim = cfg.dim;
    b.n_base = cfg.n_min();
    b.resolution = cfg.resolution;
    b.r_in = cfg.iota * double(cfg.resolution);
    b.r_out = (1.0 - cfg.iota) * double(cfg.resolution);
    return b;
}

bool Bulk::box_inside(const DyadicBox& b) const {
    Rect r = b.rect();
    double mmin = 0, mmax = 0;
    for (int a = 0; a < dim; ++a) {
        double lo = double(r.lo[a]), hi = double(r.hi[a]);
        double far = std::max(std::abs(lo), std::abs(hi));
        double near = (lo <= 0 && 0 <= hi) ? 0.0 : std::min(std::abs(lo), std::abs(hi));
        mmin += near * near;
        mmax += far * far;
    }
    return mmin >= r_in * r_in && mmax <= r_out * r_out;
}

bool Bulk::contains(const DyadicBox& b) const {
    if (b.n < n_base) return false;
    DyadicBox a = b;
    const int up = b.n - n_base;
    a.n = n_base;
    a.unit = b.unit << up;
    for (int k = 0; k < dim; ++k) a.idx[k] = b.idx[k] >> up;
    return box_inside(a);
}

bool GoodBoxReport::contains(const DyadicBox& b) const {
    return std::any_of(boxes.begin(), boxes.end(), [&](const GoodBox& g) { return g.box == b; });
}

std::string GoodBoxReport::to_text() const {
    std::ostringstream os;
    for (const auto& g : boxes) {
        os << g.box.n << ' ' << g.box.idx[0] << ' ' << g.box.idx[1];
        if (g.box.dim == 3) os << ' ' << g.box.idx[2];
        os << ' ' << g.stop << '\n';
    }
    os << "# count=" << boxes.size() << " config=" << std::hex << config.hash() << std::dec << '\n';
    return os.str();
}

ExteriorOracle& DetectorWorkspace::oracle(const Rect& window) {
    if (!oracle_ || !(oracle_->window() == window)) oracle_ = std::make_unique<ExteriorOracle>(window);
    return *oracle_;
}

namespace {

using Idx = std::array<std::int64_t, 3>;

struct BoxLists {
    std::vector<Idx> idx;
    std::vector<std::size_t> start{0};
    std::vector<TimeIndex> times;
    std::span<const TimeIndex> at(std::size_t k) const { return {times.data() + start[k], start[k + 1] - start[k]}; }
    std::size_t size() const { return idx.size(); }
};

// sorted visit times of every bulk box at scale n with >= min_visits visits
BoxLists build_box_lists(std::span<const LatticePoint> trace, std::size_t end, int n, const Bulk& bulk, const Resolution& res,
                         std::size_t min_visits) {
    BoxLists out;
    const std::int64_t u = res.unit(n);
    const int shift = std::countr_zero(std::uint64_t(u));
    const int dim = res.dim;
    const std::int64_t half = (res.radius >> shift) + 2;  // index range [-half, half)
    const std::int64_t side = 2 * half;
    auto box_of = [&](const LatticePoint& p) {
        return Idx{std::int64_t(p.x) >> shift, std::int64_t(p.y) >> shift, dim == 3 ? std::int64_t(p.z) >> shift : 0};
    };
    auto make_box = [&](const Idx& i) { return DyadicBox::make(res, n, i[0], i[1], i[2]); };
    if (dim == 2 && side * side <= (std::int64_t(1) << 22)) {
        std::vector<std::int8_t> bulk_flag(std::size_t(side * side), -1);
        std::vector<std::uint32_t> count(std::size_t(side * side) + 1, 0);
        auto slot = [&](const LatticePoint& p) -> std::int64_t {
            Idx i = box_of(p);
            if (i[0] < -half || i[0] >= half || i[1] < -half || i[1] >= half) return -1;
            std::int64_t s = (i[0] + half) + (i[1] + half) * side;
            std::int8_t& f = bulk_flag[std::size_t(s)];
            if (f < 0) f = bulk.contains(make_box(i)) ? 1 : 0;
            return f ? s : -1;
        };
        std::vector<std::int64_t> slot_of(end);
        for (std::size_t t = 0; t < end; ++t) {
            std::int64_t s = slot(trace[t]);
            slot_of[t] = s;
            if (s >= 0) ++count[std::size_t(s)];
        }
        std::vector<std::uint32_t> pos(count.size(), 0);
        std::size_t total = 0;
        for (std::size_t s = 0; s + 1 < count.size(); ++s) {
            if (count[s] >= min_visits && count[s] > 0) {
                out.idx.push_back(Idx{std::int64_t(s % std::size_t(side)) - half, std::int64_t(s / std::size_t(side)) - half, 0});
                pos[s] = std::uint32_t(total);
                total += count[s];
                out.start.push_back(total);
            } else {
                count[s] = 0;
            }
        }
        out.times.resize(total);
        for (std::size_t t = 0; t < end; ++t) {
            std::int64_t s = slot_of[t];
            if (s >= 0 && count[std::size_t(s)] > 0) out.times[pos[std::size_t(s)]++] = TimeIndex(t);
        }
        return out;
    }
    std::unordered_map<std::uint64_t, bool> bulk_cache;
    std::vector<std::pair<std::uint64_t, TimeIndex>> pairs;
    for (std::size_t t = 0; t < end; ++t) {
        Idx i = box_of(trace[t]);
        LatticePoint key{std::int32_t(i[0]), std::int32_t(i[1]), std::int32_t(i[2])};
        std::uint64_t k = pack(key);
        auto it = bulk_cache.find(k);
        if (it == bulk_cache.end()) it = bulk_cache.emplace(k, bulk.contains(make_box(i))).first;
        if (it->second) pairs.emplace_back(k, TimeIndex(t));
    }
    std::sort(pairs.begin(), pairs.end());
    for (std::size_t a = 0; a < pairs.size();) {
        std::size_t b = a;
        while (b < pairs.size() && pairs[b].first == pairs[a].first) ++b;
        if (b - a >= std::max<std::size_t>(min_visits, 1)) {
            Idx i = box_of(trace[std::size_t(pairs[a].second)]);
            out.idx.push_back(i);
            for (std::size_t c = a; c < b; ++c) out.times.push_back(pairs[c].second);
            out.start.push_back(out.times.size());
        }
        a = b;
    }
    return out;
}

// Inner boundary of Z = D(S) + its neighbours, as offsets from the box corner.
const std::vector<LatticePoint>& z_boundary(int dim, std::int64_t u) {
    static std::mutex mu;
    static std::map<std::pair<int, std::int64_t>, std::vector<LatticePoint>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto key = std::make_pair(dim, u);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
    const Center2 c{u - 1, u - 1, dim == 3 ? u - 1 : 0};
    auto in_d = [&](const LatticePoint& p) { return sq_dist2(p, c) <= 4 * u * u; };
    auto in_z = [&](const LatticePoint& p) {
        if (in_d(p)) return true;
        for (unsigned d = 0; d < unsigned(2 * dim); ++d)
            if (in_d(step(p, d))) return true;
        return false;
    };
    std::vector<LatticePoint> out;
    const std::int64_t lo = -u - 2, hi = 2 * u + 2;
    for (std::int64_t z = (dim == 3 ? lo : 0); z <= (dim == 3 ? hi : 0); ++z)
        for (std::int64_t y = lo; y <= hi; ++y)
            for (std::int64_t x = lo; x <= hi; ++x) {
                LatticePoint p{std::int32_t(x), std::int32_t(y), std::int32_t(z)};
                if (!in_z(p)) continue;
                bool edge = false;
                for (unsigned d = 0; d < unsigned(2 * dim) && !edge; ++d) edge = !in_z(step(p, d));
                if (edge) out.push_back(p);
            }
    return cache.emplace(key, std::move(out)).first->second;
}

Rect trace_window(std::span<const LatticePoint> trace, std::int64_t radius, int dim) {
    std::int64_t h = radius;
    for (const auto& p : trace) h = std::max({h, std::int64_t(std::abs(p.x)), std::int64_t(std::abs(p.y)), std::int64_t(std::abs(p.z))});
    return Rect::square(dim, h + 2);
}

LatticePoint corner(const DyadicBox& b) {
    return {std::int32_t(b.idx[0] * b.unit), std::int32_t(b.idx[1] * b.unit), std::int32_t(b.idx[2] * b.unit)};
}

LatticePoint shifted(const LatticePoint& a, const LatticePoint& o) { return {a.x + o.x, a.y + o.y, a.z + o.z}; }

// Two-level block minima of per-step first-visit times.
class RangeMin {
  public:
    void build(std::vector<TimeIndex> values) {
        v_ = std::move(values);
        b1_.assign((v_.size() + 63) / 64, INT64_MAX);
        for (std::size_t i = 0; i < v_.size(); ++i) b1_[i / 64] = std::min(b1_[i / 64], v_[i]);
        b2_.assign((b1_.size() + 63) / 64, INT64_MAX);
        for (std::size_t i = 0; i < b1_.size(); ++i) b2_[i / 64] = std::min(b2_[i / 64], b1_[i]);
    }
    // min over [a, b]
    TimeIndex min(std::size_t a, std::size_t b) const {
        TimeIndex m = INT64_MAX;
        std::size_t i = a;
        while (i <= b) {
            if (i % 4096 == 0 && i + 4095 <= b) {
                m = std::min(m, b2_[i / 4096]);
                i += 4096;
            } else if (i % 64 == 0 && i + 63 <= b) {
                m = std::min(m, b1_[i / 64]);
                i += 64;
            } else {
                m = std::min(m, v_[i]);
                ++i;
            }
        }
        return m;
    }

  private:
    std::vector<TimeIndex> v_, b1_, b2_;
};

class WalkScanner {
  public:
    WalkScanner(const LatticePath& path, const DetectorConfig& cfg, DetectorWorkspace* ws)
        : path_(path), cfg_(cfg), bulk_(Bulk::of(cfg)), res_(cfg.res()), blocks_(path.sites()) {
        require(path.dim() == cfg.dim, ErrorCode::config, "path dimension does not match the detector");
        require(!path.empty(), ErrorCode::invalid_argument, "empty path");
        if (cfg.dim == 2) {
            if (!ws) {
                own_ = std::make_unique<DetectorWorkspace>();
                ws = own_.get();
            }
            oracle_ = &ws->oracle(trace_window(path.sites(), cfg.resolution, 2));
            oracle_->build(path.sites());
        }
    }

    std::vector<GoodBoxReport> ptp(int n_lo, int n_hi, bool prune) {
        std::vector<GoodBoxReport> out;
        struct Live {
            DyadicBox box;
            std::vector<TimeIndex> times;
        };
        std::vector<Live> live;
        for (int n = n_lo; n <= n_hi; ++n) {
            GoodBoxReport rep = empty_report(n);
            std::vector<Live> next;
            auto consider = [&](const DyadicBox& b, std::span<const TimeIndex> times) {
                if (times.size() < 3) return;
                auto stop = ptp_pattern(b, times);
                if (!stop || !exterior_margin(b, *stop)) return;
                rep.boxes.push_back({b, *stop});
                if (prune) next.push_back({b, std::vector<TimeIndex>(times.begin(), times.end())});
            };
            if (!prune || n == n_lo) {
                BoxLists lists = build_box_lists(path_.sites(), path_.size(), n, bulk_, res_, 3);
                for (std::size_t k = 0; k < lists.size(); ++k)
                    consider(DyadicBox::make(res_, n, lists.idx[k][0], lists.idx[k][1]), lists.at(k));
            } else {
                for (const auto& parent : live)
                    for (const auto& child : parent.box.children()) {
                        std::vector<TimeIndex> t;
                        for (TimeIndex s : parent.times)
                            if (child.contains(path_[s])) t.push_back(s);
                        consider(child, t);
                    }
            }
            std::sort(rep.boxes.begin(), rep.boxes.end());
            out.push_back(std::move(rep));
            live = std::move(next);
        }
        return out;
    }

    GoodBoxReport pdcp(int n) {
        GoodBoxReport rep = empty_report(n);
        ensure_first_visits();
        BoxLists lists = build_box_lists(path_.sites(), path_.size(), n, bulk_, res_, 2);
        for (std::size_t k = 0; k < lists.size(); ++k) {
            DyadicBox b = DyadicBox::make(res_, n, lists.idx[k][0], lists.idx[k][1], lists.idx[k][2]);
            auto times = lists.at(k);
            BoxRadii r = BoxRadii::of(b, cfg_.K);
            const TimeIndex v1 = times[0];
            auto u2 = blocks_.first_reach(v1 + 1, r.center, r.reach_rho);
            if (!u2) continue;
            auto it = std::lower_bound(times.begin(), times.end(), *u2);
            if (it == times.end()) continue;
            const TimeIndex stop = *it;
            if (!pdcp_disjoint(r, v1, stop)) continue;
            if (cfg_.dim == 2 && !pdcp_two_components(b, r, stop)) continue;
            rep.boxes.push_back({b, stop});
        }
        std::sort(rep.boxes.begin(), rep.boxes.end());
        return rep;
    }

    // condition (2): W[0, tau(D(S))] and W[tau(S, C(S)), T] share no site
    bool pdcp_disjoint(const BoxRadii& r, TimeIndex v1, TimeIndex stop) const {
        auto t_disc = blocks_.first_within(0, r.center, 4 * r.unit * r.unit);
        auto t_exit = blocks_.first_reach(v1, r.center, 4 * (r.unit - 1) * (r.unit - 1));
        if (!t_disc || !t_exit || *t_exit > stop) return false;
        return first_min_.min(std::size_t(*t_exit), std::size_t(stop)) > *t_disc;
    }

  private:
    GoodBoxReport empty_report(int n) const {
        GoodBoxReport rep;
        rep.config = cfg_;
        rep.config.n = n;
        rep.config.validate();
        rep.bulk = bulk_;
        return rep;
    }

    // S -> circle rho -> S -> circle rho -> S; returns T(S)
    std::optional<TimeIndex> ptp_pattern(const DyadicBox& b, std::span<const TimeIndex> times) const {
        const BoxRadii r = BoxRadii::of(b, cfg_.K);
        TimeIndex v = times[0];
        for (int k = 0; k < 2; ++k) {
            auto u = blocks_.first_reach(v + 1, r.center, r.reach_rho);
            if (!u) return std::nullopt;
            auto it = std::lower_bound(times.begin(), times.end(), *u);
            if (it == times.end()) return std::nullopt;
            v = *it;
        }
        return v;
    }

    bool exterior_margin(const DyadicBox& b, TimeIndex stop) const {
        const LatticePoint c = corner(b);
        for (const auto& o : z_boundary(2, b.unit))
            if (oracle_->exterior_at(shifted(c, o), stop)) return true;
        return false;
    }

    void ensure_first_visits() {
        if (first_ready_) return;
        std::vector<TimeIndex> f(path_.size());
        if (oracle_) {
            for (std::size_t t = 0; t < f.size(); ++t) f[t] = oracle_->first_visit_at(t);
        } else {
            std::unordered_map<std::uint64_t, TimeIndex> first;
            first.reserve(path_.size());
            for (std::size_t t = 0; t < f.size(); ++t) f[t] = first.emplace(pack(path_[TimeIndex(t)]), TimeIndex(t)).first->second;
        }
        first_min_.build(std::move(f));
        first_ready_ = true;
    }

    // condition (3): two components of B(S, rho) minus W[0, T] meet D(S) and escape
    bool pdcp_two_components(const DyadicBox& b, const BoxRadii& r, TimeIndex stop) {
        const std::int64_t reach_band = r.rho.minus(1).reach_threshold();
        const std::int64_t span = isqrt64(r.within_rho) / 2 + 2;
        const std::int64_t cx = r.center.x2 / 2, cy = r.center.y2 / 2;
        const std::int64_t side = 2 * span + 2;
        const std::int64_t x0 = cx - span, y0 = cy - span;
        stamp_.resize(std::size_t(side * side));
        ++epoch_;
        auto local = [&](const LatticePoint& p) { return std::size_t((p.x - x0) + (p.y - y0) * side); };
        auto free_at = [&](const LatticePoint& p) {
            TimeIndex f = oracle_->first_visit(p);
            return f < 0 || f > stop;
        };
        auto in_ball = [&](const LatticePoint& p) { return sq_dist2(p, r.center) <= r.within_rho; };
        int escaping = 0;
        std::vector<LatticePoint> stack;
        for (const auto& s : b.margin_disc()) {
            if (!free_at(s) || stamp_[local(s)] == epoch_) continue;
            bool escapes = false;
            stamp_[local(s)] = epoch_;
            stack.assign(1, s);
            while (!stack.empty()) {
                LatticePoint p = stack.back();
                stack.pop_back();
                if (!escapes && sq_dist2(p, r.center) >= reach_band && oracle_->exterior_at(p, stop)) escapes = true;
                for (unsigned d = 0; d < 4; ++d) {
                    LatticePoint q = step(p, d);
                    if (!in_ball(q) || stamp_[local(q)] == epoch_ || !free_at(q)) continue;
                    stamp_[local(q)] = epoch_;
                    stack.push_back(q);
                }
            }
            if (escapes && ++escaping >= 2) return true;
        }
        return false;
    }

    const LatticePath& path_;
    DetectorConfig cfg_;
    Bulk bulk_;
    Resolution res_;
    PathBlocks blocks_;
    std::unique_ptr<DetectorWorkspace> own_;
    ExteriorOracle* oracle_ = nullptr;
    RangeMin first_min_;
    bool first_ready_ = false;
    std::vector<std::uint32_t> stamp_;
    std::uint32_t epoch_ = 0;
};

// Static exterior of a cluster mask (window edge = infinity).
class ClusterExterior {
  public:
    ClusterExterior(const std::vector<LatticePoint>& sites, const Rect& window) : occ_(rasterize(sites, window)) {
        ext_.assign(occ_.size(), 0);
        std::vector<std::size_t> stack;
        for (const auto& p : window_edge(window))
            if (!occ_.occupied(p)) {
                ext_[occ_.index(p)] = 1;
                stack.push_back(occ_.index(p));
            }
        LatticePoint nb[6];
        while (!stack.empty()) {
            std::size_t i = stack.back();
            stack.pop_back();
            int k = neighbours(window, occ_.site(i), nb);
            for (int j = 0; j < k; ++j) {
                std::size_t q = occ_.index(nb[j]);
                if (ext_[q] || occ_.occupied(nb[j])) continue;
                ext_[q] = 1;
                stack.push_back(q);
            }
        }
    }
    bool exterior(const LatticePoint& p) const { return !occ_.in_window(p) || ext_[occ_.index(p)]; }

  private:
    GridMask occ_;
    std::vector<std::uint8_t> ext_;
};

bool margin_escapes(const DyadicBox& b, const ClusterExterior& ext) {
    const LatticePoint c = corner(b);
    for (const auto& o : z_boundary(2, b.unit))
        if (ext.exterior(shifted(c, o))) return true;
    return false;
}

// loop pattern: S -> circle rho -> S strictly before the loop closes
std::optional<TimeIndex> loop_pattern(const DyadicBox& b, std::span<const TimeIndex> times, const PathBlocks& blocks, int K) {
    const BoxRadii r = BoxRadii::of(b, K);
    auto u = blocks.first_reach(times[0] + 1, r.center, r.reach_rho);
    if (!u) return std::nullopt;
    auto it = std::lower_bound(times.begin(), times.end(), *u);
    if (it == times.end()) return std::nullopt;
    return *it;
}

std::vector<GoodBoxReport> bdp_scan(const std::vector<const LatticePath*>& loops, const LoopSoup& soup, const DetectorConfig& cfg,
                                    int n_lo, int n_hi) {
    for (const auto* l : loops) require(l->front() == l->back(), ErrorCode::invalid_argument, "bdp needs closed loops");
    std::vector<const LatticePath*> all = loops;
    for (const auto& l : soup.loops) all.push_back(&l.path());
    ClusterPartition part = clusters(all);
    const bool same = loops.size() == 1 || part.cluster_of[0] == part.cluster_of[1];
    std::vector<GoodBoxReport> out;
    Rect window = trace_window(loops[0]->sites(), cfg.resolution, 2);
    for (const auto* l : loops) {
        Rect w = trace_window(l->sites(), cfg.resolution, 2);
        if (w.hi[0] > window.hi[0]) window = w;
    }
    for (const auto& l : soup.loops)
        for (const auto& p : l.path().sites())
            require(window.contains(p) && !window.on_edge(p), ErrorCode::invalid_argument, "soup loop leaves the detector window");
    ClusterExterior ext(part.cluster_sites[std::size_t(part.cluster_of[0])], window);
    const Bulk bulk = Bulk::of(cfg);
    const Resolution res = cfg.res();
    std::vector<PathBlocks> blocks;
    for (const auto* l : loops) blocks.emplace_back(l->sites());
    for (int n = n_lo; n <= n_hi; ++n) {
        GoodBoxReport rep;
        rep.config = cfg;
        rep.config.n = n;
        rep.config.validate();
        rep.bulk = bulk;
        if (same) {
            std::vector<std::map<Idx, TimeIndex>> found(loops.size());
            for (std::size_t i = 0; i < loops.size(); ++i) {
                const std::size_t end = loops[i]->size() - 1;  // drop the closing copy of the root
                BoxLists lists = build_box_lists(loops[i]->sites(), end, n, bulk, res, loops.size() == 1 ? 2 : 1);
                for (std::size_t k = 0; k < lists.size(); ++k) {
                    DyadicBox b = DyadicBox::make(res, n, lists.idx[k][0], lists.idx[k][1]);
                    if (loops.size() == 1) {
                        auto stop = loop_pattern(b, lists.at(k), blocks[i], cfg.K);
                        if (stop) found[i][lists.idx[k]] = *stop;
                    } else {
                        found[i][lists.idx[k]] = lists.at(k)[0];
                    }
                }
            }
            for (const auto& [idx, stop] : found[0]) {
                if (loops.size() == 2 && !found[1].count(idx)) continue;
                DyadicBox b = DyadicBox::make(res, n, idx[0], idx[1]);
                if (margin_escapes(b, ext)) rep.boxes.push_back({b, stop});
            }
        }
        std::sort(rep.boxes.begin(), rep.boxes.end());
        out.push_back(std::move(rep));
    }
    return out;
}

}  // namespace

GoodBoxReport good_boxes_ptp(const LatticePath& path, const DetectorConfig& cfg, DetectorWorkspace* ws) {
    require(cfg.kind == DetectorKind::ptp, ErrorCode::config, "detector kind is not ptp");
    cfg.validate();
    WalkScanner sc(path, cfg, ws);
    return std::move(sc.ptp(cfg.n, cfg.n, false).front());
}

GoodBoxReport good_boxes_pdcp(const LatticePath& path, const DetectorConfig& cfg, DetectorWorkspace* ws) {
    require(cfg.kind == DetectorKind::pdcp, ErrorCode::config, "detector kind is not pdcp");
    cfg.validate();
    WalkScanner sc(path, cfg, ws);
    return sc.pdcp(cfg.n);
}

GoodBoxReport good_boxes_bdp(const LatticeLoop& loop, const LoopSoup& soup, const DetectorConfig& cfg) {
    require(cfg.kind == DetectorKind::bdp, ErrorCode::config, "detector kind is not bdp");
    cfg.validate();
    return std::move(bdp_scan({&loop.path()}, soup, cfg, cfg.n, cfg.n).front());
}

GoodBoxReport good_boxes_bdp_pair(const LatticeLoop& first, const LatticeLoop& second, const LoopSoup& soup, const DetectorConfig& cfg) {
    require(cfg.kind == DetectorKind::bdp, ErrorCode::config, "detector kind is not bdp");
    cfg.validate();
    return std::move(bdp_scan({&first.path(), &second.path()}, soup, cfg, cfg.n, cfg.n).front());
}

std::vector<GoodBoxReport> scan_scales(const LatticePath& path, const DetectorConfig& cfg, int n_lo, int n_hi, bool prune,
                                       DetectorWorkspace* ws) {
    require(n_lo <= n_hi, ErrorCode::config, "empty scale range");
    DetectorConfig c = cfg;
    c.n = n_lo;
    c.validate();
    c.n = n_hi;
    c.validate();
    WalkScanner sc(path, c, ws);
    if (cfg.kind == DetectorKind::ptp) return sc.ptp(n_lo, n_hi, prune);
    require(cfg.kind == DetectorKind::pdcp, ErrorCode::config, "use scan_scales_bdp for boundary double points");
    std::vector<GoodBoxReport> out;
    for (int n = n_lo; n <= n_hi; ++n) out.push_back(sc.pdcp(n));
    return out;
}

std::vector<GoodBoxReport> scan_scales_bdp(const LatticeLoop& loop, const LoopSoup& soup, const DetectorConfig& cfg, int n_lo, int n_hi) {
    require(cfg.kind == DetectorKind::bdp, ErrorCode::config, "detector kind is not bdp");
    require(n_lo <= n_hi, ErrorCode::config, "empty scale range");
    return bdp_scan({&loop.path()}, soup, cfg, n_lo, n_hi);
}

bool has_macroscopic_ptp(const LatticePath& walk, TimeIndex N, double delta, DetectorWorkspace* ws) {
    require(walk.dim() == 2, ErrorCode::invalid_argument, "macroscopic pioneer points are planar");
    require(N >= 0 && N <= walk.length(), ErrorCode::invalid_argument, "N exceeds the walk length");
    require(delta > 0.0, ErrorCode::invalid_argument, "delta must be positive");
    const auto gap = static_cast<TimeIndex>(std::ceil(delta * double(N)));
    if (3 * gap > N) return false;
    std::span<const LatticePoint> x(walk.sites().data(), std::size_t(N) + 1);
    std::unique_ptr<DetectorWorkspace> own;
    if (!ws) {
        own = std::make_unique<DetectorWorkspace>();
        ws = own.get();
    }
    ExteriorOracle& oracle = ws->oracle(trace_window(x, 0, 2));
    oracle.build(x);
    // visit times grouped by site (discovery id)
    const std::size_t d = oracle.distinct();
    std::vector<std::uint32_t> start(d + 1, 0);
    std::vector<std::int32_t> id(x.size());
    {
        std::unordered_map<std::uint64_t, std::int32_t> ids;
        ids.reserve(d * 2);
        for (std::size_t t = 0; t < x.size(); ++t) id[t] = ids.emplace(pack(x[t]), std::int32_t(ids.size())).first->second;
    }
    for (std::size_t t = 0; t < x.size(); ++t) ++start[std::size_t(id[t]) + 1];
    for (std::size_t i = 1; i <= d; ++i) start[i] += start[i - 1];
    std::vector<TimeIndex> times(x.size());
    std::vector<std::uint32_t> fill(start.begin(), start.end() - 1);
    for (std::size_t t = 0; t < x.size(); ++t) times[fill[std::size_t(id[t])]++] = TimeIndex(t);
    for (std::size_t s = 0; s < d; ++s) {
        auto b = times.begin() + start[s], e = times.begin() + start[s + 1];
        if (e - b < 3) continue;
        auto t1 = std::lower_bound(b, e, gap);
        if (t1 == e) continue;
        auto t2 = std::lower_bound(t1, e, *t1 + gap);
        if (t2 == e) continue;
        auto t3 = std::lower_bound(t2, e, *t2 + gap);
        if (t3 == e) continue;
        const LatticePoint z = x[std::size_t(*t3)];
        for (unsigned dir = 0; dir < 4; ++dir)
            if (oracle.exterior_at(step(z, dir), *t3)) return true;
    }
    return false;
}

}  // namespace pioneer
