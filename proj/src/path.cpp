#include "pioneer/path.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <sstream>
#include <unordered_map>

#include "pioneer/error.hpp"

namespace pioneer {

class SiteIndex {
  public:
    explicit SiteIndex(const std::vector<LatticePoint>& sites) {
        std::vector<std::pair<std::uint64_t, TimeIndex>> pairs(sites.size());
        for (std::size_t t = 0; t < sites.size(); ++t) pairs[t] = {pack(sites[t]), TimeIndex(t)};
        std::sort(pairs.begin(), pairs.end());
        times_.resize(pairs.size());
        where_.reserve(pairs.size() / 2 + 1);
        for (std::size_t i = 0; i < pairs.size();) {
            std::size_t j = i;
            while (j < pairs.size() && pairs[j].first == pairs[i].first) {
                times_[j] = pairs[j].second;
                ++j;
            }
            where_.emplace(pairs[i].first, std::make_pair(i, j - i));
            i = j;
        }
    }
    std::span<const TimeIndex> lookup(const LatticePoint& p) const {
        auto it = where_.find(pack(p));
        if (it == where_.end()) return {};
        return {times_.data() + it->second.first, it->second.second};
    }
    std::size_t distinct() const { return where_.size(); }

  private:
    std::vector<TimeIndex> times_;
    std::unordered_map<std::uint64_t, std::pair<std::size_t, std::size_t>> where_;
};

struct IndexSlot {
    std::once_flag once;
    std::unique_ptr<SiteIndex> index;
};

LatticePath::LatticePath(int dim, std::vector<LatticePoint> sites)
    : dim_(dim), sites_(std::move(sites)), slot_(std::make_shared<IndexSlot>()) {
    require(dim == 2 || dim == 3, ErrorCode::invalid_argument, "dimension must be 2 or 3");
    for (std::size_t t = 0; t < sites_.size(); ++t) {
        require(dim == 3 || sites_[t].z == 0, ErrorCode::invalid_argument, "planar path with nonzero z");
        if (t > 0) require(unit_step(sites_[t - 1], sites_[t]), ErrorCode::invalid_argument, "path step is not a unit step");
    }
}

const SiteIndex& LatticePath::index() const {
    if (!slot_) const_cast<LatticePath*>(this)->slot_ = std::make_shared<IndexSlot>();
    std::call_once(slot_->once, [this] { slot_->index = std::make_unique<SiteIndex>(sites_); });
    return *slot_->index;
}

std::span<const TimeIndex> LatticePath::visits(const LatticePoint& p) const { return index().lookup(p); }

std::size_t LatticePath::distinct_sites() const { return index().distinct(); }

LatticePath LatticePath::slice(TimeIndex from, TimeIndex to) const {
    require(0 <= from && from <= to && to < TimeIndex(sites_.size()), ErrorCode::invalid_argument, "slice out of range");
    return LatticePath(dim_, std::vector<LatticePoint>(sites_.begin() + from, sites_.begin() + to + 1));
}

namespace {

TimeIndex default_budget(const StopCondition& c) {
    if (auto* e = std::get_if<ExitDisc>(&c)) return 64 * std::max<std::int64_t>(e->radius, 1) * std::max<std::int64_t>(e->radius, 1);
    if (auto* b = std::get_if<ExitBox>(&c)) return 64 * std::max<std::int64_t>(b->half_width, 1) * std::max<std::int64_t>(b->half_width, 1);
    return 0;
}

}  // namespace

LatticePath sample_walk(int dim, const LatticePoint& start, const StopRule& stop, RngStream& rng) {
    require(dim == 2 || dim == 3, ErrorCode::invalid_argument, "dimension must be 2 or 3");
    require(dim == 3 || start.z == 0, ErrorCode::invalid_argument, "planar start with nonzero z");
    std::vector<LatticePoint> sites{start};
    LatticePoint p = start;
    TimeIndex budget = stop.budget > 0 ? stop.budget : default_budget(stop.condition);

    if (auto* f = std::get_if<FixedLength>(&stop.condition)) {
        require(f->steps >= 0, ErrorCode::invalid_argument, "negative walk length");
        sites.reserve(std::size_t(f->steps) + 1);
        for (TimeIndex t = 0; t < f->steps; ++t) {
            p = step(p, rng.direction(dim));
            sites.push_back(p);
        }
        return LatticePath(dim, std::move(sites));
    }
    require(budget > 0, ErrorCode::invalid_argument, "hit-set stop rule needs an explicit step budget");

    auto run = [&](auto&& done) {
        while (!done(p)) {
            if (TimeIndex(sites.size()) > budget)
                fail(ErrorCode::budget_exceeded, "walk exceeded step budget of " + std::to_string(budget));
            p = step(p, rng.direction(dim));
            sites.push_back(p);
        }
    };
    if (auto* e = std::get_if<ExitDisc>(&stop.condition)) {
        const std::int64_t m = 4 * e->radius * e->radius;
        const Center2 c = e->center;
        sites.reserve(std::size_t(std::min<std::int64_t>(budget, 2 * e->radius * e->radius + 64)));
        // the walk needs at least (R - |p - c|) steps to exit, so check only then
        while (sq_dist2(p, c) < m) {
            const double gap = double(e->radius) - std::sqrt(double(sq_dist2(p, c))) / 2.0;
            TimeIndex free_steps = std::max<TimeIndex>(1, TimeIndex(gap) - 1);
            free_steps = std::min(free_steps, budget + 1 - TimeIndex(sites.size()));
            if (free_steps <= 0) fail(ErrorCode::budget_exceeded, "walk exceeded step budget of " + std::to_string(budget));
            for (TimeIndex k = 0; k < free_steps; ++k) {
                p = step(p, rng.direction(dim));
                sites.push_back(p);
            }
        }
    } else if (auto* b = std::get_if<ExitBox>(&stop.condition)) {
        const std::int64_t h = b->half_width;
        run([&](const LatticePoint& q) {
            return std::abs(std::int64_t(q.x)) >= h || std::abs(std::int64_t(q.y)) >= h || (dim == 3 && std::abs(std::int64_t(q.z)) >= h);
        });
    } else {
        const auto& target = std::get<HitSet>(stop.condition).target;
        require(!target.empty(), ErrorCode::invalid_argument, "empty hit-set target");
        run([&](const LatticePoint& q) { return target.count(q) > 0; });
    }
    return LatticePath(dim, std::move(sites));
}

std::optional<TimeIndex> hitting_time(const LatticePath& path, const SiteSet& target, TimeIndex from) {
    require(from >= 0 && from <= TimeIndex(path.size()), ErrorCode::invalid_argument, "start time beyond path");
    for (TimeIndex t = from; t < TimeIndex(path.size()); ++t)
        if (target.count(path[t])) return t;
    return std::nullopt;
}

std::optional<TimeIndex> last_hitting_time(const LatticePath& path, const SiteSet& target, TimeIndex before) {
    require(before >= 0 && before <= TimeIndex(path.size()), ErrorCode::invalid_argument, "end time beyond path");
    for (TimeIndex t = before - 1; t >= 0; --t)
        if (target.count(path[t])) return t;
    return std::nullopt;
}

std::optional<TimeIndex> hitting_time_chain(const LatticePath& path, const std::vector<SiteSet>& targets, TimeIndex from) {
    std::optional<TimeIndex> t = from;
    bool first = true;
    for (const auto& a : targets) {
        TimeIndex start = first ? *t : *t + 1;
        if (start > TimeIndex(path.size())) return std::nullopt;
        t = hitting_time(path, a, start);
        if (!t) return std::nullopt;
        first = false;
    }
    return t;
}

LatticePath reverse(const LatticePath& path) {
    std::vector<LatticePoint> s(path.sites().rbegin(), path.sites().rend());
    return LatticePath(path.dim(), std::move(s));
}

LatticePath sample_excursion(const Region& a, RngStream& rng) {
    require(a.kind == Region::Kind::annulus, ErrorCode::invalid_argument, "excursion needs an annulus");
    require(a.r1 >= 2, ErrorCode::invalid_argument, "excursion inner radius must be >= 2");
    require(a.r2 - a.r1 >= 2, ErrorCode::invalid_argument, "annulus thinner than 2 sites");
    LatticePoint start{std::int32_t(a.center.x2 >> 1), std::int32_t(a.center.y2 >> 1), std::int32_t(a.center.z2 >> 1)};
    if (a.dim == 2) start.z = 0;
    const std::int64_t reach = 4 * (a.r2 - 1) * (a.r2 - 1);
    std::vector<LatticePoint> sites{start};
    LatticePoint p = start;
    const TimeIndex budget = 64 * a.r2 * a.r2;
    while (sq_dist2(p, a.center) < reach) {
        if (TimeIndex(sites.size()) > budget) fail(ErrorCode::budget_exceeded, "excursion exceeded step budget");
        p = step(p, rng.direction(a.dim));
        sites.push_back(p);
    }
    TimeIndex t = TimeIndex(sites.size()) - 1;
    while (t > 0 && !in_band(sites[std::size_t(t)], a.center, a.r1)) --t;
    return LatticePath(a.dim, std::vector<LatticePoint>(sites.begin() + t, sites.end()));
}

namespace {
constexpr char kLetters[6] = {'E', 'N', 'W', 'S', 'U', 'D'};
}

unsigned direction_of(const LatticePoint& a, const LatticePoint& b) {
    for (unsigned d = 0; d < 6; ++d)
        if (step(a, d) == b) return d;
    fail(ErrorCode::invalid_argument, "not a unit step");
}

std::string step_letters(const LatticePath& path) {
    std::string s;
    s.reserve(path.size());
    for (std::size_t t = 1; t < path.size(); ++t) s.push_back(kLetters[direction_of(path[TimeIndex(t - 1)], path[TimeIndex(t)])]);
    return s;
}

LatticePath from_letters(int dim, const LatticePoint& start, const std::string& letters) {
    std::vector<LatticePoint> sites{start};
    sites.reserve(letters.size() + 1);
    LatticePoint p = start;
    for (char c : letters) {
        const char* hit = std::find(kLetters, kLetters + 6, c);
        require(hit != kLetters + 6, ErrorCode::invalid_argument, std::string("bad step letter '") + c + "'");
        unsigned d = unsigned(hit - kLetters);
        require(dim == 3 || d < 4, ErrorCode::invalid_argument, "vertical step in a planar path");
        p = step(p, d);
        sites.push_back(p);
    }
    return LatticePath(dim, std::move(sites));
}

std::string to_step_string(const LatticePath& path) {
    require(!path.empty(), ErrorCode::invalid_argument, "cannot serialize an empty path");
    std::ostringstream os;
    os << path.dim() << ' ' << to_string(path.front(), path.dim()) << ' ' << path.length() << '\n' << step_letters(path) << '\n';
    return os.str();
}

LatticePath from_step_string(const std::string& text) {
    std::istringstream is(text);
    int dim = 0;
    std::string start;
    TimeIndex len = -1;
    is >> dim >> start >> len;
    require(bool(is) && (dim == 2 || dim == 3) && len >= 0, ErrorCode::invalid_argument, "bad path header");
    LatticePoint p;
    std::istringstream cs(start);
    char comma = 0;
    cs >> p.x >> comma >> p.y;
    if (dim == 3) cs >> comma >> p.z;
    require(bool(cs), ErrorCode::invalid_argument, "bad path start");
    std::string letters;
    is >> letters;
    require(TimeIndex(letters.size()) == len, ErrorCode::invalid_argument, "path length does not match header");
    return from_letters(dim, p, letters);
}

}  // namespace pioneer
