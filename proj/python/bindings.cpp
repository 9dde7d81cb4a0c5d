#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "pioneer/detectors.hpp"
#include "pioneer/error.hpp"
#include "pioneer/experiments.hpp"
#include "pioneer/exponents.hpp"
#include "pioneer/loop_soup.hpp"
#include "pioneer/path.hpp"
#include "pioneer/rng.hpp"

namespace py = pybind11;
using namespace pioneer;

namespace {

using Sites = py::array_t<std::int32_t, py::array::c_style | py::array::forcecast>;

Sites to_array(const LatticePath& p) {
    Sites a({py::ssize_t(p.size()), py::ssize_t(2)});
    auto r = a.mutable_unchecked<2>();
    for (py::ssize_t t = 0; t < py::ssize_t(p.size()); ++t) {
        r(t, 0) = p[t].x;
        r(t, 1) = p[t].y;
    }
    return a;
}

LatticePath from_array(const Sites& a) {
    if (a.ndim() != 2 || a.shape(1) != 2) throw py::value_error("expected an (N, 2) integer array");
    auto r = a.unchecked<2>();
    std::vector<LatticePoint> s(std::size_t(a.shape(0)));
    for (py::ssize_t t = 0; t < a.shape(0); ++t) s[std::size_t(t)] = {r(t, 0), r(t, 1), 0};
    return LatticePath(2, std::move(s));
}

DetectorConfig config(const std::string& kind, int n, std::int64_t R, int K, double iota) {
    DetectorConfig c;
    c.kind = parse_detector_kind(kind);
    c.n = n;
    c.resolution = R;
    c.K = K;
    c.iota = iota;
    return c;
}

py::list boxes(const GoodBoxReport& r) {
    py::list out;
    for (const auto& g : r.boxes) out.append(py::make_tuple(g.box.n, g.box.idx[0], g.box.idx[1], g.stop));
    return out;
}

py::list curve_rows(const ProbabilityCurve& c) {
    py::list out;
    for (const auto& lv : c.levels) {
        py::dict d;
        d["j"] = lv.j;
        d["trials"] = lv.trials;
        d["successes"] = lv.successes;
        d["p"] = lv.p;
        d["stderr"] = lv.stderr_p;
        out.append(d);
    }
    return out;
}

EventParams event(const std::string& kind, int k, int l, int dim, double c) {
    EventParams p;
    p.kind = parse_event_kind(kind);
    p.k = k;
    p.l = l;
    p.dim = dim;
    p.c = c;
    p.validate();
    return p;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Good-box detectors, exponent estimators and experiment drivers for planar random walks.";

    py::register_exception<Error>(m, "PioneerError", PyExc_ValueError);

    m.def(
        "closed_form_exponent",
        [](const std::string& kind, double k, double lam, double c) {
            ExponentKind K = kind == "intersection"    ? ExponentKind::intersection
                             : kind == "disconnection" ? ExponentKind::disconnection
                             : kind == "generalized"   ? ExponentKind::generalized
                                                       : throw py::value_error("unknown exponent kind: " + kind);
            return closed_form_exponent(K, k, lam, c);
        },
        py::arg("kind"), py::arg("k"), py::arg("lam") = 0.0, py::arg("c") = 0.0);

    m.def(
        "sample_walk",
        [](std::int64_t R, std::uint64_t seed, std::uint64_t stream) {
            RngStream rng(seed, stream);
            return to_array(sample_walk(2, {}, StopRule::exit_disc(Center2{}, R), rng));
        },
        "walk from the origin until it leaves the disc of radius R; rows are (x, y)", py::arg("R"), py::arg("seed"),
        py::arg("stream") = 0);

    m.def(
        "good_boxes",
        [](const Sites& path, const std::string& kind, int n, std::int64_t R, int K, double iota) {
            const DetectorConfig c = config(kind, n, R, K, iota);
            const LatticePath p = from_array(path);
            py::gil_scoped_release nogil;
            GoodBoxReport r = c.kind == DetectorKind::pdcp ? good_boxes_pdcp(p, c) : good_boxes_ptp(p, c);
            py::gil_scoped_acquire gil;
            return boxes(r);
        },
        "good boxes (n, i, j, stop) of one path", py::arg("path"), py::arg("kind") = "ptp", py::arg("n") = 8, py::arg("R") = 1024,
        py::arg("K") = 4, py::arg("iota") = 0.25);

    m.def(
        "has_macroscopic_ptp",
        [](const Sites& path, TimeIndex N, double delta) { return has_macroscopic_ptp(from_array(path), N, delta); },
        py::arg("path"), py::arg("N"), py::arg("delta"));

    m.def(
        "estimate_crossing_prob",
        [](const std::string& kind, int k, int l, int dim, double c, int j0, int j1, std::uint64_t trials, std::uint64_t seed) {
            return curve_rows(estimate_crossing_prob(event(kind, k, l, dim, c), j0, j1, trials, seed));
        },
        py::arg("kind"), py::arg("k") = 1, py::arg("l") = 0, py::arg("dim") = 2, py::arg("c") = 0.0, py::arg("j0") = 3,
        py::arg("j1") = 8, py::arg("trials") = 1000, py::arg("seed") = 0);

    m.def(
        "estimate_exponent",
        [](const std::string& kind, int k, int l, int dim, double c, int j0, int j1, std::uint64_t size, std::uint64_t seed,
           bool split) {
            EventParams p = event(kind, k, l, dim, c);
            ProbabilityCurve cv = split ? split_estimate(p, j0, j1, size, seed) : estimate_crossing_prob(p, j0, j1, size, seed);
            ExponentEstimate e = fit_exponent(cv);
            return py::make_tuple(e.slope, e.stderr_slope);
        },
        "fitted slope and its standard error (default fit range)", py::arg("kind"), py::arg("k") = 1, py::arg("l") = 0,
        py::arg("dim") = 2, py::arg("c") = 0.0, py::arg("j0") = 3, py::arg("j1") = 8, py::arg("size") = 1000, py::arg("seed") = 0,
        py::arg("split") = false);

    m.def(
        "sample_loop_soup",
        [](std::int64_t R, double c, std::int64_t cutoff, std::uint64_t seed, std::int64_t max_length) {
            RngStream rng(seed, 0);
            LoopSoup s = sample_loop_soup(Region::disc(2, Center2{}, R), c, cutoff, rng, max_length);
            py::list out;
            for (const auto& l : s.loops) out.append(to_array(l.path()));
            return out;
        },
        py::arg("R"), py::arg("c"), py::arg("cutoff") = 0, py::arg("seed") = 0, py::arg("max_length") = 0);

    m.def(
        "run_experiment",
        [](const std::string& name, const std::string& kind, std::int64_t R, int n_lo, int n_hi, std::uint64_t trials,
           std::uint64_t seed, double delta, int log2N_lo, int log2N_hi) {
            ExperimentSpec s;
            s.name = name;
            s.detector.kind = parse_detector_kind(kind);
            s.detector.resolution = R;
            s.n_lo = n_lo;
            s.n_hi = n_hi;
            s.trials = trials;
            s.seed = seed;
            s.delta = delta;
            s.log2N_lo = log2N_lo;
            s.log2N_hi = log2N_hi;
            ExperimentRecord rec;
            {
                py::gil_scoped_release nogil;
                rec = run_experiment(s);
            }
            py::list out;
            for (const auto& r : summarize(rec)) {
                py::dict d;
                d["scale"] = r.scale;
                d["trials"] = r.trials;
                d["estimate"] = r.estimate;
                d["stderr"] = r.stderr_est;
                for (const auto& [k, v] : r.extra) d[py::str(k)] = v;
                out.append(d);
            }
            return out;
        },
        "summary rows of one experiment run", py::arg("name"), py::arg("kind") = "ptp", py::arg("R") = 1024, py::arg("n_lo") = 8,
        py::arg("n_hi") = 8, py::arg("trials") = 1, py::arg("seed") = 0, py::arg("delta") = 0.05, py::arg("log2N_lo") = 10,
        py::arg("log2N_hi") = 16);
}
