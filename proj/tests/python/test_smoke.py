import math

import numpy as np
import pytest

import pioneer


def test_closed_forms():
    assert pioneer.closed_form_exponent("disconnection", 1) == pytest.approx(0.25, abs=1e-12)
    assert pioneer.closed_form_exponent("intersection", 1, 1) == pytest.approx(1.25, abs=1e-12)
    assert pioneer.closed_form_exponent("generalized", 4, 0, 1) == pytest.approx(2.0, abs=1e-12)
    with pytest.raises(pioneer.PioneerError):
        pioneer.closed_form_exponent("generalized", 2, 0, 1.5)
    with pytest.raises(ValueError):
        pioneer.closed_form_exponent("nope", 1)


def test_walk_and_good_boxes():
    w = pioneer.sample_walk(256, seed=3)
    assert w.shape[1] == 2
    assert (w[0] == 0).all()
    assert np.abs(np.diff(w, axis=0)).sum(axis=1).max() == 1
    assert math.hypot(*w[-1]) >= 256
    assert (pioneer.sample_walk(256, seed=3) == w).all()
    boxes = pioneer.good_boxes(w, "ptp", n=8, R=256)
    assert boxes == sorted(boxes)
    for n, i, j, stop in boxes:
        assert n == 8
        assert 0 < stop < len(w)
    pioneer.good_boxes(w, "pdcp", n=8, R=256)
    with pytest.raises(pioneer.PioneerError):
        pioneer.good_boxes(w, "ptp", n=8, R=300)


def test_corridor_is_a_pioneer_triple_point():
    # E40 W40 E40 W40 from (128, 0) on the 256 lattice
    steps = [(1, 0)] * 40 + [(-1, 0)] * 40 + [(1, 0)] * 40 + [(-1, 0)] * 40
    path = np.cumsum([(128, 0)] + steps, axis=0)
    boxes = pioneer.good_boxes(path, "ptp", n=8, R=256)
    assert (8, 128, 0) in [b[:3] for b in boxes]


def test_macroscopic_ptp():
    clover = "EEEEEWWWWWNNNNNSSSSSWWWWWEEEEESSSSSNNNNN"
    d = {"E": (1, 0), "W": (-1, 0), "N": (0, 1), "S": (0, -1)}
    path = np.cumsum([(0, 0)] + [d[c] for c in clover], axis=0)
    assert pioneer.has_macroscopic_ptp(path, 40, 0.25)
    assert not pioneer.has_macroscopic_ptp(path, 40, 0.5)


def test_exponent_and_experiment():
    rows = pioneer.estimate_crossing_prob("disconnection", k=1, j0=3, j1=6, trials=200, seed=1)
    assert [r["j"] for r in rows] == [3, 4, 5, 6]
    assert all(a["p"] >= b["p"] for a, b in zip(rows, rows[1:]))
    slope, se = pioneer.estimate_exponent("nonintersection", k=1, l=1, j0=3, j1=7, size=300, seed=2, split=True)
    assert 0.5 < slope < 2.0 and se > 0
    out = pioneer.run_experiment("existence-decay", R=512, n_lo=8, n_hi=9, trials=4, seed=7)
    assert [r["scale"] for r in out] == [8, 9]
    assert out[1]["estimate"] <= out[0]["estimate"]
    assert all(r["monotone_violations"] == 0 for r in out)


def test_loop_soup():
    loops = pioneer.sample_loop_soup(16, 1.0, cutoff=2, seed=2)
    assert len(loops) > 0
    for l in loops:
        assert (l[0] == l[-1]).all()
        assert (np.hypot(l[:, 0], l[:, 1]) < 16).all()
