import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import THREE, make_toy
from tractforge.errors import InvalidGeometry, NotInTract
from tractforge.tract import (ToyTract, alpha_path, gate_integral_closed_form, gate_integral_quadrature, gate_mu,
                              polyline_length, region_classify, toy_tract_build)

PI = math.pi


def shoelace(v):
    return 0.5 * float(np.sum((np.conj(v) * np.roll(v, -1)).imag))


def test_two_wiggle_example():
    t = toy_tract_build([{"r": 6, "R": 20, "eps": 0.5}, {"r": 22, "R": 36, "eps": 0.25}], 2.0, 40.0)
    assert t.wiggles[0].tau == 12.0
    assert t.band(0) == (10.0, 14.0)
    assert t.wiggles[1].gate_halfwidth == pytest.approx(PI / 12)


@pytest.mark.parametrize("walls,eps", [([], []), (THREE, [0.2, 0.15, 0.25]), (THREE, [1.0, 0.5, 1.0])])
def test_polygon_area_and_turning(walls, eps):
    t = make_toy(walls, eps)
    v = t.vertices()
    # slits enclose no area: the polygon has the area of the closed strip
    assert shoelace(v) == pytest.approx((t.x_close - t.x_left) * 2 * PI, rel=1e-12)
    _, ea, _, eb = t.arcs()
    assert float(np.sum(ea) + np.sum(eb)) == pytest.approx(-2.0)


def test_degenerate_gate_has_no_slit():
    closed = make_toy([(10, 20)], [0.5])
    open_ = make_toy([(10, 20)], [1.0])
    assert len(closed.segments()) == len(open_.segments()) + 2
    assert not open_.wiggles[0].has_gate


def test_zero_wiggles_trusted_region():
    t = toy_tract_build([], 0.5, 40.0)
    assert t.trusted_xmax() == 24.0
    assert len(t.segments()) == 4


@pytest.mark.parametrize("params,nu0,x_close", [
    ([{"r": 5.0, "R": 12, "eps": 0.5}], 0.5, 20),
    ([{"r": 8, "R": 16, "eps": 0.0}], 0.5, 20),
    ([{"r": 8, "R": 16, "eps": 1.5}], 0.5, 20),
    ([{"r": 8, "R": 16, "eps": 0.5}], 0.5, 16.5),
    ([{"r": 8, "R": 14, "eps": 0.5}], 1.5, 20),
    ([{"r": 8, "R": 16, "eps": 0.5}, {"r": 16.5, "R": 26, "eps": 0.5}], 0.5, 30),
    ([{"r": 8, "R": 16, "eps": 0.5}], -1.0, 20),
])
def test_invalid_geometry(params, nu0, x_close):
    with pytest.raises(InvalidGeometry):
        toy_tract_build(params, nu0, x_close)


def test_json_round_trip(three_tract):
    data = json.loads(three_tract.dumps())
    again = ToyTract.from_json(data)
    assert again == three_tract
    assert len(data["vertices"]) == len(three_tract.vertices())
    assert data["anchors"]["gate_centers"][0] == [three_tract.wiggles[0].tau, 2 * PI / 3]


# ------------------------------------------------------------------ regions
def test_region_examples(one_tract):
    w = one_tract.wiggles[0]
    tag = region_classify(one_tract, 5.0, 0)
    assert (tag.region, tag.delta, tag.name) == ("X", -1.0, "X_0")
    mid = region_classify(one_tract, complex(w.tau, 0.0), 0)
    assert mid.region == "Y" and mid.delta == pytest.approx(0.0)
    assert mid.w_part == "W+"
    assert region_classify(one_tract, complex(w.R + 1, 0), 0).region == "Z"
    assert region_classify(one_tract, complex(w.r + 3, -2.5), 0).w_part == "W-"
    assert region_classify(one_tract, w.gate_center, 0).in_gate
    with pytest.raises(NotInTract):
        region_classify(one_tract, complex(w.r, 0.0), 0)
    with pytest.raises(NotInTract):
        region_classify(one_tract, complex(12.0, 4.0), 0)


def test_region_partition_grid(three_tract):
    xs = np.linspace(three_tract.x_left, three_tract.x_close, 100)
    ys = np.linspace(-PI, PI, 100)
    counts = {"X": 0, "Y": 0, "Z": 0}
    for j in range(3):
        lo, hi = three_tract.band(j)
        for x in xs:
            for y in ys:
                z = complex(x, y)
                if not three_tract.contains(z):
                    continue
                tag = region_classify(three_tract, z, j)
                counts[tag.region] += 1
                assert -1.0 <= tag.delta <= 1.0
                assert (tag.region == "Y") == (lo <= x <= hi and abs(y) < PI / 3
                                               and three_tract.wiggles[j].r < x)
                if tag.region == "X":
                    assert tag.delta == -1.0
                if tag.region == "Z":
                    assert tag.delta == 1.0
    assert all(counts.values())


@settings(max_examples=200, deadline=None)
@given(st.floats(0.0, 1.0), st.floats(-0.99, 0.99))
def test_delta_continuous_along_middle_corridor(s, yf):
    t = make_toy([(10, 20)], [0.5], nu0=1.0)
    lo, hi = t.band(0)
    y = yf * PI / 3
    x = lo + s * (hi - lo)
    tag = region_classify(t, complex(x, y), 0)
    assert tag.delta == pytest.approx(1 - 2 * s, abs=1e-12)
    # just outside the band the constant value matches the band edge
    assert region_classify(t, complex(hi + 1e-9, y), 0).delta == -1.0
    assert region_classify(t, complex(lo - 1e-9, y), 0).delta == 1.0


# --------------------------------------------------------------- alpha path
def test_gate_integral_value_four():
    assert gate_integral_closed_form(3 / (PI * math.e)) == pytest.approx(4.0, rel=1e-15)


@pytest.mark.parametrize("eps", [0.3, 0.1, 0.01, 1e-4])
def test_gate_integral_quadrature_agrees(eps):
    assert gate_integral_quadrature(12.0, eps) == pytest.approx(gate_integral_closed_form(eps), rel=1e-12)


def test_gate_mu_floor():
    assert gate_mu(12.0, 12.0, 0.3) == pytest.approx(0.1 * PI)
    assert gate_mu(13.0, 12.0, 0.3) == 1.0


def test_alpha_path_inside(three_tract):
    a = alpha_path(three_tract)
    pts = a.polyline
    assert pts[0] == 5.0
    assert all(three_tract.contains(p) for p in pts)
    assert all(three_tract.segment_visible(p, q) for p, q in zip(pts[:-1], pts[1:]))


def test_alpha_split_lengths(three_tract):
    a = alpha_path(three_tract)
    assert len(a.alpha0) == 3
    assert all(abs(q - p) == pytest.approx(2.0) for p, q in a.alpha0)
    for (p, q), w in zip(a.alpha0, three_tract.wiggles):
        assert (p.real + q.real) / 2 == pytest.approx(w.tau)
    # alpha^1 plus the three gate pieces rebuilds the whole path
    assert a.alpha1_length + 6.0 == pytest.approx(a.length, rel=1e-14)
    total = sum(polyline_length(piece) for piece in a.alpha1)
    assert total == pytest.approx(a.alpha1_length)
    assert a.gate_integrals == [gate_integral_closed_form(e) for e in (0.2, 0.15, 0.25)]
