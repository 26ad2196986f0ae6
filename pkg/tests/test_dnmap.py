"""DN trace evaluation and trace distances."""

import numpy as np
import pytest

from dnlab.boundarydata import constant_data, random_trig_data, trig_data
from dnlab.dnmap import dn_distance, dn_map
from dnlab.grid import (GridError, LEFT, RIGHT, BOTTOM, TOP, build_rectangle,
                        discrete_flux)


def test_trace_exact_on_linear_field():
    g = build_rectangle(17, 17)
    x, _ = g.coords()
    tr = dn_map(g, x)
    side = g.boundary_side[g.noncorner_slots()]
    assert np.max(np.abs(tr.values[side == LEFT] + 1.0)) < 1e-13
    assert np.max(np.abs(tr.values[side == RIGHT] - 1.0)) < 1e-13
    assert np.max(np.abs(tr.values[(side == BOTTOM) | (side == TOP)])) < 1e-13


def test_trace_exact_on_quadratic_field():
    # the second-order one-sided formula is exact on quadratics
    g = build_rectangle(13, 11, 1.0, 2.0)
    x, y = g.coords()
    tr = dn_map(g, x**2 + 3 * y**2)
    side = g.boundary_side[g.noncorner_slots()]
    nx_, ny_ = tr.nodes() % g.nx, tr.nodes() // g.nx
    expected = np.empty_like(tr.values)
    expected[side == LEFT] = 0.0
    expected[side == RIGHT] = 2.0 * g.lx
    expected[side == BOTTOM] = 0.0
    expected[side == TOP] = 6.0 * g.ly
    assert np.max(np.abs(tr.values - expected)) < 1e-11


def test_trace_second_order_on_harmonic_oracle():
    # u = sin(pi x) sinh(pi y) / sinh(pi): dn on top edge = pi sin(pi x) cosh(pi)/sinh(pi)
    errs = []
    for n in (17, 33):
        g = build_rectangle(n, n)
        x, y = g.coords()
        u = np.sin(np.pi * x) * np.sinh(np.pi * y) / np.sinh(np.pi)
        tr = dn_map(g, u)
        side = g.boundary_side[g.noncorner_slots()]
        top = side == TOP
        xs = tr.nodes()[top] % g.nx * g.hx
        exact = np.pi * np.sin(np.pi * xs) * np.cosh(np.pi) / np.sinh(np.pi)
        errs.append(np.max(np.abs(tr.values[top] - exact)))
    assert np.log2(errs[0] / errs[1]) > 1.8


def test_flux_consistency_with_trace_quadrature():
    # sum of dn values weighted by face measures tracks discrete_flux to O(h^2)
    g = build_rectangle(65, 65)
    x, y = g.coords()
    u = np.exp(x) * np.cos(y)
    tr = dn_map(g, u)
    quad = float(np.sum(tr.values * tr.face_measures()))
    assert quad == pytest.approx(discrete_flux(g, u), abs=5e-3)


def test_distance_metric_properties():
    g = build_rectangle(9, 9)
    rng = np.random.default_rng(5)
    tr = [dn_map(g, rng.normal(size=g.n_nodes)) for _ in range(3)]
    a, b, c = tr
    assert dn_distance(a, a) == 0.0
    assert dn_distance(a, b) == dn_distance(b, a)
    assert dn_distance(a, c) <= dn_distance(a, b) + dn_distance(b, c) + 1e-14
    assert dn_distance(a, b, "l2") > 0.0
    with pytest.raises(ValueError):
        dn_distance(a, b, "l7")


def test_distance_constant_offset():
    g = build_rectangle(9, 9)
    u = np.zeros(g.n_nodes)
    t0 = dn_map(g, u)
    x, _ = g.coords()
    t1 = dn_map(g, 2.0 * x)  # constant +/-2 on left/right, 0 elsewhere
    assert dn_distance(t0, t1) == pytest.approx(2.0)


def test_grid_mismatch_rejected():
    t1 = dn_map(build_rectangle(9, 9), np.zeros(81))
    t2 = dn_map(build_rectangle(11, 9), np.zeros(99))
    with pytest.raises(GridError):
        dn_distance(t1, t2)


def test_trace_csv_shape():
    g = build_rectangle(7, 7)
    tr = dn_map(g, np.zeros(g.n_nodes))
    lines = tr.to_csv().strip().split("\n")
    assert lines[0] == "x,y,f,dn"
    assert len(lines) == 1 + g.noncorner_slots().size


def test_boundary_data_generators():
    g = build_rectangle(17, 13, 1.0, 2.0)
    assert np.all(constant_data(g, 2.0) == 2.0)
    f = trig_data(g, [1.0], [0.5])
    assert f.shape == (g.n_boundary,)
    rng = np.random.default_rng(0)
    fr = random_trig_data(g, rng, 3.0)
    assert np.max(np.abs(fr)) == pytest.approx(3.0)
    # deterministic under the same seed
    fr2 = random_trig_data(g, np.random.default_rng(0), 3.0)
    assert np.array_equal(fr, fr2)
