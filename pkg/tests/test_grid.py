"""Grid construction, stencil exactness, and the discrete divergence theorem."""

import numpy as np
import pytest

from dnlab.grid import (CORNER, GridError, assemble_operator, build_rectangle,
                        discrete_flux, laplacian_interior)


def test_build_validation():
    with pytest.raises(GridError):
        build_rectangle(2, 5)
    with pytest.raises(GridError):
        build_rectangle(5, 2)
    with pytest.raises(GridError):
        build_rectangle(5, 5, lx=-1.0)
    with pytest.raises(GridError):
        build_rectangle(5, 5, ly=0.0)


def test_node_partition_counts():
    g = build_rectangle(7, 9, 2.0, 3.0)
    assert g.n_interior == 5 * 7
    assert g.n_boundary == 2 * 7 + 2 * 9 - 4
    assert g.n_interior + g.n_boundary == g.n_nodes
    # interior/boundary position maps are mutually exclusive and complete
    assert np.all((g.interior_pos >= 0) ^ (g.boundary_pos >= 0))
    # exactly four corners
    assert np.sum(g.boundary_side == CORNER) == 4


def test_spacings_anisotropic():
    g = build_rectangle(5, 11, 2.0, 1.0)
    assert g.hx == pytest.approx(0.5)
    assert g.hy == pytest.approx(0.1)


def test_stencil_exact_on_low_degree_polynomials():
    # 5-point stencil reproduces the Laplacian exactly on degree <= 2
    g = build_rectangle(9, 13, 1.5, 0.7)
    x, y = g.coords()
    for u, lap in ((np.ones(g.n_nodes), 0.0),
                   (x, 0.0),
                   (x**2 + y**2, 4.0),
                   (x * y, 0.0),
                   (3 * x**2 - 2 * y**2 + x - 5, 2.0)):
        got = laplacian_interior(g, u)
        assert np.max(np.abs(got - lap)) < 1e-10


def test_divergence_theorem_exact_on_random_fields():
    rng = np.random.default_rng(3)
    for nx, ny, lx, ly in ((5, 5, 1.0, 1.0), (12, 7, 2.0, 0.5), (33, 33, 1.0, 1.0)):
        g = build_rectangle(nx, ny, lx, ly)
        u = rng.normal(size=g.n_nodes)
        flux = discrete_flux(g, u)
        vol = np.sum(laplacian_interior(g, u)) * g.hx * g.hy
        scale = np.max(np.abs(u)) / min(g.hx, g.hy) ** 2
        assert abs(flux - vol) <= 1e-12 * scale


def test_flux_examples():
    g = build_rectangle(17, 17)
    x, _ = g.coords()
    assert discrete_flux(g, np.full(g.n_nodes, 3.7)) == 0.0
    # u = x: left faces -1, right faces +1, exact cancellation
    assert discrete_flux(g, x) == pytest.approx(0.0, abs=1e-13)


def test_flux_of_poisson_solution_matches_load():
    # -lap_h u = f with zero data  =>  flux(u) = -sum f hx hy exactly
    from dnlab.elliptic import solve_linear
    g = build_rectangle(21, 17, 1.0, 2.0)
    rng = np.random.default_rng(0)
    f = rng.normal(size=g.n_nodes)
    u = solve_linear(g, 0.0, 0.0, f)
    target = -np.sum(f[g.interior]) * g.hx * g.hy
    assert discrete_flux(g, u) == pytest.approx(target, abs=1e-10)


def test_operator_apply_matches_laplacian():
    g = build_rectangle(9, 9)
    rng = np.random.default_rng(1)
    u = rng.normal(size=g.n_nodes)
    q = rng.uniform(0.5, 2.0, g.n_nodes)
    op = assemble_operator(g, q)
    expected = -laplacian_interior(g, u) + q[g.interior] * u[g.interior]
    assert np.max(np.abs(op.apply(u) - expected)) < 1e-11


def test_boundary_arclength_orders_perimeter():
    g = build_rectangle(6, 8, 2.0, 3.0)
    s = g.boundary_arclength()
    assert s.min() == 0.0
    assert s.max() < 2 * (g.lx + g.ly)
    # all perimeter coordinates distinct
    assert np.unique(s).size == g.n_boundary


def test_quad_weights_sum_to_area():
    g = build_rectangle(7, 11, 2.0, 0.5)
    assert np.sum(g.quad_weights()) == pytest.approx(1.0)


def test_field_shape_validation():
    g = build_rectangle(5, 5)
    with pytest.raises(GridError):
        g.check_field(np.zeros(7))
    with pytest.raises(GridError):
        g.boundary_field(np.zeros(3))
