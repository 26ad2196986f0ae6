"""Higher-order linearization probes of the DN map.

Covers the cascade boundary-value problems generated by amplitude expansion
of constant boundary data, the integral identities they force, second-order
linearization with two data directions, the linear-vs-semilinear rigidity
probe, and the attainable-value envelope estimate.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .boundarydata import constant_data, random_trig_data
from .dnmap import dn_map
from .elliptic import NewtonOptions, solve_linear, solve_semilinear
from .grid import Grid, discrete_flux, LEFT, RIGHT, BOTTOM, TOP
from .nonlinearity import Nonlinearity, check_monotone
from .radial import ball_bound


class LinearizeError(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# cascade boundary-value problems

@dataclass
class CascadeSolution:
    m: int
    v: dict                      # order k -> full field with zero boundary data
    w: np.ndarray
    q: np.ndarray                # spatial coefficient sampled on the grid
    f_derivs: list               # F^(k)(0) by order (separated case)
    grid: Grid
    even: bool = False
    a_coeffs: Optional[dict] = None   # even case: power 2k -> coefficient field


def cascade_solve(grid: Grid, q, f_derivs, m: int) -> CascadeSolution:
    """Solve the cascade for a(x, mu) = q(x) F(mu) with F(0) = F'(0) = 0.

    v_k solves -lap v_k = -q F^(k)(0) / k! with zero data, k = m .. 2m-2;
    w picks up the first nonlinear interaction at order 2m-1.
    """
    if m < 2:
        raise LinearizeError("cascade order m must be >= 2")
    f_derivs = [float(c) for c in f_derivs]
    if len(f_derivs) < 2 * m:
        f_derivs = f_derivs + [0.0] * (2 * m - len(f_derivs))
    if f_derivs[m] == 0.0:
        raise LinearizeError("F^(m)(0) must be nonzero")
    q = grid.full_field(q)
    fact = [1.0]
    for k in range(1, 2 * m):
        fact.append(fact[-1] * k)
    v = {}
    for k in range(m, 2 * m - 1):
        v[k] = solve_linear(grid, 0.0, 0.0, -q * f_derivs[k] / fact[k])
    w_src = -(q * f_derivs[2 * m - 1] / fact[2 * m - 1]
              + f_derivs[m] / fact[m - 1] * q * v[m])
    w = solve_linear(grid, 0.0, 0.0, w_src)
    return CascadeSolution(m, v, w, q, f_derivs, grid)


def cascade_solve_even(grid: Grid, a_coeffs: dict, m: int) -> CascadeSolution:
    """Even-power cascade: a(x, mu) = sum_{k>=m} a_2k(x) mu^(2k).

    v_2k solves -lap v_2k = -a_2k with zero data for 2k = 2m .. 4m-2;
    w solves -lap w = -2m a_2m v_2m.
    """
    if m < 1:
        raise LinearizeError("even cascade order m must be >= 1")
    coeffs = {int(p): grid.full_field(c) for p, c in a_coeffs.items()}
    if 2 * m not in coeffs:
        raise LinearizeError(f"leading coefficient a_{2*m} missing")
    v = {}
    for p in range(2 * m, 4 * m - 1, 2):
        src = coeffs.get(p)
        v[p] = solve_linear(grid, 0.0, 0.0,
                            -src if src is not None else np.zeros(grid.n_nodes))
    w = solve_linear(grid, 0.0, 0.0, -2.0 * m * coeffs[2 * m] * v[2 * m])
    return CascadeSolution(m, v, w, coeffs[2 * m], [], grid, even=True,
                           a_coeffs=coeffs)


def gradient_energy(grid: Grid, u: np.ndarray) -> float:
    """Forward-difference sum of |grad_h u|^2 hx hy over all cell edges."""
    u2 = grid.check_field(u).reshape(grid.ny, grid.nx)
    gx = np.diff(u2, axis=1) / grid.hx
    gy = np.diff(u2, axis=0) / grid.hy
    return float((np.sum(gx**2) + np.sum(gy**2)) * grid.hx * grid.hy)


@dataclass
class IdentityEntry:
    name: str
    quadrature: float     # trapezoid-consistent grid quadrature of the left side
    flux_value: float     # the same quantity recovered from boundary flux
    residual: float


@dataclass
class IdentityReport:
    entries: list
    gradient_vm: float
    max_abs_q: float

    def entry(self, name: str) -> IdentityEntry:
        for e in self.entries:
            if e.name == name:
                return e
        raise KeyError(name)


def check_integral_identities(grid: Grid, sol: CascadeSolution) -> IdentityReport:
    """Evaluate the cascade integral identities two ways.

    Each identity's left side is computed by grid quadrature and, exactly at
    the discrete level, from the boundary flux of the cascade fields via the
    discrete divergence theorem.
    """
    w_quad = grid.quad_weights()
    cell = grid.hx * grid.hy
    entries = []
    if not sol.even:
        m = sol.m
        fm = sol.f_derivs[m]
        fact_m = float(np.prod(np.arange(1, m + 1)))
        fact_2m1 = float(np.prod(np.arange(1, 2 * m)))
        # int q dV = 0: flux of v_m equals int q F^(m)(0)/m! dV exactly
        q_trap = float(np.sum(w_quad * sol.q))
        q_flux = discrete_flux(grid, sol.v[m]) * fact_m / fm
        entries.append(IdentityEntry("mean-q", q_trap, q_flux,
                                     abs(q_trap - q_flux)))
        # int q v_m dV = 0 via the flux of w
        qvm_trap = float(np.sum(w_quad * sol.q * sol.v[m]))
        lead = float(np.sum(sol.q[grid.interior] * cell)) * sol.f_derivs[2 * m - 1] / fact_2m1
        qvm_flux = (discrete_flux(grid, sol.w) - lead) * (fact_m / m) / fm
        entries.append(IdentityEntry("q-times-vm", qvm_trap, qvm_flux,
                                     abs(qvm_trap - qvm_flux)))
        grad = gradient_energy(grid, sol.v[m])
        max_q = float(np.max(np.abs(sol.q)))
    else:
        p = 2 * sol.m
        a2m = sol.a_coeffs[p]
        av_trap = float(np.sum(w_quad * a2m * sol.v[p]))
        av_flux = discrete_flux(grid, sol.w) / (2.0 * sol.m)
        entries.append(IdentityEntry("a2m-times-v2m", av_trap, av_flux,
                                     abs(av_trap - av_flux)))
        grad = gradient_energy(grid, sol.v[p])
        max_q = float(np.max(np.abs(a2m)))
    return IdentityReport(entries, grad, max_q)


# ---------------------------------------------------------------------------
# amplitude derivatives of the DN trace

def _fornberg_weights(nodes: np.ndarray, order: int) -> np.ndarray:
    """Finite-difference weights for the given derivative at 0 on `nodes`."""
    n = nodes.size
    c = np.zeros((n, order + 1))
    c[0, 0] = 1.0
    c1 = 1.0
    c4 = nodes[0]
    for i in range(1, n):
        mn = min(i, order)
        c2 = 1.0
        c5 = c4
        c4 = nodes[i]
        for j in range(i):
            c3 = nodes[i] - nodes[j]
            c2 *= c3
            for k in range(mn, 0, -1):
                c[i, k] = c1 * (k * c[i - 1, k - 1] - c5 * c[i - 1, k]) / c2
            c[i, 0] = -c1 * c5 * c[i - 1, 0] / c2
            for k in range(mn, 0, -1):
                c[j, k] = (c4 * c[j, k] - k * c[j, k - 1]) / c3
            c[j, 0] = c4 * c[j, 0] / c3
        c1 = c2
    return c[:, order]


def dn_amplitude_derivative(grid: Grid, a: Nonlinearity, k: int,
                            step: Optional[float] = None,
                            opts: NewtonOptions = NewtonOptions()) -> np.ndarray:
    """k-th Taylor coefficient of eps -> DN trace of the solution with f = eps.

    Central finite differences in the amplitude, normalized by k!; the zero
    amplitude contributes the zero trace since a(x, 0) = 0.
    """
    if k < 1 or k > 6:
        raise LinearizeError("supported derivative orders are 1..6")
    if step is None:
        step = 1e-2 / k
    p = (k + 1) // 2
    offsets = np.arange(-p, p + 1)
    weights = _fornberg_weights(offsets * step, k)
    n_trace = grid.noncorner_slots().size
    acc = np.zeros(n_trace)
    fact = float(np.prod(np.arange(1, k + 1)))
    for off, w in zip(offsets, weights):
        if off == 0 or w == 0.0:
            continue
        u, rep = solve_semilinear(grid, a, constant_data(grid, off * step), opts)
        if not rep.converged:
            raise LinearizeError(f"solver failed at amplitude {off * step}")
        acc += w * dn_map(grid, u).values
    return acc / fact


# ---------------------------------------------------------------------------
# second-order linearization

@dataclass
class SecondLinearizationReport:
    volume_integral: float      # int d2_a(x, u_t) v1 v2 v3 dV (interior sum)
    boundary_pairing: float     # int_bdy (dn v2nd) h3 dsigma via the dn trace
    pairing_exact: float        # first-order face pairing (exact discretely)
    mismatch: float             # |volume - boundary_pairing|
    v2_sup: float


def second_linearization(grid: Grid, a: Nonlinearity, h1, h2, t: float,
                         h3=1.0, opts: NewtonOptions = NewtonOptions()):
    """Second-order response around the constant-data solution at amplitude t.

    Solves the base field, two first-order linearizations with data h1, h2,
    the second-order field with zero data, and cross-checks the trilinear
    volume integral against the boundary pairing with a third solution.
    """
    h1 = grid.boundary_field(h1)
    h2 = grid.boundary_field(h2)
    h3 = grid.boundary_field(h3)
    base, rep = solve_semilinear(grid, a, constant_data(grid, t), opts)
    if not rep.converged:
        raise LinearizeError(f"base solve failed at amplitude {t}")
    x, y = grid.coords()
    d1f = a.d1(x, y, base)
    d2f = a.d2(x, y, base)
    v1 = solve_linear(grid, d1f, h1, 0.0)
    v2 = solve_linear(grid, d1f, h2, 0.0)
    v3 = solve_linear(grid, d1f, h3, 0.0)
    source = -d2f * v1 * v2
    v2nd = solve_linear(grid, d1f, 0.0, source)

    ii = grid.interior
    cell = grid.hx * grid.hy
    volume = float(np.sum(d2f[ii] * v1[ii] * v2[ii] * v3[ii]) * cell)

    trace = dn_map(grid, v2nd)
    slots = grid.noncorner_slots()
    h3_nc = h3[slots]
    pairing = float(np.sum(trace.values * h3_nc * trace.face_measures()))

    # first-order face pairing: exact by discrete summation by parts
    nodes = trace.nodes()
    side = grid.boundary_side[slots]
    exact = 0.0
    for code, offset, hn, ht in ((LEFT, 1, grid.hx, grid.hy),
                                 (RIGHT, -1, grid.hx, grid.hy),
                                 (BOTTOM, grid.nx, grid.hy, grid.hx),
                                 (TOP, -grid.nx, grid.hy, grid.hx)):
        mask = side == code
        b = nodes[mask]
        exact += float(np.sum((v2nd[b] - v2nd[b + offset]) / hn * h3_nc[mask]) * ht)

    report = SecondLinearizationReport(
        volume_integral=volume,
        boundary_pairing=pairing,
        pairing_exact=exact,
        mismatch=abs(volume - pairing),
        v2_sup=float(np.max(np.abs(v2nd))),
    )
    return v2nd, report


# ---------------------------------------------------------------------------
# rigidity probe

@dataclass
class RigidityRow:
    mu: float
    flux_mismatch: float        # discrete flux of y_mu = v_mu - w_mu
    volume_integral: float      # interior sum of a(x, v_mu) hx hy
    sup_a: float                # sup over nodes of |a(x, v_mu(x))|
    sign_constant: bool
    y_range: float              # max y_mu - min y_mu (constancy check)


@dataclass
class RigidityReport:
    rows: list
    recovered_range: tuple      # (-c mu_max, c mu_max) where a vanished
    min_v1: float               # observed min of v_mu / mu over positive mu

    def row(self, mu: float) -> RigidityRow:
        for r in self.rows:
            if r.mu == mu:
                return r
        raise KeyError(mu)


def rigidity_probe_t1(grid: Grid, a: Nonlinearity, f, mus,
                      opts: NewtonOptions = NewtonOptions(),
                      vanish_tol: float = 1e-8) -> RigidityReport:
    """Compare semilinear and harmonic solutions under scaled data mu f.

    Records the flux of the difference field (the discrete volume integral of
    a along the solution), the sign constancy of x -> a(x, v_mu(x)), and the
    constancy of the difference when the fluxes vanish.
    """
    f = grid.boundary_field(f)
    if float(np.min(f)) <= 0.0:
        raise LinearizeError("boundary data must have positive infimum")
    x, y = grid.coords()
    cell = grid.hx * grid.hy
    rows = []
    min_ratio = np.inf
    all_vanish = True
    for mu in mus:
        mu = float(mu)
        v, rep = solve_semilinear(grid, a, mu * f, opts)
        if not rep.converged:
            raise LinearizeError(f"semilinear solve failed at mu = {mu}")
        w = solve_linear(grid, 0.0, mu * f, 0.0)
        yf = v - w
        flux = discrete_flux(grid, yf)
        avals = a.eval(x, y, v)
        vol = float(np.sum(avals[grid.interior]) * cell)
        sup_a = float(np.max(np.abs(avals)))
        scale = max(1.0, float(np.max(np.abs(avals))))
        if mu >= 0:
            sign_ok = bool(np.all(avals >= -1e-10 * scale))
        else:
            sign_ok = bool(np.all(avals <= 1e-10 * scale))
        rows.append(RigidityRow(mu, flux, vol, sup_a, sign_ok,
                                float(np.max(yf) - np.min(yf))))
        if sup_a > vanish_tol:
            all_vanish = False
        if mu > 0:
            min_ratio = min(min_ratio, float(np.min(v)) / mu)
    mu_max = max(abs(float(m)) for m in mus)
    if all_vanish and np.isfinite(min_ratio):
        rng = (-min_ratio * mu_max, min_ratio * mu_max)
    elif all_vanish:
        rng = (-mu_max, mu_max)
    else:
        rng = (0.0, 0.0)
    return RigidityReport(rows, rng, min_ratio if np.isfinite(min_ratio) else 0.0)


# ---------------------------------------------------------------------------
# attainable-value envelope

@dataclass
class EnvelopeReport:
    lower: float
    upper: float
    per_lambda: list            # (lambda, u(x; -lambda), u(x; +lambda))
    random_values: list
    random_within: bool
    ball_radius: float
    ball_bound: Optional[float]


def estimate_envelope(grid: Grid, a: Nonlinearity, point, lambdas,
                      random_count: int, seed: int,
                      growth=None, opts: NewtonOptions = NewtonOptions()) -> EnvelopeReport:
    """Running (min, max) of u(x; f) at an interior point over swept data.

    Constant data of amplitude lambda dominates the envelope for monotone a;
    seeded trig-polynomial data act as a consistency check.  `growth` may be
    (delta, epsilon) to attach the inscribed-ball saturation bound.
    """
    mono = check_monotone(a, (-max(lambdas), max(lambdas)), 17,
                          lx=grid.lx, ly=grid.ly)
    if not mono.passed:
        raise LinearizeError("envelope estimation requires a monotone nonlinearity")
    px, py = float(point[0]), float(point[1])
    ix = int(round(px / grid.hx))
    iy = int(round(py / grid.hy))
    if ix <= 0 or ix >= grid.nx - 1 or iy <= 0 or iy >= grid.ny - 1:
        raise LinearizeError("envelope point must be an interior node")
    node = iy * grid.nx + ix
    dist = min(ix * grid.hx, (grid.nx - 1 - ix) * grid.hx,
               iy * grid.hy, (grid.ny - 1 - iy) * grid.hy)

    lower, upper = np.inf, -np.inf
    per_lambda = []
    for lam in lambdas:
        vals = []
        for s in (-1.0, 1.0):
            u, rep = solve_semilinear(grid, a, constant_data(grid, s * lam), opts)
            if not rep.converged:
                raise LinearizeError(f"solve failed at constant data {s * lam}")
            vals.append(float(u[node]))
        per_lambda.append((float(lam), vals[0], vals[1]))
        lower = min(lower, *vals)
        upper = max(upper, *vals)

    rng = np.random.default_rng(seed)
    random_values = []
    within = True
    amps = np.geomspace(min(lambdas), max(lambdas), max(random_count, 1))
    for i in range(random_count):
        f = random_trig_data(grid, rng, float(amps[i]))
        u, rep = solve_semilinear(grid, a, f, opts)
        if not rep.converged:
            raise LinearizeError("solve failed on random boundary data")
        val = float(u[node])
        random_values.append(val)
        if not (lower - 1e-8 <= val <= upper + 1e-8):
            within = False

    bound = None
    if growth is not None:
        delta, epsilon = growth
        bound = ball_bound(delta, epsilon, 2, dist)
    return EnvelopeReport(lower, upper, per_lambda, random_values, within,
                          dist, bound)
