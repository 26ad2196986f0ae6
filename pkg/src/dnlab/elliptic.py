"""Linear and semilinear Dirichlet solvers on a rectangular grid.

solve_linear handles -lap_h v + q v = rhs with Dirichlet data; the interior
system goes through diagonally preconditioned conjugate gradients when q >= 0
(falling back to a sparse direct factorization otherwise or on stagnation).

solve_semilinear runs a damped Newton iteration on R(u) = -lap_h u + a(x, u)
with the exact catalogue Jacobian -lap_h + d1_a(x, u).  If Newton fails and
the nonlinearity is monotone on the data bracket, a monotone fixed-point
iteration started from the constant supersolution takes over; the comparison
principle makes that path unconditionally convergent, just slow.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .grid import Grid, assemble_operator, laplacian_interior
from .nonlinearity import Nonlinearity, check_monotone


class SingularOperatorError(RuntimeError):
    """The interior operator is indefinite or singular."""


@dataclass(frozen=True)
class NewtonOptions:
    max_iter: int = 50
    rtol: float = 1e-10
    atol: float = 1e-12
    max_backtrack: int = 30
    initial: str = "harmonic"      # "harmonic" | "zero" | "supplied"
    initial_field: Optional[np.ndarray] = None


@dataclass
class SolveReport:
    converged: bool
    iterations: int
    residual_history: list = field(default_factory=list)
    method: str = "newton"
    smallest_eig: Optional[float] = None


def _cg(a: sp.csr_matrix, b: np.ndarray, tol: float, max_iter: int) -> Optional[np.ndarray]:
    """Diagonally preconditioned CG; None if it fails to hit tol."""
    dinv = 1.0 / a.diagonal()
    x = np.zeros_like(b)
    r = b.copy()
    z = dinv * r
    p = z.copy()
    rz = r @ z
    bnorm = np.linalg.norm(b)
    if bnorm == 0.0:
        return x
    for _ in range(max_iter):
        ap = a @ p
        alpha = rz / (p @ ap)
        x += alpha * p
        r -= alpha * ap
        if np.linalg.norm(r) <= tol:
            return x
        z = dinv * r
        rz_new = r @ z
        p = z + (rz_new / rz) * p
        rz = rz_new
    return None


def _interior_solve(op, b: np.ndarray, q_nonneg: bool) -> np.ndarray:
    if q_nonneg:
        tol = max(1e-12, 1e-14 * np.linalg.norm(b))
        x = _cg(op.a_int, b, tol, max_iter=10 * b.size)
        if x is not None:
            return x
    try:
        return spla.splu(op.a_int.tocsc()).solve(b)
    except RuntimeError as exc:  # pragma: no cover - singular factorization
        raise SingularOperatorError(str(exc)) from exc


def solve_linear(grid: Grid, q, f, rhs) -> np.ndarray:
    """Solve -lap_h v + q v = rhs inside, v = f on the boundary."""
    q = grid.full_field(q)
    f = grid.boundary_field(f)
    rhs = grid.full_field(rhs)
    op = assemble_operator(grid, q)
    q_nonneg = bool(np.all(q[grid.interior] >= 0.0))
    if not q_nonneg and smallest_eigenvalue(grid, q) <= 1e-12:
        raise SingularOperatorError("interior operator is not positive definite")
    b = rhs[grid.interior] - op.b_coupling @ f
    u = np.empty(grid.n_nodes)
    u[grid.boundary] = f
    u[grid.interior] = _interior_solve(op, b, q_nonneg)
    return u


def smallest_eigenvalue(grid: Grid, q, rtol: float = 1e-6, max_iter: int = 500) -> float:
    """Smallest eigenvalue of the interior (-lap_h + q) by inverse power iteration.

    Shift-free inverse iteration converges to the eigenvalue of smallest
    magnitude; for the operators probed here (near the coercivity boundary)
    that is the smallest one.  Iterates well past the requested relative
    accuracy so that constant shifts of q reproduce exact spectral shifts.
    """
    q = grid.full_field(q)
    op = assemble_operator(grid, q)
    try:
        lu = spla.splu(op.a_int.tocsc())
    except RuntimeError as exc:
        raise SingularOperatorError("exactly singular interior operator") from exc
    v = np.ones(grid.n_interior)
    v /= np.linalg.norm(v)
    lam = float(v @ (op.a_int @ v))
    for _ in range(max_iter):
        w = lu.solve(v)
        w /= np.linalg.norm(w)
        av = op.a_int @ w
        lam = float(w @ av)
        resid = np.linalg.norm(av - lam * w)
        v = w
        if resid <= min(rtol * 1e-3, 1e-8) * max(abs(lam), 1e-30):
            break
    return lam


def _initial_guess(grid: Grid, f: np.ndarray, opts: NewtonOptions) -> np.ndarray:
    if opts.initial == "supplied":
        if opts.initial_field is None:
            raise ValueError("initial='supplied' needs initial_field")
        u = grid.check_field(opts.initial_field).copy()
        u[grid.boundary] = f
        return u
    if opts.initial == "zero":
        u = np.zeros(grid.n_nodes)
        u[grid.boundary] = f
        return u
    return solve_linear(grid, 0.0, f, 0.0)


def solve_semilinear(grid: Grid, a: Nonlinearity, f,
                     opts: NewtonOptions = NewtonOptions()):
    """Solve -lap_h u + a(x, u) = 0 inside, u = f on the boundary.

    Returns (field, SolveReport).  Non-convergence is reported, not raised;
    it is the measured signal for leaving the well-posedness regime.
    """
    f = grid.boundary_field(f)
    lap = assemble_operator(grid, 0.0)
    xi = grid.node_x(grid.interior)
    yi = grid.node_y(grid.interior)
    bf = lap.b_coupling @ f

    def residual(u_int):
        return lap.a_int @ u_int + bf + a.eval(xi, yi, u_int)

    u = _initial_guess(grid, f, opts)
    u_int = u[grid.interior]
    r = residual(u_int)
    rnorm = np.linalg.norm(r, np.inf)
    # attainable residual floor: roundoff of the stencil at the data scale
    fmax = float(np.max(np.abs(f))) if f.size else 0.0
    floor = 10.0 * np.finfo(float).eps * (2.0 / grid.hx**2 + 2.0 / grid.hy**2) \
        * max(1.0, fmax)
    tol = max(opts.rtol * rnorm, opts.atol, floor)
    report = SolveReport(converged=rnorm <= tol, iterations=0,
                         residual_history=[rnorm])
    if report.converged:
        u[grid.interior] = u_int
        return u, report

    for it in range(1, opts.max_iter + 1):
        jac = lap.a_int + sp.diags(a.d1(xi, yi, u_int))
        try:
            step = spla.splu(jac.tocsc()).solve(-r)
        except RuntimeError:
            report.method = "newton"
            break
        # backtracking with a sufficient-decrease guard
        alpha = 1.0
        accepted = False
        r2 = np.linalg.norm(r)
        for _ in range(opts.max_backtrack + 1):
            trial = u_int + alpha * step
            r_trial = residual(trial)
            if np.linalg.norm(r_trial) <= (1.0 - 1e-4 * alpha) * r2:
                accepted = True
                break
            alpha *= 0.5
        if not accepted:
            break
        u_int, r = trial, r_trial
        rnorm = np.linalg.norm(r, np.inf)
        report.residual_history.append(rnorm)
        report.iterations = it
        if rnorm <= tol:
            report.converged = True
            u[grid.interior] = u_int
            return u, report

    # monotone fallback on the constant-data bracket
    fmax = float(np.max(np.abs(f))) if f.size else 0.0
    mono = check_monotone(a, (-fmax - 1.0, fmax + 1.0), 33,
                          lx=grid.lx, ly=grid.ly)
    if mono.passed:
        u_fb, rep_fb = _monotone_iteration(grid, a, f, lap, xi, yi, bf, tol)
        rep_fb.residual_history = report.residual_history + rep_fb.residual_history
        return u_fb, rep_fb
    u[grid.interior] = u_int
    report.converged = False
    return u, report


def _monotone_iteration(grid: Grid, a: Nonlinearity, f, lap, xi, yi, bf, tol):
    """u_{k+1} = (-lap_h + M)^{-1} (M u_k - a(x, u_k)), from the supersolution."""
    fmax = float(np.max(np.abs(f)))
    xs = np.linspace(0, grid.lx, 17)
    ys = np.linspace(0, grid.ly, 17)
    X, Y = np.meshgrid(xs, ys)
    mus = np.linspace(-fmax, fmax, 33)
    m = max(float(np.max(a.d1(X.ravel(), Y.ravel(), mu))) for mu in mus)
    m = 1.1 * max(m, 1e-12)

    op = assemble_operator(grid, m)
    lu = spla.splu(op.a_int.tocsc())
    bf_m = op.b_coupling @ f
    u_int = np.full(grid.n_interior, fmax)
    report = SolveReport(converged=False, iterations=0, method="monotone-bracket")
    for it in range(1, 2001):
        rhs = m * u_int - a.eval(xi, yi, u_int)
        u_new = lu.solve(rhs - bf_m)
        delta = np.linalg.norm(u_new - u_int, np.inf)
        u_int = u_new
        r = lap.a_int @ u_int + bf + a.eval(xi, yi, u_int)
        rnorm = np.linalg.norm(r, np.inf)
        report.residual_history.append(rnorm)
        report.iterations = it
        if rnorm <= tol or delta <= 1e-14 * max(1.0, fmax):
            report.converged = rnorm <= max(tol, 1e-8 * max(1.0, fmax))
            break
    u = np.empty(grid.n_nodes)
    u[grid.boundary] = f
    u[grid.interior] = u_int
    return u, report


def estimate_wellposedness_radius(grid: Grid, a: Nonlinearity, f0, tmax: float,
                                  steps: int, opts: NewtonOptions = NewtonOptions()) -> float:
    """Continuation in data amplitude; largest t before the solver or the
    linearization spectrum gives out.  Returns tmax when nothing fails."""
    f0 = grid.boundary_field(f0)
    if not np.any(f0):
        raise ValueError("f0 must not be identically zero")
    if tmax <= 0:
        raise ValueError("tmax must be positive")
    ts = np.linspace(tmax / steps, tmax, steps)
    t_ok = 0.0
    u_prev = None
    for t in ts:
        cur = opts
        if u_prev is not None:
            cur = NewtonOptions(max_iter=opts.max_iter, rtol=opts.rtol,
                                atol=opts.atol, max_backtrack=opts.max_backtrack,
                                initial="supplied", initial_field=u_prev)
        u, rep = solve_semilinear(grid, a, t * f0, cur)
        if not rep.converged:
            return t_ok
        qt = a.d1(*grid.coords(), u)
        if smallest_eigenvalue(grid, qt) <= 0.0:
            return t_ok
        t_ok = float(t)
        u_prev = u
    return float(tmax)
