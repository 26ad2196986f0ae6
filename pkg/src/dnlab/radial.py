"""Radial comparison engine on an n-ball.

The radial profile v(r) solves

    -v''(r) - (n-1)/r v'(r) + F(v(r)) = 0,   v'(0) = 0,  v(R) = lambda,

integrated outward by classical RK4 with a series start that removes the
r -> 0 singularity.  The boundary value problem goes through bisection on the
center value, which the comparison principle makes unconditionally safe even
at extreme boundary amplitudes.  saturation_constants packages the explicit
threshold mu0 = (32 (n-1)^2 / delta)^(1/eps) and the tail-integral constant
C0 that together bound the center value independently of lambda.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.integrate import quad

from .nonlinearity import Nonlinearity, Polynomial, constant, check_growth_bounds

BLOWUP = 1e12


class RadialError(RuntimeError):
    pass


class BracketError(RadialError):
    """Bisection bracket failed; the profile family is not monotone."""


@dataclass(frozen=True)
class Profile1D:
    """1D nonlinearity F(v) with derivative and antiderivative G(v)."""

    f: Callable[[float], float]
    df: Callable[[float], float]
    antideriv: Optional[Callable[[float], float]] = None
    powers: Optional[dict] = None   # set for polynomial profiles

    def g(self, v: float) -> float:
        if self.antideriv is not None:
            return self.antideriv(v)
        val, _ = quad(self.f, 0.0, v, limit=200)
        return val

    def as_nonlinearity(self) -> Nonlinearity:
        if self.powers is None:
            raise RadialError("only polynomial profiles convert to a catalogue member")
        terms = tuple((k, constant(c)) for k, c in sorted(self.powers.items()))
        return Polynomial(terms)


def poly_profile(powers: dict) -> Profile1D:
    """F(v) = sum c_k v^k from {power: coefficient}, powers >= 1."""
    items = sorted((int(k), float(c)) for k, c in powers.items())
    for k, _ in items:
        if k < 1:
            raise RadialError("powers must be >= 1 so that F(0) = 0")

    def f(v):
        return sum(c * v**k for k, c in items)

    def df(v):
        return sum(k * c * v**(k - 1) for k, c in items)

    def g(v):
        return sum(c * v**(k + 1) / (k + 1) for k, c in items)

    return Profile1D(f, df, g, dict(items))


@dataclass(frozen=True)
class RadialProfile:
    n: int
    radius: float
    r: np.ndarray
    v: np.ndarray
    vp: np.ndarray
    escaped: bool = False
    escape_radius: Optional[float] = None

    @property
    def center_value(self) -> float:
        return float(self.v[0])

    @property
    def boundary_value(self) -> float:
        return float(self.v[-1])


def shoot(F: Profile1D, c: float, n: int, R: float, nodes: int) -> RadialProfile:
    """Integrate outward from v(0) = c, v'(0) = 0 with classical RK4.

    First step uses the series v(h) = c + F(c) h^2 / (2n), v'(h) = F(c) h / n,
    which is exact to O(h^4) and avoids evaluating (n-1)/r at r = 0.
    """
    if nodes < 100:
        raise RadialError("need at least 100 nodes")
    if not np.isfinite(c):
        raise RadialError("center value must be finite")
    if n < 2:
        raise RadialError("dimension must be >= 2")
    h = R / (nodes - 1)
    r = np.linspace(0.0, R, nodes)
    v = np.empty(nodes)
    vp = np.empty(nodes)
    v[0], vp[0] = c, 0.0
    fc = F.f(c)
    v[1] = c + fc * h * h / (2.0 * n)
    vp[1] = fc * h / n
    nm1 = n - 1.0
    f = F.f
    vi, pi = v[1], vp[1]
    for i in range(1, nodes - 1):
        ri = r[i]
        # RK4 on (v, v') with v'' = F(v) - (n-1)/r v'
        k1v = pi
        k1p = f(vi) - nm1 / ri * pi
        rh = ri + 0.5 * h
        k2v = pi + 0.5 * h * k1p
        k2p = f(vi + 0.5 * h * k1v) - nm1 / rh * k2v
        k3v = pi + 0.5 * h * k2p
        k3p = f(vi + 0.5 * h * k2v) - nm1 / rh * k3v
        r1 = ri + h
        k4v = pi + h * k3p
        k4p = f(vi + h * k3v) - nm1 / r1 * k4v
        vi = vi + h / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v)
        pi = pi + h / 6.0 * (k1p + 2 * k2p + 2 * k3p + k4p)
        if not np.isfinite(vi) or abs(vi) > BLOWUP:
            v[i + 1:] = np.sign(vi) * BLOWUP if np.isfinite(vi) else BLOWUP
            vp[i + 1:] = vp[i]
            return RadialProfile(n, R, r, v, vp, escaped=True, escape_radius=float(r1))
        v[i + 1], vp[i + 1] = vi, pi
    return RadialProfile(n, R, r, v, vp)


def solve_radial_bvp(F: Profile1D, lam: float, n: int, R: float,
                     nodes: int = 2001, rtol: float = 1e-10,
                     max_iter: int = 200) -> RadialProfile:
    """Match v(R) = lam by bisection on the center value c in [0, lam]."""
    if lam < 0:
        raise RadialError("lambda must be nonnegative")
    if lam == 0.0:
        r = np.linspace(0.0, R, nodes)
        return RadialProfile(n, R, r, np.zeros(nodes), np.zeros(nodes))

    def endpoint(c):
        prof = shoot(F, c, n, R, nodes)
        return (np.inf if prof.escaped else prof.boundary_value), prof

    lo, hi = 0.0, float(lam)
    val_hi, prof_hi = endpoint(hi)
    if val_hi < lam * (1.0 - 1e-9):
        raise BracketError(
            f"v(R; c=lambda) = {val_hi:.6g} < lambda; shooting map not monotone enough")
    best = prof_hi if not prof_hi.escaped else None
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        val, prof = endpoint(mid)
        if np.isfinite(val) and abs(val - lam) <= rtol * max(lam, 1.0):
            return prof
        if val < lam:
            lo = mid
            best = prof
        else:
            hi = mid
            if not prof.escaped:
                best = prof
        if hi - lo <= 1e-16 * max(1.0, hi):
            break
    if best is None:
        _, best = endpoint(lo)
    return best


@dataclass(frozen=True)
class SaturationConstants:
    delta: float
    epsilon: float
    n: int
    mu0: float
    tail_integral: float   # I(eps) = int_1^inf ds / sqrt(s^(2+eps) - 1)
    c0: float

    @property
    def bound(self) -> float:
        return max(self.mu0, self.c0)


def tail_integral(epsilon: float, tol: float = 1e-10) -> float:
    """I(eps) via the substitution s = 1 + t^2 that removes the endpoint
    inverse-square-root singularity."""
    def integrand(t):
        s = 1.0 + t * t
        return 2.0 * t / np.sqrt(s ** (2.0 + epsilon) - 1.0)

    val, err = quad(integrand, 0.0, np.inf, epsabs=tol * 1e-2, epsrel=tol * 1e-2,
                    limit=400)
    if err > tol:
        raise RadialError(f"tail integral quadrature stalled at error {err:.2e}")
    return float(val)


def saturation_constants(delta: float, epsilon: float, n: int) -> SaturationConstants:
    """Explicit center-value bound max(mu0, C0), independent of the data."""
    if delta <= 0 or epsilon <= 0:
        raise RadialError("delta and epsilon must be positive")
    if n < 2:
        raise RadialError("dimension must be >= 2")
    mu0 = (32.0 * (n - 1) ** 2 / delta) ** (1.0 / epsilon)
    i_eps = tail_integral(epsilon)
    c0 = (2.0 * np.sqrt((2.0 + epsilon) / delta) * i_eps) ** (1.0 / epsilon)
    return SaturationConstants(delta, epsilon, n, float(mu0), i_eps, float(c0))


def ball_bound(delta: float, epsilon: float, n: int, radius: float) -> float:
    """Center-value bound for a ball of the given radius (rescaled constants)."""
    return saturation_constants(delta * radius ** 2, epsilon, n).bound


@dataclass
class SweepReport:
    lambdas: list
    centers: list
    constants: SaturationConstants
    growth_passed: bool
    growth_margin: float
    monotone: bool
    bounded: bool
    cauchy_gap: float

    def rows(self):
        """(lambda, center, bound, margin) rows for CSV export."""
        b = self.constants.bound
        return [(lam, c, b, b - c) for lam, c in zip(self.lambdas, self.centers)]


def saturation_sweep(F: Profile1D, delta: float, epsilon: float, n: int,
                     lambdas, radius: float = 1.0, nodes: int = 2001,
                     bound_slack: float = 1e-6) -> SweepReport:
    """Sweep boundary amplitudes and certify the center-value saturation bound."""
    lambdas = [float(x) for x in lambdas]
    if any(l <= 0 for l in lambdas) or any(b <= a for a, b in zip(lambdas, lambdas[1:])):
        raise RadialError("lambdas must be positive and increasing")
    lam_max = max(lambdas)
    if all(F.f(m) == 0.0 for m in np.geomspace(1e-6, lam_max, 64)):
        raise RadialError("trivial profile F = 0 rejected")
    growth = check_growth_bounds(F.as_nonlinearity(), delta, epsilon,
                                 (-lam_max, lam_max))
    consts = saturation_constants(delta * radius ** 2, epsilon, n)
    centers = [solve_radial_bvp(F, lam, n, radius, nodes).center_value
               for lam in lambdas]
    mono = all(b >= a - 1e-12 * max(1.0, abs(a)) for a, b in zip(centers, centers[1:]))
    bounded = all(c <= consts.bound + bound_slack for c in centers)
    gap = abs(centers[-1] - centers[-2]) if len(centers) >= 2 else 0.0
    return SweepReport(lambdas, centers, consts, growth.passed, growth.worst_margin,
                       mono, bounded, gap)


def energy_inequality_violation(F: Profile1D, prof: RadialProfile) -> float:
    """Worst violation of 0 <= v'(r) <= sqrt(2 G(v(r))) over the profile."""
    worst = 0.0
    for v, vp in zip(prof.v, prof.vp):
        g = max(F.g(float(v)), 0.0)
        worst = max(worst, -vp, vp - np.sqrt(2.0 * g))
    return worst
