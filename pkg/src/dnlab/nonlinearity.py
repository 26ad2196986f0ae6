"""Closed-form nonlinearities a(x, mu) with exact first and second mu-derivatives.

Every catalogue member vanishes at mu = 0, so the zero boundary datum always
produces the zero solution.  The BumpModified family performs truncation
surgery: it adds c(x) * g(mu) to a base nonlinearity, where g is an odd C^2
quintic-smoothstep ramp that is identically zero on [-T, T], so the modified
and unmodified members agree exactly wherever |mu| <= T.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np


class NonlinearityError(ValueError):
    pass


# ---------------------------------------------------------------------------
# spatial coefficient expressions

@dataclass(frozen=True)
class SpatialExpression:
    """Named closed-form coefficient b(x, y) with numeric parameters.

    Supported names:
      constant      value
      gaussian-bump amplitude, cx, cy, sigma
      compact-bump  amplitude, cx, cy, radius   (exactly zero outside radius)
      trig-product  amplitude, kx, ky           (cos(2 pi kx x) cos(2 pi ky y))
      sampled-field bilinear interpolation of per-node values on a grid
    """

    name: str
    params: dict = field(default_factory=dict)
    grid: Optional[object] = None
    values: Optional[np.ndarray] = None

    def __post_init__(self):
        known = {"constant", "gaussian-bump", "compact-bump",
                 "trig-product", "sampled-field"}
        if self.name not in known:
            raise NonlinearityError(f"unknown spatial expression {self.name!r}")
        if self.name == "sampled-field" and (self.grid is None or self.values is None):
            raise NonlinearityError("sampled-field needs grid and values")

    def __call__(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        p = self.params
        if self.name == "constant":
            return np.broadcast_to(float(p["value"]), np.broadcast(x, y).shape).copy()
        if self.name == "gaussian-bump":
            r2 = (x - p["cx"]) ** 2 + (y - p["cy"]) ** 2
            return p["amplitude"] * np.exp(-r2 / (2.0 * p["sigma"] ** 2))
        if self.name == "compact-bump":
            t = ((x - p["cx"]) ** 2 + (y - p["cy"]) ** 2) / p["radius"] ** 2
            out = np.zeros(np.broadcast(x, y).shape)
            inside = t < 1.0
            ti = np.where(inside, t, 0.0)
            out = np.where(inside, p["amplitude"] * np.exp(1.0 - 1.0 / (1.0 - ti)), 0.0)
            return out
        if self.name == "trig-product":
            return (p["amplitude"]
                    * np.cos(2 * np.pi * p["kx"] * x)
                    * np.cos(2 * np.pi * p["ky"] * y))
        # sampled-field: bilinear interpolation
        g = self.grid
        fx = np.clip(x / g.hx, 0, g.nx - 1 - 1e-12)
        fy = np.clip(y / g.hy, 0, g.ny - 1 - 1e-12)
        i0 = fx.astype(int)
        j0 = fy.astype(int)
        tx, ty = fx - i0, fy - j0
        vals = np.asarray(self.values)
        v00 = vals[j0 * g.nx + i0]
        v10 = vals[j0 * g.nx + i0 + 1]
        v01 = vals[(j0 + 1) * g.nx + i0]
        v11 = vals[(j0 + 1) * g.nx + i0 + 1]
        return (1 - tx) * (1 - ty) * v00 + tx * (1 - ty) * v10 \
            + (1 - tx) * ty * v01 + tx * ty * v11

    def describe(self) -> dict:
        return {"name": self.name, **{k: float(v) for k, v in self.params.items()}}


def constant(value: float) -> SpatialExpression:
    return SpatialExpression("constant", {"value": float(value)})


# ---------------------------------------------------------------------------
# nonlinearity families

class Nonlinearity:
    """Base class: a(x, mu) with exact mu-derivatives d1 and d2."""

    def eval(self, x, y, mu):
        raise NotImplementedError

    def d1(self, x, y, mu):
        raise NotImplementedError

    def d2(self, x, y, mu):
        raise NotImplementedError

    def describe(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class Polynomial(Nonlinearity):
    """a(x, mu) = sum_k b_k(x) mu^k over terms (k >= 1, b_k spatial)."""

    terms: tuple  # of (power, SpatialExpression)

    def __post_init__(self):
        for k, _ in self.terms:
            if k < 1:
                raise NonlinearityError(f"powers must be >= 1, got {k}")

    def eval(self, x, y, mu):
        mu = np.asarray(mu, dtype=float)
        out = np.zeros(np.broadcast(np.asarray(x), np.asarray(y), mu).shape)
        for k, b in self.terms:
            out = out + b(x, y) * mu ** k
        return out

    def d1(self, x, y, mu):
        mu = np.asarray(mu, dtype=float)
        out = np.zeros(np.broadcast(np.asarray(x), np.asarray(y), mu).shape)
        for k, b in self.terms:
            out = out + k * b(x, y) * mu ** (k - 1)
        return out

    def d2(self, x, y, mu):
        mu = np.asarray(mu, dtype=float)
        out = np.zeros(np.broadcast(np.asarray(x), np.asarray(y), mu).shape)
        for k, b in self.terms:
            if k >= 2:
                out = out + k * (k - 1) * b(x, y) * mu ** (k - 2)
        return out

    def describe(self) -> dict:
        return {"family": "polynomial",
                "terms": [{"power": int(k), "coefficient": b.describe()}
                          for k, b in self.terms]}


@dataclass(frozen=True)
class Linear(Nonlinearity):
    """a(x, mu) = q(x) mu."""

    q: SpatialExpression

    def eval(self, x, y, mu):
        return self.q(x, y) * np.asarray(mu, dtype=float)

    def d1(self, x, y, mu):
        mu = np.asarray(mu, dtype=float)
        return np.broadcast_to(self.q(x, y), np.broadcast(np.asarray(x), mu).shape).copy()

    def d2(self, x, y, mu):
        mu = np.asarray(mu, dtype=float)
        return np.zeros(np.broadcast(np.asarray(x), mu).shape)

    def describe(self) -> dict:
        return {"family": "linear", "q": self.q.describe()}


@dataclass(frozen=True)
class SeparatedAnalytic(Nonlinearity):
    """a(x, mu) = q(x) F(mu), F polynomial in mu with F(0) = 0.

    f_coeffs[k] is the coefficient of mu^k (index 0 must be 0).
    """

    q: SpatialExpression
    f_coeffs: tuple

    def __post_init__(self):
        if self.f_coeffs and self.f_coeffs[0] != 0.0:
            raise NonlinearityError("F(0) must vanish")

    def _f(self, mu, order: int):
        mu = np.asarray(mu, dtype=float)
        out = np.zeros(mu.shape)
        for k, c in enumerate(self.f_coeffs):
            if c == 0.0 or k < order:
                continue
            fac = 1.0
            for j in range(order):
                fac *= k - j
            out = out + c * fac * mu ** (k - order)
        return out

    def f_deriv_at_zero(self, k: int) -> float:
        """F^(k)(0), exact."""
        if k >= len(self.f_coeffs):
            return 0.0
        return float(self.f_coeffs[k]) * _factorial(k)

    def eval(self, x, y, mu):
        return self.q(x, y) * self._f(mu, 0)

    def d1(self, x, y, mu):
        return self.q(x, y) * self._f(mu, 1)

    def d2(self, x, y, mu):
        return self.q(x, y) * self._f(mu, 2)

    def describe(self) -> dict:
        return {"family": "separated-analytic", "q": self.q.describe(),
                "f_coeffs": [float(c) for c in self.f_coeffs]}


def _factorial(k: int) -> float:
    out = 1.0
    for j in range(2, k + 1):
        out *= j
    return out


def _smoothstep(t, order: int):
    """C^2 quintic smoothstep 6t^5 - 15t^4 + 10t^3 and its derivatives."""
    t = np.asarray(t, dtype=float)
    if order == 0:
        return t ** 3 * (10.0 + t * (-15.0 + 6.0 * t))
    if order == 1:
        return 30.0 * t ** 2 * (1.0 - t) ** 2
    return t * (60.0 + t * (-180.0 + 120.0 * t))


@dataclass(frozen=True)
class BumpModified(Nonlinearity):
    """Base nonlinearity plus c(x) * g(mu), g an odd C^2 saturating ramp.

    g vanishes identically on [-threshold, threshold], rises through a quintic
    smoothstep of the given width, and saturates at +/- amplitude.  With
    c >= 0 the addition preserves both a(x,0)=0 and monotonicity in mu.
    """

    base: Nonlinearity
    c: SpatialExpression
    threshold: float
    amplitude: float
    width: float

    def __post_init__(self):
        if self.threshold <= 0 or self.amplitude <= 0 or self.width <= 0:
            raise NonlinearityError("threshold, amplitude, width must be positive")

    def _ramp(self, mu, order: int):
        mu = np.asarray(mu, dtype=float)
        m = np.abs(mu)
        t = np.clip((m - self.threshold) / self.width, 0.0, 1.0)
        val = self.amplitude * _smoothstep(t, order) / self.width ** order
        if order in (0, 2):
            val = val * np.sign(mu)
        return val

    def eval(self, x, y, mu):
        return self.base.eval(x, y, mu) + self.c(x, y) * self._ramp(mu, 0)

    def d1(self, x, y, mu):
        return self.base.d1(x, y, mu) + self.c(x, y) * self._ramp(mu, 1)

    def d2(self, x, y, mu):
        return self.base.d2(x, y, mu) + self.c(x, y) * self._ramp(mu, 2)

    def describe(self) -> dict:
        return {"family": "bump-modified", "base": self.base.describe(),
                "c": self.c.describe(), "threshold": self.threshold,
                "amplitude": self.amplitude, "width": self.width}


# ---------------------------------------------------------------------------
# condition checkers

@dataclass(frozen=True)
class MonotoneReport:
    passed: bool
    min_d1: float
    at: tuple  # (x, y, mu)


@dataclass(frozen=True)
class GrowthReport:
    passed: bool
    worst_margin: float
    at: tuple  # (x, y, mu)


def _mu_lattice(box, samples: int) -> np.ndarray:
    lo, hi = float(box[0]), float(box[1])
    mus = [np.linspace(lo, hi, samples)]
    # log-spaced refinements near zero and toward the box edges
    for edge in (lo, hi):
        if abs(edge) > 0:
            mus.append(np.geomspace(abs(edge) * 1e-6, abs(edge), samples)
                       * np.sign(edge))
    return np.unique(np.concatenate(mus))


def _domain_lattice(samples: int, lx: float, ly: float):
    xs = np.linspace(0.0, lx, samples)
    ys = np.linspace(0.0, ly, samples)
    X, Y = np.meshgrid(xs, ys)
    return X.ravel(), Y.ravel()


def check_monotone(n: Nonlinearity, box, samples: int,
                   lx: float = 1.0, ly: float = 1.0) -> MonotoneReport:
    """Minimum of d1 over a deterministic domain x mu lattice."""
    if samples < 1:
        raise NonlinearityError("samples must be >= 1")
    x, y = _domain_lattice(max(samples, 2), lx, ly)
    mus = _mu_lattice(box, max(samples, 2))
    min_d1, at = np.inf, (0.0, 0.0, 0.0)
    for mu in mus:
        d = n.d1(x, y, mu)
        i = int(np.argmin(d))
        if d[i] < min_d1:
            min_d1, at = float(d[i]), (float(x[i]), float(y[i]), float(mu))
    return MonotoneReport(min_d1 >= -1e-12, min_d1, at)


def check_growth_bounds(n: Nonlinearity, delta: float, epsilon: float, box,
                        samples: int = 64, lx: float = 1.0, ly: float = 1.0) -> GrowthReport:
    """Check a(x,mu) >= delta mu^(1+eps) for mu >= 0 and the mirrored bound below.

    Margin at a sample is a - delta mu^(1+eps) (mu > 0) or
    -delta |mu|^(1+eps) - a (mu < 0); reported worst margin is the minimum.
    """
    if delta <= 0 or epsilon <= 0:
        raise NonlinearityError("delta and epsilon must be positive")
    x, y = _domain_lattice(max(samples // 4, 2), lx, ly)
    mus = _mu_lattice(box, samples)
    worst, at = np.inf, (0.0, 0.0, 0.0)
    for mu in mus:
        a = n.eval(x, y, mu)
        if mu >= 0:
            margin = a - delta * mu ** (1.0 + epsilon)
        else:
            margin = -delta * abs(mu) ** (1.0 + epsilon) - a
        i = int(np.argmin(margin))
        if margin[i] < worst:
            worst, at = float(margin[i]), (float(x[i]), float(y[i]), float(mu))
    scale = max(1.0, delta * max(abs(box[0]), abs(box[1])) ** (1.0 + epsilon))
    return GrowthReport(worst >= -1e-12 * scale, worst, at)


def make_truncated_pair(base: Nonlinearity, threshold: float, amplitude: float,
                        width: float, where: SpatialExpression | None = None):
    """DN-indistinguishable surgery: (a1, a2) equal on |mu| <= threshold.

    `where` localizes the modification in space (default: constant 1, so the
    pair differs by exactly `amplitude` wherever the ramp saturates).
    """
    if threshold <= 0 or amplitude <= 0 or width <= 0:
        raise NonlinearityError("threshold, amplitude, width must be positive")
    c = where if where is not None else constant(1.0)
    return base, BumpModified(base, c, threshold, amplitude, width)
