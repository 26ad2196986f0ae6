"""Scenario runner: configuration documents, end-to-end experiments, artifacts.

Configurations are JSON documents.  Every scenario turns into a list of
assertions (measured value, bound, provenance) plus CSV tables; re-running an
identical configuration with an identical seed reproduces byte-identical CSV
bodies.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .boundarydata import constant_data, random_trig_data
from .dnmap import dn_map, dn_distance
from .elliptic import (NewtonOptions, estimate_wellposedness_radius,
                       smallest_eigenvalue, solve_linear, solve_semilinear)
from .grid import Grid, build_rectangle, discrete_flux, laplacian_interior
from .linearize import (cascade_solve, check_integral_identities,
                        dn_amplitude_derivative, estimate_envelope,
                        rigidity_probe_t1, second_linearization)
from .nonlinearity import (BumpModified, Linear, Nonlinearity, Polynomial,
                           SeparatedAnalytic, SpatialExpression, constant)
from .radial import poly_profile, saturation_constants, saturation_sweep, ball_bound

SCENARIOS = ("saturation", "counterexample", "rigidity-t1", "cascade",
             "second-linearization", "wellposedness", "envelope", "convergence")


class ConfigError(ValueError):
    pass


class AssertionFailure(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# configuration

_COMMON_KEYS = {"scenario", "grid", "seed", "out", "tolerances"}
_SCENARIO_KEYS = {
    "convergence": {"grids"},
    "saturation": {"profile", "delta", "epsilon", "dimension", "lambdas", "nodes"},
    "counterexample": {"base", "depth", "amplitude", "width", "grids",
                       "data_count", "max_amplitude"},
    "rigidity-t1": {"nonlinearity", "mus"},
    "cascade": {"q", "f_coeffs", "order", "step", "grids"},
    "second-linearization": {"nonlinearity", "t", "grids"},
    "wellposedness": {"nonlinearity", "ts", "tmax", "steps"},
    "envelope": {"nonlinearity", "point", "lambdas", "random_count",
                 "delta", "epsilon"},
}


@dataclass
class ScenarioConfig:
    scenario: str
    raw: dict
    grid: dict
    seed: int
    out: str
    tolerances: dict

    def get(self, key, default=None):
        return self.raw.get(key, default)

    def tol(self, name: str, default: float) -> float:
        return float(self.tolerances.get(name, default))


def validate_config(doc: dict) -> ScenarioConfig:
    if not isinstance(doc, dict):
        raise ConfigError("configuration must be a JSON object")
    scenario = doc.get("scenario")
    if scenario not in SCENARIOS:
        raise ConfigError(f"unknown scenario {scenario!r}; expected one of {SCENARIOS}")
    allowed = _COMMON_KEYS | _SCENARIO_KEYS[scenario]
    unknown = set(doc) - allowed
    if unknown:
        raise ConfigError(f"unknown keys for scenario {scenario}: {sorted(unknown)}")
    grid = doc.get("grid", {"nx": 65, "ny": 65, "lx": 1.0, "ly": 1.0})
    if not {"nx", "ny"} <= set(grid):
        raise ConfigError("grid needs nx and ny")
    return ScenarioConfig(scenario=scenario, raw=doc, grid=grid,
                          seed=int(doc.get("seed", 0)),
                          out=str(doc.get("out", "out")),
                          tolerances=dict(doc.get("tolerances", {})))


def _build_grid(cfg: ScenarioConfig, n: int | None = None) -> Grid:
    g = cfg.grid
    if n is not None:
        return build_rectangle(n, n, g.get("lx", 1.0), g.get("ly", 1.0))
    return build_rectangle(int(g["nx"]), int(g["ny"]),
                           g.get("lx", 1.0), g.get("ly", 1.0))


def parse_spatial(doc) -> SpatialExpression:
    if isinstance(doc, (int, float)):
        return constant(float(doc))
    doc = dict(doc)
    name = doc.pop("name")
    return SpatialExpression(name, {k: float(v) for k, v in doc.items()})


def parse_nonlinearity(doc) -> Nonlinearity:
    if doc is None or doc == "zero":
        return Polynomial(())
    family = doc.get("family")
    if family == "polynomial":
        terms = tuple((int(t["power"]), parse_spatial(t["coefficient"]))
                      for t in doc["terms"])
        return Polynomial(terms)
    if family == "linear":
        return Linear(parse_spatial(doc["q"]))
    if family == "separated-analytic":
        return SeparatedAnalytic(parse_spatial(doc["q"]),
                                 tuple(float(c) for c in doc["f_coeffs"]))
    if family == "bump-modified":
        return BumpModified(parse_nonlinearity(doc["base"]),
                            parse_spatial(doc["c"]),
                            float(doc["threshold"]), float(doc["amplitude"]),
                            float(doc["width"]))
    raise ConfigError(f"unknown nonlinearity family {family!r}")


# ---------------------------------------------------------------------------
# artifacts

@dataclass
class Check:
    name: str
    measured: float
    bound: float
    comparator: str             # "<=", ">=", ">"
    provenance: str             # "formula" | "oracle" | "exact"
    passed: bool = field(init=False)

    def __post_init__(self):
        self.measured = float(self.measured)
        self.bound = float(self.bound)
        if self.comparator == "<=":
            self.passed = self.measured <= self.bound
        elif self.comparator == ">=":
            self.passed = self.measured >= self.bound
        elif self.comparator == ">":
            self.passed = self.measured > self.bound
        else:
            raise ValueError(self.comparator)
        self.passed = bool(self.passed)

    def to_dict(self):
        return {"name": self.name, "measured": self.measured,
                "bound": self.bound, "comparator": self.comparator,
                "provenance": self.provenance, "passed": self.passed}


@dataclass
class RunArtifact:
    scenario: str
    checks: list
    tables: dict                # name -> (header tuple, row list)
    out_dir: Path | None = None

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def summary(self) -> dict:
        return {"scenario": self.scenario,
                "passed": self.passed,
                "checks": [c.to_dict() for c in self.checks]}


def _csv_body(header, rows) -> str:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(f"{v:.17g}" if isinstance(v, float) else str(v)
                              for v in row))
    return "\n".join(lines) + "\n"


def write_artifact(art: RunArtifact, cfg: ScenarioConfig, out_dir) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "summary.json").write_text(
        json.dumps(art.summary(), indent=2, sort_keys=True) + "\n")
    for name, (header, rows) in art.tables.items():
        (out / f"{name}.csv").write_text(_csv_body(header, rows))
    manifest = {
        "scenario": cfg.scenario,
        "config_sha256": hashlib.sha256(
            json.dumps(cfg.raw, sort_keys=True).encode()).hexdigest(),
        "grid": cfg.grid,
        "seed": cfg.seed,
        "versions": {"dnlab": __version__, "numpy": np.__version__,
                     "scipy": scipy.__version__},
    }
    (out / "manifest.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    art.out_dir = out


def divergence_identity_error(grid: Grid, u: np.ndarray) -> float:
    """|flux - sum lap_h u dV| relative to the natural scale |u|_inf / h^2."""
    lap = laplacian_interior(grid, u)
    total = discrete_flux(grid, u) - float(np.sum(lap) * grid.hx * grid.hy)
    scale = max(np.max(np.abs(u)), 1e-300) / min(grid.hx, grid.hy) ** 2
    return abs(total) / scale


# ---------------------------------------------------------------------------
# scenarios

def _scenario_convergence(cfg: ScenarioConfig) -> RunArtifact:
    grids = cfg.get("grids", [65, 129])
    tol_div = cfg.tol("divergence", 1e-10)
    errors = []
    checks = []
    for ngrid in grids:
        grid = _build_grid(cfg, int(ngrid))
        x, y = grid.coords()
        exact = np.sin(np.pi * x) * np.sin(np.pi * y)
        rhs = (2.0 * np.pi**2 + 1.0) * exact
        u = solve_linear(grid, 1.0, exact[grid.boundary], rhs)
        errors.append(float(np.max(np.abs(u - exact))))
        checks.append(Check(f"divergence-identity-n{ngrid}",
                            divergence_identity_error(grid, u), tol_div,
                            "<=", "exact"))
    order = float(np.log2(errors[0] / errors[1]))
    checks.insert(0, Check("observed-order", order, cfg.tol("order", 1.9),
                           ">=", "oracle"))
    rows = [(int(n), e) for n, e in zip(grids, errors)]
    return RunArtifact("convergence", checks,
                       {"errors": (("n", "sup_error"), rows)})


def _scenario_saturation(cfg: ScenarioConfig) -> RunArtifact:
    profile = poly_profile(cfg.get("profile", {"3": 1.0}))
    delta = float(cfg.get("delta", 1.0))
    epsilon = float(cfg.get("epsilon", 2.0))
    n = int(cfg.get("dimension", 2))
    lambdas = cfg.get("lambdas", [10.0**k for k in range(7)])
    nodes = int(cfg.get("nodes", 3001))
    rep = saturation_sweep(profile, delta, epsilon, n, lambdas, nodes=nodes,
                           bound_slack=cfg.tol("bound_slack", 1e-6))
    checks = [
        Check("growth-bound-holds", 1.0 if rep.growth_passed else 0.0, 1.0,
              ">=", "formula"),
        Check("centers-nondecreasing", 1.0 if rep.monotone else 0.0, 1.0, ">=", "exact"),
        Check("centers-bounded", 1.0 if rep.bounded else 0.0, 1.0, ">=", "formula"),
        Check("cauchy-gap", rep.cauchy_gap, cfg.tol("cauchy", 1e-3), "<=", "oracle"),
    ]
    return RunArtifact("saturation", checks,
                       {"sweep": (("lambda", "center", "bound", "margin"), rep.rows())})


def _counterexample_pair(cfg: ScenarioConfig):
    base = parse_nonlinearity(cfg.get("base", {
        "family": "polynomial",
        "terms": [{"power": 3, "coefficient": {"name": "constant", "value": 1.0}}]}))
    depth = float(cfg.get("depth", 0.25))
    amplitude = float(cfg.get("amplitude", 1.0))
    width = float(cfg.get("width", 1.0))
    g = cfg.grid
    lx, ly = g.get("lx", 1.0), g.get("ly", 1.0)
    bound = ball_bound(1.0, 2.0, 2, depth)
    threshold = 2.0 * bound
    where = SpatialExpression("compact-bump", {
        "amplitude": 1.0, "cx": lx / 2.0, "cy": ly / 2.0, "radius": depth})
    a2 = BumpModified(base, where, threshold, amplitude, width)
    return base, a2, threshold, bound


def _scenario_counterexample(cfg: ScenarioConfig) -> RunArtifact:
    a1, a2, threshold, bound = _counterexample_pair(cfg)
    grids = [int(n) for n in cfg.get("grids", [65, 129])]
    data_count = int(cfg.get("data_count", 20))
    max_amp = float(cfg.get("max_amplitude", 1e3))
    rng = np.random.default_rng(cfg.seed)
    coarse = _build_grid(cfg, grids[0])
    fine = _build_grid(cfg, grids[1])

    # seeded sweep: half constants, half trig polynomials, log-spaced amplitudes
    amps = np.geomspace(1.0, max_amp, data_count)
    datasets = []
    for i, amp in enumerate(amps):
        if i % 2 == 0:
            fc = constant_data(coarse, amp)
            ff = constant_data(fine, amp)
        else:
            state = rng.uniform(-1.0, 1.0, 8)
            fc = _trig_from_state(coarse, state, amp)
            ff = _trig_from_state(fine, state, amp)
        datasets.append((fc, ff))

    rows = []
    checks = []
    worst_ratio = 0.0
    for i, (fc, ff) in enumerate(datasets):
        dists = {}
        traces = {}
        for tag, a in (("a1", a1), ("a2", a2)):
            uf, rep = solve_semilinear(fine, a, ff)
            if not rep.converged:
                raise AssertionFailure(f"solve failed on data {i} for {tag}")
            traces[tag] = dn_map(fine, uf)
        dist = dn_distance(traces["a1"], traces["a2"], "sup")
        # two-grid discretization error estimate on the shared coarse nodes
        uc, rep = solve_semilinear(coarse, a1, fc)
        if not rep.converged:
            raise AssertionFailure(f"coarse solve failed on data {i}")
        tc = dn_map(coarse, uc)
        err_est = _coarse_trace_gap(coarse, fine, tc, traces["a1"])
        rows.append((i, float(amps[i]), dist, err_est))
        worst_ratio = max(worst_ratio, dist / max(err_est, 1e-300))
    checks.append(Check("dn-distance-over-error-estimate", worst_ratio,
                        cfg.tol("dn_ratio", 10.0), "<=", "oracle"))

    # the pair genuinely differs above the threshold
    box = threshold + 2.0 * float(cfg.get("width", 1.0))
    xs = np.linspace(0, coarse.lx, 41)
    ys = np.linspace(0, coarse.ly, 41)
    X, Y = np.meshgrid(xs, ys)
    sep = max(float(np.max(np.abs(a2.eval(X.ravel(), Y.ravel(), mu)
                                  - a1.eval(X.ravel(), Y.ravel(), mu))))
              for mu in (-box, box))
    checks.append(Check("nonlinearity-separation", sep,
                        cfg.tol("separation", 0.99), ">=", "formula"))
    return RunArtifact("counterexample", checks,
                       {"sweep": (("index", "amplitude", "dn_distance", "error_estimate"),
                                  rows)})


def _trig_from_state(grid: Grid, state: np.ndarray, amplitude: float) -> np.ndarray:
    from .boundarydata import trig_data
    f = trig_data(grid, state[:4], state[4:])
    peak = float(np.max(np.abs(f)))
    return f * (amplitude / peak) if peak > 0 else constant_data(grid, amplitude)


def _coarse_trace_gap(coarse: Grid, fine: Grid, tc, tf) -> float:
    """Sup gap between coarse and fine DN traces on shared boundary nodes."""
    cs = coarse.boundary_arclength()[coarse.noncorner_slots()]
    fs = fine.boundary_arclength()[fine.noncorner_slots()]
    order_f = np.argsort(fs)
    fs_sorted = fs[order_f]
    vals_f = tf.values[order_f]
    gap = 0.0
    for s, v in zip(cs, tc.values):
        j = int(np.searchsorted(fs_sorted, s))
        j = min(max(j, 0), fs_sorted.size - 1)
        if abs(fs_sorted[j] - s) > 1e-9 and j > 0 and abs(fs_sorted[j - 1] - s) < abs(fs_sorted[j] - s):
            j -= 1
        gap = max(gap, abs(v - vals_f[j]))
    return gap


def _scenario_rigidity(cfg: ScenarioConfig) -> RunArtifact:
    grid = _build_grid(cfg)
    mus = cfg.get("mus", [-1.0, -0.5, 0.5, 1.0])
    checks = []
    tables = {}
    tol = cfg.tol("vanish", 1e-10)

    zero = Polynomial(())
    rep0 = rigidity_probe_t1(grid, zero, 1.0, mus)
    worst_flux = max(abs(r.flux_mismatch) for r in rep0.rows)
    worst_sup = max(r.sup_a for r in rep0.rows)
    checks.append(Check("zero-case-flux", worst_flux, tol, "<=", "exact"))
    checks.append(Check("zero-case-sup-a", worst_sup, tol, "<=", "exact"))

    a = parse_nonlinearity(cfg.get("nonlinearity", {
        "family": "polynomial",
        "terms": [{"power": 3, "coefficient": {"name": "constant", "value": 1.0}}]}))
    rep = rigidity_probe_t1(grid, a, 1.0, mus)
    pos = [r for r in rep.rows if r.mu == 1.0]
    if pos:
        checks.append(Check("cubic-flux-at-mu-1", pos[0].flux_mismatch,
                            cfg.tol("positive_flux", 1e-6), ">", "oracle"))
    signs_ok = all(r.sign_constant for r in rep.rows)
    checks.append(Check("sign-constancy", 1.0 if signs_ok else 0.0, 1.0, ">=", "exact"))
    worst_exact = max(abs(r.flux_mismatch - r.volume_integral) /
                      max(abs(r.volume_integral), 1.0) for r in rep.rows)
    checks.append(Check("flux-equals-volume", worst_exact, tol, "<=", "exact"))
    for tag, r in (("zero", rep0), ("probe", rep)):
        tables[f"rigidity_{tag}"] = (
            ("mu", "flux", "volume", "sup_a", "sign_constant", "y_range"),
            [(row.mu, row.flux_mismatch, row.volume_integral, row.sup_a,
              int(row.sign_constant), row.y_range) for row in r.rows])
    return RunArtifact("rigidity-t1", checks, tables)


def _scenario_cascade(cfg: ScenarioConfig) -> RunArtifact:
    q_expr = parse_spatial(cfg.get("q", {"name": "gaussian-bump", "amplitude": 1.0,
                                         "cx": 0.5, "cy": 0.5, "sigma": 0.12}))
    f_coeffs = [float(c) for c in cfg.get("f_coeffs", [0.0, 0.0, 0.0, 1.0])]
    m = int(cfg.get("order", 3))
    step = float(cfg.get("step", 0.05))
    grids = [int(n) for n in cfg.get("grids", [65, 129])]
    a = SeparatedAnalytic(q_expr, tuple(f_coeffs))
    f_derivs = [a.f_deriv_at_zero(k) for k in range(2 * m)]

    errs = []
    rel_flux = []
    for ngrid, s in zip(grids, (step, step / 2.0)):
        grid = _build_grid(cfg, ngrid)
        x, y = grid.coords()
        q = q_expr(x, y)
        sol = cascade_solve(grid, q, f_derivs, m)
        deriv = dn_amplitude_derivative(grid, a, m, step=s)
        cascade_trace = dn_map(grid, sol.v[m]).values
        errs.append(float(np.max(np.abs(deriv - cascade_trace))))
        fact_m = float(np.prod(np.arange(1, m + 1)))
        target = float(np.sum(q[grid.interior]) * grid.hx * grid.hy) \
            * f_derivs[m] / fact_m
        flux = discrete_flux(grid, sol.v[m])
        rel_flux.append(abs(flux - target) / max(abs(target), 1e-300))
    checks = [
        Check("fd-vs-cascade-coarse", errs[0], cfg.tol("cascade_coarse", 1e-3),
              "<=", "oracle"),
        Check("fd-vs-cascade-halved", errs[1],
              cfg.tol("halving_factor", 0.5) * errs[0] + 1e-12, "<=", "oracle"),
        Check("flux-identity-relative", max(rel_flux), cfg.tol("flux_rel", 1e-8),
              "<=", "exact"),
    ]
    rows = [(int(n), e, r) for n, e, r in zip(grids, errs, rel_flux)]
    return RunArtifact("cascade", checks,
                       {"cascade": (("n", "fd_vs_cascade_sup", "flux_rel_err"), rows)})


def _scenario_second_linearization(cfg: ScenarioConfig) -> RunArtifact:
    a = parse_nonlinearity(cfg.get("nonlinearity", {
        "family": "separated-analytic",
        "q": {"name": "gaussian-bump", "amplitude": 1.0, "cx": 0.5, "cy": 0.5,
              "sigma": 0.15},
        "f_coeffs": [0.0, 0.0, 1.0, 0.0, 1.0]}))
    t = float(cfg.get("t", 0.1))
    grids = [int(n) for n in cfg.get("grids", [65, 129])]
    rows = []
    mismatches = []
    for ngrid in grids:
        grid = _build_grid(cfg, ngrid)
        _, rep = second_linearization(grid, a, 1.0, 1.0, t)
        rows.append((ngrid, rep.volume_integral, rep.boundary_pairing,
                     rep.mismatch, rep.pairing_exact))
        mismatches.append(rep.mismatch)
    h = 1.0 / (grids[-1] - 1)
    checks = [
        Check("pairing-mismatch-h2", mismatches[-1],
              cfg.tol("pairing_c", 1.0) * h**2, "<=", "oracle"),
        Check("pairing-mismatch-order", mismatches[1],
              0.5 * mismatches[0] + 1e-14, "<=", "oracle"),
    ]
    # linear nonlinearity: second-order response is zero
    grid = _build_grid(cfg, grids[0])
    _, rep_lin = second_linearization(grid, Linear(constant(1.0)), 1.0, 1.0, t)
    checks.append(Check("linear-second-order-zero", rep_lin.v2_sup,
                        cfg.tol("linear_zero", 1e-10), "<=", "exact"))
    return RunArtifact("second-linearization", checks,
                       {"pairing": (("n", "volume", "pairing", "mismatch",
                                     "pairing_exact"), rows)})


def _scenario_wellposedness(cfg: ScenarioConfig) -> RunArtifact:
    grid = _build_grid(cfg)
    a = parse_nonlinearity(cfg.get("nonlinearity", {
        "family": "polynomial",
        "terms": [{"power": 3, "coefficient": {"name": "constant", "value": 1.0}}]}))
    ts = [float(t) for t in cfg.get("ts", np.geomspace(1e-3, 1e-1, 7))]
    rng = np.random.default_rng(cfg.seed)
    f0 = random_trig_data(grid, rng, 1.0)
    ratios = []
    for t in ts:
        u, rep = solve_semilinear(grid, a, t * f0)
        if not rep.converged:
            raise AssertionFailure(f"solve failed at t = {t}")
        ratios.append(float(np.max(np.abs(u))) / (t * float(np.max(np.abs(f0)))))
    spread = (max(ratios) - min(ratios)) / min(ratios)
    tmax = float(cfg.get("tmax", 100.0))
    steps = int(cfg.get("steps", 5))
    radius = estimate_wellposedness_radius(grid, a, f0, tmax, steps)
    checks = [
        Check("ratio-spread", spread, cfg.tol("spread", 0.10), "<=", "oracle"),
        Check("monotone-reaches-tmax", radius, tmax, ">=", "formula"),
    ]
    rows = [(t, r) for t, r in zip(ts, ratios)]
    return RunArtifact("wellposedness", checks,
                       {"ratios": (("t", "sup_ratio"), rows)})


def _scenario_envelope(cfg: ScenarioConfig) -> RunArtifact:
    grid = _build_grid(cfg)
    a = parse_nonlinearity(cfg.get("nonlinearity", {
        "family": "polynomial",
        "terms": [{"power": 3, "coefficient": {"name": "constant", "value": 1.0}}]}))
    point = cfg.get("point", [0.5, 0.5])
    lambdas = [float(x) for x in cfg.get("lambdas", [1.0, 10.0, 100.0, 1e3, 1e4])]
    delta = float(cfg.get("delta", 1.0))
    epsilon = float(cfg.get("epsilon", 2.0))
    rep = estimate_envelope(grid, a, point, lambdas,
                            int(cfg.get("random_count", 8)), cfg.seed,
                            growth=(delta, epsilon))
    checks = [
        Check("upper-below-ball-bound", rep.upper,
              rep.ball_bound + cfg.tol("bound_slack", 1e-6), "<=", "formula"),
        Check("lower-above-ball-bound", rep.lower,
              -rep.ball_bound - cfg.tol("bound_slack", 1e-6), ">=", "formula"),
        Check("random-within-envelope", 1.0 if rep.random_within else 0.0,
              1.0, ">=", "oracle"),
    ]
    rows = [(lam, lo, hi) for lam, lo, hi in rep.per_lambda]
    return RunArtifact("envelope", checks,
                       {"envelope": (("lambda", "at_minus", "at_plus"), rows)})


_DISPATCH = {
    "convergence": _scenario_convergence,
    "saturation": _scenario_saturation,
    "counterexample": _scenario_counterexample,
    "rigidity-t1": _scenario_rigidity,
    "cascade": _scenario_cascade,
    "second-linearization": _scenario_second_linearization,
    "wellposedness": _scenario_wellposedness,
    "envelope": _scenario_envelope,
}


def run_scenario(cfg: ScenarioConfig, out_dir=None) -> RunArtifact:
    art = _DISPATCH[cfg.scenario](cfg)
    write_artifact(art, cfg, out_dir if out_dir is not None else cfg.out)
    return art
