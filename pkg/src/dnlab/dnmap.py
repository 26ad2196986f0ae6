"""Discrete Dirichlet-to-Neumann traces and distances between them.

The outward normal derivative at each non-corner boundary node is estimated
with the second-order one-sided formula (3 u_b - 4 u_1 + u_2) / (2 h) along
the inward normal line, keeping the trace error commensurate with the O(h^2)
interior scheme.  Corners are excluded: their normal is undefined and they
carry no flux faces.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

from .grid import Grid, GridError, LEFT, RIGHT, BOTTOM, TOP


@dataclass(frozen=True)
class DNTrace:
    """Normal-derivative samples at non-corner boundary nodes."""

    grid: Grid
    values: np.ndarray          # one per non-corner boundary node
    data: np.ndarray            # the Dirichlet data (all boundary nodes)
    first_order: bool = False   # fallback formula used (grid too small)

    def nodes(self) -> np.ndarray:
        return self.grid.boundary[self.grid.noncorner_slots()]

    def face_measures(self) -> np.ndarray:
        side = self.grid.boundary_side[self.grid.noncorner_slots()]
        return np.where((side == LEFT) | (side == RIGHT), self.grid.hy, self.grid.hx)

    def to_csv(self) -> str:
        """CSV rows: x, y, dirichlet value, normal derivative."""
        nodes = self.nodes()
        slots = self.grid.noncorner_slots()
        buf = io.StringIO()
        buf.write("x,y,f,dn\n")
        xs, ys = self.grid.node_x(nodes), self.grid.node_y(nodes)
        for x, y, f, v in zip(xs, ys, self.data[slots], self.values):
            buf.write(f"{x:.17g},{y:.17g},{f:.17g},{v:.17g}\n")
        return buf.getvalue()


def dn_map(grid: Grid, u: np.ndarray) -> DNTrace:
    """Outward normal derivative estimate of a solved field."""
    u = grid.check_field(u)
    slots = grid.noncorner_slots()
    nodes = grid.boundary[slots]
    side = grid.boundary_side[slots]
    values = np.empty(slots.size)
    first_order = grid.nx < 4 or grid.ny < 4
    for code, offset, h in ((LEFT, 1, grid.hx), (RIGHT, -1, grid.hx),
                            (BOTTOM, grid.nx, grid.hy), (TOP, -grid.nx, grid.hy)):
        mask = side == code
        b = nodes[mask]
        if first_order:
            values[mask] = (u[b] - u[b + offset]) / h
        else:
            values[mask] = (3.0 * u[b] - 4.0 * u[b + offset] + u[b + 2 * offset]) / (2.0 * h)
    data = np.empty(grid.n_boundary)
    data[:] = u[grid.boundary]
    return DNTrace(grid, values, data, first_order)


def dn_distance(t1: DNTrace, t2: DNTrace, norm: str = "sup") -> float:
    """sup or boundary-weighted l2 distance between two traces on one grid."""
    if t1.grid is not t2.grid and (t1.grid.nx, t1.grid.ny, t1.grid.lx, t1.grid.ly) != \
            (t2.grid.nx, t2.grid.ny, t2.grid.lx, t2.grid.ly):
        raise GridError("traces live on different grids")
    diff = t1.values - t2.values
    if norm == "sup":
        return float(np.max(np.abs(diff))) if diff.size else 0.0
    if norm == "l2":
        return float(np.sqrt(np.sum(diff**2 * t1.face_measures())))
    raise ValueError(f"unknown norm {norm!r}")
