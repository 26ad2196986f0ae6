"""Uniform rectangular grids and the 5-point discrete Laplacian.

Nodes are ordered row-major: node(ix, iy) = iy * nx + ix, with x varying
fastest.  Interior unknowns are the nodes with 0 < ix < nx-1 and
0 < iy < ny-1; everything else is boundary.  Corner nodes carry Dirichlet
data but own no flux faces, which keeps the discrete divergence theorem

    discrete_flux(u) = sum_interior (lap_h u) * hx * hy

an exact telescoping identity for every field u.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

# side codes for non-corner boundary nodes
LEFT, RIGHT, BOTTOM, TOP = 0, 1, 2, 3
CORNER = -1

_SIDE_NAMES = {LEFT: "left", RIGHT: "right", BOTTOM: "bottom", TOP: "top"}


class GridError(ValueError):
    """Invalid grid parameters or a field that does not match its grid."""


@dataclass(frozen=True)
class Grid:
    """Uniform rectangular grid with interior/boundary node classification."""

    nx: int
    ny: int
    lx: float
    ly: float
    hx: float
    hy: float
    interior: np.ndarray        # node indices of interior nodes, row-major
    boundary: np.ndarray        # node indices of boundary nodes, row-major
    interior_pos: np.ndarray    # node -> slot in `interior`, or -1
    boundary_pos: np.ndarray    # node -> slot in `boundary`, or -1
    boundary_side: np.ndarray   # per boundary slot: LEFT/RIGHT/BOTTOM/TOP or CORNER

    @property
    def n_nodes(self) -> int:
        return self.nx * self.ny

    @property
    def n_interior(self) -> int:
        return self.interior.size

    @property
    def n_boundary(self) -> int:
        return self.boundary.size

    def node_x(self, nodes: np.ndarray) -> np.ndarray:
        return (np.asarray(nodes) % self.nx) * self.hx

    def node_y(self, nodes: np.ndarray) -> np.ndarray:
        return (np.asarray(nodes) // self.nx) * self.hy

    def coords(self) -> tuple[np.ndarray, np.ndarray]:
        """(x, y) arrays over all nodes in row-major order."""
        nodes = np.arange(self.n_nodes)
        return self.node_x(nodes), self.node_y(nodes)

    def check_field(self, u: np.ndarray) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        if u.shape != (self.n_nodes,):
            raise GridError(
                f"field has {u.shape}, grid has {self.n_nodes} nodes")
        return u

    def full_field(self, value) -> np.ndarray:
        """Promote a scalar or array to a full node field."""
        if np.isscalar(value):
            return np.full(self.n_nodes, float(value))
        return self.check_field(value)

    def boundary_field(self, value) -> np.ndarray:
        """Promote a scalar or array to boundary-indexed Dirichlet data."""
        if np.isscalar(value):
            return np.full(self.n_boundary, float(value))
        f = np.asarray(value, dtype=float)
        if f.shape != (self.n_boundary,):
            raise GridError(
                f"boundary data has {f.shape}, grid has {self.n_boundary} boundary nodes")
        return f

    def embed_boundary(self, f) -> np.ndarray:
        """Full field that is f on the boundary and 0 inside."""
        out = np.zeros(self.n_nodes)
        out[self.boundary] = self.boundary_field(f)
        return out

    def noncorner_slots(self) -> np.ndarray:
        """Boundary slots (indices into `boundary`) that are not corners."""
        return np.flatnonzero(self.boundary_side != CORNER)

    def boundary_arclength(self) -> np.ndarray:
        """Perimeter coordinate per boundary node, counterclockwise from (0,0)."""
        ix = self.boundary % self.nx
        iy = self.boundary // self.nx
        x, y = ix * self.hx, iy * self.hy
        s = np.empty(self.n_boundary)
        bottom = iy == 0
        right = (ix == self.nx - 1) & (iy > 0)
        top = (iy == self.ny - 1) & (ix < self.nx - 1) & ~right
        left = (ix == 0) & (iy > 0) & (iy < self.ny - 1)
        s[bottom] = x[bottom]
        s[right] = self.lx + y[right]
        s[top] = self.lx + self.ly + (self.lx - x[top])
        s[left] = 2 * self.lx + self.ly + (self.ly - y[left])
        return s

    def quad_weights(self) -> np.ndarray:
        """Trapezoid-consistent quadrature weights over all nodes."""
        wx = np.full(self.nx, self.hx)
        wx[0] = wx[-1] = self.hx / 2
        wy = np.full(self.ny, self.hy)
        wy[0] = wy[-1] = self.hy / 2
        return np.outer(wy, wx).ravel()


def build_rectangle(nx: int, ny: int, lx: float = 1.0, ly: float = 1.0) -> Grid:
    """Build a uniform rectangular grid with row-major node ordering."""
    if nx < 3 or ny < 3:
        raise GridError(f"need nx, ny >= 3, got ({nx}, {ny})")
    if lx <= 0 or ly <= 0:
        raise GridError(f"need positive side lengths, got ({lx}, {ly})")
    hx = lx / (nx - 1)
    hy = ly / (ny - 1)

    ix = np.arange(nx * ny) % nx
    iy = np.arange(nx * ny) // nx
    is_interior = (ix > 0) & (ix < nx - 1) & (iy > 0) & (iy < ny - 1)

    interior = np.flatnonzero(is_interior)
    boundary = np.flatnonzero(~is_interior)

    interior_pos = np.full(nx * ny, -1, dtype=np.int64)
    interior_pos[interior] = np.arange(interior.size)
    boundary_pos = np.full(nx * ny, -1, dtype=np.int64)
    boundary_pos[boundary] = np.arange(boundary.size)

    bx, by = ix[boundary], iy[boundary]
    side = np.full(boundary.size, CORNER, dtype=np.int64)
    on_x_edge = (bx == 0) | (bx == nx - 1)
    on_y_edge = (by == 0) | (by == ny - 1)
    noncorner = ~(on_x_edge & on_y_edge)
    side[noncorner & (bx == 0)] = LEFT
    side[noncorner & (bx == nx - 1)] = RIGHT
    side[noncorner & (by == 0)] = BOTTOM
    side[noncorner & (by == ny - 1)] = TOP

    return Grid(nx, ny, float(lx), float(ly), hx, hy,
                interior, boundary, interior_pos, boundary_pos, side)


@dataclass(frozen=True)
class LinearOperator:
    """Sparse interior block of (-lap_h + q) plus boundary-coupling columns.

    apply(u) evaluates (-lap_h u + q u) at interior nodes of the full field u.
    For q >= 0 the interior block `a_int` is symmetric positive definite.
    """

    grid: Grid
    a_int: sp.csr_matrix   # n_interior x n_interior
    b_coupling: sp.csr_matrix  # n_interior x n_boundary

    def apply(self, u: np.ndarray) -> np.ndarray:
        u = self.grid.check_field(u)
        return self.a_int @ u[self.grid.interior] + self.b_coupling @ u[self.grid.boundary]


def assemble_operator(grid: Grid, q) -> LinearOperator:
    """Assemble (-lap_h + q) on interior unknowns with the 5-point stencil."""
    q = grid.full_field(q)
    n_int = grid.n_interior
    rows, cols, vals = [], [], []
    brows, bcols, bvals = [], [], []

    slots = np.arange(n_int)
    nodes = grid.interior
    diag = 2.0 / grid.hx**2 + 2.0 / grid.hy**2 + q[nodes]
    rows.append(slots)
    cols.append(slots)
    vals.append(diag)

    for offset, coef in ((1, -1.0 / grid.hx**2), (-1, -1.0 / grid.hx**2),
                         (grid.nx, -1.0 / grid.hy**2), (-grid.nx, -1.0 / grid.hy**2)):
        nb = nodes + offset
        nb_int = grid.interior_pos[nb]
        mask = nb_int >= 0
        rows.append(slots[mask])
        cols.append(nb_int[mask])
        vals.append(np.full(mask.sum(), coef))
        bmask = ~mask
        brows.append(slots[bmask])
        bcols.append(grid.boundary_pos[nb[bmask]])
        bvals.append(np.full(bmask.sum(), coef))

    a_int = sp.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(n_int, n_int))
    b = sp.csr_matrix(
        (np.concatenate(bvals), (np.concatenate(brows), np.concatenate(bcols))),
        shape=(n_int, grid.n_boundary))
    return LinearOperator(grid, a_int, b)


def laplacian_interior(grid: Grid, u: np.ndarray) -> np.ndarray:
    """5-point lap_h u at interior nodes (array over interior slots)."""
    u = grid.check_field(u)
    nodes = grid.interior
    return ((u[nodes + 1] - 2 * u[nodes] + u[nodes - 1]) / grid.hx**2
            + (u[nodes + grid.nx] - 2 * u[nodes] + u[nodes - grid.nx]) / grid.hy**2)


def discrete_flux(grid: Grid, u: np.ndarray) -> float:
    """Discrete outward flux: sum over boundary faces of (u_b - u_in)/h * face.

    Satisfies discrete_flux(u) = sum_interior (lap_h u) hx hy exactly.
    Corners carry no faces.
    """
    u = grid.check_field(u)
    b = grid.boundary
    side = grid.boundary_side
    total = 0.0
    for code, offset, hn, ht in ((LEFT, 1, grid.hx, grid.hy),
                                 (RIGHT, -1, grid.hx, grid.hy),
                                 (BOTTOM, grid.nx, grid.hy, grid.hx),
                                 (TOP, -grid.nx, grid.hy, grid.hx)):
        nodes = b[side == code]
        total += float(np.sum((u[nodes] - u[nodes + offset]) / hn) * ht)
    return total
