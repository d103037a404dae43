"""P1 finite elements on (0,1) and (0,1)^2 with homogeneous Dirichlet conditions."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

# Gauss-Legendre on the reference interval [0, 1]
_GAUSS1 = (np.array([0.5 - 0.5 / np.sqrt(3), 0.5 + 0.5 / np.sqrt(3)]), np.array([0.5, 0.5]))
# edge-midpoint rule on the reference triangle (degree 2), barycentric points
_TRI3 = (np.array([[0.5, 0.5, 0.0], [0.0, 0.5, 0.5], [0.5, 0.0, 0.5]]), np.full(3, 1.0 / 3.0))


@dataclass(frozen=True)
class PointMass:
    """Dirac measure at ``x0``."""
    x0: tuple


@dataclass(frozen=True)
class Indicator:
    """Characteristic function of the open box ``lower < x < upper``."""
    lower: tuple
    upper: tuple


@dataclass(frozen=True, eq=False)
class SpatialDiscretization:
    dim: int
    h: float
    n_dof: int
    mass: sp.csr_matrix
    stiffness: sp.csr_matrix
    node_coords: np.ndarray
    # full-mesh data used for projections
    vertices: np.ndarray = field(repr=False)
    elements: np.ndarray = field(repr=False)
    dof_of_vertex: np.ndarray = field(repr=False)
    _mass_lu: list = field(default_factory=list, repr=False)

    @property
    def n_cells(self) -> int:
        return int(round(1.0 / self.h))

    def mass_norm(self, e) -> float:
        e = np.asarray(e)
        return float(np.sqrt(abs(e @ (self.mass @ e))))

    def mass_solve(self, rhs):
        if not self._mass_lu:
            self._mass_lu.append(spla.splu(self.mass.tocsc()))
        return self._mass_lu[0].solve(np.asarray(rhs, dtype=float))

    def is_tridiagonal(self) -> bool:
        return self.dim == 1


def _cells(h: float) -> int:
    n = int(round(1.0 / h))
    if n < 2 or abs(n * h - 1.0) > 1e-9:
        raise ValueError(f"mesh size h must satisfy 1/h = integer >= 2, got h={h}")
    return n


def assemble(dim: int, h: float) -> SpatialDiscretization:
    """Assemble consistent mass and stiffness matrices on the uniform mesh."""
    n = _cells(h)
    h = 1.0 / n
    if dim == 1:
        return _assemble_1d(n, h)
    if dim == 2:
        return _assemble_2d(n, h)
    raise ValueError(f"dim must be 1 or 2, got {dim}")


def _assemble_1d(n: int, h: float) -> SpatialDiscretization:
    m = n - 1
    ones = np.ones(m)
    off = np.ones(m - 1)
    stiff = sp.diags([-off / h, 2 * ones / h, -off / h], [-1, 0, 1], format="csr")
    mass = sp.diags([off * h / 6, 2 * ones * h / 3, off * h / 6], [-1, 0, 1], format="csr")
    verts = (np.arange(n + 1) * h)[:, None]
    elems = np.stack([np.arange(n), np.arange(1, n + 1)], axis=1)
    dof = np.arange(-1, n)
    dof[-1] = -1
    return SpatialDiscretization(1, h, m, mass, stiff, verts[1:-1].copy(), verts, elems, dof)


def _assemble_2d(n: int, h: float) -> SpatialDiscretization:
    ii, jj = np.meshgrid(np.arange(n + 1), np.arange(n + 1), indexing="xy")
    verts = np.stack([ii.ravel() * h, jj.ravel() * h], axis=1)

    def vid(i, j):
        return j * (n + 1) + i

    ci, cj = np.meshgrid(np.arange(n), np.arange(n), indexing="xy")
    ci, cj = ci.ravel(), cj.ravel()
    lower = np.stack([vid(ci, cj), vid(ci + 1, cj), vid(ci + 1, cj + 1)], axis=1)
    upper = np.stack([vid(ci, cj), vid(ci + 1, cj + 1), vid(ci, cj + 1)], axis=1)
    elems = np.concatenate([lower, upper])

    p = verts[elems]  # (E, 3, 2)
    e1 = p[:, 1] - p[:, 0]
    e2 = p[:, 2] - p[:, 0]
    det = e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0]
    area = 0.5 * np.abs(det)
    # gradients of barycentric coordinates
    grads = np.empty((len(elems), 3, 2))
    grads[:, 1] = np.stack([e2[:, 1], -e2[:, 0]], axis=1) / det[:, None]
    grads[:, 2] = np.stack([-e1[:, 1], e1[:, 0]], axis=1) / det[:, None]
    grads[:, 0] = -grads[:, 1] - grads[:, 2]
    k_loc = area[:, None, None] * np.einsum("eid,ejd->eij", grads, grads)
    m_ref = (np.ones((3, 3)) + np.eye(3)) / 12.0
    m_loc = area[:, None, None] * m_ref

    dof = -np.ones(len(verts), dtype=int)
    interior = (ii.ravel() > 0) & (ii.ravel() < n) & (jj.ravel() > 0) & (jj.ravel() < n)
    dof[interior] = np.arange(interior.sum())
    m = int(interior.sum())

    rows = np.repeat(dof[elems], 3, axis=1).ravel()
    cols = np.tile(dof[elems], (1, 3)).ravel()
    keep = (rows >= 0) & (cols >= 0)
    stiff = sp.coo_matrix((k_loc.ravel()[keep], (rows[keep], cols[keep])), shape=(m, m)).tocsr()
    mass = sp.coo_matrix((m_loc.ravel()[keep], (rows[keep], cols[keep])), shape=(m, m)).tocsr()
    stiff.eliminate_zeros()
    return SpatialDiscretization(2, h, m, mass, stiff, verts[interior].copy(), verts, elems, dof)


# ---------------------------------------------------------------- projections

def _scatter(disc: SpatialDiscretization, local: np.ndarray) -> np.ndarray:
    """Sum element contributions ``local[e, a]`` into interior DOFs."""
    ids = disc.dof_of_vertex[disc.elements]
    keep = ids >= 0
    return np.bincount(ids[keep], weights=local[keep], minlength=disc.n_dof)


def _quad_points(disc: SpatialDiscretization):
    """Quadrature points (E, Q, dim), weights (E, Q) and shape values (Q, nv)."""
    p = disc.vertices[disc.elements]
    if disc.dim == 1:
        xi, wq = _GAUSS1
        shape = np.stack([1 - xi, xi], axis=1)
        pts = p[:, 0:1, :] + xi[None, :, None] * (p[:, 1:2, :] - p[:, 0:1, :])
        return pts, np.outer(np.full(len(p), disc.h), wq), shape
    bary, wq = _TRI3
    pts = np.einsum("qa,ead->eqd", bary, p)
    area = 0.5 * disc.h**2
    return pts, np.outer(np.full(len(p), area), wq), bary


def _function_rhs(disc, fn) -> np.ndarray:
    pts, wts, shape = _quad_points(disc)
    e, q, d = pts.shape
    vals = np.asarray(fn(pts.reshape(e * q, d)), dtype=float)
    vals = np.broadcast_to(vals, (e * q,)).reshape(e, q)
    local = np.einsum("eq,eq,qa->ea", vals, wts, shape)
    return _scatter(disc, local)


def _point_rhs(disc, x0) -> np.ndarray:
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    if x0.shape != (disc.dim,) or np.any(x0 < 0) or np.any(x0 > 1):
        raise ValueError(f"point mass location {tuple(x0)} lies outside the domain")
    n = disc.n_cells
    rhs = np.zeros(disc.n_dof)
    if disc.dim == 1:
        e = min(int(np.floor(x0[0] * n)), n - 1)
        lam = x0[0] * n - e
        vals = np.array([1 - lam, lam])
        elem = disc.elements[e]
    else:
        i = min(int(np.floor(x0[0] * n)), n - 1)
        j = min(int(np.floor(x0[1] * n)), n - 1)
        sx, sy = x0[0] * n - i, x0[1] * n - j
        cell = j * n + i
        if sy <= sx:  # lower triangle (i,j),(i+1,j),(i+1,j+1)
            elem = disc.elements[cell]
            vals = np.array([1 - sx, sx - sy, sy])
        else:  # upper triangle (i,j),(i+1,j+1),(i,j+1)
            elem = disc.elements[n * n + cell]
            vals = np.array([1 - sy, sx, sy - sx])
    for a, vtx in enumerate(elem):
        dof = disc.dof_of_vertex[vtx]
        if dof >= 0:
            rhs[dof] += vals[a]
    return rhs


def _clip(poly, axis, bound, keep_above):
    out = []
    m = len(poly)
    for idx in range(m):
        a, b = poly[idx], poly[(idx + 1) % m]
        ina = a[axis] >= bound if keep_above else a[axis] <= bound
        inb = b[axis] >= bound if keep_above else b[axis] <= bound
        if ina:
            out.append(a)
        if ina != inb:
            s = (bound - a[axis]) / (b[axis] - a[axis])
            out.append(a + s * (b - a))
    return out


def _indicator_rhs(disc, box: Indicator) -> np.ndarray:
    lo = np.broadcast_to(np.asarray(box.lower, dtype=float), (disc.dim,))
    hi = np.broadcast_to(np.asarray(box.upper, dtype=float), (disc.dim,))
    p = disc.vertices[disc.elements]
    local = np.zeros(disc.elements.shape)
    if disc.dim == 1:
        a, b = p[:, 0, 0], p[:, 1, 0]
        s = np.clip(lo[0], a, b)
        t = np.clip(hi[0], a, b)
        mid = 0.5 * (s + t)
        lam = (mid - a) / (b - a)
        local = (t - s)[:, None] * np.stack([1 - lam, lam], axis=1)
        return _scatter(disc, local)
    pmin, pmax = p.min(axis=1), p.max(axis=1)
    inside = np.all(pmin >= lo, axis=1) & np.all(pmax <= hi, axis=1)
    outside = np.any(pmax <= lo, axis=1) | np.any(pmin >= hi, axis=1)
    area = 0.5 * disc.h**2
    local[inside] = area / 3.0
    for e in np.nonzero(~inside & ~outside)[0]:
        tri = p[e]
        poly = [tri[0], tri[1], tri[2]]
        for ax in range(2):
            poly = _clip(poly, ax, lo[ax], True) if poly else poly
            poly = _clip(poly, ax, hi[ax], False) if poly else poly
        if len(poly) < 3:
            continue
        t_mat = np.array([[1, 1, 1], tri[:, 0], tri[:, 1]])
        for q in range(1, len(poly) - 1):
            a, b, c = poly[0], poly[q], poly[q + 1]
            sub = 0.5 * abs((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]))
            cen = (a + b + c) / 3.0
            lam = np.linalg.solve(t_mat, np.array([1.0, cen[0], cen[1]]))
            local[e] += sub * lam
    return _scatter(disc, local)


def rhs_vector(disc: SpatialDiscretization, data) -> np.ndarray:
    """Entries ``int data * phi_i`` for a function, :class:`PointMass` or :class:`Indicator`."""
    if isinstance(data, PointMass):
        return _point_rhs(disc, data.x0)
    if isinstance(data, Indicator):
        return _indicator_rhs(disc, data)
    if np.isscalar(data):
        c = float(data)
        return _function_rhs(disc, lambda x: np.full(len(x), c))
    return _function_rhs(disc, data)


def l2_project(disc: SpatialDiscretization, data) -> np.ndarray:
    """Coefficients of the L2 projection of ``data`` onto the P1 space."""
    return disc.mass_solve(rhs_vector(disc, data))


def load_vector(disc: SpatialDiscretization, f, t: float) -> np.ndarray:
    """Galerkin load vector of ``f(x, t)`` at time ``t``; ``x`` has shape (npts, dim)."""
    return _function_rhs(disc, lambda x: f(x, t))


def nodal(disc: SpatialDiscretization, fn) -> np.ndarray:
    """Nodal interpolant of ``fn`` at the interior vertices."""
    return np.asarray(fn(disc.node_coords), dtype=float)
