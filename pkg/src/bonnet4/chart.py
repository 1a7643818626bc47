"""Finite differences on rectangular parameter grids.

Fields are numpy arrays whose first two axes are (v, u), i.e. shape
``(nv, nu, ...)``; flattening in C order gives node index ``iv * nu + iu``.
All stencils are second order: central in the interior, wrapped on periodic
directions and one-sided at open edges.
"""
import csv
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .config import DEFAULT
from .errors import NonIsothermalError


@dataclass(frozen=True)
class ChartGrid:
    u0: float
    u1: float
    v0: float
    v1: float
    nu: int
    nv: int
    periodic_u: bool = False
    periodic_v: bool = False

    def __post_init__(self):
        if self.nu < 8 or self.nv < 8:
            raise ValueError(f"grid needs at least 8 nodes per direction, got {self.nu}x{self.nv}")
        if not (self.u1 > self.u0 and self.v1 > self.v0):
            raise ValueError("grid bounds must be increasing")

    @property
    def hu(self):
        return (self.u1 - self.u0) / (self.nu if self.periodic_u else self.nu - 1)

    @property
    def hv(self):
        return (self.v1 - self.v0) / (self.nv if self.periodic_v else self.nv - 1)

    @property
    def closed(self):
        return self.periodic_u and self.periodic_v

    @property
    def shape(self):
        return (self.nv, self.nu)

    @cached_property
    def u(self):
        return self.u0 + self.hu * np.arange(self.nu)

    @cached_property
    def v(self):
        return self.v0 + self.hv * np.arange(self.nv)

    def mesh(self):
        """Coordinate arrays U, V of shape (nv, nu)."""
        return np.meshgrid(self.u, self.v)

    def refined(self, factor=2):
        """Same domain with ``factor`` times the spacing resolution."""
        nu = self.nu * factor if self.periodic_u else (self.nu - 1) * factor + 1
        nv = self.nv * factor if self.periodic_v else (self.nv - 1) * factor + 1
        return ChartGrid(self.u0, self.u1, self.v0, self.v1, nu, nv, self.periodic_u, self.periodic_v)

    def trusted(self, margin=DEFAULT.trust_margin):
        """Boolean mask of nodes at least ``margin`` nodes away from open edges."""
        mask = np.ones(self.shape, dtype=bool)
        if not self.periodic_u:
            mask[:, :margin] = False
            mask[:, -margin:] = False
        if not self.periodic_v:
            mask[:margin, :] = False
            mask[-margin:, :] = False
        return mask

    def region(self, box):
        """Mask of nodes inside the coordinate box (u_lo, u_hi, v_lo, v_hi)."""
        U, V = self.mesh()
        eps = 1e-12 * max(abs(self.u1 - self.u0), abs(self.v1 - self.v0))
        return ((U >= box[0] - eps) & (U <= box[1] + eps)
                & (V >= box[2] - eps) & (V <= box[3] + eps))

    def to_dict(self):
        return {"u0": self.u0, "u1": self.u1, "v0": self.v0, "v1": self.v1,
                "nu": self.nu, "nv": self.nv,
                "periodic_u": self.periodic_u, "periodic_v": self.periodic_v}


def _diff1(f, h, axis, periodic):
    f = np.moveaxis(np.asarray(f), axis, 0)
    if periodic:
        d = (np.roll(f, -1, axis=0) - np.roll(f, 1, axis=0)) / (2 * h)
    else:
        d = np.empty_like(f)
        d[1:-1] = (f[2:] - f[:-2]) / (2 * h)
        d[0] = (-3 * f[0] + 4 * f[1] - f[2]) / (2 * h)
        d[-1] = (3 * f[-1] - 4 * f[-2] + f[-3]) / (2 * h)
    return np.moveaxis(d, 0, axis)


def _diff2(f, h, axis, periodic):
    f = np.moveaxis(np.asarray(f), axis, 0)
    if periodic:
        d = (np.roll(f, -1, axis=0) - 2 * f + np.roll(f, 1, axis=0)) / h**2
    else:
        d = np.empty_like(f)
        d[1:-1] = (f[2:] - 2 * f[1:-1] + f[:-2]) / h**2
        d[0] = (2 * f[0] - 5 * f[1] + 4 * f[2] - f[3]) / h**2
        d[-1] = (2 * f[-1] - 5 * f[-2] + 4 * f[-3] - f[-4]) / h**2
    return np.moveaxis(d, 0, axis)


def d_u(f, grid):
    return _diff1(f, grid.hu, 1, grid.periodic_u)


def d_v(f, grid):
    return _diff1(f, grid.hv, 0, grid.periodic_v)


def d_uu(f, grid):
    return _diff2(f, grid.hu, 1, grid.periodic_u)


def d_vv(f, grid):
    return _diff2(f, grid.hv, 0, grid.periodic_v)


def wirtinger(f, grid):
    """Return (df/dz, df/dzbar) with d/dz = (d_u - i d_v)/2."""
    fu = d_u(f, grid)
    fv = d_v(f, grid)
    return 0.5 * (fu - 1j * fv), 0.5 * (fu + 1j * fv)


def dz(f, grid):
    return wirtinger(f, grid)[0]


def dzbar(f, grid):
    return wirtinger(f, grid)[1]


def laplace_beltrami(f, lam, grid):
    """(f_uu + f_vv) / lambda^2 with three-point stencils."""
    lam2 = np.asarray(lam) ** 2
    lap = d_uu(f, grid) + d_vv(f, grid)
    if lap.ndim > lam2.ndim:
        lam2 = lam2.reshape(lam2.shape + (1,) * (lap.ndim - lam2.ndim))
    return lap / lam2


def quadrature_weights(grid):
    """Per-node weights: midpoint on periodic directions, trapezoid on open ones."""
    wu = np.full(grid.nu, grid.hu)
    wv = np.full(grid.nv, grid.hv)
    if not grid.periodic_u:
        wu[[0, -1]] *= 0.5
    if not grid.periodic_v:
        wv[[0, -1]] *= 0.5
    return np.outer(wv, wu)


def surface_integral(f, lam, grid, weight=None):
    """Integral of f dA = sum f lambda^2 w over the grid.

    ``weight`` is an optional partition-of-unity factor per node.
    """
    w = quadrature_weights(grid) * np.asarray(lam) ** 2
    if weight is not None:
        w = w * weight
    return float(np.sum(np.asarray(f) * w))


def validate_isothermal(fu, fv, grid=None, tol=DEFAULT.isothermal, raise_on_fail=True):
    """Check |f_u|^2 = |f_v|^2 and <f_u, f_v> = 0 relative to lambda^2.

    Returns (max |E - G| / lambda^2, max |F| / lambda^2).
    """
    E = np.sum(fu * fu, axis=-1)
    G = np.sum(fv * fv, axis=-1)
    F = np.sum(fu * fv, axis=-1)
    lam2 = np.maximum(E, 1e-300)
    eg = np.abs(E - G) / lam2
    ff = np.abs(F) / lam2
    meg, mf = float(np.max(eg)), float(np.max(ff))
    if raise_on_fail and max(meg, mf) > tol:
        which = eg if meg >= mf else ff
        iv, iu = np.unravel_index(int(np.argmax(which)), which.shape)
        where = f"node iu={iu}, iv={iv}"
        if grid is not None:
            where += f" (u={grid.u[iu]:.6g}, v={grid.v[iv]:.6g})"
        raise NonIsothermalError(
            f"coordinates are not isothermal: max|E-G|/lambda^2 = {meg:.3e}, "
            f"max|F|/lambda^2 = {mf:.3e} > {tol:g} at {where}",
            node=(int(iu), int(iv)))
    return meg, mf


def export_csv(path, grid, columns):
    """Write per-node fields as CSV with header ``iu,iv,u,v,<names...>``.

    ``columns`` maps a name to an array of shape (nv, nu) or (nv, nu, k); the
    latter expands to ``name_0 .. name_{k-1}``. Complex arrays are split into
    ``_re`` / ``_im`` columns.
    """
    names, data = [], []
    for name, arr in columns.items():
        arr = np.asarray(arr)
        arr = arr.reshape(grid.nv, grid.nu, -1)
        parts = []
        if np.iscomplexobj(arr):
            parts = [(name + "_re", arr.real), (name + "_im", arr.imag)]
        else:
            parts = [(name, arr)]
        for pname, parr in parts:
            k = parr.shape[-1]
            for j in range(k):
                names.append(pname if k == 1 else f"{pname}_{j}")
                data.append(parr[..., j].ravel())
    U, V = grid.mesh()
    IU, IV = np.meshgrid(np.arange(grid.nu), np.arange(grid.nv))
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["iu", "iv", "u", "v"] + names)
        for n in range(grid.nu * grid.nv):
            row = [int(IU.flat[n]), int(IV.flat[n]), repr(float(U.flat[n])), repr(float(V.flat[n]))]
            row += [repr(float(col[n])) for col in data]
            w.writerow(row)
