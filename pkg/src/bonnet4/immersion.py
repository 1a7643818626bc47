"""Sampled immersions, their jets, file I/O and rigid motions."""
import json
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import chart
from .chart import ChartGrid
from .config import DEFAULT
from .errors import GridFormatError, ImmersionDegeneracyError, ParameterError

FORMAT_VERSION = 1
JET_KEYS = ("f", "fu", "fv", "fuu", "fuv", "fvv", "fuuu", "fuuv", "fuvv", "fvvv")


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class ImmersionGrid:
    """A surface sampled on a chart grid.

    ``position`` has shape (nv, nu, ambient_dim). ``provider`` (optional)
    maps coordinate arrays (U, V) to a dict with the keys in JET_KEYS; ``d1``
    and ``d2`` (optional) hold sampled derivatives with shapes
    (nv, nu, 2, dim) and (nv, nu, 3, dim).
    """

    grid: ChartGrid
    position: np.ndarray
    c: float = 0.0
    provider: Optional[Callable] = field(default=None, compare=False, repr=False)
    d1: Optional[np.ndarray] = field(default=None, compare=False, repr=False)
    d2: Optional[np.ndarray] = field(default=None, compare=False, repr=False)
    name: str = ""
    params: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        pos = _frozen(self.position)
        g = self.grid
        if pos.ndim != 3 or pos.shape[:2] != (g.nv, g.nu):
            raise GridFormatError(f"position must have shape ({g.nv}, {g.nu}, dim), got {pos.shape}")
        if pos.shape[2] not in (4, 5):
            raise GridFormatError(f"ambient dimension must be 4 or 5, got {pos.shape[2]}")
        if self.c < 0:
            raise GridFormatError("negative ambient curvature is not supported")
        if self.c > 0 and pos.shape[2] != 5:
            raise GridFormatError("c > 0 requires positions in R^5")
        if self.c == 0 and pos.shape[2] != 4:
            raise GridFormatError("c = 0 requires positions in R^4")
        if not np.all(np.isfinite(pos)):
            bad = np.argwhere(~np.all(np.isfinite(pos), axis=-1))[0]
            raise GridFormatError(f"non-finite position at node {int(bad[0]) * g.nu + int(bad[1])}")
        if self.c > 0:
            r = np.linalg.norm(pos, axis=-1)
            dev = np.abs(r - 1.0 / math.sqrt(self.c)) * math.sqrt(self.c)
            if np.max(dev) > DEFAULT.sphere_radius:
                iv, iu = np.unravel_index(int(np.argmax(dev)), dev.shape)
                raise GridFormatError(
                    f"point off the sphere of radius 1/sqrt(c) at node {iv * g.nu + iu} "
                    f"(iu={iu}, iv={iv}), relative deviation {dev[iv, iu]:.3e}")
        object.__setattr__(self, "position", pos)
        for key in ("d1", "d2"):
            val = getattr(self, key)
            if val is not None:
                object.__setattr__(self, key, _frozen(val))

    @property
    def ambient_dim(self):
        return self.position.shape[2]

    def with_position(self, position, **kw):
        kw.setdefault("c", self.c)
        kw.setdefault("name", self.name)
        kw.setdefault("params", self.params)
        return ImmersionGrid(self.grid, position, **kw)


@dataclass(frozen=True)
class Jets:
    """Derivatives of the immersion at every node, arrays of shape (nv, nu, dim).

    Third derivatives may be None when unavailable. ``source`` records
    where the values came from: 'analytic', 'sampled' or 'fd'.
    """

    f: np.ndarray
    fu: np.ndarray
    fv: np.ndarray
    fuu: np.ndarray
    fuv: np.ndarray
    fvv: np.ndarray
    fuuu: Optional[np.ndarray] = None
    fuuv: Optional[np.ndarray] = None
    fuvv: Optional[np.ndarray] = None
    fvvv: Optional[np.ndarray] = None
    source: str = "fd"

    @property
    def has_third(self):
        return self.fuuu is not None

    def at(self, iv, iu):
        """Values at one node as a dict (handy for debugging and tests)."""
        return {k: getattr(self, k)[iv, iu] for k in JET_KEYS if getattr(self, k) is not None}


def _fd_third(grid, fuu, fvv):
    return (chart.d_u(fuu, grid), chart.d_v(fuu, grid), chart.d_u(fvv, grid), chart.d_v(fvv, grid))


def jets(imm: ImmersionGrid, mode="auto"):
    """Jets of ``imm``.

    mode 'auto' prefers the analytic provider, then sampled d1/d2 (third
    derivatives by FD of d2), then pure finite differences. mode 'fd' forces
    finite differences of the positions.
    """
    g = imm.grid
    if mode not in ("auto", "fd"):
        raise ValueError(f"unknown jet mode {mode!r}")
    if mode == "auto" and imm.provider is not None:
        U, V = g.mesh()
        d = imm.provider(U, V)
        j = Jets(**{k: np.asarray(d[k], dtype=float) for k in JET_KEYS}, source="analytic")
    elif mode == "auto" and imm.d1 is not None and imm.d2 is not None:
        fu, fv = imm.d1[:, :, 0], imm.d1[:, :, 1]
        fuu, fuv, fvv = imm.d2[:, :, 0], imm.d2[:, :, 1], imm.d2[:, :, 2]
        j = Jets(imm.position, fu, fv, fuu, fuv, fvv, *_fd_third(g, fuu, fvv), source="sampled")
    else:
        f = imm.position
        fu = chart.d_u(f, g)
        fv = chart.d_v(f, g)
        fuu = chart.d_uu(f, g)
        fvv = chart.d_vv(f, g)
        fuv = chart.d_v(fu, g)
        j = Jets(f, fu, fv, fuu, fuv, fvv, *_fd_third(g, fuu, fvv), source="fd")
    _check_immersion(j, g)
    return j


def _check_immersion(j, g):
    E = np.sum(j.fu**2, axis=-1)
    G = np.sum(j.fv**2, axis=-1)
    F = np.sum(j.fu * j.fv, axis=-1)
    area2 = E * G - F**2
    scale = max(float(np.max(E)), float(np.max(G)), 1e-300)
    bad = (E <= 1e-14 * scale) | (area2 <= 1e-12 * scale**2)
    if np.any(bad) or scale <= 1e-300:
        iv, iu = np.argwhere(bad)[0] if np.any(bad) else (0, 0)
        raise ImmersionDegeneracyError(
            f"not an immersion: lambda vanishes or f_u, f_v dependent at node iu={iu}, iv={iv} "
            f"(u={g.u[iu]:.6g}, v={g.v[iv]:.6g})", node=(int(iu), int(iv)))


def validate_isothermal(imm: ImmersionGrid, tol=None, mode="auto"):
    j = jets(imm, mode)
    if tol is None:
        tol = DEFAULT.isothermal_analytic if j.source == "analytic" else DEFAULT.isothermal
    return chart.validate_isothermal(j.fu, j.fv, imm.grid, tol)


# ---------------------------------------------------------------- file I/O

def save_grid(imm: ImmersionGrid, path):
    n = imm.grid.nu * imm.grid.nv
    dim = imm.ambient_dim
    doc = {
        "version": FORMAT_VERSION,
        "c": float(imm.c),
        "domain": imm.grid.to_dict(),
        "ambient_dim": dim,
        "position": imm.position.reshape(n, dim).tolist(),
    }
    if imm.d1 is not None:
        doc["d1"] = imm.d1.reshape(n, 2, dim).tolist()
    if imm.d2 is not None:
        doc["d2"] = imm.d2.reshape(n, 3, dim).tolist()
    if imm.name:
        doc["meta"] = {"name": imm.name, "params": imm.params}
    with open(path, "w") as fh:
        json.dump(doc, fh)


def load_grid(path) -> ImmersionGrid:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise GridFormatError(f"{path}: not valid JSON ({exc})") from None
    if not isinstance(doc, dict):
        raise GridFormatError(f"{path}: top level must be an object")
    if doc.get("version") != FORMAT_VERSION:
        raise GridFormatError(f"{path}: unsupported version {doc.get('version')!r}, expected {FORMAT_VERSION}")
    try:
        dom = doc["domain"]
        grid = ChartGrid(float(dom["u0"]), float(dom["u1"]), float(dom["v0"]), float(dom["v1"]),
                         int(dom["nu"]), int(dom["nv"]),
                         bool(dom["periodic_u"]), bool(dom["periodic_v"]))
        dim = int(doc["ambient_dim"])
        c = float(doc["c"])
        doc["position"]
    except (KeyError, TypeError, ValueError) as exc:
        raise GridFormatError(f"{path}: missing or malformed field ({exc})") from None
    n = grid.nu * grid.nv

    def array(key, inner):
        val = doc[key]
        if len(val) != n:
            raise GridFormatError(f"{path}: '{key}' has {len(val)} entries, expected nu*nv = {n}")
        try:
            arr = np.array(val, dtype=float)
        except (TypeError, ValueError):
            raise GridFormatError(f"{path}: '{key}' is not a numeric array") from None
        if arr.shape != (n,) + inner:
            raise GridFormatError(f"{path}: '{key}' entries must have shape {inner}, got {arr.shape[1:]}")
        if not np.all(np.isfinite(arr)):
            bad = int(np.argwhere(~np.all(np.isfinite(arr.reshape(n, -1)), axis=1))[0][0])
            raise GridFormatError(f"{path}: non-finite value in '{key}' at node {bad}")
        return arr.reshape((grid.nv, grid.nu) + inner)

    pos = array("position", (dim,))
    d1 = array("d1", (2, dim)) if "d1" in doc else None
    d2 = array("d2", (3, dim)) if "d2" in doc else None
    meta = doc.get("meta") or {}
    return ImmersionGrid(grid, pos, c=c, d1=d1, d2=d2,
                         name=str(meta.get("name", "")), params=dict(meta.get("params", {})))


# ---------------------------------------------------------- rigid motions

@dataclass(frozen=True)
class RigidMotion:
    """x -> A x + t with A orthogonal."""

    A: np.ndarray
    t: np.ndarray

    def __post_init__(self):
        A = _frozen(self.A)
        t = _frozen(self.t)
        n = A.shape[0]
        if A.shape != (n, n) or t.shape != (n,):
            raise ParameterError("rigid motion needs a square matrix and a matching translation")
        if np.max(np.abs(A.T @ A - np.eye(n))) > 1e-12:
            raise ParameterError("rigid motion matrix is not orthogonal (|A^T A - I| > 1e-12)")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "t", t)

    @property
    def det(self):
        return float(np.sign(np.linalg.det(self.A)))

    @classmethod
    def identity(cls, dim=4):
        return cls(np.eye(dim), np.zeros(dim))

    def compose(self, other):
        """self after other."""
        return RigidMotion(self.A @ other.A, self.A @ other.t + self.t)

    def apply(self, x):
        return np.asarray(x) @ self.A.T + self.t


def apply_rigid_motion(imm: ImmersionGrid, motion: RigidMotion) -> ImmersionGrid:
    if motion.A.shape[0] != imm.ambient_dim:
        raise ParameterError(f"motion acts on R^{motion.A.shape[0]}, surface lives in R^{imm.ambient_dim}")
    if imm.c > 0 and np.any(motion.t != 0):
        raise ParameterError("translations do not preserve the sphere (c > 0)")
    A, t = motion.A, motion.t
    provider = None
    if imm.provider is not None:
        base = imm.provider

        def provider(U, V):
            d = base(U, V)
            out = {k: np.asarray(d[k]) @ A.T for k in JET_KEYS}
            out["f"] = out["f"] + t
            return out

    d1 = None if imm.d1 is None else imm.d1 @ A.T
    d2 = None if imm.d2 is None else imm.d2 @ A.T
    return ImmersionGrid(imm.grid, motion.apply(imm.position), c=imm.c, provider=provider,
                         d1=d1, d2=d2, name=imm.name, params=imm.params)


def rotation_matrix(dim, i, j, angle):
    """Rotation by ``angle`` in the (x_i, x_j) coordinate plane."""
    R = np.eye(dim)
    c, s = math.cos(angle), math.sin(angle)
    R[i, i] = R[j, j] = c
    R[i, j] = -s
    R[j, i] = s
    return R


# -------------------------------------------------------------- OBJ export

PROJECTIONS = {"xyz": (0, 1, 2), "xyw": (0, 1, 3), "xzw": (0, 2, 3), "yzw": (1, 2, 3)}


def export_obj(imm: ImmersionGrid, path, project="xyz"):
    """Orthogonal projection to three ambient axes as a quad mesh (visualization only)."""
    if project not in PROJECTIONS:
        raise ParameterError(f"--project must be one of {sorted(PROJECTIONS)}")
    g = imm.grid
    axes = PROJECTIONS[project]
    pts = imm.position[..., list(axes)].reshape(-1, 3)
    nu, nv = g.nu, g.nv
    iu_max = nu if g.periodic_u else nu - 1
    iv_max = nv if g.periodic_v else nv - 1
    with open(path, "w") as fh:
        fh.write(f"# {imm.name or 'surface'} projected to {project}\n")
        for p in pts:
            fh.write(f"v {p[0]!r} {p[1]!r} {p[2]!r}\n")
        for iv in range(iv_max):
            for iu in range(iu_max):
                a = iv * nu + iu
                b = iv * nu + (iu + 1) % nu
                c = ((iv + 1) % nv) * nu + (iu + 1) % nu
                d = ((iv + 1) % nv) * nu + iu
                fh.write(f"f {a + 1} {b + 1} {c + 1} {d + 1}\n")
