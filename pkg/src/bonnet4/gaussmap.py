"""Euclidean Gauss map into S^2_+ x S^2_- and its Jacobian identities."""
from dataclasses import dataclass

import numpy as np

from . import chart
from .errors import UnsupportedAmbientError
from .geom import ANTI_SELF_DUAL_BASIS, SELF_DUAL_BASIS, hodge_split, wedge

RADIUS = 1.0 / np.sqrt(2.0)

# Orientation signs of the two 3-dimensional eigenspaces relative to the
# ordered bases of SELF_DUAL_BASIS / ANTI_SELF_DUAL_BASIS. With the bases as
# ordered, the round sphere comes out with J_+ = +1/2 and J_- = -1/2; the
# anti-self-dual orientation is reversed once here so that both equal K/2
# and the identities K = J_+ + J_-, K_N = J_+ - J_- hold.
ORIENTATION = {1: 1.0, -1: -1.0}


@dataclass(frozen=True)
class GaussMapField:
    """g_plus, g_minus as six-component bivectors; x_plus, x_minus as 3-vectors
    in the orthonormal bases of the two eigenspaces."""

    g_plus: np.ndarray
    g_minus: np.ndarray
    x_plus: np.ndarray
    x_minus: np.ndarray

    def component(self, sign):
        return self.x_plus if sign > 0 else self.x_minus


def gauss_map(fd):
    """Plucker image e1 ^ e2 of the oriented tangent plane, split by the Hodge star."""
    if fd.c != 0:
        raise UnsupportedAmbientError("the Euclidean Gauss map needs c = 0")
    b = wedge(fd.e1, fd.e2)
    gp, gm = hodge_split(b)
    return GaussMapField(gp, gm, gp @ SELF_DUAL_BASIS.T, gm @ ANTI_SELF_DUAL_BASIS.T)


def gauss_map_from_mean_curvature(fd):
    """g_pm from the tangent term -(i/lambda^2) f_*d ^ f_*dbar and the normal
    term -/+ (i/|H|^2) H^- ^ H^+; valid where H does not vanish."""
    fz = 0.5 * (fd.e1 - 1j * fd.e2) * fd.lam[..., None]
    H2 = np.where(fd.H2 > 0, fd.H2, np.nan)
    fzb = np.conj(fz)
    tangent = -1j / fd.lam2[..., None] * _cwedge(fz, fzb)
    hm = 0.5 * (fd.h[..., 0] + 1j * fd.h[..., 1])
    Hm = hm[..., None] * (fd.e3 - 1j * fd.e4)
    Hp = np.conj(hm)[..., None] * (fd.e3 + 1j * fd.e4)
    normal = 1j / H2[..., None] * _cwedge(Hm, Hp)
    return (tangent - normal).real, (tangent + normal).real


def _cwedge(a, b):
    pairs = ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3))
    return np.stack([a[..., i] * b[..., j] - a[..., j] * b[..., i] for i, j in pairs], axis=-1)


def jacobians(gm: GaussMapField, fd, cd=None, grid=None, mask=None):
    """Signed area ratios J_pm of g_pm against the surface metric.

    J = +-<x, x_u x x_v> / (rho lambda^2) with rho = 1/sqrt 2 the sphere radius
    and the orientation sign from ORIENTATION;
    with this normalization the round unit sphere gives J_+ = J_- = 1/2, and
    K = J_+ + J_-, K_N = J_+ - J_-. Returns (J_plus, J_minus, resK, resKN),
    the residuals being maxima over ``mask`` (default: trusted nodes) and
    None when ``cd`` is not supplied.
    """
    grid = grid or fd.grid
    out = []
    for sign, x in ((1, gm.x_plus), (-1, gm.x_minus)):
        xu = chart.d_u(x, grid)
        xv = chart.d_v(x, grid)
        vol = np.sum(x * np.cross(xu, xv), axis=-1)
        out.append(ORIENTATION[sign] * vol / (RADIUS * fd.lam2))
    jp, jm = out
    resK = resKN = None
    if cd is not None:
        mask = grid.trusted() if mask is None else mask
        resK = float(np.max(np.abs(cd.K - (jp + jm))[mask]))
        resKN = float(np.max(np.abs(cd.K_N - (jp - jm))[mask]))
    return jp, jm, resK, resKN


def eigenfunction_residual(gm: GaussMapField, fd, cd, sign, grid=None, probes=None, mask=None):
    """max over probes v of |Lap <g, v> + 2(2|H|^2 - K - sign K_N) <g, v>|, relative to scale.

    Probes default to the three basis vectors of the relevant eigenspace.
    """
    grid = grid or fd.grid
    mask = grid.trusted() if mask is None else mask
    x = gm.component(sign)
    if probes is None:
        probes = np.eye(3)
    pot = 2 * (2 * cd.H2 - cd.K - sign * cd.K_N)
    worst = 0.0
    for p in np.atleast_2d(probes):
        y = x @ p
        r = chart.laplace_beltrami(y, fd.lam, grid) + pot * y
        worst = max(worst, float(np.max(np.abs(r)[mask])))
    return worst / (cd.scale * RADIUS)


def great_circle_distance(x):
    """Max distance of the points x (..., 3) from the best-fitting plane through 0.

    Points on a great circle of the sphere lie in a plane through its center.
    """
    pts = x.reshape(-1, 3)
    _, s, vt = np.linalg.svd(pts, full_matrices=False)
    normal = vt[-1]
    return float(np.max(np.abs(pts @ normal)))


def is_constant(x, tol=1e-9):
    return float(np.max(np.abs(x - x.reshape(-1, 3)[0]))) < tol


