"""Associated families of the second fundamental form and surface reconstruction.

The (2,0)-part of alpha is rotated on one or both isotropic normal lines while
the (1,1)-part (the mean curvature), the metric and the normal connection stay
fixed. The rotated data satisfy the Gauss, Codazzi and Ricci equations, and
``reconstruct`` integrates the frame equations to produce the surface.
"""
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from . import chart
from .config import DEFAULT
from .errors import (DegenerateFrameError, IntegrationInconsistencyError,
                     NotParallelError, ParameterError, UnsupportedAmbientError)
from .geom import polar_orthogonal
from .immersion import ImmersionGrid, RigidMotion
from .invariants import vertical_harmonicity_residual

TWO_PI = 2 * np.pi


@dataclass(frozen=True)
class DeformationData:
    """Metric, normal connection and second fundamental form of a (deformed) surface.

    beta11, beta12, beta22 and h are coefficient pairs on the source's
    (e3, e4); phi_minus / phi_plus are the isotropic parts of beta(d, d).
    """

    grid: chart.ChartGrid
    c: float
    lam: np.ndarray
    lam_u: np.ndarray
    lam_v: np.ndarray
    beta11: np.ndarray
    beta12: np.ndarray
    beta22: np.ndarray
    h: np.ndarray
    omega: np.ndarray
    phi_minus: np.ndarray
    phi_plus: np.ndarray
    theta: float = 0.0
    lift_sign: int = 1
    mode: str = "one-parameter"
    angles: tuple = (0.0, 0.0)      # accumulated rotation of (phi^-, phi^+): phi^- e^{i a}, phi^+ e^{-i b}
    seed_frame: Optional[np.ndarray] = None
    seed_point: Optional[np.ndarray] = None

    @property
    def lam2(self):
        return self.lam**2

    @property
    def phi(self):
        """beta(d, d) on (e3, e4)."""
        return np.stack([self.phi_minus + self.phi_plus, -1j * (self.phi_minus - self.phi_plus)], axis=-1)


def _assemble(base, phi_minus, phi_plus, **kw):
    """Rebuild the real beta_ij from a new (2,0)-part and the unchanged mean curvature."""
    lam2 = base.lam2[..., None] if hasattr(base, "lam2") else base.lam[..., None] ** 2
    phi = np.stack([phi_minus + phi_plus, -1j * (phi_minus - phi_plus)], axis=-1)
    half_d = 2 * phi.real / lam2          # (beta11 - beta22) / 2
    b12 = -2 * phi.imag / lam2
    h = base.h
    return DeformationData(
        grid=base.grid, c=base.c, lam=base.lam, lam_u=base.lam_u, lam_v=base.lam_v,
        beta11=h + half_d, beta12=b12, beta22=h - half_d, h=h, omega=base.omega,
        phi_minus=phi_minus, phi_plus=phi_plus, **kw)


def source_data(fd, hd, position=None):
    """The undeformed surface as DeformationData (beta = alpha)."""
    seed_point = None if position is None else np.asarray(position)[0, 0].copy()
    return DeformationData(
        grid=fd.grid, c=fd.c, lam=fd.lam, lam_u=fd.lam_u, lam_v=fd.lam_v,
        beta11=fd.a11, beta12=fd.a12, beta22=fd.a22, h=fd.h, omega=fd.omega,
        phi_minus=hd.phi_minus, phi_plus=hd.phi_plus,
        seed_frame=fd.frame[0, 0].copy(), seed_point=seed_point)


def _angles(src):
    return getattr(src, "angles", (0.0, 0.0))


def deform_data(fd, hd=None, theta=0.0, lift_sign=1, position=None):
    """One-parameter family: lift +1 rotates phi^+ by e^{-i theta}, lift -1 rotates phi^- by e^{i theta}.

    ``fd`` may be FundamentalData (with ``hd`` its HopfData) or an existing
    DeformationData, in which case the rotations compose.
    """
    if lift_sign not in (1, -1):
        raise ParameterError(f"lift sign must be +1 or -1, got {lift_sign!r}")
    src = fd if isinstance(fd, DeformationData) else source_data(fd, hd, position)
    theta = float(np.mod(theta, TWO_PI))
    a, b = _angles(src)
    pm, pp = src.phi_minus, src.phi_plus
    if lift_sign > 0:
        pp = pp * np.exp(-1j * theta)
        b = float(np.mod(b + theta, TWO_PI))
    else:
        pm = pm * np.exp(1j * theta)
        a = float(np.mod(a + theta, TWO_PI))
    total = b if lift_sign > 0 else a
    return _assemble(src, pm, pp, theta=total, lift_sign=lift_sign, mode="one-parameter",
                     angles=(a, b), seed_frame=src.seed_frame, seed_point=src.seed_point)


def deform_data_two(fd, hd, theta, phi, position=None, tol=DEFAULT):
    """Two-parameter family (e^{i theta} phi^-, e^{-i phi} phi^+), for parallel mean curvature only."""
    rm, rp = vertical_harmonicity_residual(hd, fd)
    failed = [f"{name} residual {r:.3e} > {tol.parallel_h:g}"
              for name, r in (("dbar^-", rm), ("dbar^+", rp)) if not r <= tol.parallel_h]
    if failed:
        raise NotParallelError(
            "two-parameter deformation needs parallel mean curvature (both lifts vertically "
            "harmonic): " + "; ".join(failed))
    src = source_data(fd, hd, position)
    theta = float(np.mod(theta, TWO_PI))
    phi = float(np.mod(phi, TWO_PI))
    return _assemble(src, src.phi_minus * np.exp(1j * theta), src.phi_plus * np.exp(-1j * phi),
                     theta=theta, lift_sign=0, mode="two-parameter", angles=(theta, phi),
                     seed_frame=src.seed_frame, seed_point=src.seed_point)


def max_abs_difference(a: DeformationData, b: DeformationData):
    """Largest entrywise difference of the beta coefficients."""
    return max(float(np.max(np.abs(x - y)))
               for x, y in ((a.beta11, b.beta11), (a.beta12, b.beta12), (a.beta22, b.beta22)))


# ------------------------------------------------------------ GCR residuals

@dataclass(frozen=True)
class GCRResiduals:
    """Residual fields of the Gauss, Codazzi and Ricci equations.

    gauss = |(K - c) lambda^4/4 - (|beta(d,dbar)|^2 - |beta(d,d)|^2)| / lambda^4,
    codazzi = |D_dbar beta(d,d) - (lambda^2/2) D_d H| / lambda^3,
    ricci = |K_N(beta) - K_N(omega34)|; all in curvature units.
    """

    gauss: np.ndarray
    codazzi: np.ndarray
    ricci: np.ndarray
    max_gauss: float
    max_codazzi: float
    max_ricci: float

    @property
    def worst(self):
        return max(self.max_gauss, self.max_codazzi, self.max_ricci)


def _cov(coeff, omega_x, du, dv, wz):
    """Normal covariant derivative of a coefficient field along the complex direction wz.

    ``wz`` = (1, -i)/2 for d and (1, i)/2 for dbar; coefficients are on
    (e3, e4), for which D(a e3 + b e4) = (da - b w) e3 + (db + a w) e4.
    """
    wu, wv = wz
    da = wu * du + wv * dv
    om = wu * omega_x[..., 0] + wv * omega_x[..., 1]
    a, b = coeff[..., 0], coeff[..., 1]
    return np.stack([da[..., 0] - b * om, da[..., 1] + a * om], axis=-1)


def gcr_residuals(dd: DeformationData, grid=None, c=None, mask=None):
    grid = grid or dd.grid
    c = dd.c if c is None else c
    mask = grid.trusted() if mask is None else mask
    lam, lam2 = dd.lam, dd.lam2
    K = -chart.laplace_beltrami(np.log(lam), lam, grid)
    phi = dd.phi
    mixed = 0.25 * np.sum(dd.h**2, axis=-1) * lam2**2
    hol = np.sum(np.abs(phi) ** 2, axis=-1)
    gauss = np.abs((K - c) * lam2**2 / 4 - (mixed - hol)) / lam2**2

    d, dbar = (0.5, -0.5j), (0.5, 0.5j)
    lhs = _cov(phi, dd.omega, chart.d_u(phi, grid), chart.d_v(phi, grid), dbar)
    rhs = 0.5 * lam2[..., None] * _cov(dd.h, dd.omega, chart.d_u(dd.h, grid), chart.d_v(dd.h, grid), d)
    codazzi = np.linalg.norm(lhs - rhs, axis=-1) / lam**3

    D = dd.beta11 - dd.beta22
    kn_beta = D[..., 0] * dd.beta12[..., 1] - D[..., 1] * dd.beta12[..., 0]
    curl = chart.d_u(dd.omega[..., 1], grid) - chart.d_v(dd.omega[..., 0], grid)
    kn_omega = -curl / lam2
    ricci = np.abs(kn_beta - kn_omega)
    return GCRResiduals(gauss=gauss, codazzi=codazzi, ricci=ricci,
                        max_gauss=float(np.max(gauss[mask])),
                        max_codazzi=float(np.max(codazzi[mask])),
                        max_ricci=float(np.max(ricci[mask])))


# ----------------------------------------------------------- reconstruction

def connection_matrices(dd: DeformationData):
    """so(4)-valued A_u, A_v with A[k, j] = <D_X e_j, e_k>, shape (nv, nu, 4, 4).

    The frame F (columns e1..e4) then satisfies F_u = F A_u, F_v = F A_v.
    """
    lam = dd.lam
    shape = lam.shape + (4, 4)
    Au, Av = np.zeros(shape), np.zeros(shape)
    Au[..., 1, 0] = -dd.lam_v / lam
    Av[..., 1, 0] = dd.lam_u / lam
    beta = {(0, 0): dd.beta11, (0, 1): dd.beta12, (1, 0): dd.beta12, (1, 1): dd.beta22}
    for a in range(2):
        for i in range(2):
            Au[..., 2 + a, i] = lam * beta[i, 0][..., a]
            Av[..., 2 + a, i] = lam * beta[i, 1][..., a]
    Au[..., 3, 2] = dd.omega[..., 0]
    Av[..., 3, 2] = dd.omega[..., 1]
    # only the lower triangle was filled; complete it skew-symmetrically
    return Au - np.swapaxes(Au, -1, -2), Av - np.swapaxes(Av, -1, -2)


def _midpoints(A):
    """Cubic interpolation of A at the midpoints between consecutive samples (axis 0)."""
    n = A.shape[0]
    mid = np.empty((n - 1,) + A.shape[1:])
    if n >= 4:
        mid[1:-1] = (-A[:-3] + 9 * A[1:-2] + 9 * A[2:-1] - A[3:]) / 16
        mid[0] = (5 * A[0] + 15 * A[1] - 5 * A[2] + A[3]) / 16
        mid[-1] = (5 * A[-1] + 15 * A[-2] - 5 * A[-3] + A[-4]) / 16
    else:
        mid[:] = 0.5 * (A[:-1] + A[1:])
    return mid


def _integrate_line(F0, A, h):
    """RK4 for F' = F A(t) along axis 0 of A, with polar reprojection after every step.

    F0 has shape (..., 4, 4) matching A[0]; returns frames at every sample.
    """
    n = A.shape[0]
    mid = _midpoints(A)
    out = np.empty((n,) + F0.shape)
    out[0] = F0
    Y = F0
    for k in range(n - 1):
        A0, Am, A1 = A[k], mid[k], A[k + 1]
        k1 = Y @ A0
        k2 = (Y + 0.5 * h * k1) @ Am
        k3 = (Y + 0.5 * h * k2) @ Am
        k4 = (Y + h * k3) @ A1
        Y = polar_orthogonal(Y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4))
        out[k + 1] = Y
    return out


def _integrate_points(p0, g, gp, h):
    """Hermite trapezoid for p' = g along axis 0, gp = g'."""
    steps = 0.5 * h * (g[:-1] + g[1:]) + h * h / 12 * (gp[:-1] - gp[1:])
    return p0 + np.concatenate([np.zeros_like(steps[:1]), np.cumsum(steps, axis=0)], axis=0)


def _sweep(dd, Au, Av, F0, p0, first):
    """Integrate along the first direction from the origin node, then along the other one."""
    grid = dd.grid
    lam = dd.lam
    if first == "v":
        # column at iu = 0, then every row in u
        col = _integrate_line(F0, Av[:, 0], grid.hv)
        gcol = lam[:, 0, None] * col[..., :, 1]
        gpcol = dd.lam_v[:, 0, None] * col[..., :, 1] + lam[:, 0, None] * (col @ Av[:, 0])[..., :, 1]
        pcol = _integrate_points(p0, gcol, gpcol, grid.hv)
        Ft = _integrate_line(col, np.swapaxes(Au, 0, 1), grid.hu)     # (nu, nv, 4, 4)
        F = np.swapaxes(Ft, 0, 1)
        lamT = lam.T[..., None]
        g = lamT * Ft[..., :, 0]
        gp = dd.lam_u.T[..., None] * Ft[..., :, 0] + lamT * (Ft @ np.swapaxes(Au, 0, 1))[..., :, 0]
        P = np.swapaxes(_integrate_points(pcol, g, gp, grid.hu), 0, 1)
    else:
        row = _integrate_line(F0, Au[0], grid.hu)
        grow = lam[0, :, None] * row[..., :, 0]
        gprow = dd.lam_u[0, :, None] * row[..., :, 0] + lam[0, :, None] * (row @ Au[0])[..., :, 0]
        prow = _integrate_points(p0, grow, gprow, grid.hu)
        F = _integrate_line(row, Av, grid.hv)
        g = lam[..., None] * F[..., :, 1]
        gp = dd.lam_v[..., None] * F[..., :, 1] + lam[..., None] * (F @ Av)[..., :, 1]
        P = _integrate_points(prow, g, gp, grid.hv)
    return F, P


@dataclass(frozen=True)
class ReconstructionResult:
    surface: ImmersionGrid
    frame_field: np.ndarray         # (nv, nu, 4, 4), columns e1..e4
    path_independence: float
    position_path_independence: float
    metric_residual: float
    orthogonality: float
    closure_defect: dict
    gcr: GCRResiduals


def _closure(dd, Au, Av, F, P):
    """Frame and position gaps after one more step across each periodic seam."""
    grid = dd.grid
    out = {}
    if grid.periodic_u:
        A = np.swapaxes(np.concatenate([Au[:, -1:], Au[:, :1]], axis=1), 0, 1)
        Fw = _integrate_line(F[:, -1], A, grid.hu)[-1]
        g0 = dd.lam[:, -1, None] * F[:, -1, :, 0]
        g1 = dd.lam[:, 0, None] * Fw[..., :, 0]
        gp0 = dd.lam_u[:, -1, None] * F[:, -1, :, 0] + dd.lam[:, -1, None] * (F[:, -1] @ Au[:, -1])[..., :, 0]
        gp1 = dd.lam_u[:, 0, None] * Fw[..., :, 0] + dd.lam[:, 0, None] * (Fw @ Au[:, 0])[..., :, 0]
        Pw = P[:, -1] + 0.5 * grid.hu * (g0 + g1) + grid.hu**2 / 12 * (gp0 - gp1)
        out["u"] = {"frame": float(np.max(np.abs(Fw - F[:, 0]))),
                    "position": float(np.max(np.linalg.norm(Pw - P[:, 0], axis=-1)))}
    if grid.periodic_v:
        A = np.concatenate([Av[-1:], Av[:1]], axis=0)
        Fw = _integrate_line(F[-1], A, grid.hv)[-1]
        g0 = dd.lam[-1, :, None] * F[-1, :, :, 1]
        g1 = dd.lam[0, :, None] * Fw[..., :, 1]
        gp0 = dd.lam_v[-1, :, None] * F[-1, :, :, 1] + dd.lam[-1, :, None] * (F[-1] @ Av[-1])[..., :, 1]
        gp1 = dd.lam_v[0, :, None] * Fw[..., :, 1] + dd.lam[0, :, None] * (Fw @ Av[0])[..., :, 1]
        Pw = P[-1] + 0.5 * grid.hv * (g0 + g1) + grid.hv**2 / 12 * (gp0 - gp1)
        out["v"] = {"frame": float(np.max(np.abs(Fw - F[0]))),
                    "position": float(np.max(np.linalg.norm(Pw - P[0], axis=-1)))}
    return out


def reconstruct(dd: DeformationData, seed_frame=None, seed_point=None, tol=DEFAULT,
                closure_tol=1e-4, check=True):
    """Integrate F_u = F A_u, F_v = F A_v and f_u = lambda e1, f_v = lambda e2.

    Integration runs along v at the first column and then along every u-line
    (RK4, cubic midpoint interpolation of the connection, SVD reprojection to
    SO(4) after each step); a second u-first sweep measures path
    independence. Periodic directions are integrated on the covering
    rectangle; when a seam does not close to ``closure_tol`` (relative to the
    diameter of the point cloud) the result grid is opened there, with node
    coordinates unchanged.
    """
    if dd.c != 0:
        raise UnsupportedAmbientError(
            "reconstruction is implemented for c = 0 only; for c > 0 the frame equations live in SO(5)")
    grid = dd.grid
    F0 = np.eye(4) if seed_frame is None and dd.seed_frame is None else np.asarray(
        dd.seed_frame if seed_frame is None else seed_frame, dtype=float)
    if hasattr(F0, "matrix"):
        F0 = F0.matrix
    if F0.shape != (4, 4) or np.max(np.abs(F0.T @ F0 - np.eye(4))) > 1e-9 or np.linalg.det(F0) < 0:
        raise DegenerateFrameError("seed frame must be a positively oriented orthonormal 4x4 matrix")
    p0 = np.zeros(4) if seed_point is None and dd.seed_point is None else np.asarray(
        dd.seed_point if seed_point is None else seed_point, dtype=float)

    Au, Av = connection_matrices(dd)
    F, P = _sweep(dd, Au, Av, F0, p0, "v")
    F2, P2 = _sweep(dd, Au, Av, F0, p0, "u")
    path = float(np.max(np.abs(F - F2)))
    ppath = float(np.max(np.linalg.norm(P - P2, axis=-1)))
    ortho = float(np.max(np.abs(np.swapaxes(F, -1, -2) @ F - np.eye(4))))
    gcr = gcr_residuals(dd)
    if check and path > tol.path_factor * max(gcr.worst, tol.path_floor):
        raise IntegrationInconsistencyError(
            f"path independence {path:.3e} > {tol.path_factor:g} x max(GCR residual {gcr.worst:.3e}, "
            f"{tol.path_floor:g}): the structure equations are not integrable for these data")
    closure = _closure(dd, Au, Av, F, P)
    diam = float(np.max(np.ptp(P.reshape(-1, 4), axis=0))) or 1.0
    closure_tol = closure_tol * diam
    pu = grid.periodic_u and closure.get("u", {}).get("position", np.inf) < closure_tol \
        and closure["u"]["frame"] < closure_tol
    pv = grid.periodic_v and closure.get("v", {}).get("position", np.inf) < closure_tol \
        and closure["v"]["frame"] < closure_tol
    u1 = grid.u1 if pu or not grid.periodic_u else grid.u0 + (grid.nu - 1) * grid.hu
    v1 = grid.v1 if pv or not grid.periodic_v else grid.v0 + (grid.nv - 1) * grid.hv
    out_grid = chart.ChartGrid(grid.u0, u1, grid.v0, v1, grid.nu, grid.nv, bool(pu), bool(pv))
    lam = dd.lam[..., None]
    FAu, FAv = F @ Au, F @ Av
    e1, e2 = F[..., :, 0], F[..., :, 1]
    d1 = np.stack([lam * e1, lam * e2], axis=-2)
    d2 = np.stack([dd.lam_u[..., None] * e1 + lam * FAu[..., :, 0],
                   dd.lam_v[..., None] * e1 + lam * FAv[..., :, 0],
                   dd.lam_v[..., None] * e2 + lam * FAv[..., :, 1]], axis=-2)
    surface = ImmersionGrid(out_grid, P, c=0.0, d1=d1, d2=d2, name="reconstructed")
    fu, fv = chart.d_u(P, out_grid), chart.d_v(P, out_grid)
    lam2 = dd.lam2
    E = np.sum(fu * fu, -1)
    G = np.sum(fv * fv, -1)
    Fm = np.sum(fu * fv, -1)
    mask = out_grid.trusted()
    metric = float(np.max((np.maximum(np.abs(E - lam2), np.maximum(np.abs(G - lam2), np.abs(Fm))) / lam2)[mask]))
    return ReconstructionResult(surface=surface, frame_field=F, path_independence=path,
                                position_path_independence=ppath, metric_residual=metric,
                                orthogonality=ortho, closure_defect=closure, gcr=gcr)


# ------------------------------------------------------------- congruence

def procrustes_align(a, b):
    """Orientation-preserving rigid motion M minimizing rms |M(a) - b|.

    Accepts ImmersionGrids on the same grid or point arrays (..., dim).
    Returns (RigidMotion, rms).
    """
    pa = np.asarray(getattr(a, "position", a), dtype=float)
    pb = np.asarray(getattr(b, "position", b), dtype=float)
    if pa.shape != pb.shape:
        raise ParameterError(f"point sets differ in shape: {pa.shape} vs {pb.shape}")
    dim = pa.shape[-1]
    xa, xb = pa.reshape(-1, dim), pb.reshape(-1, dim)
    ca, cb = xa.mean(axis=0), xb.mean(axis=0)
    C = (xb - cb).T @ (xa - ca)
    U, s, Vt = np.linalg.svd(C)
    if s[0] == 0 or np.sum(s > 1e-12 * s[0]) < dim - 1:
        raise DegenerateFrameError("cross-covariance is degenerate; the aligning rotation is not unique")
    d = np.ones(dim)
    d[-1] = np.sign(np.linalg.det(U @ Vt)) or 1.0
    R = (U * d) @ Vt
    motion = RigidMotion(R, cb - R @ ca)
    rms = float(np.sqrt(np.mean(np.sum((motion.apply(xa) - xb) ** 2, axis=-1))))
    return motion, rms


def fit_hypersphere(points):
    """Least-squares sphere |x - center| = radius; returns (center, radius, max deviation)."""
    x = np.asarray(points, dtype=float).reshape(-1, np.shape(points)[-1])
    A = np.hstack([2 * x, np.ones((len(x), 1))])
    rhs = np.sum(x * x, axis=1)
    sol, *_ = np.linalg.lstsq(A, rhs, rcond=None)
    center = sol[:-1]
    radius = float(np.sqrt(sol[-1] + center @ center))
    dev = float(np.max(np.abs(np.linalg.norm(x - center, axis=1) - radius)))
    return center, radius, dev


def with_seed(dd: DeformationData, frame=None, point=None):
    return replace(dd, seed_frame=dd.seed_frame if frame is None else np.asarray(frame),
                   seed_point=dd.seed_point if point is None else np.asarray(point))
