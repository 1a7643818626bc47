"""Second fundamental form, curvatures, Hopf differential and their residuals.

Arrays follow the chart layout (nv, nu, ...). Normal vectors are carried
twice: as ambient vectors (suffix ``_amb``) and as coefficient pairs on the
adapted normal frame (e3, e4).
"""
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import chart
from .config import DEFAULT
from .errors import DegenerateFrameError, InconsistencyError, PreconditionError
from .geom import Frame4, cross4, cross5

# branch codes of the normal frame rule
BRANCH_H, BRANCH_TRACEFREE, BRANCH_FIXED = 0, 1, 2


def _dot(a, b):
    return np.sum(a * b, axis=-1)


@dataclass(frozen=True)
class FundamentalData:
    """Adapted frame and second fundamental form at every node.

    ``frame`` has shape (nv, nu, dim, 4) with columns e1..e4; ``a11``,
    ``a12``, ``a22`` and ``h`` are coefficient pairs on (e3, e4). ``omega``
    holds (omega34(d/du), omega34(d/dv)) with omega34 = <D e3, e4>.
    """

    grid: chart.ChartGrid
    c: float
    lam: np.ndarray
    lam_u: np.ndarray
    lam_v: np.ndarray
    frame: np.ndarray
    radial: Optional[np.ndarray]
    alpha11_amb: np.ndarray
    alpha12_amb: np.ndarray
    alpha22_amb: np.ndarray
    a11: np.ndarray
    a12: np.ndarray
    a22: np.ndarray
    h: np.ndarray
    branch: np.ndarray
    omega: np.ndarray
    K_N: np.ndarray
    scale: float
    jet_source: str = "fd"

    @property
    def e1(self):
        return self.frame[..., 0]

    @property
    def e2(self):
        return self.frame[..., 1]

    @property
    def e3(self):
        return self.frame[..., 2]

    @property
    def e4(self):
        return self.frame[..., 3]

    @property
    def H_amb(self):
        return 0.5 * (self.alpha11_amb + self.alpha22_amb)

    @property
    def H2(self):
        return _dot(self.h, self.h)

    @property
    def lam2(self):
        return self.lam**2

    def normal_coeffs(self, x):
        """Coefficients of an ambient (possibly complex) vector field on (e3, e4)."""
        return np.stack([_dot(x, self.e3), _dot(x, self.e4)], axis=-1)

    def frame_at(self, iv, iu):
        m = self.frame[iv, iu]
        return Frame4(m) if m.shape == (4, 4) else m


def _normal_projector(e1, e2, radial):
    def proj(x):
        out = x - _dot(x, e1)[..., None] * e1 - _dot(x, e2)[..., None] * e2
        if radial is not None:
            out = out - _dot(x, radial)[..., None] * radial
        return out
    return proj


def _oriented_e4(e1, e2, e3, radial):
    if radial is None:
        return cross4(e1, e2, e3)
    # det[e1, e2, e3, e4, x/|x|] = +1
    return -cross5(e1, e2, e3, radial)


def _oriented_area(e1, e2, a, b, radial):
    """det[e1, e2, a, b] (R^4) or det[e1, e2, a, b, radial] (R^5)."""
    if radial is None:
        return _dot(cross4(e1, e2, a), b)
    return -_dot(cross5(e1, e2, a, radial), b)


def fundamental_forms(jets, c=0.0, grid=None, tol=DEFAULT):
    """Adapted frames and the second fundamental form from a jet field.

    The normal frame follows a deterministic rule: e3 = H/|H| where
    |H| > tol.h_branch * scale, else the normalized normal part of
    alpha11 - alpha22, else the normalized normal part of the ambient basis
    vector with the largest normal component. e4 completes a positively
    oriented frame (for c > 0 together with the outward radial direction).
    """
    if grid is None:
        raise ValueError("fundamental_forms needs the chart grid")
    fu, fv = jets.fu, jets.fv
    dim = fu.shape[-1]
    lam = np.sqrt(_dot(fu, fu))
    lam2 = lam**2
    e1 = fu / lam[..., None]
    w = fv - _dot(fv, e1)[..., None] * e1
    e2 = w / np.linalg.norm(w, axis=-1, keepdims=True)
    radial = None
    if c > 0:
        radial = jets.f / np.linalg.norm(jets.f, axis=-1, keepdims=True)
    elif dim != 4:
        raise DegenerateFrameError("flat ambient space requires 4-dimensional positions")
    P = _normal_projector(e1, e2, radial)
    l2 = lam2[..., None]
    A11 = P(jets.fuu) / l2
    A12 = P(jets.fuv) / l2
    A22 = P(jets.fvv) / l2
    Hamb = 0.5 * (A11 + A22)
    D = A11 - A22

    H2 = _dot(Hamb, Hamb)
    K = c + _dot(A11, A22) - _dot(A12, A12)
    K_N = _oriented_area(e1, e2, D, A12, radial)
    scale = float(max(np.max(H2), np.max(np.abs(K)), np.max(np.abs(K_N)), 1.0))

    # deterministic choice of e3 and the vector g with xi = P(g) along e3
    g_h = jets.fuu + jets.fvv
    g_d = jets.fuu - jets.fvv
    xi_h, xi_d = P(g_h), P(g_d)
    nh = np.linalg.norm(Hamb, axis=-1)
    nd = np.linalg.norm(D, axis=-1)
    thr = tol.h_branch * scale
    branch = np.full(lam.shape, BRANCH_FIXED, dtype=np.int8)
    branch[nd > thr] = BRANCH_TRACEFREE
    branch[nh > thr] = BRANCH_H

    basis = np.eye(dim)
    proj_basis = np.stack([P(np.broadcast_to(basis[k], fu.shape)) for k in range(dim)], axis=-2)
    kbest = np.argmax(np.linalg.norm(proj_basis, axis=-1), axis=-1)
    fixed_vec = basis[kbest]
    xi_f = P(fixed_vec)

    sel = [branch == b for b in (BRANCH_H, BRANCH_TRACEFREE, BRANCH_FIXED)]
    xi = np.where(sel[0][..., None], xi_h, np.where(sel[1][..., None], xi_d, xi_f))
    nxi = np.linalg.norm(xi, axis=-1)
    if np.any(nxi <= 0):
        iv, iu = np.argwhere(nxi <= 0)[0]
        raise DegenerateFrameError(f"normal space degenerate at node iu={iu}, iv={iv}")
    e3 = xi / nxi[..., None]
    e4 = _oriented_e4(e1, e2, e3, radial)
    frame = np.stack([e1, e2, e3, e4], axis=-1)

    # omega34(X) = <D_X xi, e4>/|xi| with D_X(P g) = P g_X + (D_X P) g and
    # <(D_X P) g, e4> = -<T_X G^{-1} T^t g, e4>, T = [f_u, f_v]
    omega = np.zeros(lam.shape + (2,))
    if jets.has_third:
        E = lam2
        F = _dot(fu, fv)
        G = _dot(fv, fv)
        det = E * G - F**2
        g_all = np.where(sel[0][..., None], g_h, np.where(sel[1][..., None], g_d, fixed_vec))
        tu, tv = _dot(fu, g_all), _dot(fv, g_all)
        w1 = (G * tu - F * tv) / det
        w2 = (E * tv - F * tu) / det
        dg = {
            0: (jets.fuuu + jets.fuvv, jets.fuuv + jets.fvvv),
            1: (jets.fuuu - jets.fuvv, jets.fuuv - jets.fvvv),
        }
        zero = np.zeros_like(fu)
        gu = np.where(sel[0][..., None], dg[0][0], np.where(sel[1][..., None], dg[1][0], zero))
        gv = np.where(sel[0][..., None], dg[0][1], np.where(sel[1][..., None], dg[1][1], zero))
        Tu = w1[..., None] * jets.fuu + w2[..., None] * jets.fuv
        Tv = w1[..., None] * jets.fuv + w2[..., None] * jets.fvv
        omega[..., 0] = (_dot(gu, e4) - _dot(Tu, e4)) / nxi
        omega[..., 1] = (_dot(gv, e4) - _dot(Tv, e4)) / nxi
    else:
        omega = _omega_fd(e3, e4, grid)

    lam_u = _dot(fu, jets.fuu) / lam
    lam_v = _dot(fu, jets.fuv) / lam

    def coeffs(x):
        return np.stack([_dot(x, e3), _dot(x, e4)], axis=-1)

    return FundamentalData(
        grid=grid, c=float(c), lam=lam, lam_u=lam_u, lam_v=lam_v, frame=frame, radial=radial,
        alpha11_amb=A11, alpha12_amb=A12, alpha22_amb=A22,
        a11=coeffs(A11), a12=coeffs(A12), a22=coeffs(A22), h=coeffs(Hamb),
        branch=branch, omega=omega, K_N=K_N, scale=scale, jet_source=jets.source)


def _omega_fd(e3, e4, grid):
    """omega34 by differencing the e3 field; only used when third jets are missing."""
    return np.stack([_dot(chart.d_u(e3, grid), e4), _dot(chart.d_v(e3, grid), e4)], axis=-1)


# ------------------------------------------------------------- curvatures

@dataclass(frozen=True)
class CurvatureData:
    K: np.ndarray
    K_N: np.ndarray
    H2: np.ndarray
    lambda1: np.ndarray
    lambda2: np.ndarray
    umbilic_margin: np.ndarray
    pseudo_umbilic_margin: np.ndarray
    scale: float


def curvatures(fd: FundamentalData, tol=DEFAULT) -> CurvatureData:
    """K from the Gauss equation, K_N from the Ricci equation, semiaxes of the ellipse."""
    a11, a12, a22 = fd.a11, fd.a12, fd.a22
    K = fd.c + _dot(a11, a22) - _dot(a12, a12)
    D = a11 - a22
    K_N = D[..., 0] * a12[..., 1] - D[..., 1] * a12[..., 0]
    H2 = fd.H2
    um = H2 - (K - fd.c)
    pm = um - np.abs(K_N)
    scale = fd.scale
    worst = float(np.min(pm))
    if worst < -tol.clamp * scale:
        iv, iu = np.unravel_index(int(np.argmin(pm)), pm.shape)
        raise InconsistencyError(
            f"|H|^2 - (K - c) >= |K_N| violated by {worst:.3e} at node iu={iu}, iv={iv}")
    s = np.sqrt(np.maximum(um + np.abs(K_N), 0.0))
    d = np.sqrt(np.maximum(pm, 0.0))
    return CurvatureData(K=K, K_N=K_N, H2=H2, lambda1=0.5 * (s + d), lambda2=0.5 * (s - d),
                         umbilic_margin=um, pseudo_umbilic_margin=pm, scale=scale)


def ellipse_semiaxes(fd: FundamentalData):
    """Semiaxes as singular values of the map (cos 2t, sin 2t) -> curvature ellipse.

    Independent of the closed formulas in ``curvatures``; used as a cross-check.
    """
    M = np.stack([0.5 * (fd.a11 - fd.a22), fd.a12], axis=-1)  # (..., 2, 2), columns u, v
    sv = np.linalg.svd(M, compute_uv=False)
    return sv[..., 0], sv[..., 1]


def ellipse_frame_from_alpha(a11, a12, a22, tol=1e-12):
    """Principal frame of the curvature ellipse from coefficient pairs at one point.

    Returns (omega, R, kappa, mu): tangent rotation angle, 2x2 rotation of the
    normal pair (new e3, e4 as columns in old coefficients), major semiaxis
    kappa >= |mu| with alpha~11 - alpha~22 = 2 kappa e3~, alpha~12 = mu e4~.
    """
    u = 0.5 * (np.asarray(a11, float) - np.asarray(a22, float))
    v = np.asarray(a12, float)
    M = np.column_stack([u, v])
    U, S, Vt = np.linalg.svd(M)
    if S[0] - S[1] <= tol:
        raise PreconditionError("curvature ellipse is a circle at this point (pseudo-umbilic)")
    # rotating the tangent frame by omega turns (u, v) into M (cos 2w, sin 2w), M(-sin 2w, cos 2w)
    two_w = np.arctan2(Vt[0, 1], Vt[0, 0])
    w = 0.5 * two_w
    c2, s2 = np.cos(two_w), np.sin(two_w)
    u_new = M @ np.array([c2, s2])
    v_new = M @ np.array([-s2, c2])
    e3 = u_new / np.linalg.norm(u_new)
    e4 = np.array([-e3[1], e3[0]])
    kappa = float(u_new @ e3)
    mu = float(v_new @ e4)
    return float(w), np.column_stack([e3, e4]), kappa, mu


def ellipse_frame(fd: FundamentalData, node, tol=DEFAULT):
    """Rotated adapted frame at ``node = (iu, iv)`` aligned with the ellipse axes.

    Returns (frame, kappa, mu) with kappa = lambda1, |mu| = lambda2 and
    K_N = 2 kappa mu.
    """
    iu, iv = node
    w, R, kappa, mu = ellipse_frame_from_alpha(fd.a11[iv, iu], fd.a12[iv, iu], fd.a22[iv, iu],
                                               tol=np.sqrt(tol.clamp * fd.scale))
    F = fd.frame[iv, iu]
    cw, sw = np.cos(w), np.sin(w)
    t1 = cw * F[:, 0] + sw * F[:, 1]
    t2 = -sw * F[:, 0] + cw * F[:, 1]
    n3 = R[0, 0] * F[:, 2] + R[1, 0] * F[:, 3]
    n4 = R[0, 1] * F[:, 2] + R[1, 1] * F[:, 3]
    m = np.column_stack([t1, t2, n3, n4])
    return (Frame4(m) if m.shape == (4, 4) else m), kappa, mu


# --------------------------------------------------------- Hopf differential

@dataclass(frozen=True)
class HopfData:
    phi: np.ndarray            # coefficients of alpha(d, d) on (e3, e4), complex (..., 2)
    phi_minus: np.ndarray
    phi_plus: np.ndarray
    psi_minus: np.ndarray
    psi_plus: np.ndarray
    omega: np.ndarray
    dbar_minus: np.ndarray
    dbar_plus: np.ndarray
    h_minus: np.ndarray
    h_plus: np.ndarray
    A_minus: np.ndarray
    A_plus: np.ndarray
    mask_minus: np.ndarray
    mask_plus: np.ndarray

    def get(self, name, sign):
        return getattr(self, f"{name}_{'plus' if sign > 0 else 'minus'}")


def isotropic_ambient(fd, minus, plus):
    """Ambient complex vectors minus*(e3 - i e4) and plus*(e3 + i e4)."""
    e3, e4 = fd.e3, fd.e4
    return minus[..., None] * (e3 - 1j * e4), plus[..., None] * (e3 + 1j * e4)


def covariant_dbar(fd, minus, plus, grid):
    """Normal covariant d/dzbar of minus*(e3 - i e4) and plus*(e3 + i e4).

    Differentiates the ambient complex vector fields and projects back, so the
    result does not depend on how the normal frame was chosen node by node.
    Returns the isotropic coefficients of the two results.
    """
    vm, vp = isotropic_ambient(fd, minus, plus)
    out = []
    for vec, sgn in ((vm, 1j), (vp, -1j)):
        x = chart.dzbar(vec, grid)
        a, b = _dot(x, fd.e3), _dot(x, fd.e4)
        out.append(0.5 * (a + sgn * b))
    return out[0], out[1]


def dbar_via_connection(fd, coeff, sign, grid):
    """Coefficient formula dbar(phi) + i sign' omega34(dbar) phi with the frame's omega.

    For N^- (sign = -1): dbar(phi^-) + i omega34(dbar) phi^-; for N^+ the sign of
    the connection term flips. Only meaningful where the frame is smooth.
    """
    om_bar = 0.5 * (fd.omega[..., 0] + 1j * fd.omega[..., 1])
    return chart.dzbar(coeff, grid) - sign * 1j * om_bar * coeff


def hopf(fd: FundamentalData, grid=None, tol=DEFAULT) -> HopfData:
    grid = grid or fd.grid
    lam2 = fd.lam2[..., None]
    phi = 0.5 * lam2 * (0.5 * (fd.a11 - fd.a22) - 1j * fd.a12)
    pm = 0.5 * (phi[..., 0] + 1j * phi[..., 1])
    pp = 0.5 * (phi[..., 0] - 1j * phi[..., 1])
    h3, h4 = fd.h[..., 0], fd.h[..., 1]
    psi_m = pm * (h3 - 1j * h4)
    psi_p = pp * (h3 + 1j * h4)
    dm, dp = covariant_dbar(fd, pm, pp, grid)
    big = max(float(np.max(np.abs(pm))), float(np.max(np.abs(pp))), 1e-300)
    mask_m = np.abs(pm) > tol.phi_mask * big
    mask_p = np.abs(pp) > tol.phi_mask * big
    with np.errstate(invalid="ignore", divide="ignore"):
        hm = np.where(mask_m, dm / np.where(mask_m, pm, 1), np.nan + 0j)
        hp = np.where(mask_p, dp / np.where(mask_p, pp, 1), np.nan + 0j)
        Am = 1j * (chart.dz(hm, grid) - np.abs(hm) ** 2)
        Ap = 1j * (chart.dz(hp, grid) - np.abs(hp) ** 2)
    return HopfData(phi=phi, phi_minus=pm, phi_plus=pp, psi_minus=psi_m, psi_plus=psi_p,
                    omega=fd.omega, dbar_minus=dm, dbar_plus=dp, h_minus=hm, h_plus=hp,
                    A_minus=Am, A_plus=Ap, mask_minus=mask_m, mask_plus=mask_p)


def vertical_harmonicity_residual(hd: HopfData, fd: FundamentalData, mask=None):
    """(r_minus, r_plus): max |dbar^s| / lambda^2 over ``mask``.

    Both are divided by the same reference size max(|phi^-|, |phi^+|) + max|H|,
    which stays nonzero on superconformal minimal surfaces.

    r^s close to zero means Phi^s is holomorphic, i.e. the Gauss lift G^s is
    vertically harmonic.
    """
    if mask is None:
        mask = fd.grid.trusted()
    Hn = float(np.max(np.sqrt(fd.H2)[mask]))
    phimax = max(float(np.max(np.abs(hd.phi_minus)[mask])), float(np.max(np.abs(hd.phi_plus)[mask])))
    den = phimax + Hn
    out = []
    for d in (hd.dbar_minus, hd.dbar_plus):
        num = float(np.max((np.abs(d) / fd.lam2)[mask]))
        out.append(num / den if den > 0 else num)
    return out[0], out[1]


def superconformal_sign(hd: HopfData, ratio=1e-3):
    """+1 / -1 if Phi^+ / Phi^- vanishes identically (relative to the other), else 0."""
    mm = float(np.max(np.abs(hd.phi_minus)))
    mp = float(np.max(np.abs(hd.phi_plus)))
    if mm == 0 and mp == 0:
        return 0
    if mp < ratio * mm:
        return 1
    if mm < ratio * mp:
        return -1
    return 0


# ------------------------------------------------------ Ricci-like identities

@dataclass
class RicciResiduals:
    """Residual fields of the two Ricci-like identities for both lift signs.

    r3[s] = Lap log|H|^2 + 2 s K_N and
    r4[s] = Lap log(|H|^2 - (K - c) - s K_N) - 2 (2K + s K_N),
    NaN where masked. ``max_r3`` / ``max_r4`` hold maxima over unmasked
    trusted nodes (None when nothing is left to evaluate).
    """

    r3: dict
    r4: dict
    max_r3: dict
    max_r4: dict
    applicable_r4: dict
    vh_sign: int
    warnings: list = field(default_factory=list)


def _masked_log_laplacian(x, lam, grid, mask):
    good = mask & (x > 0)
    logx = np.log(np.where(good, x, 1.0))
    lap = chart.laplace_beltrami(logx, lam, grid)
    ok = good.copy()
    # the 5-point stencil must only touch valid nodes
    for axis, per in ((0, grid.periodic_v), (1, grid.periodic_u)):
        for sh in (1, -1):
            nb = np.roll(good, sh, axis=axis)
            if not per:
                if axis == 0:
                    if sh == 1:
                        nb[0, :] = False
                    else:
                        nb[-1, :] = False
                else:
                    if sh == 1:
                        nb[:, 0] = False
                    else:
                        nb[:, -1] = False
            ok &= nb
    return np.where(ok, lap, np.nan), ok


def ricci_like_residuals(fd, cd, hd=None, grid=None, tol=DEFAULT, region=None, vh_sign=None):
    grid = grid or fd.grid
    trusted = grid.trusted() if region is None else region
    thr = tol.log_mask * cd.scale
    H2, K, KN, c = cd.H2, cd.K, cd.K_N, fd.c
    r3, r4, m3, m4, app = {}, {}, {}, {}, {}
    warnings = []
    sc = superconformal_sign(hd) if hd is not None else 0
    for s in (1, -1):
        lap, ok = _masked_log_laplacian(H2, fd.lam, grid, H2 > thr)
        r3[s] = lap + 2 * s * KN
        sel = ok & trusted
        m3[s] = float(np.max(np.abs(r3[s][sel]))) if np.any(sel) else None
        aux = H2 - (K - c) - s * KN
        # aux_s = 16|phi^s|^2 / lambda^4 vanishes identically on the superconformal sign
        app[s] = sc != s
        lap4, ok4 = _masked_log_laplacian(aux, fd.lam, grid, aux > thr)
        r4[s] = lap4 - 2 * (2 * K + s * KN)
        sel4 = ok4 & trusted
        m4[s] = float(np.max(np.abs(r4[s][sel4]))) if (np.any(sel4) and app[s]) else None
        if not app[s]:
            r4[s] = np.full_like(H2, np.nan)
    if vh_sign is None and hd is not None:
        rm, rp = vertical_harmonicity_residual(hd, fd, trusted)
        best = min(rm, rp)
        vh_sign = (1 if rp <= rm else -1) if best < tol.vertical_harmonic else 0
    if not vh_sign:
        warnings.append("no vertically harmonic lift detected; both signs reported")
    return RicciResiduals(r3=r3, r4=r4, max_r3=m3, max_r4=m4, applicable_r4=app,
                          vh_sign=int(vh_sign or 0), warnings=warnings)


# --------------------------------------------------- Euler numbers and zeros

@dataclass
class EulerReport:
    chi: float
    chi_N: float
    N_H2: int
    N_aux: Optional[int]
    lift_sign: int
    reliable: bool
    covered: bool
    zeros: list = field(default_factory=list)
    warnings: list = field(default_factory=list)


def _window_min(x, grid, r):
    from scipy.ndimage import minimum_filter

    modes = ["wrap" if grid.periodic_v else "nearest", "wrap" if grid.periodic_u else "nearest"]
    return minimum_filter(x, size=2 * r + 1, mode=modes)


def _loop(iv, iu, r, grid):
    """Counterclockwise square loop of half-width r around (iv, iu), or None if it leaves the grid."""
    pts = []
    for k in range(-r, r):
        pts.append((iv - r, iu + k))
    for k in range(-r, r):
        pts.append((iv + k, iu + r))
    for k in range(r, -r, -1):
        pts.append((iv + r, iu + k))
    for k in range(r, -r, -1):
        pts.append((iv + k, iu - r))
    out = []
    for a, b in pts:
        if grid.periodic_v:
            a %= grid.nv
        elif not 0 <= a < grid.nv:
            return None
        if grid.periodic_u:
            b %= grid.nu
        elif not 0 <= b < grid.nu:
            return None
        out.append((a, b))
    return out


def winding_number(values):
    """Winding of a closed sequence of nonzero complex numbers around 0."""
    v = np.asarray(values)
    steps = np.angle(np.roll(v, -1) / v)
    return float(np.sum(steps) / (2 * np.pi))


def _local_normal_frame(fd, center, nodes):
    """Continuous normal frame along ``nodes`` from the center's e3 projected to each normal plane."""
    ref = fd.e3[center]
    idx = tuple(np.array(nodes).T)
    e1, e2 = fd.e1[idx], fd.e2[idx]
    radial = None if fd.radial is None else fd.radial[idx]
    n3 = _normal_projector(e1, e2, radial)(np.broadcast_to(ref, e1.shape))
    n3 = n3 / np.linalg.norm(n3, axis=-1, keepdims=True)
    n4 = _oriented_e4(e1, e2, n3, radial)
    return n3, n4


def _candidates(x, grid, trusted, owner, thr, r):
    wmin = _window_min(x, grid, r)
    cand = (x <= wmin) & (x < thr) & owner
    pts = sorted(((float(x[iv, iu]), int(iv), int(iu)) for iv, iu in np.argwhere(cand)))
    kept = []
    for val, iv, iu in pts:
        close = False
        for _, jv, ju in kept:
            dv = abs(iv - jv)
            du = abs(iu - ju)
            if grid.periodic_v:
                dv = min(dv, grid.nv - dv)
            if grid.periodic_u:
                du = min(du, grid.nu - du)
            if max(dv, du) <= r:
                close = True
                break
        if not close:
            kept.append((val, iv, iu))
    return kept


def _zero_windings(fd, x, carrier, grid, owner, tol, label):
    """Windings of ``carrier(n3, n4, nodes)`` around candidate zeros of the field x >= 0."""
    r = tol.loop_radius
    trusted = grid.trusted()
    thr = tol.zero_candidate * max(float(np.max(x[trusted])), 1e-300)
    zeros, reliable = [], True
    for val, iv, iu in _candidates(x, grid, trusted, owner, thr, r):
        nodes = _loop(iv, iu, r, grid)
        if nodes is None or not all(trusted[a, b] for a, b in nodes):
            reliable = False
            zeros.append({"field": label, "iu": iu, "iv": iv, "winding": None, "reliable": False})
            continue
        n3, n4 = _local_normal_frame(fd, (iv, iu), nodes)
        t = carrier(n3, n4, nodes)
        if np.any(np.abs(t) == 0) or not np.all(np.isfinite(t)):
            reliable = False
            zeros.append({"field": label, "iu": iu, "iv": iv, "winding": None, "reliable": False})
            continue
        w = winding_number(t)
        wi = int(round(w))
        if abs(w - wi) > 0.1:
            reliable = False
        if wi != 0:
            zeros.append({"field": label, "iu": iu, "iv": iv, "u": float(grid.u[iu]),
                          "v": float(grid.v[iv]), "winding": wi, "reliable": True})
    return zeros, reliable


def euler_numbers(charts, tol=DEFAULT, vh_sign=0):
    """Euler numbers and zero counts over a chart stack.

    ``charts`` is a list of (Analysis, weight) pairs whose weights form a
    partition of unity on the surface (a single closed chart with weight 1
    is the common case). Zeros are attributed to the chart whose weight at
    the zero is at least 1/2.
    """
    chi = chi_n = 0.0
    covered = True
    zeros_h, reliable = [], True
    for k, (an, weight) in enumerate(charts):
        fd, cd = an.fd, an.cd
        g = fd.grid
        weight = np.asarray(weight, dtype=float)
        chi += chart.surface_integral(cd.K, fd.lam, g, weight) / (2 * np.pi)
        chi_n += chart.surface_integral(cd.K_N, fd.lam, g, weight) / (2 * np.pi)
        untrusted = ~g.trusted()
        if np.any(untrusted) and float(np.max(weight[untrusted])) > 1e-12:
            covered = False
        owner = weight >= 0.5

        def carrier_h(n3, n4, nodes, fd=fd):
            idx = tuple(np.array(nodes).T)
            H = fd.H_amb[idx]
            return _dot(H, n3) + 1j * _dot(H, n4)

        zs, ok = _zero_windings(fd, cd.H2, carrier_h, g, owner, tol, "H2")
        for z in zs:
            z["chart"] = k
        zeros_h += zs
        reliable &= ok
    windings = [z["winding"] for z in zeros_h if z["winding"] is not None]
    N_H2 = int(2 * sum(abs(w) for w in windings))
    warnings = []
    if windings:
        signs = {int(np.sign(w)) for w in windings}
        lift = signs.pop() if len(signs) == 1 else 0
        if lift == 0:
            warnings.append("zeros of H with windings of both signs")
    else:
        lift = int(vh_sign)
    n_aux = None
    zeros_aux = []
    if lift:
        n_aux, zeros_aux, ok = _aux_count(charts, lift, tol)
        reliable &= ok
    if not covered:
        warnings.append("grid does not cover a closed surface; chi and chi_N are not topological")
    return EulerReport(chi=float(chi), chi_N=float(chi_n), N_H2=N_H2, N_aux=n_aux, lift_sign=int(lift),
                       reliable=bool(reliable), covered=covered, zeros=zeros_h + zeros_aux,
                       warnings=warnings)


def _aux_count(charts, s, tol):
    """Zero count of |H|^2 - (K - c) - s K_N via the carrier 4 psi^s / (lambda^2 (H3 + s i H4))."""
    total, zeros, reliable = 0, [], True
    for k, (an, weight) in enumerate(charts):
        fd, cd, hd = an.fd, an.cd, an.hd
        if superconformal_sign(hd) == s:
            return None, [], True  # aux vanishes identically
        aux = cd.umbilic_margin - s * cd.K_N
        psi = hd.psi_plus if s > 0 else hd.psi_minus
        g = fd.grid

        def carrier(n3, n4, nodes, fd=fd, psi=psi):
            idx = tuple(np.array(nodes).T)
            H = fd.H_amb[idx]
            return 4 * psi[idx] / (fd.lam2[idx] * (_dot(H, n3) + s * 1j * _dot(H, n4)))

        zs, ok = _zero_windings(fd, np.maximum(aux, 0.0), carrier, g, np.asarray(weight) >= 0.5, tol, "aux")
        for z in zs:
            z["chart"] = k
        zeros += zs
        reliable &= ok
        total += int(2 * sum(abs(z["winding"]) for z in zs if z["winding"] is not None))
    return total, zeros, reliable


# ------------------------------------------------------------ one-stop entry

@dataclass(frozen=True)
class Analysis:
    imm: object
    jets: object
    fd: FundamentalData
    cd: CurvatureData
    hd: HopfData


def analyze(imm, mode="auto", tol=DEFAULT, check_isothermal=True):
    """Jets, fundamental data, curvatures and Hopf data of an immersion."""
    from .immersion import jets as make_jets

    j = make_jets(imm, mode)
    if check_isothermal:
        t = tol.isothermal_analytic if j.source == "analytic" else tol.isothermal
        chart.validate_isothermal(j.fu, j.fv, imm.grid, t)
    fd = fundamental_forms(j, imm.c, imm.grid, tol)
    cd = curvatures(fd, tol)
    hd = hopf(fd, imm.grid, tol)
    return Analysis(imm, j, fd, cd, hd)
