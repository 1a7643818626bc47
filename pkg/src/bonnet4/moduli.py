"""Pairs of isometric surfaces with the same mean curvature.

A normal bundle isometry T carrying H_a to H_b is built from the two mean
curvature directions; the distortion Q = Phi_a - T^{-1} Phi_b then splits into
isotropic parts whose vanishing pattern classifies the pair.
"""
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from . import chart
from .config import DEFAULT
from .errors import InvalidPairError, IsometryUndeterminedError, MeanCurvatureMismatch, PreconditionError
from .invariants import covariant_dbar, curvatures

TAGS = ("trivial", "M_minus", "M_plus", "M_star")


@dataclass(frozen=True)
class NormalBundleIsometry:
    """T maps coefficients (x, y) on (e3, e4) of surface a to R(psi)(x, y) on (e3, e4) of b.

    On isotropic coefficients T multiplies the N^- part by e^{i psi} and the
    N^+ part by e^{-i psi}. ``valid`` marks the nodes where psi was measured
    rather than propagated.
    """

    psi: np.ndarray
    valid: np.ndarray
    parallel_residual: float
    grid: chart.ChartGrid

    @property
    def rotation(self):
        return np.exp(1j * self.psi)


def _components(mask, grid):
    """Number of connected components of ``mask``, gluing across periodic seams."""
    lab, n = ndimage.label(mask)
    if n <= 1:
        return n
    parent = list(range(n + 1))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    pairs = []
    if grid.periodic_u:
        pairs.append((lab[:, 0], lab[:, -1]))
    if grid.periodic_v:
        pairs.append((lab[0, :], lab[-1, :]))
    for x, y in pairs:
        for i, j in zip(x, y):
            if i and j:
                parent[find(i)] = find(j)
    return len({find(i) for i in range(1, n + 1)})


def common_grid(ga, gb):
    """Grid with the shared nodes of ga and gb, periodic only where both are.

    A reconstructed surface that does not close is stored on an opened grid
    with the same nodes as its source.
    """
    same = (ga.nu == gb.nu and ga.nv == gb.nv
            and np.isclose(ga.u0, gb.u0) and np.isclose(ga.v0, gb.v0)
            and np.isclose(ga.hu, gb.hu) and np.isclose(ga.hv, gb.hv))
    if not same:
        raise PreconditionError("surfaces must be sampled on the same chart nodes")
    if ga.periodic_u == gb.periodic_u and ga.periodic_v == gb.periodic_v:
        return ga
    pu, pv = ga.periodic_u and gb.periodic_u, ga.periodic_v and gb.periodic_v
    u1 = ga.u1 if pu else ga.u0 + (ga.nu - 1) * ga.hu
    v1 = ga.v1 if pv else ga.v0 + (ga.nv - 1) * ga.hv
    return chart.ChartGrid(ga.u0, u1, ga.v0, v1, ga.nu, ga.nv, pu, pv)


def _check_pair(fd_a, fd_b, tol):
    grid = common_grid(fd_a.grid, fd_b.grid)
    if fd_a.c != fd_b.c:
        raise PreconditionError(f"ambient curvatures differ: {fd_a.c} vs {fd_b.c}")
    mask = grid.trusted()
    Ha, Hb = np.sqrt(fd_a.H2), np.sqrt(fd_b.H2)
    scale = max(fd_a.scale, fd_b.scale)
    dH = np.abs(Ha - Hb)[mask]
    if np.max(dH) > tol.mismatch * np.sqrt(scale):
        iv, iu = np.argwhere(mask)[int(np.argmax(dH))]
        raise MeanCurvatureMismatch(
            f"|H| differs by {np.max(dH):.3e} > {tol.mismatch:g} * sqrt(scale) at node iu={iu}, iv={iv}; "
            "the surfaces do not have the same mean curvature")
    dl = (np.abs(fd_a.lam - fd_b.lam) / fd_a.lam)[mask]
    if np.max(dl) > tol.mismatch:
        iv, iu = np.argwhere(mask)[int(np.argmax(dl))]
        raise InvalidPairError(
            f"conformal factors differ by {np.max(dl):.3e} (relative) > {tol.mismatch:g} at node "
            f"iu={iu}, iv={iv}; the surfaces are not isometric in this chart")
    return grid


def build_isometry(fd_a, fd_b, tol=DEFAULT):
    """Normal bundle isometry with T(H_a) = H_b, from the angle between the two H directions.

    psi is measured where both |H| exceed ``tol.moduli_trust * scale`` on the
    trusted region, which must be connected, and copied from the nearest
    measured node elsewhere.
    """
    grid = _check_pair(fd_a, fd_b, tol)
    scale = max(fd_a.scale, fd_b.scale)
    thr = tol.moduli_trust * scale
    Ha, Hb = np.sqrt(fd_a.H2), np.sqrt(fd_b.H2)
    valid = grid.trusted() & (Ha > thr) & (Hb > thr)
    if not np.any(valid):
        raise IsometryUndeterminedError(
            f"|H| <= {tol.moduli_trust:g} * scale everywhere on the trusted region; T is not determined by H")
    ncomp = _components(valid, grid)
    if ncomp > 1:
        raise IsometryUndeterminedError(
            f"the region where H does not vanish has {ncomp} components; T is not determined")
    za = fd_a.h[..., 0] + 1j * fd_a.h[..., 1]
    zb = fd_b.h[..., 0] + 1j * fd_b.h[..., 1]
    psi = np.angle(zb * np.conj(za))
    if not np.all(valid):
        _, (iy, ix) = ndimage.distance_transform_edt(~valid, return_indices=True)
        psi = psi[iy, ix]
    rot = np.exp(1j * psi)
    # d psi without branch cuts: Im(conj(z) dz) for z = e^{i psi}
    dpsi = np.stack([np.imag(np.conj(rot) * chart.d_u(rot, grid)),
                     np.imag(np.conj(rot) * chart.d_v(rot, grid))], axis=-1)
    defect = np.linalg.norm(dpsi - (fd_a.omega - fd_b.omega), axis=-1) / fd_a.lam
    res = float(np.max(defect[valid]))
    return NormalBundleIsometry(psi=psi, valid=valid, parallel_residual=res, grid=grid)


@dataclass(frozen=True)
class ThetaEstimate:
    value: float
    constancy: float
    circle_residual: float
    samples: int


@dataclass
class DistortionReport:
    q_minus: np.ndarray
    q_plus: np.ndarray
    theta_minus: object
    theta_plus: object
    class_tag: str
    holo_residual_Q: float
    reassembly_residual: float
    max_q: tuple
    threshold: float
    warnings: list = field(default_factory=list)


def theta_extract(q, phi, sign, mask=None, tol=DEFAULT):
    """Solve q = (1 - e^{-/+ i theta}) phi pointwise for sign = +1 / -1.

    Returns a ThetaEstimate with the circular mean, the RMS angular deviation
    from it (the circular spread) and max | |q/phi - 1| - 1 |. A large circle residual means q is
    not of this form at all and raises InvalidPairError.
    """
    if mask is None:
        mask = np.ones(np.shape(q), dtype=bool)
    big = float(np.max(np.abs(phi)[mask])) if np.any(mask) else 0.0
    if big <= 0:
        raise PreconditionError("phi vanishes on the region; theta is not determined")
    sel = mask & (np.abs(phi) > DEFAULT.phi_mask * big)
    r = q[sel] / phi[sel]
    circle = float(np.max(np.abs(np.abs(r - 1) - 1)))
    if circle > tol.circle:
        raise InvalidPairError(
            f"q/phi leaves the unit circle about 1 by {circle:.3e} > {tol.circle:g}; "
            "not a same-mean-curvature pair")
    w = 1 - r
    angles = -np.angle(w) if sign > 0 else np.angle(w)
    z = np.exp(1j * angles)
    m = np.mean(z)
    if abs(m) < 1e-12:
        return ThetaEstimate(value=float("nan"), constancy=float("inf"), circle_residual=circle,
                             samples=int(sel.sum()))
    value = float(np.mod(np.angle(m), 2 * np.pi))
    constancy = float(np.sqrt(np.mean(np.angle(z * np.exp(-1j * value)) ** 2)))
    return ThetaEstimate(value=value, constancy=constancy, circle_residual=circle, samples=int(sel.sum()))


def distortion(fd_a, hd_a, fd_b, hd_b, T: NormalBundleIsometry, tol=DEFAULT, mask=None):
    grid = T.grid
    mask = grid.trusted() if mask is None else mask
    rot = T.rotation
    q_minus = hd_a.phi_minus - np.conj(rot) * hd_b.phi_minus
    q_plus = hd_a.phi_plus - rot * hd_b.phi_plus

    # Phi_a - T^{-1} Phi_b in real-frame coefficients, for the reassembly check
    c, s = np.cos(T.psi), np.sin(T.psi)
    pb = hd_b.phi
    back = np.stack([c * pb[..., 0] + s * pb[..., 1], -s * pb[..., 0] + c * pb[..., 1]], axis=-1)
    Q = hd_a.phi - back
    Qre = np.stack([q_minus + q_plus, -1j * (q_minus - q_plus)], axis=-1)
    reassembly = float(np.max(np.abs(Q - Qre)))

    lam2H = fd_a.lam2 * np.sqrt(fd_a.H2)
    ref = max(float(np.max(np.abs(hd_a.phi_minus)[mask])), float(np.max(np.abs(hd_a.phi_plus)[mask])),
              float(np.max(lam2H[mask])))
    thr = tol.class_zero * ref
    mq = (float(np.max(np.abs(q_minus)[mask])), float(np.max(np.abs(q_plus)[mask])))
    zero_m, zero_p = mq[0] < thr, mq[1] < thr
    tag = ("trivial" if zero_m and zero_p else "M_plus" if zero_m else
           "M_minus" if zero_p else "M_star")

    dm, dp = covariant_dbar(fd_a, q_minus, q_plus, grid)
    den = max(float(np.max(np.abs(hd_a.phi_minus)[mask])), float(np.max(np.abs(hd_a.phi_plus)[mask]))) \
        + float(np.max(np.sqrt(fd_a.H2)[mask]))
    num = max(float(np.max((np.abs(dm) / fd_a.lam2)[mask])), float(np.max((np.abs(dp) / fd_a.lam2)[mask])))
    holo = num / den if den > 0 else num

    th_m = th_p = None
    if not zero_m:
        th_m = theta_extract(q_minus, hd_a.phi_minus, -1, mask, tol)
    if not zero_p:
        th_p = theta_extract(q_plus, hd_a.phi_plus, 1, mask, tol)
    warnings = []
    for name, th in (("theta_minus", th_m), ("theta_plus", th_p)):
        if th is not None and th.constancy > 1e-3:
            warnings.append(f"{name} is not constant (circular std {th.constancy:.3e}): "
                            "valid pair, non-harmonic lift")
    return DistortionReport(q_minus=q_minus, q_plus=q_plus, theta_minus=th_m, theta_plus=th_p,
                            class_tag=tag, holo_residual_Q=holo, reassembly_residual=reassembly,
                            max_q=mq, threshold=thr, warnings=warnings)


def ellipse_congruence(fd_a, fd_b, mask=None):
    """max of |K_N^a - K_N^b|, |lambda1^a - lambda1^b|, |lambda2^a - lambda2^b| over ``mask``."""
    mask = common_grid(fd_a.grid, fd_b.grid).trusted() if mask is None else mask
    ca, cb = curvatures(fd_a), curvatures(fd_b)
    return {
        "K_N": float(np.max(np.abs(ca.K_N - cb.K_N)[mask])),
        "lambda1": float(np.max(np.abs(ca.lambda1 - cb.lambda1)[mask])),
        "lambda2": float(np.max(np.abs(ca.lambda2 - cb.lambda2)[mask])),
    }


def compare(an_a, an_b, ids=("a", "b"), tol=DEFAULT):
    """Comparison report (plain dict) for two analyzed surfaces."""
    T = build_isometry(an_a.fd, an_b.fd, tol)
    rep = distortion(an_a.fd, an_a.hd, an_b.fd, an_b.hd, T, tol)
    ell = ellipse_congruence(an_a.fd, an_b.fd)

    def theta(th):
        if th is None:
            return None
        return {"value": th.value, "constancy": th.constancy, "circle_residual": th.circle_residual}

    return {
        "pair": list(ids),
        "parallel_residual": T.parallel_residual,
        "class_tag": rep.class_tag,
        "theta_minus": theta(rep.theta_minus),
        "theta_plus": theta(rep.theta_plus),
        "holo_residual_Q": rep.holo_residual_Q,
        "max_q_minus": rep.max_q[0],
        "max_q_plus": rep.max_q[1],
        "class_threshold": rep.threshold,
        "reassembly_residual": rep.reassembly_residual,
        "ellipse_congruence_residual": max(ell.values()),
        "ellipse_congruence": ell,
        "warnings": rep.warnings,
    }
