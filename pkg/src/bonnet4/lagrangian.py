"""Lagrangian surfaces in (R^4, J~): Maslov form, mean curvature form, cubic form."""
from dataclasses import dataclass

import numpy as np

from . import chart
from .config import DEFAULT
from .errors import NonLagrangianError, UnsupportedAmbientError

_R = np.array([[0.0, -1.0], [1.0, 0.0]])


def standard_complex_structure():
    """J~ = diag(R, -R), R the rotation by +pi/2.

    Both blocks rotate a coordinate plane, so every product of a curve in the
    (x1, x2)-plane with a curve in the (x3, x4)-plane is Lagrangian. The minus
    sign on the second block makes {e1, e2, J~e1, J~e2} positively oriented
    for orthonormal e1, e2 (the plain complex structure diag(R, R) gives the
    opposite orientation).
    """
    J = np.zeros((4, 4))
    J[:2, :2] = _R
    J[2:, 2:] = -_R
    return J


J_STANDARD = standard_complex_structure()


def kahler_form(x, y, J=J_STANDARD):
    """Omega(x, y) = <x, J y>, broadcasting over leading axes."""
    return np.sum(x * (y @ J.T), axis=-1)


def orientation_compatible(J=J_STANDARD, trials=4, seed=0):
    rng = np.random.default_rng(seed)
    for _ in range(trials):
        q, _ = np.linalg.qr(rng.normal(size=(4, 2)))
        e1, e2 = q[:, 0], q[:, 1]
        if np.linalg.det(np.column_stack([e1, e2, J @ e1, J @ e2])) <= 0:
            return False
    return True


def lagrangian_test(jets, J=J_STANDARD):
    """|Omega(f_u, f_v)| / lambda^2 at every node."""
    if jets.fu.shape[-1] != 4:
        raise UnsupportedAmbientError("Lagrangian diagnostics need c = 0 (positions in R^4)")
    lam2 = np.sum(jets.fu**2, axis=-1)
    return np.abs(kahler_form(jets.fu, jets.fv, J)) / lam2


@dataclass(frozen=True)
class LagrangianData:
    lag_residual: np.ndarray
    maslov: np.ndarray          # (nv, nu, 2): varpi(d/du), varpi(d/dv)
    upsilon: np.ndarray
    theta: np.ndarray
    holo_res_upsilon: float
    holo_res_theta: float
    isotropic_leg: float        # max |N^+ part of J~ f_z| / lambda
    maslov_periods: dict


def _holo_residual(c, weight_power, fd, grid, mask):
    lam = fd.lam
    num = np.abs(chart.dzbar(c, grid)) / lam ** (weight_power + 1)
    den = float(np.max((np.abs(c) / lam**weight_power)[mask])) + float(np.max(np.sqrt(fd.H2)[mask]))
    return float(np.max(num[mask])) / den if den > 0 else float(np.max(num[mask]))


def lagrangian_differentials(fd, hd, grid=None, J=J_STANDARD, tol=DEFAULT, mask=None):
    """Maslov form, Upsilon = Omega(H, f_*d) dz and Theta = Omega(alpha(d, d), f_*d) dz^3.

    Holomorphy residuals are max |dbar c| over ``mask`` with c the
    coefficient, scaled by the matching power of lambda.
    """
    grid = grid or fd.grid
    if fd.c != 0:
        raise UnsupportedAmbientError("Lagrangian diagnostics need c = 0")
    mask = grid.trusted() if mask is None else mask
    fu = fd.e1 * fd.lam[..., None]
    fv = fd.e2 * fd.lam[..., None]
    lag = np.abs(kahler_form(fu, fv, J)) / fd.lam2
    worst = float(np.max(lag))
    if worst > tol.lagrangian:
        iv, iu = np.unravel_index(int(np.argmax(lag)), lag.shape)
        raise NonLagrangianError(
            f"surface is not Lagrangian: |Omega(f_u, f_v)|/lambda^2 = {worst:.3e} > {tol.lagrangian:g} "
            f"at node iu={iu}, iv={iv}")
    fz = 0.5 * (fu - 1j * fv)
    H = fd.H_amb
    phi_amb = hd.phi[..., 0:1] * fd.e3 + hd.phi[..., 1:2] * fd.e4
    upsilon = kahler_form(H, fz, J)
    theta = kahler_form(phi_amb, fz, J)
    JH = H @ J.T
    maslov = np.stack([np.sum(fu * JH, -1), np.sum(fv * JH, -1)], axis=-1) / np.pi
    Jfz = fz @ J.T
    a, b = np.sum(Jfz * fd.e3, -1), np.sum(Jfz * fd.e4, -1)
    plus = 0.5 * (a - 1j * b)
    leg = float(np.max(np.abs(plus) / fd.lam))
    periods = {}
    if grid.periodic_u:
        periods["u_loops"] = (np.sum(maslov[..., 0], axis=1) * grid.hu).tolist()
    if grid.periodic_v:
        periods["v_loops"] = (np.sum(maslov[..., 1], axis=0) * grid.hv).tolist()
    return LagrangianData(lag_residual=lag, maslov=maslov, upsilon=upsilon, theta=theta,
                          holo_res_upsilon=_holo_residual(upsilon, 1, fd, grid, mask),
                          holo_res_theta=_holo_residual(theta, 3, fd, grid, mask),
                          isotropic_leg=leg, maslov_periods=periods)
