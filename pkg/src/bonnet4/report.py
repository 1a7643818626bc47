"""JSON-ready summaries of analyses, deformations and comparisons."""
import json
import math

import numpy as np

from . import chart
from .config import DEFAULT
from .errors import Bonnet4Error
from .gaussmap import gauss_map, jacobians
from .invariants import (euler_numbers, ricci_like_residuals, superconformal_sign,
                         vertical_harmonicity_residual)
from .lagrangian import lagrangian_differentials, lagrangian_test

SIG_DIGITS = 12


def clean(obj):
    """Plain-Python copy of ``obj`` with floats rounded to SIG_DIGITS significant digits.

    Rounding keeps reports byte-stable against last-bit differences; NaN and
    infinities become None.
    """
    if isinstance(obj, dict):
        return {str(k): clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [clean(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not math.isfinite(x):
            return None
        return float(f"{x:.{SIG_DIGITS}g}") + 0.0  # + 0.0 folds -0.0 into 0.0
    if isinstance(obj, np.ndarray):
        return clean(obj.tolist())
    return obj


def dumps(obj):
    return json.dumps(clean(obj), indent=2, sort_keys=True) + "\n"


def _range(x, mask):
    v = np.asarray(x)[mask]
    v = v[np.isfinite(v)]
    if v.size == 0:
        return None
    return [float(v.min()), float(v.max())]


def surface_report(an, stack=None, tol=DEFAULT):
    """Per-surface summary.

    ``stack`` is an optional list of (Analysis, weight) covering a closed
    surface; without it a closed single chart is used, and open charts get
    Euler numbers flagged as not covering.
    """
    fd, cd, hd = an.fd, an.cd, an.hd
    grid = fd.grid
    mask = grid.trusted()
    rm, rp = vertical_harmonicity_residual(hd, fd, mask)
    ric = ricci_like_residuals(fd, cd, hd, grid, tol)
    charts = stack if stack is not None else [(an, np.ones(grid.shape))]
    eu = euler_numbers(charts, tol, vh_sign=ric.vh_sign)
    rep = {
        "name": an.imm.name,
        "c": fd.c,
        "domain": grid.to_dict(),
        "jet_source": an.jets.source,
        "scale": cd.scale,
        "K_range": _range(cd.K, mask),
        "K_N_range": _range(cd.K_N, mask),
        "H_norm_range": _range(np.sqrt(cd.H2), mask),
        "lambda1_range": _range(cd.lambda1, mask),
        "lambda2_range": _range(cd.lambda2, mask),
        "superconformal_sign": superconformal_sign(hd),
        "residuals": {
            "r_minus": rm,
            "r_plus": rp,
            "vertically_harmonic_sign": ric.vh_sign,
            "R3": {"+": ric.max_r3[1], "-": ric.max_r3[-1]},
            "R4": {"+": ric.max_r4[1] if ric.applicable_r4[1] else "not applicable",
                   "-": ric.max_r4[-1] if ric.applicable_r4[-1] else "not applicable"},
        },
        "euler": {"chi": eu.chi, "chi_N": eu.chi_N, "N_H2": eu.N_H2, "N_aux": eu.N_aux,
                  "lift_sign": eu.lift_sign, "reliable": eu.reliable, "covered": eu.covered,
                  "zeros": eu.zeros, "charts": len(charts)},
        "warnings": list(ric.warnings) + list(eu.warnings),
    }
    if fd.c == 0:
        gm = gauss_map(fd)
        jp, jm, rk, rkn = jacobians(gm, fd, cd)
        rep["gauss_map"] = {"J_plus_range": _range(jp, mask), "J_minus_range": _range(jm, mask),
                            "K_residual": rk, "K_N_residual": rkn}
        lag = float(np.max(lagrangian_test(an.jets)))
        if lag < tol.lagrangian:
            L = lagrangian_differentials(fd, hd, grid, tol=tol)
            rep["lagrangian"] = {
                "lag_residual": lag,
                "holo_res_upsilon": L.holo_res_upsilon,
                "holo_res_theta": L.holo_res_theta,
                "isotropic_leg": L.isotropic_leg,
                "superconformal": superconformal_sign(hd) != 0,
                "maslov_loop_integrals": {k: _range(np.asarray(v), slice(None))
                                          for k, v in L.maslov_periods.items()},
            }
    return rep


def field_columns(an):
    """Per-node fields for CSV export."""
    fd, cd, hd = an.fd, an.cd, an.hd
    cols = {"lambda": fd.lam, "K": cd.K, "K_N": cd.K_N, "H2": cd.H2,
            "lambda1": cd.lambda1, "lambda2": cd.lambda2,
            "phi_minus": hd.phi_minus, "phi_plus": hd.phi_plus,
            "dbar_minus": hd.dbar_minus, "dbar_plus": hd.dbar_plus,
            "branch": fd.branch.astype(float)}
    if fd.c == 0:
        gm = gauss_map(fd)
        cols["g_plus"] = gm.g_plus
        cols["g_minus"] = gm.g_minus
    return cols


def export_fields(an, path):
    chart.export_csv(path, an.fd.grid, field_columns(an))


def deformation_certificate(dd, rec, src_an, rec_an=None, rms_to_source=None):
    """GCR residuals, integration diagnostics and |H| preservation of a reconstruction."""
    mask = rec.surface.grid.trusted()
    cert = {
        "mode": dd.mode,
        "theta": dd.theta,
        "lift_sign": dd.lift_sign,
        "angles": list(dd.angles),
        "gcr": {"gauss": rec.gcr.max_gauss, "codazzi": rec.gcr.max_codazzi, "ricci": rec.gcr.max_ricci},
        "path_independence": rec.path_independence,
        "position_path_independence": rec.position_path_independence,
        "metric_residual": rec.metric_residual,
        "orthogonality": rec.orthogonality,
        "closure_defect": rec.closure_defect,
    }
    if rec_an is not None:
        dH = np.abs(np.sqrt(rec_an.fd.H2) - np.sqrt(src_an.fd.H2))
        cert["H_norm_preservation"] = float(np.max(dH[mask]))
    if rms_to_source is not None:
        cert["procrustes_rms_to_source"] = rms_to_source
    return cert


def error_dict(exc):
    out = {"error": type(exc).__name__, "message": str(exc)}
    if isinstance(exc, Bonnet4Error) and getattr(exc, "node", None) is not None:
        out["node"] = list(exc.node)
    return out
