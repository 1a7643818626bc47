"""Verification battery: every acceptance check, with convergence tables.

Each case returns a CaseResult made of scalar checks (value against a bound)
and convergence tables (errors on successively halved grids). A table passes
when every halving either shrinks the error by at least 2**min_order or
lands below the exact-resolution floor.
"""
from dataclasses import dataclass, field

import numpy as np

from . import chart
from .config import DEFAULT
from .deform import (deform_data, deform_data_two, gcr_residuals, max_abs_difference, procrustes_align,
                     reconstruct)
from .examples import CATALOG, make_example, make_stack
from .gaussmap import eigenfunction_residual, gauss_map, great_circle_distance, jacobians
from .immersion import RigidMotion, apply_rigid_motion, rotation_matrix
from .invariants import (analyze, ellipse_semiaxes, euler_numbers, ricci_like_residuals,
                         superconformal_sign, vertical_harmonicity_residual)
from .lagrangian import lagrangian_differentials, lagrangian_test
from .moduli import build_isometry, distortion, ellipse_congruence
from .report import clean, dumps


@dataclass
class CaseResult:
    key: str
    number: int
    title: str
    checks: list = field(default_factory=list)
    tables: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    @property
    def passed(self):
        return all(c["passed"] for c in self.checks) and all(t["passed"] for t in self.tables)

    def check(self, name, value, bound, kind="<="):
        if kind == "<=":
            ok = bool(np.isfinite(value) and value <= bound)
        elif kind == ">=":
            ok = bool(np.isfinite(value) and value >= bound)
        elif kind == "==":
            ok = value == bound
        else:
            raise ValueError(kind)
        self.checks.append({"name": name, "value": value, "bound": bound, "kind": kind, "passed": ok})
        return ok

    def to_dict(self):
        return {"key": self.key, "number": self.number, "title": self.title, "passed": self.passed,
                "checks": self.checks, "tables": self.tables, "notes": self.notes}


def convergence_table(name, levels, errors, tol=DEFAULT, band=None):
    """Pass/fail table for errors measured at grids halving the spacing each level.

    Without ``band`` a halving passes with ratio >= 2**min_order; with
    ``band = (lo, hi)`` the ratio must lie in that interval. Either way an
    error at or below ``tol.exact_floor`` on the finer level passes.
    """
    errors = [float(e) for e in errors]
    ratios, oks = [], []
    need = 2.0**tol.min_order
    for e0, e1 in zip(errors[:-1], errors[1:]):
        r = e0 / e1 if e1 > 0 else float("inf")
        ratios.append(r)
        if e1 <= tol.exact_floor:
            oks.append(True)
        elif band is not None:
            oks.append(band[0] <= r <= band[1])
        else:
            oks.append(r >= need)
    return {"name": name, "levels": list(levels), "errors": errors, "ratios": ratios,
            "rule": f"ratio in [{band[0]}, {band[1]}]" if band else f"ratio >= 2^{tol.min_order:g}",
            "exact_floor": tol.exact_floor, "passed": bool(all(oks)) and len(errors) >= 2}


def ladder(name, base, refine, params=None, chart_name="A"):
    """Examples on grids whose spacing halves from level to level."""
    ref = make_example(name, params, base, base, chart=chart_name)
    out = []
    for k in range(refine):
        nu = base * 2**k if ref.grid.periodic_u else (base - 1) * 2**k + 1
        nv = base * 2**k if ref.grid.periodic_v else (base - 1) * 2**k + 1
        out.append(make_example(name, params, nu, nv, chart=chart_name))
    return out


def fixed_box(grid, margin=DEFAULT.trust_margin):
    """Coordinate box of the trusted nodes of ``grid``.

    Convergence is measured on the box of the coarsest level so that every
    level sees the same physical region.
    """
    u0, u1, v0, v1 = grid.u[0], grid.u[-1], grid.v[0], grid.v[-1]
    if not grid.periodic_u:
        u0, u1 = grid.u[margin], grid.u[-1 - margin]
    if not grid.periodic_v:
        v0, v1 = grid.v[margin], grid.v[-1 - margin]
    return (float(u0), float(u1), float(v0), float(v1))


def box_mask(grid, box):
    return grid.region(box) & grid.trusted()


def _levels(imms):
    return [f"{m.grid.nu}x{m.grid.nv}" for m in imms]


def _analytic_examples(n=64):
    """Every built-in example (both charts of the spheres) with analytic jets."""
    out = []
    for name in sorted(CATALOG):
        out.append((name, make_example(name, None, n, n)))
        if name in ("sphere", "whitney_sphere"):
            out.append((name + "[B]", make_example(name, None, n, n, chart="B")))
    return out


# ------------------------------------------------------------------ cases

def case_closed_form(refine, tol):
    res = CaseResult("closed_form", 1, "closed-form invariants (analytic jets)")
    a = analyze(make_example("product_torus", {"a": 1, "b": 1}, 64, 64))
    m = a.fd.grid.trusted()
    res.check("product_torus |H|^2 - 1/2", float(np.max(np.abs(a.cd.H2 - 0.5)[m])), 1e-8)
    res.check("product_torus |K|", float(np.max(np.abs(a.cd.K)[m])), 1e-8)
    res.check("product_torus |K_N|", float(np.max(np.abs(a.cd.K_N)[m])), 1e-8)
    res.check("product_torus lambda1 - 1/sqrt2", float(np.max(np.abs(a.cd.lambda1 - 2**-0.5)[m])), 1e-8)
    res.check("product_torus lambda2", float(np.max(np.abs(a.cd.lambda2)[m])), 1e-8)
    a = analyze(make_example("clifford_torus", None, 64, 64))
    res.check("clifford |H| - 1", float(np.max(np.abs(np.sqrt(a.cd.H2) - 1)[m])), 1e-8)
    res.check("clifford |K|", float(np.max(np.abs(a.cd.K)[m])), 1e-8)
    res.check("clifford |K_N|", float(np.max(np.abs(a.cd.K_N)[m])), 1e-8)
    res.check("clifford lambda1 - 1", float(np.max(np.abs(a.cd.lambda1 - 1)[m])), 1e-8)
    res.check("clifford lambda2", float(np.max(np.abs(a.cd.lambda2)[m])), 1e-8)
    for imm, _ in make_stack("sphere", {"r": 1}, 64, 64):
        a = analyze(imm)
        tag = imm.params.get("chart", "A")
        res.check(f"sphere chart {tag} |K - 1|", float(np.max(np.abs(a.cd.K - 1))), 1e-8)
        res.check(f"sphere chart {tag} |phi|", float(np.max(np.abs(a.hd.phi))), 1e-8)
    return res


def _fd_axes_errors(imm, box):
    a = analyze(imm, mode="fd")
    fd, g = a.fd, a.fd.grid
    l1, l2 = ellipse_semiaxes(fd)
    K = -chart.laplace_beltrami(np.log(fd.lam), fd.lam, g)
    curl = chart.d_u(fd.omega[..., 1], g) - chart.d_v(fd.omega[..., 0], g)
    KN = -curl / fd.lam2
    m = box_mask(g, box)
    e1 = np.abs(l1**2 + l2**2 - (fd.H2 - (K - fd.c)))[m]
    e2 = np.abs(l1 * l2 - np.abs(KN) / 2)[m]
    return float(np.max(e1)), float(np.max(e2))


def case_axes(refine, tol):
    res = CaseResult("axes", 2, "semiaxis identities")
    for name, imm in _analytic_examples():
        a = analyze(imm)
        l1, l2 = ellipse_semiaxes(a.fd)
        cd = a.cd
        r1 = np.max(np.abs(l1**2 + l2**2 - (cd.H2 - (cd.K - a.fd.c))))
        r2 = np.max(np.abs(l1 * l2 - np.abs(cd.K_N) / 2))
        res.check(f"{name} analytic max residual / scale", float(max(r1, r2) / cd.scale), 1e-8)
    res.notes.append("FD jets: semiaxes from the SVD of the ellipse map, K = -Lap log lambda, "
                     "K_N from the curl of omega34")
    for name in sorted(CATALOG):
        if name == "graph":
            continue  # same surface as complex_curve_zz2 with default parameters
        imms = ladder(name, 64, refine)
        box = fixed_box(imms[0].grid)
        errs = [_fd_axes_errors(m, box) for m in imms]
        res.tables.append(convergence_table(f"{name} FD sum-of-squares identity", _levels(imms),
                                            [e[0] for e in errs], tol, band=(3.5, 4.5)))
        res.tables.append(convergence_table(f"{name} FD product identity", _levels(imms),
                                            [e[1] for e in errs], tol, band=(3.5, 4.5)))
    return res


def case_av(refine, tol):
    res = CaseResult("av", 3, "16|psi|^2 identity (analytic jets)")
    for name, imm in _analytic_examples():
        a = analyze(imm)
        cd, hd, fd = a.cd, a.hd, a.fd
        lam4 = fd.lam2**2
        worst = 0.0
        for s, psi in ((1, hd.psi_plus), (-1, hd.psi_minus)):
            rhs = cd.H2 * (cd.H2 - (cd.K - fd.c) - s * cd.K_N)
            worst = max(worst, float(np.max(np.abs(16 * np.abs(psi) ** 2 / lam4 - rhs))))
        res.check(f"{name} max residual / (lambda^4 scale)", worst / cd.scale, 1e-8)
    return res


def case_vertical(refine, tol):
    res = CaseResult("vertical", 4, "vertical harmonicity residuals")
    for name, signs in (("clifford_torus", (-1, 1)), ("whitney_sphere", None)):
        imms = ladder(name, 64, refine)
        ans = [analyze(m) for m in imms]
        box = fixed_box(imms[0].grid)
        if signs is None:
            s = superconformal_sign(ans[0].hd)
            res.notes.append(f"{name}: superconformal sign {s:+d}")
            signs = (s,)
        for s in signs:
            errs = [vertical_harmonicity_residual(a.hd, a.fd, box_mask(a.fd.grid, box))[0 if s < 0 else 1]
                    for a in ans]
            res.tables.append(convergence_table(f"{name} dbar^{'+' if s > 0 else '-'}", _levels(imms), errs, tol))
    imms = ladder("clothoid_circle", 64, refine)
    for m in imms:
        a = analyze(m)
        rm, rp = vertical_harmonicity_residual(a.hd, a.fd)
        lvl = f"{m.grid.nu}x{m.grid.nv}"
        res.check(f"clothoid control {lvl} dbar^- > 0.01 scale", rm, 0.01 * a.cd.scale, ">=")
        res.check(f"clothoid control {lvl} dbar^+ > 0.01 scale", rp, 0.01 * a.cd.scale, ">=")
    res.notes.append("generic control: clothoid x circle (Lagrangian, non-constant curvature); residuals are "
                     "relative to max|phi| + max|H|")
    return res


WHITNEY_BOX = (0.0, 2 * np.pi, -1.5, 1.5)


def case_ricci(refine, tol):
    res = CaseResult("ricci", 5, "Ricci-like identities")
    imms = ladder("whitney_sphere", 64, refine)
    r3, r4 = [], []
    vh = None
    for m in imms:
        a = analyze(m)
        reg = m.grid.region(WHITNEY_BOX) & m.grid.trusted()
        rr = ricci_like_residuals(a.fd, a.cd, a.hd, region=reg)
        vh = rr.vh_sign
        r3.append(rr.max_r3[vh] if vh else np.nan)
        r4.append(rr.applicable_r4.get(vh, False))
    res.notes.append(f"whitney_sphere: vertically harmonic sign {vh:+d}; interior box |v| <= 1.5")
    res.tables.append(convergence_table("whitney_sphere R3 (harmonic sign)", _levels(imms), r3, tol))
    if not any(r4):
        res.notes.append("whitney_sphere R4: not applicable on the harmonic sign "
                         "(|H|^2 - (K - c) - s K_N vanishes identically there)")
    imms = ladder("lawson_torus", 64, refine)
    errs = []
    for m in imms:
        a = analyze(m)
        rr = ricci_like_residuals(a.fd, a.cd, a.hd)
        errs.append(max(rr.max_r4[1], rr.max_r4[-1]))
    res.tables.append(convergence_table("lawson_torus R4 (both signs harmonic)", _levels(imms), errs, tol))
    for m in ladder("clifford_torus", 64, refine):
        a = analyze(m)
        rr = ricci_like_residuals(a.fd, a.cd, a.hd)
        worst = max(v for d in (rr.max_r3, rr.max_r4) for v in d.values() if v is not None)
        res.check(f"clifford {m.grid.nu}x{m.grid.nv} max R3, R4", worst, 1e-9)
    return res


def case_euler(refine, tol):
    res = CaseResult("euler", 6, "Euler numbers and zero counts")
    a = analyze(make_example("clifford_torus", None, 64, 64))
    eu = euler_numbers([(a, np.ones(a.fd.grid.shape))], tol)
    res.check("clifford |chi|", abs(eu.chi), 1e-6)
    res.check("clifford |chi_N|", abs(eu.chi_N), 1e-6)
    res.check("clifford N(|H|^2)", eu.N_H2, 0, "==")
    stack = [(analyze(m), w) for m, w in make_stack("sphere", None, 64, 64)]
    eu = euler_numbers(stack, tol)
    res.check("sphere stack |chi - 2|", abs(eu.chi - 2), 1e-3)
    stack = [(analyze(m), w) for m, w in make_stack("whitney_sphere", None, 128, 128)]
    vh = superconformal_sign(stack[0][0].hd)
    eu = euler_numbers(stack, tol, vh_sign=vh)
    res.check("whitney stack |chi - 2|", abs(eu.chi - 2), 1e-2)
    res.check("whitney stack |chi_N - 2|", abs(eu.chi_N - 2), 1e-2)
    res.check("whitney zero count reliable", bool(eu.reliable), True, "==")
    res.check("whitney 2 chi_N - lift * N(|H|^2)", 2 * int(round(eu.chi_N)) - eu.lift_sign * eu.N_H2, 0, "==")
    res.notes.append(f"whitney: N(|H|^2) = {eu.N_H2}, lift sign {eu.lift_sign:+d}")
    return res


GAUSS_EXAMPLES = ("clifford_torus", "clothoid_circle", "complex_curve_zz2", "lawson_torus",
                  "product_torus", "sphere", "whitney_sphere")


def case_gaussmap(refine, tol):
    res = CaseResult("gaussmap", 7, "Gauss map identities")
    for name in GAUSS_EXAMPLES:
        imms = ladder(name, 64, refine)
        ek, ekn = [], []
        eig = {1: [], -1: []}
        harmonic = None
        box = fixed_box(imms[0].grid)
        for m in imms:
            a = analyze(m)
            mask = box_mask(m.grid, box)
            gm = gauss_map(a.fd)
            _, _, rk, rkn = jacobians(gm, a.fd, a.cd, mask=mask)
            ek.append(rk)
            ekn.append(rkn)
            if harmonic is None:
                rm, rp = vertical_harmonicity_residual(a.hd, a.fd)
                harmonic = [s for s, r in ((-1, rm), (1, rp)) if r < tol.vertical_harmonic]
            for s in harmonic:
                eig[s].append(eigenfunction_residual(gm, a.fd, a.cd, s, mask=mask))
        lv = _levels(imms)
        res.tables.append(convergence_table(f"{name} K - (J+ + J-)", lv, ek, tol))
        res.tables.append(convergence_table(f"{name} K_N - (J+ - J-)", lv, ekn, tol))
        for s in harmonic:
            res.tables.append(convergence_table(f"{name} eigenfunction residual g{'+' if s > 0 else '-'}",
                                                lv, eig[s], tol))
    a = analyze(make_example("product_torus", None, 64, 64))
    gm = gauss_map(a.fd)
    res.check("product_torus g- distance from a great circle", great_circle_distance(gm.x_minus), 1e-9)
    return res


def _clifford_pair(n, theta, lift=1):
    im = make_example("clifford_torus", None, n, n)
    a = analyze(im)
    dd = deform_data(a.fd, a.hd, theta, lift, position=im.position)
    return im, a, dd


def case_roundtrip(refine, tol):
    res = CaseResult("roundtrip", 8, "associated family round trip")
    im, a, dd = _clifford_pair(128, 0.0)
    rec = reconstruct(dd)
    _, rms = procrustes_align(rec.surface, im)
    res.check("theta=0 Procrustes rms at 128x128", rms, 1e-6)
    metric, hdev, gcr, path, rmss, levels = [], [], [], [], [], []
    for k in range(refine):
        n = 64 * 2**k
        im, a, dd = _clifford_pair(n, np.pi / 2)
        rec = reconstruct(dd)
        b = analyze(rec.surface, mode="fd")
        m = rec.surface.grid.trusted()
        levels.append(f"{n}x{n}")
        metric.append(rec.metric_residual)
        hdev.append(float(np.max(np.abs(np.sqrt(b.fd.H2) - 1)[m])))
        gcr.append(rec.gcr.worst)
        path.append(rec.path_independence)
        _, rms = procrustes_align(rec.surface, im)
        rmss.append(rms)
        res.check(f"theta=pi/2 {n}x{n} Procrustes rms vs source", rms, 0.05, ">=")
    res.tables.append(convergence_table("theta=pi/2 metric residual (FD of positions)", levels, metric, tol))
    res.tables.append(convergence_table("theta=pi/2 | |H_theta| - 1 | (FD jets)", levels, hdev, tol))
    res.tables.append(convergence_table("theta=pi/2 GCR residual", levels, gcr, tol))
    res.tables.append(convergence_table("theta=pi/2 path independence", levels, path, tol))
    return res


def case_group(refine, tol):
    res = CaseResult("group", 9, "group and periodicity laws at the data level")
    for name in ("clifford_torus", "whitney_sphere", "lawson_torus"):
        im = make_example(name, None, 64, 64)
        a = analyze(im)
        for lift in (1, -1):
            t1, t2 = 0.7, 2.1
            step = deform_data(deform_data(a.fd, a.hd, t1, lift), theta=t2, lift_sign=lift)
            direct = deform_data(a.fd, a.hd, t1 + t2, lift)
            res.check(f"{name} lift {lift:+d} theta1 then theta2", max_abs_difference(step, direct), 1e-12)
            full = deform_data(a.fd, a.hd, 2 * np.pi, lift)
            ident = deform_data(a.fd, a.hd, 0.0, lift)
            res.check(f"{name} lift {lift:+d} theta=2pi vs 0", max_abs_difference(full, ident), 1e-12)
    return res


def case_distortion(refine, tol):
    res = CaseResult("distortion", 10, "distortion differential and angle extraction")
    holo, levels = [], []
    for k in range(refine):
        n = 64 * 2**k
        im, a, dd = _clifford_pair(n, 1.0)
        b = analyze(reconstruct(dd).surface)
        T = build_isometry(a.fd, b.fd, tol)
        rep = distortion(a.fd, a.hd, b.fd, b.hd, T, tol)
        holo.append(rep.holo_residual_Q)
        levels.append(f"{n}x{n}")
        if k == 0:
            th = rep.theta_plus
            res.check("plus pair class tag", rep.class_tag, "M_plus", "==")
            res.check("plus pair circle residual", th.circle_residual if th else np.inf, 1e-6)
            res.check("plus pair |theta - 1|", abs(th.value - 1.0) if th else np.inf, 1e-6)
            res.check("plus pair constancy", th.constancy if th else np.inf, 1e-6)
            res.check("plus pair reassembly", rep.reassembly_residual, 1e-9)
    res.tables.append(convergence_table("plus pair holo_residual_Q", levels, holo, tol))

    im = make_example("clifford_torus", None, 64, 64)
    a = analyze(im)
    dd = deform_data_two(a.fd, a.hd, 1.0, 2.0, position=im.position)
    b = analyze(reconstruct(dd).surface)
    T = build_isometry(a.fd, b.fd, tol)
    rep = distortion(a.fd, a.hd, b.fd, b.hd, T, tol)
    res.check("two-parameter pair class tag", rep.class_tag, "M_star", "==")
    qm = (1 - np.exp(1j * 1.0)) * a.hd.phi_minus
    qp = (1 - np.exp(-1j * 2.0)) * a.hd.phi_plus
    res.check("two-parameter Q^- vs (1 - e^{i theta}) Phi^-", float(np.max(np.abs(rep.q_minus - qm))), 1e-6)
    res.check("two-parameter Q^+ vs (1 - e^{-i phi}) Phi^+", float(np.max(np.abs(rep.q_plus - qp))), 1e-6)

    motion = RigidMotion(rotation_matrix(4, 0, 2, 0.7) @ rotation_matrix(4, 1, 3, -0.4),
                         np.array([0.5, -1.0, 2.0, 0.25]))
    c = analyze(apply_rigid_motion(im, motion))
    T = build_isometry(a.fd, c.fd, tol)
    rep = distortion(a.fd, a.hd, c.fd, c.hd, T, tol)
    res.check("rigid copy class tag", rep.class_tag, "trivial", "==")
    res.check("rigid copy max|q| / scale", max(rep.max_q) / a.cd.scale, 1e-8)
    return res


def case_ellipse(refine, tol):
    res = CaseResult("ellipse", 11, "normal curvature and ellipse congruence of constructed pairs")
    for label, name, lift in (("clifford plus", "clifford_torus", 1), ("lawson minus", "lawson_torus", -1)):
        out = {"K_N": [], "lambda1": [], "lambda2": []}
        levels = []
        for k in range(refine):
            n = 64 * 2**k
            im = make_example(name, None, n, n)
            a = analyze(im)
            dd = deform_data(a.fd, a.hd, 1.0, lift, position=im.position)
            b = analyze(reconstruct(dd).surface, mode="fd")
            ell = ellipse_congruence(a.fd, b.fd)
            for key in out:
                out[key].append(ell[key])
            levels.append(f"{n}x{n}")
        for key, errs in out.items():
            res.tables.append(convergence_table(f"{label} theta=1 |{key}^a - {key}^b| (FD jets for b)",
                                                levels, errs, tol))
    return res


def case_lagrangian(refine, tol):
    res = CaseResult("lagrangian", 12, "Lagrangian diagnostics")
    imms = ladder("product_torus", 64, refine)
    up, th = [], []
    for m in imms:
        a = analyze(m)
        L = lagrangian_differentials(a.fd, a.hd, tol=tol)
        up.append(L.holo_res_upsilon)
        th.append(L.holo_res_theta)
        if m is imms[0]:
            res.check("product_torus Lagrangian residual", float(np.max(lagrangian_test(a.jets))), 1e-9)
            res.check("product_torus isotropic leg", L.isotropic_leg, 1e-8)
    res.tables.append(convergence_table("product_torus Upsilon holomorphy", _levels(imms), up, tol))
    res.tables.append(convergence_table("product_torus Theta holomorphy", _levels(imms), th, tol))
    for name in ("whitney_sphere", "clothoid_circle"):
        a = analyze(make_example(name, None, 64, 64))
        L = lagrangian_differentials(a.fd, a.hd, tol=tol)
        res.check(f"{name} Lagrangian residual", float(np.max(lagrangian_test(a.jets))), 1e-9)
        res.check(f"{name} isotropic leg", L.isotropic_leg, 1e-8)
        if name == "whitney_sphere":
            res.check("whitney_sphere superconformal flag", superconformal_sign(a.hd) != 0, True, "==")
    return res


def case_determinism(refine, tol):
    """Runs a compact pipeline twice and compares the serialized reports byte for byte."""
    res = CaseResult("determinism", 13, "byte-identical reports")
    outs = [dumps([c.to_dict() for c in (case_closed_form(refine, tol), case_group(refine, tol),
                                         case_distortion(2, tol))]) for _ in range(2)]
    res.check("repeated runs identical", outs[0] == outs[1], True, "==")
    return res


CASES = {
    "closed_form": case_closed_form,
    "axes": case_axes,
    "av": case_av,
    "vertical": case_vertical,
    "ricci": case_ricci,
    "euler": case_euler,
    "gaussmap": case_gaussmap,
    "roundtrip": case_roundtrip,
    "group": case_group,
    "distortion": case_distortion,
    "ellipse": case_ellipse,
    "lagrangian": case_lagrangian,
    "determinism": case_determinism,
}
NUMBERS = {i + 1: key for i, key in enumerate(CASES)}


def resolve(case):
    """Case key from a key or a criterion number."""
    if isinstance(case, int) or (isinstance(case, str) and case.isdigit()):
        key = NUMBERS.get(int(case))
    else:
        key = case if case in CASES else None
    if key is None:
        raise KeyError(f"unknown case {case!r}; known: {', '.join(CASES)} or 1-{len(CASES)}")
    return key


def run_case(case, refine=3, tol=DEFAULT):
    if refine < 2:
        raise ValueError("refine needs at least 2 levels")
    return CASES[resolve(case)](refine, tol)


def run(cases=None, refine=3, tol=DEFAULT):
    keys = [resolve(c) for c in cases] if cases else list(CASES)
    return [run_case(k, refine, tol) for k in keys]


def report(results, refine):
    return clean({"refine": refine, "passed": all(r.passed for r in results),
                  "cases": [r.to_dict() for r in results]})


def _fmt(x):
    if isinstance(x, float):
        return f"{x:.3e}"
    return str(x)


def format_text(results):
    lines = []
    for r in results:
        lines.append(f"[{'PASS' if r.passed else 'FAIL'}] {r.number:2d} {r.key}: {r.title}")
        for c in r.checks:
            mark = "ok " if c["passed"] else "BAD"
            lines.append(f"    {mark} {c['name']}: {_fmt(c['value'])} {c['kind']} {_fmt(c['bound'])}")
        for t in r.tables:
            mark = "ok " if t["passed"] else "BAD"
            lines.append(f"    {mark} {t['name']} ({t['rule']})")
            for i, (lv, e) in enumerate(zip(t["levels"], t["errors"])):
                ratio = "" if i == 0 else f"  ratio {t['ratios'][i - 1]:.2f}"
                lines.append(f"          {lv:>9}  {e:.3e}{ratio}")
        for n in r.notes:
            lines.append(f"    note: {n}")
    return "\n".join(lines)
