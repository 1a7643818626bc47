"""Central tolerance table.

All thresholds used for pass/fail decisions live here so a run can be
reproduced (or loosened) from one place. Values are relative to the surface
``scale = max(|H|^2, |K|, |K_N|, 1)`` unless the name says otherwise.
"""
from dataclasses import dataclass, fields, replace


@dataclass(frozen=True)
class Tolerances:
    frame_orthonormal: float = 1e-9
    frame_rank: float = 1e-10
    isothermal: float = 5e-2          # relative to lambda^2; FD jets of sampled grids
    isothermal_analytic: float = 1e-9
    sphere_radius: float = 1e-9       # |position| = 1/sqrt(c) for c > 0
    clamp: float = 1e-8               # negative ellipse magnitudes allowed before error
    h_branch: float = 1e-6            # |H| threshold for the H-aligned normal frame
    phi_mask: float = 1e-6            # |phi^s| threshold for h^s = dbar^s / phi^s
    log_mask: float = 1e-6            # threshold for log|H|^2 and log(aux)
    zero_candidate: float = 0.05      # |H|^2 local minima below this * max|H|^2
    loop_radius: int = 3              # cells
    trust_margin: int = 4             # nodes excluded at open edges
    lagrangian: float = 1e-6          # max |f*Omega| / lambda^2 to call a surface Lagrangian
    vertical_harmonic: float = 1e-2   # residual below this => lift treated as harmonic
    parallel_h: float = 1e-2          # both residuals below this => H parallel
    moduli_trust: float = 1e-4        # |H| threshold for building T
    class_zero: float = 1e-5          # q^s counts as zero below this * max(|phi|, lambda^2|H|)
    mismatch: float = 1e-3            # relative lambda / |H| mismatch refusing a pairing
    circle: float = 1e-4              # allowed distance of q/phi - 1 from the unit circle
    exact_floor: float = 1e-10        # errors below this count as resolved exactly
    min_order: float = 1.8
    path_factor: float = 10.0
    path_floor: float = 1e-6
    certificate: float = 1e-2         # deformation certificate green flags

    def override(self, **kw):
        known = {f.name for f in fields(self)}
        bad = set(kw) - known
        if bad:
            raise KeyError(f"unknown tolerance(s): {sorted(bad)}")
        return replace(self, **kw)


DEFAULT = Tolerances()
