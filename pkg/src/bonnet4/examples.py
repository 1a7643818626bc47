"""Built-in closed-form surfaces with analytic jets up to third order.

Every example is parametrized isothermally. Spheres (round and Whitney) come
on Mercator charts with the poles cut away; ``make_stack`` additionally
returns a second, rotated chart and a smooth partition of unity so that
integrals and zero counts cover the whole closed surface.
"""
import math
from functools import lru_cache

import numpy as np
import sympy as sp
from scipy.special import ellipj, ellipk

from .chart import ChartGrid
from .errors import ParameterError
from .immersion import JET_KEYS, ImmersionGrid, validate_isothermal

_u, _v = sp.symbols("u v", real=True)

# name -> (default params, description)
CATALOG = {
    "product_torus": ({"a": 1.0, "b": 1.0}, "circle(a) x circle(b) in R^4, arclength coordinates"),
    "clifford_torus": ({}, "(cos u, sin u, cos v, sin v)/sqrt 2, |H| = 1"),
    "sphere": ({"r": 1.0, "vmax": 2.2}, "round sphere of radius r in R^3 x {0}, Mercator chart"),
    "whitney_sphere": ({"vmax": 2.2}, "Whitney sphere (Lagrangian, superconformal), Mercator chart"),
    "complex_curve_zz2": ({}, "graph of z -> z^2 over [-1,1]^2"),
    "graph": ({"h1": "u**2 - v**2", "h2": "2*u*v", "half": 0.5},
              "graph (u, v, h1, h2) over [-half, half]^2, accepted only if isothermal"),
    "clothoid_circle": ({"k": 1.0, "half": 2.0},
                        "clothoid arc x unit circle (Lagrangian, generic curvature)"),
    "lawson_torus": ({"m": 2, "k": 1}, "Lawson's minimal torus tau_{m,k} in S^3, in R^4"),
    "spherical_torus": ({"a": 0.6}, "torus of radii a, sqrt(1-a^2) in S^3 inside S^4 (c = 1)"),
}

ALIASES = {"clifford": "clifford_torus", "whitney": "whitney_sphere", "torus": "product_torus",
           "zz2": "complex_curve_zz2", "lawson": "lawson_torus", "clothoid": "clothoid_circle"}

_ORDERS = {"f": (0, 0), "fu": (1, 0), "fv": (0, 1), "fuu": (2, 0), "fuv": (1, 1), "fvv": (0, 2),
           "fuuu": (3, 0), "fuuv": (2, 1), "fuvv": (1, 2), "fvvv": (0, 3)}


def canonical_name(name):
    name = ALIASES.get(name, name)
    if name not in CATALOG:
        raise ParameterError(f"unknown example {name!r}; known: {', '.join(sorted(CATALOG))}")
    return name


def _sympy_provider(expr):
    """Provider evaluating an explicit sympy vector expression and its derivatives."""
    funcs = {}
    for key, (i, j) in _ORDERS.items():
        e = expr
        if i:
            e = e.diff(_u, i)
        if j:
            e = e.diff(_v, j)
        funcs[key] = [sp.lambdify((_u, _v), comp, "numpy") for comp in e]

    def provider(U, V):
        out = {}
        for key, fs in funcs.items():
            out[key] = np.stack([np.broadcast_to(np.asarray(fn(U, V), dtype=float), U.shape) for fn in fs],
                                axis=-1)
        return out

    return provider


def _mercator(rotated):
    m = sp.Matrix([sp.cos(_u) / sp.cosh(_v), sp.sin(_u) / sp.cosh(_v), sp.tanh(_v)])
    if rotated:
        # chart B: rotate the domain sphere by the cyclic permutation (m3, m1, m2)
        m = sp.Matrix([m[2], m[0], m[1]])
    return m


def _whitney_expr(x):
    d = 1 + x[2] ** 2
    return sp.Matrix([x[0], x[0] * x[2], x[1], -x[1] * x[2]]) / d


@lru_cache(maxsize=None)
def _provider(name, key):
    params = dict(key)
    if name == "product_torus":
        a, b = params["a"], params["b"]
        e = sp.Matrix([a * sp.cos(_u / a), a * sp.sin(_u / a), b * sp.cos(_v / b), b * sp.sin(_v / b)])
    elif name == "clifford_torus":
        e = sp.Matrix([sp.cos(_u), sp.sin(_u), sp.cos(_v), sp.sin(_v)]) / sp.sqrt(2)
    elif name == "sphere":
        m = _mercator(params.get("chart") == "B")
        e = params["r"] * sp.Matrix([m[0], m[1], m[2], 0])
    elif name == "whitney_sphere":
        e = _whitney_expr(_mercator(params.get("chart") == "B"))
    elif name == "complex_curve_zz2":
        e = sp.Matrix([_u, _v, _u**2 - _v**2, 2 * _u * _v])
    elif name == "graph":
        h1 = _parse(params["h1"])
        h2 = _parse(params["h2"])
        e = sp.Matrix([_u, _v, h1, h2])
    elif name == "spherical_torus":
        a = params["a"]
        b = math.sqrt(1 - a * a)
        e = sp.Matrix([a * sp.cos(_u / a), a * sp.sin(_u / a), b * sp.cos(_v / b), b * sp.sin(_v / b), 0])
    elif name == "clothoid_circle":
        return _clothoid_provider(params["k"])
    elif name == "lawson_torus":
        return _lawson_provider(int(params["m"]), int(params["k"]))
    else:  # pragma: no cover - guarded by canonical_name
        raise ParameterError(name)
    return _sympy_provider(e)


def _parse(text):
    try:
        expr = sp.parse_expr(str(text), local_dict={"u": _u, "v": _v}, evaluate=True)
    except Exception as exc:  # sympy raises a zoo of exception types
        raise ParameterError(f"cannot parse graph function {text!r}: {exc}") from None
    if not expr.free_symbols <= {_u, _v}:
        raise ParameterError(f"graph function {text!r} may only use u and v")
    return expr


def _clothoid_provider(k):
    """gamma(u) = int_0^u (cos(k t^2/2), sin(k t^2/2)) dt times the unit circle in v."""
    from scipy.special import fresnel

    scale = math.sqrt(math.pi / k)

    def provider(U, V):
        S, C = fresnel(U / scale)
        th = 0.5 * k * U**2
        dth, ddth = k * U, k * np.ones_like(U)
        ct, st = np.cos(th), np.sin(th)
        cv, sv = np.cos(V), np.sin(V)
        z = np.zeros_like(U)
        out = {
            "f": np.stack([scale * C, scale * S, cv, sv], -1),
            "fu": np.stack([ct, st, z, z], -1),
            "fv": np.stack([z, z, -sv, cv], -1),
            "fuu": np.stack([-dth * st, dth * ct, z, z], -1),
            "fuv": np.zeros(U.shape + (4,)),
            "fvv": np.stack([z, z, -cv, -sv], -1),
            "fuuu": np.stack([-ddth * st - dth**2 * ct, ddth * ct - dth**2 * st, z, z], -1),
            "fuuv": np.zeros(U.shape + (4,)),
            "fuvv": np.zeros(U.shape + (4,)),
            "fvvv": np.stack([z, z, sv, -cv], -1),
        }
        return out

    return provider


def _lawson_period(m, k):
    mu = 1.0 - (k / m) ** 2
    return 4.0 * ellipk(mu) / m


def _lawson_provider(m, k):
    """Lawson's tau_{m,k}: (cos mx cos y, sin mx cos y, cos kx sin y, sin kx sin y).

    With y = am(m s | 1 - k^2/m^2) the coordinates (x, s) are isothermal and
    lambda^2 = m^2 cos^2 y + k^2 sin^2 y.
    """
    x, y = sp.symbols("x y", real=True)
    g = sp.Matrix([sp.cos(m * x) * sp.cos(y), sp.sin(m * x) * sp.cos(y),
                   sp.cos(k * x) * sp.sin(y), sp.sin(k * x) * sp.sin(y)])
    names = {}
    for i in range(4):
        for j in range(4 - i):
            e = g
            if i:
                e = e.diff(x, i)
            if j:
                e = e.diff(y, j)
            names[(i, j)] = [sp.lambdify((x, y), comp, "numpy") for comp in e]
    mu = 1.0 - (k / m) ** 2

    def provider(U, V):
        sn, cn, dn, yy = ellipj(m * V, mu)
        w1 = m * dn
        w2 = -(m**2) * mu * sn * cn
        w3 = -(m**3) * mu * dn * (cn**2 - sn**2)
        G = {key: np.stack([np.broadcast_to(np.asarray(fn(U, yy), float), U.shape) for fn in fs], -1)
             for key, fs in names.items()}
        a1, a2, a3 = (w[..., None] for w in (w1, w2, w3))
        return {
            "f": G[(0, 0)],
            "fu": G[(1, 0)],
            "fv": G[(0, 1)] * a1,
            "fuu": G[(2, 0)],
            "fuv": G[(1, 1)] * a1,
            "fvv": G[(0, 2)] * a1**2 + G[(0, 1)] * a2,
            "fuuu": G[(3, 0)],
            "fuuv": G[(2, 1)] * a1,
            "fuvv": G[(1, 2)] * a1**2 + G[(1, 1)] * a2,
            "fvvv": G[(0, 3)] * a1**3 + 3 * G[(0, 2)] * a1 * a2 + G[(0, 1)] * a3,
        }

    return provider


def _merge_params(name, params):
    defaults = CATALOG[name][0]
    params = dict(params or {})
    unknown = set(params) - set(defaults) - {"chart"}
    if unknown:
        raise ParameterError(f"{name}: unknown parameter(s) {sorted(unknown)}")
    out = dict(defaults)
    out.update(params)
    positive = {"a", "b", "r", "half", "vmax"} | ({"k"} if name == "clothoid_circle" else set())
    for key in positive & set(out):
        try:
            out[key] = float(out[key])
        except (TypeError, ValueError):
            raise ParameterError(f"{name}: parameter {key} must be a number, got {out[key]!r}") from None
        if not out[key] > 0:
            raise ParameterError(f"{name}: parameter {key} must be > 0, got {out[key]}")
    if name == "spherical_torus" and not out["a"] < 1:
        raise ParameterError("spherical_torus: need 0 < a < 1")
    if name == "lawson_torus":
        m, k = out["m"], out["k"]
        if int(m) != m or int(k) != k or not (m >= k >= 1):
            raise ParameterError("lawson_torus: need integers m >= k >= 1")
        out["m"], out["k"] = int(m), int(k)
    return out


def _domain(name, p, nu, nv, chart=None):
    tp = 2 * math.pi
    if name == "product_torus":
        return ChartGrid(0.0, tp * p["a"], 0.0, tp * p["b"], nu, nv, True, True)
    if name == "spherical_torus":
        b = math.sqrt(1 - p["a"] ** 2)
        return ChartGrid(0.0, tp * p["a"], 0.0, tp * b, nu, nv, True, True)
    if name == "clifford_torus":
        return ChartGrid(0.0, tp, 0.0, tp, nu, nv, True, True)
    if name in ("sphere", "whitney_sphere"):
        return ChartGrid(0.0, tp, -p["vmax"], p["vmax"], nu, nv, True, False)
    if name == "complex_curve_zz2":
        return ChartGrid(-1.0, 1.0, -1.0, 1.0, nu, nv, False, False)
    if name == "graph":
        h = p["half"]
        return ChartGrid(-h, h, -h, h, nu, nv, False, False)
    if name == "clothoid_circle":
        return ChartGrid(-p["half"], p["half"], 0.0, tp, nu, nv, False, True)
    if name == "lawson_torus":
        return ChartGrid(0.0, tp, 0.0, _lawson_period(p["m"], p["k"]), nu, nv, True, True)
    raise ParameterError(name)  # pragma: no cover


def make_example(name, params=None, nu=64, nv=64, chart="A"):
    """Sample a built-in surface on an ``nu`` x ``nv`` grid with analytic jets.

    ``chart`` selects the Mercator chart ("A", poles on the x3 axis of the
    domain sphere) or the rotated chart ("B") for the two sphere examples.
    """
    name = canonical_name(name)
    p = _merge_params(name, params)
    p.pop("chart", None)
    if chart not in ("A", "B"):
        raise ParameterError("chart must be 'A' or 'B'")
    if chart == "B" and name not in ("sphere", "whitney_sphere"):
        raise ParameterError(f"{name} has a single chart")
    grid = _domain(name, p, nu, nv)
    key = dict(p)
    if chart == "B":
        key["chart"] = "B"
    provider = _provider(name, tuple(sorted(key.items())))
    U, V = grid.mesh()
    pos = provider(U, V)["f"]
    c = 1.0 if name == "spherical_torus" else 0.0
    if c > 0:
        # the symbolic radius is exact; renormalize away rounding only
        pos = pos / np.linalg.norm(pos, axis=-1, keepdims=True)
    meta = dict(p)
    if chart == "B":
        meta["chart"] = "B"
    imm = ImmersionGrid(grid, pos, c=c, provider=provider, name=name, params=meta)
    if name == "graph":
        validate_isothermal(imm)
    return imm


def reattach_provider(imm):
    """Give a loaded grid back its analytic jets if it is an unmodified built-in example."""
    if imm.provider is not None or not imm.name:
        return imm
    try:
        params = dict(imm.params)
        chart = params.pop("chart", "A")
        ref = make_example(imm.name, params, imm.grid.nu, imm.grid.nv, chart=chart)
    except Exception:
        return imm
    if ref.grid == imm.grid and ref.c == imm.c and np.array_equal(ref.position, imm.position):
        return ref
    return imm


def _smoothstep(t):
    """C-infinity step: 0 for t <= 0, 1 for t >= 1."""
    t = np.clip(t, 0.0, 1.0)
    a = np.where(t > 0, np.exp(-1.0 / np.maximum(t, 1e-300)), 0.0)
    b = np.where(t < 1, np.exp(-1.0 / np.maximum(1 - t, 1e-300)), 0.0)
    return a / (a + b)


def chart_a_weight(x3):
    """Partition weight of chart A as a function of the domain-sphere height."""
    return _smoothstep((0.95 - np.abs(x3)) / 0.15)


def make_stack(name, params=None, nu=64, nv=64):
    """Charts covering a closed surface, each paired with a partition weight.

    Returns a list of (ImmersionGrid, weight) with weights summing to one
    over the surface. Tori come as a single chart with weight 1.
    """
    name = canonical_name(name)
    if name not in ("sphere", "whitney_sphere"):
        imm = make_example(name, params, nu, nv)
        if not imm.grid.closed:
            raise ParameterError(f"{name} is not a closed surface")
        return [(imm, np.ones(imm.grid.shape))]
    p = _merge_params(name, params)
    if math.tanh(p["vmax"]) < 0.96:
        raise ParameterError("vmax too small for the chart stack (need tanh(vmax) >= 0.96)")
    out = []
    for ch in ("A", "B"):
        imm = make_example(name, params, nu, nv, chart=ch)
        U, V = imm.grid.mesh()
        if ch == "A":
            x3 = np.tanh(V)
        else:
            x3 = np.sin(U) / np.cosh(V)  # x = (m3, m1, m2), so x3 = m2
        wa = chart_a_weight(x3)
        out.append((imm, wa if ch == "A" else 1.0 - wa))
    return out


def catalog_text():
    lines = []
    for name in sorted(CATALOG):
        defaults, desc = CATALOG[name]
        ps = ", ".join(f"{k}={v}" for k, v in defaults.items())
        lines.append(f"{name}({ps}): {desc}")
    return "\n".join(lines)


__all__ = ["make_example", "make_stack", "reattach_provider", "CATALOG", "JET_KEYS", "catalog_text"]
