"""Small exact linear algebra in R^4: frames, bivectors, complex normals.

Conventions used throughout the package:

* A frame is (e1, e2, e3, e4) with e1, e2 tangent and e3, e4 normal,
  positively oriented, and e4 = J_perp e3.
* N^- = span(e3 - i e4) and N^+ = span(e3 + i e4). With J_perp e3 = e4 and
  J_perp e4 = -e3 one has J_perp (e3 - i e4) = i (e3 - i e4), so N^- is the
  +i eigenline of J_perp.
* Bivectors use the basis e12, e13, e14, e23, e24, e34 (indices 0-based in
  code: (0,1), (0,2), (0,3), (1,2), (1,3), (2,3)).

Functions broadcast over leading axes so the same code serves single values
and whole grids.
"""
from dataclasses import dataclass

import numpy as np

from .config import DEFAULT
from .errors import DegenerateFrameError

BIVECTOR_PAIRS = ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3))

# *e12 = e34, *e13 = -e24, *e14 = e23 and the inverses.
STAR = np.zeros((6, 6))
for _src, _dst, _sgn in ((0, 5, 1), (1, 4, -1), (2, 3, 1), (3, 2, 1), (4, 1, -1), (5, 0, 1)):
    STAR[_dst, _src] = _sgn

_S = 1.0 / np.sqrt(2.0)
# Orthonormal bases of the +1 / -1 eigenspaces of STAR, ordered as the
# self-dual / anti-self-dual parts of e12, e13, e14 (rescaled to unit length).
SELF_DUAL_BASIS = _S * np.array([
    [1, 0, 0, 0, 0, 1],
    [0, 1, 0, 0, -1, 0],
    [0, 0, 1, 1, 0, 0],
], dtype=float)
ANTI_SELF_DUAL_BASIS = _S * np.array([
    [1, 0, 0, 0, 0, -1],
    [0, 1, 0, 0, 1, 0],
    [0, 0, 1, -1, 0, 0],
], dtype=float)


def _cross(*vectors):
    """Vector w with <w, x> = det[v_1, ..., v_{n-1}, x], by cofactor expansion."""
    M = np.stack(np.broadcast_arrays(*[np.asarray(v, dtype=float) for v in vectors]), axis=-1)
    n = M.shape[-2]
    out = []
    for row in range(n):
        minor = np.delete(M, row, axis=-2)
        out.append((-1) ** (row + n - 1) * np.linalg.det(minor))
    return np.stack(out, axis=-1)


def cross4(a, b, c):
    """Vector w with <w, x> = det[a, b, c, x] for every x in R^4."""
    return _cross(a, b, c)


def cross5(a, b, c, d):
    """R^5 analogue of ``cross4``: <w, x> = det[a, b, c, d, x]."""
    return _cross(a, b, c, d)


def wedge(a, b):
    """a ^ b as six components in the fixed bivector basis."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return np.stack([a[..., i] * b[..., j] - a[..., j] * b[..., i] for i, j in BIVECTOR_PAIRS], axis=-1)


def bivector_inner(p, q):
    # The basis e_i ^ e_j (i < j) is orthonormal, so this is the plain dot
    # product; for simple bivectors it equals the Gram determinant.
    return np.sum(np.asarray(p) * np.asarray(q), axis=-1)


def hodge_star(b):
    return np.asarray(b, dtype=float) @ STAR.T


def hodge_split(b):
    """Split a bivector into (self-dual, anti-self-dual) parts."""
    b = np.asarray(b, dtype=float)
    sb = hodge_star(b)
    return 0.5 * (b + sb), 0.5 * (b - sb)


def self_dual_coords(b):
    """Coordinates of the self-dual part of ``b`` in SELF_DUAL_BASIS."""
    return np.asarray(b, dtype=float) @ SELF_DUAL_BASIS.T


def anti_self_dual_coords(b):
    return np.asarray(b, dtype=float) @ ANTI_SELF_DUAL_BASIS.T


@dataclass(frozen=True)
class CNormal:
    """Complexified normal vector a*e3 + b*e4 relative to a fixed frame."""

    a: complex
    b: complex

    @property
    def minus(self):
        return isotropic_parts(self.a, self.b)[0]

    @property
    def plus(self):
        return isotropic_parts(self.a, self.b)[1]

    @classmethod
    def from_isotropic(cls, minus, plus):
        a, b = from_isotropic(minus, plus)
        return cls(a, b)

    def bilinear(self, other):
        """Complex bilinear (not Hermitian) pairing <xi, eta>."""
        return self.a * other.a + self.b * other.b


def isotropic_parts(a, b):
    """Coefficients (minus, plus) of a*e3 + b*e4 on (e3 - i e4, e3 + i e4)."""
    a = np.asarray(a)
    b = np.asarray(b)
    return 0.5 * (a + 1j * b), 0.5 * (a - 1j * b)


def from_isotropic(minus, plus):
    minus = np.asarray(minus)
    plus = np.asarray(plus)
    return minus + plus, -1j * (minus - plus)


@dataclass(frozen=True)
class NormalRotation:
    """Rotation of the oriented normal plane by ``angle``.

    J_angle = cos(angle) + sin(angle) J_perp multiplies N^- components by
    e^{i angle} and N^+ components by e^{-i angle}.
    """

    angle: float

    def apply(self, xi: CNormal) -> CNormal:
        m, p = isotropic_parts(xi.a, xi.b)
        return CNormal.from_isotropic(m * np.exp(1j * self.angle), p * np.exp(-1j * self.angle))

    def inverse(self):
        return NormalRotation(-self.angle)


@dataclass(frozen=True)
class Frame4:
    """Oriented orthonormal frame, stored as a 4x4 matrix with columns e1..e4."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=float)
        if m.shape != (4, 4):
            raise ValueError("Frame4 expects a 4x4 matrix")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def e1(self):
        return self.matrix[:, 0]

    @property
    def e2(self):
        return self.matrix[:, 1]

    @property
    def e3(self):
        return self.matrix[:, 2]

    @property
    def e4(self):
        return self.matrix[:, 3]

    def is_valid(self, tol=DEFAULT.frame_orthonormal):
        m = self.matrix
        return (np.max(np.abs(m.T @ m - np.eye(4))) < tol
                and abs(np.linalg.det(m) - 1.0) < tol)

    @classmethod
    def standard(cls):
        return cls(np.eye(4))


def frame_orthonormalize(raw, tol=DEFAULT.frame_rank):
    """Gram-Schmidt on four vectors (columns of ``raw`` or a sequence).

    Returns ``(Frame4, flipped)``. The span of the first two vectors is kept;
    if the result is negatively oriented e4 is negated and ``flipped`` is True.
    """
    vecs = np.array(raw, dtype=float)
    if vecs.shape != (4, 4):
        raise ValueError("need four 4-vectors")
    if not isinstance(raw, np.ndarray):
        vecs = vecs.T  # a sequence of vectors, make them columns
    scale = max(np.max(np.linalg.norm(vecs, axis=0)), 1e-300)
    out = np.zeros((4, 4))
    for k in range(4):
        w = vecs[:, k].copy()
        for j in range(k):
            w -= (out[:, j] @ w) * out[:, j]
        n = np.linalg.norm(w)
        if n < tol * scale:
            raise DegenerateFrameError(f"vector {k + 1} is dependent on the previous ones (residual {n:.3e})")
        out[:, k] = w / n
    flipped = bool(np.linalg.det(out) < 0)
    if flipped:
        out[:, 3] *= -1
    return Frame4(out), flipped


def polar_orthogonal(m):
    """Nearest orthogonal matrix (polar factor) of each matrix in a stack."""
    u, _, vt = np.linalg.svd(m)
    return u @ vt
