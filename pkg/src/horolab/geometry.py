"""Hyperbolic geometry in the Poincare disk and ball.

Isometries are unit-determinant 2x2 complex matrices.  They act on the ball
through the spinor identification of the boundary sphere with the projective
line: a unit spinor ``w = (u, v)`` corresponds to the sphere point

    xi = (2 Re(u conj v), 2 Im(u conj v), |u|^2 - |v|^2),

i.e. ``xi`` is the inverse stereographic image of ``zeta = u / v``.  On the
half-space side this is the usual Poincare extension of the Moebius map
``zeta -> (a zeta + b) / (c zeta + d)``; on the ball side it is realised by
``X -> g X g^H`` on 2x2 Hermitian matrices (the hyperboloid model).  The
origin of the ball corresponds to the point ``j`` of upper half-space, the
north pole to ``infinity``.

Real matrices preserve the great circle ``x_2 = 0`` and the disk it bounds.
Two-dimensional points ``(x, y)`` are stored as 2-vectors and lifted to
``(x, 0, y)`` internally, so the disk model is the vertical slice of the
ball model and every formula is shared.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ContractError, DegeneratePointError, DomainError

DET_TOL = 1e-12
REAL_TOL = 1e-12
BOUNDARY_FLOOR = 1e-14
GEOM_TOL = 1e-9


# ---------------------------------------------------------------------------
# isometries


def normalize_sl2(m):
    """Scale a nonsingular 2x2 matrix to determinant one."""
    m = np.asarray(m, dtype=complex)
    det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
    scale = np.abs(m).max() ** 2
    if abs(det - 1) <= DET_TOL * max(1.0, scale):
        # already unimodular to working precision; for large entries the
        # computed det has no correct digits and dividing by it only adds noise
        return m
    if abs(det) <= 1e-300 or abs(det) <= 1e-12 * scale:
        raise ContractError("singular matrix")
    return m / np.sqrt(det)


@dataclass(frozen=True, eq=False)
class Isometry:
    """An orientation preserving isometry, stored as an SL(2, C) matrix.

    ``word`` optionally records the element as a tuple of signed generator
    indices (``+i`` is generator ``i``, ``-i`` its inverse, 1-based).
    """

    matrix: np.ndarray
    word: tuple | None = None
    real: bool = field(init=False)

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex).reshape(2, 2)
        det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
        if abs(det - 1) > DET_TOL * max(1.0, np.abs(m).max() ** 2):
            raise ContractError(f"determinant {det} is not 1")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "real", bool(np.all(np.abs(m.imag) <= REAL_TOL)))

    @classmethod
    def from_matrix(cls, m, word=None):
        """Build from any nonsingular matrix, rescaling to determinant one."""
        return cls(normalize_sl2(m), word)

    @classmethod
    def identity(cls):
        return cls(np.eye(2), ())

    def __matmul__(self, other):
        m = normalize_sl2(self.matrix @ other.matrix)
        word = None
        if self.word is not None and other.word is not None:
            from .words import reduce_word

            word = reduce_word(self.word + other.word)
        return Isometry(m, word)

    def inverse(self):
        (a, b), (c, d) = self.matrix
        word = None
        if self.word is not None:
            word = tuple(-x for x in reversed(self.word))
        return Isometry(np.array([[d, -b], [-c, a]]), word)

    @property
    def trace(self):
        return complex(self.matrix[0, 0] + self.matrix[1, 1])

    def __repr__(self):
        return f"Isometry(word={self.word}, trace={self.trace:.6g})"


def diagonal(lam):
    """``diag(lam, 1/lam)``: translation along the axis through the poles."""
    return Isometry(np.array([[lam, 0], [0, 1 / lam]], dtype=complex))


# ---------------------------------------------------------------------------
# points


def _lift(p):
    p = np.asarray(p, dtype=float)
    if p.shape[-1] == 3:
        return p
    if p.shape[-1] != 2:
        raise DomainError(f"points must have 2 or 3 coordinates, got {p.shape}")
    out = np.zeros(p.shape[:-1] + (3,))
    out[..., 0] = p[..., 0]
    out[..., 2] = p[..., 1]
    return out


def _drop(p, dim):
    if dim == 3:
        return p
    return p[..., [0, 2]]


def check_interior(x):
    """Validate an interior point, returning it as a float array."""
    x = np.asarray(x, dtype=float)
    if x.shape not in ((2,), (3,)):
        raise DomainError(f"interior point must be a 2- or 3-vector, got shape {x.shape}")
    r = np.linalg.norm(x)
    if r >= 1:
        raise DomainError(f"|x| = {r} is not inside the unit ball")
    if 1 - r < BOUNDARY_FLOOR:
        raise DegeneratePointError(f"1 - |x| = {1 - r:.3g} is below the numerical floor")
    return x


def check_boundary(xi):
    """Validate a boundary point and renormalize it to unit length."""
    xi = np.asarray(xi, dtype=float)
    if xi.shape not in ((2,), (3,)):
        raise DomainError(f"boundary point must be a 2- or 3-vector, got shape {xi.shape}")
    r = np.linalg.norm(xi)
    if abs(r - 1) > 1e-6:
        raise DomainError(f"|xi| = {r} is not on the unit sphere")
    return xi / r


def origin(dim=2):
    return np.zeros(dim)


# spinors <-> sphere


def spinor(xi):
    """Unit spinor ``(u, v)`` representing the boundary point ``xi``."""
    x1, x2, x3 = _lift(xi)
    if x3 >= 0:
        u = math.sqrt((1 + x3) / 2)
        v = complex(x1, -x2) / (2 * u)
    else:
        v = math.sqrt((1 - x3) / 2)
        u = complex(x1, x2) / (2 * v)
    return np.array([u, v], dtype=complex)


def from_spinor(w, dim=3):
    u, v = w
    n = abs(u) ** 2 + abs(v) ** 2
    z = u * np.conj(v)
    xi = np.array([2 * z.real, 2 * z.imag, abs(u) ** 2 - abs(v) ** 2]) / n
    xi /= np.linalg.norm(xi)
    return _drop(xi, dim)


def boundary_to_plane(xi):
    """Stereographic coordinate ``zeta`` (``inf`` for the north pole)."""
    u, v = spinor(xi)
    return complex(np.inf) if v == 0 else u / v


def plane_to_boundary(zeta, dim=3):
    if np.isinf(zeta):
        return _drop(np.array([0.0, 0.0, 1.0]), dim)
    return from_spinor(np.array([zeta, 1.0], dtype=complex), dim)


# hyperboloid <-> ball


def _hermitian(x):
    x = _lift(x)
    s = x @ x
    x0 = (1 + s) / (1 - s)
    xv = 2 * x / (1 - s)
    return np.array(
        [[x0 + xv[2], complex(xv[0], xv[1])], [complex(xv[0], -xv[1]), x0 - xv[2]]]
    )


def _from_hermitian(h, dim):
    x0 = 0.5 * (h[0, 0].real + h[1, 1].real)
    xv = np.array([h[0, 1].real, h[0, 1].imag, 0.5 * (h[0, 0].real - h[1, 1].real)])
    return _drop(xv / (1 + x0), dim)


def apply_isometry(g, p):
    """Apply ``g`` to an interior or boundary point of the disk/ball.

    Whether ``p`` is interior or on the boundary is read off its norm.
    """
    m = g.matrix if isinstance(g, Isometry) else np.asarray(g, dtype=complex)
    p = np.asarray(p, dtype=float)
    dim = p.shape[-1]
    if dim == 2 and np.abs(m.imag).max() > REAL_TOL:
        raise DomainError("complex isometry cannot act on the disk")
    r = np.linalg.norm(p)
    if abs(r - 1) <= 1e-6:
        return from_spinor(m @ spinor(p / r), dim)
    check_interior(p)
    return _from_hermitian(m @ _hermitian(p) @ m.conj().T, dim)


def orbit_point(g, dim):
    """``g(o)`` for the origin ``o``, computed without forming ``o``."""
    m = g.matrix if isinstance(g, Isometry) else g
    return _from_hermitian(m @ m.conj().T, dim)


# ---------------------------------------------------------------------------
# metrics


def hyperbolic_distance(x, y):
    """Hyperbolic distance between two interior points."""
    x = check_interior(x)
    y = check_interior(y)
    num = np.linalg.norm(x - y)
    rx, ry = np.linalg.norm(x), np.linalg.norm(y)
    # (1 - r)(1 + r) keeps the digits that 1 - |x|^2 loses near the boundary
    den = math.sqrt((1 - rx) * (1 + rx) * (1 - ry) * (1 + ry))
    return 2 * math.asinh(num / den)


def displacement(m):
    """``d(o, g o)`` straight from the matrix entries.

    ``2 sinh(d/2) = sqrt(|a - conj d|^2 + |b + conj c|^2)``, free of the
    cancellation in ``arccosh(|g|^2 / 2)`` near the identity.
    """
    m = m.matrix if isinstance(m, Isometry) else m
    a, b, c, d = m[0, 0], m[0, 1], m[1, 0], m[1, 1]
    s = math.sqrt(abs(a - np.conj(d)) ** 2 + abs(b + np.conj(c)) ** 2)
    return 2 * math.asinh(s / 2)


def displacements(mats):
    """Vectorised :func:`displacement` for a stack of shape ``(n, 2, 2)``."""
    mats = np.asarray(mats)
    s = np.sqrt(
        np.abs(mats[:, 0, 0] - np.conj(mats[:, 1, 1])) ** 2
        + np.abs(mats[:, 0, 1] + np.conj(mats[:, 1, 0])) ** 2
    )
    return 2 * np.arcsinh(s / 2)


def chordal_distance(xi, eta):
    return float(np.linalg.norm(np.asarray(xi, float) - np.asarray(eta, float)))


def boundary_stretch(g, xi):
    """Chordal derivative ``|g'(xi)|`` of the boundary map of ``g``.

    In plane coordinates this is ``(1 + |zeta|^2) / (|a zeta + b|^2 + |c zeta + d|^2)``;
    with a unit spinor it is ``1 / |g w|^2``.
    """
    m = g.matrix if isinstance(g, Isometry) else np.asarray(g, dtype=complex)
    gw = m @ spinor(check_boundary(xi))
    return float(1 / np.real(gw @ gw.conj()))


# ---------------------------------------------------------------------------
# geodesic rays


def rotation_to(xi):
    """Unitary matrix sending the north pole to ``xi``."""
    u, v = spinor(xi)
    return np.array([[u, -np.conj(v)], [v, np.conj(u)]])


def translation_to(x):
    """The transvection along the ray from ``o`` that sends ``o`` to ``x``."""
    x = check_interior(x)
    r = np.linalg.norm(x)
    if r == 0:
        return Isometry.identity()
    dist = 2 * math.atanh(r)
    rot = rotation_to(x / r)
    lam = math.exp(dist / 2)
    m = rot @ np.diag([lam, 1 / lam]) @ rot.conj().T
    return Isometry(m)


@dataclass(frozen=True, eq=False)
class GeodesicRay:
    """Unit-speed geodesic ray from ``base`` towards the boundary point ``target``."""

    base: np.ndarray
    target: np.ndarray

    def __post_init__(self):
        base = check_interior(self.base)
        target = check_boundary(self.target)
        if base.shape != target.shape:
            raise DomainError("base and target dimensions differ")
        object.__setattr__(self, "base", base)
        object.__setattr__(self, "target", target)

    @property
    def dim(self):
        return self.base.shape[0]

    def frame(self):
        """SL(2, C) matrix ``F`` with ``F(o) = base`` and ``F(north pole) = target``.

        ``F diag(e^{t/2}, e^{-t/2})`` then moves ``o`` to ``ray_point(t)``.
        """
        tz = translation_to(self.base)
        eta = apply_isometry(tz.inverse(), self.target)
        return tz.matrix @ rotation_to(eta)

    def point_at(self, t):
        return ray_point(self, t)


def ray_point(ray, t):
    """Point at hyperbolic distance ``t`` along the ray."""
    if t < 0:
        raise DomainError("t must be nonnegative")
    if not np.any(ray.base):
        return math.tanh(t / 2) * ray.target
    lam = math.exp(t / 2)
    m = ray.frame() @ np.diag([lam, 1 / lam])
    return orbit_point(m, ray.dim)


def busemann(ray, x):
    """Busemann function of ``ray`` evaluated at ``x``; zero at the ray's base.

    ``b(x) = log(|x - xi|^2 (1 - |z|^2) / ((1 - |x|^2) |z - xi|^2))``.
    """
    x = check_interior(x)
    z, xi = ray.base, ray.target
    num = (x - xi) @ (x - xi) * (1 - z @ z)
    den = (1 - x @ x) * ((z - xi) @ (z - xi))
    return math.log(num / den)


def busemann_at_orbit(xi, m):
    """``b_{xi,o}(g o)`` from the matrix of ``g``: ``log |g^{-1} w|^2``.

    Avoids forming ``g(o)``, so it stays meaningful past the boundary floor
    (as long as ``g^{-1} w`` does not suffer cancellation).
    """
    m = m.matrix if isinstance(m, Isometry) else m
    (a, b), (c, d) = m
    w = spinor(xi)
    v = np.array([d * w[0] - b * w[1], -c * w[0] + a * w[1]])
    return float(np.log(np.real(v @ v.conj())))


def shadow_contains(z, c, kappa, xi):
    """Membership of ``xi`` in the shadow ``{|xi - z/|z|| < c (1 - |z|)^(1/(1+kappa))}``."""
    z = check_interior(z)
    r = np.linalg.norm(z)
    if r == 0:
        raise DegeneratePointError("shadow of the origin is undefined")
    if c <= 0 or not 0 <= kappa <= 1:
        raise DomainError("need c > 0 and kappa in [0, 1]")
    alpha = 1 / (1 + kappa)
    return bool(chordal_distance(check_boundary(xi), z / r) < c * (1 - r) ** alpha)


def shadow_contains_orbit(m, dim, c, kappa, xi):
    """Shadow membership for ``g(o)`` given by its matrix.

    Uses ``1 - |g o| = 2 / (e^d + 1)`` with ``d = d(o, g o)`` so that
    orbit points beyond the boundary floor are still handled.
    """
    d = displacement(m)
    if d == 0:
        raise DegeneratePointError("shadow of the origin is undefined")
    direction = orbit_direction(m, dim)
    gap = 2 / (math.exp(d) + 1)
    return bool(chordal_distance(xi, direction) < c * gap ** (1 / (1 + kappa)))


def orbit_direction(m, dim):
    """Radial projection ``g(o)/|g(o)|`` from the matrix of ``g``."""
    m = m.matrix if isinstance(m, Isometry) else m
    h = m @ m.conj().T
    xv = np.array([h[0, 1].real, h[0, 1].imag, 0.5 * (h[0, 0].real - h[1, 1].real)])
    return _drop(xv / np.linalg.norm(xv), dim)
