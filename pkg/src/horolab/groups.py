"""Schottky groups, word homomorphisms and orbit enumeration."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from . import geometry as geo
from .errors import ClassificationError, ConstructionError, DomainError, ResourceError
from .words import (
    letters,
    reduce_word,
    reduced_words,
    word_sort_key,
)

log = logging.getLogger(__name__)

DEFAULT_CAP = 10**7
FLIP = np.array([[0, -1], [1, 0]], dtype=complex)  # zeta -> -1/zeta


@dataclass(frozen=True)
class Cap:
    """Round ball on the boundary sphere: ``{xi : |xi - center| < radius}`` (chordal)."""

    center: np.ndarray
    radius: float

    def __post_init__(self):
        c = geo.check_boundary(self.center)
        object.__setattr__(self, "center", c)
        if not 0 < self.radius < 2:
            raise ConstructionError(f"cap radius {self.radius} must lie in (0, 2)")

    @property
    def angle(self):
        """Angular radius."""
        return 2 * math.asin(self.radius / 2)

    def contains(self, xi, tol=0.0):
        return geo.chordal_distance(self.center, xi) < self.radius + tol

    def plane(self):
        """Hermitian matrix of the hyperbolic plane bounding the cap's half-space.

        Unit spacelike vector ``S``: the half-space is ``<X, S> > 0`` and
        ``sinh d(X, plane) = |<X, S>|``.
        """
        c = geo._lift(self.center)
        r = math.atanh(math.cos(self.angle))
        s0, sv = math.sinh(r), math.cosh(r) * c
        return np.array(
            [[s0 + sv[2], complex(sv[0], sv[1])], [complex(sv[0], -sv[1]), s0 - sv[2]]]
        )

    def boundary_sample(self, n):
        """``n`` points on the cap's boundary circle (2 points in the disk case)."""
        c = geo._lift(self.center)
        th = self.angle
        if self.center.shape[0] == 2:
            e = np.array([-c[2], 0.0, c[0]])
            pts = [math.cos(th) * c + s * math.sin(th) * e for s in (1, -1)]
            return [geo._drop(p, 2) for p in pts]
        e1 = np.cross(c, [1.0, 0, 0] if abs(c[0]) < 0.9 else [0, 1.0, 0])
        e1 /= np.linalg.norm(e1)
        e2 = np.cross(c, e1)
        phis = np.linspace(0, 2 * math.pi, n, endpoint=False)
        return [math.cos(th) * c + math.sin(th) * (math.cos(p) * e1 + math.sin(p) * e2) for p in phis]

    def sample(self, n, rng):
        """Random points inside the cap."""
        c = geo._lift(self.center)
        dim = self.center.shape[0]
        th = self.angle
        out = []
        for _ in range(n):
            if dim == 2:
                a = rng.uniform(-th, th)
                e = np.array([-c[2], 0.0, c[0]])
                out.append(geo._drop(math.cos(a) * c + math.sin(a) * e, 2))
            else:
                z = rng.uniform(math.cos(th), 1)
                phi = rng.uniform(0, 2 * math.pi)
                e1 = np.cross(c, [1.0, 0, 0] if abs(c[0]) < 0.9 else [0, 1.0, 0])
                e1 /= np.linalg.norm(e1)
                e2 = np.cross(c, e1)
                s = math.sqrt(1 - z * z)
                out.append(z * c + s * (math.cos(phi) * e1 + math.sin(phi) * e2))
        return out


def image_cap(g, cap):
    """Image of a cap under a Moebius map (again a cap)."""
    m = g.matrix if isinstance(g, geo.Isometry) else g
    s = m @ cap.plane() @ m.conj().T
    s0 = 0.5 * (s[0, 0] + s[1, 1]).real
    sv = np.array([s[0, 1].real, s[0, 1].imag, 0.5 * (s[0, 0] - s[1, 1]).real])
    nv = np.linalg.norm(sv)
    # plane {<X,S> = 0} has ideal circle at angle theta from sv/|sv| with cos theta = s0/|sv|
    cos_th = s0 / nv
    center = sv / nv
    th = math.acos(max(-1.0, min(1.0, cos_th)))
    dim = cap.center.shape[0]
    return Cap(geo._drop(center, dim), 2 * math.sin(th / 2))


def pairing_matrix(source, target):
    """Matrix mapping the exterior of ``source`` onto the interior of ``target``."""

    def standard(cap):
        k = math.tan(cap.angle / 2)
        rot = geo.rotation_to(-geo._lift(cap.center))
        return rot @ np.diag([math.sqrt(k), 1 / math.sqrt(k)])

    a_src = standard(source)
    a_tgt = standard(target)
    inv_src = np.array([[a_src[1, 1], -a_src[0, 1]], [-a_src[1, 0], a_src[0, 0]]])
    return geo.normalize_sl2(a_tgt @ FLIP @ inv_src)


@dataclass
class SchottkyPresentation:
    """Free group on ``generators``; with pairing caps it is Schottky by ping-pong.

    ``asserted`` presentations (no caps) are taken to be free and discrete
    without verification; certified pruning is unavailable for them.
    """

    generators: list
    dim: int
    sources: list | None = None
    targets: list | None = None
    names: list | None = None
    asserted: bool = False
    homomorphisms: dict = field(default_factory=dict)
    name: str = ""

    def __post_init__(self):
        if self.names is None:
            self.names = [f"g{i + 1}" for i in range(len(self.generators))]
        self.generators = [
            geo.Isometry(g.matrix, (i + 1,)) for i, g in enumerate(self.generators)
        ]

    @property
    def rank(self):
        return len(self.generators)

    def letter_matrix(self, x):
        g = self.generators[abs(x) - 1]
        return g.matrix if x > 0 else g.inverse().matrix

    def target_cap(self, x):
        """Cap that ``x`` maps the exterior of ``source_cap(x)`` into."""
        return self.targets[x - 1] if x > 0 else self.sources[-x - 1]

    def source_cap(self, x):
        return self.target_cap(-x)

    def caps(self):
        return [c for pair in zip(self.sources, self.targets) for c in pair]

    def element(self, word):
        m = np.eye(2, dtype=complex)
        for x in word:
            m = m @ self.letter_matrix(x)
        return geo.Isometry.from_matrix(m, tuple(word))

    def in_limit_enclosure(self, xi, tol=1e-9):
        """True if ``xi`` lies in the union of pairing caps (which contains the limit set)."""
        return any(c.contains(xi, tol) for c in self.caps())

    def cylinder(self, word):
        """Cap containing every limit point whose coding starts with ``word``."""
        if not word:
            raise DomainError("empty word has no cylinder")
        prefix = self.element(word[:-1])
        return image_cap(prefix, self.target_cap(word[-1]))


def _check_disjoint(caps, labels):
    for i in range(len(caps)):
        for j in range(i + 1, len(caps)):
            a, b = caps[i], caps[j]
            if geo.chordal_distance(a.center, b.center) <= a.radius + b.radius:
                raise ConstructionError(f"pairing caps {labels[i]} and {labels[j]} overlap")


def _check_ping_pong(pres, net_size=1000, tol=1e-9):
    rng = np.random.default_rng(0)
    for x in letters(pres.rank):
        g = geo.Isometry(pres.letter_matrix(x))
        tgt = pres.target_cap(x)
        for y in letters(pres.rank):
            if y == -x:
                continue
            cap = pres.target_cap(y)
            per = max(4, net_size // (2 * pres.rank))
            pts = cap.boundary_sample(per) + cap.sample(per, rng)
            for p in pts:
                q = geo.apply_isometry(g, p)
                if not tgt.contains(q, tol):
                    raise ConstructionError(
                        f"ping-pong fails: {pres.names[abs(x) - 1]}{'' if x > 0 else '^-1'} "
                        f"does not map the cap of letter {y} into its target"
                    )


def build_schottky(pairings, dim, names=None, matrices=None, name=""):
    """Build and validate a Schottky group from cap pairings.

    ``pairings`` is a list of ``(source_cap, target_cap)``; generator ``i``
    maps the exterior of ``source`` onto the interior of ``target``.  If
    ``matrices`` is given they are used instead of the derived ones, and the
    pairing is verified.
    """
    if not pairings:
        raise ConstructionError("need at least one generator")
    sources = [p[0] for p in pairings]
    targets = [p[1] for p in pairings]
    for c in sources + targets:
        if c.center.shape[0] != dim:
            raise ConstructionError("cap dimension does not match presentation")
        if c.radius >= math.sqrt(2):
            raise ConstructionError("caps must be smaller than a hemisphere")
    labels = []
    for i in range(len(pairings)):
        nm = names[i] if names else f"g{i + 1}"
        labels += [f"{nm}-source", f"{nm}-target"]
    _check_disjoint([c for p in pairings for c in p], labels)
    if matrices is None:
        gens = [geo.Isometry(pairing_matrix(s, t)) for s, t in pairings]
    else:
        gens = [geo.Isometry.from_matrix(m) for m in matrices]
    if dim == 2 and not all(g.real for g in gens):
        raise ConstructionError("disk presentations need real matrices")
    if dim == 2:
        gens = [geo.Isometry(g.matrix.real.astype(complex)) for g in gens]
    pres = SchottkyPresentation(gens, dim, sources, targets, names, name=name)
    _check_ping_pong(pres)
    return pres


def asserted_free(matrices, dim, names=None, name=""):
    """Presentation taken to be free and discrete without a ping-pong check."""
    gens = [geo.Isometry.from_matrix(m) for m in matrices]
    return SchottkyPresentation(gens, dim, names=names, asserted=True, name=name)


def symmetric_schottky(rank, radius, dim=2, twist=0.0, names=None, name=""):
    """Schottky group with ``2 * rank`` equal caps placed symmetrically.

    In the disk the caps sit at angles ``k pi / rank``; in the ball the
    centres are the ``+-`` pairs of distinct coordinate-like directions.
    Generator ``i`` pairs the cap at ``-c_i`` with the cap at ``c_i``.
    """
    if dim == 2:
        centers = [
            np.array([math.cos(math.pi * k / rank), math.sin(math.pi * k / rank)])
            for k in range(rank)
        ]
    else:
        base = [np.array(v, float) for v in ([1, 0, 0], [0, 1, 0], [0, 0, 1])]
        extra = [np.array(v, float) / math.sqrt(3) for v in ([1, 1, 1], [1, -1, 1], [1, 1, -1])]
        dirs = base + extra
        if rank > len(dirs):
            raise ConstructionError("at most 6 symmetric generators in the ball")
        centers = dirs[:rank]
    pairings = [(Cap(-c, radius), Cap(c, radius)) for c in centers]
    return build_schottky(pairings, dim, names=names, name=name)


# ---------------------------------------------------------------------------
# homomorphisms


@dataclass(frozen=True)
class HomomorphismSpec:
    """Homomorphism out of a free group.

    ``kind="projection"``: generators listed in ``keep`` map to themselves in
    the free factor they generate, all others die.  ``kind="exponent"``:
    generator ``i`` maps to the integer ``weights[i]``.
    """

    kind: str
    rank: int
    keep: frozenset = frozenset()
    weights: tuple = ()

    def __post_init__(self):
        if self.kind not in ("projection", "exponent"):
            raise DomainError(f"unknown homomorphism kind {self.kind!r}")
        if self.kind == "exponent" and len(self.weights) != self.rank:
            raise DomainError("need one weight per generator")

    def image(self, word):
        for x in word:
            if not 1 <= abs(x) <= self.rank:
                raise DomainError(f"letter {x} outside a rank-{self.rank} presentation")
        if self.kind == "projection":
            return reduce_word([x for x in word if abs(x) in self.keep])
        return sum(self.weights[abs(x) - 1] * (1 if x > 0 else -1) for x in word)


def projection(rank, keep):
    return HomomorphismSpec("projection", rank, keep=frozenset(keep))


def exponent_sum(weights):
    return HomomorphismSpec("exponent", len(weights), weights=tuple(weights))


def trivial_hom(rank):
    return projection(rank, ())


def kernel_contains(spec, word):
    """True iff ``word`` maps to the identity under ``spec``."""
    img = spec.image(word)
    return img == () if spec.kind == "projection" else img == 0


# ---------------------------------------------------------------------------
# orbits


@dataclass
class OrbitSet:
    """Orbit points ``g z`` with ``d(g z, z) <= radius``, sorted by distance."""

    basepoint: np.ndarray
    words: list
    matrices: np.ndarray
    distances: np.ndarray
    radius: float
    complete: bool
    presentation: SchottkyPresentation | None = None

    def __len__(self):
        return len(self.words)

    @property
    def dim(self):
        return self.basepoint.shape[0]

    @property
    def points(self):
        if not hasattr(self, "_points"):
            t = geo.translation_to(self.basepoint).matrix
            self._points = np.array([geo.orbit_point(m @ t, self.dim) for m in self.matrices])
        return self._points

    def isometry(self, i):
        return geo.Isometry(self.matrices[i], self.words[i])

    def within(self, radius):
        """Sub-orbit of entries with distance at most ``radius``."""
        if radius > self.radius:
            raise DomainError("cannot enlarge an orbit by filtering")
        k = int(np.searchsorted(self.distances, radius, side="right"))
        return OrbitSet(
            self.basepoint, self.words[:k], self.matrices[:k], self.distances[:k],
            radius, self.complete, self.presentation,
        )

    def counts(self, radii):
        """``#(B(z, R) n Gz)`` for each ``R`` in ``radii``."""
        return np.searchsorted(self.distances, np.asarray(radii), side="right")

    def select(self, mask, radius=None):
        mask = np.asarray(mask, bool)
        idx = np.flatnonzero(mask)
        return OrbitSet(
            self.basepoint, [self.words[i] for i in idx], self.matrices[idx],
            self.distances[idx], self.radius if radius is None else radius,
            self.complete, self.presentation,
        )


def _sorted_orbit(z, words, mats, dists, radius, complete, pres):
    order = sorted(range(len(words)), key=lambda i: (dists[i], word_sort_key(words[i])))
    return OrbitSet(
        np.asarray(z, float), [words[i] for i in order],
        np.asarray(mats, complex).reshape(-1, 2, 2)[order],
        np.asarray(dists, float)[order], float(radius), complete, pres,
    )


def _distances_from(mats, z):
    """``d(g z, z)`` for a stack of matrices."""
    if not np.any(z):
        return geo.displacements(mats)
    t = geo.translation_to(z).matrix
    ti = np.linalg.inv(t)
    return geo.displacements(ti @ mats @ t)


def _mink(x, y):
    """Minkowski product of Hermitian matrices (batched over leading axes)."""
    tr_xy = np.einsum("...ij,...ji->...", x, y).real
    tr_x = np.einsum("...ii->...", x).real
    tr_y = np.einsum("...ii->...", y).real
    return tr_xy / 2 - tr_x * tr_y / 2


def enumerate_orbit(pres, z, radius, cap=DEFAULT_CAP, slack=8.0):
    """All orbit points ``g z`` within hyperbolic distance ``radius`` of ``z``.

    Breadth-first over the reduced-word tree.  For Schottky presentations a
    branch ``w = w' x`` is cut once the half-space bounded by the plane over
    the cylinder cap ``w'(target_cap(x))`` is farther than ``radius`` from
    ``z``: every extension of ``w`` moves ``z`` into that half-space, so the
    result is complete.  Asserted presentations keep a branch while
    ``d(w z, z) <= radius + slack`` and are flagged incomplete.
    """
    if radius <= 0:
        raise DomainError("radius must be positive")
    z = geo.check_interior(z)
    if z.shape[0] != pres.dim:
        raise DomainError("basepoint dimension does not match presentation")
    alphabet = letters(pres.rank)
    gen = np.array([pres.letter_matrix(x) for x in alphabet])
    zh = geo._hermitian(z)
    certified = not pres.asserted
    if certified:
        planes = np.array([pres.target_cap(x).plane() for x in alphabet])
        z_outside = all(_mink(zh, p) < 0 for p in planes)
        shift = 0.0 if z_outside else 2 * geo.displacement(geo.translation_to(z))
        origin_h = np.eye(2, dtype=complex)
        ref = zh if z_outside else origin_h

    words = [()]
    mats = [np.eye(2, dtype=complex)]
    dists = [0.0]
    # layer arrays: parent matrix stack, last letter index, word list
    layer_m = np.eye(2, dtype=complex)[None]
    layer_last = np.array([-1])
    layer_w = [()]
    visited = 1
    while len(layer_w):
        n = len(layer_w)
        child_m = np.einsum("nij,kjl->nkil", layer_m, gen)
        keep = np.ones((n, len(alphabet)), bool)
        for k, x in enumerate(alphabet):
            inv = alphabet.index(-x)
            keep[:, k] = layer_last != inv
        if certified:
            s = np.einsum("nij,kjl,nml->nkim", layer_m, planes, layer_m.conj())
            sign = -_mink(ref[None, None], s)
            bound = np.arcsinh(np.maximum(sign, 0.0)) - shift
            keep &= bound <= radius
        ni, ki = np.nonzero(keep)
        cm = child_m[ni, ki]
        d = _distances_from(cm, z)
        if not certified:
            alive = d <= radius + slack
            ni, ki, cm, d = ni[alive], ki[alive], cm[alive], d[alive]
        visited += len(ni)
        if visited > cap:
            raise ResourceError(
                f"orbit enumeration exceeded the cap of {cap} entries", estimate=visited
            )
        new_w = [layer_w[i] + (alphabet[k],) for i, k in zip(ni, ki)]
        inside = d <= radius
        for j in np.flatnonzero(inside):
            words.append(new_w[j])
        mats.extend(cm[inside])
        dists.extend(d[inside])
        layer_m, layer_last, layer_w = cm, ki, new_w
    return _sorted_orbit(z, words, mats, dists, radius, certified, pres)


def brute_force_orbit(pres, z, radius, max_length):
    """Pruning-free oracle: test every reduced word up to ``max_length``."""
    z = geo.check_interior(z)
    words, mats = [], []
    for w in reduced_words(pres.rank, max_length):
        words.append(w)
        mats.append(pres.element(w).matrix)
    mats = np.array(mats)
    d = _distances_from(mats, z)
    keep = d <= radius
    return _sorted_orbit(
        z, [w for w, k in zip(words, keep) if k], mats[keep], d[keep], radius, True, pres
    )


def suborbit(orbit, spec):
    """Entries of ``orbit`` whose words lie in the kernel of ``spec``."""
    mask = [kernel_contains(spec, w) for w in orbit.words]
    return orbit.select(mask)


def min_translation_length(pres):
    return min(axis_data(g, pres.dim)[2] for g in pres.generators)


# ---------------------------------------------------------------------------
# axes


def axis_data(g, dim=None):
    """Repelling and attracting fixed points and translation length of a loxodromic ``g``.

    Returns ``(repelling, attracting, length)``; boundary points are in the
    dimension of the matrix kind (disk for real matrices, ball otherwise).
    """
    m = g.matrix if isinstance(g, geo.Isometry) else np.asarray(g, complex)
    tr = m[0, 0] + m[1, 1]
    if abs(tr.imag) < 1e-12 and abs(tr.real) <= 2 + 1e-12:
        raise ClassificationError(f"trace {tr:.6g}: not loxodromic")
    vals, vecs = np.linalg.eig(m)
    order = np.argsort(np.abs(vals))
    lam = vals[order[1]]
    length = 2 * math.log(abs(lam))
    if dim is None:
        dim = 2 if np.all(np.abs(m.imag) <= geo.REAL_TOL) else 3
    rep = geo.from_spinor(vecs[:, order[0]], dim)
    att = geo.from_spinor(vecs[:, order[1]], dim)
    if abs(tr.imag) < 1e-12 and abs(tr.real) > 2:
        length = 2 * math.acosh(abs(tr.real) / 2)
    return rep, att, length
