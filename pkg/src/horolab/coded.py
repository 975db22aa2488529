"""Boundary points carried by their symbolic coding, and certified searches.

Far out along a ray, a floating point boundary point cannot resolve which
orbit points sit inside a deep horoball: the answer depends on ``xi`` to
precision ``e^{-t}``.  A limit point of a free group is instead stored by
its infinite reduced word ``s_1 s_2 ...`` (eventually periodic), and every
computation near time ``t`` is carried out after pulling back by the prefix
``p_n = s_1 ... s_n`` whose orbit point lies near the ray at that time.
After the pull-back all quantities live near the origin and are well
conditioned.

Two identities do the work.  For ``eta_n = p_n^{-1} xi`` with unit spinor
``w_n`` and ``L_n = log |p_n w_n|^2``:

    b_xi(p_n y) = b_{eta_n}(y) - L_n,
    b_eta(q o)  = log |q^{-1} w|^2.

The searches below are branch and bound over the reduced-word tree, using
the half-space nesting of Schottky cylinders: every extension of ``w = w' x``
moves ``o`` into the half-space over ``w'(target_cap(x))``.
"""

from __future__ import annotations

import heapq
import math

import numpy as np

from . import geometry as geo
from .errors import DomainError
from .groups import _mink, kernel_contains
from .words import inverse_word, letters, reduce_word


def _unit(v):
    return v / math.sqrt(abs(v[0]) ** 2 + abs(v[1]) ** 2)


def _hermitian_of(m):
    return m @ m.conj().T


class FloatTarget:
    """A boundary point given only by coordinates (no coding available)."""

    coded = False

    def __init__(self, xi, dim=None):
        self.xi = geo.check_boundary(xi)
        self.dim = dim or self.xi.shape[0]

    def letter(self, i):
        return None

    def prefix(self, n):
        if n:
            raise DomainError("float targets carry no coding")
        return ()

    def spinor(self, n=0):
        return geo.spinor(self.xi)

    def level(self, n=0):
        return 0.0

    def point(self):
        return self.xi

    def renorm_index(self, t):
        return 0


class _Coded:
    """Shared machinery for points given by an infinite reduced word."""

    coded = True

    def _setup(self, pres):
        self.pres = pres
        self.dim = pres.dim
        self._spinors = {}
        self._levels = [0.0]
        self._mats = {x: pres.letter_matrix(x) for x in letters(pres.rank)}
        ells = [2 * math.log(max(abs(np.linalg.eigvals(m)))) for m in self._mats.values()]
        self._burn = max(8, int(math.ceil(80 / max(min(ells), 0.1))))

    def _key(self, n):
        return n

    def prefix(self, n):
        return tuple(self.letter(i) for i in range(n))

    def spinor(self, n=0):
        """Unit spinor of ``eta_n = p_n^{-1} xi``, by backward iteration of the coding."""
        key = self._key(n)
        if key not in self._spinors:
            v = None
            burn = self._burn
            while True:
                w = np.array([1.0, 0.3], dtype=complex)
                if self.pres.targets is not None:
                    w = geo.spinor(self.pres.target_cap(self.letter(n + burn)).center)
                for i in range(n + burn - 1, n - 1, -1):
                    w = _unit(self._mats[self.letter(i)] @ w)
                if v is not None and abs(abs(np.vdot(v, w)) - 1) < 1e-15:
                    break
                if burn > 64 * self._burn:
                    raise DomainError("coding does not converge")
                v, burn = w, burn * 2
            self._spinors[key] = w
        return self._spinors[key]

    def level(self, n):
        """``L_n = log |p_n w_n|^2``; equals ``-b_xi(p_n o)``."""
        while len(self._levels) <= n:
            i = len(self._levels) - 1
            v = self._mats[self.letter(i)] @ self.spinor(i + 1)
            self._levels.append(self._levels[-1] + math.log(abs(v[0]) ** 2 + abs(v[1]) ** 2))
        return self._levels[n]

    def point(self):
        return geo.from_spinor(self.spinor(0), self.dim)

    def renorm_index(self, t):
        """Largest ``n`` with ``L_n <= t`` (the prefix whose orbit point is near ``ray(t)``)."""
        n = 0
        while self.level(n + 1) <= t:
            n += 1
        return n


class CodedPoint(_Coded):
    """Limit point ``lim p_n(o)`` with coding ``preperiod + period^inf``.

    The coding must be reduced, including across the period boundary, so
    the point is the attracting fixed point of ``period`` moved by the
    preperiod.
    """

    def __init__(self, pres, period, preperiod=()):
        period = tuple(period)
        preperiod = tuple(preperiod)
        if not period:
            raise DomainError("period must be nonempty")
        full = preperiod + period + period
        if reduce_word(full) != full:
            raise DomainError("coding is not reduced")
        self.period = period
        self.preperiod = preperiod
        self._setup(pres)

    def __repr__(self):
        return f"CodedPoint(period={self.period}, preperiod={self.preperiod})"

    def letter(self, i):
        """The ``i``-th letter (0-based) of the infinite coding."""
        k = len(self.preperiod)
        if i < k:
            return self.preperiod[i]
        return self.period[(i - k) % len(self.period)]

    def _key(self, n):
        k = len(self.preperiod)
        return n if n < k else k + (n - k) % len(self.period)


class WordPoint(_Coded):
    """Limit point of an arbitrary infinite reduced word, given letter by letter.

    ``letters_fn(i)`` returns letter ``i``; letters are cached.
    """

    def __init__(self, pres, letters_fn, name=""):
        self._fn = letters_fn
        self._cache = []
        self.name = name
        self._setup(pres)

    def __repr__(self):
        return f"WordPoint({self.name or 'anonymous'})"

    def letter(self, i):
        while len(self._cache) <= i:
            x = self._fn(len(self._cache))
            if self._cache and self._cache[-1] == -x:
                raise DomainError("coding is not reduced")
            self._cache.append(x)
        return self._cache[i]


def boundary_target(xi, pres=None):
    if isinstance(xi, (_Coded, FloatTarget)):
        return xi
    return FloatTarget(xi)


# ---------------------------------------------------------------------------
# Busemann values


def _apply_word_inverse(mats, word, v):
    """``word^{-1} v`` with per-step normalisation; returns (unit vector, log |.|^2)."""
    total = 0.0
    for x in word:
        m = mats[x]
        v = np.array([m[1, 1] * v[0] - m[0, 1] * v[1], -m[1, 0] * v[0] + m[0, 0] * v[1]])
        s = abs(v[0]) ** 2 + abs(v[1]) ** 2
        total += math.log(s)
        v = v / math.sqrt(s)
    return v, total


def busemann_word(target, pres, word):
    """``b_xi(g o)`` for ``g`` given by a reduced word.

    For coded targets the common prefix with the coding is factored out
    first; for float targets this is ``log |g^{-1} w|^2`` evaluated
    letter by letter.
    """
    mats = {x: pres.letter_matrix(x) for x in letters(pres.rank)}
    k = 0
    if target.coded:
        while k < len(word) and word[k] == target.letter(k):
            k += 1
    _, val = _apply_word_inverse(mats, word[k:], target.spinor(k))
    return val - target.level(k)


# ---------------------------------------------------------------------------
# ray frames


def ray_frame(target, t, n=None):
    """Return ``(n, A)`` with ``A(o) = p_n^{-1} ray(t)`` for the ray from ``o``.

    ``A`` is an SL(2, C) matrix; the pulled-back ray runs from
    ``zeta_n = p_n^{-1}(-xi)`` to ``eta_n``.
    """
    if n is None:
        n = target.renorm_index(t)
    w_eta = target.spinor(n)
    xi = target.point()
    w_back = geo.spinor(-geo._lift(xi) if xi.shape[0] == 3 else -xi)
    if n:
        mats = {x: target.pres.letter_matrix(x) for x in letters(target.pres.rank)}
        w_back, _ = _apply_word_inverse(mats, target.prefix(n), w_back)
    frame = np.column_stack([w_eta, w_back])
    delta = frame[0, 0] * frame[1, 1] - frame[0, 1] * frame[1, 0]
    frame = frame / np.sqrt(delta)
    s = math.log(abs(delta)) + t - target.level(n)
    lam = math.exp(s / 2)
    return n, frame @ np.diag([lam, 1 / lam])


# ---------------------------------------------------------------------------
# branch and bound


class _Tree:
    """Shared per-presentation data for the word-tree searches."""

    def __init__(self, pres):
        if pres.targets is None:
            raise DomainError("certified search needs a Schottky presentation with caps")
        self.pres = pres
        self.alphabet = letters(pres.rank)
        self.mats = {x: pres.letter_matrix(x) for x in self.alphabet}
        self.planes = {x: pres.target_cap(x).plane() for x in self.alphabet}

    def children(self, word):
        last = word[-1] if word else 0
        return [x for x in self.alphabet if x != -last]


def nearest_orbit_point(pres, a, prefix=(), kernel=None, upper=math.inf):
    """Minimise ``d(A o, q o)`` over ``q`` in the group (certified).

    With ``kernel`` given only ``q`` with ``prefix + q`` in the kernel count.
    Returns ``(distance, word q)``; ``(inf, None)`` if nothing beats ``upper``.
    """
    tree = _Tree(pres)
    yh = _hermitian_of(a)
    ainv = np.linalg.inv(a)
    best, best_w = upper, None

    def admissible(q):
        return kernel is None or kernel_contains(kernel, reduce_word(prefix + q))

    if admissible(()):
        d0 = geo.displacement(ainv)
        if d0 < best:
            best, best_w = d0, ()
    heap = [(0.0, 0, (), np.eye(2, dtype=complex))]
    counter = 1
    while heap:
        bound, _, q, m = heapq.heappop(heap)
        if bound >= best:
            break
        for x in tree.children(q):
            s = m @ tree.planes[x] @ m.conj().T
            lb = math.asinh(max(0.0, -_mink(yh, s)))
            if lb >= best:
                continue
            cm = m @ tree.mats[x]
            w = q + (x,)
            if admissible(w):
                d = geo.displacement(ainv @ cm)
                if d < best:
                    best, best_w = d, w
            heapq.heappush(heap, (lb, counter, w, cm))
            counter += 1
    return best, best_w


def phi_value(pres, target, t, kernel=None):
    """Exact ``phi_xi(t) = min_g d(ray(t), g o)`` with a witness word.

    ``kernel`` restricts ``g`` to the kernel of a homomorphism (the escape
    profile of the normal subgroup).
    """
    n, a = ray_frame(target, t)
    p = target.prefix(n)
    d, q = nearest_orbit_point(pres, a, prefix=p, kernel=kernel)
    return d, reduce_word(p + q)


def horoball_depth(pres, target, radius, kernel=None, seeds=(), node_cap=2_000_000):
    """Certified ``min b_xi(g o)`` over ``g`` (in the kernel) with ``d(o, g o) <= radius``.

    ``seeds`` are candidate words tried first to tighten the bound.
    Returns ``(value, witness word, nodes visited)``.
    """
    tree = _Tree(pres)
    best, best_w = math.inf, None

    def consider(word):
        nonlocal best, best_w
        if kernel is not None and not kernel_contains(kernel, word):
            return
        m = np.eye(2, dtype=complex)
        for x in word:
            m = m @ tree.mats[x]
            if np.abs(m).max() > 4 * math.exp(radius / 2):
                return
        if geo.displacement(m) > radius:
            return
        b = busemann_word(target, pres, word)
        if b < best:
            best, best_w = b, word

    consider(())
    for w in seeds:
        consider(reduce_word(w))

    nodes = 0
    # stack entries: word, matrix of word, k (common prefix), matrix of q part
    stack = [((), np.eye(2, dtype=complex), 0, np.eye(2, dtype=complex))]
    while stack:
        word, m, k, qm = stack.pop()
        kids = tree.children(word)
        on_path = k == len(word)
        nxt = target.letter(len(word)) if (target.coded and on_path) else None
        for x in sorted(kids, key=lambda y: y == nxt):
            s = m @ tree.planes[x] @ m.conj().T
            rb = math.asinh(max(0.0, 0.5 * np.trace(s).real))
            if rb > radius:
                continue
            w = word + (x,)
            if on_path and x == nxt:
                ck, cq = k + 1, np.eye(2, dtype=complex)
                bb = -math.inf
            else:
                ck = k
                sq = qm @ tree.planes[x] @ qm.conj().T
                eta = geo.from_spinor(target.spinor(k), 3)
                nu = np.array([[1 + eta[2], complex(eta[0], eta[1])], [complex(eta[0], -eta[1]), 1 - eta[2]]])
                a = _mink(nu, sq)
                bb = math.log(-a) - target.level(k) if a < 0 else -math.inf
                cq = qm @ tree.mats[x]
            if bb >= best:
                continue
            nodes += 1
            if nodes > node_cap:
                return best, best_w, nodes
            cm = m @ tree.mats[x]
            if geo.displacement(cm) <= radius and (kernel is None or kernel_contains(kernel, w)):
                b = busemann_word(target, pres, w)
                if b < best:
                    best, best_w = b, w
            stack.append((w, cm, ck, cq))
    return best, best_w, nodes


def conjugate_seeds(target, kernel_spec, normal_letters, depth, powers=3):
    """Targeted kernel elements near the ray: ``p n^k p^-1`` and ``p proj(p)^-1``.

    ``p`` runs over prefixes of the coding up to ``depth`` letters.
    """
    seeds = []
    for n in range(depth + 1):
        p = target.prefix(n)
        if kernel_spec is not None and kernel_spec.kind == "projection":
            seeds.append(p + inverse_word(kernel_spec.image(p)))
        for x in normal_letters:
            for k in range(1, powers + 1):
                for sgn in (1, -1):
                    seeds.append(p + (sgn * x,) * k + inverse_word(p))
    return seeds


def nearest_in_ball(pres, target, t, kernel=None, reach=3.0, cache=None, cap=10**6):
    """Best orbit point near ``ray(t)`` among a ball about ``o`` after renormalisation.

    No certificate is claimed: this is used for presentations without
    pairing caps, where the returned distance is an upper bound for
    ``phi(t)`` with an explicit witness.
    """
    from .groups import enumerate_orbit

    n, a = ray_frame(target, t)
    p = target.prefix(n)
    r = math.ceil(geo.displacement(a) + reach)
    cache = {} if cache is None else cache
    if r not in cache:
        cache[r] = enumerate_orbit(pres, np.zeros(pres.dim), r, cap=cap)
    orb = cache[r]
    d = geo.displacements(np.einsum("ij,njk->nik", np.linalg.inv(a), orb.matrices))
    best, best_w = math.inf, None
    for i in np.argsort(d, kind="stable"):
        w = reduce_word(p + orb.words[i])
        if kernel is None or kernel_contains(kernel, w):
            best, best_w = float(d[i]), w
            break
    return best, best_w
