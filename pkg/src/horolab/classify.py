"""Escape profiles and finite-scale membership tests for limit sets.

Every test returns a small record carrying the thresholds it used, so a
verdict can be re-checked without recomputing anything.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import coded as cd
from . import geometry as geo
from . import spheregrid
from .errors import DomainError, InsufficientDataError, ResourceError
from .groups import SchottkyPresentation, axis_data, enumerate_orbit
from .words import letters, reduce_word, reduced_words

K_MIN = 5
DEFAULT_DEPTH = 10.0
DEFAULT_EPS = 0.5
EXACT_MARGIN = 1.0


@dataclass(frozen=True)
class EscapeProfile:
    """Samples of ``phi(t)`` along a ray, with witnesses and exactness flags."""

    base: np.ndarray
    target: np.ndarray
    t: np.ndarray
    phi: np.ndarray
    witnesses: tuple
    exact: np.ndarray
    step: float
    radius: float
    offset: float = 0.0  # d(z, orbit basepoint)

    @property
    def T(self):
        return float(self.t[-1])

    def exact_part(self):
        k = np.nonzero(self.exact)[0]
        return self.t[k], self.phi[k], [self.witnesses[i] for i in k]

    def table(self):
        rows = ["t,phi,exact,witness"]
        for t, p, e, w in zip(self.t, self.phi, self.exact, self.witnesses):
            ws = " ".join(str(x) for x in w) if w is not None else ""
            rows.append(f"{t:.6f},{p:.12f},{int(bool(e))},{ws}")
        return "\n".join(rows) + "\n"


def _sample_times(T, step):
    n = int(math.floor(T / step + 1e-9))
    return np.arange(n + 1) * step


def _ray_matrices(base, target, ts):
    """Matrices ``A_t`` with ``A_t(o) = ray_point(t)`` (float coordinates)."""
    ray = geo.GeodesicRay(base, target)
    f = ray.frame()
    return [f @ np.diag([math.exp(t / 2), math.exp(-t / 2)]) for t in ts]


def _chunked_min_distance(ainv, mats):
    """Min displacement of ``ainv @ m`` over a stack of matrices, with argmin."""
    best, arg = math.inf, -1
    for i0 in range(0, len(mats), 200_000):
        d = geo.displacements(np.einsum("ij,njk->nik", ainv, mats[i0 : i0 + 200_000]))
        k = int(np.argmin(d))
        if d[k] < best:
            best, arg = float(d[k]), i0 + k
    return best, arg


def escape_profile(source, z, xi, T, step=0.5, kernel=None, margin=EXACT_MARGIN, cap=10**7):
    """Sample ``phi(t) = min_g d(ray(t), g x)`` for ``t = 0, step, ..., T``.

    ``source`` is either an :class:`OrbitSet` (the minimum runs over its
    entries, exact where the radius covers ``2(t + d(z, x)) + margin``) or a
    Schottky presentation.  For a presentation with pairing caps and the ray
    starting at the origin, each sample is a certified branch-and-bound
    minimum over the whole group (or over the kernel of ``kernel``) and
    ``xi`` may be a :class:`~horolab.coded.CodedPoint`.
    """
    ts = _sample_times(T, step)
    dim = source.dim
    z = np.zeros(dim) if z is None else geo.check_interior(np.asarray(z, float))
    if isinstance(source, SchottkyPresentation):
        if source.targets is not None and not np.any(z):
            target = cd.boundary_target(xi)
            phis, wits = [], []
            for t in ts:
                d, w = cd.phi_value(source, target, t, kernel=kernel)
                phis.append(d)
                wits.append(w)
            return EscapeProfile(z, target.point(), ts, np.array(phis), tuple(wits),
                                 np.ones(len(ts), bool), step, math.inf)
        xi_pt = xi.point() if hasattr(xi, "point") else xi
        radius = 2 * T + margin + 2 * geo.hyperbolic_distance(z, np.zeros(dim))
        try:
            orbit = enumerate_orbit(source, np.zeros(dim), radius, cap=cap)
        except ResourceError as err:
            shrink = math.log(cap / max(err.estimate or cap * 10, cap + 1)) / 0.5
            radius = max(margin, radius + shrink)
            warnings.warn(f"orbit truncated at radius {radius:.2f}; later samples inexact", RuntimeWarning, stacklevel=2)
            orbit = enumerate_orbit(source, np.zeros(dim), radius, cap=cap)
        if kernel is not None:
            from .groups import suborbit

            orbit = suborbit(orbit, kernel)
        return escape_profile(orbit, z, xi_pt, T, step, margin=margin)
    orbit = source
    if kernel is not None:
        raise DomainError("filter the orbit with suborbit() before profiling")
    xi = xi.point() if hasattr(xi, "point") else geo.check_boundary(xi)
    x = orbit.basepoint
    dzx = geo.hyperbolic_distance(z, x)
    shift = geo.translation_to(x).matrix if np.any(x) else np.eye(2)
    mats = orbit.matrices @ shift
    phis, wits, exact = [], [], []
    for t, a in zip(ts, _ray_matrices(z, xi, ts)):
        d, k = _chunked_min_distance(np.linalg.inv(a), mats)
        phis.append(d)
        wits.append(orbit.words[k])
        exact.append(orbit.complete and orbit.radius >= 2 * (t + dzx) + margin)
    return EscapeProfile(z, xi, ts, np.array(phis), tuple(wits), np.array(exact), step, orbit.radius, dzx)


def profile_tolerance(t):
    """Numerical floor for ``phi(t)``: matrix entries near ``e^(t/2)`` carry relative error ~1e-16."""
    return 1e-9 + 1e-15 * np.exp(np.asarray(t, float))


def profile_violations(profile):
    """Exact samples breaking ``phi(t) <= t + d(z, x)`` or the 1-Lipschitz bound."""
    t, phi, _ = profile.exact_part()
    tol = profile_tolerance(t)
    bad = set(np.flatnonzero(phi > t + profile.offset + tol).tolist())
    if len(t) > 1:
        jump = np.abs(np.diff(phi)) - np.diff(t)
        bad |= set(np.flatnonzero(jump > tol[1:] + tol[:-1]).tolist())
    return sorted(bad)


# ---------------------------------------------------------------------------
# tests


@dataclass(frozen=True)
class TestResult:
    """Outcome of a finite-scale test with the numbers that produced it."""

    name: str
    passed: bool
    value: float
    params: dict = field(default_factory=dict)

    def record(self):
        return {"test": self.name, "passed": bool(self.passed), "value": float(self.value), **self.params}


def test_radial(profile, c, k_min=K_MIN, t_min=0.0):
    """Returns to within ``c`` of the orbit at ``>= k_min`` distinct witnesses spread over half of ``[0, T]``."""
    t, phi, wits = profile.exact_part()
    T = profile.T
    if c >= T:
        return TestResult("radial", True, len(t), {"c": c, "k_min": k_min, "degenerate": True, "T": T})
    sel = (phi <= c) & (t >= t_min)
    hit_t = t[sel]
    distinct = len({wits[i] for i in np.nonzero(sel)[0]})
    spread = float(hit_t.max() - hit_t.min()) if len(hit_t) else 0.0
    ok = distinct >= k_min and spread >= T / 2
    return TestResult("radial", ok, distinct, {"c": c, "k_min": k_min, "t_min": t_min, "spread": spread, "T": T, "degenerate": False})


def test_horospheric(M, profile=None, orbit=None, xi=None):
    """Depth ``-min(phi(t) - t)`` (profile route) or ``-min b_xi(g x)`` (Busemann route) against ``M``."""
    if profile is not None:
        t, phi, _ = profile.exact_part()
        depth = float(-(phi - t).min()) if len(t) else 0.0
        route, extra = "profile", {"T": profile.T}
    elif orbit is not None and xi is not None:
        depth = -float(orbit_busemann(orbit, xi).min())
        route, extra = "busemann", {"R": orbit.radius}
    else:
        raise DomainError("need a profile or an orbit and a boundary point")
    return TestResult("horospheric", depth >= M, depth, {"M": M, "route": route, **extra})


def orbit_busemann(orbit, xi, base=None):
    """``b_{xi, base}(g x)`` for every orbit entry, computed from matrices."""
    xi = xi.point() if hasattr(xi, "point") else geo.check_boundary(xi)
    x = orbit.basepoint
    base = np.zeros(orbit.dim) if base is None else base
    pre = geo.translation_to(x).matrix if np.any(x) else np.eye(2)
    post = np.linalg.inv(geo.translation_to(base).matrix) if np.any(base) else np.eye(2)
    eta = geo.apply_isometry(geo.Isometry(post), xi) if np.any(base) else xi
    w = geo.spinor(eta)
    m = np.einsum("ij,njk,kl->nil", post, orbit.matrices, pre)
    a, b, c, d = m[:, 0, 0], m[:, 0, 1], m[:, 1, 0], m[:, 1, 1]
    v0 = d * w[0] - b * w[1]
    v1 = -c * w[0] + a * w[1]
    return np.log(np.abs(v0) ** 2 + np.abs(v1) ** 2)


def test_big_horospheric(orbit, xi, level, K):
    """At least ``K`` orbit points in the horoball ``{b_xi <= level}``."""
    count = int((orbit_busemann(orbit, xi) <= level).sum())
    return TestResult("big-horospheric", count >= K, count, {"level": level, "K": K, "R": orbit.radius})


def _ratio_stats(profile):
    t, phi, _ = profile.exact_part()
    if not len(t) or t[-1] < 20:
        raise InsufficientDataError("ratio tests need exact samples up to T >= 20")
    half = (t >= t[-1] / 2) & (t > 0)
    r = phi[half] / t[half]
    return float(r.min()), float(r.max())


def test_lambda(profile, kappa, tol=0.02):
    lo, hi = _ratio_stats(profile)
    return TestResult("lambda", lo <= kappa + tol, lo, {"kappa": kappa, "tol": tol, "max_ratio": hi})


def test_lambda_star(profile, tol=0.02):
    lo, hi = _ratio_stats(profile)
    return TestResult("lambda-star", hi <= tol, hi, {"tol": tol, "min_ratio": lo})


def shadow_hits(orbit, xi, c, kappa, r_min=0.0):
    """Orbit entries (from the origin) whose shadow ``I(gx : c, 1/(1+kappa))`` holds ``xi``."""
    xi = xi.point() if hasattr(xi, "point") else geo.check_boundary(xi)
    if np.any(orbit.basepoint):
        raise DomainError("shadow tests use orbits of the origin")
    sel = (orbit.distances > 0) & (orbit.distances >= r_min)
    m = orbit.matrices[sel]
    h = np.einsum("nij,nkj->nik", m, m.conj())
    xv = np.column_stack([h[:, 0, 1].real, h[:, 0, 1].imag, 0.5 * (h[:, 0, 0].real - h[:, 1, 1].real)])
    xv /= np.linalg.norm(xv, axis=1, keepdims=True)
    if orbit.dim == 2:
        xv = xv[:, [0, 2]]
    chord = np.linalg.norm(xv - xi, axis=1)
    gap = 2 / (np.exp(orbit.distances[sel]) + 1)
    return chord < c * gap ** (1 / (1 + kappa))


def test_shadow_limit(orbit, xi, c, kappa, k_min=K_MIN, r_min=0.0):
    hits = int(shadow_hits(orbit, xi, c, kappa, r_min).sum())
    return TestResult("shadow", hits >= k_min, hits, {"c": c, "kappa": kappa, "k_min": k_min, "r_min": r_min, "R": orbit.radius})


def shadow_hit_counts(orbit, points, c, kappa, r_min=0.0, chunk=256):
    """Vectorised :func:`shadow_hits` counts for many boundary points."""
    if np.any(orbit.basepoint):
        raise DomainError("shadow tests use orbits of the origin")
    sel = (orbit.distances > 0) & (orbit.distances >= r_min)
    dirs = np.array([geo.orbit_direction(m, orbit.dim) for m in orbit.matrices[sel]]).reshape(-1, orbit.dim)
    rad = c * (2 / (np.exp(orbit.distances[sel]) + 1)) ** (1 / (1 + kappa))
    pts = np.atleast_2d(np.asarray(points, float))
    out = np.empty(len(pts), np.int64)
    for i in range(0, len(pts), chunk):
        p = pts[i : i + chunk]
        chord = np.sqrt(((p[:, None, :] - dirs[None, :, :]) ** 2).sum(-1))
        out[i : i + chunk] = (chord < rad[None, :]).sum(1)
    return out


def matched_shadow_constant(c):
    """Shadow constant that every radial witness at distance >= c + 1 satisfies (kappa = 0).

    A point ``y`` within ``c`` of the ray at depth ``D`` subtends an angle with
    ``sin theta <= sinh c / sinh D``; with ``1 - |y| = 2 / (e^D + 1)`` this
    gives ``chord / (1 - |y|) <= sqrt(2) sinh(c) / (1 - e^{-D})``.
    """
    return math.sqrt(2) * math.sinh(c) / (1 - math.exp(-1)) * (1 + 1e-9)


def shadow_depth_bound(c, kappa, r_min):
    """Lower bound on ``-b_xi(y)`` for a shadow hit ``y`` with ``d(o, y) >= r_min``."""
    a = 2 / (1 + kappa) - 1
    return a * (r_min - math.log(2)) - math.log(1 + c * c)


# ---------------------------------------------------------------------------
# Myrberg score


@dataclass(frozen=True)
class Segment:
    """Oriented geodesic segment on the axis of ``word``: ``H diag(e^{s/2}, e^{-s/2}) o`` for s in [s0, s1]."""

    word: tuple
    frame: np.ndarray
    s0: float
    s1: float

    @property
    def center_distance(self):
        return geo.displacement(self.frame @ np.diag([math.exp((self.s0 + self.s1) / 4), math.exp(-(self.s0 + self.s1) / 4)]))


def axis_segment(pres, word, L):
    m = pres.element(word).matrix
    rep, att, _ = axis_data(geo.Isometry(m), dim=3)
    fr = np.column_stack([geo.spinor(att), geo.spinor(rep)])
    fr = fr / np.sqrt(fr[0, 0] * fr[1, 1] - fr[0, 1] * fr[1, 0])
    inv = np.linalg.inv(fr)
    h = inv @ inv.conj().T
    sc = 0.5 * math.log(h[0, 0].real / h[1, 1].real)
    return Segment(tuple(word), fr, sc - L / 2, sc + L / 2)


def segment_net(pres, L=5.0, max_length=2):
    """Axes of all reduced words of length 1..max_length, cut to length ``L`` about the foot of ``o``."""
    return [axis_segment(pres, w, L) for w in reduced_words(pres.rank, max_length) if w]


@dataclass(frozen=True)
class MyrbergResult:
    score: float
    passed: bool
    visited: tuple
    eps: float
    T: float
    L: float
    window: float

    def record(self):
        return {"test": "myrberg", "score": self.score, "passed": self.passed, "eps": self.eps, "T": self.T, "L": self.L}


def _point_segment_distance(h, s0, s1):
    """Distance from points with Hermitian matrices ``h`` (in segment frame) to the vertical segment."""
    a = h[..., 0, 0].real
    b = h[..., 1, 1].real
    cosh_r = np.sqrt(np.maximum(a * b, 1.0))
    s = 0.5 * np.log(a / b)
    off = np.maximum(0.0, np.maximum(s0 - s, s - s1))
    return np.arccosh(np.maximum(cosh_r * np.cosh(off), 1.0)), s


def myrberg_score(pres, xi, net=None, eps=DEFAULT_EPS, T=40.0, L=5.0, samples=10):
    """Fraction of net segments approximated, in direction, by translates of ray windows.

    Windows have length ``L/2`` and step ``L/4``; each is compared with the
    net segment at ``samples`` points.  For a coded ``xi`` every window is
    first pulled back by the prefix whose orbit point lies near it, so long
    rays are handled without loss of precision.
    """
    net = segment_net(pres, L) if net is None else net
    if not net:
        raise DomainError("segment net is empty")
    target = cd.boundary_target(xi)
    win = L / 2
    inv_frames = np.array([np.linalg.inv(sg.frame) for sg in net])
    s_lo = np.array([sg.s0 for sg in net])
    s_hi = np.array([sg.s1 for sg in net])
    reach = max(sg.center_distance for sg in net) + L / 2 + eps + 1.0
    cache = {}
    visited = np.zeros(len(net), bool)
    t = 0.0
    while t + win <= T + 1e-9 and not visited.all():
        times = t + np.linspace(0, win, samples)
        n = target.renorm_index(t + win / 2)
        ys = np.array([cd.ray_frame(target, tt, n)[1] for tt in times])
        r = geo.displacement(ys[samples // 2]) + reach
        key = math.ceil(r)
        if key not in cache:
            cache[key] = enumerate_orbit(pres, np.zeros(pres.dim), key).matrices
        us = cache[key]
        uinv = np.linalg.inv(us)
        # points u^{-1} y_j in each segment frame: shape (seg, u, j, 2, 2)
        m = np.einsum("aij,bjk,ckl->abcil", inv_frames, uinv, ys)
        h = m @ np.conj(np.swapaxes(m, -1, -2))
        dist, s = _point_segment_distance(h, s_lo[:, None, None], s_hi[:, None, None])
        close = (dist <= eps).all(axis=2) & (np.diff(s, axis=2) > 0).all(axis=2)
        visited |= close.any(axis=1)
        t += L / 4
    score = float(visited.mean())
    return MyrbergResult(score, score == 1.0, tuple(bool(v) for v in visited), eps, T, L, win)


def random_reduced_word(rank, length, rng, cyclic=True):
    """Uniform random reduced word (cyclically reduced when ``cyclic``)."""
    alph = letters(rank)
    while True:
        w = []
        while len(w) < length:
            x = alph[int(rng.integers(len(alph)))]
            if w and w[-1] == -x:
                continue
            w.append(x)
        if not cyclic or w[0] != -w[-1]:
            return tuple(w)


def myrberg_candidate(pres, rng, length=40, cover=2):
    """Coded attracting fixed point of a random word containing every reduced subword of length ``cover``.

    The word is grown by a random walk that prefers unseen letter pairs and
    is then padded at random to ``length``.
    """
    import itertools

    alph = letters(pres.rank)
    need = {p for p in itertools.product(alph, repeat=cover) if reduce_word(p) == p}
    w = [alph[int(rng.integers(len(alph)))]]
    seen = set()
    while need - seen or len(w) < length:
        opts = [x for x in alph if x != -w[-1]]
        fresh = [x for x in opts if tuple(w[-cover + 1 :] + [x]) not in seen] if cover > 1 else opts
        pool = fresh if (need - seen and fresh) else opts
        x = pool[int(rng.integers(len(pool)))]
        w.append(x)
        seen.add(tuple(w[-cover:]))
        if len(w) > 50 * len(need) + length:
            break
    while w[0] == -w[-1]:
        w.append(alph[int(rng.integers(len(alph)))])
        if w[-1] == -w[-2]:
            w.pop()
    return cd.CodedPoint(pres, tuple(w))


# ---------------------------------------------------------------------------
# box counting


def box_dimension_estimate(points, scale_range=(1e-3, 1e-1), correction=True):
    """Slope of ``log N(eps)`` against ``log(1/eps)`` on the deterministic sphere grid.

    ``N`` counts occupied cells; with ``correction`` the bias-corrected
    Chao1 estimate ``N_obs + f1 (f1 - 1) / (2 (f2 + 1))`` is used, which
    accounts for cells missed by a finite sample.  Returns ``(dim, stderr)``.
    """
    pts = np.atleast_2d(np.asarray(points, float))
    if len(np.unique(np.round(pts, 14), axis=0)) == 1:
        return 0.0, 0.0
    if len(pts) < 1000:
        raise InsufficientDataError("box counting needs at least 1000 points")
    lo, hi = scale_range
    if lo < 1e-4 - 1e-15 or hi > 1e-1 + 1e-15 or lo >= hi:
        raise DomainError("scale range must lie within [1e-4, 1e-1]")
    dim = pts.shape[1]
    levels = [lv for lv in range(0, 40) if lo <= spheregrid.cell_scale(lv, dim) <= hi]
    if len(levels) < 2:
        raise InsufficientDataError("scale range holds fewer than two grid levels")
    counts = []
    for lv in levels:
        occ = spheregrid.occupancy(pts, lv)
        n = np.array([c for c, _ in occ.values()])
        est = float(len(n))
        if correction:
            f1, f2 = int((n == 1).sum()), int((n == 2).sum())
            est += f1 * (f1 - 1) / (2 * (f2 + 1))
        counts.append(est)
    if counts[-1] <= 1:
        raise InsufficientDataError("point set is one cluster below the smallest scale")
    x = np.array([-math.log(spheregrid.cell_scale(lv, dim)) for lv in levels])
    y = np.log(counts)
    coef = np.polyfit(x, y, 1)
    resid = y - np.polyval(coef, x)
    se = math.sqrt(float(resid @ resid) / max(len(x) - 2, 1) / float(((x - x.mean()) ** 2).sum()))
    return float(coef[0]), se


# ---------------------------------------------------------------------------
# verdicts


@dataclass
class Verdict:
    point: np.ndarray
    results: dict
    thresholds: dict

    def record(self):
        out = {"point": [float(v) for v in self.point]}
        out.update(self.thresholds)
        for name, r in self.results.items():
            rec = r.record()
            out[f"{name}_passed"] = rec["passed"]
            out[f"{name}_value"] = rec.get("value", rec.get("score"))
        return out


VERDICT_FIELDS = (
    "radial", "shadow", "lambda", "lambda_star", "horospheric", "big_horospheric", "myrberg",
)


def verdicts_table(verdicts):
    """Comma-separated export, one row per point, with every threshold."""
    if not verdicts:
        return ""
    recs = [v.record() for v in verdicts]
    keys = list(recs[0].keys())
    rows = [",".join(keys)]
    for r in recs:
        cells = []
        for k in keys:
            v = r.get(k)
            if isinstance(v, list):
                cells.append(" ".join(f"{x:.12f}" for x in v))
            elif isinstance(v, float):
                cells.append(f"{v:.10g}")
            else:
                cells.append(str(v))
        rows.append(",".join(cells))
    return "\n".join(rows) + "\n"


def classify_point(orbit, xi, T, c=2.0, kappa=0.0, M=DEFAULT_DEPTH, K=K_MIN, step=0.5, pres=None, eps=DEFAULT_EPS):
    """Run the whole hierarchy on one point against one orbit ball (from the origin)."""
    prof = escape_profile(orbit, None, xi, T, step)
    res = {
        "radial": test_radial(prof, c, K),
        "shadow": test_shadow_limit(orbit, xi, matched_shadow_constant(c), kappa, K),
        "horospheric": test_horospheric(M, orbit=orbit, xi=xi),
        "big_horospheric": test_big_horospheric(orbit, xi, 0.0, K),
    }
    if T >= 20:
        res["lambda"] = test_lambda(prof, kappa)
        res["lambda_star"] = test_lambda_star(prof)
    if pres is not None:
        res["myrberg"] = myrberg_score(pres, xi, eps=eps, T=T)
    th = {"T": T, "c": c, "kappa": kappa, "M": M, "K": K, "R": orbit.radius, "eps": eps}
    return Verdict(np.asarray(xi.point() if hasattr(xi, "point") else xi, float), res, th)
