"""Poincare series, critical exponents and atomic approximations of conformal measures."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from . import geometry as geo
from . import spheregrid
from .errors import ConstructionError, DomainError, InsufficientDataError
from .groups import image_cap
from .words import letters

GROW_RATE = 0.01
PLATEAU_RATE = 0.001


@dataclass(frozen=True)
class SeriesProfile:
    """Partial sums ``P^s_R`` on an increasing grid of radii."""

    s: float
    radii: np.ndarray
    values: np.ndarray
    x: np.ndarray
    z: np.ndarray

    def table(self):
        lines = ["R,partial_sum"]
        lines += [f"{r:.6f},{v:.12e}" for r, v in zip(self.radii, self.values)]
        return "\n".join(lines) + "\n"


def _radius_grid(rmax, step):
    n = int(math.floor(rmax / step + 1e-9))
    return np.arange(1, n + 1) * step


def _profile(dists, s, rmax, x, z, radii=None, step=0.25):
    d = np.sort(np.asarray(dists, float))
    if d.size == 0:
        raise DomainError("empty orbit")
    radii = _radius_grid(rmax, step) if radii is None else np.asarray(radii, float)
    if radii.size == 0:
        radii = np.array([rmax])
    if np.any(radii > rmax + 1e-12):
        raise DomainError("requested radius beyond the truncation radius")
    terms = np.cumsum(np.exp(-s * d))
    idx = np.searchsorted(d, radii, side="right")
    vals = np.where(idx > 0, terms[np.maximum(idx - 1, 0)], 0.0)
    return SeriesProfile(float(s), radii, vals, np.asarray(x, float), np.asarray(z, float))


def poincare_partial(orbit, s, z=None, radii=None, step=0.25):
    """Partial sums of ``sum_g exp(-s d(g x, z))`` as the cutoff radius grows.

    ``x`` is the orbit basepoint.  When ``z`` differs from ``x`` the sums
    are complete only up to ``R - d(x, z)``, and the grid stops there.
    """
    if s <= 0:
        raise DomainError("exponent must be positive")
    if len(orbit) == 0:
        raise DomainError("empty orbit")
    x = orbit.basepoint
    if z is None or np.allclose(z, x, atol=0):
        return _profile(orbit.distances, s, orbit.radius, x, x, radii, step)
    z = geo.check_interior(z)
    dxz = geo.hyperbolic_distance(x, z)
    pts = orbit.points
    d = np.array([geo.hyperbolic_distance(p, z) for p in pts])
    rmax = orbit.radius - dxz
    if rmax <= 0:
        raise DomainError("z lies outside the truncation ball")
    return _profile(d[d <= rmax], s, rmax, x, z, radii, step)


def orbit_counts(orbit, radii):
    return np.searchsorted(orbit.distances, np.asarray(radii, float), side="right")


def critical_exponent_estimate(orbit, window, step=0.25, allow_incomplete=False):
    """Least-squares slope of ``log #(ball of radius R)`` over ``window``.

    Returns ``(delta_hat, stderr)``.
    """
    lo, hi = window
    if hi - lo < 5:
        raise InsufficientDataError("window shorter than 5")
    if hi > orbit.radius + 1e-9:
        raise DomainError("window exceeds the truncation radius")
    if not orbit.complete and not allow_incomplete:
        raise DomainError("critical exponent needs a complete orbit ball")
    radii = np.arange(lo, hi + 1e-9, step)
    counts = orbit_counts(orbit, radii)
    if len(np.unique(counts)) < 10:
        raise InsufficientDataError("fewer than 10 distinct counts in the window")
    fit = _linfit(radii, np.log(counts))
    return fit


def _linfit(x, y):
    n = len(x)
    a = np.column_stack([x, np.ones(n)])
    coef, res, *_ = np.linalg.lstsq(a, y, rcond=None)
    resid = y - a @ coef
    dof = max(n - 2, 1)
    sigma2 = float(resid @ resid) / dof
    sxx = float(((x - x.mean()) ** 2).sum())
    return float(coef[0]), math.sqrt(sigma2 / sxx) if sxx > 0 else math.inf


@dataclass(frozen=True)
class DivergenceVerdict:
    label: str
    slope: float
    grow_rate: float
    plateau_rate: float


def divergence_diagnostic(profile, grow_rate=GROW_RATE, plateau_rate=PLATEAU_RATE):
    """Heuristic label from the tail slope of ``P^s_R`` over the last third of radii."""
    r, v = profile.radii, profile.values
    k = max(2, len(r) // 3)
    slope = float(np.polyfit(r[-k:], v[-k:], 1)[0]) if len(r) >= 2 else 0.0
    if slope > grow_rate:
        label = "diverging-like"
    elif abs(slope) < plateau_rate:
        label = "converging-like"
    else:
        label = "inconclusive"
    return DivergenceVerdict(label, slope, grow_rate, plateau_rate)


# ---------------------------------------------------------------------------
# atomic measures


@dataclass(frozen=True)
class AtomicMeasure:
    """Finite sum of weighted Dirac masses on the boundary sphere."""

    points: np.ndarray
    weights: np.ndarray
    s: float
    provenance: str
    radius: float = math.nan
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if np.any(self.weights <= 0):
            raise DomainError("atom weights must be positive")

    @property
    def total_mass(self):
        return float(self.weights.sum())

    @property
    def dim(self):
        return self.points.shape[1]

    def __len__(self):
        return len(self.weights)

    def mass_in_cap(self, cap):
        return float(self.weights[self.in_cap(cap)].sum())

    def in_cap(self, cap):
        return np.linalg.norm(self.points - cap.center, axis=1) < cap.radius

    def cell_masses(self, level):
        occ = spheregrid.occupancy(self.points, level, self.weights)
        return {k: m for k, (_, m) in occ.items()}

    def table(self):
        head = f"# s={self.s:.10g} R={self.radius:.10g} provenance={self.provenance} atoms={len(self)}"
        cols = ",".join(["x", "y", "z"][: self.dim]) + ",weight"
        rows = [",".join(f"{c:.15f}" for c in p) + f",{w:.15e}" for p, w in zip(self.points, self.weights)]
        return "\n".join([head, cols] + rows) + "\n"


def _atoms_from_points(pts, dist_to_o, s, provenance, radius, meta=None):
    r = np.linalg.norm(pts, axis=1)
    keep = r > 1e-15
    pts, d = pts[keep], np.asarray(dist_to_o)[keep]
    if len(d) == 0:
        raise DomainError("no atom survives (only the origin)")
    w = np.exp(-s * (d - d.min()))
    w = w / w.sum()
    return AtomicMeasure(pts / r[keep][:, None], w, float(s), provenance, float(radius), meta or {})


def patterson_approx(orbit, s, delta_hat=None, stderr=0.0, window=None):
    """Normalised ``sum exp(-s d(gx, o)) delta_{gx/|gx|}`` over the orbit ball.

    ``s`` must exceed ``delta_hat + stderr``; when ``delta_hat`` is not
    given it is estimated over ``window`` (default: upper half of the ball).
    The identity term is dropped when the basepoint is the origin since it
    has no radial projection.
    """
    if not orbit.complete:
        raise DomainError("Patterson approximation needs a complete orbit ball")
    if delta_hat is None:
        window = window or (orbit.radius / 2, orbit.radius)
        delta_hat, stderr = critical_exponent_estimate(orbit, window)
    if s <= delta_hat + stderr:
        raise DomainError(f"s={s} is not above the estimated exponent {delta_hat:.4f} (+{stderr:.4f})")
    pts = orbit.points
    if np.any(orbit.basepoint):
        d0 = np.array([geo.hyperbolic_distance(p, np.zeros(orbit.dim)) for p in pts])
    else:
        # exact from the matrices; ball coordinates lose precision far out
        d0 = orbit.distances
    return _atoms_from_points(pts, d0, s, "patterson", orbit.radius, {"delta_hat": delta_hat})


@dataclass(frozen=True)
class DefectReport:
    max_defect: float
    defects: tuple
    skipped: int


def conformal_defect(mu, g, boxes, s=None, min_mass=1e-3):
    """Largest relative gap between ``mu(g A)`` and ``int_A |g'|^s dmu`` over caps ``A``."""
    s = mu.s if s is None else s
    g = g if isinstance(g, geo.Isometry) else geo.Isometry(g)
    stretch = np.array([geo.boundary_stretch(g, p) for p in mu.points]) ** s
    out, skipped = [], 0
    for cap in boxes:
        inside = mu.in_cap(cap)
        if mu.weights[inside].sum() < min_mass:
            skipped += 1
            continue
        predicted = float((mu.weights[inside] * stretch[inside]).sum())
        actual = mu.mass_in_cap(image_cap(g, cap))
        out.append(abs(actual - predicted) / predicted)
    if skipped:
        warnings.warn(f"{skipped} boxes below mass {min_mass} skipped", RuntimeWarning, stacklevel=2)
    return DefectReport(max(out) if out else 0.0, tuple(out), skipped)


def total_variation(mu, nu, level):
    a, b = mu.cell_masses(level), nu.cell_masses(level)
    keys = set(a) | set(b)
    return 0.5 * sum(abs(a.get(k, 0.0) - b.get(k, 0.0)) for k in keys)


def ending_measure_approx(orbit, s, basepoints, level=4):
    """``mu^s_(x_n)`` for the last basepoint plus consecutive total-variation distances.

    ``orbit`` is an orbit ball about the origin; each basepoint ``x_n`` is
    moved by every enumerated element.  The tail must look convergent at
    ``s``.
    """
    diag = divergence_diagnostic(poincare_partial(orbit, s))
    if diag.label == "diverging-like":
        raise DomainError(f"series diverging-like at s={s} (slope {diag.slope:.3g})")
    measures = []
    for x in basepoints:
        x = geo.check_interior(x)
        pts = np.array([geo.apply_isometry(geo.Isometry(m), x) for m in orbit.matrices])
        d0 = 2 * np.arctanh(np.minimum(np.linalg.norm(pts, axis=1), 1 - 1e-16))
        measures.append(_atoms_from_points(pts, d0, s, "ending", orbit.radius))
    stats = [total_variation(measures[i], measures[i + 1], level) for i in range(len(measures) - 1)]
    last = measures[-1]
    return AtomicMeasure(last.points, last.weights, last.s, "ending", last.radius, {"cauchy": tuple(stats)})


# ---------------------------------------------------------------------------
# exponent oracle from brute-force word sums


def word_sums(pres, max_length, s):
    """``Z_k(s) = sum over reduced words of length k of exp(-s d(o, w o))`` for k <= max_length."""
    mats = {x: pres.letter_matrix(x) for x in letters(pres.rank)}
    z = np.zeros(max_length + 1)
    layer = {(): np.eye(2, dtype=complex)}
    z[0] = 1.0
    for k in range(1, max_length + 1):
        nxt = {}
        for w, m in layer.items():
            for x in letters(pres.rank):
                if w and w[-1] == -x:
                    continue
                nxt[w + (x,)] = m @ mats[x]
        layer = nxt
        d = geo.displacements(np.array(list(layer.values())))
        z[k] = np.exp(-s * d).sum()
    return z


def word_length_distances(pres, max_length):
    """Displacements of all reduced words, grouped by length (brute force, no pruning)."""
    mats = {x: pres.letter_matrix(x) for x in letters(pres.rank)}
    out = [np.zeros(1)]
    stack = np.eye(2, dtype=complex)[None]
    lastl = np.zeros(1, dtype=int)
    alph = letters(pres.rank)
    gen = np.array([mats[x] for x in alph])
    for _ in range(max_length):
        nm, nl = [], []
        for j, x in enumerate(alph):
            ok = lastl != -x
            nm.append(stack[ok] @ gen[j])
            nl.append(np.full(ok.sum(), x))
        stack = np.concatenate(nm)
        lastl = np.concatenate(nl)
        out.append(geo.displacements(stack))
    return out


def exponent_oracle(pres, max_length=8):
    """Critical exponent from the growth of word-length sums.

    Free-group words concatenate, so ``log Z_k(s)`` is (up to a bounded
    correction) additive in ``k`` and the pressure ``lim log Z_k / k`` is
    reached by the ratio ``Z_k / Z_{k-1}``.  The exponent is the root of
    ``Z_k(s) = Z_{k-1}(s)`` at the largest ``k``.  Nothing from the pruned
    enumerator is used.
    """
    layers = word_length_distances(pres, max_length)
    d_last, d_prev = layers[-1], layers[-2]

    def pressure(s):
        return np.log(np.exp(-s * d_last).sum()) - np.log(np.exp(-s * d_prev).sum())

    if pressure(1e-9) <= 0:
        # no exponential growth (elementary groups)
        return 0.0
    hi = 1.0
    while pressure(hi) > 0:
        hi *= 2
    return float(optimize.brentq(pressure, 1e-9, hi, xtol=1e-12))


# ---------------------------------------------------------------------------
# uniformly distributed sets


@dataclass(frozen=True)
class UniformNet:
    points: np.ndarray
    words: tuple
    m: float
    M: float
    radius: float
    center: np.ndarray

    def __len__(self):
        return len(self.points)


def _pairwise_min(points, new):
    if len(points) == 0:
        return math.inf
    return float(_dist_to_set(new[None], np.asarray(points))[0])


def _dist_to_set(a, b):
    """Min hyperbolic distance from each row of ``a`` to the rows of ``b``."""
    a = np.atleast_2d(a)
    b = np.atleast_2d(b)
    na = 1 - (a**2).sum(1)
    nb = 1 - (b**2).sum(1)
    out = np.empty(len(a))
    for i0 in range(0, len(a), 512):
        aa = a[i0 : i0 + 512]
        diff = ((aa[:, None, :] - b[None, :, :]) ** 2).sum(-1)
        arg = np.sqrt(diff / (na[i0 : i0 + 512, None] * nb[None, :]))
        out[i0 : i0 + 512] = (2 * np.arcsinh(arg)).min(1)
    return out


def hull_sample(limit_points, radius, spacing=0.5, max_pairs=None, rng=None):
    """Points on geodesics joining pairs of limit points, cut to the ``radius`` ball."""
    lp = [geo.check_boundary(p) for p in limit_points]
    pairs = [
        (i, j) for i in range(len(lp)) for j in range(i + 1, len(lp))
        if geo.chordal_distance(lp[i], lp[j]) > 1e-9
    ]
    if max_pairs is not None and len(pairs) > max_pairs:
        rng = rng or np.random.default_rng(0)
        pairs = [pairs[k] for k in sorted(rng.choice(len(pairs), max_pairs, replace=False))]
    dim = lp[0].shape[0]
    out = []
    for i, j in pairs:
        a, b = geo.spinor(lp[i]), geo.spinor(lp[j])
        frame = np.column_stack([a, b])
        frame = frame / np.sqrt(frame[0, 0] * frame[1, 1] - frame[0, 1] * frame[1, 0])
        # parameter of the point nearest the origin
        h = np.linalg.inv(frame) @ np.linalg.inv(frame).conj().T
        s0 = 0.5 * math.log(abs(h[0, 0].real) / abs(h[1, 1].real))
        ts = np.arange(-radius, radius + 1e-9, spacing) + s0
        for t in ts:
            lam = math.exp(t / 2)
            p = geo.orbit_point(frame @ np.diag([lam, 1 / lam]), dim)
            if 2 * math.atanh(min(np.linalg.norm(p), 1 - 1e-16)) <= radius:
                out.append(p)
    return np.array(out)


def build_uniform_net(pres, hull, m, M, radius, seeds=None):
    """Greedy ``m``-separated subset of seed orbits and hull points, checked ``M``-dense on ``hull``."""
    from .groups import enumerate_orbit

    if m >= M:
        raise DomainError("need m < M")
    hull = np.asarray(hull, float)
    dim = hull.shape[1]
    seeds = [np.zeros(dim)] if seeds is None else [np.asarray(z, float) for z in seeds]
    cand, words = [], []
    for z in seeds:
        orb = enumerate_orbit(pres, z, radius + geo.hyperbolic_distance(z, np.zeros(dim)))
        for w, p in zip(orb.words, orb.points):
            cand.append(p)
            words.append(w)
    for p in hull:
        cand.append(p)
        words.append(None)
    cand = np.array(cand)
    d0 = 2 * np.arctanh(np.minimum(np.linalg.norm(cand, axis=1), 1 - 1e-16))
    keep = d0 <= radius
    order = sorted(np.nonzero(keep)[0], key=lambda i: (round(d0[i], 9), i))
    adm, adm_words = [], []
    for i in order:
        if _pairwise_min(adm, cand[i]) >= m:
            adm.append(cand[i])
            adm_words.append(words[i])
    net = UniformNet(np.array(adm), tuple(adm_words), m, M, radius, np.zeros(dim))
    cover, _ = check_uniform_net(net, hull)
    if cover > M:
        far = int(np.argmax(_dist_to_set(hull, net.points)))
        raise ConstructionError(f"hull point {hull[far]} is {cover:.3f} > M from the net")
    return net


def check_uniform_net(net, hull):
    """Measured (covering constant, separation) of a net against a hull sample."""
    pts = net.points
    if not np.all(np.isfinite(hull)):
        raise DomainError("hull sample contains non-finite points")
    cover = float(_dist_to_set(hull, pts).max()) if len(hull) else 0.0
    sep = math.inf
    for i in range(len(pts) - 1):
        sep = min(sep, float(_dist_to_set(pts[i][None], pts[i + 1 :])[0]))
    return cover, sep


def extended_poincare(net, s, z=None, radii=None, step=0.25):
    z = net.center if z is None else geo.check_interior(z)
    d = np.array([geo.hyperbolic_distance(p, z) for p in net.points])
    rmax = net.radius - geo.hyperbolic_distance(z, net.center)
    return _profile(d[d <= rmax], s, rmax, net.center, z, radii, step)


def bounded_type_ratio(net, radii, max_centers=200):
    """Largest ``#(X in B_R(x)) / #(X in B_R(z))`` over net points ``x`` in the half-radius ball."""
    radii = np.asarray(radii, float)
    if radii.max() > net.radius / 2 + 1e-12:
        raise DomainError("R exceeds half the truncation radius")
    pts = net.points
    d0 = 2 * np.arctanh(np.minimum(np.linalg.norm(pts, axis=1), 1 - 1e-16))
    centers = np.nonzero(d0 <= net.radius / 2)[0][:max_centers]
    base = np.array([(d0 <= r).sum() for r in radii])
    best = 1.0
    for i in centers:
        di = np.array([geo.hyperbolic_distance(pts[i], q) for q in pts])
        for r, b in zip(radii, base):
            if d0[i] + r <= net.radius:
                best = max(best, (di <= r).sum() / b)
    return float(best)


def net_measure(net, s):
    """Atomic measure from an extended Poincare series (atoms at radial projections)."""
    d0 = 2 * np.arctanh(np.minimum(np.linalg.norm(net.points, axis=1), 1 - 1e-16))
    return _atoms_from_points(net.points, d0, s, "uniform-net", net.radius)
