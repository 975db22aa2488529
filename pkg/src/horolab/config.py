"""JSON presentation and experiment files.

Presentation schema (``"schema": "horolab.presentation"``, ``"version": 1``)::

    {
      "schema": "horolab.presentation", "version": 1,
      "name": "schottky2", "dim": 2,
      "mode": "schottky",                 # or "asserted"
      "generators": [
        {"name": "a",
         "source": {"center": [-1, 0], "radius": 0.3},
         "target": {"center": [1, 0], "radius": 0.3},
         "matrix": [[[re, im], [re, im]], [[re, im], [re, im]]]}   # optional
      ],
      "homomorphisms": {
        "proj": {"kind": "projection", "keep": ["b", "c"]},
        "height": {"kind": "exponent", "weights": {"a": 0, "b": 1}}
      },
      "basepoint_shift": [x, y]            # asserted mode only, optional
    }

In asserted mode each generator carries only ``matrix``.  A real matrix may
be written as plain numbers instead of ``[re, im]`` pairs.  With
``basepoint_shift`` the matrices are conjugated so that the given point
becomes the origin.

Experiment schema (``"schema": "horolab.experiment"``, ``"version": 1``)
holds ``name``, ``kind``, ``presentation`` (a shipped name, a path
relative to the experiment file, or an inline object), ``kernel`` (a key
of the presentation's homomorphisms), ``radii``, ``thresholds``
(``c``, ``kappa``, ``M``, ``K``, ``eps``), ``seed`` and ``params``.
"""

from __future__ import annotations

import copy
import json
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from . import geometry as geo
from .errors import HorolabError
from .groups import Cap, asserted_free, build_schottky, exponent_sum, projection

SCHEMA_VERSION = 1
EXPERIMENT_KINDS = ("myr-in-horo", "measure-diff", "expnew", "dimension")


class ConfigError(HorolabError, ValueError):
    """A configuration file is malformed or inconsistent."""


def _need(obj, key, where):
    if key not in obj:
        raise ConfigError(f"{where}: missing field {key!r}")
    return obj[key]


def _check_schema(obj, schema):
    if obj.get("schema") != schema:
        raise ConfigError(f"expected schema {schema!r}, got {obj.get('schema')!r}")
    if obj.get("version") != SCHEMA_VERSION:
        raise ConfigError(f"unsupported {schema} version {obj.get('version')!r}")


def _matrix(spec, where):
    try:
        arr = np.array(spec, dtype=float)
    except (TypeError, ValueError) as err:
        raise ConfigError(f"{where}: matrix is not numeric") from err
    if arr.shape == (2, 2):
        return arr.astype(complex)
    if arr.shape == (2, 2, 2):
        return arr[..., 0] + 1j * arr[..., 1]
    raise ConfigError(f"{where}: matrix must be 2x2 (real) or 2x2x2 (re, im pairs)")


def _cap(spec, dim, where):
    c = np.array(_need(spec, "center", where), float)
    if c.shape != (dim,):
        raise ConfigError(f"{where}: center must have {dim} coordinates")
    norm = np.linalg.norm(c)
    if norm == 0:
        raise ConfigError(f"{where}: center must be nonzero")
    r = float(_need(spec, "radius", where))
    if not 0 < r < math.sqrt(2):
        raise ConfigError(f"{where}: radius must lie in (0, sqrt 2)")
    return Cap(c / norm, r)


def _homs(obj, names):
    out = {}
    rank = len(names)
    for key, spec in obj.get("homomorphisms", {}).items():
        kind = _need(spec, "kind", f"homomorphism {key}")
        if kind == "projection":
            keep = spec.get("keep", [])
            bad = [k for k in keep if k not in names]
            if bad:
                raise ConfigError(f"homomorphism {key}: unknown generators {bad}")
            out[key] = projection(rank, {names.index(k) + 1 for k in keep})
        elif kind == "exponent":
            w = spec.get("weights", {})
            bad = [k for k in w if k not in names]
            if bad:
                raise ConfigError(f"homomorphism {key}: unknown generators {bad}")
            out[key] = exponent_sum(tuple(int(w.get(n, 0)) for n in names))
        else:
            raise ConfigError(f"homomorphism {key}: unknown kind {kind!r}")
    return out


def presentation_from_dict(obj):
    """Build a presentation (with ``homomorphisms`` attached) from a parsed file."""
    _check_schema(obj, "horolab.presentation")
    dim = _need(obj, "dim", "presentation")
    if dim not in (2, 3):
        raise ConfigError("dim must be 2 or 3")
    gens = _need(obj, "generators", "presentation")
    if not gens:
        raise ConfigError("presentation needs at least one generator")
    names = [g.get("name", f"g{i + 1}") for i, g in enumerate(gens)]
    if len(set(names)) != len(names):
        raise ConfigError("generator names must be distinct")
    mode = obj.get("mode", "schottky")
    name = obj.get("name", "")
    try:
        if mode == "asserted":
            mats = [_matrix(_need(g, "matrix", f"generator {n}"), f"generator {n}") for g, n in zip(gens, names)]
            shift = obj.get("basepoint_shift")
            if shift is not None:
                t = geo.translation_to(np.array(shift, float)).matrix
                mats = [np.linalg.inv(t) @ m @ t for m in mats]
            pres = asserted_free(mats, dim, names=names, name=name)
        elif mode == "schottky":
            pairings = [
                (_cap(_need(g, "source", f"generator {n}"), dim, f"generator {n} source"),
                 _cap(_need(g, "target", f"generator {n}"), dim, f"generator {n} target"))
                for g, n in zip(gens, names)
            ]
            mats = None
            if all("matrix" in g for g in gens):
                mats = [_matrix(g["matrix"], f"generator {n}") for g, n in zip(gens, names)]
            pres = build_schottky(pairings, dim, names=names, matrices=mats, name=name)
        else:
            raise ConfigError(f"unknown mode {mode!r}")
    except ConfigError:
        raise
    except HorolabError as err:
        raise ConfigError(f"presentation {name!r}: {err}") from err
    pres.homomorphisms = _homs(obj, names)
    return pres


def presentation_to_dict(pres, homomorphisms=None):
    """Inverse of :func:`presentation_from_dict` (matrices written explicitly)."""
    names = pres.names or [f"g{i + 1}" for i in range(pres.rank)]
    gens = []
    for i, g in enumerate(pres.generators):
        entry = {"name": names[i]}
        m = g.matrix
        entry["matrix"] = [[[float(v.real), float(v.imag)] for v in row] for row in m]
        if pres.sources is not None:
            for key, cap in (("source", pres.sources[i]), ("target", pres.targets[i])):
                entry[key] = {"center": [float(v) for v in cap.center], "radius": float(cap.radius)}
        gens.append(entry)
    out = {
        "schema": "horolab.presentation", "version": SCHEMA_VERSION, "name": pres.name,
        "dim": pres.dim, "mode": "asserted" if pres.asserted else "schottky", "generators": gens,
    }
    homs = homomorphisms if homomorphisms is not None else (pres.homomorphisms or {})
    if homs:
        out["homomorphisms"] = {}
        for key, h in homs.items():
            if h.kind == "projection":
                out["homomorphisms"][key] = {"kind": "projection", "keep": [names[i - 1] for i in sorted(h.keep)]}
            else:
                out["homomorphisms"][key] = {"kind": "exponent", "weights": dict(zip(names, h.weights))}
    return out


def shipped_names(schema="horolab.presentation"):
    """Names of the shipped files of one schema (presentations by default)."""
    root = resources.files("horolab") / "data"
    out = []
    for p in root.iterdir():
        if p.name.endswith(".json") and json.loads(p.read_text()).get("schema") == schema:
            out.append(p.name[:-5])
    return sorted(out)


def _read_json(path):
    try:
        return json.loads(Path(path).read_text())
    except OSError as err:
        raise ConfigError(f"cannot read {path}: {err}") from err
    except json.JSONDecodeError as err:
        raise ConfigError(f"{path}: invalid JSON ({err})") from err


def shipped_path(name):
    return Path(str(resources.files("horolab") / "data" / f"{name}.json"))


def load_presentation(ref, base_dir=None):
    """Load from a shipped name, a file path, or an already parsed dict."""
    if isinstance(ref, dict):
        return presentation_from_dict(ref)
    path = Path(ref)
    if not path.suffix and not path.exists():
        path = shipped_path(str(ref))
    elif base_dir is not None and not path.is_absolute() and not path.exists():
        path = Path(base_dir) / path
    if not path.exists():
        raise ConfigError(f"no presentation {ref!r}")
    return presentation_from_dict(_read_json(path))


DEFAULT_THRESHOLDS = {"c": 2.0, "kappa": 0.0, "M": 10.0, "K": 5, "eps": 0.5}


@dataclass
class ExperimentConfig:
    name: str
    kind: str
    presentation: object
    kernel: str | None
    radii: list
    thresholds: dict
    seed: int
    params: dict = field(default_factory=dict)
    out: str | None = None
    source: dict = field(default_factory=dict)

    @property
    def kernel_spec(self):
        if self.kernel is None:
            return None
        homs = self.presentation.homomorphisms or {}
        return homs[self.kernel]

    def echo(self):
        """Parameters as written to reports."""
        return {
            "name": self.name, "kind": self.kind, "presentation": self.presentation.name,
            "kernel": self.kernel, "radii": list(self.radii), "thresholds": dict(self.thresholds),
            "seed": self.seed, "params": dict(self.params),
        }

    def with_overrides(self, **kw):
        new = copy.copy(self)
        new.thresholds = dict(self.thresholds)
        new.params = dict(self.params)
        for k, v in kw.items():
            if v is None:
                continue
            if k in DEFAULT_THRESHOLDS:
                new.thresholds[k] = v
            elif k in ("seed", "out", "radii"):
                setattr(new, k, v)
            else:
                new.params[k] = v
        return new


def experiment_from_dict(obj, base_dir=None):
    _check_schema(obj, "horolab.experiment")
    kind = _need(obj, "kind", "experiment")
    if kind not in EXPERIMENT_KINDS:
        raise ConfigError(f"unknown experiment kind {kind!r}")
    pres = load_presentation(_need(obj, "presentation", "experiment"), base_dir)
    kernel = obj.get("kernel")
    if kernel is not None and kernel not in (pres.homomorphisms or {}):
        raise ConfigError(f"presentation has no homomorphism {kernel!r}")
    th = dict(DEFAULT_THRESHOLDS)
    th.update(obj.get("thresholds", {}))
    for k in ("c", "M", "K", "eps"):
        if not th[k] > 0:
            raise ConfigError(f"threshold {k} must be positive")
    if not 0 <= th["kappa"] <= 1:
        raise ConfigError("kappa must lie in [0, 1]")
    radii = [float(r) for r in obj.get("radii", [])]
    if any(r <= 0 for r in radii):
        raise ConfigError("radii must be positive")
    seed = obj.get("seed", 0)
    if not isinstance(seed, int):
        raise ConfigError("seed must be an integer")
    return ExperimentConfig(
        name=obj.get("name", kind), kind=kind, presentation=pres, kernel=kernel, radii=radii,
        thresholds=th, seed=seed, params=dict(obj.get("params", {})), out=obj.get("out"), source=obj,
    )


def load_experiment(ref):
    """Load an experiment file (path or shipped name such as ``"myr_in_horo"``)."""
    if isinstance(ref, dict):
        return experiment_from_dict(ref)
    path = Path(ref)
    if not path.exists():
        path = shipped_path(str(ref))
    if not path.exists():
        raise ConfigError(f"no experiment {ref!r}")
    return experiment_from_dict(_read_json(path), base_dir=path.parent)
