import json

import numpy as np
import pytest

from horolab import config as cf
from horolab import groups as gr


def test_shipped_presentations_load():
    names = cf.shipped_names()
    assert {"schottky2", "expl1", "thin3d", "cyclic", "punctured_torus"} <= set(names)
    for name in names:
        pres = cf.load_presentation(name)
        assert pres.name == name


def test_shipped_experiments_load():
    kinds = {cf.load_experiment(n).kind for n in cf.shipped_names("horolab.experiment")}
    assert kinds == set(cf.EXPERIMENT_KINDS)


def test_round_trip(schottky2):
    d = cf.presentation_to_dict(schottky2, schottky2.homomorphisms)
    again = cf.presentation_from_dict(json.loads(json.dumps(d)))
    for g, h in zip(schottky2.generators, again.generators):
        assert np.allclose(g.matrix, h.matrix, atol=1e-12)
    assert again.homomorphisms.keys() == schottky2.homomorphisms.keys()


def test_punctured_torus_is_asserted():
    pres = cf.load_presentation("punctured_torus")
    assert pres.asserted
    ball = gr.enumerate_orbit(pres, np.zeros(2), 5.0)
    assert not ball.complete


@pytest.mark.parametrize("mutate, match", [
    (lambda d: d.update(schema="other"), "schema"),
    (lambda d: d.update(version=99), "version"),
    (lambda d: d.pop("generators"), "generators"),
    (lambda d: d.update(dim=4), "dim"),
    (lambda d: d["homomorphisms"].update(bad={"kind": "projection", "keep": ["zz"]}), "zz"),
])
def test_presentation_errors(mutate, match):
    d = json.loads(cf.shipped_path("schottky2").read_text())
    mutate(d)
    with pytest.raises(cf.ConfigError, match=match):
        cf.presentation_from_dict(d)


def test_overlapping_caps_in_file_is_config_error():
    d = json.loads(cf.shipped_path("schottky2").read_text())
    d["generators"][0]["target"]["radius"] = 1.2
    with pytest.raises(Exception, match="overlap|hemisphere"):
        cf.presentation_from_dict(d)


@pytest.mark.parametrize("patch, match", [
    ({"kind": "nope"}, "kind"),
    ({"kernel": "missing"}, "homomorphism"),
    ({"thresholds": {"M": -1}}, "positive"),
    ({"thresholds": {"kappa": 2}}, "kappa"),
    ({"radii": [10, -1]}, "radii"),
    ({"seed": "x"}, "seed"),
])
def test_experiment_errors(patch, match):
    d = {"schema": "horolab.experiment", "version": 1, "kind": "measure-diff", "presentation": "schottky2"}
    d.update(patch)
    with pytest.raises(cf.ConfigError, match=match):
        cf.load_experiment(d)


def test_overrides_do_not_mutate():
    cfg = cf.load_experiment("myr_in_horo")
    new = cfg.with_overrides(seed=5, M=3.0, S=2)
    assert (cfg.seed, cfg.thresholds["M"], cfg.params["S"]) == (0, 8, 20)
    assert (new.seed, new.thresholds["M"], new.params["S"]) == (5, 3.0, 2)
