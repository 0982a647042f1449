import json

import pytest

from specband import dynsys as ds
from specband import experiments as ex
from specband.errors import ConfigError

SMALL = dict(N=24, grid={"step": 0.1}, eps=(0.1,), eps_check=0.1)


def strip_time(path):
    doc = json.loads(open(path).read())
    doc.pop("timestamp")
    return json.dumps(doc, sort_keys=True)


@pytest.mark.parametrize("model_id", sorted(ex.MODEL_PARAMS))
def test_catalog_builds(model_id):
    m = ex.build_model(model_id)
    m.family.check_point(m.base)


def test_catalog_rejects_bad_params():
    with pytest.raises(ConfigError, match="must be irrational"):
        ex.build_model("sturmian", alpha=0.5)
    with pytest.raises(ConfigError, match="unknown parameter"):
        ex.build_model("shift", lam=1)
    with pytest.raises(ConfigError, match="unknown model"):
        ex.build_model("fibonacci")


def test_config_validation_lists_everything():
    with pytest.raises(ConfigError) as info:
        ex.ExperimentConfig(N=-1, tol_incl=0, q_list=())
    assert len(info.value.violations) == 3


def test_config_dict_roundtrip():
    cfg = ex.ExperimentConfig(model={"id": "sturmian", "alpha": {"cf": [0], "period": [2]}}, N=64, q_list=(1, 2))
    assert ex.ExperimentConfig.from_dict(cfg.to_dict()) == cfg


def test_hull_samples_distinct():
    m = ex.build_model("sturmian-golden")
    pts = [ex.hull_point(m, s) for s in ex.default_hull_samples(m)]
    assert len({ds.window(p, -64, 64) for p in pts}) == len(pts)


def test_constancy_degenerate_sampling():
    cfg = ex.ExperimentConfig(model="sturmian-golden", hull_samples=[{}, {"shift": 0}], **SMALL)
    with pytest.raises(ConfigError, match="same point"):
        ex.constancy_experiment(cfg)


def test_constancy_needs_minimal():
    with pytest.raises(ConfigError):
        ex.constancy_experiment(ex.ExperimentConfig(model="full-shift", **SMALL))


def test_constancy_constant_family_exact():
    r = ex.constancy_experiment(ex.ExperimentConfig(model="example-7-1", **SMALL))
    assert r.summary["max_pairwise_hausdorff"] == 0.0 and r.passed


def test_constancy_shift_model_identical():
    r = ex.constancy_experiment(ex.ExperimentConfig(model="shift", **SMALL))
    assert r.check("max_pairwise_hausdorff").measured == 0.0
    assert r.check("doubling_trend").passed


def test_constancy_sturmian_small():
    r = ex.constancy_experiment(ex.ExperimentConfig(model="sturmian-golden", N=64, grid={"step": 0.05}))
    assert r.check("max_pairwise_hausdorff").measured <= 0.1


def test_constancy_torus_small():
    cfg = ex.ExperimentConfig(model={"id": "almost-mathieu", "selfadjoint": False}, N=64, grid={"step": 0.05})
    r = ex.constancy_experiment(cfg)
    assert r.check("max_pairwise_hausdorff").measured <= 0.25


def test_inclusion_shift_model():
    r = ex.inclusion_experiment(ex.ExperimentConfig(model="shift", N=1024, q_list=(1,), doubling=False))
    assert r.passed and r.summary["max_sigma_min"] <= 0.05


def test_inclusion_needs_subshift():
    with pytest.raises(ConfigError):
        ex.inclusion_experiment(ex.ExperimentConfig(model="almost-mathieu"))


def test_approximant_words_are_fibonacci_prefixes():
    m = ex.build_model("sturmian-golden")
    words = ex.approximant_words(m, ex.ExperimentConfig())
    assert words == ["1", "10", "101", "10110", "10110101", "1011010110110"]


def test_pseudoergodic_negative_control():
    with pytest.raises(ConfigError, match="full-shift"):
        ex.pseudoergodic_experiment(ex.ExperimentConfig(model="periodic"))


def test_pseudoergodic_coverage_failure_lists_words():
    r = ex.pseudoergodic_experiment(ex.ExperimentConfig(model="full-shift", n_max=8, L=20, words=("01",),
                                                        N=64, doubling=False))
    c = r.check("coverage")
    assert not c.passed and c.measured > 0 and "8" in {str(k) for k in c.detail["missing"]}


def test_induced_examples():
    r1 = ex.induced_system_check(ex.ExperimentConfig(model="example-7-1", **SMALL))
    assert r1.passed and r1.check("pairwise_hausdorff").measured == 0.0
    r2 = ex.induced_system_check(ex.ExperimentConfig(model="example-7-2", **SMALL))
    assert r2.passed and r2.check("injective_windows").measured == 5
    assert r2.check("cross_component_witnesses").measured == 0
    with pytest.raises(ConfigError):
        ex.induced_system_check(ex.ExperimentConfig(model="shift"))


def test_self_similarity_survey():
    for model in ("sturmian-golden", "periodic", "almost-mathieu"):
        m = ex.build_model(model)
        assert all(ex.self_similarity_survey(m, ex.ExperimentConfig()).values())


def test_emit_empty_report(tmp_path):
    r = ex.ExperimentReport("empty", {})
    ex.emit_report(r, tmp_path / "r.json")
    doc = json.load(open(tmp_path / "r.json"))
    assert doc["checks"] == [] and doc["pass"] is True and "timestamp" in doc


def test_emit_deterministic(tmp_path):
    cfg = ex.ExperimentConfig(model="shift", **SMALL)
    for sub in ("a", "b"):
        (tmp_path / sub).mkdir()
        ex.emit_report(ex.constancy_experiment(cfg), tmp_path / sub / "c.json")
    assert strip_time(tmp_path / "a" / "c.json") == strip_time(tmp_path / "b" / "c.json")
    doc = json.load(open(tmp_path / "a" / "c.json"))
    assert isinstance(doc["summary"]["max_pairwise_hausdorff"], float)
    assert {c["name"] for c in doc["checks"]} == {"max_pairwise_hausdorff", "doubling_trend"}
    for name in doc["artifacts"]:
        a = open(tmp_path / "a" / name, "rb").read()
        assert a == open(tmp_path / "b" / name, "rb").read()


def test_duplicate_check_rejected():
    r = ex.ExperimentReport("x", {})
    r.add("a", True, 1)
    with pytest.raises(ValueError):
        r.add("a", True, 1)
