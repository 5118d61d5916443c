import pytest

from dyncorr import config
from dyncorr.config import PROFILES, Tolerances, parse_overrides


def test_defaults_are_positive():
    assert Tolerances().eig_max_sweeps == 100


@pytest.mark.parametrize("name", ["hermitian", "psd", "trace_drift", "eig_max_sweeps"])
def test_non_positive_rejected(name):
    with pytest.raises(ValueError, match=name):
        Tolerances(**{name: -1})


def test_strict_profile_is_tighter():
    d, s = PROFILES["default"], PROFILES["strict"]
    assert s.evolve_rel < d.evolve_rel
    assert s.maximal < d.maximal


def test_profile_from_env(monkeypatch):
    monkeypatch.setenv(config.PROFILE_ENV, "strict")
    assert config.profile_from_env() is PROFILES["strict"]
    monkeypatch.setenv(config.PROFILE_ENV, "nonsense")
    with pytest.raises(ValueError):
        config.profile_from_env()


def test_context_manager_restores():
    before = config.get_tolerances()
    with config.tolerances(before.replace(psd=1e-3)) as tol:
        assert config.get_tolerances().psd == 1e-3
        assert tol.psd == 1e-3
    assert config.get_tolerances() == before


def test_parse_overrides_types():
    out = parse_overrides(["psd=1e-6", "eig_max_sweeps=7"])
    assert out == {"psd": 1e-6, "eig_max_sweeps": 7}
    assert isinstance(out["eig_max_sweeps"], int)
    for bad in ("psd", "nope=1", "psd=abc"):
        with pytest.raises(ValueError):
            parse_overrides([bad])
