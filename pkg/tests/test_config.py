from src.conf.config import Settings


def test_defaults():
    config = Settings()
    assert config.luxemburg_rtol == 1e-12
    assert config.harmonic_tol == 1e-8
    assert config.artifact_version == "0.1.0"


def test_environment_override(monkeypatch):
    monkeypatch.setenv("ORLICZ_HARMONIC_TOL", "1e-6")
    monkeypatch.setenv("ORLICZ_DESCENT_MAX_ITER", "50")
    config = Settings()
    assert config.harmonic_tol == 1e-6
    assert config.descent_max_iter == 50
