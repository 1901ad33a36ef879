import numpy as np
import pytest

from relaxation_cli.relax.models import build_model
from relaxation_cli.relax.session import RunSession


@pytest.fixture(autouse=True)
def isolated_env(tmp_path, monkeypatch):
    """Every test runs in its own directory with no ambient RELAX_* settings."""
    monkeypatch.chdir(tmp_path)
    # the cli writes RELAX_CONFIG_FILE itself; setenv restores it afterwards
    monkeypatch.setenv("RELAX_CONFIG_FILE", str(tmp_path / ".relax.yml"))
    for name in ("RELAX_SEED", "RELAX_WORKERS", "RELAX_OUT_DIR", "RELAX_DEBUG"):
        monkeypatch.delenv(name, raising=False)
    monkeypatch.setenv("SOURCE_DATE_EPOCH", "1700000000")
    yield
    RunSession.end_session()


@pytest.fixture()
def rng():
    return np.random.default_rng(2024)


@pytest.fixture()
def broadwell():
    return build_model("broadwell")


@pytest.fixture()
def euler_damping():
    return build_model("euler_damping")


@pytest.fixture()
def nonlinear_optics():
    return build_model("nonlinear_optics")


@pytest.fixture()
def vibrational_gas():
    return build_model("vibrational_gas")


@pytest.fixture()
def viscoelastic():
    return build_model("viscoelastic")


@pytest.fixture()
def radiation_hydro():
    return build_model("radiation_hydro")


@pytest.fixture()
def reactive_euler():
    return build_model("reactive_euler")


@pytest.fixture()
def crossing_rank():
    return build_model("crossing_rank")
