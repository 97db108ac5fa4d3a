import pytest

from loradeploy import kernels
from loradeploy.model import NetworkConfig, build_rings

_NAMES = ("hyp2f1", "hyp2f1_array", "segment_log1p_sum", "timeline_collisions")


@pytest.fixture(params=["cython", "python"])
def backend(request, monkeypatch):
    """Run the test once per kernel implementation, swapping the dispatch table."""
    mods = kernels.available_backends()
    if request.param not in mods:
        pytest.skip(f"{request.param} backend not built")
    mod = mods[request.param]
    for name in _NAMES:
        monkeypatch.setattr(kernels, name, getattr(mod, name))
    return mod


@pytest.fixture(scope="session")
def cfg():
    return NetworkConfig()


@pytest.fixture(scope="session")
def rings(cfg):
    return build_rings(cfg)


ACCEPTANCE_LINES: dict = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])
