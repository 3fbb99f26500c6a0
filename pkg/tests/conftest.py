import sys
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

# Run from a source checkout without installation.
_src = Path(__file__).resolve().parent.parent / "src"
try:
    import planspace  # noqa: F401
except ImportError:
    sys.path.insert(0, str(_src))

settings.register_profile(
    "suite",
    derandomize=True,
    max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
    deadline=None,
)
settings.load_profile("suite")


@pytest.fixture
def workspace(tmp_path, monkeypatch):
    """Empty workspace directory with PLANSPACE_WORKSPACE pointing at it."""
    monkeypatch.setenv("PLANSPACE_WORKSPACE", str(tmp_path))
    return tmp_path
