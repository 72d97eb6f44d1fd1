import sys
from pathlib import Path

import pytest

# test-local helpers (oracles.py) live next to the tests
sys.path.insert(0, str(Path(__file__).parent))

from nearopt import attributes, esm, mga  # noqa: E402

FIXTURES = Path(__file__).parent.parent / "src" / "nearopt" / "fixtures"


@pytest.fixture(scope="session")
def fixture_dir() -> Path:
    return FIXTURES


@pytest.fixture(scope="session")
def fixture_model():
    return esm.load_system(FIXTURES / "system.json")


@pytest.fixture(scope="session")
def fixture_catalog():
    return attributes.load_catalog(FIXTURES / "catalog.json")


@pytest.fixture(scope="session")
def fixture_mga_config():
    return mga.load_mga_config(FIXTURES / "mga-config.json")


@pytest.fixture(scope="session")
def fixture_base(fixture_model):
    """Cost-optimal solve of the shipped fixture, shared across modules."""
    return mga.prepare_base(fixture_model)


@pytest.fixture(scope="session")
def fixture_inputs():
    from nearopt import pipeline

    return pipeline.RunInputs.from_config(None)


@pytest.fixture(scope="session")
def pipeline_run(tmp_path_factory, fixture_inputs):
    """Full pipeline on the shipped fixture (690 MGA runs); reused widely.

    Returns (run_dir, manifest, elapsed_seconds).
    """
    import time

    from nearopt import pipeline

    out = tmp_path_factory.mktemp("run_a")
    t0 = time.time()
    manifest = pipeline.run_pipeline(fixture_inputs, out)
    return out, manifest, time.time() - t0


@pytest.fixture(scope="session")
def pipeline_rerun(tmp_path_factory, fixture_inputs):
    """Second, independent full run for byte-identity comparisons."""
    import time

    from nearopt import pipeline

    out = tmp_path_factory.mktemp("run_b")
    t0 = time.time()
    manifest = pipeline.run_pipeline(fixture_inputs, out)
    return out, manifest, time.time() - t0


@pytest.fixture(scope="session")
def api_client(pipeline_run):
    from fastapi.testclient import TestClient

    from nearopt.api import create_app

    out, _, _ = pipeline_run
    app = create_app(out)
    with TestClient(app) as client:
        yield client
