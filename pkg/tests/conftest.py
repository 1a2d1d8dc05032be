"""Shared fixtures: corpora are generated once per session and reused."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import pytest

from whaletracks import _kernels
from whaletracks.ingest import ingest_files
from whaletracks.routes import build_graph
from whaletracks.synth import SynthSpec, generate_progression_demo, generate_rows, write_corpus

BACKENDS = ("numpy",) + (("numba",) if _kernels.HAVE_NUMBA else ())


@pytest.fixture(params=BACKENDS)
def kernel_backend(request, monkeypatch):
    """Run the test once per kernel implementation."""
    monkeypatch.setattr(_kernels, "USE_NUMBA", request.param == "numba")
    return request.param


@pytest.fixture(scope="session")
def kernels_warm():
    """Trigger numba compilation outside any timed section."""
    if _kernels.USE_NUMBA:
        one = np.array([1.0])
        _kernels.haversine_km(one, one, one * 2, one * 2)
        _kernels.rasterize_edges(one * -50, one * 10, one * -51, one * 12, one * 100.0, 5.0)
        _kernels.diffuse(
            np.array([1.0, 0.0]),
            np.array([0, 1, 2]),
            np.array([1, 0]),
            np.array([1.0, 1.0]),
            0.5,
            1,
        )
    return True


@pytest.fixture(scope="session")
def demo_corpus(tmp_path_factory):
    path = tmp_path_factory.mktemp("demo") / "demo.csv"
    header, rows, meta = generate_progression_demo(seed=42)
    write_corpus(path, header, rows, meta)
    return path


@pytest.fixture(scope="session")
def demo_meta(demo_corpus):
    return json.loads(Path(str(demo_corpus) + ".meta.json").read_text())


@pytest.fixture(scope="session")
def demo_catalog(demo_corpus):
    catalog, _ = ingest_files([demo_corpus])
    return catalog


@pytest.fixture(scope="session")
def demo_graph(demo_catalog):
    return build_graph(demo_catalog)


@pytest.fixture(scope="session")
def small_catalog(tmp_path_factory):
    """~3k-record generic corpus with revisits; cheap enough for oracles."""
    spec = SynthSpec(seed=7, expeditions=80, catches_per_expedition=(20, 60))
    header, rows, _ = generate_rows(spec)
    path = tmp_path_factory.mktemp("small") / "small.csv"
    write_corpus(path, header, rows)
    catalog, report = ingest_files([path])
    assert report.rejected == 0
    return catalog


@pytest.fixture(scope="session")
def small_graph(small_catalog):
    return build_graph(small_catalog)
