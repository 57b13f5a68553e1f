import os
from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", max_examples=40, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("thorough", max_examples=400, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

REPO = Path(__file__).resolve().parents[1]
DATA_DIR = Path(os.environ.get("ALRBENCH_DATA_DIR", REPO / "data"))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def tiny_csv(tmp_path):
    """A small dataset with one categorical column and one missing value."""
    csv_path = tmp_path / "tiny.csv"
    lines = ["a,b,colour,label"]
    gen = np.random.default_rng(7)
    colours = ["red", "green", "blue"]
    for i in range(60):
        a, b = (float(v) for v in gen.normal(size=2))
        lines.append(f"{a!r},{b!r},{colours[i % 3]},{2 * a - b + 0.1 * float(gen.normal())!r}")
    lines.append("1.0,?,red,3.0")
    csv_path.write_text("\n".join(lines) + "\n")
    manifest = tmp_path / "tiny.ini"
    manifest.write_text(
        "[dataset]\nname = Tiny\ncsv_path = tiny.csv\ntarget_column = label\n"
        "categorical_columns = colour\nexpected_samples = 60\nexpected_raw_features = 3\n"
    )
    return manifest


SYNTHETIC = {  # built-in file name -> (target column, raw feature count)
    "yacht.csv": ("residuary_resistance", 6),
    "airfoil.csv": ("scaled_sound_pressure", 5),
}


def make_data_dir(root: Path, files=("yacht.csv", "airfoil.csv"), n=60, seed=0):
    """Write synthetic CSVs under built-in dataset file names."""
    root.mkdir(parents=True, exist_ok=True)
    for k, name in enumerate(files):
        target, d = SYNTHETIC[name]
        gen = np.random.default_rng(seed + k)
        X = gen.normal(size=(n, d))
        y = X @ gen.normal(size=d) + 0.3 * gen.normal(size=n)
        header = [f"x{i}" for i in range(d)] + [target]
        rows = [",".join(repr(float(v)) for v in (*X[i], y[i])) for i in range(n)]
        (root / name).write_text(",".join(header) + "\n" + "\n".join(rows) + "\n")
    return root


@pytest.fixture
def data_dir(tmp_path):
    return make_data_dir(tmp_path / "data")


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def verdict():
    """Record one PASS/FAIL line for an acceptance criterion and assert it."""

    def _record(label: str, passed: bool, detail: str):
        line = f"[{'PASS' if passed else 'FAIL'}] {label}: {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        assert passed, line

    return _record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
