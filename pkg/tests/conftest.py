"""Shared test helpers.

The terminal-summary hook prints one PASS/FAIL line per acceptance
criterion after the run, so the gate is readable without scrolling
through the full pytest output.
"""

from __future__ import annotations

import numpy as np
import pytest


def pairwise_max_distance(points: np.ndarray) -> float:
    diff = points[:, None, :] - points[None, :, :]
    return float(np.sqrt(np.square(diff).sum(axis=2)).max())


def coverage_excess(points: np.ndarray, samples: np.ndarray, radius: float) -> float:
    """Largest amount by which any point escapes all sample balls."""
    diff = points[:, None, :] - samples[None, :, :]
    nearest = np.sqrt(np.square(diff).sum(axis=2)).min(axis=1)
    return float((nearest - radius).max())


def unit_cap_points(
    rng: np.random.Generator, count: int, dim: int, spread: float
) -> np.ndarray:
    """Unit vectors clustered around one random unit center."""
    center = rng.standard_normal(dim)
    center = center / np.sqrt(np.square(center).sum())
    pts = center + spread * rng.standard_normal((count, dim))
    return pts / np.sqrt(np.square(pts).sum(axis=1))[:, None]


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240811)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    seen: dict[str, str] = {}
    for outcome, status in (("failed", "FAIL"), ("error", "FAIL"), ("passed", "PASS")):
        for report in terminalreporter.stats.get(outcome, []):
            nodeid = getattr(report, "nodeid", "")
            if "test_acceptance.py::test_criterion_" not in nodeid:
                continue
            name = nodeid.split("::")[-1].split("[")[0]
            if name not in seen or status == "FAIL":
                seen[name] = status
    if seen:
        terminalreporter.section("acceptance criteria")
        for name in sorted(seen, key=lambda n: int(n.split("_")[2])):
            label = " ".join(name.split("_")[1:])
            terminalreporter.write_line(f"{label}: {seen[name]}")
