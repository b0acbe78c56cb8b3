import numpy as np
import pytest

from conftest import coverage_excess, pairwise_max_distance, unit_cap_points
from gsmp.core import Gallery, Provenance
from gsmp.errors import CoverageError
from gsmp.generation import (
    GenerationParams,
    condense_gallery,
    generate_samples,
    move_toward_init,
)
from gsmp.pruning import PruningParams


def test_params_defaults_and_validation():
    p = GenerationParams(radius=0.5)
    assert p.margin == 0.05
    assert p.line_search_steps == 32
    assert GenerationParams(radius=1.0, margin=0.0).margin == 0.0
    with pytest.raises(ValueError):
        GenerationParams(radius=0.0)
    with pytest.raises(ValueError):
        GenerationParams(radius=1.0, margin=2.0)
    with pytest.raises(ValueError):
        GenerationParams(radius=1.0, line_search_steps=0)


def test_move_stays_put_when_already_at_target():
    v = np.array([1.0, 2.0])
    out = move_toward_init(v, v, [[1.2, 2.0]], radius=1.0)
    assert np.array_equal(out, v)
    assert out is not v


def test_move_reaches_target_when_target_covers():
    # the target itself covers the one covered point, so the slide goes
    # all the way
    out = move_toward_init([0.0, 0.0], [3.0, 0.0], [[3.0, 0.0]], radius=4.0)
    assert np.array_equal(out, [3.0, 0.0])


def test_move_line_example():
    out = move_toward_init([0.0], [10.0], [[-0.9]], radius=1.0)
    # feasibility needs position < 0.1, so the slide stops just short
    assert out.shape == (1,)
    assert out[0] < 0.1
    assert abs(out[0] - 0.1) < 1e-6


def test_move_rejects_uncovered_start():
    with pytest.raises(CoverageError):
        move_toward_init([0.0], [1.0], [[2.0]], radius=1.0)


def test_move_returns_start_when_no_movement_feasible():
    v_m = np.array([0.0])
    out = move_toward_init(v_m, [1.0], [[-1.0 + 1e-12]], radius=1.0)
    assert np.array_equal(out, v_m)


def test_move_feasible_prefix_property(rng):
    radius = 0.8
    for _ in range(50):
        d = int(rng.integers(2, 6))
        v_m = rng.normal(size=d)
        covered = v_m + 0.7 * radius * (
            2.0 * rng.random((int(rng.integers(1, 8)), d)) - 1.0
        ) / np.sqrt(d)
        v_i = v_m + rng.normal(size=d) * 3.0
        out = move_toward_init(v_m, v_i, covered, radius)
        if np.array_equal(out, v_i):
            continue  # the target itself was feasible
        # one more half-step past the returned point must break coverage
        beyond = out + (2.0**-31) * (v_i - v_m)
        dist = np.sqrt(np.square(covered - beyond).sum(axis=1))
        assert not bool((dist < radius).all())


def test_singleton_sample_is_the_point():
    s = generate_samples([[0.3, -0.7, 0.1]], GenerationParams(radius=0.5))
    assert s.size == 1
    assert s.source_count == 1
    assert np.array_equal(s.samples, [[0.3, -0.7, 0.1]])


def test_two_points_become_their_midpoint():
    s = generate_samples([[0.0, 0.0], [1.0, 0.0]], GenerationParams(radius=1.0))
    assert s.size == 1
    assert np.array_equal(s.samples, [[0.5, 0.0]])


def test_three_collinear_points_two_samples():
    # radius 1: the first sample slides from 0.75 up to just under 1.0
    # (feasibility limit for covering the point at 0), absorbing 0 and
    # 1.5; the second starts at 3 and slides back to just past 2.0
    pts = [[0.0], [1.5], [3.0]]
    s = generate_samples(pts, GenerationParams(radius=1.0, margin=0.1))
    assert s.size == 2
    first, second = float(s.samples[0, 0]), float(s.samples[1, 0])
    assert first < 1.0 and abs(first - 1.0) < 1e-6
    assert second > 2.0 and abs(second - 2.0) < 1e-6
    assert coverage_excess(np.asarray(pts), s.samples, 1.0) < 0.0


def test_two_groups_two_samples(rng):
    groups = np.concatenate(
        [
            0.1 * rng.standard_normal((5, 3)),
            np.array([4.0, 0, 0]) + 0.1 * rng.standard_normal((5, 3)),
        ]
    )
    s = generate_samples(groups, GenerationParams(radius=0.7))
    assert s.size == 2
    assert coverage_excess(groups, s.samples, 0.7) < 0.0


def test_every_point_covered(rng):
    for _ in range(20):
        n = int(rng.integers(2, 40))
        d = int(rng.integers(2, 10))
        pts = unit_cap_points(rng, n, d, spread=0.2)
        radius = float(rng.choice([0.4, 0.7, 1.1]))
        s = generate_samples(pts, GenerationParams(radius=radius))
        assert 1 <= s.size <= n
        assert s.source_count == n
        assert coverage_excess(pts, s.samples, radius) < 0.0


def test_single_sample_when_radius_dominates(rng):
    for _ in range(20):
        pts = rng.normal(size=(int(rng.integers(2, 25)), 4))
        diam = pairwise_max_distance(pts)
        radius = 2.0 * diam if diam > 0 else 1.0
        s = generate_samples(pts, GenerationParams(radius=radius))
        assert s.size == 1


def test_larger_radius_never_needs_more_samples(rng):
    for _ in range(10):
        pts = unit_cap_points(rng, 30, 8, spread=0.3)
        small = generate_samples(pts, GenerationParams(radius=0.5)).size
        large = generate_samples(pts, GenerationParams(radius=1.0)).size
        assert large <= small


def test_samples_are_not_renormalized():
    # two unit vectors merge to a midpoint strictly inside the sphere
    s = generate_samples([[1.0, 0.0], [0.0, 1.0]], GenerationParams(radius=1.2))
    assert s.size == 1
    norm = float(np.sqrt(np.square(s.samples[0]).sum()))
    assert norm < 0.999


def test_condense_gallery_provenance_and_counts(rng):
    entries = {
        "x": unit_cap_points(rng, 12, 6, spread=0.05),
        "y": unit_cap_points(rng, 7, 6, spread=0.05),
    }
    gallery = Gallery.from_vectors(entries, normalize=False)
    plain = condense_gallery(gallery, None, GenerationParams(radius=0.7))
    assert plain.provenance is Provenance.GENERATED
    assert set(plain.entries) == {"x", "y"}
    assert plain.entries["x"].source_count == 12

    pruned = condense_gallery(
        gallery,
        PruningParams(bandwidth=0.9, pruning_ratio=1.0),
        GenerationParams(radius=0.7),
    )
    assert pruned.provenance is Provenance.PRUNED_GENERATED
    # nothing was contaminated, so pruning kept every vector
    assert pruned.entries["y"].source_count == 7


def test_condense_gallery_with_outlier_reduces_source_count(rng):
    vectors = np.concatenate(
        [unit_cap_points(rng, 10, 6, spread=0.04), [[-1.0, 0, 0, 0, 0, 0]]]
    )
    gallery = Gallery.from_vectors({"x": vectors}, normalize=False)
    condensed = condense_gallery(
        gallery,
        PruningParams(bandwidth=0.5, pruning_ratio=1.0),
        GenerationParams(radius=0.7),
    )
    assert condensed.entries["x"].source_count == 10
