import numpy as np
import pytest

from conftest import unit_cap_points
from gsmp.config import METHODS, RunConfig, load_config
from gsmp.core import Gallery, Provenance
from gsmp.errors import ConfigError
from gsmp.generation import GenerationParams
from gsmp.pipeline import condense_with_method
from gsmp.pruning import PruningParams


def test_defaults():
    cfg = RunConfig()
    assert cfg.radius == 0.7
    assert cfg.bandwidth == 0.9
    assert cfg.pruning_ratio == 1.0
    assert cfg.margin is None
    assert cfg.target_fpirs == (0.01,)
    assert cfg.normalize_on_ingest
    assert cfg.method == "prun_gen"


def test_config_validation():
    with pytest.raises(ConfigError):
        RunConfig(method="fastest")
    with pytest.raises(ConfigError):
        RunConfig(radius=-1.0)
    with pytest.raises(ConfigError):
        RunConfig(margin=5.0)
    with pytest.raises(ConfigError):
        RunConfig(bandwidth=0.0)
    with pytest.raises(ConfigError):
        RunConfig(pruning_ratio=2.0)
    with pytest.raises(ConfigError):
        RunConfig(target_fpirs=())
    with pytest.raises(ConfigError):
        RunConfig(target_fpirs=(0.0,))
    with pytest.raises(ConfigError):
        RunConfig(seed=-3)


def test_load_config(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text(
        """
# pipeline overrides
radius = 0.5
margin = none
bandwidth = 0.8   # trailing comment
target_fpirs = 0.01, 0.1
normalize_on_ingest = off
method = gen
seed = 42
""",
        encoding="utf-8",
    )
    cfg = load_config(path)
    assert cfg.radius == 0.5
    assert cfg.margin is None
    assert cfg.bandwidth == 0.8
    assert cfg.target_fpirs == (0.01, 0.1)
    assert not cfg.normalize_on_ingest
    assert cfg.method == "gen"
    assert cfg.seed == 42
    # untouched keys keep the base values
    assert cfg.pruning_ratio == 1.0


def test_load_config_over_base(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("radius = 0.6\n", encoding="utf-8")
    base = RunConfig(bandwidth=1.1)
    cfg = load_config(path, base)
    assert cfg.radius == 0.6
    assert cfg.bandwidth == 1.1


def test_load_config_errors(tmp_path):
    bad_key = tmp_path / "a.cfg"
    bad_key.write_text("radius = 0.5\nvelocity = 3\n", encoding="utf-8")
    with pytest.raises(ConfigError) as excinfo:
        load_config(bad_key)
    assert ":2:" in str(excinfo.value)

    bad_value = tmp_path / "b.cfg"
    bad_value.write_text("radius = quick\n", encoding="utf-8")
    with pytest.raises(ConfigError):
        load_config(bad_value)

    no_equals = tmp_path / "c.cfg"
    no_equals.write_text("radius 0.5\n", encoding="utf-8")
    with pytest.raises(ConfigError):
        load_config(no_equals)

    bad_bool = tmp_path / "d.cfg"
    bad_bool.write_text("normalize_on_ingest = maybe\n", encoding="utf-8")
    with pytest.raises(ConfigError):
        load_config(bad_bool)


def make_gallery(rng):
    entries = {
        "a": np.concatenate(
            [unit_cap_points(rng, 9, 8, spread=0.05), [[-1.0] + [0.0] * 7]]
        ),
        "b": unit_cap_points(rng, 6, 8, spread=0.05),
    }
    return Gallery.from_vectors(entries, normalize=False)


def test_condense_with_method_provenance(rng):
    gallery = make_gallery(rng)
    pruning = PruningParams(bandwidth=0.6, pruning_ratio=1.0)
    generation = GenerationParams(radius=0.7)
    expected = {
        "raw": Provenance.RAW,
        "prun_raw": Provenance.PRUNED_RAW,
        "sgl": Provenance.SINGLE,
        "prun_sgl": Provenance.PRUNED_SINGLE,
        "gen": Provenance.GENERATED,
        "prun_gen": Provenance.PRUNED_GENERATED,
    }
    assert set(METHODS) == set(expected)
    for method in METHODS:
        condensed = condense_with_method(
            gallery, method, pruning=pruning, generation=generation
        )
        assert condensed.provenance is expected[method]

    raw = condense_with_method(gallery, "raw")
    assert np.array_equal(raw.entries["a"].samples, gallery.entries["a"])
    assert raw.avg_gallery_size == 8.0

    pruned_raw = condense_with_method(gallery, "prun_raw", pruning=pruning)
    assert pruned_raw.entries["a"].size == 9  # the antipodal point is gone

    sgl = condense_with_method(gallery, "sgl")
    assert all(s.size == 1 for s in sgl.entries.values())


def test_condense_with_method_missing_params(rng):
    gallery = make_gallery(rng)
    with pytest.raises(ConfigError):
        condense_with_method(gallery, "warp")
    with pytest.raises(ConfigError):
        condense_with_method(gallery, "prun_raw")
    with pytest.raises(ConfigError):
        condense_with_method(gallery, "gen")
    with pytest.raises(ConfigError):
        condense_with_method(
            gallery, "prun_gen", generation=GenerationParams(radius=0.7)
        )
