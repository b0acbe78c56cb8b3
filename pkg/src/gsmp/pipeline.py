"""The six condensation methods, by name.

raw keeps enrollments as-is; sgl collapses each identity to its
normalized mean; gen replaces each identity with covering samples. Each
has a prun_-prefixed variant that mean-shift-prunes outliers first.
"""

from __future__ import annotations

from .core import CondensedGallery, Gallery, Provenance
from .errors import ConfigError
from .generation import GenerationParams, condense_gallery
from .identification import single_gallery
from .pruning import PruningParams, prune_gallery

METHOD_PROVENANCE = {
    "raw": Provenance.RAW,
    "prun_raw": Provenance.PRUNED_RAW,
    "sgl": Provenance.SINGLE,
    "prun_sgl": Provenance.PRUNED_SINGLE,
    "gen": Provenance.GENERATED,
    "prun_gen": Provenance.PRUNED_GENERATED,
}


def condense_with_method(
    gallery: Gallery,
    method: str,
    pruning: PruningParams | None = None,
    generation: GenerationParams | None = None,
) -> CondensedGallery:
    """Build the condensed gallery for one named method.

    prun_* methods need ``pruning``; gen methods need ``generation``.
    """
    if method not in METHOD_PROVENANCE:
        raise ConfigError(
            f"unknown method {method!r}; expected one of "
            f"{', '.join(sorted(METHOD_PROVENANCE))}"
        )
    pruned = method.startswith("prun_")
    if pruned and pruning is None:
        raise ConfigError(f"method {method!r} needs pruning parameters")
    if method.endswith("gen") and generation is None:
        raise ConfigError(f"method {method!r} needs generation parameters")

    provenance = METHOD_PROVENANCE[method]
    if method.endswith("gen"):
        return condense_gallery(gallery, pruning if pruned else None, generation)
    working = prune_gallery(gallery, pruning)[0] if pruned else gallery
    if method in ("raw", "prun_raw"):
        return CondensedGallery.from_gallery(working, provenance)
    return single_gallery(working, provenance)
