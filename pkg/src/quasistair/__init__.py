"""Quasi-staircase rank-one subshifts.

Modules: ``recipe`` (parameters and scales), ``synthesis`` (target-driven parameters),
``symbolic`` (words, languages, frequencies), ``complexity`` (word complexity and level
counts), ``tower`` (exact level-set dynamics), ``rigidity`` (periods, Rauzy graphs,
return ratios) and ``cli``.
"""

from .recipe import (
    PRESETS,
    QuasiStaircaseRecipe,
    RankOneRecipe,
    RecipeError,
    chacon,
    d1,
    derive_scales,
    staircase,
    validate_recipe,
)
from .symbolic import build_symbolic, enumerate_language, expand

__version__ = "0.1.0"

__all__ = [
    "PRESETS",
    "QuasiStaircaseRecipe",
    "RankOneRecipe",
    "RecipeError",
    "build_symbolic",
    "chacon",
    "d1",
    "derive_scales",
    "enumerate_language",
    "expand",
    "staircase",
    "validate_recipe",
]
