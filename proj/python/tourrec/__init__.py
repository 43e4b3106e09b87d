"""Python bindings for the tourrec recommender core."""

from ._core import (
    Engine,
    damped_mean,
    evaluate,
    ffm_predict_line,
    fixture_items,
    mixed_distance,
    repetition_willingness,
    run_simulation,
)

__all__ = [
    "Engine",
    "damped_mean",
    "evaluate",
    "ffm_predict_line",
    "fixture_items",
    "mixed_distance",
    "repetition_willingness",
    "run_simulation",
]
