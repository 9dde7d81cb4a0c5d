"""Exceptional points of planar random walks: detectors, exponents, experiments."""

from ._core import (
    PioneerError,
    closed_form_exponent,
    estimate_crossing_prob,
    estimate_exponent,
    good_boxes,
    has_macroscopic_ptp,
    run_experiment,
    sample_loop_soup,
    sample_walk,
)

__all__ = [
    "PioneerError",
    "closed_form_exponent",
    "estimate_crossing_prob",
    "estimate_exponent",
    "good_boxes",
    "has_macroscopic_ptp",
    "run_experiment",
    "sample_loop_soup",
    "sample_walk",
]
