"""Kinematic execution of task plans with calibrated velocity noise."""
from .episode import (
    DEFAULT_DWELL,
    METRICS_HEADER,
    EpisodeResult,
    ObjectOutcome,
    check_termination,
    is_success,
    run_episode,
    write_metrics,
)
from .figure_eight import figure_eight_reference, lemniscate_arc_length
from .noise import CALIBRATED_MAE, CALIBRATED_SD, NoiseModel, NoiseStream, apply_noise, sample_noise
from .tracker import DIVERGENCE_LIMIT, TrackerConfig, TrackingResult, kanayama_command, track_trajectory

__all__ = [
    "CALIBRATED_MAE",
    "CALIBRATED_SD",
    "DEFAULT_DWELL",
    "DIVERGENCE_LIMIT",
    "METRICS_HEADER",
    "EpisodeResult",
    "NoiseModel",
    "NoiseStream",
    "ObjectOutcome",
    "TrackerConfig",
    "TrackingResult",
    "apply_noise",
    "check_termination",
    "figure_eight_reference",
    "is_success",
    "kanayama_command",
    "lemniscate_arc_length",
    "run_episode",
    "sample_noise",
    "track_trajectory",
    "write_metrics",
]
