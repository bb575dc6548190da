"""Trajectory generation and stopping-time detection for both model
flavors: event-driven continuous-time lattice walks, and time-stepped
planar Brownian particles with bridge-corrected collision detection."""

from .reference import TrajectoryEvent, run_continuous_reference, run_lattice_reference
from .runner import BatchResult, StepControl, run_batch, run_continuous, run_lattice
from .scene import STOP_KINDS, RunRecord, Scene, StopSpec

__all__ = [
    "Scene",
    "StopSpec",
    "RunRecord",
    "STOP_KINDS",
    "BatchResult",
    "StepControl",
    "run_batch",
    "run_lattice",
    "run_continuous",
    "run_lattice_reference",
    "run_continuous_reference",
    "TrajectoryEvent",
]
