"""Swept-angle synthetic-wavelength interferometry simulator and pipeline.

The package splits along the physical data flow: :mod:`swisim.core` derives
optical quantities and shift schedules, :mod:`swisim.forward` renders
interferometric frames, :mod:`swisim.retrieve` turns frame stacks back into
depth, :mod:`swisim.filters` smooths envelope images, :mod:`swisim.scenes`
builds synthetic targets, :mod:`swisim.evaluate` runs the measurement
protocols, :mod:`swisim.io` reads and writes the file formats, and
:mod:`swisim.cli` ties them into reproducible command-line runs.
"""

from .core import (DepthMap, OpticalConfig, ShiftSchedule, build_schedule,
                   derive_synthetic, wrap_depth)
from .evaluate import (AccuracyRow, CalibrationResult, TradeoffRow,
                       calibrate_synthetic_wavelength,
                       depth_tracking_experiment, emulate_scanning, medae,
                       rmse, scanning_equivalent_factor,
                       simulate_envelope_sweep, tradeoff_sweep)
from .filters import (FilterKind, FilterSpec, apply_filter, gaussian_filter,
                      joint_bilateral, joint_bilateral_upsample)
from .forward import (AcquisitionSettings, FrameStack, Mode,
                      PathContribution, SceneModel, acquire_stack,
                      coverage_metric, envelope_squared, lissajous_pattern,
                      path_correlation, render_frame)
from .retrieve import (EnvelopeStack, PhaseMap, depth_from_phase,
                       envelope_estimate, envelopes_from_stack,
                       interference_free, phase_retrieve, reconstruct)
from .scenes import (SCENE_KINDS, build_scene, flat_scene, scatter_scene,
                     specular_scene, stripe_scene)

__all__ = [
    "AccuracyRow", "AcquisitionSettings", "CalibrationResult", "DepthMap",
    "EnvelopeStack", "FilterKind", "FilterSpec", "FrameStack", "Mode",
    "OpticalConfig", "PathContribution", "PhaseMap", "SCENE_KINDS",
    "SceneModel", "ShiftSchedule", "TradeoffRow", "acquire_stack",
    "apply_filter", "build_scene", "build_schedule",
    "calibrate_synthetic_wavelength", "coverage_metric",
    "depth_from_phase", "depth_tracking_experiment", "derive_synthetic",
    "emulate_scanning", "envelope_estimate", "envelope_squared",
    "envelopes_from_stack", "flat_scene", "gaussian_filter",
    "interference_free", "joint_bilateral", "joint_bilateral_upsample",
    "lissajous_pattern", "medae", "path_correlation", "phase_retrieve",
    "reconstruct", "render_frame", "rmse", "scanning_equivalent_factor",
    "scatter_scene", "simulate_envelope_sweep", "specular_scene",
    "stripe_scene", "tradeoff_sweep", "wrap_depth",
]

__version__ = "0.1.0"
