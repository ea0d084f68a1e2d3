"""Depth reconstruction from {M, N}-shift frame stacks.

Within each synthetic position, M carrier shifts step the optical fringe by
``2 pi / M``; the frame mean recovers the interference-free baseline and the
mean squared deviation recovers the squared envelope,

    b = (1/M) sum_m I_m,        |e|^2 = (1/2M) sum_m (I_m - b)^2,

both exact for sinusoids sampled over a full period regardless of their
phase.  Across the N synthetic positions the squared envelope is itself a
sampled sinusoid ``|e_n|^2 = (1 - cos(phi - 2 pi n / N)) / 2`` with
``phi = 2 k_s (d - l0)``, so a discrete Fourier bin retrieves phi and with
it depth within the unambiguous range.
"""

from dataclasses import dataclass, field

import numpy as np

from .core import DepthMap, OpticalConfig, ShiftSchedule
from .exceptions import DimensionMismatch, MissingGuide
from .filters import FilterKind, FilterSpec, apply_filter
from .forward import FrameStack

#: Valid-pixel threshold: fraction of the median envelope magnitude that the
#: retrieved modulation amplitude must exceed.
DEFAULT_TAU_SCALE = 1e-3


@dataclass(frozen=True)
class EnvelopeStack:
    """Per-synthetic-position envelope estimates.

    Attributes
    ----------
    envelopes : ndarray
        Shape (N, H, W) squared-envelope estimates, non-negative.
    interference_free : ndarray
        Shape (N, H, W) baseline estimates.
    schedule : ShiftSchedule
    """

    envelopes: np.ndarray = field(repr=False)
    interference_free: np.ndarray = field(repr=False)
    schedule: ShiftSchedule

    def __post_init__(self):
        env = np.asarray(self.envelopes, dtype=np.float64)
        base = np.asarray(self.interference_free, dtype=np.float64)
        if env.ndim != 3:
            raise DimensionMismatch(f"envelopes must be 3-D, got {env.shape}")
        if env.shape != base.shape:
            raise DimensionMismatch(
                f"envelopes {env.shape} != interference_free {base.shape}")
        if env.shape[0] != self.schedule.n_steps:
            raise DimensionMismatch(
                f"{env.shape[0]} envelope images != N = {self.schedule.n_steps}")
        if env.min() < 0:
            raise ValueError("envelope estimates must be non-negative")
        object.__setattr__(self, "envelopes", env)
        object.__setattr__(self, "interference_free", base)


@dataclass(frozen=True)
class PhaseMap:
    """Synthetic phase per pixel in [0, 2 pi) with a validity mask."""

    phase: np.ndarray
    mask: np.ndarray

    def __post_init__(self):
        phase = np.asarray(self.phase, dtype=np.float64)
        mask = np.asarray(self.mask, dtype=bool)
        if phase.shape != mask.shape:
            raise DimensionMismatch(
                f"phase shape {phase.shape} != mask shape {mask.shape}")
        valid = phase[mask]
        if valid.size and (valid.min() < 0 or valid.max() >= 2 * np.pi):
            raise ValueError("phases must lie in [0, 2 pi)")
        object.__setattr__(self, "phase", phase)
        object.__setattr__(self, "mask", mask)


def interference_free(frames_m: np.ndarray) -> np.ndarray:
    """Baseline estimate: mean over the M carrier-shifted frames.

    Parameters
    ----------
    frames_m : ndarray
        Shape (M, H, W) with M >= 3.
    """
    frames_m = np.asarray(frames_m, dtype=np.float64)
    if frames_m.ndim != 3:
        raise DimensionMismatch(f"frames must be (M, H, W), got {frames_m.shape}")
    if frames_m.shape[0] < 3:
        raise DimensionMismatch(f"need M >= 3 frames, got {frames_m.shape[0]}")
    return frames_m.mean(axis=0)


def envelope_estimate(frames_m: np.ndarray, baseline: np.ndarray) -> np.ndarray:
    """Squared-envelope estimate ``(1/2M) sum_m (I_m - b)^2``.

    Exact for a pure carrier sinusoid sampled at M equal steps over one
    period, for any carrier phase.
    """
    frames_m = np.asarray(frames_m, dtype=np.float64)
    baseline = np.asarray(baseline, dtype=np.float64)
    if frames_m.ndim != 3 or frames_m.shape[1:] != baseline.shape:
        raise DimensionMismatch(
            f"frames {frames_m.shape} incompatible with baseline {baseline.shape}")
    m = frames_m.shape[0]
    if m < 3:
        raise DimensionMismatch(f"need M >= 3 frames, got {m}")
    dev = frames_m - baseline[None]
    return np.einsum("mij,mij->ij", dev, dev) / (2 * m)


def phase_retrieve(env: EnvelopeStack, tau_scale: float = DEFAULT_TAU_SCALE) -> PhaseMap:
    """Retrieve the synthetic phase from N envelope images.

    The squared envelopes sample ``(1 - cos(phi - 2 pi n / N)) / 2``, so the
    first Fourier bin gives ``sum_n E_n exp(i 2 pi n / N) = -(N/4) e^{i phi}``
    plus a phase-free offset; negating both quadratures recovers phi.

    Pixels whose modulation amplitude falls below ``tau_scale`` times the
    median envelope magnitude are masked invalid (constant envelopes carry
    no phase).
    """
    e = env.envelopes
    n_steps = env.schedule.n_steps
    angles = 2 * np.pi * np.arange(n_steps) / n_steps
    s = np.tensordot(np.sin(angles), e, axes=(0, 0))
    c = np.tensordot(np.cos(angles), e, axes=(0, 0))
    amplitude = np.hypot(s, c)
    tau = tau_scale * np.median(e)
    mask = amplitude > tau
    phase = np.mod(np.arctan2(-s, -c), 2 * np.pi)
    # fold the rounding edge at exactly 2 pi back to 0
    phase = np.where(phase >= 2 * np.pi, 0.0, phase)
    phase = np.where(mask, phase, 0.0)
    return PhaseMap(phase=phase, mask=mask)


def depth_from_phase(phase_map: PhaseMap, schedule: ShiftSchedule,
                     config: OpticalConfig) -> DepthMap:
    """Convert synthetic phase to depth: ``d = l0 + phi / (2 k_s)``.

    Valid depths land in ``[l0, l0 + lambda_s / 2)``.
    """
    depth = schedule.l0 + phase_map.phase / (2 * config.k_s)
    # phases a few ulp under 2 pi can round up to exactly l0 + half the range
    depth = np.where(depth >= schedule.l0 + config.unambiguous_range,
                     schedule.l0, depth)
    return DepthMap(depth=depth, mask=phase_map.mask.copy())


def envelopes_from_stack(stack: FrameStack) -> EnvelopeStack:
    """Baseline and squared-envelope estimates for every synthetic position."""
    frames = stack.frames
    base = frames.mean(axis=1)
    dev = frames - base[:, None]
    m = frames.shape[1]
    env = np.einsum("nmij,nmij->nij", dev, dev) / (2 * m)
    return EnvelopeStack(envelopes=env, interference_free=base,
                         schedule=stack.schedule)


def reconstruct(stack: FrameStack, filter_spec: FilterSpec = None,
                guide: np.ndarray = None,
                tau_scale: float = DEFAULT_TAU_SCALE) -> DepthMap:
    """Full pipeline: envelopes, optional filtering, phase, depth.

    Parameters
    ----------
    stack : FrameStack
    filter_spec : FilterSpec, optional
        Applied to each squared-envelope image before phase retrieval.
    guide : ndarray, optional
        Photometric guide, required for joint bilateral filtering.

    Raises
    ------
    MissingGuide
        If the spec selects joint bilateral filtering and no guide is given.
    DimensionMismatch
        If the guide does not match the frame geometry.
    """
    env = envelopes_from_stack(stack)
    if filter_spec is not None and filter_spec.kind is not FilterKind.NONE:
        if filter_spec.kind is FilterKind.JOINT_BILATERAL and guide is None:
            raise MissingGuide("joint bilateral filtering needs a guide image")
        if guide is not None and np.shape(guide) != stack.image_shape:
            raise DimensionMismatch(
                f"guide shape {np.shape(guide)} != frames {stack.image_shape}")
        filtered = np.stack([apply_filter(img, filter_spec, guide=guide)
                             for img in env.envelopes])
        env = EnvelopeStack(envelopes=filtered,
                            interference_free=env.interference_free,
                            schedule=stack.schedule)
    phase = phase_retrieve(env, tau_scale=tau_scale)
    return depth_from_phase(phase, stack.schedule, stack.config)
