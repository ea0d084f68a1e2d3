"""Forward image formation for full-field two-wavelength interferometry.

A frame is ``I = b + 2 Re{c}`` per pixel: an interference-free baseline plus
the real part of the summed two-wavelength path correlations.  Each scene
path contributes a carrier sinusoid at the optical frequency modulated by a
synthetic-wavelength envelope,

    I = b + sum_p 2 sqrt(w_p a) sin(2 k (d_p - l)) sin(k_s (d_p - l_env)),

optionally rotated by a per-path speckle phasor when the surface is rough.
Swept-angle acquisition emulates within-exposure angular scanning of the
source: indirect path weights are attenuated and speckle phasors are averaged
over independent draws, which lowers fringe contrast the way an effectively
extended source does.  Full-field coherent acquisition keeps a single draw
and the full indirect mixture.
"""

import enum
from dataclasses import dataclass, field

import numpy as np

from .core import DepthMap, OpticalConfig, ShiftSchedule
from .exceptions import DimensionMismatch, EmptyPattern

REFERENCE_INTENSITY = 1.0
DIRECT_WEIGHT = 1.0


class Mode(enum.Enum):
    """Illumination mode for one acquisition."""

    SWEPT_ANGLE = "swept"
    FULL_FIELD_COHERENT = "coherent"


@dataclass(frozen=True)
class PathContribution:
    """One optical path from source to sensor pixel.

    Attributes
    ----------
    extra_length : float or ndarray
        One-way excess path length over the direct path, in um.  Scalar or
        per-pixel (H, W).
    weight : float or ndarray
        Relative field power of the path, >= 0.  Scalar or per-pixel (H, W).
    """

    extra_length: object
    weight: object

    def __post_init__(self):
        if np.any(np.asarray(self.weight) < 0):
            raise ValueError("path weight must be >= 0")


@dataclass(frozen=True)
class SceneModel:
    """Scene geometry and reflectance for the simulator.

    Attributes
    ----------
    depth : DepthMap
        Direct-path one-way depth per pixel, um.
    albedo : ndarray
        Per-pixel reflectance in [0, 1], shape (H, W).
    indirect : tuple of PathContribution
        Indirect mixture added to the direct return (may be empty).
    rough : bool
        Rough surfaces draw random speckle phasors per path; specular
        surfaces keep a deterministic phase.
    guide : ndarray or None
        Photometric guide image aligned with the depth map, shape (H, W).
    """

    depth: DepthMap
    albedo: np.ndarray
    indirect: tuple = ()
    rough: bool = False
    guide: np.ndarray = None

    def __post_init__(self):
        albedo = np.asarray(self.albedo, dtype=np.float64)
        if albedo.shape != self.depth.shape:
            raise DimensionMismatch(
                f"albedo shape {albedo.shape} != depth shape {self.depth.shape}"
            )
        if albedo.min() < 0 or albedo.max() > 1:
            raise ValueError("albedo must lie in [0, 1]")
        object.__setattr__(self, "albedo", albedo)
        object.__setattr__(self, "indirect", tuple(self.indirect))
        if self.guide is not None:
            guide = np.asarray(self.guide, dtype=np.float64)
            if guide.shape != self.depth.shape:
                raise DimensionMismatch(
                    f"guide shape {guide.shape} != depth shape {self.depth.shape}"
                )
            object.__setattr__(self, "guide", guide)
        for path in self.indirect:
            for attr in (path.extra_length, path.weight):
                arr = np.asarray(attr)
                if arr.ndim not in (0, 2):
                    raise DimensionMismatch("path attributes must be scalar or (H, W)")
                if arr.ndim == 2 and arr.shape != self.depth.shape:
                    raise DimensionMismatch(
                        f"path attribute shape {arr.shape} != {self.depth.shape}"
                    )


@dataclass(frozen=True)
class AcquisitionSettings:
    """Knobs of one acquisition run.

    Attributes
    ----------
    mode : Mode
    indirect_rejection : float
        Fraction of indirect path weight surviving under swept-angle
        illumination; 0 is ideal direct-only probing.  Ignored in
        full-field coherent mode.
    sbr : float
        Signal-to-background ratio; ambient light adds the direct baseline
        divided by this (use inf for no ambient).
    noise_sigma : float
        Standard deviation of additive Gaussian sensor noise.
    seed : int
        RNG seed; fixes speckle and noise bit-exactly.
    speckle_realizations : int
        Independent speckle draws averaged under swept-angle illumination.
    exact_carrier : bool
        Use the exact carrier wavenumber k (2 + epsilon) instead of the
        approximate 2 k; breaks the exactness of the phase-shift estimators
        by O(epsilon) and exists for error-bounding studies.
    """

    mode: Mode = Mode.SWEPT_ANGLE
    indirect_rejection: float = 0.0
    sbr: float = np.inf
    noise_sigma: float = 0.0
    seed: int = 0
    speckle_realizations: int = 1
    exact_carrier: bool = False

    def __post_init__(self):
        if not 0.0 <= self.indirect_rejection <= 1.0:
            raise ValueError("indirect_rejection must lie in [0, 1]")
        if not (self.sbr >= 0):
            raise ValueError("sbr must be >= 0 (or inf)")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be >= 0")
        if self.speckle_realizations < 1:
            raise ValueError("speckle_realizations must be >= 1")


@dataclass(frozen=True)
class FrameStack:
    """All frames of one {M, N} acquisition.

    Attributes
    ----------
    frames : ndarray
        Shape (N, M, H, W); frames[n, m] was captured at
        ``schedule.positions[n, m]``.  Non-negative.
    schedule : ShiftSchedule
    config : OpticalConfig
    """

    frames: np.ndarray = field(repr=False)
    schedule: ShiftSchedule
    config: OpticalConfig

    def __post_init__(self):
        frames = np.asarray(self.frames, dtype=np.float64)
        if frames.ndim != 4:
            raise DimensionMismatch(f"frames must be 4-D, got shape {frames.shape}")
        n, m = self.schedule.n_steps, self.schedule.m_steps
        if frames.shape[:2] != (n, m):
            raise DimensionMismatch(
                f"frames shape {frames.shape[:2]} != schedule grid ({n}, {m})"
            )
        if frames.min() < 0:
            raise ValueError("frames must be non-negative")
        object.__setattr__(self, "frames", frames)

    @property
    def image_shape(self) -> tuple:
        return self.frames.shape[2:]


def path_correlation(d, l, config: OpticalConfig):
    """Two-wavelength correlation ``exp(-2ik(d-l)) (1 + exp(-2i k_s (d-l)))``.

    Parameters
    ----------
    d : float or ndarray
        One-way path length, um.
    l : float or ndarray
        Reference mirror position, um.
    config : OpticalConfig

    Returns
    -------
    complex or ndarray
        The correlation; its magnitude is ``2 |cos(k_s (d - l))|``, so it
        peaks at ``d = l`` and vanishes a quarter synthetic wavelength away.
    """
    delta = np.asarray(d, dtype=np.float64) - l
    out = np.exp(-2j * config.k * delta) * (1.0 + np.exp(-2j * config.k_s * delta))
    return complex(out) if np.ndim(out) == 0 else out


def envelope_squared(d, l, config: OpticalConfig):
    """Squared synthetic envelope ``sin^2(k_s (d - l))`` of the fringe term."""
    delta = np.asarray(d, dtype=np.float64) - l
    out = np.sin(config.k_s * delta) ** 2
    return float(out) if np.ndim(out) == 0 else out


def _path_depths_and_weights(scene: SceneModel, settings: AcquisitionSettings):
    """Per-path one-way lengths and effective power weights, direct first."""
    shape = scene.depth.shape
    base = np.where(scene.depth.mask, scene.depth.depth, 0.0)
    reject = (settings.indirect_rejection
              if settings.mode is Mode.SWEPT_ANGLE else 1.0)
    depths = [base]
    weights = [np.full(shape, DIRECT_WEIGHT)]
    for path in scene.indirect:
        depths.append(base + np.broadcast_to(np.asarray(path.extra_length, dtype=np.float64), shape))
        weights.append(reject * np.broadcast_to(np.asarray(path.weight, dtype=np.float64), shape))
    return depths, weights


def _speckle_means(scene: SceneModel, settings: AcquisitionSettings,
                   rng: np.random.Generator):
    """Mean speckle phasor per path, shape (P, H, W) complex.

    Rough surfaces draw one uniform-phase unit phasor per (pixel, path,
    realization).  Swept-angle acquisition averages the draws, emulating the
    incoherent angular integral; coherent acquisition keeps a single draw.
    """
    n_paths = 1 + len(scene.indirect)
    shape = scene.depth.shape
    if not scene.rough:
        return np.ones((n_paths,) + shape, dtype=np.complex128)
    draws = (settings.speckle_realizations
             if settings.mode is Mode.SWEPT_ANGLE else 1)
    means = np.empty((n_paths,) + shape, dtype=np.complex128)
    for p in range(n_paths):
        acc = np.zeros(shape, dtype=np.complex128)
        for _ in range(draws):
            acc += np.exp(1j * rng.uniform(0.0, 2 * np.pi, size=shape))
        means[p] = acc / draws
    return means


def _interference(scene, settings, config, l, envelope_l, speckle):
    """Summed fringe term ``2 Re{c_total}`` at mirror position l."""
    depths, weights = _path_depths_and_weights(scene, settings)
    k_carrier = config.k * (2.0 + config.epsilon) if settings.exact_carrier else 2.0 * config.k
    total = np.zeros(scene.depth.shape)
    for p, (d_p, w_p) in enumerate(zip(depths, weights)):
        amp = np.sqrt(w_p * scene.albedo) * speckle[p]
        env = np.sin(config.k_s * (d_p - envelope_l))
        carrier = k_carrier * (d_p - l)
        # 2 Re{amp * (-i) e^{i carrier}} * env
        total += 2.0 * env * (amp.real * np.sin(carrier) + amp.imag * np.cos(carrier))
    return np.where(scene.depth.mask, total, 0.0)


def _baseline(scene: SceneModel) -> np.ndarray:
    """Interference-free intensity: scene-arm power plus the reference arm.

    Indirect light still reaches the sensor in swept-angle mode even when its
    correlation is rejected, so rejection does not discount the baseline.
    """
    scene_power = scene.albedo * DIRECT_WEIGHT
    for path in scene.indirect:
        scene_power = scene_power + scene.albedo * np.broadcast_to(
            np.asarray(path.weight, dtype=np.float64), scene.depth.shape)
    return scene_power + REFERENCE_INTENSITY


def render_frame(scene: SceneModel, l: float, settings: AcquisitionSettings,
                 config: OpticalConfig, envelope_l: float = None,
                 rng: np.random.Generator = None,
                 speckle: np.ndarray = None) -> np.ndarray:
    """Render one sensor frame at mirror position ``l``.

    Parameters
    ----------
    scene : SceneModel
    l : float
        Mirror position of the carrier term, um.
    settings : AcquisitionSettings
    config : OpticalConfig
    envelope_l : float, optional
        Mirror position seen by the synthetic envelope.  Defaults to ``l``;
        acquisitions pin it to the synthetic position ``l_n`` so that carrier
        micro-shifts leave the envelope untouched.
    rng, speckle : optional
        Internal hooks used by :func:`acquire_stack` to share one RNG stream
        and one set of speckle phasors across all frames of a stack.

    Returns
    -------
    ndarray
        Frame of shape (H, W), clamped to be non-negative.
    """
    if envelope_l is None:
        envelope_l = l
    if rng is None:
        rng = np.random.default_rng(settings.seed)
    if speckle is None:
        speckle = _speckle_means(scene, settings, rng)
    frame = _baseline(scene) + _interference(scene, settings, config, l,
                                             envelope_l, speckle)
    if np.isfinite(settings.sbr):
        with np.errstate(divide="ignore"):
            frame = frame + scene.albedo * DIRECT_WEIGHT / settings.sbr
    if settings.noise_sigma > 0:
        frame = frame + rng.normal(0.0, settings.noise_sigma, size=frame.shape)
    return np.maximum(frame, 0.0)


def acquire_stack(scene: SceneModel, schedule: ShiftSchedule,
                  settings: AcquisitionSettings,
                  config: OpticalConfig) -> FrameStack:
    """Capture the full (N, M) grid of frames for one acquisition.

    Speckle phasors are drawn once and held fixed across all frames: the
    mirror moves between exposures, the scene does not.  The envelope of
    frame (n, m) sits at the synthetic position ``l_n``; only the carrier
    advances with m.
    """
    rng = np.random.default_rng(settings.seed)
    speckle = _speckle_means(scene, settings, rng)
    shape = scene.depth.shape
    frames = np.empty((schedule.n_steps, schedule.m_steps) + shape)
    for n in range(schedule.n_steps):
        l_n = schedule.positions[n, 0]
        for m in range(schedule.m_steps):
            frames[n, m] = render_frame(
                scene, schedule.positions[n, m], settings, config,
                envelope_l=l_n, rng=rng, speckle=speckle)
    return FrameStack(frames=frames, schedule=schedule, config=config)


def lissajous_pattern(fx: float, fy: float, phase: float, duration: float,
                      samples: int) -> np.ndarray:
    """Sample the Lissajous scan path of the illumination source.

    Points are ``(sin(2 pi fx t + phase), sin(2 pi fy t))`` for ``samples``
    times t spaced uniformly over ``[0, duration]``.  Slightly detuned kHz
    frequencies trace a dense curve that fills the unit square.

    Returns
    -------
    ndarray
        Shape (samples, 2) scan positions in [-1, 1]^2.
    """
    if fx <= 0 or fy <= 0:
        raise ValueError("frequencies must be positive")
    if duration <= 0:
        raise ValueError("duration must be positive")
    if samples < 2:
        raise ValueError("need at least 2 samples")
    t = np.linspace(0.0, duration, samples)
    return np.column_stack((np.sin(2 * np.pi * fx * t + phase),
                            np.sin(2 * np.pi * fy * t)))


def coverage_metric(points: np.ndarray, grid_resolution: int) -> float:
    """Fraction of grid cells over [-1, 1]^2 visited by a scan pattern.

    Parameters
    ----------
    points : ndarray
        Shape (S, 2) scan positions; points outside the square count nothing.
    grid_resolution : int
        Cells per side of the coverage grid.

    Raises
    ------
    EmptyPattern
        If the pattern has no points.
    """
    points = np.asarray(points, dtype=np.float64)
    if points.size == 0:
        raise EmptyPattern("scan pattern has no points")
    if points.ndim != 2 or points.shape[1] != 2:
        raise DimensionMismatch(f"points must be (S, 2), got {points.shape}")
    if grid_resolution < 1:
        raise ValueError("grid_resolution must be >= 1")
    inside = np.all(np.abs(points) <= 1.0, axis=1)
    if not inside.any():
        return 0.0
    cells = np.floor((points[inside] + 1.0) / 2.0 * grid_resolution).astype(int)
    cells = np.minimum(cells, grid_resolution - 1)
    flat = np.unique(cells[:, 0] * grid_resolution + cells[:, 1])
    return flat.size / grid_resolution**2
