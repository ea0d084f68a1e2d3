"""Accuracy metrics, calibration, and the comparison experiments.

The experiments mirror how a physical rig would be characterized: track a
scene translated to known offsets and report residual statistics, sweep the
scan-coverage trade-off, compare against an equal-time scanning acquisition,
and calibrate the synthetic wavelength from an envelope sweep.
"""

import dataclasses
from dataclasses import dataclass

import numpy as np

from .core import DepthMap, OpticalConfig, build_schedule, wrap_depth
from .exceptions import (EmptyMask, FitDiverged, InsufficientSpan, ZeroPoints)
from .filters import (DEFAULT_PIXEL_PITCH, FilterKind, FilterSpec,
                      joint_bilateral_upsample)
from .forward import (AcquisitionSettings, Mode, SceneModel, _speckle_means,
                      acquire_stack, render_frame)
from .retrieve import envelope_estimate, interference_free, reconstruct

FREQUENCY_GRID_SIZE = 512
FREQUENCY_GRID_SPAN = (0.25, 4.0)
MAX_SPECKLE_REALIZATIONS = 64


@dataclass(frozen=True)
class AccuracyRow:
    """Tracking accuracy at one kernel width, both illumination modes."""

    kernel_width: float
    rmse_swept: float
    medae_swept: float
    rmse_coherent: float
    medae_coherent: float


@dataclass(frozen=True)
class TradeoffRow:
    """Reconstruction accuracy at one (M, N, coverage) operating point."""

    m_steps: int
    n_steps: int
    coverage: float
    indirect_rejection: float
    speckle_realizations: int
    frames: int
    rmse: float


@dataclass(frozen=True)
class CalibrationResult:
    """Sinusoid fit of an envelope sweep.

    ``lambda_s`` is the synthetic wavelength implied by the fitted
    modulation frequency ``2 k_s`` of the squared envelope.
    """

    lambda_s: float
    k_s: float
    offset: float
    amplitude: float
    phase: float
    residual_rms: float


def _joint_errors(estimate: DepthMap, truth: DepthMap) -> np.ndarray:
    if estimate.shape != truth.shape:
        raise ValueError(
            f"estimate shape {estimate.shape} != truth shape {truth.shape}")
    joint = estimate.mask & truth.mask
    if not joint.any():
        raise EmptyMask("no jointly valid pixels")
    return estimate.depth[joint] - truth.depth[joint]


def rmse(estimate: DepthMap, truth: DepthMap) -> float:
    """Root mean squared depth error over jointly valid pixels."""
    err = _joint_errors(estimate, truth)
    return float(np.sqrt(np.mean(err ** 2)))


def medae(estimate: DepthMap, truth: DepthMap) -> float:
    """Median absolute depth error over jointly valid pixels."""
    err = _joint_errors(estimate, truth)
    return float(np.median(np.abs(err)))


def _derived_seed(seed: int, index: int) -> int:
    # decorrelates acquisitions across offsets or grid points, reproducibly
    return int(np.random.SeedSequence(entropy=(seed, index)).generate_state(1)[0])


def _translated(scene: SceneModel, offset: float) -> SceneModel:
    moved = DepthMap(depth=scene.depth.depth + offset, mask=scene.depth.mask)
    return dataclasses.replace(scene, depth=moved)


def depth_tracking_experiment(scene: SceneModel, config: OpticalConfig,
                              offsets, kernel_widths,
                              swept: AcquisitionSettings,
                              coherent: AcquisitionSettings,
                              m_steps: int = 4, n_steps: int = 4,
                              seeds=(0,), l0: float = 0.0,
                              pixel_pitch: float = DEFAULT_PIXEL_PITCH):
    """Track known scene translations and report residual statistics.

    The scene is translated to each offset and re-acquired with a fresh
    speckle draw (moving a physical stage decorrelates speckle).  For every
    kernel width and illumination mode, recovered depths are regressed
    against the applied offsets with a per-pixel intercept and unit slope;
    the residuals pool over pixels and offsets.  Rows report the median
    RMSE / MedAE over the seeds.

    Parameters
    ----------
    scene : SceneModel
        Base scene; depths plus offsets must stay inside the unambiguous
        range to avoid wrapping.
    offsets : sequence of float
        At least two stage offsets in um.
    kernel_widths : sequence of float
        Gaussian kernel widths in um (6 sigma convention).
    swept, coherent : AcquisitionSettings
        Settings for the two illumination modes (modes are enforced).
    seeds : sequence of int
        RNG seeds; statistics are medians across them.

    Returns
    -------
    list of AccuracyRow
        One row per kernel width.
    """
    offsets = [float(o) for o in offsets]
    if len(offsets) < 2:
        raise ValueError("need at least two offsets to track")
    kernel_widths = [float(w) for w in kernel_widths]
    schedule = build_schedule(config, m_steps, n_steps, l0=l0)
    mode_settings = {
        "swept": dataclasses.replace(swept, mode=Mode.SWEPT_ANGLE),
        "coherent": dataclasses.replace(coherent, mode=Mode.FULL_FIELD_COHERENT),
    }
    specs = {w: FilterSpec.from_kernel_width(FilterKind.GAUSSIAN, w,
                                             pixel_pitch=pixel_pitch)
             for w in kernel_widths}
    stats = {(mode, w): {"rmse": [], "medae": []}
             for mode in mode_settings for w in kernel_widths}
    for seed in seeds:
        recovered = {key: [] for key in stats}
        for index, offset in enumerate(offsets):
            shifted = _translated(scene, offset)
            acq_seed = _derived_seed(seed, index)
            for mode, settings in mode_settings.items():
                run = dataclasses.replace(settings, seed=acq_seed)
                stack = acquire_stack(shifted, schedule, run, config)
                for w in kernel_widths:
                    recovered[(mode, w)].append(
                        reconstruct(stack, filter_spec=specs[w],
                                    guide=scene.guide))
        for key, maps in recovered.items():
            depths = np.stack([m.depth for m in maps])
            joint = np.logical_and.reduce([m.mask for m in maps])
            if not joint.any():
                raise EmptyMask("no jointly valid pixels across offsets")
            adjusted = depths - np.asarray(offsets)[:, None, None]
            residual = adjusted - adjusted.mean(axis=0)
            pooled = residual[:, joint]
            stats[key]["rmse"].append(float(np.sqrt(np.mean(pooled ** 2))))
            stats[key]["medae"].append(float(np.median(np.abs(pooled))))
    rows = []
    for w in kernel_widths:
        rows.append(AccuracyRow(
            kernel_width=w,
            rmse_swept=float(np.median(stats[("swept", w)]["rmse"])),
            medae_swept=float(np.median(stats[("swept", w)]["medae"])),
            rmse_coherent=float(np.median(stats[("coherent", w)]["rmse"])),
            medae_coherent=float(np.median(stats[("coherent", w)]["medae"])),
        ))
    return rows


def scanning_equivalent_factor(scan_rate: float, images_per_depth: int,
                               total_time: float, image_width: int) -> int:
    """Downsampling factor of an equal-time scanning acquisition.

    A point scanner measuring ``scan_rate`` points per second that must
    spend ``images_per_depth`` exposures per point covers
    ``floor(scan_rate * total_time / images_per_depth)`` points in 2-D,
    hence ``floor(sqrt(...))`` per dimension; spreading those along an
    ``image_width``-pixel row gives the factor (at least 1).
    """
    if scan_rate <= 0 or total_time <= 0 or images_per_depth <= 0:
        raise ValueError("rates, counts and times must be positive")
    if image_width <= 0:
        raise ValueError("image_width must be positive")
    points_2d = int(np.floor(scan_rate * total_time / images_per_depth))
    if points_2d < 1:
        raise ZeroPoints(
            f"time budget allows {points_2d} scan points; nothing to measure")
    points_1d = int(np.floor(np.sqrt(points_2d)))
    return max(1, round(image_width / points_1d))


def emulate_scanning(full: DepthMap, factor: int, guide: np.ndarray,
                     spec: FilterSpec = None) -> DepthMap:
    """Depth an equal-time scanner would see: stride, then guided upsample.

    The full-resolution map is subsampled on a factor-strided grid and
    interpolated back with :func:`joint_bilateral_upsample`; structure finer
    than the stride cannot survive.  Without a spec (or with kind NONE) the
    spatial sigma defaults to one stride and the range sigma to half the
    guide's spread (no range weighting on a flat guide).
    """
    if factor < 1:
        raise ValueError("factor must be >= 1")
    guide = np.asarray(guide, dtype=np.float64)
    low = DepthMap(depth=full.depth[::factor, ::factor],
                   mask=full.mask[::factor, ::factor])
    if spec is None or spec.kind is FilterKind.NONE:
        sigma_px = float(factor)
        spread = float(np.std(guide))
        intensity_sigma = 0.5 * spread if spread > 0 else np.inf
    else:
        sigma_px = spec.sigma_px
        intensity_sigma = (spec.intensity_sigma
                           if spec.kind is FilterKind.JOINT_BILATERAL
                           else np.inf)
    return joint_bilateral_upsample(low, guide, factor, sigma_px,
                                    intensity_sigma)


def simulate_envelope_sweep(scene: SceneModel, config: OpticalConfig,
                            positions, m_steps: int = 4,
                            settings: AcquisitionSettings = None) -> np.ndarray:
    """Sample the squared envelope by acquiring M carrier shifts per stop.

    At each mirror position the carrier is stepped through M phase shifts
    and the envelope estimated from those frames, exactly as a calibration
    sweep on the instrument would; the scene-averaged envelope forms one
    (position, value) row of the returned (S, 2) array.
    """
    if settings is None:
        settings = AcquisitionSettings()
    rng = np.random.default_rng(settings.seed)
    speckle = _speckle_means(scene, settings, rng)
    rows = np.empty((len(positions), 2))
    for index, l in enumerate(positions):
        frames = np.stack([
            render_frame(scene, l + m * config.lambda_c / m_steps, settings,
                         config, envelope_l=l, rng=rng, speckle=speckle)
            for m in range(m_steps)])
        envelopes = envelope_estimate(frames, interference_free(frames))
        rows[index] = (l, float(np.mean(envelopes[scene.depth.mask])))
    return rows


def _sinusoid_residual(positions, values, freq):
    design = np.column_stack((np.ones_like(positions),
                              np.cos(freq * positions),
                              np.sin(freq * positions)))
    coef, *_ = np.linalg.lstsq(design, values, rcond=None)
    resid = values - design @ coef
    return float(resid @ resid), coef


def _golden_minimize(fun, lo, hi, iterations=80):
    invphi = (np.sqrt(5.0) - 1) / 2
    a, b = float(lo), float(hi)
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = fun(c), fun(d)
    for _ in range(iterations):
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = fun(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = fun(d)
    return (a + b) / 2


def calibrate_synthetic_wavelength(envelope_samples,
                                   nominal_lambda_s: float = None,
                                   max_residual_fraction: float = 0.5) -> CalibrationResult:
    """Estimate the synthetic wavelength from an envelope sweep.

    Fits ``E(l) = offset + amplitude * cos(2 k_s l + phase)`` to sampled
    squared envelopes: a frequency grid (512 candidates spanning 0.25x to 4x
    the nominal modulation frequency, clipped so at least one period fits in
    the sweep) picks a starting point and golden-section refinement

    Parameters
    ----------
    envelope_samples : array-like
        Shape (S, 2) rows of (mirror position um, squared envelope), S >= 8.
    nominal_lambda_s : float, optional
        Expected synthetic wavelength in um.  Without it the grid spans the
        sweep's own resolvable band.
    max_residual_fraction : float
        Fit rejection threshold: residual power above this fraction of the
        sample variance raises FitDiverged.

    Raises
    ------
    InsufficientSpan
        If the sweep is shorter than one expected modulation period.
    FitDiverged
        If the samples carry no modulation or the best fit explains too
        little of their variance.
    """
    samples = np.asarray(envelope_samples, dtype=np.float64)
    if samples.ndim != 2 or samples.shape[1] != 2:
        raise ValueError(f"samples must be (S, 2), got {samples.shape}")
    if samples.shape[0] < 8:
        raise ValueError("need at least 8 samples")
    positions = samples[:, 0]
    values = samples[:, 1]
    span = positions.max() - positions.min()
    if span <= 0:
        raise InsufficientSpan("all samples at one mirror position")
    variance = float(np.var(values))
    if variance == 0:
        raise FitDiverged("constant samples carry no modulation")
    if nominal_lambda_s is not None:
        f_nominal = 2 * (2 * np.pi / nominal_lambda_s)
        if span < 2 * np.pi / f_nominal:
            raise InsufficientSpan(
                f"span {span:.3g} um is below one modulation period "
                f"{2 * np.pi / f_nominal:.3g} um of the nominal")
        f_lo = max(FREQUENCY_GRID_SPAN[0] * f_nominal, 2 * np.pi / span)
        f_hi = FREQUENCY_GRID_SPAN[1] * f_nominal
    else:
        spacing = float(np.median(np.abs(np.diff(np.sort(positions)))))
        f_lo = 2 * np.pi / span
        f_hi = np.pi / max(spacing, 1e-12)
    if not f_lo < f_hi:
        raise InsufficientSpan("no admissible modulation frequencies")
    grid = np.linspace(f_lo, f_hi, FREQUENCY_GRID_SIZE)
    residuals = np.array([_sinusoid_residual(positions, values, f)[0]
                          for f in grid])
    best = int(np.argmin(residuals))
    lo = grid[max(best - 1, 0)]
    hi = grid[min(best + 1, len(grid) - 1)]
    freq = _golden_minimize(
        lambda f: _sinusoid_residual(positions, values, f)[0], lo, hi)
    rss, coef = _sinusoid_residual(positions, values, freq)
    if rss > max_residual_fraction * variance * values.size:
        raise FitDiverged(
            f"residual power {rss:.3g} exceeds {max_residual_fraction:.0%} "
            "of the sample variance")
    k_s = freq / 2
    return CalibrationResult(
        lambda_s=2 * np.pi / k_s,
        k_s=k_s,
        offset=float(coef[0]),
        amplitude=float(np.hypot(coef[1], coef[2])),
        phase=float(np.arctan2(-coef[2], coef[1])),
        residual_rms=float(np.sqrt(rss / values.size)),
    )


def coverage_operating_point(coverage: float):
    """Map scan coverage to (indirect_rejection, speckle_realizations).

    Denser angular coverage rejects more indirect light and averages more
    speckle draws; this documented stand-in keeps both monotone in coverage.
    """
    if not 0.0 <= coverage <= 1.0:
        raise ValueError("coverage must lie in [0, 1]")
    rejection = 1.0 - coverage
    realizations = max(1, round(MAX_SPECKLE_REALIZATIONS * coverage))
    return rejection, realizations


def tradeoff_sweep(scene: SceneModel, config: OpticalConfig, mn_grid,
                   coverages, base: AcquisitionSettings, seeds=(0,),
                   kernel_width: float = 21.0, l0: float = 0.0,
                   pixel_pitch: float = DEFAULT_PIXEL_PITCH):
    """Sweep (M, N) and scan coverage; report median reconstruction RMSE.

    Returns one TradeoffRow per (m_steps, n_steps, coverage) combination,
    with RMSE computed against the wrapped ground truth and the median taken
    across seeds.
    """
    coverages = [float(c) for c in coverages]
    spec = FilterSpec.from_kernel_width(FilterKind.GAUSSIAN, kernel_width,
                                        pixel_pitch=pixel_pitch)
    truth = DepthMap(depth=l0 + wrap_depth(scene.depth.depth - l0, config),
                     mask=scene.depth.mask)
    rows = []
    for m_steps, n_steps in mn_grid:
        schedule = build_schedule(config, m_steps, n_steps, l0=l0)
        for index, coverage in enumerate(coverages):
            rejection, realizations = coverage_operating_point(coverage)
            errors = []
            for seed in seeds:
                run = dataclasses.replace(
                    base, mode=Mode.SWEPT_ANGLE,
                    indirect_rejection=rejection,
                    speckle_realizations=realizations,
                    seed=_derived_seed(seed, index))
                stack = acquire_stack(scene, schedule, run, config)
                recovered = reconstruct(stack, filter_spec=spec,
                                        guide=scene.guide)
                errors.append(rmse(recovered, truth))
            rows.append(TradeoffRow(
                m_steps=m_steps, n_steps=n_steps, coverage=coverage,
                indirect_rejection=rejection,
                speckle_realizations=realizations,
                frames=m_steps * n_steps,
                rmse=float(np.median(errors))))
    return rows
