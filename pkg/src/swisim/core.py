"""Two-wavelength optics, mirror shift schedules, and depth map containers.

All lengths are micrometers internally; laser wavelengths enter in nanometers
and are converted once.  Depth is one-way path length, so a depth interval of
``lambda_s / 2`` spans one full period of the synthetic interference term.
"""

from dataclasses import dataclass, field

import numpy as np

from .exceptions import DimensionMismatch, EqualWavelengths, TooFewShifts

NM_PER_UM = 1000.0


@dataclass(frozen=True)
class OpticalConfig:
    """Dichromatic source configuration and derived synthetic quantities.

    Attributes
    ----------
    lambda1 : float
        Primary (larger) wavelength in nm.
    lambda2 : float
        Second wavelength ``lambda1 / (1 + epsilon)`` in nm.
    epsilon : float
        Relative wavelength gap, dimensionless.
    k : float
        Optical wavenumber ``2 pi / lambda1`` in rad/um.
    k_s : float
        Synthetic wavenumber ``epsilon * k`` in rad/um.
    lambda_s : float
        Synthetic wavelength in um.
    lambda_c : float
        Carrier wavelength ``lambda1 / 2`` in um.
    """

    lambda1: float
    lambda2: float
    epsilon: float
    k: float
    k_s: float
    lambda_s: float
    lambda_c: float

    def __post_init__(self):
        if not (self.lambda1 > 0 and self.lambda2 > 0):
            raise ValueError("wavelengths must be positive")
        if self.lambda1 <= self.lambda2:
            raise ValueError("lambda1 must be the larger wavelength")

    @property
    def unambiguous_range(self) -> float:
        """Depth interval covered by one synthetic period, in um."""
        return self.lambda_s / 2


def derive_synthetic(lambda1_nm: float, lambda2_nm: float) -> OpticalConfig:
    """Build an OpticalConfig from two laser wavelengths.

    Parameters
    ----------
    lambda1_nm, lambda2_nm : float
        Laser wavelengths in nanometers, any order.

    Returns
    -------
    OpticalConfig
        With ``lambda_s = lambda1 * lambda2 / |lambda1 - lambda2|`` evaluated
        in that exact form, and the primary wavelength set to the larger of
        the two so that ``epsilon >= 0``.

    Raises
    ------
    EqualWavelengths
        If the wavelengths coincide and no beat wavelength exists.
    """
    if lambda1_nm <= 0 or lambda2_nm <= 0:
        raise ValueError("wavelengths must be positive")
    if lambda1_nm == lambda2_nm:
        raise EqualWavelengths(f"identical wavelengths: {lambda1_nm} nm")
    hi = max(lambda1_nm, lambda2_nm)
    lo = min(lambda1_nm, lambda2_nm)
    epsilon = (hi - lo) / lo
    lambda_s = hi * lo / (hi - lo) / NM_PER_UM
    lam_um = hi / NM_PER_UM
    k = 2 * np.pi / lam_um
    return OpticalConfig(
        lambda1=hi,
        lambda2=lo,
        epsilon=epsilon,
        k=k,
        k_s=epsilon * k,
        lambda_s=lambda_s,
        lambda_c=lam_um / 2,
    )


@dataclass(frozen=True)
class ShiftSchedule:
    """Reference mirror positions for an {M, N} acquisition.

    ``positions[n, m] = l0 + n * lambda_s / (2 N) + m * lambda_c / M``: the
    n index steps the synthetic phase by ``2 pi / N`` per step, the m index
    steps the carrier phase by ``2 pi / M`` per step.

    Attributes
    ----------
    m_steps : int
        Carrier shifts per synthetic position (M >= 3).
    n_steps : int
        Synthetic positions (N >= 3).
    l0 : float
        Base mirror position in um.
    positions : ndarray
        Shape (N, M) mirror positions in um.
    """

    m_steps: int
    n_steps: int
    l0: float
    positions: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.m_steps < 3 or self.n_steps < 3:
            raise TooFewShifts(
                f"need M >= 3 and N >= 3, got M={self.m_steps}, N={self.n_steps}"
            )
        if self.positions.shape != (self.n_steps, self.m_steps):
            raise DimensionMismatch(
                f"positions shape {self.positions.shape} != "
                f"({self.n_steps}, {self.m_steps})"
            )
        self.positions.setflags(write=False)

    @property
    def synthetic_positions(self) -> np.ndarray:
        """The N carrier-free positions ``l_n = positions[:, 0]``."""
        return self.positions[:, 0]


def build_schedule(config: OpticalConfig, m_steps: int, n_steps: int,
                   l0: float = 0.0) -> ShiftSchedule:
    """Lay out the (N, M) grid of mirror positions for an acquisition.

    Parameters
    ----------
    config : OpticalConfig
    m_steps, n_steps : int
        Carrier and synthetic shift counts, both at least 3.
    l0 : float
        Base mirror position in um.

    Raises
    ------
    TooFewShifts
        If either count is below 3.
    """
    if m_steps < 3 or n_steps < 3:
        raise TooFewShifts(
            f"need M >= 3 and N >= 3, got M={m_steps}, N={n_steps}"
        )
    n = np.arange(n_steps)[:, None]
    m = np.arange(m_steps)[None, :]
    positions = l0 + n * (config.lambda_s / (2 * n_steps)) + m * (config.lambda_c / m_steps)
    return ShiftSchedule(m_steps=m_steps, n_steps=n_steps, l0=float(l0),
                         positions=positions)


def wrap_depth(depth, config: OpticalConfig):
    """Wrap depth into the unambiguous interval ``[0, lambda_s / 2)``.

    Accepts scalars or arrays of depths in um; negative inputs wrap around.
    """
    half = config.lambda_s / 2
    wrapped = np.mod(np.asarray(depth, dtype=np.float64), half)
    # np.mod of a tiny negative can round to the modulus itself; keep [0, half)
    wrapped = np.where(wrapped >= half, 0.0, wrapped)
    return float(wrapped) if np.ndim(depth) == 0 else wrapped


@dataclass(frozen=True)
class DepthMap:
    """A per-pixel depth image in um with a validity mask.

    Attributes
    ----------
    depth : ndarray
        Shape (H, W) float depths in um.
    mask : ndarray
        Shape (H, W) bool; True where the depth value is valid.
    """

    depth: np.ndarray
    mask: np.ndarray

    def __post_init__(self):
        depth = np.asarray(self.depth, dtype=np.float64)
        mask = np.asarray(self.mask, dtype=bool)
        if depth.ndim != 2:
            raise DimensionMismatch(f"depth must be 2-D, got shape {depth.shape}")
        if mask.shape != depth.shape:
            raise DimensionMismatch(
                f"mask shape {mask.shape} != depth shape {depth.shape}"
            )
        if not np.all(np.isfinite(depth[mask])):
            raise ValueError("masked-valid depths must be finite")
        object.__setattr__(self, "depth", depth)
        object.__setattr__(self, "mask", mask)

    @classmethod
    def full(cls, depth: np.ndarray) -> "DepthMap":
        """A DepthMap with every pixel valid."""
        depth = np.asarray(depth, dtype=np.float64)
        return cls(depth=depth, mask=np.ones(depth.shape, dtype=bool))

    @property
    def height(self) -> int:
        return self.depth.shape[0]

    @property
    def width(self) -> int:
        return self.depth.shape[1]

    @property
    def shape(self) -> tuple:
        return self.depth.shape
