"""Multipath tensor channel model.

Builds per-path steering vectors, rank-1 space/frequency/time channel
tensors, random complex path gains, and the assembled dense channel
tensor of shape (A, N_c, N_t) with A = m_rows * m_cols.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    CyclicPrefixError,
    DopplerRangeError,
    ParameterError,
    ShapeError,
)

# Materialization guard for dense (A, N_c, N_t) tensors, in elements.
DEFAULT_MAX_ELEMENTS = 1 << 24


@dataclass(frozen=True)
class ArrayGeometry:
    """Uniform planar array in the X-Z plane.

    ``m_cols`` antennas per column stacked vertically with spacing
    ``d_row``; ``m_rows`` antennas per row with horizontal spacing
    ``d_col``.  Antenna ``i`` of the flattened array sits in vertical
    position ``i // m_rows`` and horizontal position ``i % m_rows``.
    """

    m_rows: int
    m_cols: int
    d_row: float
    d_col: float
    wavelength: float

    def __post_init__(self):
        if self.m_rows < 1 or self.m_cols < 1:
            raise ParameterError("antenna counts must be >= 1")
        if self.d_row <= 0 or self.d_col <= 0 or self.wavelength <= 0:
            raise ParameterError("spacings and wavelength must be > 0")

    @property
    def n_antennas(self) -> int:
        return self.m_rows * self.m_cols


@dataclass(frozen=True)
class OfdmConfig:
    """OFDM numerology and frame layout."""

    n_subcarriers: int
    cp_length: int
    subcarrier_spacing: float
    slots_per_frame: int
    symbols_per_slot: int
    first_symbol_index: int = 0

    def __post_init__(self):
        if self.cp_length >= self.n_subcarriers:
            raise ParameterError("cp_length must be < n_subcarriers")
        if min(self.n_subcarriers, self.cp_length, self.slots_per_frame,
               self.symbols_per_slot) < 1:
            raise ParameterError("counts must be >= 1")
        if self.subcarrier_spacing <= 0:
            raise ParameterError("subcarrier_spacing must be > 0")

    @property
    def sample_interval(self) -> float:
        """T_s, seconds."""
        return 1.0 / (self.n_subcarriers * self.subcarrier_spacing)

    @property
    def symbol_duration(self) -> float:
        """Length of one OFDM symbol including its cyclic prefix."""
        return (self.n_subcarriers + self.cp_length) * self.sample_interval

    @property
    def symbols_per_frame(self) -> int:
        return self.slots_per_frame * self.symbols_per_slot

    @property
    def cp_duration(self) -> float:
        return self.cp_length * self.sample_interval

    @property
    def doppler_min(self) -> float:
        """Lowest admissible Doppler shift (inclusive)."""
        n_f = self.slots_per_frame
        return -0.5 * n_f / (self.symbols_per_frame * self.symbol_duration)

    @property
    def doppler_max(self) -> float:
        """Highest admissible Doppler shift (inclusive)."""
        n_f = self.slots_per_frame
        return (0.5 * n_f - 1.0) / (self.symbols_per_frame * self.symbol_duration)


@dataclass(frozen=True)
class PathParams:
    """One propagation path: power, arrival angles, delay, Doppler."""

    gain_variance: float
    elevation: float
    azimuth: float
    delay: float
    doppler: float

    def __post_init__(self):
        if self.gain_variance < 0:
            raise ParameterError("gain_variance must be >= 0")
        if not (0.0 <= self.elevation <= np.pi):
            raise ParameterError("elevation must lie in [0, pi]")
        if not (0.0 <= self.azimuth <= np.pi):
            raise ParameterError("azimuth must lie in [0, pi]")
        if self.delay < 0:
            raise ParameterError("delay must be >= 0")

    def validate(self, cfg: OfdmConfig) -> None:
        """Check the config-dependent delay and Doppler bounds."""
        if self.delay >= cfg.cp_duration:
            raise CyclicPrefixError(
                f"delay {self.delay:.3e} s >= cyclic prefix {cfg.cp_duration:.3e} s")
        if not (cfg.doppler_min - 1e-12 <= self.doppler <= cfg.doppler_max + 1e-12):
            raise DopplerRangeError(
                f"doppler {self.doppler:.3e} Hz outside "
                f"[{cfg.doppler_min:.3e}, {cfg.doppler_max:.3e}] Hz")


@dataclass(frozen=True)
class MultipathSet:
    """Ordered collection of paths for one terminal."""

    paths: tuple

    def __post_init__(self):
        if len(self.paths) < 1:
            raise ParameterError("a multipath set needs at least one path")
        object.__setattr__(self, "paths", tuple(self.paths))

    def __len__(self) -> int:
        return len(self.paths)

    def __iter__(self):
        return iter(self.paths)

    @property
    def gain_variances(self) -> np.ndarray:
        return np.array([p.gain_variance for p in self.paths])


@dataclass(frozen=True)
class SteeringSet:
    """Unit-modulus phase-factor vectors of one path.

    ``f_upa == kron(f_col, f_row)``; ``f_col`` spans the m_cols vertical
    positions, ``f_row`` the m_rows horizontal ones.
    """

    f_col: np.ndarray
    f_row: np.ndarray
    f_upa: np.ndarray
    f_freq: np.ndarray
    f_time: np.ndarray


def steering_vectors(path: PathParams, geom: ArrayGeometry, cfg: OfdmConfig) -> SteeringSet:
    """Build the space, frequency, and time steering vectors of a path.

    Element c of ``f_freq`` is exp(-2j*pi*c*delay*subcarrier_spacing);
    element n of ``f_time`` carries exp(2j*pi*doppler*n*T_sym) plus the
    constant frame-offset phase for a nonzero first symbol index.
    """
    path.validate(cfg)
    lam = geom.wavelength
    col_step = geom.d_row / lam * np.cos(path.elevation)
    row_step = geom.d_col / lam * np.sin(path.elevation) * np.cos(path.azimuth)
    f_col = np.exp(-2j * np.pi * col_step * np.arange(geom.m_cols))
    f_row = np.exp(-2j * np.pi * row_step * np.arange(geom.m_rows))
    f_upa = np.kron(f_col, f_row)

    c_idx = np.arange(cfg.n_subcarriers)
    f_freq = np.exp(-2j * np.pi * c_idx * path.delay * cfg.subcarrier_spacing)

    n_idx = np.arange(cfg.symbols_per_frame)
    t_sym = cfg.symbol_duration
    frame_phase = np.exp(
        2j * np.pi * cfg.first_symbol_index * cfg.symbols_per_slot * path.doppler * t_sym)
    f_time = frame_phase * np.exp(2j * np.pi * path.doppler * n_idx * t_sym)
    return SteeringSet(f_col=f_col, f_row=f_row, f_upa=f_upa,
                       f_freq=f_freq, f_time=f_time)


@dataclass(frozen=True)
class Rank1Sft:
    """Lazy rank-1 channel tensor, kept as its three factor vectors."""

    space: np.ndarray
    freq: np.ndarray
    time: np.ndarray

    @property
    def shape(self):
        return (self.space.size, self.freq.size, self.time.size)

    def dense(self, max_elements: int = DEFAULT_MAX_ELEMENTS) -> np.ndarray:
        """Materialize the full (A, N_c, N_t) tensor; size-guarded."""
        n = self.space.size * self.freq.size * self.time.size
        if n > max_elements:
            raise ShapeError(
                f"materializing {n} elements exceeds the cap of {max_elements}")
        return np.einsum("a,c,n->acn", self.space, self.freq, self.time)


def path_tensor(path: PathParams, geom: ArrayGeometry, cfg: OfdmConfig) -> Rank1Sft:
    """Unit-gain rank-1 channel tensor of one path (factorized form)."""
    sv = steering_vectors(path, geom, cfg)
    return Rank1Sft(space=sv.f_upa, freq=sv.f_freq, time=sv.f_time)


_GAIN_BLOCK = 256


def _block_rng(seed: int, block: int, stream: int) -> np.random.Generator:
    # Counter-style seeding: draws depend only on (seed, block, stream), so
    # any chunked evaluation reproduces the same values.
    return np.random.default_rng(np.random.SeedSequence(entropy=(seed, block, stream)))


def draw_gains(variances, seed: int, n_draws: int) -> np.ndarray:
    """Draw i.i.d. circularly symmetric complex Gaussian path gains.

    Returns an (n_draws, P) matrix; row d is reproducible from
    (seed, d) alone regardless of how many rows are requested.
    """
    var = np.asarray(variances, dtype=float)
    if np.any(var < 0):
        raise ParameterError("gain variances must be >= 0")
    if n_draws < 1:
        raise ParameterError("n_draws must be >= 1")
    p = var.size
    out = np.empty((n_draws, p), dtype=complex)
    scale = np.sqrt(var / 2.0)
    n_blocks = (n_draws + _GAIN_BLOCK - 1) // _GAIN_BLOCK
    for b in range(n_blocks):
        rng = _block_rng(seed, b, 0)
        lo, hi = b * _GAIN_BLOCK, min((b + 1) * _GAIN_BLOCK, n_draws)
        z = rng.standard_normal((_GAIN_BLOCK, p, 2))[: hi - lo]
        out[lo:hi] = scale * (z[..., 0] + 1j * z[..., 1])
    return out


def assemble_sft(mp: MultipathSet, gains, geom: ArrayGeometry, cfg: OfdmConfig,
                 max_elements: int = DEFAULT_MAX_ELEMENTS) -> np.ndarray:
    """Sum of gain-weighted rank-1 path tensors, shape (A, N_c, N_t)."""
    gains = np.asarray(gains)
    if gains.shape != (len(mp),):
        raise ParameterError(
            f"expected {len(mp)} gains, got shape {gains.shape}")
    shape = (geom.n_antennas, cfg.n_subcarriers, cfg.symbols_per_frame)
    n = shape[0] * shape[1] * shape[2]
    if n > max_elements:
        raise ShapeError(
            f"materializing {n} elements exceeds the cap of {max_elements}")
    out = np.zeros(shape, dtype=complex)
    for g, path in zip(gains, mp):
        if g == 0:
            continue
        r1 = path_tensor(path, geom, cfg)
        out += g * r1.dense(max_elements)
    return out
