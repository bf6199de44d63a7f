"""Triple-beam fingerprints and the full-size covariance counterpart.

The fingerprint is the expected elementwise power of the beam-domain
channel.  It is computed in closed form by default; the Monte-Carlo
estimator exists to model estimation noise and to validate the closed
form.
"""

import math
from dataclasses import dataclass

import numpy as np

from .beamspace import TransformSet, sft_to_tb, steering_to_tb_factors, transform_matrices
from .channel import (
    ArrayGeometry,
    MultipathSet,
    OfdmConfig,
    _GAIN_BLOCK,
    _block_rng,
    draw_gains,
    path_tensor,
    steering_vectors,
)
from .errors import DegenerateInputError, ParameterError, SftfSizeError

# Per-axis product cap for materializing the 6-way covariance tensor.
DEFAULT_SFTF_CAP = 4096


@dataclass(frozen=True)
class Tbf:
    """Nonnegative fingerprint tensor of shape (A, N_g, N_f) plus meta."""

    data: np.ndarray
    n_draws: int = 0          # 0 means the exact closed form
    snr_db: float | None = None
    source_id: str | None = None

    def __post_init__(self):
        if not np.all(np.isfinite(self.data)) or np.any(self.data < 0):
            raise ParameterError("fingerprint entries must be finite and >= 0")

    @property
    def total(self) -> float:
        return float(self.data.sum())


def path_power_factors(mp: MultipathSet, geom: ArrayGeometry, cfg: OfdmConfig,
                       t: TransformSet | None = None):
    """Per-path beam-power factor vectors (|u|^2, |v|^2, |w|^2)."""
    t = t if t is not None else transform_matrices(geom, cfg)
    out = []
    for path in mp:
        u, v, w = steering_to_tb_factors(steering_vectors(path, geom, cfg), t)
        out.append((np.abs(u) ** 2, np.abs(v) ** 2, np.abs(w) ** 2))
    return out


def tbf_exact(mp: MultipathSet, geom: ArrayGeometry, cfg: OfdmConfig,
              t: TransformSet | None = None, source_id: str | None = None) -> Tbf:
    """Closed-form fingerprint: sum_p var_p * |u_p|^2 x |v_p|^2 x |w_p|^2.

    The expectation over the independent zero-mean path gains kills all
    cross-path terms, so no sampling is involved.
    """
    t = t if t is not None else transform_matrices(geom, cfg)
    factors = path_power_factors(mp, geom, cfg, t)
    shape = (geom.n_antennas, cfg.cp_length, cfg.slots_per_frame)
    data = np.zeros(shape)
    for path, (pu, pv, pw) in zip(mp, factors):
        data += path.gain_variance * np.einsum("a,c,n->acn", pu, pv, pw)
    return Tbf(data=data, n_draws=0, snr_db=None, source_id=source_id)


def add_awgn(h: np.ndarray, snr_db: float, seed: int) -> np.ndarray:
    """Superimpose complex white Gaussian noise at the given SNR.

    Noise power per element is mean(|h|^2) / 10^(snr_db/10); an infinite
    snr_db returns the input unchanged (as a copy).
    """
    h = np.asarray(h)
    if not np.all(np.isfinite(h)):
        raise ParameterError("input tensor must be finite")
    if math.isinf(snr_db):
        return h.copy()
    signal_power = float(np.mean(np.abs(h) ** 2))
    noise_power = signal_power / 10.0 ** (snr_db / 10.0)
    rng = np.random.default_rng(np.random.SeedSequence(entropy=(seed, 0, 1)))
    z = rng.standard_normal(h.shape + (2,))
    return h + np.sqrt(noise_power / 2.0) * (z[..., 0] + 1j * z[..., 1])


def _noise_block(shape, power: float, seed: int, block: int) -> np.ndarray:
    rng = _block_rng(seed, block, 1)
    z = rng.standard_normal(shape + (2,))
    return np.sqrt(power / 2.0) * (z[..., 0] + 1j * z[..., 1])


def tbf_monte_carlo(mp: MultipathSet, geom: ArrayGeometry, cfg: OfdmConfig,
                    n_draws: int, seed: int, snr_db: float | None = None,
                    t: TransformSet | None = None,
                    source_id: str | None = None,
                    dense_noise: bool = False) -> Tbf:
    """Sample-mean fingerprint over random gain draws (optionally noisy).

    Noise enters on the space-frequency-time channel before the beam
    projection.  Because the projection rows are orthonormal, that is
    statistically identical to i.i.d. beam-domain noise of variance
    noise_power / (M_c*M_r*N_c*N_t); the default path uses this and
    stays factorized, while ``dense_noise=True`` materializes the
    channel and transforms every noisy draw (reference oracle).

    Draw d depends only on (seed, d), so chunked or parallel evaluation
    reproduces identical results.
    """
    if n_draws < 1:
        raise ParameterError("n_draws must be >= 1")
    t = t if t is not None else transform_matrices(geom, cfg)
    gains = draw_gains([p.gain_variance for p in mp], seed, n_draws)
    noisy = snr_db is not None and not math.isinf(snr_db)

    shape = (geom.n_antennas, cfg.cp_length, cfg.slots_per_frame)
    acc = np.zeros(shape)
    if noisy:
        mean_power = float(np.sum([p.gain_variance for p in mp]))  # E|h|^2 per element
        noise_power = mean_power / 10.0 ** (snr_db / 10.0)

    if not dense_noise:
        # Each draw is a gain-weighted sum of fixed per-path beam
        # tensors, plus equivalent beam-domain noise when requested.
        basis = np.stack([
            np.einsum("a,c,n->acn", *steering_to_tb_factors(
                steering_vectors(p, geom, cfg), t)).ravel()
            for p in mp])
        tb_noise_power = (noise_power / (geom.n_antennas * cfg.n_subcarriers
                                         * cfg.symbols_per_frame)
                          if noisy else 0.0)
        n_blocks = (n_draws + _GAIN_BLOCK - 1) // _GAIN_BLOCK
        for b in range(n_blocks):
            lo, hi = b * _GAIN_BLOCK, min((b + 1) * _GAIN_BLOCK, n_draws)
            block = gains[lo:hi] @ basis
            if noisy:
                block = block + _noise_block(block.shape, tb_noise_power, seed, b)
            acc += (np.abs(block) ** 2).sum(axis=0).reshape(shape)
        return Tbf(data=acc / n_draws, n_draws=n_draws,
                   snr_db=snr_db if noisy else None, source_id=source_id)

    dense_paths = np.stack([
        path_tensor(p, geom, cfg).dense().ravel() for p in mp])
    sft_shape = (geom.n_antennas, cfg.n_subcarriers, cfg.symbols_per_frame)
    n_blocks = (n_draws + _GAIN_BLOCK - 1) // _GAIN_BLOCK
    for b in range(n_blocks):
        lo, hi = b * _GAIN_BLOCK, min((b + 1) * _GAIN_BLOCK, n_draws)
        h = (gains[lo:hi] @ dense_paths).reshape((hi - lo,) + sft_shape)
        if noisy:
            h += _noise_block(h.shape, noise_power, seed, b)
        for d in range(hi - lo):
            acc += np.abs(sft_to_tb(h[d], t)) ** 2
    return Tbf(data=acc / n_draws, n_draws=n_draws,
               snr_db=snr_db if noisy else None, source_id=source_id)


def sftf_small(mp: MultipathSet, geom: ArrayGeometry, cfg: OfdmConfig,
               cap: int = DEFAULT_SFTF_CAP) -> np.ndarray:
    """Materialized covariance tensor of shape (A, N_c, N_t) x 2.

    Exact: sum_p var_p * G_p outer conj(G_p) over the unit-gain path
    tensors.  Guarded by ``cap`` on A * N_c * N_t.
    """
    size = geom.n_antennas * cfg.n_subcarriers * cfg.symbols_per_frame
    if size > cap:
        raise SftfSizeError(
            f"A*N_c*N_t = {size} exceeds the materialization cap {cap}")
    shape = (geom.n_antennas, cfg.n_subcarriers, cfg.symbols_per_frame)
    out = np.zeros(shape + shape, dtype=complex)
    for path in mp:
        g = path_tensor(path, geom, cfg).dense()
        out += path.gain_variance * np.einsum("acn,dem->acndem", g, g.conj())
    return out


def sftf_inner_closed(mp1: MultipathSet, mp2: MultipathSet,
                      geom: ArrayGeometry, cfg: OfdmConfig):
    """Trace and norms of the covariance pair without materialization.

    Tr{X_1 . X_2*} = sum_pq var_p var_q |<f_p, f_q>|^2 where the inner
    product factorizes over the space, frequency, and time vectors.
    Returns (trace, norm1, norm2).
    """
    sv1 = [steering_vectors(p, geom, cfg) for p in mp1]
    sv2 = [steering_vectors(p, geom, cfg) for p in mp2]

    def cross(a, b):
        total = 0.0
        for pa, sa in zip(a[0], a[1]):
            for pb, sb in zip(b[0], b[1]):
                ip = (np.vdot(sa.f_upa, sb.f_upa)
                      * np.vdot(sa.f_freq, sb.f_freq)
                      * np.vdot(sa.f_time, sb.f_time))
                total += pa.gain_variance * pb.gain_variance * abs(ip) ** 2
        return total

    a = (mp1.paths, sv1)
    b = (mp2.paths, sv2)
    trace = cross(a, b)
    norm1 = math.sqrt(cross(a, a))
    norm2 = math.sqrt(cross(b, b))
    return trace, norm1, norm2


def sftf_trace(x1: np.ndarray, x2: np.ndarray) -> complex:
    """Pseudo-diagonal trace of the outer product of two 6-way tensors."""
    if x1.shape != x2.shape:
        raise DegenerateInputError("covariance tensors must share a shape")
    return complex(np.sum(x1 * x2.conj()))
