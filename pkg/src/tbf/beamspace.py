"""DFT-derived beam-domain transforms and tensor kernels.

Converts channel tensors between the space-frequency-time domain
(A, N_c, N_t) and the angle-delay-Doppler beam domain (A, N_g, N_f),
and provides the square delay/Doppler extensions used by the
asymptotic-property checks.
"""

from dataclasses import dataclass

import numpy as np

from .channel import ArrayGeometry, OfdmConfig, Rank1Sft, SteeringSet
from .errors import ShapeError


@dataclass(frozen=True)
class TransformSet:
    """The three beam transforms plus their square extensions.

    ``w_angle_col``/``w_angle_row`` and ``w_delay_full`` are unitary;
    ``w_doppler_full`` is unitary only when symbols_per_slot == 1 (its
    column frequencies are spaced 1/(N_s*N_t) apart, so distinct
    columns are orthogonal only when their index gap is a multiple of
    N_s).
    """

    w_angle_col: np.ndarray   # (M_c, M_c)
    w_angle_row: np.ndarray   # (M_r, M_r)
    w_delay: np.ndarray       # (N_c, N_g)
    w_doppler: np.ndarray     # (N_t, N_f)
    w_delay_full: np.ndarray  # (N_c, N_c)
    w_doppler_full: np.ndarray  # (N_t, N_t)

    @property
    def w_angle_upa(self) -> np.ndarray:
        """Kronecker-combined angle transform, (A, A)."""
        return np.kron(self.w_angle_col, self.w_angle_row)

    @property
    def scale(self) -> float:
        """sqrt(M_c * M_r * N_c * N_t)."""
        m_c = self.w_angle_col.shape[0]
        m_r = self.w_angle_row.shape[0]
        n_c = self.w_delay.shape[0]
        n_t = self.w_doppler.shape[0]
        return float(np.sqrt(m_c * m_r * n_c * n_t))


def _angle_matrix(m: int) -> np.ndarray:
    i = np.arange(m)[:, None]
    j = np.arange(m)[None, :]
    return np.exp(-2j * np.pi * i * (2 * j - m) / (2 * m)) / np.sqrt(m)


def _delay_matrix(n_c: int, n_cols: int) -> np.ndarray:
    i = np.arange(n_c)[:, None]
    j = np.arange(n_cols)[None, :]
    return np.exp(-2j * np.pi * i * j / n_c) / np.sqrt(n_c)


def _doppler_matrix(n_t: int, n_cols: int, n_s: int, n_first: int) -> np.ndarray:
    i = np.arange(n_t)[:, None]
    j = np.arange(n_cols)[None, :]
    return np.exp(2j * np.pi * (n_first + i / n_s) * (2 * j - n_cols) / (2 * n_cols)) / np.sqrt(n_t)


def transform_matrices(geom: ArrayGeometry, cfg: OfdmConfig) -> TransformSet:
    """Build all beam-domain transform matrices for one configuration."""
    n_t = cfg.symbols_per_frame
    return TransformSet(
        w_angle_col=_angle_matrix(geom.m_cols),
        w_angle_row=_angle_matrix(geom.m_rows),
        w_delay=_delay_matrix(cfg.n_subcarriers, cfg.cp_length),
        w_doppler=_doppler_matrix(n_t, cfg.slots_per_frame,
                                  cfg.symbols_per_slot, cfg.first_symbol_index),
        w_delay_full=_delay_matrix(cfg.n_subcarriers, cfg.n_subcarriers),
        w_doppler_full=_doppler_matrix(n_t, n_t, cfg.symbols_per_slot,
                                       cfg.first_symbol_index),
    )


def mode_product(matrix: np.ndarray, tensor: np.ndarray, mode: int) -> np.ndarray:
    """Contract ``matrix`` columns against tensor axis ``mode`` (0-based).

    result[..., i, ...] = sum_j matrix[i, j] * tensor[..., j, ...].
    Mode products along distinct axes commute.
    """
    matrix = np.asarray(matrix)
    tensor = np.asarray(tensor)
    if not 0 <= mode < tensor.ndim:
        raise ShapeError(f"mode {mode} out of range for ndim {tensor.ndim}")
    if matrix.shape[1] != tensor.shape[mode]:
        raise ShapeError(
            f"matrix columns {matrix.shape[1]} != tensor extent "
            f"{tensor.shape[mode]} along mode {mode}")
    moved = np.moveaxis(tensor, mode, 0)
    out = np.tensordot(matrix, moved, axes=([1], [0]))
    return np.moveaxis(out, 0, mode)


def _check_sft_shape(h: np.ndarray, t: TransformSet) -> None:
    a = t.w_angle_col.shape[0] * t.w_angle_row.shape[0]
    expect = (a, t.w_delay.shape[0], t.w_doppler.shape[0])
    if h.shape != expect:
        raise ShapeError(f"expected SFT shape {expect}, got {h.shape}")


def sft_to_tb(h: np.ndarray, t: TransformSet) -> np.ndarray:
    """Project a dense (A, N_c, N_t) tensor onto the beam domain.

    Hermitian-transform projection with an overall 1/sqrt(M_c M_r N_c N_t)
    scale; exact inverse of :func:`tb_to_sft` for on-grid channels.
    """
    _check_sft_shape(h, t)
    out = mode_product(t.w_angle_upa.conj().T, h, 0)
    out = mode_product(t.w_delay.conj().T, out, 1)
    out = mode_product(t.w_doppler.conj().T, out, 2)
    return out / t.scale


def tb_to_sft(h_tb: np.ndarray, t: TransformSet) -> np.ndarray:
    """Approximate reconstruction of the dense SFT tensor from beam space."""
    a = t.w_angle_col.shape[0] * t.w_angle_row.shape[0]
    expect = (a, t.w_delay.shape[1], t.w_doppler.shape[1])
    if h_tb.shape != expect:
        raise ShapeError(f"expected TB shape {expect}, got {h_tb.shape}")
    out = mode_product(t.w_angle_upa, h_tb, 0)
    out = mode_product(t.w_delay, out, 1)
    out = mode_product(t.w_doppler, out, 2)
    return out * t.scale


def steering_to_tb_factors(sv: SteeringSet, t: TransformSet):
    """Beam-domain factor vectors (u, v, w) of one path.

    ``outer(u, v, w)`` equals ``sft_to_tb`` of the path's rank-1 tensor;
    u has length A, v length N_g, w length N_f.
    """
    m_c = t.w_angle_col.shape[0]
    m_r = t.w_angle_row.shape[0]
    n_c = t.w_delay.shape[0]
    n_t = t.w_doppler.shape[0]
    u_col = t.w_angle_col.conj().T @ sv.f_col / np.sqrt(m_c)
    u_row = t.w_angle_row.conj().T @ sv.f_row / np.sqrt(m_r)
    u = np.kron(u_col, u_row)
    v = t.w_delay.conj().T @ sv.f_freq / np.sqrt(n_c)
    w = t.w_doppler.conj().T @ sv.f_time / np.sqrt(n_t)
    return u, v, w


def rank1_to_tb(r1: Rank1Sft, t: TransformSet) -> np.ndarray:
    """Fast factorized beam projection of a rank-1 channel tensor."""
    m_c = t.w_angle_col.shape[0]
    m_r = t.w_angle_row.shape[0]
    u = t.w_angle_upa.conj().T @ r1.space / np.sqrt(m_c * m_r)
    v = t.w_delay.conj().T @ r1.freq / np.sqrt(t.w_delay.shape[0])
    w = t.w_doppler.conj().T @ r1.time / np.sqrt(t.w_doppler.shape[0])
    return np.einsum("a,c,n->acn", u, v, w)


@dataclass(frozen=True)
class ExtensionPair:
    """Square-transform extensions of the beam-domain channel."""

    delay_ext: np.ndarray         # (A, N_c, N_f)
    delay_doppler_ext: np.ndarray  # (A, N_c, N_t)


def extensions(h: np.ndarray, t: TransformSet) -> ExtensionPair:
    """Delay and delay-Doppler extensions of an SFT-domain tensor.

    Both use the square delay transform; the second swaps the Doppler
    projection for its square extension as well.
    """
    _check_sft_shape(h, t)
    base = mode_product(t.w_angle_upa.conj().T, h, 0)
    base = mode_product(t.w_delay_full.conj().T, base, 1)
    delay_ext = mode_product(t.w_doppler.conj().T, base, 2) / t.scale
    delay_doppler_ext = mode_product(t.w_doppler_full.conj().T, base, 2) / t.scale
    return ExtensionPair(delay_ext=delay_ext, delay_doppler_ext=delay_doppler_ext)
