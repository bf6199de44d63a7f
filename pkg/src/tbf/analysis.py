"""Collinearity, concentration predictions, and numerical property checks.

Everything here is a pure numerical verification: bin predictions for
where each path's power lands, the normalized fingerprint inner
product, the Dirichlet kernel governing off-grid leakage, and the
sum-preservation / extension identities used by the asymptotic
arguments.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .beamspace import _doppler_matrix, extensions, mode_product, sft_to_tb, transform_matrices
from .channel import ArrayGeometry, MultipathSet, OfdmConfig, PathParams, assemble_sft, steering_vectors
from .errors import DegenerateInputError, ParameterError
from .fingerprint import Tbf, sftf_inner_closed, tbf_exact

ON_GRID_TOL = 1e-9


def dirichlet(length: int, x) -> np.ndarray | float:
    """sin(L*pi*x) / (L*sin(pi*x)) with the limit value at integer x."""
    if length < 1:
        raise ParameterError("length must be >= 1")
    x = np.asarray(x, dtype=float)
    nearest = np.round(x)
    at_integer = np.abs(x - nearest) < 1e-12
    safe = np.where(at_integer, 0.5, x)  # dummy away from singularities
    out = np.sin(length * np.pi * safe) / (length * np.sin(np.pi * safe))
    # parity of (L-1)*m decides the sign of the removable singularity
    limit = np.where((nearest.astype(np.int64) * (length - 1)) % 2 == 0, 1.0, -1.0)
    out = np.where(at_integer, limit, out)
    return out if out.ndim else float(out)


def collinearity(f1: Tbf, f2: Tbf) -> float:
    """Normalized elementwise inner product of two fingerprints, in [0, 1]."""
    a, b = f1.data, f2.data
    if a.shape != b.shape:
        raise DegenerateInputError(f"shape mismatch {a.shape} vs {b.shape}")
    na = float(np.linalg.norm(a))
    nb = float(np.linalg.norm(b))
    if na == 0.0 or nb == 0.0:
        raise DegenerateInputError("collinearity of a zero fingerprint is undefined")
    return float(np.sum(a * b) / (na * nb))


@dataclass(frozen=True)
class PathBins:
    """Predicted beam-domain location of one path."""

    angle_bin: int
    delay_bin: int
    doppler_bin: int
    on_grid_angle: bool
    on_grid_delay: bool
    on_grid_doppler: bool
    gain_variance: float

    @property
    def on_grid(self) -> bool:
        return self.on_grid_angle and self.on_grid_delay and self.on_grid_doppler


@dataclass(frozen=True)
class Theorem1Prediction:
    paths: tuple


def grid_coords(path: PathParams, geom: ArrayGeometry, cfg: OfdmConfig):
    """Continuous bin coordinates (col, row, delay, doppler) of a path."""
    lam = geom.wavelength
    col = geom.m_cols * geom.d_row / lam * math.cos(path.elevation) + geom.m_cols / 2
    row = (geom.m_rows * geom.d_col / lam
           * math.sin(path.elevation) * math.cos(path.azimuth) + geom.m_rows / 2)
    delay = path.delay / cfg.sample_interval
    dopp = cfg.symbols_per_frame * path.doppler * cfg.symbol_duration + cfg.slots_per_frame / 2
    return col, row, delay, dopp


def path_from_grid_coords(col: float, row: float, delay: float, dopp: float,
                          gain_variance: float, geom: ArrayGeometry,
                          cfg: OfdmConfig) -> PathParams:
    """Inverse of :func:`grid_coords`: synthesize a path at bin coordinates."""
    lam = geom.wavelength
    cos_el = (col - geom.m_cols / 2) * lam / (geom.m_cols * geom.d_row)
    if abs(cos_el) > 1:
        raise ParameterError(f"column coordinate {col} maps outside [0, pi]")
    elevation = math.acos(cos_el)
    g = (row - geom.m_rows / 2) * lam / (geom.m_rows * geom.d_col)
    sin_el = math.sin(elevation)
    if abs(g) > sin_el + 1e-12:
        raise ParameterError(f"row coordinate {row} infeasible at elevation {elevation}")
    azimuth = math.acos(min(1.0, max(-1.0, g / sin_el))) if sin_el > 0 else math.pi / 2
    tau = delay * cfg.sample_interval
    nu = (dopp - cfg.slots_per_frame / 2) / (cfg.symbols_per_frame * cfg.symbol_duration)
    return PathParams(gain_variance=gain_variance, elevation=elevation,
                      azimuth=azimuth, delay=tau, doppler=nu)


def _nearest_bin(coord: float, limit: int, wrap: bool) -> tuple[int, bool]:
    nearest = int(round(coord))
    on_grid = abs(coord - nearest) < ON_GRID_TOL
    if wrap:
        return nearest % limit, on_grid
    if not (-0.5 + 1e-12 < coord < limit - 0.5 + 1e-12):
        raise ParameterError(
            f"bin coordinate {coord} outside [0, {limit}) "
            "(parameter beyond the CP or Doppler bounds)")
    return min(nearest, limit - 1), on_grid


def theorem1_indices(mp: MultipathSet, geom: ArrayGeometry,
                     cfg: OfdmConfig) -> Theorem1Prediction:
    """Nearest-integer beam bins for every path, with on-grid flags."""
    rows = []
    for path in mp:
        col, row, delay, dopp = grid_coords(path, geom, cfg)
        b_col, og_col = _nearest_bin(col, geom.m_cols, wrap=True)
        b_row, og_row = _nearest_bin(row, geom.m_rows, wrap=True)
        b_delay, og_delay = _nearest_bin(delay, cfg.cp_length, wrap=False)
        b_dopp, og_dopp = _nearest_bin(dopp, cfg.slots_per_frame, wrap=False)
        rows.append(PathBins(
            angle_bin=b_col * geom.m_rows + b_row,
            delay_bin=b_delay,
            doppler_bin=b_dopp,
            on_grid_angle=og_col and og_row,
            on_grid_delay=og_delay,
            on_grid_doppler=og_dopp,
            gain_variance=path.gain_variance,
        ))
    return Theorem1Prediction(paths=tuple(rows))


@dataclass(frozen=True)
class ConcentrationReport:
    """Energy captured at the predicted bins of a fingerprint."""

    per_path: tuple          # F[bin_p] / var_p
    total_fraction: float    # sum over distinct predicted bins / sum(F)

    def as_dict(self) -> dict:
        return {"total_fraction": self.total_fraction,
                **{f"path{i}_fraction": f for i, f in enumerate(self.per_path)}}


def theorem1_check(f: Tbf, pred: Theorem1Prediction) -> ConcentrationReport:
    """Measure how much of each path's power sits in its predicted bin."""
    total = f.total
    if total <= 0:
        raise DegenerateInputError("cannot assess a zero fingerprint")
    per_path = []
    seen = set()
    in_bins = 0.0
    for row in pred.paths:
        idx = (row.angle_bin, row.delay_bin, row.doppler_bin)
        value = float(f.data[idx])
        per_path.append(value / row.gain_variance if row.gain_variance > 0 else 0.0)
        if idx not in seen:
            seen.add(idx)
            in_bins += value
    return ConcentrationReport(per_path=tuple(per_path),
                               total_fraction=in_bins / total)


def window_energy(power: np.ndarray, lo: float, hi: float, wrap: bool) -> float:
    """Sum power over integer bins in [lo, hi); wrap-around optional."""
    n = power.size
    idx = np.arange(math.ceil(lo - 1e-12), math.ceil(hi - 1e-12))
    if wrap:
        return float(power[idx % n].sum())
    idx = idx[(idx >= 0) & (idx < n)]
    return float(power[idx].sum())


def _beam_powers(path: PathParams, geom: ArrayGeometry, cfg: OfdmConfig):
    """1-D beam power profiles (col, row, delay-full, doppler) of a path.

    The angle and delay profiles are inverse DFTs of the steering
    vectors (the half-spectrum shift of the angle transform becomes a
    per-element phase), which avoids materializing large transforms
    during refinement sweeps.
    """
    sv = steering_vectors(path, geom, cfg)
    shift_c = np.exp(-1j * np.pi * np.arange(geom.m_cols))
    shift_r = np.exp(-1j * np.pi * np.arange(geom.m_rows))
    p_col = np.abs(np.fft.ifft(sv.f_col * shift_c)) ** 2
    p_row = np.abs(np.fft.ifft(sv.f_row * shift_r)) ** 2
    p_delay = np.abs(np.fft.ifft(sv.f_freq)) ** 2
    n_t = cfg.symbols_per_frame
    w_dopp = _doppler_matrix(n_t, cfg.slots_per_frame, cfg.symbols_per_slot,
                             cfg.first_symbol_index)
    p_dopp = np.abs(w_dopp.conj().T @ sv.f_time) ** 2 / n_t
    return p_col, p_row, p_delay, p_dopp


def _scaled_setup(geom: ArrayGeometry, cfg: OfdmConfig, axis: str, factor: int):
    if axis == "angle":
        geom = ArrayGeometry(m_rows=geom.m_rows * factor, m_cols=geom.m_cols * factor,
                             d_row=geom.d_row, d_col=geom.d_col,
                             wavelength=geom.wavelength)
    elif axis == "delay":
        cfg = OfdmConfig(n_subcarriers=cfg.n_subcarriers * factor,
                         cp_length=cfg.cp_length * factor,
                         subcarrier_spacing=cfg.subcarrier_spacing,
                         slots_per_frame=cfg.slots_per_frame,
                         symbols_per_slot=cfg.symbols_per_slot,
                         first_symbol_index=cfg.first_symbol_index)
    elif axis == "doppler":
        cfg = OfdmConfig(n_subcarriers=cfg.n_subcarriers,
                         cp_length=cfg.cp_length,
                         subcarrier_spacing=cfg.subcarrier_spacing,
                         slots_per_frame=cfg.slots_per_frame * factor,
                         symbols_per_slot=cfg.symbols_per_slot,
                         first_symbol_index=cfg.first_symbol_index)
    else:
        raise ParameterError(f"unknown axis {axis!r}")
    return geom, cfg


def concentration_sweep(path: PathParams, geom: ArrayGeometry, cfg: OfdmConfig,
                        axis: str, n_doublings: int = 3) -> list[float]:
    """Concentration fractions of one path across grid refinements.

    Doubling the ``axis`` dimension halves its bin width around the
    unchanged physical parameter (the subcarrier spacing stays fixed on
    the delay axis, so the delay grid T_s refines; the Doppler axis
    doubles the slot count at fixed slot layout).  The fraction at step
    k is the energy within half a *base* bin width of the true
    parameter, i.e. over the 2^k refined bins nearest it, so it
    measures how sharply the leakage collapses onto the predicted
    location.  At k = 0 this is the nearest-bin fraction.
    """
    col0, row0, delay0, dopp0 = grid_coords(path, geom, cfg)
    fractions = []
    for k in range(n_doublings + 1):
        factor = 1 << k
        half = factor / 2.0
        g2, c2 = _scaled_setup(geom, cfg, axis, factor)
        p_col, p_row, p_delay, p_dopp = _beam_powers(path, g2, c2)
        if axis == "angle":
            frac = (window_energy(p_col, factor * col0 - half,
                                  factor * col0 + half, wrap=True)
                    * window_energy(p_row, factor * row0 - half,
                                    factor * row0 + half, wrap=True))
        elif axis == "delay":
            frac = window_energy(p_delay, factor * delay0 - half,
                                 factor * delay0 + half, wrap=True)
        else:
            frac = window_energy(p_dopp, factor * dopp0 - half,
                                 factor * dopp0 + half, wrap=False)
        fractions.append(frac)
    return fractions


@dataclass(frozen=True)
class CollinearityReport:
    xi_tbf: float
    xi_sftf: float

    @property
    def abs_gap(self) -> float:
        return abs(self.xi_tbf - self.xi_sftf)

    def as_dict(self) -> dict:
        return {"xi_tbf": self.xi_tbf, "xi_sftf": self.xi_sftf,
                "abs_gap": self.abs_gap}


def theorem2_check(mp1: MultipathSet, mp2: MultipathSet, geom: ArrayGeometry,
                   cfg: OfdmConfig) -> CollinearityReport:
    """Compare fingerprint collinearity against the covariance collinearity.

    The covariance side uses the closed-form path-overlap sums, so no
    6-way tensor is materialized here.
    """
    xi_tbf = collinearity(tbf_exact(mp1, geom, cfg), tbf_exact(mp2, geom, cfg))
    trace, n1, n2 = sftf_inner_closed(mp1, mp2, geom, cfg)
    if n1 == 0.0 or n2 == 0.0:
        raise DegenerateInputError("covariance of a zero-power set is degenerate")
    return CollinearityReport(xi_tbf=xi_tbf, xi_sftf=trace / (n1 * n2))


def _dft_unitary(n: int) -> np.ndarray:
    i = np.arange(n)[:, None]
    j = np.arange(n)[None, :]
    return np.exp(-2j * np.pi * i * j / n) / np.sqrt(n)


@dataclass(frozen=True)
class Lemma5Report:
    unitary_dev: float
    nonunitary_dev: float

    def as_dict(self) -> dict:
        return {"unitary_dev": self.unitary_dev,
                "nonunitary_dev": self.nonunitary_dev}


def lemma5_check(seed: int, dims=(4, 4, 4)) -> Lemma5Report:
    """Sum preservation of Hadamard inner products under unitary mode maps.

    Checks Sum{(O o_n T1) . conj(O o_n T2)} == Sum{T1 . conj(T2)} along
    every mode with a DFT unitary, and reports a non-unitary negative
    control alongside.
    """
    if max(dims) > 16:
        raise ParameterError("lemma check is meant for small dims (<= 16)")
    rng = np.random.default_rng(seed)
    t1 = rng.standard_normal(dims) + 1j * rng.standard_normal(dims)
    t2 = rng.standard_normal(dims) + 1j * rng.standard_normal(dims)
    target = np.sum(t1 * t2.conj())

    def deviation(make_matrix):
        worst = 0.0
        for mode, n in enumerate(dims):
            o = make_matrix(n)
            lhs = np.sum(mode_product(o, t1, mode) * mode_product(o, t2, mode).conj())
            worst = max(worst, abs(lhs - target))
        return worst

    bad = lambda n: _dft_unitary(n) * (1.0 + 0.3 * np.arange(n)[:, None] / n)
    return Lemma5Report(unitary_dev=deviation(_dft_unitary),
                        nonunitary_dev=deviation(bad))


@dataclass(frozen=True)
class Lemma4Report:
    delay_dev: float
    doppler_dev: float

    def as_dict(self) -> dict:
        return {"delay_dev": self.delay_dev, "doppler_dev": self.doppler_dev}


def lemma4_check(mp: MultipathSet, geom: ArrayGeometry, cfg: OfdmConfig) -> Lemma4Report:
    """Deviation of the square-transform extensions from their limits.

    delay_dev: Frobenius distance between the delay extension and the
    zero-padded beam tensor.  doppler_dev: distance between the
    slot-sampled columns of the delay-Doppler extension and the delay
    extension.  Both vanish for on-grid paths and shrink with the
    subcarrier count off-grid.
    """
    t = transform_matrices(geom, cfg)
    h = assemble_sft(mp, np.ones(len(mp)), geom, cfg)
    h_tb = sft_to_tb(h, t)
    ext = extensions(h, t)
    padded = np.zeros_like(ext.delay_ext)
    padded[:, : cfg.cp_length, :] = h_tb
    delay_dev = float(np.linalg.norm(ext.delay_ext - padded))
    sampled = ext.delay_doppler_ext[:, :, :: cfg.symbols_per_slot]
    doppler_dev = float(np.linalg.norm(sampled - ext.delay_ext))
    return Lemma4Report(delay_dev=delay_dev, doppler_dev=doppler_dev)


def format_kv(items: dict) -> str:
    """Line-oriented key=value rendering for verification reports."""
    return "\n".join(f"{k}={v}" for k, v in items.items()) + "\n"
