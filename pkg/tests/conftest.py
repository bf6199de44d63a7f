import math

import numpy as np
import pytest

from tbf import ArrayGeometry, MultipathSet, OfdmConfig, PathParams
from tbf.analysis import path_from_grid_coords


@pytest.fixture
def tiny_geom():
    return ArrayGeometry(m_rows=2, m_cols=2, d_row=0.5, d_col=0.5, wavelength=1.0)


@pytest.fixture
def tiny_cfg():
    return OfdmConfig(n_subcarriers=8, cp_length=4, subcarrier_spacing=15e3,
                      slots_per_frame=4, symbols_per_slot=2)


def random_offgrid_set(rng, geom, cfg, n_paths=3):
    """Arbitrary valid paths, generically off-grid."""
    paths = []
    for _ in range(n_paths):
        paths.append(PathParams(
            gain_variance=float(rng.uniform(0.2, 1.0)),
            elevation=float(rng.uniform(0.4, 2.7)),
            azimuth=float(rng.uniform(0.1, 3.0)),
            delay=float(rng.uniform(0.0, 0.9 * cfg.cp_duration)),
            doppler=float(rng.uniform(0.95 * cfg.doppler_min, 0.95 * cfg.doppler_max)),
        ))
    return MultipathSet(paths=tuple(paths))


def random_ongrid_set(rng, geom, cfg, n_paths=3):
    """Paths whose every parameter sits exactly on the beam grid."""
    paths = []
    for _ in range(n_paths):
        col = int(rng.integers(0, geom.m_cols))
        lam = geom.wavelength
        cos_el = (col - geom.m_cols / 2) * lam / (geom.m_cols * geom.d_row)
        sin_el = math.sqrt(max(0.0, 1.0 - cos_el ** 2))
        half = geom.m_rows * geom.d_col / lam * sin_el
        lo = int(np.ceil(geom.m_rows / 2 - half))
        hi = int(np.floor(geom.m_rows / 2 + half))
        row = int(rng.integers(lo, hi + 1))
        delay = int(rng.integers(0, cfg.cp_length))
        dopp = int(rng.integers(0, cfg.slots_per_frame))
        paths.append(path_from_grid_coords(col, row, delay, dopp,
                                           float(rng.uniform(0.2, 1.0)), geom, cfg))
    return MultipathSet(paths=tuple(paths))


def dense_tb_oracle(h, geom, cfg):
    """Brute-force beam projection by explicit summation (test oracle).

    Independent of the library path: builds each output element from
    the transform entry formulas directly.
    """
    m_c, m_r = geom.m_cols, geom.m_rows
    n_c, n_g = cfg.n_subcarriers, cfg.cp_length
    n_t, n_f = cfg.symbols_per_frame, cfg.slots_per_frame
    n_s, n_first = cfg.symbols_per_slot, cfg.first_symbol_index
    out = np.zeros((m_c * m_r, n_g, n_f), dtype=complex)
    scale = 1.0 / math.sqrt(m_c * m_r * n_c * n_t) / math.sqrt(m_c * m_r * n_c * n_t)
    for bc in range(m_c):
        for br in range(m_r):
            for bd in range(n_g):
                for bf in range(n_f):
                    total = 0.0 + 0.0j
                    for a in range(m_c * m_r):
                        ac, ar = divmod(a, m_r)
                        wa = (np.exp(2j * np.pi * ac * (2 * bc - m_c) / (2 * m_c))
                              * np.exp(2j * np.pi * ar * (2 * br - m_r) / (2 * m_r)))
                        for c in range(n_c):
                            wd = np.exp(2j * np.pi * c * bd / n_c)
                            for n in range(n_t):
                                wf = np.exp(-2j * np.pi * (n_first + n / n_s)
                                            * (2 * bf - n_f) / (2 * n_f))
                                total += wa * wd * wf * h[a, c, n]
                    out[bc * m_r + br, bd, bf] = total * scale
    return out
