"""Synthetic single-bounce multipath scene and dataset construction.

Scatterers are placed around the sampling area; each one contributes a
path whose delay comes from the total geometric length, whose arrival
angles come from the scatterer-to-array direction, and whose Doppler
shift is the projection of the terminal velocity onto the departure
direction.  Powers follow a path-loss law and are normalized per set.
"""

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .analysis import grid_coords, path_from_grid_coords
from .channel import ArrayGeometry, MultipathSet, OfdmConfig, PathParams
from .errors import ParameterError, SceneError
from .beamspace import transform_matrices
from .fingerprint import Tbf, tbf_exact, tbf_monte_carlo
from .preprocess import preprocess

SPEED_OF_LIGHT = 299_792_458.0


@dataclass(frozen=True)
class Scene:
    bs_position: np.ndarray
    scatterers: np.ndarray          # (n, 3)
    extent: float                   # sampling-square half width, meters
    path_loss_exponent: float
    seed: int
    include_los: bool

    def __post_init__(self):
        if len(self.scatterers) == 0 and not self.include_los:
            raise SceneError("need at least one scatterer or a LOS path")
        if len(self.scatterers) and np.max(np.abs(self.scatterers[:, :2])) > 3 * self.extent:
            raise SceneError("scatterers must stay within 3x the extent")


@dataclass(frozen=True)
class UtState:
    position: np.ndarray
    speed: float = 5.0 / 3.6        # 5 km/h
    heading: float = 0.0

    def __post_init__(self):
        if self.speed < 0:
            raise ParameterError("speed must be >= 0")
        object.__setattr__(self, "position", np.asarray(self.position, dtype=float))
        object.__setattr__(self, "heading", float(self.heading) % (2 * math.pi))


def build_scene(n_scatterers: int = 12, extent: float = 20.0,
                bs_height: float = 25.0, seed: int = 0,
                include_los: bool = False, path_loss_exponent: float = 2.0,
                shell: tuple = (1.0, 1.5), scatterer_heights: tuple = (1.0, 15.0)) -> Scene:
    """Place scatterers uniformly in an annular shell around the area."""
    if n_scatterers == 0 and not include_los:
        raise SceneError("need at least one scatterer or a LOS path")
    rng = np.random.default_rng(np.random.SeedSequence(entropy=(seed, 0)))
    radius = extent * rng.uniform(shell[0], shell[1], size=n_scatterers)
    angle = rng.uniform(0.0, 2 * math.pi, size=n_scatterers)
    height = rng.uniform(*scatterer_heights, size=n_scatterers)
    pts = np.stack([radius * np.cos(angle), radius * np.sin(angle), height], axis=1)
    return Scene(bs_position=np.array([0.0, 0.0, bs_height]),
                 scatterers=pts, extent=extent,
                 path_loss_exponent=path_loss_exponent,
                 seed=seed, include_los=include_los)


def _arrival_angles(toward: np.ndarray) -> tuple[float, float]:
    """Elevation/azimuth of a unit direction seen from the planar array."""
    u = toward / np.linalg.norm(toward)
    elevation = math.acos(min(1.0, max(-1.0, u[2])))
    sin_el = math.sin(elevation)
    if sin_el < 1e-12:
        return elevation, math.pi / 2
    cos_az = min(1.0, max(-1.0, u[0] / sin_el))
    return elevation, math.acos(cos_az)


def multipath_for(scene: Scene, ut: UtState, geom: ArrayGeometry,
                  cfg: OfdmConfig) -> MultipathSet:
    """Map a terminal state to its single-bounce path parameters.

    Paths whose delay exceeds the cyclic prefix are dropped with a
    warning; an empty survivor set raises.
    """
    bs = scene.bs_position
    pos = ut.position
    velocity = ut.speed * np.array([math.cos(ut.heading), math.sin(ut.heading), 0.0])
    lam = geom.wavelength

    candidates = []
    for s in scene.scatterers:
        length = float(np.linalg.norm(pos - s) + np.linalg.norm(s - bs))
        elevation, azimuth = _arrival_angles(s - bs)
        departure = (s - pos) / np.linalg.norm(s - pos)
        doppler = float(velocity @ departure) / lam
        candidates.append((length, elevation, azimuth, doppler))
    if scene.include_los:
        length = float(np.linalg.norm(pos - bs))
        elevation, azimuth = _arrival_angles(pos - bs)
        departure = (bs - pos) / np.linalg.norm(bs - pos)
        doppler = float(velocity @ departure) / lam
        candidates.append((length, elevation, azimuth, doppler))

    kept, dropped = [], 0
    for length, elevation, azimuth, doppler in candidates:
        tau = length / SPEED_OF_LIGHT
        if tau >= cfg.cp_duration:
            dropped += 1
            continue
        kept.append((length, elevation, azimuth, tau, doppler))
    if dropped:
        warnings.warn(f"dropped {dropped} paths beyond the cyclic prefix",
                      stacklevel=2)
    if not kept:
        raise SceneError("every path violated the cyclic-prefix bound")

    powers = np.array([length ** -scene.path_loss_exponent for length, *_ in kept])
    powers /= powers.sum()
    paths = [PathParams(gain_variance=float(p), elevation=el, azimuth=az,
                        delay=tau, doppler=nu)
             for p, (_, el, az, tau, nu) in zip(powers, kept)]
    for path in paths:
        path.validate(cfg)
    return MultipathSet(paths=tuple(paths))


def snap_multipath(mp: MultipathSet, geom: ArrayGeometry, cfg: OfdmConfig) -> MultipathSet:
    """Round every path onto the nearest beam-grid cell (theorem-grade)."""
    snapped = []
    for path in mp:
        col, row, delay, dopp = grid_coords(path, geom, cfg)
        col = round(col) % geom.m_cols
        delay = min(round(delay), cfg.cp_length - 1)
        dopp = min(max(round(dopp), 0), cfg.slots_per_frame - 1)
        # nearest feasible row bin given the snapped elevation
        lam = geom.wavelength
        cos_el = (col - geom.m_cols / 2) * lam / (geom.m_cols * geom.d_row)
        sin_el = math.sqrt(max(0.0, 1.0 - cos_el * cos_el))
        half_span = geom.m_rows * geom.d_col / lam * sin_el
        lo = math.ceil(geom.m_rows / 2 - half_span)
        hi = math.floor(geom.m_rows / 2 + half_span)
        if lo > hi:
            raise ParameterError("no feasible row bin at the snapped elevation")
        row = min(max(round(row), lo), hi)
        snapped.append(path_from_grid_coords(col, row, delay, dopp,
                                             path.gain_variance, geom, cfg))
    return MultipathSet(paths=tuple(snapped))


def direction_class(heading: float) -> int:
    """16-way heading class; class i covers [(2i-1)pi/16, (2i+1)pi/16)."""
    width = math.pi / 8
    return int(math.floor((heading + width / 2) / width)) % 16


CLASS_CENTERS = [i * math.pi / 8 for i in range(16)]


@dataclass(frozen=True)
class FingerprintRecord:
    """One database entry: labels plus fingerprint and its projections."""

    record_id: str
    position: np.ndarray
    heading: float
    speed: float
    snr_db: float | None
    tbf: Tbf
    x_ad: np.ndarray
    x_ma: np.ndarray
    x_do: np.ndarray

    @property
    def direction_class(self) -> int:
        return direction_class(self.heading)


def grid_positions(extent: float, spacing: float, floors) -> np.ndarray:
    """Regular XY grid over the sampling square at each floor height."""
    n = int(round(2 * extent / spacing)) + 1
    axis = -extent + spacing * np.arange(n)
    out = [(x, y, z) for z in floors for x in axis for y in axis]
    return np.array(out)


def _record_for(scene, pos, heading, speed, geom, cfg, snr_db, n_draws,
                gamma, snap, seed, record_id, t=None) -> FingerprintRecord:
    ut = UtState(position=pos, speed=speed, heading=heading)
    mp = multipath_for(scene, ut, geom, cfg)
    if snap:
        mp = snap_multipath(mp, geom, cfg)
    if n_draws > 0:
        f = tbf_monte_carlo(mp, geom, cfg, n_draws=n_draws, seed=seed,
                            snr_db=snr_db, source_id=record_id, t=t)
    else:
        f = tbf_exact(mp, geom, cfg, source_id=record_id, t=t)
    pre = preprocess(f, gamma)
    return FingerprintRecord(record_id=record_id, position=np.asarray(pos, float),
                             heading=float(heading) % (2 * math.pi), speed=speed,
                             snr_db=snr_db, tbf=f, x_ad=pre.x_ad, x_ma=pre.x_ma,
                             x_do=pre.x_do)


def build_dataset(scene: Scene, geom: ArrayGeometry, cfg: OfdmConfig,
                  spacing: float = 1.0, floors=(1.5,), heading_policy: str = "single",
                  speed: float = 5.0 / 3.6, snr_db: float | None = None,
                  n_draws: int = 0, gamma: float = 0.05, snap: bool = False,
                  seed: int = 0, positions=None) -> list[FingerprintRecord]:
    """One record per (grid point, heading).

    ``heading_policy``: "single" draws one heading per point (the
    regression layout); "all16" emits all sixteen class centers per
    point (the classification layout).  Record d's randomness depends
    only on (seed, d), so construction order or chunking cannot change
    the output.
    """
    if positions is None:
        positions = grid_positions(scene.extent, spacing, floors)
    if len(positions) == 0:
        raise ParameterError("empty sampling grid")
    if heading_policy not in ("single", "all16"):
        raise ParameterError(f"unknown heading policy {heading_policy!r}")

    t = transform_matrices(geom, cfg)
    records = []
    idx = 0
    for p_i, pos in enumerate(positions):
        if heading_policy == "single":
            rng = np.random.default_rng(np.random.SeedSequence(entropy=(seed, p_i, 2)))
            headings = [rng.uniform(0.0, 2 * math.pi)]
        else:
            headings = CLASS_CENTERS
        for heading in headings:
            rec_seed = int(np.random.SeedSequence(entropy=(seed, idx, 4)).generate_state(1)[0])
            rec = _record_for(scene, pos, heading, speed, geom, cfg, snr_db,
                              n_draws, gamma, snap, seed=rec_seed,
                              record_id=f"r{idx:06d}", t=t)
            records.append(rec)
            idx += 1
    return records


def paired_positions(record: FingerprintRecord, cfg: OfdmConfig) -> np.ndarray:
    """Terminal position one frame later, moving along its heading."""
    frame = cfg.symbols_per_frame * cfg.symbol_duration
    step = record.speed * frame
    return record.position + step * np.array(
        [math.cos(record.heading), math.sin(record.heading), 0.0])
