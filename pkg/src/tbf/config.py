"""JSON-backed run configuration for the command-line tools.

One document with ``geometry``, ``ofdm``, ``scene``, ``dataset`` and
``wknn`` sections; every field has a desk-scale default and flags
override individual values.  See docs/format.md for the schema.
"""

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .channel import ArrayGeometry, OfdmConfig
from .errors import ParameterError

CARRIER_WAVELENGTH = 299_792_458.0 / 5.8e9   # 5.8 GHz carrier


@dataclass
class SceneSection:
    n_scatterers: int = 12
    extent: float = 20.0
    bs_height: float = 25.0
    include_los: bool = False
    path_loss_exponent: float = 2.0
    shell: tuple = (1.0, 1.5)
    scatterer_heights: tuple = (1.0, 15.0)


@dataclass
class DatasetSection:
    spacing: float = 1.0
    floors: tuple = (1.5,)
    heading_policy: str = "single"
    speed_kmh: float = 5.0
    snr_db: float | None = None
    n_draws: int = 0                 # 0 = exact closed form
    gamma: float = 0.05
    snap_to_grid: bool = False
    n_test: int = 200
    paired: bool = False

    @property
    def speed_mps(self) -> float:
        return self.speed_kmh / 3.6


@dataclass
class WknnSection:
    k: int = 5
    weighting: str = "inverse-distance"
    n_queries: int = 100
    snr_sweep: tuple = (0.0, 5.0, 10.0, 15.0, 20.0)
    sweep_draws: int = 16


@dataclass
class RunConfig:
    geometry: ArrayGeometry = field(default_factory=lambda: ArrayGeometry(
        m_rows=8, m_cols=8, d_row=CARRIER_WAVELENGTH / 2,
        d_col=CARRIER_WAVELENGTH / 2, wavelength=CARRIER_WAVELENGTH))
    ofdm: OfdmConfig = field(default_factory=lambda: OfdmConfig(
        n_subcarriers=256, cp_length=32, subcarrier_spacing=240e3,
        slots_per_frame=8, symbols_per_slot=7))
    scene: SceneSection = field(default_factory=SceneSection)
    dataset: DatasetSection = field(default_factory=DatasetSection)
    wknn: WknnSection = field(default_factory=WknnSection)

    def to_dict(self) -> dict:
        return {
            "geometry": asdict(self.geometry),
            "ofdm": asdict(self.ofdm),
            "scene": asdict(self.scene),
            "dataset": asdict(self.dataset),
            "wknn": asdict(self.wknn),
        }


_SECTIONS = {
    "geometry": ArrayGeometry,
    "ofdm": OfdmConfig,
    "scene": SceneSection,
    "dataset": DatasetSection,
    "wknn": WknnSection,
}
_TUPLE_FIELDS = {"floors", "shell", "scatterer_heights", "snr_sweep"}


def config_from_dict(doc: dict) -> RunConfig:
    cfg = RunConfig()
    for name, cls in _SECTIONS.items():
        section = doc.get(name)
        if section is None:
            continue
        if not isinstance(section, dict):
            raise ParameterError(f"config section {name!r} must be an object")
        current = asdict(getattr(cfg, name))
        unknown = set(section) - set(current)
        if unknown:
            raise ParameterError(f"unknown keys in config.{name}: {sorted(unknown)}")
        current.update(section)
        for key in _TUPLE_FIELDS & set(current):
            current[key] = tuple(current[key])
        setattr(cfg, name, cls(**current))
    return cfg


def load_config(path) -> RunConfig:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ParameterError(f"config is not valid JSON: {exc}") from exc
    return config_from_dict(doc)
