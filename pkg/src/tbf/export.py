"""Dataset serialization: fingerprint records to blobs plus manifest."""

import math
from dataclasses import asdict
from pathlib import Path

from .channel import ArrayGeometry, OfdmConfig
from .scene import FingerprintRecord
from .store import MANIFEST_SCHEMA_VERSION, write_manifest, write_tensor


def write_dataset(records: list[FingerprintRecord], out_dir,
                  geom: ArrayGeometry, cfg: OfdmConfig, scene_seed: int,
                  extra: dict | None = None, single_precision: bool = False,
                  record_extras: dict | None = None) -> Path:
    """Write one manifest plus per-record tensor blobs under ``out_dir``.

    Returns the manifest path.  Output depends only on the records, so
    rebuilding from the same seed is byte-identical.
    """
    out = Path(out_dir)
    blob_dir = out / "blobs"
    blob_dir.mkdir(parents=True, exist_ok=True)
    rows = []
    for rec in records:
        names = {}
        arrays = {"tbf": rec.tbf.data, "x_ad": rec.x_ad,
                  "x_ma": rec.x_ma, "x_do": rec.x_do}
        for key, arr in arrays.items():
            if single_precision:
                arr = arr.astype("<f4")
            name = f"blobs/{rec.record_id}_{key}.tbt"
            write_tensor(out / name, arr)
            names[key] = name
        row = {
            "id": rec.record_id,
            "position_m": [float(x) for x in rec.position],
            "direction_class": rec.direction_class,
            "heading_rad": float(rec.heading),
            "speed_mps": float(rec.speed),
            "snr_db": None if rec.snr_db is None or math.isinf(rec.snr_db)
                      else float(rec.snr_db),
            "blobs": names,
        }
        if record_extras and rec.record_id in record_extras:
            row.update(record_extras[rec.record_id])
        rows.append(row)
    doc = {
        "schema_version": MANIFEST_SCHEMA_VERSION,
        "geometry": asdict(geom),
        "ofdm": asdict(cfg),
        "scene_seed": scene_seed,
        "single_precision": single_precision,
        "records": rows,
    }
    if extra:
        doc.update(extra)
    manifest = out / "manifest.json"
    write_manifest(manifest, doc)
    return manifest
