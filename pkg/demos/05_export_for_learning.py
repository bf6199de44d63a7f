"""Export a train/test dataset for the learning stage and read it back.

The export writes the binary tensor container plus a JSON manifest;
the learning package consumes only these files.  Rebuilding with the
same seed is byte-identical.
"""

import json
import tempfile
from pathlib import Path

from tbf.cli import main
from tbf.store import read_manifest, read_tensor

config = {
    "geometry": {"m_rows": 4, "m_cols": 4, "d_row": 0.02585, "d_col": 0.02585,
                 "wavelength": 0.0517},
    "ofdm": {"n_subcarriers": 128, "cp_length": 16, "subcarrier_spacing": 480e3,
             "slots_per_frame": 4, "symbols_per_slot": 2},
    "scene": {"n_scatterers": 12, "extent": 5.0, "bs_height": 8.0,
              "shell": [1.0, 1.6], "scatterer_heights": [1.0, 6.0]},
    "dataset": {"spacing": 1.0, "floors": [1.5], "heading_policy": "single",
                "n_test": 50, "paired": True},
}

with tempfile.TemporaryDirectory() as tmp:
    cfg_path = Path(tmp) / "config.json"
    cfg_path.write_text(json.dumps(config))
    out = Path(tmp) / "export"
    code = main(["export", "--config", str(cfg_path), "--seed", "21",
                 "--out", str(out)])
    assert code == 0

    train = read_manifest(out / "train" / "manifest.json")
    test = read_manifest(out / "test" / "manifest.json")
    print(f"train records: {len(train['records'])}")
    print(f"test records:  {len(test['records'])} "
          f"(paired frames for motion evaluation)")

    rec = train["records"][0]
    x_ad = read_tensor(out / "train" / rec["blobs"]["x_ad"])
    x_do = read_tensor(out / "train" / rec["blobs"]["x_do"])
    print(f"first record at {rec['position_m']}, heading class "
          f"{rec['direction_class']}")
    print(f"x_ad shape {x_ad.shape} (sum {x_ad.sum():.6f}), "
          f"x_do shape {x_do.shape} (sum {x_do.sum():.6f})")
    paired = [r for r in test["records"] if r.get("frame") == 1]
    print(f"frame-1 mates in the test split: {len(paired)}")
