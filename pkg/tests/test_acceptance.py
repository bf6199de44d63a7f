"""Acceptance suite: one test per release criterion, one printed verdict each.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the verdict lines.
"""

import json
import math
import time

import numpy as np
import pytest

import tbf
from tbf import (
    ArrayGeometry,
    MultipathSet,
    OfdmConfig,
    PathParams,
    UtState,
    build_dataset,
    build_scene,
    lemma4_check,
    lemma5_check,
    multipath_for,
    snap_multipath,
    tbf_exact,
    tbf_monte_carlo,
    theorem1_check,
    theorem1_indices,
    theorem2_check,
)
from tbf.analysis import concentration_sweep, path_from_grid_coords
from tbf.baseline import FingerprintDatabase, eval_localization, wknn_locate_many
from tbf.cli import EXIT_OK, _random_offgrid_path, main, random_ongrid_set
from tbf.config import RunConfig
from tbf.errors import (
    BadMagicError,
    TruncatedPayloadError,
    UnsupportedDtypeError,
    UnsupportedVersionError,
)
from tbf.fingerprint import sftf_inner_closed, sftf_small, sftf_trace
from tbf.preprocess import angle_delay, doppler, mask
from tbf.scene import Scene, _record_for
from tbf.store import read_tensor, write_tensor

# Criterion dims: (M_c, M_r, N_c, N_g, N_t, N_f) = (8, 8, 256, 32, 56, 8)
GEOM = ArrayGeometry(m_rows=8, m_cols=8, d_row=0.02585, d_col=0.02585,
                     wavelength=0.0517)
CFG = OfdmConfig(n_subcarriers=256, cp_length=32, subcarrier_spacing=240e3,
                 slots_per_frame=8, symbols_per_slot=7)

TINY_GEOM = ArrayGeometry(m_rows=2, m_cols=2, d_row=0.5, d_col=0.5, wavelength=1.0)
TINY_CFG = OfdmConfig(n_subcarriers=8, cp_length=4, subcarrier_spacing=15e3,
                      slots_per_frame=4, symbols_per_slot=2)

DESK_GEOM = ArrayGeometry(m_rows=4, m_cols=4, d_row=0.02585, d_col=0.02585,
                          wavelength=0.0517)
DESK_CFG = OfdmConfig(n_subcarriers=128, cp_length=16, subcarrier_spacing=480e3,
                      slots_per_frame=4, symbols_per_slot=2)


def verdict(name: str, ok: bool, detail: str = "") -> None:
    print(f"ACCEPTANCE {name}: {'PASS' if ok else 'FAIL'}"
          + (f"  ({detail})" if detail else ""))
    assert ok, f"{name}: {detail}"


def desk_scene(seed, **kw):
    base = dict(n_scatterers=12, extent=5.0, bs_height=8.0, seed=seed,
                shell=(1.0, 1.6), scatterer_heights=(1.0, 6.0))
    base.update(kw)
    return build_scene(**base)


def test_theorem1_ongrid_exactness():
    t0 = time.perf_counter()
    worst = 1.0
    for n_paths in (1, 3):
        scene = desk_scene(40 + n_paths, n_scatterers=n_paths, extent=20.0,
                           bs_height=25.0, scatterer_heights=(1.0, 15.0))
        ut = UtState(position=np.array([4.0, -6.0, 1.5]), heading=0.7)
        mp = snap_multipath(multipath_for(scene, ut, GEOM, CFG), GEOM, CFG)
        f = tbf_exact(mp, GEOM, CFG)
        rep = theorem1_check(f, theorem1_indices(mp, GEOM, CFG))
        worst = min(worst, min(rep.per_path))
    elapsed = time.perf_counter() - t0
    verdict("theorem1-ongrid",
            worst >= 1.0 - 1e-9 and elapsed < 5.0,
            f"worst fraction {worst:.12f}, {elapsed:.2f}s")


def test_theorem1_offgrid_convergence():
    rng = np.random.default_rng(7)
    ok = True
    for _ in range(20):
        path = _random_offgrid_path(rng, GEOM, CFG)
        for axis in ("angle", "delay", "doppler"):
            fr = concentration_sweep(path, GEOM, CFG, axis, n_doublings=3)
            ok &= all(b > a for a, b in zip(fr, fr[1:]))
            ok &= all(0.0 < f < 1.0 for f in fr)
    verdict("theorem1-offgrid-convergence", ok,
            "20 paths x 3 axes x 3 doublings strictly increasing")


def test_theorem2_collinearity_equivalence():
    t0 = time.perf_counter()
    worst_gap = 0.0
    worst_trace = 0.0
    for s in range(100):
        rng = np.random.default_rng((123, s))
        mp1 = random_ongrid_set(rng, TINY_GEOM, TINY_CFG)
        mp2 = random_ongrid_set(rng, TINY_GEOM, TINY_CFG)
        rep = theorem2_check(mp1, mp2, TINY_GEOM, TINY_CFG)
        worst_gap = max(worst_gap, rep.abs_gap)
        trace_cl, n1, n2 = sftf_inner_closed(mp1, mp2, TINY_GEOM, TINY_CFG)
        trace_mat = sftf_trace(sftf_small(mp1, TINY_GEOM, TINY_CFG),
                               sftf_small(mp2, TINY_GEOM, TINY_CFG)).real
        worst_trace = max(worst_trace, abs(trace_mat - trace_cl) / (n1 * n2))
    elapsed = time.perf_counter() - t0
    verdict("theorem2-equivalence",
            worst_gap <= 0.05 and worst_trace <= 1e-8 and elapsed < 30.0,
            f"gap {worst_gap:.2e}, trace err {worst_trace:.2e}, {elapsed:.1f}s")


def test_lemma5_sum_preservation():
    worst = 0.0
    control = float("inf")
    for s in range(50):
        rep = lemma5_check(seed=s, dims=(4, 4, 4))
        worst = max(worst, rep.unitary_dev)
        control = min(control, rep.nonunitary_dev)
    verdict("lemma5-preservation", worst <= 1e-10 and control > 1e-3,
            f"unitary dev {worst:.2e}, control {control:.2e}")


def test_lemma4_extensions():
    rng = np.random.default_rng(11)
    mp_on = random_ongrid_set(rng, TINY_GEOM, TINY_CFG)
    rep_on = lemma4_check(mp_on, TINY_GEOM, TINY_CFG)

    devs = []
    for n_c in (256, 512, 1024):
        cfg = OfdmConfig(n_subcarriers=n_c, cp_length=n_c // 8,
                         subcarrier_spacing=15e3, slots_per_frame=4,
                         symbols_per_slot=2)
        if n_c == 256:
            path = _random_offgrid_path(rng, TINY_GEOM, cfg)
        devs.append(lemma4_check(MultipathSet(paths=(path,)), TINY_GEOM, cfg).delay_dev)
    verdict("lemma4-extensions",
            rep_on.delay_dev <= 1e-9 and rep_on.doppler_dev <= 1e-9
            and devs[0] > devs[1] > devs[2],
            f"on-grid ({rep_on.delay_dev:.1e}, {rep_on.doppler_dev:.1e}), "
            f"off-grid sweep {[f'{d:.3e}' for d in devs]}")


def _offgrid_mc_set(rng, n_paths=6):
    paths = []
    for _ in range(n_paths):
        paths.append(PathParams(
            float(rng.uniform(0.2, 1.0)), float(rng.uniform(0.4, 2.7)),
            float(rng.uniform(0.1, 3.0)),
            float(rng.uniform(0, 0.9 * TINY_CFG.cp_duration)),
            float(rng.uniform(0.95 * TINY_CFG.doppler_min,
                              0.95 * TINY_CFG.doppler_max))))
    return MultipathSet(paths=tuple(paths))


def test_monte_carlo_consistency():
    rng = np.random.default_rng(3)
    mp = random_ongrid_set(rng, TINY_GEOM, TINY_CFG)
    exact = tbf_exact(mp, TINY_GEOM, TINY_CFG)
    mc = tbf_monte_carlo(mp, TINY_GEOM, TINY_CFG, n_draws=20_000, seed=17)
    sel = exact.data >= 0.01 * exact.total
    rel = float((np.abs(mc.data[sel] - exact.data[sel]) / exact.data[sel]).max())

    # RMS halving when draws quadruple; band = 0.5 +- 3 sigma with
    # sigma = 0.044 measured over 25 master seeds of this exact statistic
    rng = np.random.default_rng(29)
    d1, d2 = [], []
    for s in range(30):
        m = _offgrid_mc_set(rng)
        ex = tbf_exact(m, TINY_GEOM, TINY_CFG)
        a = tbf_monte_carlo(m, TINY_GEOM, TINY_CFG, n_draws=5_000, seed=1000 + s)
        b = tbf_monte_carlo(m, TINY_GEOM, TINY_CFG, n_draws=20_000, seed=2000 + s)
        d1.append((a.data - ex.data).ravel())
        d2.append((b.data - ex.data).ravel())
    r1 = float(np.sqrt(np.mean(np.concatenate(d1) ** 2)))
    r2 = float(np.sqrt(np.mean(np.concatenate(d2) ** 2)))
    ratio = r2 / r1
    verdict("monte-carlo-consistency",
            rel <= 0.05 and 0.365 <= ratio <= 0.630,
            f"max rel {rel:.3f} on >=1% bins, RMS ratio {ratio:.3f}")


def test_preprocessing_normalization():
    rng = np.random.default_rng(5)
    scene = desk_scene(50)
    positions = np.stack([rng.uniform(-5, 5, 1000), rng.uniform(-5, 5, 1000),
                          np.full(1000, 1.5)], axis=1)
    records = build_dataset(scene, DESK_GEOM, DESK_CFG, positions=positions, seed=6)
    ok = True
    for rec in records:
        ok &= abs(rec.x_ad.sum() - 1.0) <= 1e-9
        ok &= abs(rec.x_do.sum() - 1.0) <= 1e-9
    supports = []
    x = records[0].x_ad
    for g in (0.0, 0.01, 0.02, 0.05, 0.1):
        supports.append(int(mask(x, g).sum()))
    monotone = all(b <= a for a, b in zip(supports, supports[1:]))
    verdict("preprocessing-normalization", ok and monotone,
            f"1000 records unit-sum, support sweep {supports}")


def test_store_roundtrips(tmp_path):
    rng = np.random.default_rng(8)
    dtypes = ["<f4", "<f8", "<c8", "<c16"]
    path = tmp_path / "t.tbt"
    ok = True
    for i in range(10_000):
        dtype = dtypes[i % 4]
        shape = tuple(int(rng.integers(1, 6)) for _ in range(int(rng.integers(1, 4))))
        if dtype.startswith("<c"):
            t = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)).astype(dtype)
        else:
            t = rng.standard_normal(shape).astype(dtype)
        write_tensor(path, t)
        back = read_tensor(path)
        ok &= back.tobytes() == t.tobytes() and back.shape == t.shape \
            and back.dtype == np.dtype(dtype)
        if not ok:
            break

    write_tensor(path, np.ones(3))
    good = path.read_bytes()
    fixtures = [
        (b"XXXX" + good[4:], BadMagicError),
        (good[:4] + bytes([9]) + good[5:], UnsupportedVersionError),
        (good[:5] + bytes([77]) + good[6:], UnsupportedDtypeError),
        (good[:-3], TruncatedPayloadError),
    ]
    for blob, expected in fixtures:
        path.write_bytes(blob)
        try:
            read_tensor(path)
            ok = False
        except expected:
            pass
        except Exception:
            ok = False
    verdict("store-roundtrips", ok, "10k bitwise round trips + 4 header fixtures")


def test_wknn_baseline(tmp_path):
    # self query
    scene = desk_scene(60)
    db_records = build_dataset(scene, DESK_GEOM, DESK_CFG, spacing=1.0,
                               floors=(1.5,), seed=0)
    db = FingerprintDatabase.from_records(db_records)
    q = np.stack([r.x_ad.ravel() for r in db_records[:20]])
    est = wknn_locate_many(db, q, k=1)
    self_err = float(np.abs(est - np.stack([r.position for r in db_records[:20]])).max())

    #"denser database wins" on the 20-seed average
    m1_all, m2_all = [], []
    for seed in range(20):
        scene = desk_scene(seed, n_scatterers=16)
        db1 = FingerprintDatabase.from_records(
            build_dataset(scene, DESK_GEOM, DESK_CFG, spacing=1.0, floors=(1.5,), seed=seed))
        db2 = FingerprintDatabase.from_records(
            build_dataset(scene, DESK_GEOM, DESK_CFG, spacing=2.0, floors=(1.5,), seed=seed))
        rng = np.random.default_rng(900 + seed)
        qpos = np.stack([rng.uniform(-5, 5, 40), rng.uniform(-5, 5, 40),
                         np.full(40, 1.5)], axis=1)
        from tbf.beamspace import transform_matrices
        t = transform_matrices(DESK_GEOM, DESK_CFG)
        qrecs = [_record_for(scene, p, float(rng.uniform(0, 2 * math.pi)), 1.39,
                             DESK_GEOM, DESK_CFG, None, 0, 0.05, False, 0,
                             f"q{i}", t=t) for i, p in enumerate(qpos)]
        feats = np.stack([r.x_ad.ravel() for r in qrecs])
        e1 = wknn_locate_many(db1, feats, k=5)
        e2 = wknn_locate_many(db2, feats, k=5)
        m1_all.append(eval_localization(e1, qpos, scene.bs_position).mean_error)
        m2_all.append(eval_localization(e2, qpos, scene.bs_position).mean_error)
    avg1, avg2 = float(np.mean(m1_all)), float(np.mean(m2_all))

    # bucketed + SNR-sweep report shape via the CLI
    config = {
        "geometry": {"m_rows": 4, "m_cols": 4, "d_row": 0.02585, "d_col": 0.02585,
                     "wavelength": 0.0517},
        "ofdm": {"n_subcarriers": 128, "cp_length": 16, "subcarrier_spacing": 480e3,
                 "slots_per_frame": 4, "symbols_per_slot": 2},
        "scene": {"n_scatterers": 8, "extent": 5.0, "bs_height": 8.0,
                  "shell": [1.0, 1.6], "scatterer_heights": [1.0, 6.0]},
        "dataset": {"spacing": 2.5, "floors": [1.5]},
        "wknn": {"n_queries": 10, "snr_sweep": [0.0, 10.0, 20.0], "sweep_draws": 4},
    }
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps(config))
    out = tmp_path / "wk"
    code = main(["wknn", "eval", "--config", str(cfg_path), "--seed", "2",
                 "--out", str(out)])
    import csv as _csv
    buckets = list(_csv.reader((out / "wknn_buckets.csv").open()))
    sweep = list(_csv.reader((out / "wknn_snr_sweep.csv").open()))
    shape_ok = (code == EXIT_OK
                and [r[0] for r in buckets[1:]] == ["0-5", "5-10", "10-15", "15-20"]
                and len(sweep) == 4)
    verdict("wknn-baseline",
            self_err <= 1e-9 and avg1 <= avg2 and shape_ok,
            f"self-err {self_err:.1e}, 1m avg {avg1:.3f} <= 2m avg {avg2:.3f}")


def test_end_to_end_determinism(tmp_path):
    config = {
        "geometry": {"m_rows": 4, "m_cols": 4, "d_row": 0.02585, "d_col": 0.02585,
                     "wavelength": 0.0517},
        "ofdm": {"n_subcarriers": 128, "cp_length": 16, "subcarrier_spacing": 480e3,
                 "slots_per_frame": 4, "symbols_per_slot": 2},
        "scene": {"n_scatterers": 8, "extent": 5.0, "bs_height": 8.0,
                  "shell": [1.0, 1.6], "scatterer_heights": [1.0, 6.0]},
        "dataset": {"spacing": 2.5, "floors": [1.5], "snr_db": 20.0, "n_draws": 16},
    }
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps(config))
    outs = []
    for name in ("a", "b"):
        out = tmp_path / name
        assert main(["dataset", "build", "--config", str(cfg_path),
                     "--seed", "7", "--out", str(out)]) == EXIT_OK
        outs.append(out)
    a, b = outs
    same = (a / "manifest.json").read_bytes() == (b / "manifest.json").read_bytes()
    blobs_a = sorted((a / "blobs").iterdir())
    blobs_b = sorted((b / "blobs").iterdir())
    same &= len(blobs_a) == len(blobs_b)
    for fa, fb in zip(blobs_a, blobs_b):
        same &= fa.name == fb.name and fa.read_bytes() == fb.read_bytes()
    verdict("end-to-end-determinism", same,
            f"{len(blobs_a)} blobs byte-identical across two seeded builds")
