"""Weighted K-nearest-neighbor localization and the evaluation metrics."""

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError, ShapeError
from .scene import FingerprintRecord

WKNN_WEIGHT_FLOOR = 1e-12
RANGE_BUCKETS = ((0.0, 5.0), (5.0, 10.0), (10.0, 15.0), (15.0, 20.0))


@dataclass(frozen=True)
class FingerprintDatabase:
    """Immutable query target: stacked features plus positions."""

    features: np.ndarray   # (n, d) flattened angle-delay maps
    positions: np.ndarray  # (n, 3)

    def __post_init__(self):
        if len(self.features) == 0:
            raise ParameterError("fingerprint database must be nonempty")
        if len(self.features) != len(self.positions):
            raise ShapeError("features and positions must align")

    @classmethod
    def from_records(cls, records: list[FingerprintRecord]) -> "FingerprintDatabase":
        feats = np.stack([r.x_ad.ravel() for r in records])
        pos = np.stack([r.position for r in records])
        return cls(features=feats, positions=pos)

    def __len__(self) -> int:
        return len(self.features)


def wknn_locate(db: FingerprintDatabase, query: np.ndarray, k: int = 5,
                weighting: str = "inverse-distance") -> np.ndarray:
    """Weighted average position of the k nearest stored fingerprints."""
    return wknn_locate_many(db, np.asarray(query).ravel()[None, :], k, weighting)[0]


def wknn_locate_many(db: FingerprintDatabase, queries: np.ndarray, k: int = 5,
                     weighting: str = "inverse-distance") -> np.ndarray:
    """Vectorized WKNN over a (n, d) query block."""
    if not 1 <= k <= len(db):
        raise ParameterError(f"k={k} outside 1..{len(db)}")
    if weighting not in ("inverse-distance", "uniform"):
        raise ParameterError(f"unknown weighting {weighting!r}")
    q = np.asarray(queries, dtype=float)
    q = q.reshape(q.shape[0], -1)
    if q.shape[1] != db.features.shape[1]:
        raise ShapeError(
            f"query length {q.shape[1]} != feature length {db.features.shape[1]}")
    feats = db.features
    sq = (np.sum(q ** 2, axis=1)[:, None] + np.sum(feats ** 2, axis=1)[None, :]
          - 2.0 * q @ feats.T)
    dist = np.sqrt(np.maximum(sq, 0.0))
    nearest = np.argpartition(dist, k - 1, axis=1)[:, :k]
    nd = np.take_along_axis(dist, nearest, axis=1)
    if weighting == "uniform":
        weights = np.ones_like(nd)
    else:
        weights = 1.0 / (nd + WKNN_WEIGHT_FLOOR)
    weights = weights / weights.sum(axis=1, keepdims=True)
    return np.einsum("nk,nkd->nd", weights, db.positions[nearest])


@dataclass(frozen=True)
class EvalReport:
    """Localization error summary: mean, empirical CDF, distance buckets."""

    errors: np.ndarray
    mean_error: float
    cdf_points: tuple         # (error, cumulative fraction) pairs
    range_buckets: dict       # "lo-hi" -> mean error (NaN when empty)

    def as_dict(self) -> dict:
        out = {"mean_error_m": self.mean_error, "n": int(self.errors.size)}
        for name, value in self.range_buckets.items():
            out[f"bucket_{name}_m"] = value
        return out


def eval_localization(estimates, truths, bs_position) -> EvalReport:
    """Per-sample Euclidean errors bucketed by ground-plane BS distance."""
    est = np.atleast_2d(np.asarray(estimates, dtype=float))
    tru = np.atleast_2d(np.asarray(truths, dtype=float))
    if est.shape != tru.shape or est.shape[0] < 1:
        raise ShapeError(f"estimates {est.shape} vs truths {tru.shape}")
    bs = np.asarray(bs_position, dtype=float)
    errors = np.linalg.norm(est - tru, axis=1)
    order = np.sort(errors)
    n = order.size
    cdf = tuple((float(e), (i + 1) / n) for i, e in enumerate(order))
    planar = np.linalg.norm(tru[:, :2] - bs[None, :2], axis=1)
    buckets = {}
    for lo, hi in RANGE_BUCKETS:
        sel = (planar >= lo) & (planar < hi)
        buckets[f"{lo:g}-{hi:g}"] = float(errors[sel].mean()) if sel.any() else float("nan")
    return EvalReport(errors=errors, mean_error=float(errors.mean()),
                      cdf_points=cdf, range_buckets=buckets)


@dataclass(frozen=True)
class OrientationReport:
    confusion: np.ndarray     # (16, 16), rows are truth
    recalls: np.ndarray       # per-class recall, NaN when unseen
    accuracy: float
    adjacency_share: float    # fraction of errors within +-1 class (mod 16)

    def as_dict(self) -> dict:
        return {"accuracy": self.accuracy,
                "adjacency_share": self.adjacency_share,
                "n": int(self.confusion.sum())}


def eval_orientation(pred_classes, true_classes, n_classes: int = 16) -> OrientationReport:
    """Confusion matrix, accuracy, and near-miss share of a classifier."""
    pred = np.asarray(pred_classes, dtype=int)
    true = np.asarray(true_classes, dtype=int)
    if pred.shape != true.shape or pred.size < 1:
        raise ShapeError("prediction/truth length mismatch")
    if pred.min() < 0 or pred.max() >= n_classes or true.min() < 0 or true.max() >= n_classes:
        raise ParameterError(f"classes must lie in 0..{n_classes - 1}")
    confusion = np.zeros((n_classes, n_classes), dtype=int)
    np.add.at(confusion, (true, pred), 1)
    row_totals = confusion.sum(axis=1)
    with np.errstate(invalid="ignore"):
        recalls = np.where(row_totals > 0, np.diag(confusion) / row_totals, np.nan)
    accuracy = float(np.trace(confusion) / confusion.sum())
    wrong = pred != true
    if wrong.any():
        gap = np.abs(pred[wrong] - true[wrong]) % n_classes
        near = (gap == 1) | (gap == n_classes - 1)
        adjacency = float(near.mean())
    else:
        adjacency = 0.0
    return OrientationReport(confusion=confusion, recalls=recalls,
                             accuracy=accuracy, adjacency_share=adjacency)
