"""Quality indicators, reference-front merging, forecast metrics and losses.

Indicators operate on bi-objective point sets under minimization. Hypervolume
uses the exact 2-D sweep; inverted generational distance averages, over the
reference front, the distance to the nearest obtained point.
"""

from __future__ import annotations

import numpy as np

EPS = 1e-8


def _points(a) -> np.ndarray:
    arr = np.asarray(a, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError("expected an (n, 2) point set")
    return arr


def nondominated_mask(points: np.ndarray) -> np.ndarray:
    """Boolean mask of points not strictly dominated by any other point."""
    pts = _points(points)
    n = len(pts)
    leq = (pts[:, None, :] <= pts[None, :, :]).all(axis=2)
    lt = (pts[:, None, :] < pts[None, :, :]).any(axis=2)
    dominated = (leq & lt).any(axis=0)
    return ~dominated


def igd(obtained, reference) -> float:
    """Mean distance from each reference point to its nearest obtained point."""
    a = _points(obtained)
    ref = _points(reference)
    if len(a) == 0 or len(ref) == 0:
        raise ValueError("point sets must be non-empty")
    d = np.sqrt(((ref[:, None, :] - a[None, :, :]) ** 2).sum(axis=2))
    return float(d.min(axis=1).mean())


def hv(obtained, reference_point) -> float:
    """Dominated hypervolume bounded by the reference point (2-D sweep).

    Points that do not strictly dominate the reference point contribute
    nothing.
    """
    pts = _points(obtained)
    r1, r2 = float(reference_point[0]), float(reference_point[1])
    pts = pts[(pts[:, 0] < r1) & (pts[:, 1] < r2)]
    if len(pts) == 0:
        return 0.0
    pts = pts[nondominated_mask(pts)]
    order = np.lexsort((pts[:, 1], pts[:, 0]))
    pts = pts[order]
    total = 0.0
    for i, (f1, f2) in enumerate(pts):
        nxt = pts[i + 1, 0] if i + 1 < len(pts) else r1
        total += (nxt - f1) * (r2 - f2)
    return float(total)


def merged_reference_front(point_sets) -> np.ndarray:
    """Union of the given sets, duplicate-free and filtered to non-dominated."""
    sets = [_points(s) for s in point_sets]
    if not sets:
        raise ValueError("need at least one point set")
    merged = np.unique(np.vstack(sets), axis=0)
    return merged[nondominated_mask(merged)]


# ---------------------------------------------------------------------------
# Forecast error metrics
# ---------------------------------------------------------------------------

def forecast_metrics(y_true, y_pred, target_std) -> dict:
    """Per-target MSE/MAE/MAPE plus overall normalized aggregates.

    ``target_std`` holds one ground-truth standard deviation per target; the
    normalized aggregates divide each target's error by its variance (NMSE)
    or standard deviation (NMAE) before averaging across targets.
    """
    y = np.asarray(y_true, dtype=float)
    p = np.asarray(y_pred, dtype=float)
    sigma = np.asarray(target_std, dtype=float)
    if y.ndim == 1:
        y = y[:, None]
        p = p[:, None]
    if y.shape != p.shape:
        raise ValueError("truth and prediction shapes differ")
    if sigma.shape != (y.shape[1],):
        raise ValueError("need one standard deviation per target")
    if np.any(sigma < 0):
        raise ValueError("standard deviations must be non-negative")

    err = y - p
    mse = (err ** 2).mean(axis=0)
    mae = np.abs(err).mean(axis=0)
    mape = 100.0 * (np.abs(err) / (np.abs(y) + EPS)).mean(axis=0)
    return {
        "mse": mse,
        "mae": mae,
        "mape": mape,
        "nmse": float((mse / (sigma ** 2 + EPS)).mean()),
        "nmae": float((mae / (sigma + EPS)).mean()),
        "mape_mean": float(mape.mean()),
    }


# ---------------------------------------------------------------------------
# Loss family
# ---------------------------------------------------------------------------

SMOOTH_L1_BETA = 1.0
HUBER_DELTA = 1.0
QUANTILE_TAU = 0.5
MULTI_QUANTILE_TAUS = (0.1, 0.5, 0.9)

LOSS_KINDS = ("MSE", "MAE", "SmoothL1", "MAPE", "Huber", "LogCosh",
              "Quantile", "SMAPE", "Combined", "AdaptiveCombined")


def _pinball(r: np.ndarray, tau: float) -> np.ndarray:
    return np.maximum(tau * r, (tau - 1.0) * r)


def _elementwise(kind: str, y: np.ndarray, p: np.ndarray) -> np.ndarray:
    r = y - p
    if kind == "MSE":
        return r ** 2
    if kind == "MAE":
        return np.abs(r)
    if kind == "SmoothL1":
        a = np.abs(r)
        return np.where(a < SMOOTH_L1_BETA,
                        0.5 * r ** 2 / SMOOTH_L1_BETA,
                        a - 0.5 * SMOOTH_L1_BETA)
    if kind == "MAPE":
        return 100.0 * np.abs(r) / (np.abs(y) + EPS)
    if kind == "Huber":
        a = np.abs(r)
        return np.where(a <= HUBER_DELTA,
                        0.5 * r ** 2,
                        HUBER_DELTA * (a - 0.5 * HUBER_DELTA))
    if kind == "LogCosh":
        # log(cosh(r)) computed stably for large |r|
        return np.abs(r) + np.log1p(np.exp(-2.0 * np.abs(r))) - np.log(2.0)
    if kind == "Quantile":
        return _pinball(r, QUANTILE_TAU)
    if kind == "SMAPE":
        return 100.0 * 2.0 * np.abs(r) / (np.abs(y) + np.abs(p) + EPS)
    if kind == "multi_quantile":
        return np.mean([_pinball(r, t) for t in MULTI_QUANTILE_TAUS], axis=0)
    raise ValueError(f"unknown loss kind {kind!r}")


def loss(kind: str, y_true, y_pred, pair=None, weights=None) -> float:
    """Mean training loss of one kind over all samples and targets.

    Combined kinds evaluate a (loss_a, loss_b) pair: "Combined" blends them
    equally, "AdaptiveCombined" uses the given initialization weights.
    """
    y = np.asarray(y_true, dtype=float)
    p = np.asarray(y_pred, dtype=float)
    if y.shape != p.shape:
        raise ValueError("truth and prediction shapes differ")
    if kind in ("Combined", "AdaptiveCombined"):
        if pair is None:
            raise ValueError(f"{kind} requires a loss pair")
        if kind == "Combined":
            w1 = w2 = 0.5
        else:
            if weights is None:
                raise ValueError("AdaptiveCombined requires initialization weights")
            w1, w2 = weights
        a = _elementwise(pair[0], y, p).mean()
        b = _elementwise(pair[1], y, p).mean()
        return float(w1 * a + w2 * b)
    return float(_elementwise(kind, y, p).mean())
