"""Outcome ratio, Pearson correlation and the Stahel-Donoho robust estimator."""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, fields
from typing import IO, Iterable, Sequence

import numpy as np
from scipy import stats as sps

from opgraph.errors import AnalysisError
from opgraph.ingest import Segment
from opgraph.metrics import SegmentMetrics

log = logging.getLogger(__name__)

MAD_SCALE = 1.4826
DEFAULT_PAIRS = (("sw_er", "outcome_ratio"), ("density", "outcome_ratio"), ("sw_er", "density"))
TABLE_COLUMNS = ("phase", "var_x", "var_y", "pearson_r", "pearson_p", "robust_r",
                 "n_segments", "seed")


def outcome_ratio(segment: Segment) -> float:
    """Complications per distinct encounter."""
    enc = segment.encounters()
    if not enc:
        raise AnalysisError(f"segment {segment.index} has no encounters")
    return sum(enc.values()) / len(enc)


def _as_series(x: Sequence[float], y: Sequence[float]) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise AnalysisError(f"series must be 1-D and equally long, got {x.shape} and {y.shape}")
    if len(x) < 3:
        raise AnalysisError(f"correlation needs at least 3 observations, got {len(x)}")
    if not (np.isfinite(x).all() and np.isfinite(y).all()):
        raise AnalysisError("series contain missing or non-finite values")
    return x, y


def pearson_r(x: Sequence[float], y: Sequence[float]) -> float:
    x, y = _as_series(x, y)
    dx = x - x.mean()
    dy = y - y.mean()
    sxx, syy = float(dx @ dx), float(dy @ dy)
    if sxx == 0 or syy == 0:
        raise AnalysisError("correlation is undefined for a constant series")
    return max(-1.0, min(1.0, float(dx @ dy) / math.sqrt(sxx * syy)))


def pearson_pvalue(r: float, n: int) -> float:
    """Two-sided p-value of the t-test for zero correlation."""
    if abs(r) >= 1.0:
        return 0.0
    t = r * math.sqrt((n - 2) / (1.0 - r * r))
    return float(2.0 * sps.t.sf(abs(t), n - 2))


@dataclass(frozen=True)
class SDConfig:
    """Tuning of :func:`stahel_donoho`.

    Points are weighted ``min(1, (c / r) ** 2)`` with ``c`` the square root of
    the `quantile` point of chi-square with p degrees of freedom.
    """

    extra_dirs: int = 250
    seed: int = 0
    quantile: float = 0.95
    chunk: int = 2048


@dataclass(frozen=True)
class RobustEstimate:
    mean: np.ndarray
    covariance: np.ndarray
    weights: np.ndarray
    outlyingness: np.ndarray
    cutoff: float
    directions_used: int

    @property
    def correlation(self) -> np.ndarray:
        sd = np.sqrt(np.diag(self.covariance))
        with np.errstate(divide="ignore", invalid="ignore"):
            corr = self.covariance / np.outer(sd, sd)
        corr = np.clip(corr, -1.0, 1.0)
        np.fill_diagonal(corr, 1.0)
        return corr


def _directions(x: np.ndarray, extra: int, rng: np.random.Generator) -> np.ndarray:
    n, p = x.shape
    i, j = np.triu_indices(n, 1)
    diffs = x[j] - x[i]
    norms = np.linalg.norm(diffs, axis=1)
    diffs = diffs[norms > 0] / norms[norms > 0, None]
    rand = rng.standard_normal((extra, p))
    rand /= np.linalg.norm(rand, axis=1, keepdims=True)
    return np.vstack([diffs, rand])


def outlyingness(x: np.ndarray, directions: np.ndarray, chunk: int = 2048) -> tuple[np.ndarray, int]:
    """Max over directions of ``|<x_i, d> - med| / MAD``; directions with zero
    MAD are skipped. Returns the outlyingness and the number of directions used."""
    n = len(x)
    out = np.zeros(n)
    used = 0
    for s in range(0, len(directions), chunk):
        # one row per direction keeps each median over contiguous memory
        proj = directions[s:s + chunk] @ x.T
        med = np.median(proj, axis=1, keepdims=True)
        dev = np.abs(proj - med)
        mad = MAD_SCALE * np.median(dev, axis=1)
        scale = np.abs(proj).max(axis=1)
        ok = mad > 1e-12 * np.maximum(scale, np.finfo(float).tiny)
        if not ok.any():
            continue
        used += int(ok.sum())
        out = np.maximum(out, (dev[ok] / mad[ok, None]).max(axis=0))
    return out, used


def stahel_donoho(data, config: SDConfig = SDConfig()) -> RobustEstimate:
    """Projection-outlyingness weighted location and scatter of `data` (n x p)."""
    x = np.asarray(data, dtype=float)
    if x.ndim != 2:
        raise AnalysisError(f"data must be a 2-D matrix, got shape {x.shape}")
    n, p = x.shape
    if n < p + 2:
        raise AnalysisError(f"need at least p + 2 = {p + 2} rows, got {n}")
    if not np.isfinite(x).all():
        raise AnalysisError("data contain missing or non-finite values")
    rng = np.random.default_rng(config.seed)
    r, used = outlyingness(x, _directions(x, config.extra_dirs, rng), config.chunk)
    if used == 0:
        raise AnalysisError("every projection has zero MAD; data lie on a hyperplane")
    cutoff = math.sqrt(sps.chi2.ppf(config.quantile, p))
    with np.errstate(divide="ignore"):
        w = np.where(r > cutoff, (cutoff / r) ** 2, 1.0)
    wn = w / w.sum()
    mean = wn @ x
    centered = x - mean
    cov = (centered * wn[:, None]).T @ centered
    cov = (cov + cov.T) / 2
    return RobustEstimate(mean, cov, w, r, cutoff, used)


def robust_r(x: Sequence[float], y: Sequence[float], config: SDConfig = SDConfig()) -> float:
    x, y = _as_series(x, y)
    return float(stahel_donoho(np.column_stack([x, y]), config).correlation[0, 1])


@dataclass(frozen=True)
class CorrelationRow:
    phase: str
    var_x: str
    var_y: str
    pearson_r: float
    pearson_p: float
    robust_r: float
    n_segments: int
    seed: int


_NUMERIC = {f.name for f in fields(SegmentMetrics)
            if f.name not in ("phase", "constraint_by_role")}


def correlate_series(metrics: Iterable[SegmentMetrics],
                     pairs: Sequence[tuple[str, str]] = DEFAULT_PAIRS,
                     config: SDConfig = SDConfig(), phase: str | None = None) -> list[CorrelationRow]:
    """Pearson and robust correlation for each variable pair across segments.

    Segments where either variable is undefined are dropped pairwise.
    """
    metrics = list(metrics)
    for a, b in pairs:
        for name in (a, b):
            if name not in _NUMERIC:
                raise AnalysisError(f"unknown variable {name!r}; choose from {sorted(_NUMERIC)}")
    if phase is None:
        phase = metrics[0].phase if metrics else ""
    rows = []
    for a, b in pairs:
        pts = [(getattr(m, a), getattr(m, b)) for m in metrics]
        pts = [(u, v) for u, v in pts if u is not None and v is not None]
        if len(pts) < 3:
            raise AnalysisError(f"{a} vs {b}: need at least 3 segments, got {len(pts)}")
        x, y = (np.array(c, dtype=float) for c in zip(*pts))
        r = pearson_r(x, y)
        try:
            rob = robust_r(x, y, config)
        except AnalysisError as exc:
            log.warning("%s vs %s: robust correlation failed: %s", a, b, exc)
            rob = float("nan")
        rows.append(CorrelationRow(phase, a, b, r, pearson_pvalue(r, len(x)), rob, len(x),
                                   config.seed))
    return rows


def write_table(rows: Iterable[CorrelationRow], fh: IO[str]) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(TABLE_COLUMNS)
    for r in rows:
        w.writerow((r.phase, r.var_x, r.var_y, repr(r.pearson_r), repr(r.pearson_p),
                    repr(r.robust_r), r.n_segments, r.seed))
