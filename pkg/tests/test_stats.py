import csv
import io
import math

import numpy as np
import pytest
from hypothesis import assume, given, strategies as st
from scipy import stats as sps

import oracles
from opgraph.errors import AnalysisError
from opgraph.ingest import EventRecord, Phase, Role, Segment, SynthConfig, generate_synthetic, segment
from opgraph.metrics import SegmentMetrics
from opgraph.stats import (
    TABLE_COLUMNS,
    SDConfig,
    correlate_series,
    outcome_ratio,
    pearson_pvalue,
    pearson_r,
    robust_r,
    stahel_donoho,
    write_table,
)

THIRTEEN_X = [0.12, 0.35, 0.2, 0.9, 0.44, 0.61, 0.05, 0.77, 0.3, 0.52, 0.68, 0.15, 0.83]
THIRTEEN_Y = [1.1, 0.9, 1.4, 0.3, 0.8, 0.75, 1.6, 0.5, 1.0, 0.7, 0.65, 1.3, 0.4]


def _segment(counts):
    recs = [EventRecord(f"e{i}", "p1", Role.NURSE, 0, Phase.INTRA, c) for i, c in enumerate(counts)]
    return Segment(0, 0, 100, tuple(recs))


def test_outcome_ratio_anchors():
    assert outcome_ratio(_segment([0] * 10)) == 0.0
    assert outcome_ratio(_segment([1, 0, 2, 1])) == 1.0
    with pytest.raises(AnalysisError):
        outcome_ratio(_segment([]))


def test_outcome_ratio_counts_encounters_once():
    recs = [EventRecord("e1", p, Role.NURSE, 0, Phase.INTRA, 3) for p in ("a", "b", "c")]
    recs.append(EventRecord("e2", "a", Role.NURSE, 0, Phase.INTRA, 0))
    assert outcome_ratio(Segment(0, 0, 100, tuple(recs))) == 1.5


def test_outcome_ratio_recount_of_synthetic():
    cfg = SynthConfig(n_surgeons=5, n_nurses=5, n_anesthesiologists=5, encounters_per_segment=40,
                      phase="intra", n_segments=1)
    seg = segment(generate_synthetic(cfg, 3), 100, 100)[0]
    per_encounter = {}
    for r in seg.records:
        per_encounter[r.encounter_id] = r.complication_count
    assert outcome_ratio(seg) == sum(per_encounter.values()) / len(per_encounter)


def test_pearson_anchors():
    x = [1.0, 2.0, 3.5, 4.0, 7.0]
    assert pearson_r(x, [2 * v + 1 for v in x]) == pytest.approx(1.0, abs=1e-15)
    assert pearson_r(x, [-v for v in x]) == pytest.approx(-1.0, abs=1e-15)


def test_pearson_fixture_textbook():
    assert pearson_r(THIRTEEN_X, THIRTEEN_Y) == pytest.approx(
        oracles.pearson_textbook(THIRTEEN_X, THIRTEEN_Y), rel=1e-12)


def test_pearson_errors():
    with pytest.raises(AnalysisError, match="constant"):
        pearson_r([1, 1, 1], [1, 2, 3])
    with pytest.raises(AnalysisError, match="at least 3"):
        pearson_r([1, 2], [1, 2])
    with pytest.raises(AnalysisError):
        pearson_r([1, 2, 3], [1, 2])
    with pytest.raises(AnalysisError):
        pearson_r([1, 2, float("nan")], [1, 2, 3])


finite = st.floats(-1e3, 1e3, allow_nan=False)


@given(st.lists(st.tuples(finite, finite), min_size=3, max_size=20),
       st.floats(0.1, 10), st.floats(-100, 100))
def test_pearson_affine_invariance(pts, a, b):
    x, y = map(np.array, zip(*pts))
    assume(np.ptp(x) > 1e-3 and np.ptp(y) > 1e-3)
    r = pearson_r(x, y)
    assert -1 <= r <= 1
    assert pearson_r(a * x + b, y) == pytest.approx(r, abs=1e-9)
    assert pearson_r(x, -y) == pytest.approx(-r, abs=1e-12)


@pytest.mark.parametrize("seed", range(5))
def test_pvalue_matches_scipy(seed):
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(13)
    y = 0.5 * x + rng.standard_normal(13)
    ref = sps.pearsonr(x, y)
    r = pearson_r(x, y)
    assert r == pytest.approx(ref.statistic, rel=1e-12)
    assert pearson_pvalue(r, 13) == pytest.approx(ref.pvalue, rel=1e-9)


def test_sd_clean_line_saturates_weights():
    x = np.arange(12.0)
    est = stahel_donoho(np.column_stack([x, x]))
    assert (est.weights == 1.0).all()
    assert est.correlation[0, 1] == pytest.approx(1.0, abs=1e-12)


def test_sd_downweights_planted_outlier():
    x = np.arange(12.0)
    y = x.copy()
    y[6] += 10 * y.std(ddof=1)
    assert pearson_r(x, y) <= 0.7
    assert robust_r(x, y) >= 0.9
    est = stahel_donoho(np.column_stack([x, y]))
    assert est.weights.argmin() == 6 and est.weights[6] < 0.01


@pytest.mark.parametrize("seed", range(20))
def test_sd_agrees_with_pearson_on_clean_gaussian(seed):
    rng = np.random.default_rng(seed)
    xy = rng.multivariate_normal([0, 0], [[1, 0.6], [0.6, 1]], size=100)
    assert abs(robust_r(xy[:, 0], xy[:, 1]) - pearson_r(xy[:, 0], xy[:, 1])) <= 0.1


def test_sd_mean_approaches_sample_mean():
    for seed in range(20):
        rng = np.random.default_rng(seed)
        x = rng.standard_normal((500, 3)) * [1, 2, 0.5] + [1, -2, 3]
        est = stahel_donoho(x, SDConfig(extra_dirs=50))
        assert np.abs(est.mean - x.mean(axis=0)).max() <= 0.05


def test_sd_estimate_invariants():
    rng = np.random.default_rng(7)
    x = rng.standard_normal((40, 3))
    x[:3] += 8
    est = stahel_donoho(x)
    assert ((est.weights > 0) & (est.weights <= 1)).all()
    assert np.abs(est.covariance - est.covariance.T).max() <= 1e-12
    assert (np.diag(est.covariance) >= 0).all()
    corr = est.correlation
    assert np.diag(corr) == pytest.approx([1, 1, 1])
    assert (np.abs(corr) <= 1).all()
    assert est.cutoff == pytest.approx(math.sqrt(sps.chi2.ppf(0.95, 3)))
    again = stahel_donoho(x)
    assert np.array_equal(est.mean, again.mean) and np.array_equal(est.covariance, again.covariance)


def test_sd_outlyingness_independent_check():
    # recompute outlyingness over the same direction set by a plain loop
    rng = np.random.default_rng(1)
    x = rng.standard_normal((15, 2))
    cfg = SDConfig(extra_dirs=10, seed=3)
    est = stahel_donoho(x, cfg)
    dirs = []
    for i in range(15):
        for j in range(i + 1, 15):
            d = x[j] - x[i]
            dirs.append(d / np.linalg.norm(d))
    r = np.random.default_rng(cfg.seed).standard_normal((10, 2))
    dirs.extend(r / np.linalg.norm(r, axis=1, keepdims=True))
    best = np.zeros(15)
    for d in dirs:
        proj = x @ d
        med = np.median(proj)
        mad = 1.4826 * np.median(np.abs(proj - med))
        best = np.maximum(best, np.abs(proj - med) / mad)
    assert est.outlyingness == pytest.approx(best, rel=1e-12)
    w = np.minimum(1.0, (est.cutoff / best) ** 2)
    assert est.weights == pytest.approx(w, rel=1e-12)
    wn = w / w.sum()
    assert est.mean == pytest.approx(wn @ x, rel=1e-12)


def test_sd_errors():
    with pytest.raises(AnalysisError, match="p \\+ 2"):
        stahel_donoho(np.zeros((3, 2)))
    with pytest.raises(AnalysisError, match="hyperplane"):
        stahel_donoho(np.ones((10, 2)), SDConfig(extra_dirs=0))


def _m(i, **kw):
    return SegmentMetrics(segment=i, phase="post", n_encounters=1, n_nodes=1, n_edges=0, **kw)


def test_correlate_negative_monotone():
    ms = [_m(i, sw_er=10 - i, density=0.1 + 0.01 * i, outcome_ratio=0.3 + 0.02 * (i % 3))
          for i in range(13)]
    rows = correlate_series(ms)
    assert [(r.var_x, r.var_y) for r in rows] == [
        ("sw_er", "outcome_ratio"), ("density", "outcome_ratio"), ("sw_er", "density")]
    assert rows[2].pearson_r == pytest.approx(-1.0)
    assert rows[2].robust_r < 0
    assert all(r.phase == "post" and r.n_segments == 13 for r in rows)


def test_correlate_constant_rows():
    ms = [_m(i, sw_er=2.0, density=0.1, outcome_ratio=0.3) for i in range(13)]
    with pytest.raises(AnalysisError, match="constant"):
        correlate_series(ms)


def test_correlate_unknown_variable():
    with pytest.raises(AnalysisError, match="unknown variable 'bogus'"):
        correlate_series([_m(0)], pairs=[("bogus", "density")])


def test_table_export():
    ms = [_m(i, sw_er=float(i), density=float(i * i), outcome_ratio=float(13 - i)) for i in range(13)]
    buf = io.StringIO()
    write_table(correlate_series(ms, config=SDConfig(seed=5)), buf)
    rows = list(csv.reader(io.StringIO(buf.getvalue())))
    assert tuple(rows[0]) == TABLE_COLUMNS
    assert len(rows) == 4
    assert rows[1][-1] == "5" and rows[1][-2] == "13"
