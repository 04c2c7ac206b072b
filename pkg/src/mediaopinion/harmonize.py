"""Harmonize survey series on different scales into one opinion series.

Every wave is reduced to a mean on ``[-1, 1]``. Series are then tied to a
shared latent series through the affine model::

    wave_mean(s, t) ~ a_s * mu_t + b_s,    a_s > 0

fit by alternating weighted least squares, refined by Gauss-Newton steps on
the same objective. Years where several series overlap carry the
calibration. The longest series fixes the scale
(``a = 1``) and the latent series is shifted to zero at the baseline year.
"""

from __future__ import annotations

import logging
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
import pandas as pd
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .exceptions import DataError, DisconnectedSurveyError, InvertedSeriesError

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SurveyWave:
    series_id: str
    year: int
    response_counts: tuple  # least to most favorable

    def __post_init__(self):
        if len(self.response_counts) < 2:
            raise DataError(f"wave {self.series_id}/{self.year}: need at least 2 scale levels")
        if any(c < 0 for c in self.response_counts):
            raise DataError(f"wave {self.series_id}/{self.year}: negative count")

    @property
    def scale_levels(self) -> int:
        return len(self.response_counts)

    @property
    def n(self) -> int:
        return int(sum(self.response_counts))


def wave_mean(wave: SurveyWave) -> float:
    """Count-weighted mean response with levels spaced evenly on ``[-1, 1]``."""
    if wave.n == 0:
        raise DataError(f"wave {wave.series_id}/{wave.year} has no respondents")
    levels = np.linspace(-1.0, 1.0, wave.scale_levels)
    return float(np.dot(levels, wave.response_counts) / wave.n)


def read_waves(path) -> list:
    """Read a wave table with columns series_id, year, scale_levels, counts.

    ``counts`` is a ``;``-separated list ordered least to most favorable.
    """
    frame = pd.read_csv(path, dtype={"series_id": str, "counts": str})
    need = {"series_id", "year", "scale_levels", "counts"}
    if not need <= set(frame.columns):
        raise DataError(f"wave table needs columns {sorted(need)}")
    waves = []
    for i, row in enumerate(frame.itertuples(index=False), start=2):
        counts = tuple(int(c) for c in str(row.counts).split(";"))
        if len(counts) != int(row.scale_levels):
            raise DataError(f"{path}:{i}: {len(counts)} counts for {row.scale_levels} levels")
        waves.append(SurveyWave(str(row.series_id), int(row.year), counts))
    return waves


def write_waves(waves, path):
    rows = [{"series_id": w.series_id, "year": w.year, "scale_levels": w.scale_levels,
             "counts": ";".join(map(str, w.response_counts))} for w in waves]
    pd.DataFrame(rows, columns=["series_id", "year", "scale_levels", "counts"]).to_csv(
        path, index=False, lineterminator="\n")


def cells_from_waves(waves) -> pd.DataFrame:
    """Pool waves into (series, year) cells with respondent-weighted means."""
    rows = [(w.series_id, w.year, wave_mean(w), w.n) for w in waves]
    if not rows:
        raise DataError("no survey waves")
    frame = pd.DataFrame(rows, columns=["series_id", "year", "mean", "n"])
    frame["wm"] = frame["mean"] * frame["n"]
    cells = frame.groupby(["series_id", "year"], sort=True)[["wm", "n"]].sum().reset_index()
    cells["mean"] = cells["wm"] / cells["n"]
    return cells[["series_id", "year", "mean", "n"]]


def overlap_components(cells) -> list:
    """Connected components of series linked by shared years."""
    parent = {}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for s in cells["series_id"]:
        parent.setdefault(s, s)
    for _, group in cells.groupby("year"):
        ids = list(group["series_id"])
        for other in ids[1:]:
            ra, rb = find(ids[0]), find(other)
            if ra != rb:
                parent[max(ra, rb)] = min(ra, rb)
    comps = {}
    for s in parent:
        comps.setdefault(find(s), []).append(s)
    return sorted(sorted(c) for c in comps.values())


@dataclass
class CalibrationFit:
    years: np.ndarray
    mu: np.ndarray  # before clamping
    a: dict
    b: dict
    reference: str
    n_iter: int


def _calibrate(mu, s_idx, t_idx, m, w, n_s, fixed, ref):
    """Weighted per-series regression of wave means on the latent series."""
    x = mu[t_idx]
    sw = np.bincount(s_idx, w, n_s)
    xm = np.bincount(s_idx, w * x, n_s) / sw
    ym = np.bincount(s_idx, w * m, n_s) / sw
    sxx = np.bincount(s_idx, w * (x - xm[s_idx]) ** 2, n_s)
    sxy = np.bincount(s_idx, w * (x - xm[s_idx]) * (m - ym[s_idx]), n_s)
    with np.errstate(divide="ignore", invalid="ignore"):
        a = np.where(fixed | (sxx <= 0), 1.0, sxy / sxx)
    a[ref] = 1.0
    return a, ym - a * xm


def _latent(a, b, s_idx, t_idx, m, w, n_t, base):
    num = np.bincount(t_idx, w * a[s_idx] * (m - b[s_idx]), n_t)
    den = np.bincount(t_idx, w * a[s_idx] ** 2, n_t)
    mu = num / den
    return mu - mu[base]


def _cost(mu, a, b, s_idx, t_idx, m, w):
    r = m - a[s_idx] * mu[t_idx] - b[s_idx]
    return float(np.dot(w, r * r))


def _check_slopes(a, series_ids):
    inverted = [s for s, ai in zip(series_ids, a) if ai <= 0]
    if inverted:
        raise InvertedSeriesError(f"inverted series: {', '.join(inverted)}")


def _chain_start(s_idx, t_idx, m, w, n_s, n_t, ref):
    """Starting latent series built by linking series one at a time.

    Begins with the reference series as is, then repeatedly takes the series
    sharing the most years with those already placed, regresses it on the
    current values over the shared years and maps its remaining years back.
    """
    mu = np.full(n_t, np.nan)
    sel = s_idx == ref
    mu[t_idx[sel]] = m[sel]
    placed = {ref}
    while len(placed) < n_s:
        known = ~np.isnan(mu)
        best, best_overlap = None, 0
        for s in range(n_s):
            if s in placed:
                continue
            overlap = int(np.sum(known[t_idx[s_idx == s]]))
            if overlap > best_overlap:
                best, best_overlap = s, overlap
        if best is None:
            break
        sel = s_idx == best
        ts, ms, ws = t_idx[sel], m[sel], w[sel]
        shared = known[ts]
        x, y, v = mu[ts[shared]], ms[shared], ws[shared]
        xm, ym = np.average(x, weights=v), np.average(y, weights=v)
        sxx = np.dot(v, (x - xm) ** 2)
        slope = np.dot(v, (x - xm) * (y - ym)) / sxx if sxx > 0 else 1.0
        if abs(slope) < 1e-8:
            slope = 1.0
        new = ~shared
        mu[ts[new]] = (ms[new] - (ym - slope * xm)) / slope
        placed.add(best)
    return mu


def fit_calibration(cells, baseline_year=1974, tol=1e-9, max_iter=500,
                    warm_start=50, reference=None, strict=False) -> CalibrationFit:
    """Fit the affine calibration model by weighted least squares.

    Parameters
    ----------
    cells : DataFrame
        Columns series_id, year, mean, n; one row per (series, year).
    baseline_year : int
        The latent series is zero here.
    tol : float
        Stop once the latent series moves less than this in max norm.
    max_iter : int
    warm_start : int
        Alternating iterations run before switching to Gauss-Newton steps.
    reference : str, optional
        Series with slope fixed at 1; defaults to the one spanning most years.
    strict : bool
        Raise instead of warning when the iteration limit is hit.
    """
    comps = overlap_components(cells)
    if len(comps) > 1:
        raise DisconnectedSurveyError(
            "survey series do not overlap into one component: "
            + "; ".join("{" + ", ".join(c) + "}" for c in comps))
    years = np.array(sorted(cells["year"].unique()))
    if baseline_year not in set(years):
        raise DataError(f"no survey wave in baseline year {baseline_year}")

    series_ids = sorted(cells["series_id"].unique())
    span = cells.groupby("series_id")["year"].nunique()
    if reference is None:
        # longest series is the scale reference; ties go to the smaller id
        reference = min(series_ids, key=lambda s: (-span[s], s))
    elif reference not in span or span[reference] < 2:
        raise DataError(f"reference series {reference!r} spans fewer than 2 years")
    calibratable = {s for s in series_ids if span[s] >= 2}
    covered = set(cells.loc[cells["series_id"].isin(calibratable), "year"])
    orphan = sorted(set(years) - covered)
    if orphan:
        raise DataError(f"years covered only by single-year series: {orphan}")

    s_idx = cells["series_id"].map({s: i for i, s in enumerate(series_ids)}).to_numpy()
    t_idx = np.searchsorted(years, cells["year"].to_numpy())
    m = cells["mean"].to_numpy(dtype=float)
    w = cells["n"].to_numpy(dtype=float)
    n_s, n_t = len(series_ids), len(years)
    base = int(np.searchsorted(years, baseline_year))
    ref = series_ids.index(reference)
    fixed = np.array([s not in calibratable for s in series_ids])

    mu = _chain_start(s_idx, t_idx, m, w, n_s, n_t, ref)
    mu -= mu[base]
    free_a = ~fixed
    free_a[ref] = False
    free_mu = np.ones(n_t, dtype=bool)
    free_mu[base] = False

    # rank of the Jacobian in (free mu, free a, b) at a generic point
    a, b = _calibrate(mu, s_idx, t_idx, m, w, n_s, fixed, ref)
    probe = np.where(np.abs(a) > 1e-8, a, 1.0)
    x = mu[t_idx] + np.linspace(0.1, 0.9, n_t)[t_idx]
    jac = np.hstack([
        probe[s_idx][:, None] * (t_idx[:, None] == np.flatnonzero(free_mu)[None, :]),
        x[:, None] * (s_idx[:, None] == np.flatnonzero(free_a)[None, :]),
        (s_idx[:, None] == np.arange(n_s)[None, :]).astype(float),
    ])
    if np.linalg.matrix_rank(jac) < jac.shape[1]:
        raise DataError("calibration not identified: some series overlap the "
                        "rest in fewer than two years")

    n_iter = 0
    converged = False
    for _ in range(warm_start):
        n_iter += 1
        a, b = _calibrate(mu, s_idx, t_idx, m, w, n_s, fixed, ref)
        new = _latent(a, b, s_idx, t_idx, m, w, n_t, base)
        delta = np.max(np.abs(new - mu))
        mu = new
        if delta < tol:
            converged = True
            break

    # Gauss-Newton on the same weighted objective; ALS alone converges linearly
    a, b = _calibrate(mu, s_idx, t_idx, m, w, n_s, fixed, ref)
    sqw = np.sqrt(w)
    cost = _cost(mu, a, b, s_idx, t_idx, m, w)
    while not converged and n_iter < max_iter:
        n_iter += 1
        resid = sqw * (m - a[s_idx] * mu[t_idx] - b[s_idx])
        blocks = [
            (sqw * a[s_idx])[:, None] * (t_idx[:, None] == np.flatnonzero(free_mu)[None, :]),
            (sqw * mu[t_idx])[:, None] * (s_idx[:, None] == np.flatnonzero(free_a)[None, :]),
            sqw[:, None] * (s_idx[:, None] == np.arange(n_s)[None, :]),
        ]
        jac = np.hstack(blocks)
        step = np.linalg.lstsq(jac, resid, rcond=None)[0]
        k1, k2 = free_mu.sum(), free_a.sum()
        d_mu = np.zeros(n_t)
        d_mu[free_mu] = step[:k1]
        d_a = np.zeros(n_s)
        d_a[free_a] = step[k1:k1 + k2]
        d_b = step[k1 + k2:]
        scale = 1.0
        while True:
            trial = (mu + scale * d_mu, a + scale * d_a, b + scale * d_b)
            trial_cost = _cost(*trial, s_idx, t_idx, m, w)
            if trial_cost <= cost or scale < 1e-6:
                break
            scale /= 2
        delta = scale * np.max(np.abs(d_mu))
        mu, a, b = trial
        cost = trial_cost
        if delta < tol:
            converged = True
    if not converged:
        if strict:
            raise DataError(f"calibration did not converge in {max_iter} iterations")
        warnings.warn(f"calibration did not converge in {max_iter} iterations", RuntimeWarning)
    _check_slopes(a, series_ids)
    # refresh offsets for the final latent series
    x = mu[t_idx]
    sw = np.bincount(s_idx, w, n_s)
    b = np.bincount(s_idx, w * (m - a[s_idx] * x), n_s) / sw
    return CalibrationFit(years, mu, dict(zip(series_ids, a)), dict(zip(series_ids, b)),
                          reference, n_iter)


def _bootstrap_once(strata, baseline_year, tol, reference, respondents, seed):
    rng = np.random.default_rng(seed)
    sample = []
    for key in sorted(strata):
        pool = strata[key]
        for i in rng.integers(0, len(pool), len(pool)):
            wave = pool[i]
            if respondents:
                p = np.asarray(wave.response_counts, dtype=float) / wave.n
                counts = tuple(int(c) for c in rng.multinomial(wave.n, p))
                wave = SurveyWave(wave.series_id, wave.year, counts)
            sample.append(wave)
    try:
        fit = fit_calibration(cells_from_waves(sample), baseline_year, tol=tol,
                              reference=reference, strict=True)
    except DataError:
        return None
    return dict(zip(fit.years.tolist(), np.clip(fit.mu, -1.0, 1.0)))


class SurveyHarmonizer(BaseEstimator, TransformerMixin):
    """Fit one baseline-anchored opinion series from heterogeneous survey waves.

    Parameters
    ----------
    baseline_year : int, default=1974
    n_bootstrap : int, default=1000
        Replicates for the 95% interval. Zero disables intervals.
    resample : {"cell", "series"}, default="cell"
        ``"cell"`` resamples waves within each (series, year);
        ``"series"`` resamples waves within each series, which can drop
        years. Replicates that lose the baseline year, break the overlap or
        fail to converge are skipped.
    resample_respondents : bool, default=True
        Also redraw each resampled wave's counts from its own response
        shares, so a year observed by one wave still gets an interval.
    random_state : int, default=0
        Root seed; replicate seeds are spawned from it.
    tol : float, default=1e-9
    n_jobs : int, default=1
        Threads for bootstrap replicates. Results do not depend on it.

    Attributes
    ----------
    opinion_ : DataFrame with columns year, mu, ci_low, ci_high
    calibration_ : DataFrame with columns series_id, a, b
    n_bootstrap_used_ : int
    """

    def __init__(self, baseline_year=1974, n_bootstrap=1000, random_state=0, tol=1e-9,
                 n_jobs=1, resample="cell", resample_respondents=True):
        self.baseline_year = baseline_year
        self.resample = resample
        self.n_bootstrap = n_bootstrap
        self.resample_respondents = resample_respondents
        self.random_state = random_state
        self.tol = tol
        self.n_jobs = n_jobs

    def fit(self, X, y=None):
        waves = list(X)
        fit = fit_calibration(cells_from_waves(waves), self.baseline_year, tol=self.tol)
        excess = np.max(np.abs(fit.mu)) - 1.0
        if excess > 0.05:
            warnings.warn(f"harmonized series leaves [-1, 1] by {excess:.3f} before clamping",
                          RuntimeWarning)
        mu = np.clip(fit.mu, -1.0, 1.0)
        self.fit_ = fit
        self.calibration_ = pd.DataFrame(
            {"series_id": list(fit.a), "a": list(fit.a.values()), "b": list(fit.b.values())})

        lo, hi = mu.copy(), mu.copy()
        used = 0
        if self.n_bootstrap > 0:
            if self.resample not in ("cell", "series"):
                raise ValueError(f"resample must be 'cell' or 'series', got {self.resample!r}")
            strata = {}
            for wv in waves:
                key = (wv.series_id, wv.year if self.resample == "cell" else 0)
                strata.setdefault(key, []).append(wv)
            seeds = np.random.SeedSequence(self.random_state).spawn(self.n_bootstrap)
            args = [(strata, self.baseline_year, self.tol, fit.reference,
                     self.resample_respondents, s) for s in seeds]
            if self.n_jobs > 1:
                with ThreadPoolExecutor(max_workers=self.n_jobs) as pool:
                    reps = list(pool.map(lambda a: _bootstrap_once(*a), args))
            else:
                reps = [_bootstrap_once(*a) for a in args]
            reps = [r for r in reps if r is not None]
            used = len(reps)
            for i, year in enumerate(fit.years.tolist()):
                draws = [r[year] for r in reps if year in r]
                if draws:
                    q_lo, q_hi = np.quantile(draws, [0.025, 0.975])
                    # percentile bounds widened to contain the point estimate
                    lo[i] = min(q_lo, mu[i])
                    hi[i] = max(q_hi, mu[i])
            if used < self.n_bootstrap:
                log.info("%d of %d bootstrap replicates skipped", self.n_bootstrap - used,
                         self.n_bootstrap)
        self.n_bootstrap_used_ = used
        self.opinion_ = pd.DataFrame(
            {"year": fit.years.astype(int), "mu": mu, "ci_low": lo, "ci_high": hi})
        return self

    def transform(self, X=None):
        check_is_fitted(self)
        return self.opinion_.copy()

    @property
    def opinion(self) -> pd.Series:
        check_is_fitted(self)
        return self.opinion_.set_index("year")["mu"]


def harmonize(waves, baseline_year=1974, n_bootstrap=1000, random_state=0, n_jobs=1):
    """Functional form of :class:`SurveyHarmonizer`; returns ``(opinion, calibration)``."""
    h = SurveyHarmonizer(baseline_year, n_bootstrap, random_state, n_jobs=n_jobs).fit(waves)
    return h.opinion_, h.calibration_
