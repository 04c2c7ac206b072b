import numpy as np
import pandas as pd
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mediaopinion.datasets import make_waves
from mediaopinion.exceptions import DataError, DisconnectedSurveyError, InvertedSeriesError
from mediaopinion.harmonize import (SurveyHarmonizer, SurveyWave, cells_from_waves,
                                    fit_calibration, read_waves, wave_mean, write_waves)

YEARS = list(range(1974, 2020))


def latent_series(seed=0):
    rng = np.random.default_rng(seed)
    mu = 0.45 * np.sin((np.array(YEARS) - 1974) / 5.0) + rng.normal(0, 0.08, len(YEARS))
    return dict(zip(YEARS, np.clip(mu, -0.7, 0.7)))


def cells(latent, specs, seed=0):
    """Noise-free cell means a * latent + b for each series span."""
    rng = np.random.default_rng(seed)
    rows = [(sid, t, a * latent[t] + b, int(rng.integers(300, 1500)))
            for sid, (first, last, a, b) in specs.items() for t in range(first, last + 1)]
    return pd.DataFrame(rows, columns=["series_id", "year", "mean", "n"])


def shifted(latent, years, base=1974):
    return np.array([latent[t] - latent[base] for t in years])


def test_wave_mean_examples():
    assert wave_mean(SurveyWave("s", 1, (0, 0, 0, 10))) == 1.0
    assert wave_mean(SurveyWave("s", 1, (5, 5))) == 0.0
    assert wave_mean(SurveyWave("s", 1, (1, 2, 3, 4))) == pytest.approx(
        (-1 * 1 + -1 / 3 * 2 + 1 / 3 * 3 + 1 * 4) / 10)
    assert round(wave_mean(SurveyWave("s", 1, (1, 2, 3, 4))), 3) == 0.333
    with pytest.raises(DataError):
        wave_mean(SurveyWave("s", 1, (0, 0)))


def test_single_series_identity():
    latent = latent_series()
    c = cells(latent, {"A": (1974, 2019, 1.0, 0.0)})
    fit = fit_calibration(c)
    np.testing.assert_allclose(fit.mu, c["mean"] - c["mean"].iloc[0], atol=1e-12)


def test_two_series_recovery():
    latent = latent_series(1)
    c = cells(latent, {"A": (1974, 1997, 1.0, 0.0), "B": (1996, 2019, 0.5, 0.1)})
    fit = fit_calibration(c)
    assert fit.mu[0] == 0.0
    assert np.max(np.abs(fit.mu - shifted(latent, fit.years))) <= 1e-6
    assert fit.a["B"] == pytest.approx(0.5, abs=1e-9)


def test_five_series_recovery():
    latent = latent_series(2)
    specs = {"A": (1974, 1990, 1.0, 0.0), "B": (1985, 2000, 0.5, 0.1),
             "C": (1999, 2010, 0.8, -0.2), "D": (1980, 1987, 1.3, 0.05),
             "E": (2005, 2019, 0.6, 0.2)}
    fit = fit_calibration(cells(latent, specs))
    assert fit.reference == "A"
    assert np.max(np.abs(fit.mu - shifted(latent, fit.years))) <= 1e-6


@settings(max_examples=30, deadline=None)
@given(st.floats(0.2, 3.0), st.floats(-0.5, 0.5), st.sampled_from(["B", "C"]))
def test_affine_invariance(c, d, which):
    latent = latent_series(3)
    specs = {"A": (1974, 2000, 1.0, 0.0), "B": (1995, 2010, 0.7, 0.1),
             "C": (2008, 2019, 1.2, -0.1)}
    base = cells(latent, specs)
    moved = base.copy()
    sel = moved["series_id"] == which
    moved.loc[sel, "mean"] = c * moved.loc[sel, "mean"] + d
    np.testing.assert_allclose(fit_calibration(moved).mu, fit_calibration(base).mu,
                               atol=1e-6)


def test_disconnected_overlap():
    latent = latent_series()
    c = cells(latent, {"A": (1974, 1990, 1, 0), "B": (1991, 2000, 1, 0)})
    with pytest.raises(DisconnectedSurveyError, match=r"\{A\}; \{B\}"):
        fit_calibration(c)


def test_missing_baseline():
    c = cells(latent_series(), {"A": (1980, 1990, 1, 0)})
    with pytest.raises(DataError, match="baseline"):
        fit_calibration(c)


def test_inverted_series():
    latent = latent_series(4)
    c = cells(latent, {"A": (1974, 2005, 1.0, 0.0), "B": (1995, 2019, -0.8, 0.0)})
    with pytest.raises(InvertedSeriesError, match="B"):
        fit_calibration(c)


def test_single_overlap_year_not_identified():
    latent = latent_series(5)
    c = cells(latent, {"A": (1974, 1990, 1.0, 0.0), "B": (1990, 2005, 0.5, 0.0)})
    with pytest.raises(DataError, match="not identified"):
        fit_calibration(c)


def test_waves_pooled_within_cell():
    waves = [SurveyWave("A", 1974, (10, 0)), SurveyWave("A", 1974, (0, 30))]
    c = cells_from_waves(waves)
    assert len(c) == 1
    assert c["mean"].iloc[0] == pytest.approx((10 * -1 + 30 * 1) / 40)
    assert c["n"].iloc[0] == 40


def test_noisy_recovery_r2():
    latent = latent_series(6)
    specs = {"A": (1974, 1995, 4, 1.0, 0.0), "B": (1990, 2010, 10, 0.6, 0.1),
             "C": (2005, 2019, 5, 0.9, -0.1)}
    waves = make_waves(latent, specs, n=500, seed=1)
    h = SurveyHarmonizer(n_bootstrap=0).fit(waves)
    truth = shifted(latent, h.opinion_["year"])
    r = np.corrcoef(h.opinion_["mu"], truth)[0, 1]
    assert r ** 2 >= 0.95
    assert h.opinion.loc[1974] == 0.0


def test_bootstrap_contains_estimate_and_shrinks():
    latent = latent_series(7)
    specs = {"A": (1974, 1992, 4, 1.0, 0.0), "B": (1988, 2005, 10, 0.6, 0.1)}
    widths = []
    for k in (1, 4):
        waves = make_waves(latent, specs, n=300, seed=2, waves_per_year=k)
        op = SurveyHarmonizer(n_bootstrap=150, random_state=3).fit(waves).opinion_
        assert (op["ci_low"] <= op["mu"]).all() and (op["mu"] <= op["ci_high"]).all()
        base = op[op["year"] == 1974].iloc[0]
        assert (base["mu"], base["ci_low"], base["ci_high"]) == (0.0, 0.0, 0.0)
        widths.append((op["ci_high"] - op["ci_low"]).mean())
    assert widths[1] < widths[0]


def test_series_resampling_mode_skips_bad_replicates():
    latent = latent_series(8)
    specs = {"A": (1974, 1992, 4, 1.0, 0.0), "B": (1985, 2005, 10, 0.6, 0.1)}
    waves = make_waves(latent, specs, n=300, seed=2)
    h = SurveyHarmonizer(n_bootstrap=60, random_state=0, resample="series").fit(waves)
    assert 0 < h.n_bootstrap_used_ < 60
    op = h.opinion_
    assert (op["ci_low"] <= op["mu"]).all() and (op["mu"] <= op["ci_high"]).all()


def test_bootstrap_independent_of_threads():
    latent = latent_series(9)
    waves = make_waves(latent, {"A": (1974, 1990, 4, 1.0, 0.0), "B": (1985, 2000, 5, 0.7, 0.0)},
                       n=200, seed=0)
    one = SurveyHarmonizer(n_bootstrap=40, random_state=11).fit(waves).opinion_
    four = SurveyHarmonizer(n_bootstrap=40, random_state=11, n_jobs=4).fit(waves).opinion_
    pd.testing.assert_frame_equal(one, four)
    other = SurveyHarmonizer(n_bootstrap=40, random_state=12).fit(waves).opinion_
    assert not other.equals(one)


def test_clamp_warning():
    c = [SurveyWave("A", 1974, (100, 0)), SurveyWave("A", 1975, (0, 100))]
    with pytest.warns(RuntimeWarning, match="before clamping"):
        h = SurveyHarmonizer(n_bootstrap=0).fit(c)
    assert h.opinion.loc[1975] == 1.0


def test_wave_file_round_trip(tmp_path):
    waves = make_waves(latent_series(), {"A": (1974, 1980, 4, 1.0, 0.0)}, n=50)
    write_waves(waves, tmp_path / "w.csv")
    assert read_waves(tmp_path / "w.csv") == waves
