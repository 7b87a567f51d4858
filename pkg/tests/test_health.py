import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fleetlife.fleet import VoltageClass
from fleetlife.health import (
    DEFAULT_CONDITION_TRIGGER_AGE,
    PURPLE_ONSET_APPARENT_AGE,
    RED_ONSET_APPARENT_AGE,
    AhiConfig,
    AhiScore,
    Band,
    DegradationState,
    ScoreBasis,
    ahi_from_age,
    ahi_from_probability,
    apparent_age,
    band_for_score,
    score_asset,
    threshold_age,
)
from fleetlife.weibull import REFERENCE_LAWS, WeibullLaw

LAW_110 = REFERENCE_LAWS[VoltageClass.V110]
LAW_150 = REFERENCE_LAWS[VoltageClass.V150]
LAW_220 = REFERENCE_LAWS[VoltageClass.V220_380]


class TestBands:
    def test_score_to_band(self):
        assert [band_for_score(s) for s in range(1, 11)] == [
            Band.PURPLE,
            Band.PURPLE,
            Band.PURPLE,
            Band.RED,
            Band.RED,
            Band.RED,
            Band.ORANGE,
            Band.ORANGE,
            Band.GREEN,
            Band.GREEN,
        ]

    def test_out_of_range(self):
        for score in (0, 11, -3):
            with pytest.raises(ValueError):
                band_for_score(score)

    def test_score_band_consistency_enforced(self):
        with pytest.raises(ValueError, match="inconsistent"):
            AhiScore(score=2, band=Band.GREEN, basis=ScoreBasis.AGE)


class TestProbabilityScores:
    def test_short_window_bands(self):
        assert ahi_from_probability(0.85, 0.9) == 1
        assert ahi_from_probability(0.55, 0.6) == 2
        assert ahi_from_probability(0.25, 0.3) == 3

    def test_long_window_bands(self):
        assert ahi_from_probability(0.1, 0.85) == 4
        assert ahi_from_probability(0.1, 0.55) == 5
        assert ahi_from_probability(0.1, 0.25) == 6

    def test_no_band_matched(self):
        assert ahi_from_probability(0.0, 0.0) is None
        assert ahi_from_probability(0.1, 0.19) is None

    def test_threshold_inclusive(self):
        assert ahi_from_probability(0.8, 0.9) == 1
        assert ahi_from_probability(0.1, 0.2) == 6

    def test_inconsistent_inputs_rejected(self):
        with pytest.raises(ValueError, match="inconsistent"):
            ahi_from_probability(0.5, 0.4)

    def test_out_of_range_rejected(self):
        with pytest.raises(ValueError):
            ahi_from_probability(-0.1, 0.5)
        with pytest.raises(ValueError):
            ahi_from_probability(0.5, 1.2)

    @given(
        st.floats(0, 1, allow_nan=False),
        st.floats(0, 1, allow_nan=False),
        st.floats(0, 1, allow_nan=False),
    )
    @settings(max_examples=150)
    def test_monotone_in_probabilities(self, p_short, p_long, bump):
        p_long = max(p_long, p_short)
        base = ahi_from_probability(p_short, p_long)
        worse_short = min(1.0, p_short + bump)
        worse = ahi_from_probability(worse_short, max(p_long, worse_short))
        if base is not None:
            assert worse is not None and worse <= base


class TestAgeScores:
    def test_young_asset(self):
        assert ahi_from_age(3.0, 50.0) == 10
        assert ahi_from_age(3.0, 1.0) == 10

    def test_age_zero_fleet(self):
        assert ahi_from_age(0.0, 0.0) == 10

    def test_above_high_fraction(self):
        assert ahi_from_age(40.0, 50.0) == 7

    def test_between_fractions(self):
        assert ahi_from_age(35.0, 50.0) == 8

    def test_below_low_fraction(self):
        assert ahi_from_age(20.0, 50.0) == 9

    def test_boundaries(self):
        assert ahi_from_age(37.5, 50.0) == 8
        assert ahi_from_age(30.0, 50.0) == 9
        assert ahi_from_age(5.0, 50.0) == 9

    def test_invalid(self):
        with pytest.raises(ValueError):
            ahi_from_age(-1.0, 50.0)
        with pytest.raises(ValueError):
            ahi_from_age(20.0, 0.0)


class TestScoreAsset:
    def test_old_110_asset_hits_probability_band(self):
        # p over 3 years at apparent age 70 is about 0.451, clearing the 0.2
        # band of the short window
        p_short = LAW_110.conditional_failure_probability(70.0, 3.0)
        assert p_short == pytest.approx(0.45130524134, rel=1e-9)
        result = score_asset(LAW_110, 70.0, 40.0)
        assert result == AhiScore(3, Band.PURPLE, ScoreBasis.PROBABILITY)

    def test_new_asset(self):
        result = score_asset(LAW_110, 0.0, 40.0)
        assert result == AhiScore(10, Band.GREEN, ScoreBasis.AGE)

    def test_mid_age_150_asset_falls_through_to_age(self):
        assert LAW_150.conditional_failure_probability(40.0, 7.0) < 0.2
        result = score_asset(LAW_150, 40.0, 40.0)
        assert result == AhiScore(7, Band.ORANGE, ScoreBasis.AGE)

    def test_very_old_asset_is_score_one(self):
        result = score_asset(LAW_110, 100.0, 40.0)
        assert result.score == 1
        assert result.basis is ScoreBasis.PROBABILITY


class TestThresholdAge:
    def test_reference_110_long_window(self):
        t = threshold_age(LAW_110, 7.0, 0.2)
        assert 48.0 <= t <= 48.1
        assert LAW_110.conditional_failure_probability(t, 7.0) == pytest.approx(
            0.2, abs=1e-6
        )

    def test_reference_150_long_window(self):
        t = threshold_age(LAW_150, 7.0, 0.2)
        assert 58.0 <= t <= 58.1

    def test_already_above_at_zero(self):
        p0 = LAW_110.conditional_failure_probability(0.0, 3.0)
        assert p0 > 0
        assert threshold_age(LAW_110, 3.0, p0 / 2) == 0.0

    def test_non_aging_law_rejected(self):
        with pytest.raises(ValueError, match="non-monotone"):
            threshold_age(WeibullLaw(1.0, 50.0), 3.0, 0.5)
        with pytest.raises(ValueError, match="non-monotone"):
            threshold_age(WeibullLaw(0.7, 50.0), 3.0, 0.5)

    def test_unreachable_level(self):
        with pytest.raises(ValueError, match="not reached"):
            threshold_age(WeibullLaw(1.5, 50.0), 0.001, 0.999999)

    def test_round_trip_across_laws(self):
        for law in (LAW_110, LAW_150, LAW_220):
            for window in (3.0, 7.0):
                for p in (0.2, 0.5, 0.8):
                    t = threshold_age(law, window, p)
                    assert abs(
                        law.conditional_failure_probability(t, window) - p
                    ) <= 1e-6

    def test_decreasing_in_level_and_window(self):
        for law in (LAW_110, LAW_150):
            levels = [threshold_age(law, 7.0, p) for p in (0.2, 0.5, 0.8)]
            assert levels[0] < levels[1] < levels[2]
            # same level is reached later when the look-ahead is shorter
            assert threshold_age(law, 3.0, 0.2) > threshold_age(law, 7.0, 0.2)


class TestApparentAge:
    def test_identity(self):
        assert apparent_age(30.0, DegradationState()) == 30.0

    def test_faster_degradation(self):
        assert apparent_age(40.0, DegradationState(rate=1.2)) == pytest.approx(48.0)

    def test_slower_degradation(self):
        assert apparent_age(40.0, DegradationState(rate=0.8)) == pytest.approx(32.0)

    def test_offset_and_clamp(self):
        assert apparent_age(10.0, DegradationState(rate=1.0, apparent_age_offset=5.0)) == 15.0
        assert apparent_age(1.0, DegradationState(rate=1.0, apparent_age_offset=-10.0)) == 0.0

    def test_invalid(self):
        with pytest.raises(ValueError):
            apparent_age(-1.0, DegradationState())
        with pytest.raises(ValueError):
            DegradationState(rate=0.0)


def test_condition_trigger_constants():
    assert RED_ONSET_APPARENT_AGE == 50.0
    assert PURPLE_ONSET_APPARENT_AGE == 54.0
    assert DEFAULT_CONDITION_TRIGGER_AGE == 50.0


def test_config_validation():
    with pytest.raises(ValueError):
        AhiConfig(probability_bands=(0.5, 0.8, 0.2))
    with pytest.raises(ValueError):
        AhiConfig(short_window=0.0)
    with pytest.raises(ValueError):
        AhiConfig(age_fractions=(0.6, 0.75))
