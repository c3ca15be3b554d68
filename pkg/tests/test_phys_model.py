import math

import pytest
from hypothesis import given, strategies as st

from etbell.phys_model import (
    OUTCOME_PAIRS,
    SETTING_PAIRS,
    ChshValue,
    OutcomePair,
    Party,
    PhaseConfig,
    SettingPair,
    qm_chsh,
    qm_correlator,
    qm_joint_probability,
    qm_marginal,
    reduce_angle,
)

SQRT2 = math.sqrt(2)
angles = st.floats(min_value=-20.0, max_value=20.0, allow_nan=False)
phase_configs = st.builds(PhaseConfig, angles, angles, angles, angles)


def test_joint_probability_examples(optimal_phases):
    assert qm_joint_probability(optimal_phases, SettingPair(0, 0), OutcomePair(1, 1)) == pytest.approx((2 + SQRT2) / 8, abs=1e-12)
    assert qm_joint_probability(optimal_phases, SettingPair(1, 1), OutcomePair(1, 1)) == pytest.approx((2 - SQRT2) / 8, abs=1e-12)
    quarter = PhaseConfig(0.3, 0.0, math.pi / 2 - 0.3, 0.0)
    assert qm_joint_probability(quarter, SettingPair(0, 0), OutcomePair(1, -1)) == pytest.approx(0.25, abs=1e-12)


def test_correlator_examples(optimal_phases):
    assert qm_correlator(optimal_phases, SettingPair(0, 0)) == pytest.approx(SQRT2 / 2, abs=1e-12)
    assert qm_correlator(optimal_phases, SettingPair(1, 1)) == pytest.approx(-SQRT2 / 2, abs=1e-12)
    assert qm_correlator(PhaseConfig(0.4, 0, -0.4, 0), SettingPair(0, 0)) == pytest.approx(1.0, abs=1e-12)


def test_chsh_examples(optimal_phases):
    assert qm_chsh(optimal_phases).beta == pytest.approx(2 * SQRT2, abs=1e-12)
    assert qm_chsh(PhaseConfig(0, 0, 0, 0)).beta == pytest.approx(2.0, abs=1e-12)


def test_chsh_swapped_bob_phases():
    # direct evaluation: cos(pi/4) + cos(-pi/4) + cos(3pi/4) - cos(pi/4) = 0
    phases = PhaseConfig(0, math.pi / 2, math.pi / 4, -math.pi / 4)
    by_hand = (math.cos(math.pi / 4) + math.cos(-math.pi / 4)
               + math.cos(3 * math.pi / 4) - math.cos(math.pi / 4))
    assert by_hand == pytest.approx(0.0, abs=1e-15)
    assert qm_chsh(phases).beta == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("party,setting,sign", [(Party.ALICE, 0, 1), (Party.BOB, 1, -1),
                                                 (Party.ALICE, 1, -1), (Party.BOB, 0, 1)])
def test_marginal_examples(optimal_phases, party, setting, sign):
    for other in (0, 1):
        assert qm_marginal(optimal_phases, party, setting, sign, other) == pytest.approx(0.5, abs=1e-12)


@given(phase_configs)
def test_normalization_and_nonnegativity(phases):
    for pair in SETTING_PAIRS:
        probs = [qm_joint_probability(phases, pair, o) for o in OUTCOME_PAIRS]
        assert min(probs) >= 0.0
        assert abs(sum(probs) - 1.0) < 1e-12


@given(phase_configs)
def test_no_signaling(phases):
    for party in Party:
        for setting in (0, 1):
            for sign in (1, -1):
                m0 = qm_marginal(phases, party, setting, sign, 0)
                m1 = qm_marginal(phases, party, setting, sign, 1)
                assert abs(m0 - m1) < 1e-12
                assert abs(m0 - 0.5) < 1e-12


@given(phase_configs)
def test_correlator_is_cosine(phases):
    for pair in SETTING_PAIRS:
        expected = math.cos(phases.alice(pair.alice_setting) + phases.bob(pair.bob_setting))
        assert qm_correlator(phases, pair) == pytest.approx(expected, abs=1e-12)


def test_tsirelson_grid():
    grid = [k * math.pi / 8 for k in range(-8, 8)]
    worst = 0.0
    for a0 in grid:
        for a1 in grid:
            for b0 in grid:
                for b1 in grid[::2]:
                    worst = max(worst, abs(qm_chsh(PhaseConfig(a0, a1, b0, b1)).beta))
    assert worst <= 2 * SQRT2 + 1e-9
    assert worst == pytest.approx(2 * SQRT2, abs=1e-12)


@given(angles)
def test_reduce_angle_range(phi):
    r = reduce_angle(phi)
    assert -math.pi < r <= math.pi
    assert math.cos(r) == pytest.approx(math.cos(phi), abs=1e-9)


def test_reduce_angle_boundary():
    assert reduce_angle(-math.pi) == pytest.approx(math.pi)
    assert reduce_angle(3 * math.pi) == pytest.approx(math.pi)
    with pytest.raises(ValueError):
        PhaseConfig(float("nan"), 0, 0, 0)


def test_invalid_indices():
    with pytest.raises(ValueError):
        SettingPair(2, 0)
    with pytest.raises(ValueError):
        OutcomePair(0, 1)
    with pytest.raises(ValueError):
        ChshValue.from_components([1.5, 0, 0, 0])


def test_chsh_combination():
    v = ChshValue.from_components([0.1, 0.2, 0.3, 0.4])
    assert v.beta == pytest.approx(0.2)
    assert tuple(v) == (0.1, 0.2, 0.3, 0.4)
