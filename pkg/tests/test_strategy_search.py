import math
import random

import pytest

from etbell.lhv import all_instruction_sets, model_beta_franson, paper_model, paper_tables
from etbell.phys_model import SETTING_PAIRS
from etbell.postselect import Scheme, set_keep_pattern
from etbell.strategy_search import (
    ConstraintClass,
    _pure_extremes,
    enumerate_strategies,
    extremal_beta,
    pure_beta,
    verify_fake_violation,
)

SQRT2 = math.sqrt(2)


def test_strategy_counts():
    assert len(enumerate_strategies(ConstraintClass.PATH_SETTING_DEPENDENT)) == 256
    fixed = enumerate_strategies(ConstraintClass.PATH_FIXED)
    assert len(fixed) == 64
    assert all(s.a0.path == s.a1.path and s.b0.path == s.b1.path for s in fixed)


def test_tables_inside_full_space():
    full = set(enumerate_strategies(ConstraintClass.PATH_SETTING_DEPENDENT))
    t1, t2 = paper_tables()
    assert set(t1) <= full and set(t2) <= full


@pytest.mark.parametrize("scheme", list(Scheme))
def test_path_fixed_keep_is_setting_independent(scheme):
    count = 0
    for s in enumerate_strategies(ConstraintClass.PATH_FIXED):
        pattern = set_keep_pattern(s, scheme)
        for kept in pattern:
            assert kept == pattern[0]
            count += 1
    assert count == 256


def test_path_fixed_bound_brute_force():
    # oracle: every sign assignment of a local deterministic model
    best = max(a0 * b0 + a0 * b1 + a1 * b0 - a1 * b1
               for a0 in (1, -1) for a1 in (1, -1) for b0 in (1, -1) for b1 in (1, -1))
    assert best == 2
    for scheme in Scheme:
        r = extremal_beta(ConstraintClass.PATH_FIXED, scheme)
        assert (r.max_beta, r.min_beta) == (2.0, -2.0)
        assert r.n_excluded == 32
        assert r.setting_independent_keep


def test_path_dependent_franson_reaches_four():
    r = extremal_beta(ConstraintClass.PATH_SETTING_DEPENDENT, Scheme.FRANSON)
    assert (r.max_beta, r.min_beta) == (4.0, -4.0)
    assert r.argmax == paper_model(1.0)
    assert r.argmin == paper_model(0.0)
    assert not r.setting_independent_keep
    assert model_beta_franson(r.argmax).beta == 4.0


def test_pure_strategies_never_exceed_two():
    betas = [pure_beta(s, Scheme.FRANSON) for s in all_instruction_sets()]
    kept = [b for b in betas if b is not None]
    assert len(kept) == 32
    assert max(kept) == 2.0 and min(kept) == -2.0


def test_result_independent_of_order():
    strategies = sorted(enumerate_strategies(ConstraintClass.PATH_FIXED))
    ref = _pure_extremes(strategies, Scheme.GENUINE)
    shuffled = strategies[:]
    random.Random(4).shuffle(shuffled)
    again = _pure_extremes(shuffled, Scheme.GENUINE)
    assert (again[0][0], again[1][0], again[2]) == (ref[0][0], ref[1][0], ref[2])
    assert extremal_beta(ConstraintClass.PATH_FIXED, Scheme.GENUINE) == \
        extremal_beta(ConstraintClass.PATH_FIXED, Scheme.GENUINE)


@pytest.mark.parametrize("target,p", [(3.0, 7 / 8), (0.0, 0.5), (-1.0, 3 / 8)])
def test_fake_violation_targets(target, p):
    r = verify_fake_violation(target, n_trials=50_000, seed=2)
    assert r.p == pytest.approx(p, abs=1e-15)
    assert r.exact_beta == pytest.approx(target, abs=1e-12)
    assert r.keep_fractions == pytest.approx((0.5,) * 4, abs=1e-12)
    assert abs(r.mc_beta - target) <= 4 * r.mc_stderr
    assert r.max_deviation_from_quantum is None


@pytest.mark.parametrize("sign", [1, -1])
def test_fake_violation_matches_quantum(sign):
    r = verify_fake_violation(sign * 2 * SQRT2, n_trials=0)
    assert r.p == pytest.approx((2 + sign * SQRT2) / 4, abs=1e-15)
    assert r.max_deviation_from_quantum < 1e-12
    assert r.mc_beta is None


def test_fake_violation_rejects_out_of_range():
    with pytest.raises(ValueError):
        verify_fake_violation(4.5, n_trials=0)


def test_setting_pairs_order():
    assert [(p.alice_setting, p.bob_setting) for p in SETTING_PAIRS] == [(0, 0), (0, 1), (1, 0), (1, 1)]
