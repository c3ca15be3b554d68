"""Exhaustive search over deterministic local strategies.

Two locality classes:

* ``PATH_SETTING_DEPENDENT``: path and sign may both depend on the local
  setting (all 256 strategies).  This is what a Franson-type geometry
  allows, since the setting can reach the photon before its S/L decision.
* ``PATH_FIXED``: each photon's path is the same under both local settings;
  only the sign may depend on the setting (64 strategies).  In the genuine
  geometry a setting cannot turn a kept event into a rejected one or back,
  which is what this class encodes.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

from .lhv import (
    InstructionSet,
    LhvModel,
    all_instruction_sets,
    model_beta_franson,
    paper_model,
    solve_p_for_beta,
)
from .phys_model import OUTCOME_PAIRS, SETTING_PAIRS, PhaseConfig, qm_joint_probability
from .postselect import Scheme, set_keep_pattern


class ConstraintClass(Enum):
    PATH_SETTING_DEPENDENT = "path-dependent"
    PATH_FIXED = "path-fixed"

    def contains(self, s: InstructionSet) -> bool:
        if self is ConstraintClass.PATH_SETTING_DEPENDENT:
            return True
        return s.a0.path == s.a1.path and s.b0.path == s.b1.path


def enumerate_strategies(cls: ConstraintClass) -> list[InstructionSet]:
    return [s for s in all_instruction_sets() if cls.contains(s)]


def pure_beta(s: InstructionSet, scheme: Scheme) -> float | None:
    """CHSH value of a single strategy, or None if some pair keeps nothing."""
    kept = set_keep_pattern(s, scheme)
    if not all(kept):
        return None
    comps = [s.alice(p.alice_setting).sign * s.bob(p.bob_setting).sign for p in SETTING_PAIRS]
    return float(comps[0] + comps[1] + comps[2] - comps[3])


@dataclass(frozen=True)
class SearchResult:
    constraint_class: ConstraintClass
    scheme: Scheme
    max_beta: float
    min_beta: float
    argmax: LhvModel
    argmin: LhvModel
    n_strategies: int
    n_excluded: int
    setting_independent_keep: bool
    notes: tuple[str, ...] = field(default_factory=tuple)


def _pure_extremes(strategies, scheme):
    # strategies arrive sorted; strict comparisons keep the first extremal one
    best = worst = None
    excluded = 0
    for s in strategies:
        b = pure_beta(s, scheme)
        if b is None:
            excluded += 1
            continue
        if best is None or b > best[0]:
            best = (b, s)
        if worst is None or b < worst[0]:
            worst = (b, s)
    return best, worst, excluded


def extremal_beta(cls: ConstraintClass, scheme: Scheme) -> SearchResult:
    """Largest and smallest postselected CHSH value over mixtures in ``cls``.

    When every strategy's keep status is the same for all setting pairs, the
    kept ensemble does not depend on the settings and each correlator is a
    weighted average over kept strategies, so the extremes sit at pure
    strategies.  Otherwise pure strategies cannot keep all four pairs with
    |beta| > 2, and the 64-set table family is evaluated instead; it reaches
    +-4, which is the absolute bound on any CHSH combination.
    """
    strategies = sorted(enumerate_strategies(cls))
    fixed_keep = all(len(set(set_keep_pattern(s, scheme))) == 1 for s in strategies)
    best, worst, excluded = _pure_extremes(strategies, scheme)
    notes = [f"{excluded} of {len(strategies)} strategies keep no event on some setting pair; excluded"]
    max_beta, argmax = best[0], LhvModel.deterministic(best[1])
    min_beta, argmin = worst[0], LhvModel.deterministic(worst[1])
    if not fixed_keep:
        notes.append("kept ensemble depends on settings; mixtures of the 64-set table family searched")
        for p in (0.0, 1.0):
            model = paper_model(p)
            if not all(cls.contains(s) for s, _ in model.support()):
                continue
            b = model_beta_franson(model).beta
            if b > max_beta:
                max_beta, argmax = b, model
            if b < min_beta:
                min_beta, argmin = b, model
    if cls is ConstraintClass.PATH_SETTING_DEPENDENT and scheme is Scheme.GENUINE:
        notes.append("setting-dependent paths are excluded by the genuine geometry; shown for comparison")
    return SearchResult(
        constraint_class=cls,
        scheme=scheme,
        max_beta=max_beta,
        min_beta=min_beta,
        argmax=argmax,
        argmin=argmin,
        n_strategies=len(strategies),
        n_excluded=excluded,
        setting_independent_keep=fixed_keep,
        notes=tuple(notes),
    )


def _quantum_phases_for(target: float) -> PhaseConfig | None:
    # table-family correlators are (c, c, c, -c) with c = target/4; quantum
    # phases realise that pattern only for c = +-1/sqrt(2) (and the trivial c = 0)
    if abs(target - 2 * math.sqrt(2)) < 1e-9:
        return PhaseConfig.optimal()
    if abs(target + 2 * math.sqrt(2)) < 1e-9:
        return PhaseConfig(0.0, -math.pi / 2, -3 * math.pi / 4, 3 * math.pi / 4)
    return None


@dataclass(frozen=True)
class FakeViolationReport:
    target: float
    p: float
    exact_beta: float
    keep_fractions: tuple[float, ...]
    kept_joint: tuple[tuple[float, ...], ...]
    max_deviation_from_quantum: float | None
    mc_beta: float | None = None
    mc_stderr: float | None = None
    mc_trials: int = 0


def verify_fake_violation(target: float, n_trials: int = 100_000, seed: int = 0,
                          scheme: Scheme = Scheme.FRANSON, threads: int = 1) -> FakeViolationReport:
    """Build the table-family model reaching ``target`` and check it exactly and by sampling.

    ``max_deviation_from_quantum`` compares the kept joint distribution with
    the quantum one when a phase choice reproduces the model's correlators,
    which happens only for targets +-2*sqrt(2); otherwise it is None.
    """
    from .montecarlo import LhvSource, RunConfig, estimate_chsh, run

    p = solve_p_for_beta(target)
    model = paper_model(p)
    exact = model_beta_franson(model)
    deviation = None
    phases = _quantum_phases_for(target)
    if phases is not None:
        deviation = max(
            abs(exact.kept_joint[pair.index][k] - qm_joint_probability(phases, pair, o))
            for pair in SETTING_PAIRS for k, o in enumerate(OUTCOME_PAIRS))
    mc_beta = mc_stderr = None
    if n_trials:
        est = estimate_chsh(run(RunConfig(n_trials, seed, LhvSource(model), scheme), threads=threads))
        mc_beta, mc_stderr = est.beta_hat, est.stderr
    return FakeViolationReport(
        target=float(target),
        p=p,
        exact_beta=exact.beta,
        keep_fractions=exact.keep_fractions,
        kept_joint=exact.kept_joint,
        max_deviation_from_quantum=deviation,
        mc_beta=mc_beta,
        mc_stderr=mc_stderr,
        mc_trials=n_trials,
    )
