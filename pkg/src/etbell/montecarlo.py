"""Seeded trial engine: settings, sources, routing, postselection, tallies.

Trials are independent and each one reads its own slice of a counter-based
SplitMix64 stream, so any split of the trial range over threads gives the
same tallies.  Tallies merge by addition.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterator, Sequence, Union

import numpy as np

from . import kernels
from ._kernels_py import raw_draws
from .lhv import LhvModel, Path
from .phys_model import (
    OUTCOME_PAIRS,
    SETTING_PAIRS,
    ChshValue,
    EmptyKeptEnsembleError,
    PhaseConfig,
    qm_joint_table,
)
from .postselect import Scheme, TrialOutcome, route

PATTERNS = ("SS", "SL", "LS", "LL")
UNIFORM_SETTINGS = (0.25, 0.25, 0.25, 0.25)


@dataclass(frozen=True)
class QuantumSource:
    phases: PhaseConfig


@dataclass(frozen=True)
class LhvSource:
    model: LhvModel


Source = Union[QuantumSource, LhvSource]


@dataclass(frozen=True)
class RunConfig:
    n_trials: int
    seed: int
    source: Source
    scheme: Scheme = Scheme.GENUINE
    setting_probs: tuple[float, float, float, float] = UNIFORM_SETTINGS

    def __post_init__(self) -> None:
        if isinstance(self.n_trials, bool) or int(self.n_trials) != self.n_trials or self.n_trials < 1:
            raise ValueError(f"n_trials must be a positive integer, got {self.n_trials!r}")
        if not 0 <= self.seed < 2**64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {self.seed!r}")
        if not isinstance(self.source, (QuantumSource, LhvSource)):
            raise TypeError(f"unknown source {self.source!r}")
        probs = tuple(float(p) for p in self.setting_probs)
        if len(probs) != 4 or any(not math.isfinite(p) or p < 0 for p in probs):
            raise ValueError(f"setting_probs must be four non-negative numbers, got {self.setting_probs!r}")
        if abs(math.fsum(probs) - 1.0) > 1e-12:
            raise ValueError(f"setting_probs must sum to 1, got {math.fsum(probs)!r}")
        object.__setattr__(self, "setting_probs", probs)
        object.__setattr__(self, "scheme", Scheme(self.scheme))


@dataclass
class TallySet:
    """Counts over trials.

    ``kept[i, j, a, b]`` and ``total[i, j, a, b]`` use sign index 0 for +1 and
    1 for -1; ``total`` includes rejected trials.  ``patterns[i, j, k]``
    counts slot patterns in SS, SL, LS, LL order.
    """

    kept: np.ndarray = field(default_factory=lambda: np.zeros((2, 2, 2, 2), dtype=np.int64))
    total: np.ndarray = field(default_factory=lambda: np.zeros((2, 2, 2, 2), dtype=np.int64))
    patterns: np.ndarray = field(default_factory=lambda: np.zeros((2, 2, 4), dtype=np.int64))

    @classmethod
    def from_flat(cls, kept, total, patterns) -> "TallySet":
        return cls(np.asarray(kept, dtype=np.int64).reshape(2, 2, 2, 2),
                   np.asarray(total, dtype=np.int64).reshape(2, 2, 2, 2),
                   np.asarray(patterns, dtype=np.int64).reshape(2, 2, 4))

    def __add__(self, other: "TallySet") -> "TallySet":
        return TallySet(self.kept + other.kept, self.total + other.total,
                        self.patterns + other.patterns)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TallySet):
            return NotImplemented
        return (np.array_equal(self.kept, other.kept)
                and np.array_equal(self.total, other.total)
                and np.array_equal(self.patterns, other.patterns))

    @property
    def n_trials(self) -> int:
        return int(self.total.sum())

    def trials_per_pair(self) -> np.ndarray:
        return self.total.sum(axis=(2, 3))

    def kept_per_pair(self) -> np.ndarray:
        return self.kept.sum(axis=(2, 3))

    def rejected_per_pair(self) -> np.ndarray:
        return self.trials_per_pair() - self.kept_per_pair()

    def record(self, outcome: TrialOutcome) -> None:
        i, j = outcome.pair.alice_setting, outcome.pair.bob_setting
        a = int(outcome.event1.detector_sign < 0)
        b = int(outcome.event2.detector_sign < 0)
        self.total[i, j, a, b] += 1
        if outcome.kept:
            self.kept[i, j, a, b] += 1
        self.patterns[i, j, 2 * outcome.event1.time_slot + outcome.event2.time_slot] += 1

    def check(self) -> None:
        for arr in (self.kept, self.total, self.patterns):
            if (arr < 0).any():
                raise ValueError("negative count in tallies")
        if (self.kept > self.total).any():
            raise ValueError("kept count exceeds total")
        if not np.array_equal(self.patterns.sum(axis=2), self.trials_per_pair()):
            raise ValueError("slot patterns do not add up to trial counts")


@dataclass(frozen=True)
class ChshEstimate:
    beta_hat: float
    stderr: float
    correlators: tuple[float, float, float, float]
    correlator_stderrs: tuple[float, float, float, float]
    kept_counts: tuple[int, int, int, int]

    def as_chsh_value(self) -> ChshValue:
        return ChshValue(self.beta_hat, self.correlators)


def _cumulative(probs: Sequence[float]) -> np.ndarray:
    probs = np.asarray(probs, dtype=np.float64)
    cum = np.cumsum(probs)
    last = int(np.flatnonzero(probs > 0)[-1])
    cum[last:] = 1.0
    return cum


def _lhv_arrays(model: LhvModel):
    support = model.support()
    weights = [w for _, w in support]
    alice = np.array([[2 * c.path + (c.sign < 0) for c in (s.a0, s.a1)] for s, _ in support],
                     dtype=np.int64)
    bob = np.array([[2 * c.path + (c.sign < 0) for c in (s.b0, s.b1)] for s, _ in support],
                   dtype=np.int64)
    return _cumulative(weights), alice, bob


def _kernel_call(config: RunConfig):
    """Bind the source-specific kernel; returns ``f(start, stop) -> flat tallies``."""
    setting_cum = _cumulative(config.setting_probs)
    if isinstance(config.source, QuantumSource):
        joint_cum = np.array([_cumulative(row) for row in qm_joint_table(config.source.phases)])
        return lambda lo, hi: kernels.tally_quantum(config.seed, lo, hi, setting_cum, joint_cum)
    set_cum, alice, bob = _lhv_arrays(config.source.model)
    return lambda lo, hi: kernels.tally_lhv(config.seed, lo, hi, setting_cum, set_cum, alice, bob)


def partition(n: int, parts: int) -> list[tuple[int, int]]:
    parts = max(1, min(parts, n))
    step, extra = divmod(n, parts)
    bounds, lo = [], 0
    for k in range(parts):
        hi = lo + step + (k < extra)
        bounds.append((lo, hi))
        lo = hi
    return bounds


def run(config: RunConfig, threads: int = 1, chunks: int | None = None) -> TallySet:
    """Run ``config.n_trials`` trials; the result depends only on ``config``.

    The trial range is cut into ``chunks`` pieces (default: one per thread)
    which are tallied independently and summed once all have finished.
    """
    if threads < 1:
        raise ValueError(f"threads must be >= 1, got {threads!r}")
    call = _kernel_call(config)
    ranges = partition(config.n_trials, chunks or threads)
    if threads == 1:
        parts = [call(lo, hi) for lo, hi in ranges]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda r: call(*r), ranges))
    tallies = TallySet()
    for part in parts:
        tallies = tallies + TallySet.from_flat(*part)
    return tallies


def _uniform(x: int) -> float:
    return (x >> 11) * (1.0 / 9007199254740992.0)


def _first_above(cum: np.ndarray, u: float) -> int:
    for k, c in enumerate(cum):
        if u < c:
            return k
    return len(cum) - 1


def iter_trials(config: RunConfig, start: int = 0, stop: int | None = None) -> Iterator[TrialOutcome]:
    """Event-level trial records for [start, stop), one detection pair each.

    Reads the same random stream as the kernels but goes through the scalar
    routing and postselection functions; intended for inspection and for
    cross-checking the kernels on small runs.
    """
    stop = config.n_trials if stop is None else stop
    setting_cum = _cumulative(config.setting_probs)
    if isinstance(config.source, QuantumSource):
        joint_cum = [_cumulative(row) for row in qm_joint_table(config.source.phases)]
    else:
        support = config.source.model.support()
        set_cum = _cumulative([w for _, w in support])
    with np.errstate(over="ignore"):
        for t in range(start, stop):
            tt = np.array([t], dtype=np.uint64)
            draws = [int(raw_draws(config.seed, tt, k)[0]) for k in range(4)]
            pair = SETTING_PAIRS[_first_above(setting_cum, _uniform(draws[0]))]
            if isinstance(config.source, QuantumSource):
                pattern = draws[1] >> 62
                path1, path2 = Path(pattern >> 1), Path(pattern & 1)
                if path1 == path2:
                    o = OUTCOME_PAIRS[_first_above(joint_cum[pair.index], _uniform(draws[2]))]
                else:
                    o = OUTCOME_PAIRS[draws[3] >> 62]
                signs = (o.a, o.b)
            else:
                s = support[_first_above(set_cum, _uniform(draws[1]))][0]
                x, y = s.alice(pair.alice_setting), s.bob(pair.bob_setting)
                path1, path2, signs = x.path, y.path, (x.sign, y.sign)
            e1, e2 = route(config.scheme, path1, path2, signs)
            yield TrialOutcome(pair, e1, e2, config.scheme)


def tally_outcomes(outcomes) -> TallySet:
    tallies = TallySet()
    for o in outcomes:
        tallies.record(o)
    return tallies


def estimate_chsh(tallies: TallySet) -> ChshEstimate:
    """CHSH estimate from kept counts with plug-in binomial standard errors."""
    comps, errs, counts = [], [], []
    for pair in SETTING_PAIRS:
        n = tallies.kept[pair.alice_setting, pair.bob_setting]
        n_kept = int(n.sum())
        if n_kept == 0:
            raise EmptyKeptEnsembleError(
                f"no kept trials for setting pair ({pair.alice_setting}, {pair.bob_setting})")
        c = float(n[0, 0] + n[1, 1] - n[0, 1] - n[1, 0]) / n_kept
        comps.append(c)
        errs.append(math.sqrt(max(0.0, 1.0 - c * c) / n_kept))
        counts.append(n_kept)
    value = ChshValue.from_components(comps)
    return ChshEstimate(
        beta_hat=value.beta,
        stderr=math.sqrt(sum(e * e for e in errs)),
        correlators=value.components,
        correlator_stderrs=tuple(errs),
        kept_counts=tuple(counts),
    )


def split_fractions(tallies: TallySet) -> dict[str, float]:
    n = tallies.n_trials
    if n < 1:
        raise ValueError("no trials recorded")
    totals = tallies.patterns.sum(axis=(0, 1))
    return {name: float(totals[k]) / n for k, name in enumerate(PATTERNS)}


def keep_fractions(tallies: TallySet) -> np.ndarray:
    """Kept fraction per setting pair (NaN where a pair received no trials)."""
    trials = tallies.trials_per_pair()
    with np.errstate(invalid="ignore", divide="ignore"):
        return tallies.kept_per_pair() / trials


def marginal_counts(tallies: TallySet, kept_only: bool = False) -> dict[tuple[str, int], tuple[int, int]]:
    """(count of +1, count) for each (party, setting), pooled over the other setting."""
    arr = tallies.kept if kept_only else tallies.total
    out = {}
    for s in (0, 1):
        alice = arr[s]          # [j, a, b]
        bob = arr[:, s]         # [i, a, b]
        out[("alice", s)] = (int(alice[:, 0, :].sum()), int(alice.sum()))
        out[("bob", s)] = (int(bob[:, :, 0].sum()), int(bob.sum()))
    return out
