"""Deterministic local instruction sets and the 64-set forgery model.

Each photon carries, for each of its two local settings, a path decision
(S = early slot, L = late slot) and a detector sign.  Under Franson
coincidence selection an event is kept only when both photons take the same
path, so setting-dependent path decisions let a local model pick which
events survive.  Mixing the two 32-set tables with weights p and 1 - p
gives CHSH value 8p - 4, which covers the whole interval [-4, 4].

Note on the table labels: the worked example in the original text calls
``(S+, S+, S-, L+)`` the first set of Table I, but those cells are the first
row of Table II.  The tables below are transcribed as printed and treated
as authoritative.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import IntEnum
from functools import cache
from itertools import product
from typing import Iterable, Mapping

from .phys_model import (
    SETTING_PAIRS,
    ChshValue,
    EmptyKeptEnsembleError,
    SettingPair,
)


class Path(IntEnum):
    """Path through the unbalanced interferometer; the value is the time slot."""

    S = 0
    L = 1


@dataclass(frozen=True, order=True)
class LocalInstruction:
    path: Path
    sign: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "path", Path(self.path))
        if self.sign not in (1, -1) or isinstance(self.sign, bool):
            raise ValueError(f"sign must be +1 or -1, got {self.sign!r}")

    @classmethod
    def parse(cls, text: str) -> "LocalInstruction":
        text = text.strip()
        if len(text) != 2 or text[0] not in "SL" or text[1] not in "+-":
            raise ValueError(f"bad instruction cell {text!r}; expected S+, S-, L+ or L-")
        return cls(Path[text[0]], 1 if text[1] == "+" else -1)

    def flipped(self) -> "LocalInstruction":
        return LocalInstruction(self.path, -self.sign)

    def __str__(self) -> str:
        return f"{self.path.name}{'+' if self.sign > 0 else '-'}"


ALL_INSTRUCTIONS = tuple(LocalInstruction(p, s) for p in Path for s in (1, -1))


@dataclass(frozen=True, order=True)
class InstructionSet:
    """One deterministic local strategy.

    ``a0``/``a1`` tell photon 1 what to do under Alice's settings A_0/A_1,
    ``b0``/``b1`` tell photon 2 what to do under Bob's settings B_0/B_1.
    """

    a0: LocalInstruction
    a1: LocalInstruction
    b0: LocalInstruction
    b1: LocalInstruction

    @classmethod
    def parse(cls, text: str | Iterable[str]) -> "InstructionSet":
        cells = text.split() if isinstance(text, str) else list(text)
        if len(cells) != 4:
            raise ValueError(f"instruction set needs 4 cells, got {len(cells)}")
        return cls(*(LocalInstruction.parse(c) for c in cells))

    def alice(self, setting: int) -> LocalInstruction:
        return (self.a0, self.a1)[setting]

    def bob(self, setting: int) -> LocalInstruction:
        return (self.b0, self.b1)[setting]

    def flipped(self) -> "InstructionSet":
        return InstructionSet(self.a0.flipped(), self.a1.flipped(),
                              self.b0.flipped(), self.b1.flipped())

    @property
    def cells(self) -> tuple[LocalInstruction, ...]:
        return (self.a0, self.a1, self.b0, self.b1)

    def __str__(self) -> str:
        return " ".join(str(c) for c in self.cells)


# Rows as printed: four instruction cells, one of them carrying "±", followed
# by the postselected contributions to <A0B0>, <A0B1>, <A1B0>, <A1B1>.
TABLE_I_ROWS = (
    "S+ S+ S+ L± | +1 rejected +1 rejected",
    "L+ L+ L+ S± | +1 rejected +1 rejected",
    "S+ S- L± S+ | rejected +1 rejected -1",
    "L+ L- S± L+ | rejected +1 rejected -1",
    "S+ L± S+ S+ | +1 +1 rejected rejected",
    "L+ S± L+ L+ | +1 +1 rejected rejected",
    "L± S+ S+ S- | rejected rejected +1 -1",
    "S± L+ L+ L- | rejected rejected +1 -1",
)

TABLE_II_ROWS = (
    "S+ S+ S- L± | -1 rejected -1 rejected",
    "L+ L+ L- S± | -1 rejected -1 rejected",
    "S+ S- L± S- | rejected -1 rejected +1",
    "L+ L- S± L- | rejected -1 rejected +1",
    "S- L± S+ S+ | -1 -1 rejected rejected",
    "L- S± L+ L+ | -1 -1 rejected rejected",
    "L± S- S+ S- | rejected rejected -1 +1",
    "S± L- L+ L- | rejected rejected -1 +1",
)


def parse_table_row(row: str) -> tuple[list[InstructionSet], tuple[int | None, ...]]:
    """Expand one printed row into its 4 instruction sets.

    The two explicit variants replace ``±`` by ``+`` and ``-``; the other two
    are obtained by flipping every sign.  Also returns the printed
    contribution columns (``None`` for "rejected").
    """
    cells_text, contrib_text = (part.split() for part in row.split("|"))
    if len(cells_text) != 4 or len(contrib_text) != 4:
        raise ValueError(f"malformed table row {row!r}")
    explicit = [
        InstructionSet.parse([c.replace("±", sign) for c in cells_text])
        for sign in "+-"
    ]
    sets = explicit + [s.flipped() for s in explicit]
    contributions = tuple(None if c == "rejected" else int(c) for c in contrib_text)
    return sets, contributions


@cache
def paper_tables() -> tuple[tuple[InstructionSet, ...], tuple[InstructionSet, ...]]:
    """The 32 + 32 instruction sets of the forgery model, rows expanded in order."""
    def expand(rows):
        return tuple(s for row in rows for s in parse_table_row(row)[0])
    return expand(TABLE_I_ROWS), expand(TABLE_II_ROWS)


@dataclass(frozen=True, eq=False)
class LhvModel:
    """A probability distribution over instruction sets."""

    weights: Mapping[InstructionSet, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        clean = {}
        for s, w in self.weights.items():
            w = float(w)
            if not math.isfinite(w) or w < 0.0:
                raise ValueError(f"weight for {s} must be finite and non-negative, got {w!r}")
            clean[s] = clean.get(s, 0.0) + w
        total = math.fsum(clean.values())
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"weights must sum to 1 (within 1e-12), got {total!r}")
        object.__setattr__(self, "weights", clean)

    def support(self) -> list[tuple[InstructionSet, float]]:
        """Positive-weight entries in a canonical (sorted) order."""
        return sorted((s, w) for s, w in self.weights.items() if w > 0.0)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, LhvModel):
            return NotImplemented
        return self.support() == other.support()

    @classmethod
    def deterministic(cls, s: InstructionSet) -> "LhvModel":
        return cls({s: 1.0})

    @classmethod
    def uniform(cls, sets: Iterable[InstructionSet]) -> "LhvModel":
        sets = list(sets)
        return cls({s: 1.0 / len(sets) for s in sets})


def paper_model(p: float) -> LhvModel:
    """Table I sets at weight p/32 each, Table II sets at (1 - p)/32 each."""
    p = float(p)
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p!r}")
    table_1, table_2 = paper_tables()
    weights = {s: p / 32 for s in table_1}
    weights.update({s: (1.0 - p) / 32 for s in table_2})
    return LhvModel(weights)


def evaluate_set(s: InstructionSet, pair: SettingPair) -> tuple[LocalInstruction, LocalInstruction]:
    return s.alice(pair.alice_setting), s.bob(pair.bob_setting)


def recompute_table_contributions(s: InstructionSet) -> tuple[int | None, ...]:
    """Franson-postselected contribution per setting pair, ``None`` if rejected."""
    out = []
    for pair in SETTING_PAIRS:
        x, y = evaluate_set(s, pair)
        out.append(x.sign * y.sign if x.path == y.path else None)
    return tuple(out)


@dataclass(frozen=True)
class ExactEvaluation:
    """Exact postselected statistics of an LHV model.

    Arrays are indexed by ``SettingPair.index``.  ``kept_joint[k]`` holds the
    conditional distribution of (a, b) over kept events in (++, +-, -+, --)
    order; ``patterns[k]`` holds the SS/SL/LS/LL probabilities.
    """

    chsh: ChshValue
    keep_fractions: tuple[float, ...]
    kept_joint: tuple[tuple[float, ...], ...]
    patterns: tuple[tuple[float, ...], ...]

    @property
    def beta(self) -> float:
        return self.chsh.beta


def _sign_index(a: int, b: int) -> int:
    return 2 * (a < 0) + (b < 0)


def model_beta_franson(model: LhvModel) -> ExactEvaluation:
    """Exact CHSH value after coincidence selection, conditional on keeping."""
    support = model.support()
    keep, kept_joint, patterns, comps = [], [], [], []
    for pair in SETTING_PAIRS:
        joint = [0.0] * 4
        pattern = [0.0] * 4
        for s, w in support:
            x, y = evaluate_set(s, pair)
            pattern[2 * x.path + y.path] += w
            if x.path == y.path:
                joint[_sign_index(x.sign, y.sign)] += w
        kept = math.fsum(joint)
        if kept <= 0.0:
            raise EmptyKeptEnsembleError(
                f"no kept events for setting pair ({pair.alice_setting}, {pair.bob_setting})")
        cond = tuple(j / kept for j in joint)
        keep.append(kept)
        kept_joint.append(cond)
        patterns.append(tuple(pattern))
        comps.append(cond[0] - cond[1] - cond[2] + cond[3])
    return ExactEvaluation(
        chsh=ChshValue.from_components(comps),
        keep_fractions=tuple(keep),
        kept_joint=tuple(kept_joint),
        patterns=tuple(patterns),
    )


def exact_marginals(model: LhvModel, kept_only: bool = False) -> dict[tuple[str, int, int], float]:
    """P(detector +1) keyed by (party, own setting, other party's setting).

    With ``kept_only`` the probability is conditional on the event being kept.
    """
    out: dict[tuple[str, int, int], float] = {}
    support = model.support()
    for pair in SETTING_PAIRS:
        i, j = pair.alice_setting, pair.bob_setting
        den = alice_up = bob_up = 0.0
        for s, w in support:
            x, y = evaluate_set(s, pair)
            if kept_only and x.path != y.path:
                continue
            den += w
            alice_up += w * (x.sign > 0)
            bob_up += w * (y.sign > 0)
        if den <= 0.0:
            raise EmptyKeptEnsembleError(f"no kept events for setting pair ({i}, {j})")
        out[("alice", i, j)] = alice_up / den
        out[("bob", j, i)] = bob_up / den
    return out


@cache
def _affinity_checked() -> bool:
    samples = [0.0, 0.25, 0.5, 0.75, 1.0]
    betas = [model_beta_franson(paper_model(p)).beta for p in samples]
    for p, b in zip(samples, betas):
        if abs(b - (8.0 * p - 4.0)) > 1e-12:
            raise AssertionError(f"beta(p) is not affine: beta({p}) = {b!r}")
    return True


def solve_p_for_beta(target: float) -> float:
    """Mixture parameter p with model_beta_franson(paper_model(p)).beta == target."""
    target = float(target)
    if not -4.0 <= target <= 4.0:
        raise ValueError(f"target beta must lie in [-4, 4], got {target!r}")
    _affinity_checked()
    return min(1.0, max(0.0, (target + 4.0) / 8.0))


def all_instruction_sets() -> list[InstructionSet]:
    """All 4**4 = 256 deterministic strategies in lexicographic order."""
    return [InstructionSet(*cells) for cells in product(ALL_INSTRUCTIONS, repeat=4)]
