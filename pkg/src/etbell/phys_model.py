"""Quantum predictions for a two-setting, two-outcome energy-time Bell test.

Coincident two-photon events obey

    P(A_i = a, B_j = b) = (1 + a*b*cos(phi_Ai + phi_Bj)) / 4

and every single-detector marginal is 1/2.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterator

SIGNS = (1, -1)


def reduce_angle(phi: float) -> float:
    """Map ``phi`` into the half-open interval (-pi, pi]."""
    if not math.isfinite(phi):
        raise ValueError(f"phase must be finite, got {phi!r}")
    r = math.remainder(phi, 2.0 * math.pi)  # [-pi, pi]
    if r <= -math.pi:
        r += 2.0 * math.pi
    return r


@dataclass(frozen=True)
class PhaseConfig:
    """Analyzer phases in radians. Values are reduced to (-pi, pi]."""

    phi_a0: float
    phi_a1: float
    phi_b0: float
    phi_b1: float

    def __post_init__(self) -> None:
        for name in ("phi_a0", "phi_a1", "phi_b0", "phi_b1"):
            object.__setattr__(self, name, reduce_angle(float(getattr(self, name))))

    @classmethod
    def optimal(cls) -> "PhaseConfig":
        """Phases giving the maximal quantum violation 2*sqrt(2)."""
        return cls(0.0, math.pi / 2, -math.pi / 4, math.pi / 4)

    def alice(self, setting: int) -> float:
        return (self.phi_a0, self.phi_a1)[setting]

    def bob(self, setting: int) -> float:
        return (self.phi_b0, self.phi_b1)[setting]

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.phi_a0, self.phi_a1, self.phi_b0, self.phi_b1)


@dataclass(frozen=True)
class SettingPair:
    alice_setting: int
    bob_setting: int

    def __post_init__(self) -> None:
        for v in (self.alice_setting, self.bob_setting):
            if v not in (0, 1) or isinstance(v, bool):
                raise ValueError(f"setting index must be 0 or 1, got {v!r}")

    @property
    def index(self) -> int:
        """Flat index 2*i + j, used for tally arrays."""
        return 2 * self.alice_setting + self.bob_setting


SETTING_PAIRS = tuple(SettingPair(i, j) for i in (0, 1) for j in (0, 1))


@dataclass(frozen=True)
class OutcomePair:
    a: int
    b: int

    def __post_init__(self) -> None:
        for v in (self.a, self.b):
            if v not in (1, -1) or isinstance(v, bool):
                raise ValueError(f"outcome must be +1 or -1, got {v!r}")


OUTCOME_PAIRS = tuple(OutcomePair(a, b) for a in SIGNS for b in SIGNS)


class EmptyKeptEnsembleError(ValueError):
    """Raised when postselection keeps nothing for some setting pair."""


class Party(Enum):
    ALICE = "alice"
    BOB = "bob"


@dataclass(frozen=True)
class ChshValue:
    """CHSH combination together with its four correlators.

    ``components`` is ordered (c00, c01, c10, c11) where ``cij`` is <A_i B_j>.
    """

    beta: float
    components: tuple[float, float, float, float]

    @classmethod
    def from_components(cls, components) -> "ChshValue":
        c00, c01, c10, c11 = (float(c) for c in components)
        for c in (c00, c01, c10, c11):
            if not -1.0 - 1e-12 <= c <= 1.0 + 1e-12:
                raise ValueError(f"correlator outside [-1, 1]: {c!r}")
        return cls(beta=chsh_combination(c00, c01, c10, c11),
                   components=(c00, c01, c10, c11))

    def __iter__(self) -> Iterator[float]:
        return iter(self.components)


def chsh_combination(c00: float, c01: float, c10: float, c11: float) -> float:
    return c00 + c01 + c10 - c11


def qm_joint_probability(phases: PhaseConfig, pair: SettingPair,
                         outcome: OutcomePair) -> float:
    angle = phases.alice(pair.alice_setting) + phases.bob(pair.bob_setting)
    return 0.25 * (1.0 + outcome.a * outcome.b * math.cos(angle))


def qm_marginal(phases: PhaseConfig, party: Party, setting: int, sign: int,
                other_setting: int = 0) -> float:
    """Single-detector probability, summed out of the joint distribution.

    ``other_setting`` selects the setting of the party being summed over; the
    result does not depend on it.
    """
    if party is Party.ALICE:
        pair = SettingPair(setting, other_setting)
        return sum(qm_joint_probability(phases, pair, OutcomePair(sign, b))
                   for b in SIGNS)
    pair = SettingPair(other_setting, setting)
    return sum(qm_joint_probability(phases, pair, OutcomePair(a, sign))
               for a in SIGNS)


def qm_correlator(phases: PhaseConfig, pair: SettingPair) -> float:
    return sum(o.a * o.b * qm_joint_probability(phases, pair, o)
               for o in OUTCOME_PAIRS)


def qm_chsh(phases: PhaseConfig) -> ChshValue:
    return ChshValue.from_components(
        [qm_correlator(phases, pair) for pair in SETTING_PAIRS])


def qm_joint_table(phases: PhaseConfig) -> list[list[float]]:
    """4x4 table ``t[pair.index][k]`` over OUTCOME_PAIRS order (++, +-, -+, --)."""
    return [[qm_joint_probability(phases, pair, o) for o in OUTCOME_PAIRS]
            for pair in SETTING_PAIRS]
