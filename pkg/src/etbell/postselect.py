"""Routing of photons to detectors and the two postselection rules.

Franson geometry: photon 1 always lands on Alice's detectors (left) and
photon 2 on Bob's (right); only the arrival slot tells S from L, so the
keep/reject decision needs both sides' records.

Genuine geometry: the S path of each photon ends on its own side, the L
path crosses to the other side.  Mixed S/L events put both detections on one
side, so each observer can reject locally.  The sign instruction travels
with the photon to whichever detector pair it reaches; rejected events never
enter a correlator, so this convention does not affect any CHSH value.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from .lhv import InstructionSet, LhvModel, Path, evaluate_set
from .phys_model import SETTING_PAIRS, SettingPair


class Scheme(Enum):
    FRANSON = "franson"
    GENUINE = "genuine"


class Side(Enum):
    LEFT = "left"
    RIGHT = "right"


@dataclass(frozen=True)
class DetectionEvent:
    side: Side
    detector_sign: int
    time_slot: int
    scheme: Scheme

    def __post_init__(self) -> None:
        if self.detector_sign not in (1, -1):
            raise ValueError(f"detector sign must be +1 or -1, got {self.detector_sign!r}")
        if self.time_slot not in (0, 1):
            raise ValueError(f"time slot must be 0 or 1, got {self.time_slot!r}")


def route_franson(path1: Path, path2: Path, signs: tuple[int, int]) -> tuple[DetectionEvent, DetectionEvent]:
    return (DetectionEvent(Side.LEFT, signs[0], int(path1), Scheme.FRANSON),
            DetectionEvent(Side.RIGHT, signs[1], int(path2), Scheme.FRANSON))


def route_genuine(path1: Path, path2: Path, signs: tuple[int, int]) -> tuple[DetectionEvent, DetectionEvent]:
    side1 = Side.LEFT if path1 == Path.S else Side.RIGHT
    side2 = Side.RIGHT if path2 == Path.S else Side.LEFT
    return (DetectionEvent(side1, signs[0], int(path1), Scheme.GENUINE),
            DetectionEvent(side2, signs[1], int(path2), Scheme.GENUINE))


ROUTERS = {Scheme.FRANSON: route_franson, Scheme.GENUINE: route_genuine}


def route(scheme: Scheme, path1: Path, path2: Path, signs: tuple[int, int]) -> tuple[DetectionEvent, DetectionEvent]:
    return ROUTERS[scheme](path1, path2, signs)


def keep(e1: DetectionEvent, e2: DetectionEvent, scheme: Scheme) -> bool:
    """Coincidence selection (Franson) or opposite-side selection (genuine)."""
    if e1.scheme is not scheme or e2.scheme is not scheme:
        raise ValueError(
            f"events routed under {e1.scheme.value}/{e2.scheme.value} "
            f"cannot be postselected under {scheme.value}")
    coincident = e1.time_slot == e2.time_slot
    if scheme is Scheme.FRANSON:
        return coincident
    opposite = e1.side is not e2.side
    if opposite != coincident:
        raise AssertionError(f"inconsistent genuine routing: {e1}, {e2}")
    return opposite


@dataclass(frozen=True)
class TrialOutcome:
    pair: SettingPair
    event1: DetectionEvent
    event2: DetectionEvent
    scheme: Scheme
    kept: bool = field(init=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "kept", keep(self.event1, self.event2, self.scheme))


def set_keep_pattern(s: InstructionSet, scheme: Scheme) -> tuple[bool, ...]:
    """Keep status of a deterministic strategy for each setting pair."""
    out = []
    for pair in SETTING_PAIRS:
        x, y = evaluate_set(s, pair)
        e1, e2 = route(scheme, x.path, y.path, (x.sign, y.sign))
        out.append(keep(e1, e2, scheme))
    return tuple(out)


@dataclass(frozen=True)
class IndependenceReport:
    """Setting dependence of the kept subensemble.

    ``witnesses`` lists support sets whose keep status varies across setting
    pairs, each with the pairs under which it is rejected.
    """

    scheme: Scheme
    constraint_class: str | None
    keep_probabilities: tuple[float, ...]
    max_difference: float
    witnesses: tuple[tuple[InstructionSet, tuple[tuple[int, int], ...]], ...]
    outside_class: int

    @property
    def setting_independent(self) -> bool:
        return not self.witnesses


def setting_independence_check(model: LhvModel, scheme: Scheme,
                               constraint_class=None) -> IndependenceReport:
    """Per-pair keep probabilities and per-strategy setting dependence.

    ``constraint_class`` (a ``strategy_search.ConstraintClass``) is optional;
    when given, support sets outside the class are counted.
    """
    keep_prob = [0.0] * 4
    witnesses = []
    outside = 0
    for s, w in model.support():
        pattern = set_keep_pattern(s, scheme)
        for k, kept in enumerate(pattern):
            keep_prob[k] += w * kept
        if len(set(pattern)) > 1:
            rejected = tuple((p.alice_setting, p.bob_setting)
                             for p, kept in zip(SETTING_PAIRS, pattern) if not kept)
            witnesses.append((s, rejected))
        if constraint_class is not None and not constraint_class.contains(s):
            outside += 1
    diff = max(keep_prob) - min(keep_prob)
    return IndependenceReport(
        scheme=scheme,
        constraint_class=None if constraint_class is None else constraint_class.value,
        keep_probabilities=tuple(keep_prob),
        max_difference=diff,
        witnesses=tuple(witnesses),
        outside_class=outside,
    )
