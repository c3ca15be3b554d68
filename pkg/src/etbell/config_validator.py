"""Timing and geometry checks for the two interferometer layouts.

Qualitative conditions are turned into numbers by fixed conventions:
"much greater than" means a factor 100, "of the order of" accepts anything
down to a tenth of the nominal value, and "negligible" means at most 1e-2.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, fields

from .postselect import Scheme

SPEED_OF_LIGHT = 299_792_458.0  # m/s

MUCH_GREATER_FACTOR = 100.0
ORDER_OF_FACTOR = 10.0
NEGLIGIBLE = 1e-2


@dataclass(frozen=True)
class GeometryConfig:
    """Experiment parameters in SI units.

    ``delta_l`` is the long/short path difference (Delta L for Franson,
    Delta L' for the genuine layout); ``source_distance`` is D or D'.
    """

    scheme: Scheme
    delta_l: float
    coherence_time: float
    coincidence_window: float
    dead_time: float
    source_distance: float
    switch_frequency: float
    pair_rate: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "scheme", Scheme(self.scheme))
        for f in fields(self):
            if f.name == "scheme":
                continue
            v = float(getattr(self, f.name))
            if not math.isfinite(v) or v <= 0.0:
                raise ValueError(f"{f.name} must be strictly positive, got {v!r}")
            object.__setattr__(self, f.name, v)


@dataclass(frozen=True)
class RequirementCheck:
    """Outcome of one requirement.

    ``passed`` is None for informational items.  ``margin`` is the relative
    slack, non-negative exactly when the check passes.
    """

    id: str
    passed: bool | None
    margin: float | None
    detail: str
    convention: str | None = None


def _greater(id_, lhs, rhs, detail, convention=None, strict=True):
    margin = lhs / rhs - 1.0
    passed = margin > 0.0 if strict else margin >= 0.0
    return RequirementCheck(id_, passed, margin, detail, convention)


def _smaller(id_, lhs, rhs, detail, convention=None, strict=True):
    margin = 1.0 - lhs / rhs
    passed = margin > 0.0 if strict else margin >= 0.0
    return RequirementCheck(id_, passed, margin, detail, convention)


def _switching(id_, cfg: GeometryConfig, distance_name: str) -> RequirementCheck:
    nominal = SPEED_OF_LIGHT / cfg.source_distance
    return _greater(
        id_, cfg.switch_frequency, nominal / ORDER_OF_FACTOR,
        f"switch_frequency {cfg.switch_frequency:.6g} Hz vs c/{distance_name} = {nominal:.6g} Hz",
        convention=f"'of the order c/{distance_name}' accepted down to 1/{ORDER_OF_FACTOR:g} of it",
        strict=False)


def validate(cfg: GeometryConfig) -> list[RequirementCheck]:
    c = SPEED_OF_LIGHT
    if cfg.scheme is Scheme.FRANSON:
        return [
            RequirementCheck("I", None, None,
                             "simultaneous, unpredictable emission and identical interferometers (not checked)"),
            _greater("II", cfg.delta_l, c * cfg.coherence_time,
                     f"delta_L {cfg.delta_l:.6g} m > c*t_coh {c * cfg.coherence_time:.6g} m"),
            _greater("III", cfg.delta_l, c * cfg.coincidence_window,
                     f"delta_L {cfg.delta_l:.6g} m > c*dt_coinc {c * cfg.coincidence_window:.6g} m"),
            _switching("IV", cfg, "D"),
        ]
    gap = cfg.delta_l / c
    return [
        RequirementCheck("I'", None, None,
                         "simultaneous, unpredictable emission and identical arms (not checked)"),
        RequirementCheck("II'", None, None,
                         "single-photon interference impossible by construction of the layout"),
        _smaller("III'", cfg.dead_time, gap,
                 f"dead_time {cfg.dead_time:.6g} s < delta_L'/c {gap:.6g} s"),
        _smaller("IV'", cfg.pair_rate * gap, NEGLIGIBLE,
                 f"pairs per delta_L'/c window {cfg.pair_rate * gap:.6g}",
                 convention=f"'negligible' means <= {NEGLIGIBLE:g}", strict=False),
        _switching("V'", cfg, "D'"),
        _greater("V'-distance", cfg.source_distance, MUCH_GREATER_FACTOR * cfg.delta_l,
                 f"D' {cfg.source_distance:.6g} m >> delta_L' {cfg.delta_l:.6g} m",
                 convention=f"'>>' means at least {MUCH_GREATER_FACTOR:g} times", strict=False),
    ]


def all_pass(checks: list[RequirementCheck]) -> bool:
    return all(ch.passed is not False for ch in checks)
