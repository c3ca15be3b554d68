"""Vectorised numpy implementation of the trial kernels.

Random numbers come from SplitMix64 with random access: draw ``k`` of trial
``t`` is the SplitMix64 output for counter ``n = 4*t + k + 1``, i.e.
``mix(seed + n * 0x9E3779B97F4A7C15)``.  Any partition of the trial range
therefore reproduces the same stream.  The compiled kernel in ``_kernels.pyx``
must stay bit-identical to this module.
"""
from __future__ import annotations

import numpy as np

GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
DRAWS_PER_TRIAL = 4
BLOCK = 1 << 18

IMPLEMENTATION = "numpy"


def _mix(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


def raw_draws(seed: int, trials: np.ndarray, k: int) -> np.ndarray:
    counter = trials * np.uint64(DRAWS_PER_TRIAL) + np.uint64(k + 1)
    return _mix(np.uint64(seed) + counter * GOLDEN)


def _uniform(x: np.ndarray) -> np.ndarray:
    return (x >> np.uint64(11)).astype(np.float64) * (1.0 / 9007199254740992.0)


def _first_above(cum: np.ndarray, u: np.ndarray) -> np.ndarray:
    # first k with u < cum[k]
    return np.searchsorted(cum, u, side="right")


def _blocks(start: int, stop: int):
    for lo in range(start, stop, BLOCK):
        yield np.arange(lo, min(stop, lo + BLOCK), dtype=np.uint64)


def tally_quantum(seed, start, stop, setting_cum, joint_cum):
    """Tally trials [start, stop) drawn from the quantum source.

    Returns ``(kept, total, patterns)``, each int64 of length 16 indexed by
    ``4*pair + j``; ``j`` is the sign index (++, +-, -+, --) for ``kept`` and
    ``total`` and the slot pattern (SS, SL, LS, LL) for ``patterns``.
    """
    setting_cum = np.asarray(setting_cum, dtype=np.float64)
    joint_cum = np.asarray(joint_cum, dtype=np.float64)
    kept = np.zeros(16, dtype=np.int64)
    total = np.zeros(16, dtype=np.int64)
    patterns = np.zeros(16, dtype=np.int64)
    with np.errstate(over="ignore"):
        for t in _blocks(start, stop):
            pair = _first_above(setting_cum, _uniform(raw_draws(seed, t, 0)))
            pattern = (raw_draws(seed, t, 1) >> np.uint64(62)).astype(np.int64)
            coincident = (pattern == 0) | (pattern == 3)
            u2 = _uniform(raw_draws(seed, t, 2))
            quantum = np.empty(len(t), dtype=np.int64)
            for k in range(4):
                sel = pair == k
                quantum[sel] = _first_above(joint_cum[k], u2[sel])
            fair = (raw_draws(seed, t, 3) >> np.uint64(62)).astype(np.int64)
            outcome = np.where(coincident, quantum, fair)
            idx = 4 * pair + outcome
            total += np.bincount(idx, minlength=16)
            kept += np.bincount(idx[coincident], minlength=16)
            patterns += np.bincount(4 * pair + pattern, minlength=16)
    return kept, total, patterns


def tally_lhv(seed, start, stop, setting_cum, set_cum, alice_code, bob_code):
    """Tally trials [start, stop) drawn from an instruction-set mixture.

    ``alice_code[s, i]`` / ``bob_code[s, j]`` encode the cell of set ``s``
    as ``2*path + (sign < 0)``.
    """
    setting_cum = np.asarray(setting_cum, dtype=np.float64)
    set_cum = np.asarray(set_cum, dtype=np.float64)
    alice_code = np.asarray(alice_code, dtype=np.int64)
    bob_code = np.asarray(bob_code, dtype=np.int64)
    kept = np.zeros(16, dtype=np.int64)
    total = np.zeros(16, dtype=np.int64)
    patterns = np.zeros(16, dtype=np.int64)
    with np.errstate(over="ignore"):
        for t in _blocks(start, stop):
            pair = _first_above(setting_cum, _uniform(raw_draws(seed, t, 0)))
            s = _first_above(set_cum, _uniform(raw_draws(seed, t, 1)))
            x = alice_code[s, pair >> 1]
            y = bob_code[s, pair & 1]
            path1, path2 = x >> 1, y >> 1
            idx = 4 * pair + 2 * (x & 1) + (y & 1)
            coincident = path1 == path2
            total += np.bincount(idx, minlength=16)
            kept += np.bincount(idx[coincident], minlength=16)
            patterns += np.bincount(4 * pair + 2 * path1 + path2, minlength=16)
    return kept, total, patterns
