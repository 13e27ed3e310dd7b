"""Synthetic ensembles with percentile-swap poisoning of malicious models."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .core import ModelOutputs
from .errors import InputError

SIGNALS = ("sinusoid", "trend", "piecewise")


def percentile_value(data, x: float) -> float:
    """Nearest-rank percentile: item ``round_half_up(x/100 * n)`` of the sorted data."""
    vals = np.sort(np.asarray(data, dtype=float).ravel())
    n = vals.size
    if n == 0:
        raise InputError("percentile of empty data")
    if not 0 < x < 100:
        raise InputError(f"percentile must lie in (0, 100), got {x}")
    rank = math.floor(x * n / 100 + 0.5 + 1e-9)
    rank = min(max(rank, 1), n)
    return float(vals[rank - 1])


def swap_percentile_attack(
    series,
    x: float,
    region: slice | tuple[int, int] | None = None,
    mode: str = "exact",
    levels: tuple[float, float] | None = None,
) -> np.ndarray:
    """Exchange the ``x`` and ``100 - x`` percentile values inside ``region``.

    ``mode="exact"`` swaps only values equal to one of the two percentiles.
    ``mode="reflect"`` also moves tails: a value ``v <= lo`` becomes
    ``hi + (lo - v)`` and ``v >= hi`` becomes ``lo - (v - hi)``, which agrees
    with the exact swap on the percentile values themselves.

    Percentiles are taken over the whole series unless ``levels=(lo, hi)``
    pins them. Swapping can change how often each level occurs, so undoing
    an exact swap needs the original levels passed back in.
    """
    s = np.array(series, dtype=float)
    if not 0 < x < 50:
        raise InputError(f"attack percentile must lie in (0, 50), got {x}")
    if region is None:
        region = slice(0, s.size)
    elif isinstance(region, tuple):
        region = slice(*region)
    if levels is None:
        lo = percentile_value(s, x)
        hi = percentile_value(s, 100 - x)
    else:
        lo, hi = (float(v) for v in levels)
    if lo == hi:
        warnings.warn("degenerate distribution: percentile values coincide, attack is a no-op", stacklevel=2)
        return s
    part = s[region]
    if mode == "exact":
        out = part.copy()
        out[part == lo] = hi
        out[part == hi] = lo
    elif mode == "reflect":
        out = part.copy()
        low = part <= lo
        high = part >= hi
        out[low] = hi + (lo - part[low])
        out[high] = lo - (part[high] - hi)
    else:
        raise InputError(f"unknown attack mode {mode!r}")
    s[region] = out
    return s


def base_signal(name: str, T: int, **params) -> np.ndarray:
    t = np.arange(T, dtype=float)
    if name == "sinusoid":
        period = params.get("period", 24.0)
        level = params.get("level", 60.0)
        amp = params.get("amplitude", 40.0)
        return level + amp * np.sin(2 * np.pi * t / period)
    if name == "trend":
        start = params.get("start", 200.0)
        slope = params.get("slope", -2.0)
        return start + slope * t
    if name == "piecewise":
        steps = params.get("levels", (20.0, 80.0, 40.0, 100.0))
        width = params.get("width", max(1, T // len(steps)))
        idx = np.minimum(t.astype(int) // width, len(steps) - 1)
        return np.asarray(steps, dtype=float)[idx]
    raise InputError(f"unknown base signal {name!r}, expected one of {SIGNALS}")


@dataclass(frozen=True)
class InstanceSpec:
    M: int = 7
    T: int = 96
    C: int = 1
    base_signal: str = "sinusoid"
    signal_params: dict = field(default_factory=dict)
    benign_noise: float = 3.0
    attack_percentile: float = 5.0
    poison_fraction: float = 0.20
    seed: int = 0

    def __post_init__(self):
        if self.M < 1 or self.T < 1:
            raise InputError("M and T must be positive")
        if not 0 <= self.C <= self.M:
            raise InputError(f"need 0 <= C <= M, got C = {self.C}")
        if not 0 < self.attack_percentile < 50:
            raise InputError("attack percentile must lie in (0, 50)")
        if not 0 < self.poison_fraction <= 1:
            raise InputError("poison fraction must lie in (0, 1]")
        if self.base_signal not in SIGNALS:
            raise InputError(f"unknown base signal {self.base_signal!r}")


@dataclass(frozen=True)
class Instance:
    outputs: ModelOutputs
    ground_truth: np.ndarray
    malicious_ids: frozenset[int]
    poisoned: np.ndarray  # (M, T) bool, cells changed by the attack
    regions: dict


def generate_instance(spec: InstanceSpec) -> Instance:
    """Benign models are truth plus Gaussian noise; malicious ones are then poisoned.

    Each malicious model gets one contiguous region covering
    ``poison_fraction`` of the horizon, and the percentile swap (reflect
    mode) is applied to that region using the region's own percentiles.
    """
    root = np.random.SeedSequence(spec.seed)
    pick_seq, *model_seqs = root.spawn(spec.M + 1)
    truth = base_signal(spec.base_signal, spec.T, **spec.signal_params)
    values = np.empty((spec.M, spec.T))
    for i, ss in enumerate(model_seqs):
        values[i] = truth + np.random.default_rng(ss).normal(0.0, spec.benign_noise, spec.T)
    pick = np.random.default_rng(pick_seq)
    malicious = sorted(int(i) for i in pick.choice(spec.M, size=spec.C, replace=False))
    width = max(1, round(spec.poison_fraction * spec.T))
    poisoned = np.zeros((spec.M, spec.T), dtype=bool)
    regions = {}
    for i in malicious:
        start = int(pick.integers(0, spec.T - width + 1))
        region = slice(start, start + width)
        before = values[i, region].copy()
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            values[i, region] = swap_percentile_attack(before, spec.attack_percentile, mode="reflect")
        poisoned[i, region] = values[i, region] != before
        regions[i] = (start, start + width)
    ids = tuple(f"m{i}" for i in range(spec.M))
    return Instance(ModelOutputs(values, ids), truth, frozenset(malicious), poisoned, regions)
