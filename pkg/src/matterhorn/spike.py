"""Masked time-to-first-spike (M-TTFS) neuron dynamics.

A value is carried by the arrival time of at most one spike inside a window
of ``T = 2**n`` steps.  A temporal mask silences firing times inside the
dead zone ``[i_max - k, i_max + k]``, remapping the most frequent code to
the zero-energy all-silent train.  The module provides:

- integer <-> spike-train encoding with dead-zone collapse,
- membrane integration of weighted input trains,
- the step-by-step masked threshold walk (``fire_simulated``),
- the closed-form firing time (``fire_analytic``), used as an executable
  oracle against the walk,
- silence-rate accounting for sparsity studies.

All operations are pure functions; threshold and code-boundary comparisons
are exact (see ``numerics``), so the walk and the closed form agree
bit-exactly for every representable input.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .numerics import floor_ratio, ge_scaled

SYMMETRIC = "symmetric"
ASYMMETRIC = "asymmetric"
_MODES = (SYMMETRIC, ASYMMETRIC)


@dataclass(frozen=True)
class SnnLayerConfig:
    """Window, scale, kernel and threshold schedule for one M-TTFS layer.

    ``i_max`` is the masked firing time (dead-zone center); ``i_max=None``
    disables the mask entirely (plain TTFS baseline).  ``baseline_silent_min``
    maps the final-step spike, i.e. the minimum code, to silence; it exists
    only to reproduce baseline-TTFS silence statistics and is off by default.
    ``theta_shift`` offsets the threshold schedule by whole codes and is a
    fault-injection hook for negative-control verification runs.
    """

    n: int
    alpha: float = 1.0
    mode: str = SYMMETRIC
    i_max: int | None = None
    k: int = 0
    baseline_silent_min: bool = False
    theta_shift: int = 0

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError(f"bit width must be >= 1, got {self.n}")
        if not (math.isfinite(self.alpha) and self.alpha > 0):
            raise ValueError(f"scale must be a positive finite real, got {self.alpha}")
        if self.mode not in _MODES:
            raise ValueError(f"mode must be one of {_MODES}, got {self.mode!r}")
        if self.i_max is not None and not 0 <= self.i_max <= self.window - 1:
            raise ValueError(f"i_max {self.i_max} outside window [0, {self.window - 1}]")
        if self.k < 0:
            raise ValueError(f"dead-zone radius must be >= 0, got {self.k}")

    @property
    def window(self) -> int:
        return 2**self.n

    @property
    def code_min(self) -> int:
        return -(2 ** (self.n - 1)) if self.mode == SYMMETRIC else 0

    @property
    def code_max(self) -> int:
        """Top representable code; also the origin of the time ramp."""
        return 2 ** (self.n - 1) - 1 if self.mode == SYMMETRIC else 2**self.n - 1

    @property
    def masked(self) -> bool:
        return self.i_max is not None

    @property
    def mu(self) -> int | None:
        """Code represented by the silent train (dead-zone center)."""
        if self.i_max is None:
            return None
        return self.code_max - self.i_max

    def spike_time(self, code: int) -> int:
        """Firing time encoding ``code``; earlier spikes carry larger codes."""
        return self.code_max - code

    def in_dead_zone(self, t: int) -> bool:
        return self.masked and abs(t - self.i_max) <= self.k

    def kernel(self, t: int) -> int:
        """Decode value f(t) of a spike at step t, flattened over the dead zone."""
        if self.in_dead_zone(t):
            return self.mu
        return self.code_max - t

    def threshold_code(self, t: int) -> int:
        """Threshold at step t in units of alpha (a step-wise decreasing ramp)."""
        return self.code_max - t + self.theta_shift


class SpikeTrain:
    """Binary train of length ``window`` carrying at most one spike."""

    __slots__ = ("bits", "_time")

    def __init__(self, bits) -> None:
        arr = np.ascontiguousarray(bits, dtype=np.uint8)
        if arr.ndim != 1 or arr.size == 0:
            raise ValueError("spike train must be a non-empty 1-D binary vector")
        if np.any(arr > 1):
            raise ValueError("spike train entries must be 0 or 1")
        hits = np.flatnonzero(arr)
        if hits.size > 1:
            raise ValueError("at most one spike per train")
        self.bits = arr
        self._time = int(hits[0]) if hits.size else None

    @classmethod
    def silent(cls, window: int) -> "SpikeTrain":
        train = cls.__new__(cls)
        train.bits = np.zeros(window, dtype=np.uint8)
        train._time = None
        return train

    @classmethod
    def single(cls, t: int, window: int) -> "SpikeTrain":
        if not 0 <= t < window:
            raise ValueError(f"spike time {t} outside window [0, {window - 1}]")
        train = cls.__new__(cls)
        bits = np.zeros(window, dtype=np.uint8)
        bits[t] = 1
        train.bits = bits
        train._time = t
        return train

    @property
    def window(self) -> int:
        return self.bits.size

    @property
    def time(self) -> int | None:
        """Arrival step of the spike, or None for the silent train."""
        return self._time

    @property
    def is_silent(self) -> bool:
        return self._time is None

    def to_bytes(self) -> bytes:
        """Little-endian bit packing, LSB = t=0, padded to whole bytes."""
        return np.packbits(self.bits, bitorder="little").tobytes()

    @classmethod
    def from_bytes(cls, data: bytes, window: int) -> "SpikeTrain":
        raw = np.frombuffer(data, dtype=np.uint8)
        bits = np.unpackbits(raw, bitorder="little", count=window)
        return cls(bits)

    def to_list(self) -> list[int]:
        """JSON debug form: plain 0/1 array."""
        return self.bits.tolist()

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SpikeTrain):
            return NotImplemented
        return self.window == other.window and self._time == other._time

    def __hash__(self) -> int:
        return hash((self.window, self.time))

    def __repr__(self) -> str:
        return f"SpikeTrain(t={self.time}, T={self.window})"


@dataclass
class MembraneTrace:
    """Running membrane potential over one window, bias kept separate.

    ``v[t]`` is the accumulated weighted-input sum up to step t; the bias
    enters the threshold comparison once, not the per-step accumulation.
    """

    v: np.ndarray
    bias: float = 0.0

    @property
    def window(self) -> int:
        return int(self.v.size)

    @property
    def final_potential(self) -> float:
        """Settled potential after the full window: v[T-1] + bias."""
        return float(self.v[-1]) + self.bias


def encode_integer(code: int, cfg: SnnLayerConfig) -> SpikeTrain:
    """Encode an integer code as a spike train under ``cfg``.

    Codes inside the dead zone collapse to the silent train; every other
    code fires exactly once at ``code_max - code``.
    Raises ValueError for codes outside the representable range.
    """
    code = int(code)
    if not cfg.code_min <= code <= cfg.code_max:
        raise ValueError(
            f"code {code} outside representable range [{cfg.code_min}, {cfg.code_max}]"
        )
    if cfg.masked and abs(code - cfg.mu) <= cfg.k:
        return SpikeTrain.silent(cfg.window)
    t = cfg.spike_time(code)
    if cfg.baseline_silent_min and t == cfg.window - 1:
        return SpikeTrain.silent(cfg.window)
    return SpikeTrain.single(t, cfg.window)


def decode_spike(train: SpikeTrain, cfg: SnnLayerConfig) -> int:
    """Decode a spike train back to its integer code via the kernel f(t).

    The silent train decodes to the dead-zone center when the mask is
    active; without a mask it decodes to the minimum code (the only value
    a silent baseline train can stand for).
    """
    if train.window != cfg.window:
        raise ValueError(f"train window {train.window} != config window {cfg.window}")
    t = train.time
    if t is None:
        return cfg.mu if cfg.masked else cfg.code_min
    return cfg.kernel(t)


def integrate(
    inputs: list[tuple[SpikeTrain, float]],
    cfg_prev: SnnLayerConfig,
    bias: float = 0.0,
) -> MembraneTrace:
    """Accumulate weighted input spikes into a membrane trace.

    Each spiking input contributes ``w * alpha_prev * f(t)`` at its arrival
    step; silent inputs contribute nothing.  ``cfg_prev`` carries the scale
    and kernel of the layer that produced the trains.
    """
    window = cfg_prev.window
    deltas = np.zeros(window, dtype=np.float64)
    for train, weight in inputs:
        if train.window != window:
            raise ValueError(f"train window {train.window} != config window {window}")
        t = train.time
        if t is not None:
            deltas[t] += weight * (cfg_prev.alpha * cfg_prev.kernel(t))
    return MembraneTrace(v=np.cumsum(deltas), bias=float(bias))


def candidate_fire_time(potential: float, cfg: SnnLayerConfig) -> int:
    """First step whose threshold the settled potential meets, pre-mask.

    Integration completes before the threshold scan (the schedule is
    layer-synchronous), so the comparison always uses the final potential.
    If no step qualifies, the window end clamps the code floor: the neuron
    fires at T-1, mirroring quantizer saturation.
    """
    if math.isnan(potential):
        raise ValueError("potential is NaN")
    alpha = cfg.alpha
    origin = cfg.code_max + cfg.theta_shift
    for t in range(cfg.window - 1):
        if ge_scaled(potential, alpha, origin - t):
            return t
    return cfg.window - 1


def _mask_fire_time(t: int, cfg: SnnLayerConfig) -> SpikeTrain:
    if cfg.in_dead_zone(t):
        return SpikeTrain.silent(cfg.window)
    if cfg.baseline_silent_min and t == cfg.window - 1:
        return SpikeTrain.silent(cfg.window)
    return SpikeTrain.single(t, cfg.window)


def fire_simulated(trace: MembraneTrace, cfg: SnnLayerConfig) -> SpikeTrain:
    """Masked threshold walk over the integrated trace.

    The candidate spike lands at the first step where the potential meets
    the decreasing threshold; the mask then either passes it through or
    silences it.  A masked candidate is consumed: no later step may fire.
    """
    if trace.window != cfg.window:
        raise ValueError(f"trace window {trace.window} != config window {cfg.window}")
    return _mask_fire_time(candidate_fire_time(trace.final_potential, cfg), cfg)


def fire_analytic(pre_activation: float, cfg: SnnLayerConfig) -> SpikeTrain:
    """Closed-form firing time for a settled pre-activation.

    The unmasked time is ``clip(code_max + theta_shift - floor(a / alpha),
    0, T-1)``; the mask is applied afterwards.  Produces output identical
    to ``fire_simulated`` on a trace with the same final potential, for
    every input, which makes it the executable oracle for the walk.
    """
    if math.isnan(pre_activation):
        raise ValueError("pre-activation is NaN")
    if math.isinf(pre_activation):
        t = 0 if pre_activation > 0 else cfg.window - 1
    else:
        t_raw = cfg.code_max + cfg.theta_shift - floor_ratio(pre_activation, cfg.alpha)
        t = min(max(t_raw, 0), cfg.window - 1)
    return _mask_fire_time(t, cfg)


def silence_rate(trains) -> float:
    """Fraction of all-zero trains in a non-empty collection."""
    trains = list(trains)
    if not trains:
        raise ValueError("silence_rate needs at least one train")
    return sum(1 for tr in trains if tr.is_silent) / len(trains)
