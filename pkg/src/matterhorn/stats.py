"""Spike-time distribution analysis and dead-zone sparsity sweeps.

Trained-model activations are replaced by seeded synthetic samplers
(Gaussian by default, peaked at the silent code), which is enough to study
how the dead-zone radius trades spike activity for silence.  Quantitative
silence percentages from trained models serve as calibration targets only
and are reported alongside, never asserted.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from statistics import NormalDist

import numpy as np

from .qnn import QuantParams, quantize
from .spike import SnnLayerConfig, SpikeTrain, encode_integer, silence_rate

__all__ = [
    "SpikeHistogram",
    "ActivationSampler",
    "SweepRow",
    "spike_time_histogram",
    "encode_samples",
    "sparsity_sweep",
    "calibrate_gaussian_sigma",
    "histogram_svg",
    "REFERENCE_SILENCE_PCT",
]

# Dead-zone silence percentages used as qualitative calibration anchors
# for the sweep report (k -> percent silent).
REFERENCE_SILENCE_PCT = {0: 34.0, 1: 61.2, 2: 76.4}


@dataclass
class SpikeHistogram:
    """Spike counts per firing time plus the silent bucket."""

    counts: np.ndarray
    silent: int = 0

    def __post_init__(self) -> None:
        self.counts = np.asarray(self.counts, dtype=np.int64)

    @property
    def window(self) -> int:
        return int(self.counts.size)

    @property
    def total(self) -> int:
        return int(self.counts.sum()) + self.silent

    @property
    def silence_fraction(self) -> float:
        total = self.total
        return self.silent / total if total else 0.0

    def __add__(self, other: "SpikeHistogram") -> "SpikeHistogram":
        if self.window != other.window:
            raise ValueError("histogram windows differ")
        return SpikeHistogram(self.counts + other.counts, self.silent + other.silent)

    def to_rows(self) -> list[tuple[str, int]]:
        rows: list[tuple[str, int]] = [(str(t), int(c)) for t, c in enumerate(self.counts)]
        rows.append(("silent", self.silent))
        return rows


def spike_time_histogram(trains: list[SpikeTrain]) -> SpikeHistogram:
    """Exact bucket counts over a collection of trains with a shared window."""
    trains = list(trains)
    if not trains:
        raise ValueError("need at least one train")
    window = trains[0].window
    counts = np.zeros(window, dtype=np.int64)
    silent = 0
    for train in trains:
        if train.window != window:
            raise ValueError(f"train window {train.window} != {window}")
        t = train.time
        if t is None:
            silent += 1
        else:
            counts[t] += 1
    return SpikeHistogram(counts=counts, silent=silent)


@dataclass(frozen=True)
class ActivationSampler:
    """Seeded synthetic activation source; identical seeds reproduce
    identical samples bit for bit."""

    kind: str = "gaussian"
    loc: float = 0.0
    scale: float = 1.0
    values: tuple[float, ...] | None = None
    seed: int = 0

    def __post_init__(self) -> None:
        if self.kind not in ("gaussian", "laplace", "file"):
            raise ValueError(f"unknown sampler kind {self.kind!r}")
        if self.kind != "file" and self.scale <= 0:
            raise ValueError(f"scale must be positive, got {self.scale}")
        if self.kind == "file" and not self.values:
            raise ValueError("file-backed sampler needs values")

    def sample(self, count: int) -> np.ndarray:
        rng = np.random.default_rng(self.seed)
        if self.kind == "gaussian":
            return rng.normal(self.loc, self.scale, count)
        if self.kind == "laplace":
            return rng.laplace(self.loc, self.scale, count)
        return np.resize(np.asarray(self.values, dtype=np.float64), count)


def encode_samples(samples, cfg: SnnLayerConfig) -> list[SpikeTrain]:
    """Quantize real activations under the config's params and encode them."""
    p = QuantParams(n=cfg.n, alpha=cfg.alpha, mode=cfg.mode)
    return [encode_integer(quantize(float(a), p), cfg) for a in np.asarray(samples)]


@dataclass
class SweepRow:
    k: int
    silence: float
    mean_spike_rate: float

    def to_dict(self) -> dict:
        return {"k": self.k, "silence": self.silence, "mean_spike_rate": self.mean_spike_rate}


def sparsity_sweep(
    sampler: ActivationSampler,
    base_cfg: SnnLayerConfig,
    k_range,
    count: int = 20_000,
) -> list[SweepRow]:
    """Silence and spike rate per dead-zone radius over one fixed sample set.

    A single draw feeds every radius, so silence is exactly nondecreasing
    in k.  The mean spike rate counts spikes per (train, step) slot.
    """
    k_values = list(k_range)
    if not k_values:
        raise ValueError("need at least one dead-zone radius")
    samples = sampler.sample(count)
    rows = []
    for k in k_values:
        cfg = replace(base_cfg, k=int(k))
        trains = encode_samples(samples, cfg)
        silent = silence_rate(trains)
        rows.append(
            SweepRow(
                k=int(k),
                silence=silent,
                mean_spike_rate=(1.0 - silent) / cfg.window,
            )
        )
    return rows


def calibrate_gaussian_sigma(
    target_silence: float, cfg: SnnLayerConfig, loc: float = 0.0
) -> float:
    """Gaussian scale whose quantized codes hit the target silence at cfg.k.

    Solves P(code in dead zone) = target by bisection on sigma using the
    exact band probability P(alpha*(mu-k) <= a < alpha*(mu+k+1)).
    """
    if not cfg.masked:
        raise ValueError("calibration needs a masked configuration")
    if not 0.0 < target_silence < 1.0:
        raise ValueError("target silence must lie strictly between 0 and 1")
    lo_edge = cfg.alpha * (cfg.mu - cfg.k)
    hi_edge = cfg.alpha * (cfg.mu + cfg.k + 1)

    def band(sigma: float) -> float:
        dist = NormalDist(loc, sigma)
        return dist.cdf(hi_edge) - dist.cdf(lo_edge)

    # band(sigma) decreases in sigma once the band straddles the mean
    lo, hi = 1e-9 * cfg.alpha, 1e9 * cfg.alpha
    for _ in range(200):
        mid = (lo + hi) / 2
        if band(mid) > target_silence:
            lo = mid
        else:
            hi = mid
    return (lo + hi) / 2


def histogram_svg(hist: SpikeHistogram, width: int = 640, height: int = 320) -> str:
    """Minimal deterministic SVG bar chart of a spike-time histogram."""
    rows = hist.to_rows()
    peak = max(count for _, count in rows) or 1
    bar_w = width / len(rows)
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height + 24}">',
        f'<rect width="{width}" height="{height + 24}" fill="white"/>',
    ]
    for i, (label, count) in enumerate(rows):
        bar_h = height * count / peak
        x = i * bar_w
        fill = "#888888" if label == "silent" else "#336699"
        parts.append(
            f'<rect x="{x + 1:.1f}" y="{height - bar_h:.1f}" width="{bar_w - 2:.1f}" '
            f'height="{bar_h:.1f}" fill="{fill}"/>'
        )
        parts.append(
            f'<text x="{x + bar_w / 2:.1f}" y="{height + 14}" font-size="9" '
            f'text-anchor="middle">{label}</text>'
        )
    parts.append("</svg>")
    return "\n".join(parts)
