"""Memristive synapse unit: binary crossbar readout and bit-serial VMM.

Signed +/-1 weights map onto two conductance states of an nT1R array;
Ohm's law and current summation perform the binary vector-matrix product
in one readout, multi-bit inputs are fed bit-serially and reconstructed by
shift-and-add, and a digital correction recovers the signed result from
the non-negative conductance domain.  The device model is ideal: no noise,
drift or IR drop, binary cells only.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "CrossbarMacro",
    "MsuConfig",
    "map_signed_weights",
    "analog_column_readout",
    "bit_serial_vmm",
    "signed_correct",
    "tiled_vmm",
    "reference_readout",
]

G_ON_DEFAULT = 100e-6  # Siemens, logic 1
G_OFF_DEFAULT = 1e-6  # Siemens, logic 0
V_READ_DEFAULT = 0.1  # Volts


def map_signed_weights(
    w, g_on: float = G_ON_DEFAULT, g_off: float = G_OFF_DEFAULT
) -> np.ndarray:
    """Map a +/-1 weight matrix onto the two-state conductance grid.

    -1 -> g_off, +1 -> g_on; the signed matrix is recoverable as
    ``2 * binary - 1``.  Any other entry raises ValueError.
    """
    w = np.asarray(w, dtype=np.float64)
    if not np.all(np.abs(w) == 1.0):
        raise ValueError("weights must be exactly +1 or -1")
    return np.where(w > 0, g_on, g_off)


@dataclass
class CrossbarMacro:
    """One programmed crossbar array plus its read-out constants."""

    conductance: np.ndarray
    v_read: float = V_READ_DEFAULT
    g_on: float = G_ON_DEFAULT
    g_off: float = G_OFF_DEFAULT
    adc_lsb: float | None = None

    def __post_init__(self) -> None:
        self.conductance = np.asarray(self.conductance, dtype=np.float64)
        if self.conductance.ndim != 2:
            raise ValueError("conductance grid must be 2-D")
        legal = (self.conductance == self.g_on) | (self.conductance == self.g_off)
        if not np.all(legal):
            raise ValueError("conductance entries must be exactly g_on or g_off")

    @classmethod
    def from_signed(cls, w, **kwargs) -> "CrossbarMacro":
        g_on = kwargs.get("g_on", G_ON_DEFAULT)
        g_off = kwargs.get("g_off", G_OFF_DEFAULT)
        return cls(conductance=map_signed_weights(w, g_on, g_off), **kwargs)

    @property
    def rows(self) -> int:
        return int(self.conductance.shape[0])

    @property
    def cols(self) -> int:
        return int(self.conductance.shape[1])

    @property
    def lsb(self) -> float:
        return self.adc_lsb if self.adc_lsb is not None else self.g_on * self.v_read

    def binary(self) -> np.ndarray:
        """The stored 0/1 grid (1 where the cell is on)."""
        return (self.conductance == self.g_on).astype(np.int64)

    def signed_weights(self) -> np.ndarray:
        return 2 * self.binary() - 1


def analog_column_readout(
    active_rows, macro: CrossbarMacro, compensate_leakage: bool = False
) -> tuple[np.ndarray, np.ndarray]:
    """Column currents and ADC codes for one binary input vector.

    Current per column sums ``v_read * G`` over the active rows.  The plain
    ADC model rounds ``I / adc_lsb`` and saturates at the row count, which
    is exact only while the aggregate off-cell leakage stays below half an
    LSB.  With ``compensate_leakage`` the digital periphery first subtracts
    the known off-cell baseline for the active-row count (the same count
    the signed correction needs anyway), making the returned codes exact
    on-cell popcounts at any array size.
    """
    active = np.asarray(active_rows)
    if active.shape != (macro.rows,):
        raise ValueError(f"expected {macro.rows} word-line bits, got shape {active.shape}")
    if not np.all((active == 0) | (active == 1)):
        raise ValueError("word-line inputs must be 0 or 1")
    active = active.astype(np.float64)
    currents = macro.v_read * (active @ macro.conductance)
    if compensate_leakage:
        n_active = float(active.sum())
        span = macro.v_read * (macro.g_on - macro.g_off)
        counts = np.rint((currents - n_active * macro.v_read * macro.g_off) / span)
        codes = np.clip(counts, 0, n_active).astype(np.int64)
    else:
        codes = np.clip(np.rint(currents / macro.lsb), 0, macro.rows).astype(np.int64)
    return currents, codes


def bit_serial_vmm(inputs, macro: CrossbarMacro, input_bits: int | None = None) -> np.ndarray:
    """Exact integer VMM of non-negative inputs against the stored 0/1 grid.

    Inputs are fed LSB-first as bit planes; each plane is one analog
    readout, and the digital accumulator shift-adds the per-plane codes.
    """
    inputs = np.asarray(inputs)
    if inputs.shape != (macro.rows,):
        raise ValueError(f"expected {macro.rows} inputs, got shape {inputs.shape}")
    if not np.issubdtype(inputs.dtype, np.integer):
        raise ValueError("bit-serial inputs must be integers")
    if np.any(inputs < 0):
        raise ValueError("bit-serial inputs must be non-negative")
    if input_bits is not None:
        if np.any(inputs >= 2**input_bits):
            raise ValueError(f"inputs exceed the {input_bits}-bit budget")
        planes = input_bits
    else:
        planes = max(1, int(inputs.max()).bit_length())
    acc = np.zeros(macro.cols, dtype=np.int64)
    for p in range(planes):
        plane = (inputs >> p) & 1
        _, codes = analog_column_readout(plane, macro, compensate_leakage=True)
        acc += codes << p
    return acc


@dataclass(frozen=True)
class MsuConfig:
    """Scale, input precision and tiling geometry of the synapse unit."""

    gamma: float = 1.0
    input_bits: int = 4
    tile_rows: int = 256
    tile_cols: int = 256
    v_read: float = V_READ_DEFAULT
    g_on: float = G_ON_DEFAULT
    g_off: float = G_OFF_DEFAULT
    adc_lsb: float | None = None

    def __post_init__(self) -> None:
        if self.gamma <= 0 or not math.isfinite(self.gamma):
            raise ValueError(f"gamma must be a positive finite real, got {self.gamma}")
        if self.input_bits < 1:
            raise ValueError("input_bits must be >= 1")
        if self.tile_rows < 1 or self.tile_cols < 1:
            raise ValueError("tile dimensions must be positive")

    @classmethod
    def from_json(cls, text: str) -> "MsuConfig":
        doc = json.loads(text)
        return cls(
            gamma=float(doc.get("gamma", 1.0)),
            input_bits=int(doc.get("input_bits", 4)),
            tile_rows=int(doc.get("rows", 256)),
            tile_cols=int(doc.get("cols", 256)),
            v_read=float(doc.get("v_read_V", V_READ_DEFAULT)),
            g_on=float(doc.get("g_on_uS", G_ON_DEFAULT * 1e6)) * 1e-6,
            g_off=float(doc.get("g_off_uS", G_OFF_DEFAULT * 1e6)) * 1e-6,
            adc_lsb=None if doc.get("adc_lsb_A") is None else float(doc["adc_lsb_A"]),
        )


def signed_correct(r_cim, input_sum: int, cfg: MsuConfig) -> np.ndarray:
    """Recover signed synaptic values from the raw crossbar accumulation.

    ``gamma * (2 * r_cim - input_sum)``; exact in integer arithmetic before
    the gamma scale.
    """
    r_cim = np.asarray(r_cim, dtype=np.int64)
    return cfg.gamma * (2 * r_cim - int(input_sum))


def tiled_vmm(inputs, w_signed, cfg: MsuConfig) -> np.ndarray:
    """Signed VMM of arbitrary dimensions over a grid of macro tiles.

    The weight matrix is partitioned into tile_rows x tile_cols macros;
    each tile contributes its bit-serial result corrected with its own
    input-slice sum.  The digital accumulation is an integer sum, so the
    result equals the monolithic product exactly (before gamma) and is
    independent of tile traversal order.
    """
    inputs = np.asarray(inputs)
    w_signed = np.asarray(w_signed, dtype=np.float64)
    if w_signed.ndim != 2 or inputs.shape != (w_signed.shape[0],):
        raise ValueError(
            f"input length {inputs.shape} does not match weight rows {w_signed.shape}"
        )
    c_in, c_out = w_signed.shape
    acc = np.zeros(c_out, dtype=np.int64)
    for r0 in range(0, c_in, cfg.tile_rows):
        r1 = min(r0 + cfg.tile_rows, c_in)
        slice_sum = int(inputs[r0:r1].sum())
        for c0 in range(0, c_out, cfg.tile_cols):
            c1 = min(c0 + cfg.tile_cols, c_out)
            macro = CrossbarMacro.from_signed(
                w_signed[r0:r1, c0:c1],
                v_read=cfg.v_read,
                g_on=cfg.g_on,
                g_off=cfg.g_off,
                adc_lsb=cfg.adc_lsb,
            )
            r_cim = bit_serial_vmm(inputs[r0:r1], macro, cfg.input_bits)
            acc[c0:c1] += 2 * r_cim - slice_sum
    return cfg.gamma * acc


# Reconstructed word-line pattern consistent with the documented three-row
# read-out example: two active rows, column currents (10.1, 0.2, 10.1, 20.0)
# microamperes, ADC codes (1, 0, 1, 2).
REFERENCE_GRID = np.array(
    [
        [1, 0, 1, 1],
        [0, 0, 0, 1],
        [1, 1, 0, 0],
    ]
)
REFERENCE_ACTIVE_ROWS = np.array([1, 1, 0])
REFERENCE_CURRENTS_UA = (10.1, 0.2, 10.1, 20.0)
REFERENCE_CODES = (1, 0, 1, 2)


def reference_readout() -> dict:
    """Replay the documented three-row read-out on the reconstructed grid."""
    conductance = np.where(REFERENCE_GRID == 1, G_ON_DEFAULT, G_OFF_DEFAULT)
    macro = CrossbarMacro(conductance=conductance)
    currents, codes = analog_column_readout(REFERENCE_ACTIVE_ROWS, macro)
    return {
        "grid": REFERENCE_GRID.tolist(),
        "active_rows": REFERENCE_ACTIVE_ROWS.tolist(),
        "v_read_V": macro.v_read,
        "g_on_uS": macro.g_on * 1e6,
        "g_off_uS": macro.g_off * 1e6,
        "currents_uA": [float(c) * 1e6 for c in currents],
        "adc_codes": codes.tolist(),
    }
