"""Array data model, drive schemes, and the parasitic-free evaluation path.

Weights are 4-bit words stored across groups of four bit columns whose read
stacks are sized 8:4:2:1, so physically summing the four RBL currents realizes
the binary bit significance. Two drive schemes exist:

* Config-A: analog inputs on the source lines, read word-lines at V_DD.
* Config-B: a constant bias on the source lines, analog inputs on the RWLs.

``ideal_column_currents`` clamps every RBL at the termination voltage and sums
per-cell stack currents; it is the zero-parasitic reference the network solver
must reduce to, while ``ideal_dot_product`` is the exact arithmetic all error
metrics are measured against.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .device import DEFAULT_VDD, DeviceParams, stack_current_arrays
from .errors import InvalidInputError

WEIGHT_BITS = 4
WEIGHT_LEVELS = 2 ** WEIGHT_BITS
SIZING_RATIOS = (8, 4, 2, 1)

#: Default Config-B source-line bias: keeps the read stack bounded by M1
#: saturation (input-side immunity) while leaving headroom above the 0.1 V
#: column clamp.
DEFAULT_V_BIAS = 0.3


class DriveMode(enum.Enum):
    CONFIG_A = "config_a"
    CONFIG_B = "config_b"


@dataclass
class WeightMatrix:
    """rows x words array of unsigned ``WEIGHT_BITS``-bit integers."""

    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.int64)
        if self.values.ndim != 2:
            raise InvalidInputError("weight matrix must be 2-D (rows x words)")
        if np.any(self.values < 0) or np.any(self.values >= WEIGHT_LEVELS):
            raise InvalidInputError(
                f"weights must lie in [0, {WEIGHT_LEVELS - 1}]"
            )

    @property
    def rows(self) -> int:
        return self.values.shape[0]

    @property
    def words(self) -> int:
        return self.values.shape[1]

    @classmethod
    def uniform(cls, rows: int, words: int, level: int) -> "WeightMatrix":
        return cls(np.full((rows, words), level))


@dataclass(frozen=True)
class ArrayGeometry:
    """Array shape plus the binary-weighted column sizing.

    ``active_rows`` is the subset driven during a dot product; None means all
    rows. Bit columns = word_columns * bits_per_word.
    """

    rows: int = 64
    word_columns: int = 32
    bits_per_word: int = WEIGHT_BITS
    sizing_ratios: tuple[int, ...] = SIZING_RATIOS
    active_rows: tuple[int, ...] | None = None

    def __post_init__(self):
        if self.rows < 1 or self.word_columns < 1:
            raise InvalidInputError("geometry must have at least one row and word")
        if len(self.sizing_ratios) != self.bits_per_word:
            raise InvalidInputError("one sizing ratio per bit is required")
        if self.active_rows is not None:
            rows = tuple(self.active_rows)
            if len(rows) == 0:
                raise InvalidInputError("active_rows must be nonempty")
            if any(r < 0 or r >= self.rows for r in rows):
                raise InvalidInputError("active_rows outside [0, rows)")
            if len(set(rows)) != len(rows):
                raise InvalidInputError("active_rows must be distinct")
            object.__setattr__(self, "active_rows", rows)

    @property
    def bit_columns(self) -> int:
        return self.word_columns * self.bits_per_word

    @property
    def active(self) -> tuple[int, ...]:
        if self.active_rows is None:
            return tuple(range(self.rows))
        return tuple(sorted(self.active_rows))


@dataclass
class Excitation:
    """Per-row drive for one dot-product evaluation.

    ``inputs`` holds one voltage per active row: the SL voltage in Config-A,
    the RWL voltage in Config-B.
    """

    mode: DriveMode
    inputs: np.ndarray
    v_dd: float = DEFAULT_VDD
    v_bias: float = DEFAULT_V_BIAS

    def __post_init__(self):
        self.inputs = np.atleast_1d(np.asarray(self.inputs, dtype=float))
        hi = self.v_dd + 0.1
        volts = [self.inputs, np.array([self.v_dd])]
        if self.mode is DriveMode.CONFIG_B:
            volts.append(np.array([self.v_bias]))
        for v in volts:
            if not np.all(np.isfinite(v)):
                raise InvalidInputError("non-finite excitation voltage")
            if np.any(v < 0) or np.any(v > hi):
                raise InvalidInputError(f"excitation voltage outside [0, {hi}]")

    def sl_voltages(self) -> np.ndarray:
        """Source-line drive per active row."""
        if self.mode is DriveMode.CONFIG_A:
            return self.inputs.copy()
        return np.full_like(self.inputs, self.v_bias)

    def rwl_voltages(self) -> np.ndarray:
        """Read word-line drive per active row."""
        if self.mode is DriveMode.CONFIG_A:
            return np.full_like(self.inputs, self.v_dd)
        return self.inputs.copy()

    def idle_sl_voltage(self, termination_voltage: float) -> float:
        """Drive of an inactive row's SL: the zero-current condition.

        Config-A parks idle SLs at the column termination voltage; Config-B
        keeps the shared bias rail (idle rows are gated off by RWL = 0).
        """
        if self.mode is DriveMode.CONFIG_A:
            return termination_voltage
        return self.v_bias

    def idle_rwl_voltage(self) -> float:
        return self.v_dd if self.mode is DriveMode.CONFIG_A else 0.0


@dataclass
class PackedCells:
    """Bit-level cell grid: stored bits plus per-column width multipliers."""

    geometry: ArrayGeometry
    data_bits: np.ndarray          # rows x bit_columns, {0, 1}
    multipliers: np.ndarray        # bit_columns
    profile: DeviceParams = field(default_factory=DeviceParams)
    vt0_per_bit: tuple[float, ...] | None = None   # optional multi-Vt override

    def device_arrays(self, rows: np.ndarray):
        """(m1_params, m2_params) 7-tuples for the given rows, width-sized.

        Arrays are shaped (len(rows), bit_columns) where they vary by
        position; scalars otherwise.
        """
        p = self.profile
        wl = p.w_over_l * self.multipliers[np.newaxis, :].astype(float)
        wl = np.broadcast_to(wl, (len(rows), self.geometry.bit_columns)).copy()
        if self.vt0_per_bit is not None:
            vt = np.tile(np.asarray(self.vt0_per_bit, dtype=float),
                         self.geometry.word_columns)[np.newaxis, :]
            vt = np.broadcast_to(vt, wl.shape).copy()
        else:
            vt = p.vt0
        base = (vt, p.k_prime, wl, p.lam,
                p.subthreshold_i0, p.subthreshold_n, p.phi_t)
        return base, base


def pack_weights(m: WeightMatrix, g: ArrayGeometry,
                 profile: DeviceParams | None = None,
                 vt0_per_bit: tuple[float, ...] | None = None) -> PackedCells:
    """Expand a word matrix into the sized bit-cell grid.

    Word value w at (i, j) maps to bit columns (4j..4j+3) holding
    (w3, w2, w1, w0) with width multipliers (8, 4, 2, 1).
    """
    if m.rows != g.rows or m.words != g.word_columns:
        raise InvalidInputError(
            f"weight matrix {m.rows}x{m.words} does not match geometry "
            f"{g.rows}x{g.word_columns}"
        )
    if vt0_per_bit is not None and len(vt0_per_bit) != g.bits_per_word:
        raise InvalidInputError("vt0_per_bit needs one value per bit position")
    shifts = np.arange(g.bits_per_word - 1, -1, -1)   # MSB first
    bits = (m.values[:, :, np.newaxis] >> shifts) & 1
    data = bits.reshape(g.rows, g.bit_columns).astype(np.uint8)
    mults = np.tile(np.asarray(g.sizing_ratios, dtype=np.int64), g.word_columns)
    return PackedCells(
        geometry=g,
        data_bits=data,
        multipliers=mults,
        profile=profile if profile is not None else DeviceParams(),
        vt0_per_bit=vt0_per_bit,
    )


def unpack_weights(cells: PackedCells) -> WeightMatrix:
    """Inverse of ``pack_weights``."""
    g = cells.geometry
    bits = cells.data_bits.reshape(g.rows, g.word_columns, g.bits_per_word)
    shifts = np.arange(g.bits_per_word - 1, -1, -1)
    return WeightMatrix((bits.astype(np.int64) << shifts).sum(axis=2))


def ideal_dot_product(inputs, m: WeightMatrix) -> np.ndarray:
    """Exact per-word sum of inputs_i * value_ij: the error-metric reference."""
    inputs = np.asarray(inputs, dtype=float)
    if not np.all(np.isfinite(inputs)):
        raise InvalidInputError("non-finite dot-product input")
    if inputs.shape[-1] != m.rows:
        raise InvalidInputError("input length must equal weight rows")
    return inputs @ m.values.astype(float)


@dataclass
class ColumnCurrents:
    """Measured output currents: per 4-column word group and per bit column."""

    per_group: np.ndarray
    per_bit_column: np.ndarray

    @classmethod
    def from_bit_columns(cls, bit_currents: np.ndarray,
                         bits_per_word: int = WEIGHT_BITS) -> "ColumnCurrents":
        groups = bit_currents.reshape(-1, bits_per_word).sum(axis=1)
        return cls(per_group=groups, per_bit_column=np.asarray(bit_currents))


def ideal_column_currents(e: Excitation, cells: PackedCells,
                          termination_voltage: float) -> ColumnCurrents:
    """Column currents with every RBL clamped and line resistances ignored.

    Every stack sees its exact drive, so group currents superpose over rows;
    inactive rows sit at the zero-current convention and contribute only
    leakage. Equals the network solve with zero parasitics.
    """
    g = cells.geometry
    active = np.asarray(g.active)
    if len(e.inputs) != len(active):
        raise InvalidInputError("excitation inputs must match active rows")

    n_rows = g.rows
    sl = np.full(n_rows, e.idle_sl_voltage(termination_voltage))
    rwl = np.full(n_rows, e.idle_rwl_voltage())
    sl[active] = e.sl_voltages()
    rwl[active] = e.rwl_voltages()

    m1, m2 = cells.device_arrays(np.arange(n_rows))
    g1 = np.where(cells.data_bits > 0, e.v_dd, 0.0)
    g2 = np.broadcast_to(rwl[:, np.newaxis], g1.shape)
    i_cells, _, _ = stack_current_arrays(
        m1, m2, g1, g2, sl[:, np.newaxis], termination_voltage
    )
    return ColumnCurrents.from_bit_columns(i_cells.sum(axis=0), g.bits_per_word)
