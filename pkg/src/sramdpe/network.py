"""Nonlinear DC operating-point solver for the crossbar with line parasitics.

The resistive mesh has one SL node per (row, bit column) and one RBL node per
(bit column, row), chained by per-cell segment resistors; each bit cell is a
two-terminal nonlinear element between its SL and RBL node (gate drives are
fixed by the excitation, the stack's internal node is solved by bisection
inside the element). Source lines are pinned at their drive columns (single
end, both ends, or regenerated taps for Config-B); columns terminate either in
a sense resistor to ground or an ideal-opamp virtual clamp.

Zero-resistance segments are handled by merging nodes, so a parasitic-free
network reduces exactly to the clamped ideal evaluation. Inactive rows are
either modeled in full or collapsed: in lumped mode the skipped BL span plus
the aggregated OFF-cell leakage hangs off the termination as a shunt branch
(the active block connects directly to the periphery).

The solve is a damped Newton iteration: each stack is linearized by central
finite differences, the sparse nodal system is solved and the update damped
(factor halved while the KCL residual grows, restored on success) until the
worst node residual is below 1e-9 A. A dense-elimination twin of the same
loop serves as the verification oracle for small networks.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .crossbar import (
    DEFAULT_V_BIAS,
    ArrayGeometry,
    ColumnCurrents,
    DriveMode,
    Excitation,
    PackedCells,
    WeightMatrix,
    pack_weights,
)
from .device import DeviceParams, SMALL_SIGNAL_STEP, stack_current_arrays
from .errors import InvalidInputError, SolverError, TopologyError

ACCEPT_RESIDUAL = 1e-9
RESIDUAL_FLOOR = 1e-15
MAX_NEWTON_ITERS = 100
MIN_DAMPING = 1.0 / 1024.0
DENSE_NODE_CAP = 1000

#: Highest input of each config's usable range: the Config-A encoding ceiling
#: and the Config-B sweep ceiling. Used for worst-case scenarios.
WORST_CASE_INPUT = {DriveMode.CONFIG_A: 0.22, DriveMode.CONFIG_B: 0.675}

_ERROR_CURRENT_FLOOR = 1e-12


@dataclass(frozen=True)
class ParasiticSpec:
    """Per-cell line resistances. ``sheet_basis`` is documentation only."""

    r_bl_per_cell: float = 1.25
    r_sl_per_cell: float = 2.5
    sheet_basis: float = 1.3
    lumped_inactive: bool = True

    def __post_init__(self):
        if self.r_bl_per_cell < 0 or self.r_sl_per_cell < 0:
            raise InvalidInputError("line resistances must be >= 0")


ZERO_PARASITICS = ParasiticSpec(r_bl_per_cell=0.0, r_sl_per_cell=0.0)


@dataclass(frozen=True)
class SingleEnd:
    pass


@dataclass(frozen=True)
class BothEnds:
    pass


@dataclass(frozen=True)
class TappedEvery:
    """SL regenerated every k bit cells (plus both ends). Config-B only."""

    k: int = 16

    def __post_init__(self):
        if self.k < 1:
            raise InvalidInputError("tap pitch must be >= 1")


SlDriveVariant = SingleEnd | BothEnds | TappedEvery


@dataclass(frozen=True)
class SenseResistor:
    r: float = 50.0

    def __post_init__(self):
        if self.r <= 0:
            raise InvalidInputError("sense resistance must be > 0")


@dataclass(frozen=True)
class IdealOpamp:
    v_pos: float = 0.1

    def __post_init__(self):
        if self.v_pos < 0:
            raise InvalidInputError("v_pos must be >= 0")


Termination = SenseResistor | IdealOpamp


def termination_voltage(t: Termination) -> float:
    """RBL reference level: the clamp for an opamp, ground for a resistor."""
    return t.v_pos if isinstance(t, IdealOpamp) else 0.0


def _drive_columns(variant: SlDriveVariant, bit_columns: int) -> list[int]:
    if isinstance(variant, SingleEnd):
        cols = [0]
    elif isinstance(variant, BothEnds):
        cols = [0, bit_columns - 1]
    else:
        cols = list(range(0, bit_columns, variant.k)) + [bit_columns - 1]
    return sorted(set(c for c in cols if c < bit_columns))


class _UnionFind:
    def __init__(self, n):
        self.parent = list(range(n))

    def find(self, a):
        while self.parent[a] != a:
            self.parent[a] = self.parent[self.parent[a]]
            a = self.parent[a]
        return a

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[max(ra, rb)] = min(ra, rb)


@dataclass
class Network:
    """Assembled nodal problem ready for the Newton solve."""

    n_nodes: int
    unknown: np.ndarray              # indices of non-Dirichlet nodes
    v_init: np.ndarray               # initial guess, Dirichlet values included
    g_lin: sp.csr_matrix             # linear conductance matrix, full n x n
    const: np.ndarray                # constant residual term (grounded refs)
    sl_idx: np.ndarray               # per cell: SL node
    rbl_idx: np.ndarray              # per cell: RBL node
    gate1: np.ndarray                # per cell: M1 gate voltage
    gate2: np.ndarray                # per cell: M2 gate voltage
    m1_params: tuple
    m2_params: tuple
    term_nodes: np.ndarray           # canonical termination node per word group
    termination: Termination
    geometry: ArrayGeometry
    v_dd: float
    cell_shape: tuple[int, int] = (0, 0)
    _jac_cache: dict = field(default_factory=dict, repr=False)

    @property
    def n_unknown(self) -> int:
        return len(self.unknown)


def build_network(g: ArrayGeometry, p: ParasiticSpec, d: SlDriveVariant,
                  t: Termination, e: Excitation, cells: PackedCells) -> Network:
    """Assemble the resistive mesh + cell elements for one excitation."""
    if isinstance(d, TappedEvery) and e.mode is not DriveMode.CONFIG_B:
        raise InvalidInputError(
            "SL tapping requires Config-B: regenerating per-row analog inputs "
            "along the line is infeasible in Config-A"
        )
    if cells.geometry is not g and (
        cells.geometry.rows != g.rows or cells.geometry.word_columns != g.word_columns
    ):
        raise InvalidInputError("packed cells do not match geometry")
    active = list(g.active)
    if len(e.inputs) != len(active):
        raise InvalidInputError("excitation inputs must match active rows")

    bc = g.bit_columns
    v_term = termination_voltage(t)
    lumped = p.lumped_inactive and len(active) < g.rows
    rows_included = active if lumped else list(range(g.rows))
    n_rows_inc = len(rows_included)

    # Raw node ids: SL block, RBL block, then one termination per word group
    # (the four RBLs of a group sum into a single converter).
    def sl_id(k, j):
        return k * bc + j

    def rbl_id(j, k):
        return n_rows_inc * bc + j * n_rows_inc + k

    def group_of(j):
        return j // g.bits_per_word

    term0 = 2 * n_rows_inc * bc
    n_raw = term0 + g.word_columns

    uf = _UnionFind(n_raw)
    edges: list[tuple[int, int, float]] = []

    def add_segment(a, b, r):
        if r == 0.0:
            uf.union(a, b)
        else:
            edges.append((a, b, 1.0 / r))

    # SL chains along each included row.
    for k in range(n_rows_inc):
        for j in range(bc - 1):
            add_segment(sl_id(k, j), sl_id(k, j + 1), p.r_sl_per_cell)
    # RBL chains: the group's shared termination sits at the row-0 end. In
    # lumped mode the active block attaches directly (one segment); the
    # skipped span is added later as a shunt.
    for j in range(bc):
        prev = term0 + group_of(j)
        prev_row = -1
        for k, r in enumerate(rows_included):
            gap = 1 if (lumped and prev_row < 0) else (r - prev_row)
            add_segment(prev, rbl_id(j, k), p.r_bl_per_cell * gap)
            prev = rbl_id(j, k)
            prev_row = r

    # Drive pins.
    active_set = set(active)
    drive_cols = _drive_columns(d, bc)
    sl_active = e.sl_voltages()
    rwl_active = e.rwl_voltages()
    idle_sl = e.idle_sl_voltage(v_term)
    idle_rwl = e.idle_rwl_voltage()
    dirichlet_raw: dict[int, float] = {}
    for k, r in enumerate(rows_included):
        if r in active_set:
            v_drive = float(sl_active[active.index(r)])
        else:
            v_drive = idle_sl
        for j in drive_cols:
            dirichlet_raw[sl_id(k, j)] = v_drive
    if isinstance(t, IdealOpamp):
        for w in range(g.word_columns):
            dirichlet_raw[term0 + w] = t.v_pos

    grounded: list[tuple[int, float, float]] = []   # (node, g, vref)
    if isinstance(t, SenseResistor):
        for w in range(g.word_columns):
            grounded.append((term0 + w, 1.0 / t.r, 0.0))

    # Lumped inactive rows: skipped BL span + aggregated OFF leakage as a
    # shunt at the group termination, referenced to the idle SL level.
    if lumped:
        n_idle = g.rows - len(active)
        g_off = _off_stack_conductance(cells, idle_sl, v_term, idle_rwl)
        r_span = p.r_bl_per_cell * n_idle
        for j in range(bc):
            g_leak = n_idle * g_off[j]
            if g_leak > 0:
                g_sh = 1.0 / (r_span + 1.0 / g_leak)
                grounded.append((term0 + group_of(j), g_sh, idle_sl))

    # Canonicalize merged nodes.
    root = np.array([uf.find(i) for i in range(n_raw)])
    uniq, canon = np.unique(root, return_inverse=True)
    n_nodes = len(uniq)

    dirichlet_val = np.full(n_nodes, np.nan)
    for raw, val in dirichlet_raw.items():
        c = canon[raw]
        if not np.isnan(dirichlet_val[c]) and abs(dirichlet_val[c] - val) > 1e-15:
            raise TopologyError(
                "zero-resistance merge shorts two different drive voltages"
            )
        dirichlet_val[c] = val
    dirichlet_mask = ~np.isnan(dirichlet_val)
    unknown = np.flatnonzero(~dirichlet_mask)

    # Linear conductance matrix over all canonical nodes.
    gi, gj, gv = [], [], []
    for a, b, gval in edges:
        ca, cb = canon[a], canon[b]
        if ca == cb:
            continue
        gi += [ca, cb, ca, cb]
        gj += [ca, cb, cb, ca]
        gv += [gval, gval, -gval, -gval]
    const = np.zeros(n_nodes)
    for node, gval, vref in grounded:
        c = canon[node]
        gi.append(c)
        gj.append(c)
        gv.append(gval)
        const[c] -= gval * vref
    g_lin = sp.csr_matrix(
        (np.array(gv, dtype=float), (np.array(gi), np.array(gj))),
        shape=(n_nodes, n_nodes),
    )

    # Cell elements (only included rows carry explicit cells).
    m1_params, m2_params = cells.device_arrays(np.array(rows_included))
    data = cells.data_bits[rows_included, :]
    sl_nodes = np.array([[canon[sl_id(k, j)] for j in range(bc)]
                         for k in range(n_rows_inc)])
    rbl_nodes = np.array([[canon[rbl_id(j, k)] for j in range(bc)]
                          for k in range(n_rows_inc)])
    rwl = np.array([
        float(rwl_active[active.index(r)]) if r in active_set else idle_rwl
        for r in rows_included
    ])
    gate1 = np.where(data > 0, e.v_dd, 0.0)
    gate2 = np.broadcast_to(rwl[:, None], gate1.shape).copy()

    # Initial guess: drives propagated with zero IR drop.
    v_init = np.zeros(n_nodes)
    for k, r in enumerate(rows_included):
        v_row = float(sl_active[active.index(r)]) if r in active_set else idle_sl
        v_init[sl_nodes[k, :]] = v_row
    v_init[rbl_nodes.ravel()] = v_term
    v_init[canon[term0:term0 + g.word_columns]] = v_term
    v_init[dirichlet_mask] = dirichlet_val[dirichlet_mask]

    def flat(x):
        return tuple(
            np.broadcast_to(f, gate1.shape).ravel() if isinstance(f, np.ndarray) else f
            for f in x
        )

    return Network(
        n_nodes=n_nodes,
        unknown=unknown,
        v_init=v_init,
        g_lin=g_lin,
        const=const,
        sl_idx=sl_nodes.ravel(),
        rbl_idx=rbl_nodes.ravel(),
        gate1=gate1.ravel(),
        gate2=gate2.ravel(),
        m1_params=flat(m1_params),
        m2_params=flat(m2_params),
        term_nodes=canon[term0:term0 + g.word_columns],
        termination=t,
        geometry=g,
        v_dd=e.v_dd,
        cell_shape=gate1.shape,
    )


def _off_stack_conductance(cells: PackedCells, v_sl, v_rbl,
                           v_rwl) -> np.ndarray:
    """Small-signal conductance per bit column of an OFF (data=0) stack."""
    m1, m2 = cells.device_arrays(np.array([0]))
    h = SMALL_SIGNAL_STEP
    lo = max(v_sl - h, 0.0)
    args = (m1, m2, 0.0, v_rwl)
    i_hi, _, _ = stack_current_arrays(*args, v_sl + h, v_rbl)
    i_lo, _, _ = stack_current_arrays(*args, lo, v_rbl)
    gcol = np.abs(i_hi - i_lo) / (v_sl + h - lo)
    return np.atleast_2d(gcol)[0]


@dataclass
class OperatingPointSolution:
    """Converged DC solution of one network."""

    node_voltages: np.ndarray
    cell_currents: np.ndarray          # rows_included x bit_columns
    column_currents: ColumnCurrents
    iterations: int
    max_kcl_residual: float


def _cell_currents(net: Network, v: np.ndarray) -> np.ndarray:
    i, _, _ = stack_current_arrays(
        net.m1_params, net.m2_params, net.gate1, net.gate2,
        v[net.sl_idx], v[net.rbl_idx],
    )
    return i


def _residual(net: Network, v: np.ndarray):
    f = net.g_lin.dot(v) + net.const
    i = _cell_currents(net, v)
    np.add.at(f, net.sl_idx, i)
    np.add.at(f, net.rbl_idx, -i)
    return f, i


def _cell_fd_conductances(net: Network, v: np.ndarray):
    h = SMALL_SIGNAL_STEP
    va, vb = v[net.sl_idx], v[net.rbl_idx]

    def solve(a, b):
        return stack_current_arrays(net.m1_params, net.m2_params,
                                    net.gate1, net.gate2, a, b)[0]

    g_a = (solve(va + h, vb) - solve(va - h, vb)) / (2 * h)
    g_b = (solve(va, vb + h) - solve(va, vb - h)) / (2 * h)
    return g_a, g_b


def _jacobian_structure(net: Network):
    """Precompute unknown-restricted index arrays for J assembly."""
    cache = net._jac_cache
    if "lin" in cache:
        return cache
    n = net.n_nodes
    full_to_u = np.full(n, -1, dtype=int)
    full_to_u[net.unknown] = np.arange(net.n_unknown)
    coo = net.g_lin.tocoo()
    keep = (full_to_u[coo.row] >= 0) & (full_to_u[coo.col] >= 0)
    cache["lin"] = (full_to_u[coo.row[keep]], full_to_u[coo.col[keep]],
                    coo.data[keep])
    su, ru = full_to_u[net.sl_idx], full_to_u[net.rbl_idx]
    stamps = []
    for rows, cols in (((su, su)), ((su, ru)), ((ru, su)), ((ru, ru))):
        mask = (rows >= 0) & (cols >= 0)
        stamps.append((rows[mask], cols[mask], mask))
    cache["stamps"] = stamps
    cache["full_to_u"] = full_to_u
    return cache


def _assemble_jacobian(net: Network, g_a, g_b):
    cache = _jacobian_structure(net)
    li, lj, lv = cache["lin"]
    (ss, sr, rs, rr) = cache["stamps"]
    vals = [lv]
    rows = [li]
    cols = [lj]
    for (r, c, mask), sign, g in (
        (ss, +1.0, g_a), (sr, +1.0, g_b), (rs, -1.0, g_a), (rr, -1.0, g_b)
    ):
        rows.append(r)
        cols.append(c)
        vals.append(sign * g[mask])
    nu = net.n_unknown
    return sp.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(nu, nu),
    )


def _linsolve_sparse(j_mat: sp.csr_matrix, rhs: np.ndarray) -> np.ndarray:
    import warnings

    with warnings.catch_warnings():
        warnings.simplefilter("error", spla.MatrixRankWarning)
        try:
            return spla.spsolve(j_mat.tocsc(), rhs)
        except (spla.MatrixRankWarning, RuntimeError) as exc:
            raise TopologyError(f"singular nodal system: {exc}") from exc


def _linsolve_dense(j_mat: sp.csr_matrix, rhs: np.ndarray) -> np.ndarray:
    try:
        return np.linalg.solve(j_mat.toarray(), rhs)
    except np.linalg.LinAlgError as exc:
        raise TopologyError(f"singular nodal system: {exc}") from exc


def _newton_solve(net: Network, lin_solve) -> OperatingPointSolution:
    v = net.v_init.copy()
    u = net.unknown
    f, i_cells = _residual(net, v)
    res = float(np.max(np.abs(f[u]))) if len(u) else 0.0
    history = [res]
    alpha = 1.0
    iterations = 0
    while res > RESIDUAL_FLOOR and iterations < MAX_NEWTON_ITERS:
        if res <= ACCEPT_RESIDUAL and len(history) >= 2 and history[-2] < 4.0 * res:
            break   # converged and no longer improving: stop polishing
        g_a, g_b = _cell_fd_conductances(net, v)
        j_mat = _assemble_jacobian(net, g_a, g_b)
        delta = lin_solve(j_mat, -f[u])
        if not np.all(np.isfinite(delta)):
            raise TopologyError("non-finite Newton update (singular system)")
        a = alpha
        while True:
            v_try = v.copy()
            v_try[u] += a * delta
            f_try, i_try = _residual(net, v_try)
            res_try = float(np.max(np.abs(f_try[u])))
            if res_try <= res or a <= MIN_DAMPING:
                break
            a *= 0.5
        v, f, i_cells, res = v_try, f_try, i_try, res_try
        alpha = min(1.0, 2.0 * a)
        history.append(res)
        iterations += 1
    if res > ACCEPT_RESIDUAL:
        raise SolverError(
            f"Newton did not reach {ACCEPT_RESIDUAL} A residual "
            f"(final {res:.3e} A after {iterations} iterations)",
            residual_history=history,
        )
    lo, hi = -0.1, net.v_dd + 0.1
    if np.any(v < lo - 1e-12) or np.any(v > hi + 1e-12):
        raise SolverError("solution voltage escaped physical bounds",
                          residual_history=history)

    if isinstance(net.termination, SenseResistor):
        group_currents = v[net.term_nodes] / net.termination.r
    else:
        group_currents = -f[net.term_nodes]
    cell_grid = i_cells.reshape(net.cell_shape)
    return OperatingPointSolution(
        node_voltages=v,
        cell_currents=cell_grid,
        column_currents=ColumnCurrents(
            per_group=np.asarray(group_currents, dtype=float),
            per_bit_column=cell_grid.sum(axis=0),
        ),
        iterations=iterations,
        max_kcl_residual=res,
    )


def solve_operating_point(net: Network) -> OperatingPointSolution:
    """Sparse Newton solve of the assembled network."""
    return _newton_solve(net, _linsolve_sparse)


def dense_oracle_solve(net: Network) -> OperatingPointSolution:
    """Verification oracle: identical Newton loop, dense elimination.

    Refuses networks above ``DENSE_NODE_CAP`` nodes.
    """
    if net.n_nodes > DENSE_NODE_CAP:
        raise InvalidInputError(
            f"dense oracle capped at {DENSE_NODE_CAP} nodes, got {net.n_nodes}"
        )
    return _newton_solve(net, _linsolve_dense)


# ---------------------------------------------------------------------------
# Standard sweep experiments built on the solver.


@dataclass
class RowScalingPoint:
    n: int
    i_n: float
    ideal: float          # n * i_1
    deviation_pct: float


def _worst_case_scenario(n_rows: int, mode: DriveMode, words: int,
                         profile: DeviceParams, v_dd: float, v_bias: float,
                         input_level: float | None):
    g = ArrayGeometry(rows=n_rows, word_columns=words)
    cells = pack_weights(
        WeightMatrix.uniform(n_rows, words, 15), g, profile=profile
    )
    level = WORST_CASE_INPUT[mode] if input_level is None else input_level
    e = Excitation(mode, np.full(n_rows, level), v_dd=v_dd, v_bias=v_bias)
    return g, cells, e


def row_scaling_curve(n_list, mode: DriveMode, t: Termination, *,
                      profile: DeviceParams | None = None, words: int = 1,
                      v_dd: float = 0.65, v_bias: float | None = None,
                      input_level: float | None = None,
                      parasitics: ParasiticSpec = ZERO_PARASITICS,
                      drive: SlDriveVariant = SingleEnd()) -> list[RowScalingPoint]:
    """I_N vs N * I_1 for the worst-case pattern (all weights 15, max input)."""
    profile = profile if profile is not None else DeviceParams()
    v_bias = DEFAULT_V_BIAS if v_bias is None else v_bias
    n_list = sorted(set(int(n) for n in n_list))
    if n_list[0] < 1:
        raise InvalidInputError("row counts must be >= 1")

    def group_current(n):
        g, cells, e = _worst_case_scenario(
            n, mode, words, profile, v_dd, v_bias, input_level
        )
        net = build_network(g, parasitics, drive, t, e, cells)
        return float(solve_operating_point(net).column_currents.per_group[0])

    i_1 = group_current(1)
    out = []
    for n in n_list:
        i_n = i_1 if n == 1 else group_current(n)
        ideal = n * i_1
        dev = abs(i_n - ideal) / abs(ideal) * 100.0 if ideal != 0 else 0.0
        out.append(RowScalingPoint(n=n, i_n=i_n, ideal=ideal, deviation_pct=dev))
    return out


@dataclass
class ErrorMapPoint:
    v_in: float
    weight_level: int
    worst_error_pct: float
    group_errors_pct: np.ndarray


def _scenario_error(g: ArrayGeometry, parasitics: ParasiticSpec,
                    drive: SlDriveVariant, t: Termination, e: Excitation,
                    cells: PackedCells) -> np.ndarray:
    """Per-group error%% of the parasitic solve vs the zero-parasitic solve."""
    zero = ParasiticSpec(
        r_bl_per_cell=0.0, r_sl_per_cell=0.0,
        lumped_inactive=parasitics.lumped_inactive,
    )
    sol = solve_operating_point(build_network(g, parasitics, drive, t, e, cells))
    ref = solve_operating_point(build_network(g, zero, drive, t, e, cells))
    i_p = sol.column_currents.per_group
    i_0 = ref.column_currents.per_group
    denom = np.maximum(np.abs(i_0), _ERROR_CURRENT_FLOOR)
    return np.abs(i_p - i_0) / denom * 100.0


def line_resistance_error_map(voltages, weight_levels, n_active: int,
                              variant: SlDriveVariant, mode: DriveMode, *,
                              geometry: ArrayGeometry | None = None,
                              parasitics: ParasiticSpec = ParasiticSpec(),
                              t: Termination = IdealOpamp(),
                              profile: DeviceParams | None = None,
                              v_dd: float = 0.65,
                              v_bias: float | None = None) -> list[ErrorMapPoint]:
    """Error%% grid over (input voltage, uniform weight level).

    Every grid point drives all active rows with the same voltage and stores
    the same weight everywhere; active rows are the farthest from the column
    periphery. The per-point scalar is the worst error over word groups.
    """
    profile = profile if profile is not None else DeviceParams()
    v_bias = DEFAULT_V_BIAS if v_bias is None else v_bias
    base = geometry if geometry is not None else ArrayGeometry()
    if n_active > base.rows:
        raise InvalidInputError("more active rows than the array has")
    active = tuple(range(base.rows - n_active, base.rows))
    g = ArrayGeometry(rows=base.rows, word_columns=base.word_columns,
                      active_rows=active)
    out = []
    for w in weight_levels:
        cells = pack_weights(
            WeightMatrix.uniform(g.rows, g.word_columns, int(w)), g,
            profile=profile,
        )
        for v in voltages:
            e = Excitation(mode, np.full(n_active, float(v)),
                           v_dd=v_dd, v_bias=v_bias)
            errs = _scenario_error(g, parasitics, variant, t, e, cells)
            out.append(ErrorMapPoint(
                v_in=float(v), weight_level=int(w),
                worst_error_pct=float(np.max(errs)),
                group_errors_pct=errs,
            ))
    return out


@dataclass
class VariantError:
    label: str
    mode: DriveMode
    variant: SlDriveVariant
    worst_error_pct: float


def variant_worst_case_errors(n_active: int, *,
                              geometry: ArrayGeometry | None = None,
                              parasitics: ParasiticSpec = ParasiticSpec(),
                              t: Termination = IdealOpamp(),
                              profile: DeviceParams | None = None,
                              v_dd: float = 0.65,
                              v_bias: float | None = None,
                              tap_pitch: int = 16) -> list[VariantError]:
    """Worst-corner (max input, all weights 15) error for the drive variants."""
    combos = [
        ("config_a_single_end", DriveMode.CONFIG_A, SingleEnd()),
        ("config_b_single_end", DriveMode.CONFIG_B, SingleEnd()),
        ("config_b_both_ends", DriveMode.CONFIG_B, BothEnds()),
        ("config_b_tapped", DriveMode.CONFIG_B, TappedEvery(tap_pitch)),
    ]
    out = []
    for label, mode, variant in combos:
        pts = line_resistance_error_map(
            [WORST_CASE_INPUT[mode]], [15], n_active, variant, mode,
            geometry=geometry, parasitics=parasitics, t=t,
            profile=profile, v_dd=v_dd, v_bias=v_bias,
        )
        out.append(VariantError(label=label, mode=mode, variant=variant,
                                worst_error_pct=pts[0].worst_error_pct))
    return out
