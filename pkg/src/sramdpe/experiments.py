"""Experiment implementations behind the CLI verbs.

Each runner takes a resolved config and returns CSV tables; scenarios inside
a sweep are independent and can be mapped over a thread pool. Results are
always emitted in canonical scenario order regardless of completion order.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import config as cfgmod
from .crossbar import (
    ArrayGeometry,
    DriveMode,
    Excitation,
    WeightMatrix,
    ideal_column_currents,
    pack_weights,
)
from .dataset import generate_digits
from .energy import WorkloadSpec, digital_energy, dpe_energy
from .matio import load_dataset_csv, load_real_matrix, save_real_matrix
from .network import (
    BothEnds,
    IdealOpamp,
    SenseResistor,
    SingleEnd,
    TappedEvery,
    WORST_CASE_INPUT,
    ZERO_PARASITICS,
    build_network,
    line_resistance_error_map,
    row_scaling_curve,
    solve_operating_point,
    variant_worst_case_errors,
)
from .nn import (
    CrossbarContext,
    EvalMode,
    InputEncoding,
    NormalizationSpec,
    QuantizedNetwork,
    infer,
    train_reference,
)
from .variation import VariationSpec, fit_std_vs_current, monte_carlo_stats


@dataclass
class CsvTable:
    name: str
    columns: list[str]
    rows: list[tuple] = field(default_factory=list)


def _pmap(fn, items, threads: int):
    if threads <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(fn, items))


def _single_cell_current(mode: DriveMode, weight: int, v_in: float,
                         sense_r: float, profile, v_dd: float,
                         v_bias: float) -> float:
    g = ArrayGeometry(rows=1, word_columns=1)
    cells = pack_weights(WeightMatrix.uniform(1, 1, weight), g, profile=profile)
    e = Excitation(mode, [v_in], v_dd=v_dd, v_bias=v_bias)
    net = build_network(g, ZERO_PARASITICS, SingleEnd(),
                        SenseResistor(sense_r), e, cells)
    return float(solve_operating_point(net).column_currents.per_group[0])


def run_iv_sweep(cfg: dict, out_dir, threads: int = 1) -> list[CsvTable]:
    """Single 4-bit cell I-V curves for both configs at several weights."""
    sw = cfg["sweep"]
    profile = cfgmod.device_profile(cfg)
    exc = cfg["excitation"]
    v_grid = np.arange(sw["v_start"], sw["v_stop"] + 1e-12, sw["v_step"])
    scenarios = [
        (mode, int(w), round(float(v), 6))
        for mode in (DriveMode.CONFIG_A, DriveMode.CONFIG_B)
        for w in sw["iv_weights"]
        for v in v_grid
    ]

    def solve(sc):
        mode, w, v = sc
        return _single_cell_current(mode, w, v, float(sw["sense_r"]),
                                    profile, exc["v_dd"], exc["v_bias"])

    currents = _pmap(solve, scenarios, threads)
    table = CsvTable("iv_sweep.csv", ["config", "weight", "v_in", "i_rbl"])
    for (mode, w, v), i in zip(scenarios, currents):
        table.rows.append((mode.value, w, v, i))
    return [table]


def run_weight_sweep(cfg: dict, out_dir, threads: int = 1) -> list[CsvTable]:
    """Current vs weight level at fixed voltages in each config's window."""
    sw = cfg["sweep"]
    profile = cfgmod.device_profile(cfg)
    exc = cfg["excitation"]
    scenarios = [
        (mode, round(float(v), 6), w)
        for mode, volts in (
            (DriveMode.CONFIG_A, sw["weight_voltages_a"]),
            (DriveMode.CONFIG_B, sw["weight_voltages_b"]),
        )
        for v in volts
        for w in range(16)
    ]

    def solve(sc):
        mode, v, w = sc
        return _single_cell_current(mode, w, v, float(sw["sense_r"]),
                                    profile, exc["v_dd"], exc["v_bias"])

    currents = _pmap(solve, scenarios, threads)
    table = CsvTable("weight_sweep.csv", ["config", "v_in", "weight", "i_rbl"])
    for (mode, v, w), i in zip(scenarios, currents):
        table.rows.append((mode.value, v, w, i))
    return [table]


def run_row_scaling(cfg: dict, out_dir, threads: int = 1) -> list[CsvTable]:
    """I_N vs N x I_1 for both configs under both terminations."""
    sw = cfg["sweep"]
    profile = cfgmod.device_profile(cfg)
    exc = cfg["excitation"]
    t_cfg = cfg["termination"]
    combos = [
        (mode, term)
        for mode in (DriveMode.CONFIG_A, DriveMode.CONFIG_B)
        for term in (SenseResistor(float(sw["sense_r"])),
                     IdealOpamp(float(t_cfg["v_pos"])))
    ]

    def solve(combo):
        mode, term = combo
        return row_scaling_curve(
            sw["row_counts"], mode, term, profile=profile,
            v_dd=exc["v_dd"], v_bias=exc["v_bias"],
        )

    results = _pmap(solve, combos, threads)
    table = CsvTable(
        "row_scaling.csv",
        ["config", "termination", "v_in", "n_rows", "i_n", "n_times_i1",
         "deviation_pct"],
    )
    for (mode, term), points in zip(combos, results):
        t_name = "sense_resistor" if isinstance(term, SenseResistor) else "ideal_opamp"
        v_in = WORST_CASE_INPUT[mode]
        for pt in points:
            table.rows.append((mode.value, t_name, v_in, pt.n, pt.i_n,
                               pt.ideal, pt.deviation_pct))
    return [table]


def run_lineres_map(cfg: dict, out_dir, threads: int = 1) -> list[CsvTable]:
    """Line-resistance error map plus the four-variant worst-case bars."""
    sw = cfg["sweep"]
    profile = cfgmod.device_profile(cfg)
    exc = cfg["excitation"]
    geometry = cfgmod.geometry(cfg)
    para = cfgmod.parasitics(cfg)
    term = cfgmod.termination(cfg)
    variant = cfgmod.drive_variant(cfg)
    mode = cfgmod.drive_mode(cfg)

    map_table = CsvTable(
        "lineres_map.csv",
        ["config", "variant", "n_active", "v_in", "weight_level",
         "worst_error_pct"],
    )
    variant_name = {SingleEnd: "single_end", BothEnds: "both_ends",
                    TappedEvery: "tapped"}[type(variant)]

    def solve_map(n_active):
        return line_resistance_error_map(
            sw["map_voltages"], sw["map_weights"], int(n_active), variant,
            mode, geometry=geometry, parasitics=para, t=term,
            profile=profile, v_dd=exc["v_dd"], v_bias=exc["v_bias"],
        )

    maps = _pmap(solve_map, sw["map_active_rows"], threads)
    for n_active, pts in zip(sw["map_active_rows"], maps):
        for pt in pts:
            map_table.rows.append((mode.value, variant_name, int(n_active),
                                   pt.v_in, pt.weight_level,
                                   pt.worst_error_pct))

    bars = CsvTable(
        "lineres_variants.csv",
        ["label", "config", "n_active", "worst_error_pct"],
    )

    def solve_bars(n_active):
        return variant_worst_case_errors(
            int(n_active), geometry=geometry, parasitics=para, t=term,
            profile=profile, v_dd=exc["v_dd"], v_bias=exc["v_bias"],
        )

    all_bars = _pmap(solve_bars, sw["map_active_rows"], threads)
    for n_active, res in zip(sw["map_active_rows"], all_bars):
        for r in res:
            bars.rows.append((r.label, r.mode.value, int(n_active),
                              r.worst_error_pct))
    return [map_table, bars]


def run_montecarlo(cfg: dict, out_dir, threads: int = 1) -> list[CsvTable]:
    """Vt Monte Carlo statistics over the (voltage, weight) grid plus fit."""
    var = cfg["variation"]
    profile = cfgmod.device_profile(cfg)
    exc = cfg["excitation"]
    spec = VariationSpec(sigma_min=float(var["sigma_min"]),
                         seed=int(cfg["seed"]), trials=int(var["trials"]))
    weights = [int(w) for w in var["mc_weights"]]

    def solve(w):
        return monte_carlo_stats(
            var["mc_voltages"], [w], spec, n_rows=int(var["mc_rows"]),
            mode=cfgmod.drive_mode(cfg), profile=profile,
            v_dd=exc["v_dd"], v_bias=exc["v_bias"],
            v_clamp=float(cfg["termination"]["v_pos"]),
        )

    results = _pmap(solve, weights, threads)
    stats = CsvTable(
        "montecarlo_stats.csv",
        ["v_in", "weight_level", "mean_current", "std_current",
         "nominal_current"],
    )
    points = [pt for batch in results for pt in batch]
    for pt in points:
        stats.rows.append((pt.v_in, pt.weight_level, pt.mean_current,
                           pt.std_current, pt.nominal_current))
    fit_table = CsvTable(
        "montecarlo_fit.csv",
        ["coeff_linear", "coeff_quadratic", "domain_lo", "domain_hi",
         "residual_rms"],
    )
    if len(points) >= 10:   # fit precondition; smaller grids emit stats only
        fit = fit_std_vs_current(
            [(p.mean_current, p.std_current) for p in points]
        )
        fit_table.rows.append((fit.coeff_linear, fit.coeff_quadratic,
                               fit.domain[0], fit.domain[1],
                               fit.residual_rms))
    return [stats, fit_table]


def _nn_dataset(cfg: dict):
    nn = cfg["nn"]
    if nn["dataset_csv"]:
        x, y = load_dataset_csv(nn["dataset_csv"])
        n_test = max(1, len(y) // 4)
        return (x[n_test:], y[n_test:], x[:n_test], y[:n_test])
    ds = generate_digits(
        n_train_per_class=int(nn["train_per_class"]),
        n_test_per_class=int(nn["test_per_class"]),
        seed=int(cfg["seed"]) + 7,
        noise_sigma=float(nn["noise_sigma"]),
    )
    return ds.train_x, ds.train_y, ds.test_x, ds.test_y


def run_nn(cfg: dict, out_dir, threads: int = 1) -> list[CsvTable]:
    """Train (or import) weights, evaluate all three fidelity modes."""
    nn = cfg["nn"]
    profile = cfgmod.device_profile(cfg)
    train_x, train_y, test_x, test_y = _nn_dataset(cfg)

    if nn["weights_in"]:
        weights = [load_real_matrix(p) for p in nn["weights_in"]]
        losses = []
    else:
        hidden = 32
        weights, losses = train_reference(
            train_x, train_y, topology=(train_x.shape[1], hidden, 10),
            epochs=int(nn["epochs"]), lr=float(nn["lr"]),
            batch_size=int(nn["batch_size"]), seed=int(cfg["seed"]),
        )
    network = QuantizedNetwork.from_real_weights(weights)

    encoding = InputEncoding()
    norm = NormalizationSpec.calibrate(
        profile, encoding, anchor=nn["normalization_anchor"]
    )
    base_ctx = dict(
        profile=profile, encoding=encoding, normalization=norm,
        adc_bits=int(nn["adc_bits"]), tile_rows=int(nn["tile_rows"]),
    )

    var = cfg["variation"]
    spec = VariationSpec(sigma_min=float(var["sigma_min"]),
                         seed=int(cfg["seed"]), trials=int(nn["fit_trials"]))
    pts = monte_carlo_stats(nn["fit_voltages"], nn["fit_weights"], spec,
                            profile=profile)
    fit = fit_std_vs_current([(p.mean_current, p.std_current) for p in pts])

    runs = [
        (EvalMode.IDEAL, CrossbarContext(**base_ctx)),
        (EvalMode.CROSSBAR, CrossbarContext(**base_ctx)),
        (EvalMode.CROSSBAR_VARIATION,
         CrossbarContext(**base_ctx, variation_fit=fit,
                         variation_seed=int(cfg["seed"]))),
    ]
    accs = _pmap(
        lambda rc: infer(test_x, test_y, network, rc[0], rc[1]), runs, threads
    )

    for idx, w in enumerate(weights):
        save_real_matrix(out_dir / f"nn_weights_layer{idx}.txt", w)

    acc_table = CsvTable(
        "nn_accuracy.csv",
        ["mode", "accuracy", "n_test", "n_train", "final_train_loss"],
    )
    final_loss = losses[-1] if losses else float("nan")
    for (mode, _), acc in zip(runs, accs):
        acc_table.rows.append((mode.value, acc, len(test_y), len(train_y),
                               final_loss))
    layer_table = CsvTable(
        "nn_layers.csv", ["layer", "in_dim", "out_dim", "scale"],
        [(i, l.in_dim, l.out_dim, l.scale)
         for i, l in enumerate(network.layers)],
    )
    return [acc_table, layer_table]


def run_energy(cfg: dict, out_dir, threads: int = 1) -> list[CsvTable]:
    """DPE vs digital-sequential energy for the configured workload."""
    import sys

    en = cfg["energy"]
    params = cfgmod.energy_params(cfg)
    profile = cfgmod.device_profile(cfg)
    rows, words = int(en["rows"]), int(en["words"])
    work = WorkloadSpec(rows=rows, words=words)

    g = ArrayGeometry(rows=rows, word_columns=words)
    cells = pack_weights(
        WeightMatrix.uniform(rows, words, int(en["weight_level"])), g,
        profile=profile,
    )
    encoding = InputEncoding()
    v_in = float(encoding.encode(float(en["input_level"])))
    v_pos = float(cfg["termination"]["v_pos"])
    e = Excitation(DriveMode.CONFIG_A, np.full(rows, v_in),
                   v_dd=cfg["excitation"]["v_dd"])
    currents = ideal_column_currents(e, cells, v_pos).per_group

    em_flag = 0
    ceiling = en["em_current_ceiling"]
    if ceiling is not None and float(np.max(np.abs(currents))) > float(ceiling):
        em_flag = 1
        print(
            f"warning: peak column current {np.max(np.abs(currents)):.3e} A "
            f"exceeds the electromigration ceiling {float(ceiling):.3e} A",
            file=sys.stderr,
        )

    dpe = dpe_energy(work, params, currents, v_dd=cfg["excitation"]["v_dd"])
    dig = digital_energy(work, params)
    sha = params.sha256()
    cols = ["approach", "total_energy_j", "time_s", "dac_j", "adc_j",
            "analog_static_j", "array_access_j", "memory_read_j", "mac_j",
            "em_flag", "params_sha256"]
    table = CsvTable("energy.csv", cols)
    table.rows.append((
        "dpe", dpe.total_energy, dpe.time,
        dpe.breakdown["dac"], dpe.breakdown["adc"],
        dpe.breakdown["analog_static"], dpe.breakdown["array_access"],
        0.0, 0.0, em_flag, sha,
    ))
    table.rows.append((
        "digital_sequential", dig.total_energy, dig.time,
        0.0, 0.0, 0.0, 0.0,
        dig.breakdown["memory_read"], dig.breakdown["mac"], 0, sha,
    ))
    return [table]


RUNNERS = {
    "iv-sweep": run_iv_sweep,
    "weight-sweep": run_weight_sweep,
    "row-scaling": run_row_scaling,
    "lineres-map": run_lineres_map,
    "montecarlo": run_montecarlo,
    "nn": run_nn,
    "energy": run_energy,
}
