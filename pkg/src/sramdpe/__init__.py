"""sramdpe: behavioral simulator for an 8T-SRAM analog dot-product engine.

Submodules
----------
device      behavioral NMOS model and the two-transistor read-stack solver
crossbar    array data model, drive schemes, parasitic-free evaluation
network     nonlinear DC operating-point solver with line parasitics
variation   threshold-voltage Monte Carlo and the Gaussian noise surrogate
nn          quantized network inference through the simulated crossbar
energy      analog-engine vs digital-sequential energy comparison
dataset     bundled desk-scale digit set
matio       portable matrix / dataset file formats
config      experiment config schema
cli         experiment runner (``sramdpe <command>``)
"""

__version__ = "0.1.0"

from .crossbar import (
    ArrayGeometry,
    ColumnCurrents,
    DriveMode,
    Excitation,
    WeightMatrix,
    ideal_column_currents,
    ideal_dot_product,
    pack_weights,
    unpack_weights,
)
from .device import DeviceParams, ReadStack, mosfet_current, stack_current
from .network import (
    BothEnds,
    IdealOpamp,
    OperatingPointSolution,
    ParasiticSpec,
    SenseResistor,
    SingleEnd,
    TappedEvery,
    build_network,
    dense_oracle_solve,
    line_resistance_error_map,
    row_scaling_curve,
    solve_operating_point,
)
from .nn import (
    CrossbarContext,
    EvalMode,
    InputEncoding,
    QuantizedNetwork,
    infer,
    quantize_weights,
    train_reference,
)
from .variation import (
    StdVsCurrentFit,
    VariationSpec,
    fit_std_vs_current,
    monte_carlo_stats,
    surrogate_noise,
)

__all__ = [
    "ArrayGeometry", "BothEnds", "ColumnCurrents", "CrossbarContext",
    "DeviceParams", "DriveMode", "EvalMode", "Excitation", "IdealOpamp",
    "InputEncoding", "OperatingPointSolution", "ParasiticSpec",
    "QuantizedNetwork", "ReadStack", "SenseResistor", "SingleEnd",
    "StdVsCurrentFit", "TappedEvery", "VariationSpec", "WeightMatrix",
    "build_network", "dense_oracle_solve", "fit_std_vs_current",
    "ideal_column_currents", "ideal_dot_product", "infer",
    "line_resistance_error_map", "monte_carlo_stats", "mosfet_current",
    "pack_weights", "quantize_weights", "row_scaling_curve",
    "solve_operating_point", "stack_current", "surrogate_noise",
    "train_reference", "unpack_weights",
]
