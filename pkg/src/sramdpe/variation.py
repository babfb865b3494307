"""Threshold-voltage Monte Carlo and the Gaussian surrogate noise model.

Per-device threshold offsets are Gaussian with the width-scaling law
sigma_L = sigma_min * sqrt(W_min L_min / (W L)); only W scales with the column
sizing (L is fixed), so a width multiplier m shrinks sigma by sqrt(m).
Sampling is counter-based: every trial owns a Philox stream keyed by
(seed, trial), and a device's draw is its position in that stream, so trials
are order-independent and reproducible under parallel evaluation.

The column statistics feed a degree-2 zero-intercept polynomial fit of the
current's standard deviation versus its mean; the fit is the surrogate the
network harness uses to inject per-tile Gaussian noise instead of re-running
full Monte Carlo per inference.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .crossbar import (
    DEFAULT_V_BIAS,
    ArrayGeometry,
    DriveMode,
    Excitation,
    WeightMatrix,
    pack_weights,
)
from .device import DeviceParams, stack_current_arrays
from .errors import InvalidInputError


@dataclass(frozen=True)
class VariationSpec:
    """Monte Carlo setup: minimum-device sigma, reference area, seed, trials."""

    sigma_min: float = 0.030
    w_min_l_min: float = 1.0
    seed: int = 0
    trials: int = 1000

    def __post_init__(self):
        if self.sigma_min < 0:
            raise InvalidInputError("sigma_min must be >= 0")
        if self.trials < 1:
            raise InvalidInputError("trials must be >= 1")

    def sigma_for_multiplier(self, multiplier) -> np.ndarray:
        """sigma_L for a device whose width is ``multiplier`` x minimum."""
        m = np.asarray(multiplier, dtype=float)
        return self.sigma_min / np.sqrt(m)


def _trial_rng(spec: VariationSpec, trial: int) -> np.random.Generator:
    seq = np.random.SeedSequence((int(spec.seed) & (2**64 - 1), int(trial)))
    return np.random.Generator(np.random.Philox(seed=seq))


def sample_vt_offsets(spec: VariationSpec, multipliers, trial: int) -> np.ndarray:
    """Threshold offsets for every device of one trial.

    ``multipliers`` is the per-device width multiplier array; the device index
    is its position. Deterministic per (seed, trial, position).
    """
    m = np.asarray(multipliers, dtype=float)
    draws = _trial_rng(spec, trial).standard_normal(m.size).reshape(m.shape)
    return draws * spec.sigma_for_multiplier(m)


def sample_vt(spec: VariationSpec, width_multiplier: int, trial: int,
              device_index: int = 0) -> float:
    """Single-device threshold offset; scalar view of ``sample_vt_offsets``."""
    rng = _trial_rng(spec, trial)
    draws = rng.standard_normal(device_index + 1)
    return float(draws[device_index] * spec.sigma_for_multiplier(width_multiplier))


@dataclass
class MonteCarloPoint:
    v_in: float
    weight_level: int
    mean_current: float
    std_current: float
    nominal_current: float


def _tile_currents_with_variation(spec: VariationSpec, weight_level: int,
                                  v_in: float, n_rows: int, mode: DriveMode,
                                  profile: DeviceParams, v_dd: float,
                                  v_bias: float, v_clamp: float) -> np.ndarray:
    """Group current of one n_rows x 1-word tile for every trial (clamped RBL).

    Line resistances are deliberately excluded, so each cell sees its exact
    drive and the per-trial group current is a plain sum over cells.
    """
    g = ArrayGeometry(rows=n_rows, word_columns=1)
    cells = pack_weights(WeightMatrix.uniform(n_rows, 1, weight_level), g,
                         profile=profile)
    e = Excitation(mode, np.full(n_rows, v_in), v_dd=v_dd, v_bias=v_bias)

    sl = e.sl_voltages()[:, None]
    rwl = e.rwl_voltages()[:, None]
    gate1 = np.where(cells.data_bits > 0, v_dd, 0.0)
    gate2 = np.broadcast_to(rwl, gate1.shape)
    mult = np.broadcast_to(cells.multipliers[None, :], gate1.shape)

    # Device axis: (trial, row, bit-column, m1/m2).
    t_axis = np.arange(spec.trials)
    mult_dev = np.stack([mult, mult], axis=-1)
    offsets = np.stack(
        [sample_vt_offsets(spec, mult_dev, t) for t in t_axis], axis=0
    )
    p = profile
    wl = p.w_over_l * mult.astype(float)

    def params(dev):
        vt = p.vt0 + offsets[..., dev]
        return (vt, p.k_prime, wl, p.lam,
                p.subthreshold_i0, p.subthreshold_n, p.phi_t)

    i_cells, _, _ = stack_current_arrays(
        params(0), params(1), gate1, gate2, sl, v_clamp
    )
    return i_cells.sum(axis=(1, 2))


def monte_carlo_stats(voltages, weight_levels, spec: VariationSpec, *,
                      n_rows: int = 16, mode: DriveMode = DriveMode.CONFIG_B,
                      profile: DeviceParams | None = None, v_dd: float = 0.65,
                      v_bias: float | None = None,
                      v_clamp: float = 0.1) -> list[MonteCarloPoint]:
    """Mean/std of the group current per (voltage, weight) grid point.

    The scenario is an n_rows tile with uniform inputs and uniform weights,
    RBL clamped (parasitic-free). Statistics use the sample estimator
    (ddof=1); ``nominal_current`` is the variation-free solve.
    """
    profile = profile if profile is not None else DeviceParams()
    v_bias = DEFAULT_V_BIAS if v_bias is None else v_bias
    zero = VariationSpec(sigma_min=0.0, seed=spec.seed, trials=1)
    out = []
    for w in weight_levels:
        for v in voltages:
            args = (int(w), float(v), n_rows, mode, profile, v_dd, v_bias,
                    v_clamp)
            trials = _tile_currents_with_variation(spec, *args)
            nominal = float(_tile_currents_with_variation(zero, *args)[0])
            if spec.trials > 1 and np.ptp(trials) > 0.0:
                std = float(np.std(trials, ddof=1))
            else:
                std = 0.0   # degenerate sample (e.g. sigma_min = 0)
            out.append(MonteCarloPoint(
                v_in=float(v), weight_level=int(w),
                mean_current=float(np.mean(trials)),
                std_current=std, nominal_current=nominal,
            ))
    return out


@dataclass
class StdVsCurrentFit:
    """std(I) ~ a*I + b*I^2, zero intercept, clamped to its fit domain.

    ``residual_rms`` is the root-mean-square per-point fit residual; the
    same current can arise from different (voltage, weight) mixes with
    different spreads, so some scatter is inherent.
    """

    coeff_linear: float
    coeff_quadratic: float
    domain: tuple[float, float]
    residual_rms: float

    def __call__(self, current) -> np.ndarray:
        c = np.clip(np.asarray(current, dtype=float), *self.domain)
        val = self.coeff_linear * c + self.coeff_quadratic * c * c
        return np.maximum(val, 0.0)


def fit_std_vs_current(points) -> StdVsCurrentFit:
    """Least-squares degree-2 zero-intercept fit of (current, std) pairs."""
    pts = [(float(c), float(s)) for c, s in points]
    if len(pts) < 10:
        raise InvalidInputError("need at least 10 points for the std fit")
    cur = np.array([p[0] for p in pts])
    std = np.array([p[1] for p in pts])
    dom = (float(cur.min()), float(cur.max()))
    if np.allclose(std, 0.0) or np.allclose(cur, 0.0):
        return StdVsCurrentFit(0.0, 0.0, dom,
                               float(np.sqrt(np.mean(std * std))))
    basis = np.column_stack([cur, cur * cur])
    coef, *_ = np.linalg.lstsq(basis, std, rcond=None)
    resid = float(np.sqrt(np.mean((basis @ coef - std) ** 2)))
    return StdVsCurrentFit(float(coef[0]), float(coef[1]), dom, resid)


def surrogate_noise(current: float, fit: StdVsCurrentFit,
                    rng: np.random.Generator) -> float:
    """One Gaussian draw around ``current`` with the fitted std."""
    sigma = float(fit(current))
    if sigma == 0.0:
        return float(current)
    return float(current + rng.normal(0.0, sigma))
