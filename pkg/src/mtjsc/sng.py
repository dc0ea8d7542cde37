"""MTJ-based stochastic number generators and their per-bit costs.

Each generated bit runs the same device sequence: reset the junction to the
AP state (skipped when the previous write did not switch), apply a write
pulse whose width sets the AP->P switching probability, then read the
stored bit.  The normal generator writes a 0 with probability 1 - p; the
biased variant (BMS) always writes the cheaper of p and 1 - p internally
and restores the requested value with an inverting mux, which caps the
worst-case write pulse at the 50%-probability width.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
import numpy as np

from .device import (
    SwitchDirection,
    SwitchingModel,
    default_model,
    expected_switch_time,
    expected_write_energy,
    pulse_width_for_probability,
    switching_probability,
)
from .streams import Format, StochasticStream

# Probability treated as "certain" when sizing write pulses; matches the
# published worst-case write width.
WRITE_PROBABILITY_CAP = 0.999

DEFAULT_MUX_INV_ENERGY = 5e-15  # J/bit, BMS mux + inverter estimate


class SngKind(enum.Enum):
    NORMAL = "normal"
    BMS = "bms"


@dataclass(frozen=True)
class SngCostModel:
    """Per-bit energy/time constants derived from a calibrated device model."""

    switching: SwitchingModel
    reset_energy: float        # expected P->AP write at ~100% probability
    read_energy: float
    mux_inv_energy: float      # BMS only
    bit_period_normal: float
    bit_period_bms: float

    def __post_init__(self):
        if self.bit_period_bms >= self.bit_period_normal:
            raise ValueError("BMS bit period must be shorter than normal")
        if min(self.reset_energy, self.read_energy, self.mux_inv_energy) < 0:
            raise ValueError("energies must be nonnegative")
        object.__setattr__(self, "_write_energy_cache", {})


def build_cost_model(model: SwitchingModel | None = None,
                     mux_inv_energy: float = DEFAULT_MUX_INV_ENERGY) -> SngCostModel:
    model = model or default_model()
    params = model.params
    v = params.v_write
    t_reset_pulse = pulse_width_for_probability(
        WRITE_PROBABILITY_CAP, SwitchDirection.P_TO_AP, v, model)
    reset_energy = expected_write_energy(
        t_reset_pulse, SwitchDirection.P_TO_AP, v, model)
    # Read at the sense bias through the low-resistance state.
    read_energy = params.v_read ** 2 / params.r_p * params.t_read
    t_write_max = pulse_width_for_probability(
        WRITE_PROBABILITY_CAP, SwitchDirection.AP_TO_P, v, model)
    t_write_bms = pulse_width_for_probability(
        0.5, SwitchDirection.AP_TO_P, v, model)
    return SngCostModel(
        switching=model,
        reset_energy=reset_energy,
        read_energy=read_energy,
        mux_inv_energy=mux_inv_energy,
        bit_period_normal=params.t_reset + t_write_max + params.t_read,
        bit_period_bms=params.t_reset + t_write_bms + params.t_read,
    )


def write_probability(p: float, kind: SngKind) -> float:
    """AP->P switching probability that realizes a stream of value p."""
    if kind is SngKind.NORMAL:
        return 1.0 - p
    return min(p, 1.0 - p)


def _write_pulse_terms(q: float, cost_model: SngCostModel):
    """Pulse width plus per-outcome write energies for switch probability q.

    The per-outcome split charges the switched bits
    V*(I_start*E(t_sw) + I_end*(T - E(t_sw))) and the unswitched bits
    V*I_start*T, so the average over outcomes reproduces the expected write
    energy of the pulse.
    """
    model = cost_model.switching
    params = model.params
    v = params.v_write
    q_c = min(q, WRITE_PROBABILITY_CAP)
    if q_c <= 0.0:
        return 0.0, 0.0, 0.0
    t_w = pulse_width_for_probability(q_c, SwitchDirection.AP_TO_P, v, model)
    tau = expected_switch_time(t_w, SwitchDirection.AP_TO_P, v, model)
    i_ap = v / params.r_ap
    i_p = v / params.r_p
    e_sw = v * (i_ap * tau + i_p * (t_w - tau))
    e_nsw = v * i_ap * t_w
    return t_w, e_sw, e_nsw


def _expected_write_energy_at(q: float, cost_model: SngCostModel) -> float:
    """Expected AP->P write energy at probability q, cached per model."""
    q_c = min(q, WRITE_PROBABILITY_CAP)
    if q_c <= 0.0:
        return 0.0
    cache = cost_model._write_energy_cache
    if q_c not in cache:
        model = cost_model.switching
        v = model.params.v_write
        t_w = pulse_width_for_probability(q_c, SwitchDirection.AP_TO_P, v, model)
        cache[q_c] = expected_write_energy(t_w, SwitchDirection.AP_TO_P, v, model)
    return cache[q_c]


def generate_stream(p: float, n: int, kind: SngKind, seed,
                    cost_model: SngCostModel) -> tuple[StochasticStream, float]:
    """Generate n bits of value p and the total energy spent doing so.

    Deterministic given the seed.  The delivered stream is Bernoulli(p)
    regardless of kind; kind changes the internal write probability and
    therefore the cost.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must be in [0, 1]")
    if n < 1:
        raise ValueError("n must be >= 1")
    q = write_probability(p, kind)
    _, e_sw, e_nsw = _write_pulse_terms(q, cost_model)
    rng = np.random.default_rng(seed)
    switched = rng.random(n) < q
    if kind is SngKind.NORMAL:
        bits = (~switched).astype(np.uint8)
    else:
        internal = ~switched
        bits = (internal if p >= 0.5 else switched).astype(np.uint8)
    n_switched = int(switched.sum())
    # Reset precedes every bit whose previous write switched the device;
    # the device starts in the reset state, so bit 0 never needs one.
    n_resets = int(switched[:-1].sum())
    energy = (n_resets * cost_model.reset_energy
              + n_switched * e_sw + (n - n_switched) * e_nsw
              + n * cost_model.read_energy)
    if kind is SngKind.BMS:
        energy += n * cost_model.mux_inv_energy
    return StochasticStream(bits, Format.UNIPOLAR), energy


def energy_per_bit(p: float, kind: SngKind, cost_model: SngCostModel) -> float:
    """Closed-form expected energy per generated bit at stream value p."""
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must be in [0, 1]")
    q = write_probability(p, kind)
    e = q * cost_model.reset_energy + cost_model.read_energy
    e += _expected_write_energy_at(q, cost_model)
    if kind is SngKind.BMS:
        e += cost_model.mux_inv_energy
    return e


def bit_period(kind: SngKind, cost_model: SngCostModel) -> float:
    if kind is SngKind.NORMAL:
        return cost_model.bit_period_normal
    return cost_model.bit_period_bms


def mean_energy_per_bit(kind: SngKind, cost_model: SngCostModel,
                        grid_points: int = 201) -> float:
    """Average of energy_per_bit over p uniform on [0, 1] (trapezoid rule)."""
    ps = np.linspace(0.0, 1.0, grid_points)
    es = np.array([energy_per_bit(p, kind, cost_model) for p in ps])
    return float(np.trapezoid(es, ps))


def average_power(kind: SngKind, cost_model: SngCostModel) -> float:
    """Mean per-bit energy over uniform p divided by the bit period."""
    return mean_energy_per_bit(kind, cost_model) / bit_period(kind, cost_model)
