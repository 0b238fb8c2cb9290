"""The shared wire: what a passive observer of the loop can measure.

Each party connects one resistor and one noise source in series to a
common line. With Alice driving ``v_a`` behind resistance ``r_a`` and Bob
driving ``v_b`` behind ``r_b``, the loop current and the node voltage are
set by the voltage divider over ``r_a + r_b``. Everything an eavesdropper
sees derives from these two public signals.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .noise import ResistorPair, Trace


class SwitchState(str, Enum):
    """Which resistor a party has connected for the current bit."""

    LOW = "low"
    HIGH = "high"


def resistance_for(pair: ResistorPair, state: SwitchState) -> float:
    """Resistance a party presents to the line in a given switch state."""
    return pair.r_low if state is SwitchState.LOW else pair.r_high


def sigma_for(state: SwitchState, sigma_low: float, sigma_high: float) -> float:
    """Noise scale a party drives in a given switch state."""
    return sigma_low if state is SwitchState.LOW else sigma_high


@dataclass(frozen=True)
class LineTrace:
    """Simultaneously measured line voltage and loop current."""

    voltage: Trace
    current: Trace

    def __post_init__(self) -> None:
        if len(self.voltage) != len(self.current):
            raise ValueError("voltage and current traces must have equal length")

    def __len__(self) -> int:
        return len(self.voltage)


def line_signals(v_alice: Trace, v_bob: Trace, r_alice: float, r_bob: float) -> LineTrace:
    """Solve the two-source loop for the observable line signals.

    Voltage is the divider mix ``(v_a * r_b + v_b * r_a) / (r_a + r_b)``;
    current is ``(v_b - v_a) / (r_a + r_b)``, positive when flowing from
    Bob toward Alice.
    """
    if r_alice <= 0.0 or r_bob <= 0.0:
        raise ValueError("resistances must be positive")
    if len(v_alice) != len(v_bob):
        raise ValueError("source traces must have equal length")
    denom = r_alice + r_bob
    a = v_alice.samples
    b = v_bob.samples
    voltage = (a * r_bob + b * r_alice) / denom
    current = (b - a) / denom
    return LineTrace(voltage=Trace(voltage), current=Trace(current))


def theoretical_line_variance(
    pair: ResistorPair,
    sigma_low: float,
    sigma_high: float,
    state_alice: SwitchState,
    state_bob: SwitchState,
) -> float:
    """Exact variance of the line voltage for one joint switch state.

    With independent zero-mean sources the divider gives
    ``(sigma_a^2 * r_b^2 + sigma_b^2 * r_a^2) / (r_a + r_b)^2``. The two
    mixed states yield the same value, which is what makes them useless
    to an observer and therefore the bit-carrying states.
    """
    if sigma_low <= 0.0 or sigma_high <= 0.0:
        raise ValueError("sigmas must be positive")
    r_a = resistance_for(pair, state_alice)
    r_b = resistance_for(pair, state_bob)
    s_a = sigma_for(state_alice, sigma_low, sigma_high)
    s_b = sigma_for(state_bob, sigma_low, sigma_high)
    denom = (r_a + r_b) ** 2
    return (s_a**2 * r_b**2 + s_b**2 * r_a**2) / denom
