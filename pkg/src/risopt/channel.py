"""End-to-end channel of the impedance model and its no-coupling form."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .em_model import ImpedanceNetwork
from .errors import SeriesResonance
from .numerics import lu_solve


@dataclass
class RisLoad:
    """Tunable loads ``R0 + j*reactances[i]``.

    Only the reactances are stored, so every load has real part exactly R0.
    """

    reactances: np.ndarray
    R0: float

    def __post_init__(self):
        self.reactances = np.asarray(self.reactances, dtype=float).ravel()
        self.R0 = float(self.R0)
        if self.reactances.size < 1:
            raise ValueError("at least one load is required")
        if not np.all(np.isfinite(self.reactances)):
            raise ValueError("reactances must be finite")
        if not self.R0 >= 0:
            raise ValueError("R0 must be non-negative")

    @property
    def n(self) -> int:
        return self.reactances.size

    @property
    def diagonal(self) -> np.ndarray:
        return self.R0 + 1j * self.reactances

    def matrix(self) -> np.ndarray:
        return np.diag(self.diagonal)


@dataclass(frozen=True)
class ChannelValue:
    h: complex

    @property
    def gain_db(self) -> float:
        mag = abs(self.h)
        return 20.0 * np.log10(mag) if mag > 0 else -np.inf


def _check_sizes(net: ImpedanceNetwork, load: RisLoad):
    if load.n != net.n:
        raise ValueError(f"{load.n} loads for a {net.n}-element network")


def end_to_end_channel(net: ImpedanceNetwork, load: RisLoad, Y0: complex = 1.0) -> ChannelValue:
    """``Y0 * (Z_RT - z_RS (Z_SS + Z_RIS)^-1 z_ST)`` via one LU solve."""
    _check_sizes(net, load)
    G = net.Z_SS + load.matrix()
    scattered = net.z_RS @ lu_solve(G, net.z_ST)
    return ChannelValue(complex(Y0) * (net.Z_RT - scattered))


def channel_no_coupling(net: ImpedanceNetwork, load: RisLoad, Y0: complex = 1.0) -> ChannelValue:
    """Channel when Z_SS is diagonal; off-diagonal entries of ``net`` are ignored."""
    _check_sizes(net, load)
    denom = np.diag(net.Z_SS) + load.diagonal
    zero = np.flatnonzero(denom == 0)
    if zero.size:
        raise SeriesResonance(f"element(s) {zero.tolist()} have zero series impedance")
    return ChannelValue(complex(Y0) * (net.Z_RT - np.sum(net.z_ST * net.z_RS / denom)))


def snr_gain(h: ChannelValue | complex, noise_power: float = 1.0) -> float:
    """``10 log10(|h|^2 / noise_power)`` in dB."""
    if not noise_power > 0:
        raise ValueError("noise_power must be positive")
    value = h.h if isinstance(h, ChannelValue) else complex(h)
    return float(10.0 * np.log10(abs(value) ** 2 / noise_power))
