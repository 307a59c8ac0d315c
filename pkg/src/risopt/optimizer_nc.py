"""Globally optimal RIS loads when mutual coupling is ignored.

With a diagonal Z_SS and identical elements, each load maps to a phase
``phi_i`` through ``1/(x + j y) = (1 + exp(j phi)) / (2|x|)``, and the channel
becomes ``|b - sum_i a_i exp(j phi_i)|``. The maximizer aligns every term
against ``b``.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numba
import numpy as np

from .channel import RisLoad
from .em_model import ImpedanceNetwork
from .errors import InvalidResistance, LoadClampWarning, ProblemTooLarge, ResonantPhase
from .numerics import wrap_to_pi

RESONANCE_EPS = 1e-9
MAX_REACTANCE = 1e9
MAX_BRUTE_FORCE_N = 4


@dataclass
class NcProblem:
    a: np.ndarray
    b: complex
    x_abs: float
    Z_SS_diag: complex
    R0: float

    @property
    def n(self) -> int:
        return self.a.size

    @property
    def optimum(self) -> float:
        """Upper bound ``|b| + sum |a_i|``, attained by :func:`optimal_phases`."""
        return float(abs(self.b) + np.abs(self.a).sum())


@dataclass
class NcSolution:
    phases_2theta: np.ndarray
    loads: RisLoad
    predicted_gain: float
    problem: NcProblem


def build_nc_problem(net: ImpedanceNetwork, R0: float) -> NcProblem:
    """Coefficients of the no-coupling objective. Only diag(Z_SS) is used."""
    diag = np.diag(net.Z_SS)
    zss = complex(diag[0])
    if np.abs(diag - zss).max() > 1e-9 * abs(zss):
        raise ValueError("closed-form design assumes identical RIS elements (equal Z_SS diagonal)")
    x = R0 + zss.real
    if not x > 0:
        raise InvalidResistance(f"R0 + X_SS = {x:g} Ohm must be positive")
    a = net.z_ST * net.z_RS / (2.0 * abs(x))
    b = net.Z_RT - a.sum()
    return NcProblem(a=a, b=complex(b), x_abs=abs(x), Z_SS_diag=zss, R0=float(R0))


def nc_objective(phases, p: NcProblem) -> float:
    phases = np.asarray(phases, dtype=float)
    return float(abs(p.b - np.sum(p.a * np.exp(1j * phases))))


def optimal_phases(p: NcProblem) -> np.ndarray:
    """``phi_i = wrap(angle(b) - angle(a_i) + pi)``; zero for dark elements.

    ``np.angle(0) == 0`` already gives the b = 0 convention.
    """
    phi = wrap_to_pi(np.angle(p.b) - np.angle(p.a) + np.pi)
    return np.where(p.a == 0, 0.0, np.atleast_1d(phi))


def phases_to_loads(phases, p: NcProblem) -> RisLoad:
    """Loads realizing the given phases: ``2|x| / (1 + exp(j phi)) - Z_SS(i,i)``.

    Uses ``2|x| / (1 + exp(j phi)) = |x| (1 - j tan(phi / 2))``, which keeps the
    real part at exactly R0 even close to resonance. Reactances beyond
    +-MAX_REACTANCE are clamped with a LoadClampWarning.
    """
    phases = np.atleast_1d(np.asarray(phases, dtype=float))
    # |1 + exp(j phi)| = 2 |cos(phi / 2)|
    bad = np.flatnonzero(2.0 * np.abs(np.cos(0.5 * phases)) <= RESONANCE_EPS)
    if bad.size:
        raise ResonantPhase(f"phase(s) at elements {bad.tolist()} need an open-circuit load")
    X = -p.x_abs * np.tan(0.5 * phases) - p.Z_SS_diag.imag
    if np.any(np.abs(X) > MAX_REACTANCE):
        warnings.warn(f"clamping reactances to +-{MAX_REACTANCE:g} Ohm", LoadClampWarning, stacklevel=2)
        X = np.clip(X, -MAX_REACTANCE, MAX_REACTANCE)
    return RisLoad(X, p.R0)


def stationarity_residual(phases, p: NcProblem) -> np.ndarray:
    """Left-hand side of the stationarity system of the objective.

    With ``chi_i = angle(b) - angle(a_i) - phi_i`` this is
    ``|b a_i| sin(chi_i) - sum_{k != i} |a_i a_k| sin(chi_i - chi_k)``,
    which equals ``-F * dF/dphi_i``.
    """
    phases = np.atleast_1d(np.asarray(phases, dtype=float))
    chi = np.angle(p.b) - np.angle(p.a) - phases
    mag = np.abs(p.a)
    pair = np.sin(chi[:, None] - chi[None, :])  # diagonal is sin(0) = 0
    return abs(p.b) * mag * np.sin(chi) - mag * (pair @ mag)


def solve_no_coupling(net: ImpedanceNetwork, R0: float) -> NcSolution:
    p = build_nc_problem(net, R0)
    phases = optimal_phases(p)
    return NcSolution(phases, phases_to_loads(phases, p), p.optimum, p)


@numba.njit(cache=True)
def _grid_argmax(br, bi, tr, ti):
    n, g = tr.shape
    idx = np.zeros(n, dtype=np.int64)
    best_idx = np.zeros(n, dtype=np.int64)
    best = -1.0
    last = n - 1
    # partial sums of the leading n-1 terms, refreshed odometer-style
    pr = np.zeros(n)
    pi_ = np.zeros(n)
    pr[0] = br
    pi_[0] = bi
    for k in range(last):
        pr[k + 1] = pr[k] - tr[k, 0]
        pi_[k + 1] = pi_[k] - ti[k, 0]
    while True:
        cr = pr[last]
        ci = pi_[last]
        for j in range(g):
            dr = cr - tr[last, j]
            di = ci - ti[last, j]
            v = dr * dr + di * di
            if v > best:
                best = v
                for k in range(last):
                    best_idx[k] = idx[k]
                best_idx[last] = j
        # advance the odometer over the leading axes
        k = last - 1
        while k >= 0:
            idx[k] += 1
            if idx[k] < g:
                break
            idx[k] = 0
            k -= 1
        if k < 0:
            break
        for m in range(k, last):
            pr[m + 1] = pr[m] - tr[m, idx[m]]
            pi_[m + 1] = pi_[m] - ti[m, idx[m]]
    return best_idx, np.sqrt(best)


def brute_force_phases(p: NcProblem, grid_points: int):
    """Exhaustive maximization over the uniform grid ``-pi + 2 pi g / G``.

    Scans in lexicographic order and keeps the first strict maximum, so ties
    resolve to the lowest phase tuple. Returns ``(phases, objective)``.
    """
    if p.n > MAX_BRUTE_FORCE_N:
        raise ProblemTooLarge(f"N = {p.n} > {MAX_BRUTE_FORCE_N}; grid has {grid_points}**N points")
    if grid_points < 8:
        raise ValueError("grid_points must be >= 8")
    grid = -np.pi + 2.0 * np.pi * np.arange(grid_points) / grid_points
    terms = p.a[:, None] * np.exp(1j * grid[None, :])
    idx, value = _grid_argmax(p.b.real, p.b.imag, np.ascontiguousarray(terms.real), np.ascontiguousarray(terms.imag))
    return grid[idx], float(value)
