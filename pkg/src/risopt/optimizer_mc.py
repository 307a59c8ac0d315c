"""Coupling-aware iterative load optimization.

Starting from the no-coupling design, each iteration linearizes the channel
around the current loads with a two-term Neumann expansion of
``(G + Z_D)^-1``, picks the best diagonal perturbation of fixed magnitude
delta in closed form, and keeps only its imaginary part so the load
resistances stay at R0. The exact channel is recomputed after every step.
"""
from __future__ import annotations

import csv
import io
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .channel import RisLoad
from .em_model import ImpedanceNetwork
from .errors import LoadClampWarning, SingularMatrix
from .numerics import invert, lu_solve, spectral_norm, wrap_to_pi
from .optimizer_nc import solve_no_coupling

MAX_DELTA_RATIO = 0.5


@dataclass(frozen=True)
class FixedDelta:
    delta: float

    def __post_init__(self):
        if not self.delta >= 0:
            raise ValueError("delta must be non-negative")


@dataclass(frozen=True)
class AdaptiveDelta:
    """delta = eps / ||G_k^-1|| at every iteration."""

    eps: float = 0.1

    def __post_init__(self):
        if not 0 < self.eps < 1:
            raise ValueError("eps must lie in (0, 1)")


@dataclass(frozen=True)
class McConfig:
    """Iteration controls.

    Early stopping triggers after ``conv_window`` consecutive steps whose
    relative improvement is below ``conv_tol``; ``conv_tol = 0`` disables it.
    """

    max_iters: int = 500
    delta_policy: FixedDelta | AdaptiveDelta = field(default_factory=AdaptiveDelta)
    conv_tol: float = 1e-8
    conv_window: int = 10
    monotonicity_tol: float = 1e-6

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.conv_tol < 0:
            raise ValueError("conv_tol must be >= 0")
        if self.conv_window < 1:
            raise ValueError("conv_window must be >= 1")


@dataclass
class McState:
    k: int
    load: RisLoad
    b: complex
    p: np.ndarray
    q: np.ndarray
    g_inv_norm: float
    # step that produced this state (nan for the initial one)
    delta: float = math.nan
    linearized: float = math.nan


@dataclass
class McTrace:
    """Per-step record. Entry k describes the state after step k+1."""

    initial_objective: float
    objective: list = field(default_factory=list)
    delta_used: list = field(default_factory=list)
    norm_bound: list = field(default_factory=list)
    linearized: list = field(default_factory=list)
    upper_bound: list = field(default_factory=list)
    violation: list = field(default_factory=list)

    @property
    def monotonicity_violations(self) -> int:
        return int(sum(self.violation))

    @property
    def final_objective(self) -> float:
        return self.objective[-1] if self.objective else self.initial_objective

    def __len__(self):
        return len(self.objective)

    def neumann_errors(self) -> np.ndarray:
        """Relative gap between predicted and recomputed objective per step."""
        obj = np.asarray(self.objective)
        return np.abs(np.asarray(self.linearized) - obj) / obj

    def write_csv(self, fh) -> None:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["k", "objective_ohm", "objective_db", "delta", "delta_times_ginvnorm", "violation_flag"])
        for k, (obj, dlt, nb, bad) in enumerate(
            zip(self.objective, self.delta_used, self.norm_bound, self.violation), 1
        ):
            w.writerow([k, f"{obj:.12g}", f"{20 * math.log10(obj):.12g}", f"{dlt:.12g}", f"{nb:.12g}", int(bad)])

    def to_csv(self) -> str:
        buf = io.StringIO()
        self.write_csv(buf)
        return buf.getvalue()


def compute_bpq(net: ImpedanceNetwork, load: RisLoad):
    """``b = Z_RT - z_RS G^-1 z_ST``, ``p = z_RS G^-1``, ``q = G^-1 z_ST`` and ``||G^-1||``."""
    G = net.Z_SS + load.matrix()
    q = lu_solve(G, net.z_ST)
    p = lu_solve(G, net.z_RS, trans=True)
    b = complex(net.Z_RT - net.z_RS @ q)
    return b, p, q, spectral_norm(invert(G))


def init_state(net: ImpedanceNetwork, R0: float) -> McState:
    load = solve_no_coupling(net, R0).loads
    b, p, q, g = compute_bpq(net, load)
    return McState(1, load, b, p, q, g)


def optimal_perturbation(b: complex, p, q, delta: float) -> np.ndarray:
    """Diagonal of the perturbation maximizing ``|b + sum p_i z_i q_i|`` with ``|z_i| = delta``."""
    pq = np.asarray(p) * np.asarray(q)
    phase = np.where(pq == 0, 0.0, wrap_to_pi(np.angle(b) - np.angle(p) - np.angle(q)))
    return delta * np.exp(1j * phase)


def neumann_apply(g_inv_times_zst, p, zd_diag, b: complex) -> complex:
    """First-order (two-term Neumann) value of ``Z_RT - z_RS (G + Z_D)^-1 z_ST``."""
    return complex(b + np.sum(np.asarray(p) * np.asarray(zd_diag) * np.asarray(g_inv_times_zst)))


def select_delta(g_inv_norm: float, policy) -> float:
    if not g_inv_norm > 0:
        raise ValueError("g_inv_norm must be positive")
    if isinstance(policy, AdaptiveDelta):
        return policy.eps / g_inv_norm
    cap = MAX_DELTA_RATIO / g_inv_norm
    if policy.delta > cap:
        warnings.warn(
            f"delta {policy.delta:g} exceeds {MAX_DELTA_RATIO}/||G^-1||; clamped to {cap:g}",
            LoadClampWarning,
            stacklevel=2,
        )
        return cap
    return policy.delta


def step(state: McState, net: ImpedanceNetwork, cfg: McConfig) -> McState:
    delta = select_delta(state.g_inv_norm, cfg.delta_policy)
    zd = optimal_perturbation(state.b, state.p, state.q, delta)
    applied = 1j * zd.imag
    predicted = abs(neumann_apply(state.q, state.p, applied, state.b))
    load = RisLoad(state.load.reactances + zd.imag, state.load.R0)
    b, p, q, g = compute_bpq(net, load)
    return McState(state.k + 1, load, b, p, q, g, delta=delta, linearized=predicted)


def run(net: ImpedanceNetwork, R0: float, cfg: McConfig | None = None):
    """Iterate from the no-coupling design; returns ``(RisLoad, McTrace)``.

    If a step hits a singular matrix the exception is re-raised with the
    trace so far attached as ``exc.trace``.
    """
    cfg = cfg or McConfig()
    state = init_state(net, R0)
    trace = McTrace(initial_objective=abs(state.b))
    zr = np.linalg.norm(net.z_RS) * np.linalg.norm(net.z_ST)
    prev = trace.initial_objective
    quiet = 0
    for _ in range(cfg.max_iters):
        g_before = state.g_inv_norm
        try:
            state = step(state, net, cfg)
        except SingularMatrix as exc:
            exc.trace = trace
            raise
        obj = abs(state.b)
        trace.objective.append(obj)
        trace.delta_used.append(state.delta)
        trace.norm_bound.append(state.delta * g_before)
        trace.linearized.append(state.linearized)
        trace.upper_bound.append(abs(net.Z_RT) + zr * state.g_inv_norm)
        trace.violation.append(obj < prev * (1.0 - cfg.monotonicity_tol))

        gain = (obj - prev) / prev if prev > 0 else math.inf
        prev = obj
        quiet = quiet + 1 if (cfg.conv_tol > 0 and gain < cfg.conv_tol) else 0
        if quiet >= cfg.conv_window:
            break
    return state.load, trace
