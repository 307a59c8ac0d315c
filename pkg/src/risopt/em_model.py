"""Thin-wire impedance model of a RIS-assisted link.

All wires are z-directed perfectly conducting dipoles carrying the usual
sinusoidal current profile. Self and mutual impedances come from the
induced-EMF reaction integral of the infinitesimal-dipole field, evaluated
with nested Gauss-Legendre quadrature.
"""
from __future__ import annotations

import dataclasses
import math
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DegenerateGeometry, FarFieldWarning
from .numerics import composite_gauss_legendre

ETA0 = 376.730313668  # Ohm
C0 = 299792458.0  # m/s

DEFAULT_ORDER = 24
THIN_WIRE_RATIO = 10.0


@dataclass(frozen=True)
class WireElement:
    """A z-oriented thin wire: center position (m), length (m), radius (m)."""

    position: tuple[float, float, float]
    length: float
    radius: float

    def __post_init__(self):
        pos = tuple(float(c) for c in self.position)
        if len(pos) != 3 or not all(math.isfinite(c) for c in pos):
            raise DegenerateGeometry(f"bad position {self.position!r}")
        object.__setattr__(self, "position", pos)
        if not self.length > 0:
            raise DegenerateGeometry("wire length must be positive")
        if not self.radius > 0:
            raise DegenerateGeometry("wire radius must be positive")
        if not self.radius < self.length / THIN_WIRE_RATIO:
            raise DegenerateGeometry(
                f"radius {self.radius:g} not below length/{THIN_WIRE_RATIO:g} (thin-wire regime)"
            )

    @property
    def r(self) -> np.ndarray:
        return np.array(self.position)

    def moved(self, position) -> "WireElement":
        return dataclasses.replace(self, position=tuple(position))


@dataclass(frozen=True)
class Scenario:
    """Geometry and circuit constants of one RIS-assisted link.

    ``ris_length``/``ris_radius`` size every RIS element; ``tx`` and ``rx``
    carry their own dimensions. ``ris_plane`` is ``"xz"`` (default) or ``"yz"``.
    """

    frequency: float
    tx: WireElement
    rx: WireElement
    M: int
    d: float
    ris_center: tuple[float, float, float] = (0.0, 0.0, 0.0)
    ris_length: float | None = None
    ris_radius: float | None = None
    R0: float = 0.2
    Y0: complex = 1.0 + 0.0j
    direct_link: bool = False
    ris_plane: str = "xz"

    def __post_init__(self):
        if not self.frequency > 0:
            raise ValueError("frequency must be positive")
        if int(self.M) != self.M or self.M < 1:
            raise ValueError("M must be a positive integer")
        object.__setattr__(self, "M", int(self.M))
        if not self.d > 0:
            raise ValueError("element spacing d must be positive")
        if not self.R0 >= 0:
            raise ValueError("R0 must be non-negative")
        if self.ris_plane not in ("xz", "yz"):
            raise ValueError("ris_plane must be 'xz' or 'yz'")
        object.__setattr__(self, "ris_center", tuple(float(c) for c in self.ris_center))
        object.__setattr__(self, "Y0", complex(self.Y0))
        if self.ris_length is None:
            object.__setattr__(self, "ris_length", self.tx.length)
        if self.ris_radius is None:
            object.__setattr__(self, "ris_radius", self.tx.radius)

    @property
    def wavelength(self) -> float:
        return C0 / self.frequency

    @property
    def k0(self) -> float:
        return 2.0 * np.pi / self.wavelength

    @property
    def n_ris(self) -> int:
        return self.M * self.M

    def replace(self, **changes) -> "Scenario":
        return dataclasses.replace(self, **changes)


@dataclass
class ImpedanceNetwork:
    """Impedances seen by the link: Z_RT, z_ST, z_RS (length N) and Z_SS (N x N)."""

    Z_RT: complex
    z_ST: np.ndarray
    z_RS: np.ndarray
    Z_SS: np.ndarray

    def __post_init__(self):
        self.Z_RT = complex(self.Z_RT)
        self.z_ST = np.asarray(self.z_ST, dtype=complex).ravel()
        self.z_RS = np.asarray(self.z_RS, dtype=complex).ravel()
        self.Z_SS = np.atleast_2d(np.asarray(self.Z_SS, dtype=complex))
        n = self.z_ST.size
        if n < 1 or self.z_RS.size != n or self.Z_SS.shape != (n, n):
            raise ValueError(
                f"inconsistent sizes: z_ST {self.z_ST.shape}, z_RS {self.z_RS.shape}, Z_SS {self.Z_SS.shape}"
            )

    @property
    def n(self) -> int:
        return self.z_ST.size

    def diagonal_only(self) -> "ImpedanceNetwork":
        """Copy with every off-diagonal (mutual-coupling) entry of Z_SS zeroed."""
        return ImpedanceNetwork(self.Z_RT, self.z_ST.copy(), self.z_RS.copy(), np.diag(np.diag(self.Z_SS)))

    def invariant_violations(self, rtol: float = 1e-9) -> list[str]:
        """Reciprocity, passivity and identical-element checks; empty if all hold."""
        problems = []
        Z = self.Z_SS
        scale = np.abs(Z).max()
        if np.abs(Z - Z.T).max() > rtol * scale:
            problems.append("Z_SS is not symmetric")
        diag = np.diag(Z)
        if np.any(diag.real <= 0):
            problems.append("Z_SS has a non-positive self resistance")
        if np.abs(diag - diag[0]).max() > rtol * abs(diag[0]):
            problems.append("Z_SS diagonal entries differ")
        return problems


def build_ris_grid(M: int, d: float, center, *, length: float, radius: float, plane: str = "xz") -> list[WireElement]:
    """M x M grid of z-directed wires centered at ``center``.

    Element ``r * M + c`` sits at row offset ``(r - (M-1)/2) d`` along z and
    column offset ``(c - (M-1)/2) d`` along x (or y for ``plane="yz"``).
    """
    if M < 1:
        raise ValueError("M must be >= 1")
    if not d > 0:
        raise ValueError("d must be positive")
    cx, cy, cz = (float(v) for v in center)
    offsets = (np.arange(M) - (M - 1) / 2.0) * d
    elements = []
    for r in range(M):
        for c in range(M):
            if plane == "xz":
                pos = (cx + offsets[c], cy, cz + offsets[r])
            elif plane == "yz":
                pos = (cx, cy + offsets[c], cz + offsets[r])
            else:
                raise ValueError(f"unknown plane {plane!r}")
            elements.append(WireElement(pos, length, radius))
    return elements


def dipole_ez_kernel(delta_rho, delta_z, k0: float):
    """z-component of the field of a unit z-directed current element.

    The element sits at the origin; the observation point is at cylindrical
    offset (``delta_rho``, ``delta_z``). Broadcasts over array inputs.
    """
    rho = np.asarray(delta_rho, dtype=float)
    dz = np.asarray(delta_z, dtype=float)
    r = np.hypot(rho, dz)
    if np.any(r == 0):
        raise DegenerateGeometry("observation point coincides with the source")
    cos2 = (dz / r) ** 2
    sin2 = (rho / r) ** 2
    kr = k0 * r
    inv_jkr = 1.0 / (1j * kr)
    radial = 2.0 * cos2 / r**2 * (1.0 + inv_jkr)
    transverse = 1j * k0 * sin2 / r * (1.0 + inv_jkr - 1.0 / kr**2)
    return ETA0 * np.exp(-1j * kr) / (4.0 * np.pi) * (radial - transverse)


def current_profile(z, length: float, k0: float):
    """Sinusoidal standing-wave current normalized to 1 at the feed."""
    h = 0.5 * length
    return np.sin(k0 * (h - np.abs(z))) / np.sin(k0 * h)


def _graded_breaks(lo, hi, centers, width):
    """Panel breakpoints on [lo, hi], refined geometrically toward each center."""
    pts = {lo, hi}
    span = hi - lo
    for c in centers:
        if lo < c < hi:
            pts.add(c)
        w = width
        while w < span:
            for s in (c - w, c + w):
                if lo < s < hi:
                    pts.add(s)
            w *= 2.0
    return np.array(sorted(pts))


def _closest_approach(rho, dz, lp, lq):
    gap = max(0.0, abs(dz) - 0.5 * (lp + lq))
    return math.hypot(rho, gap)


def _reaction_far(rho, dz, lp, lq, k0, order):
    """Tensor rule over both wires, split at the feeds; vectorized over pairs."""
    rho = np.atleast_1d(np.asarray(rho, dtype=float))
    dz = np.atleast_1d(np.asarray(dz, dtype=float))
    zp, wp = composite_gauss_legendre([-0.5 * lp, 0.0, 0.5 * lp], order)
    zq, wq = composite_gauss_legendre([-0.5 * lq, 0.0, 0.5 * lq], order)
    Ip = wp * current_profile(zp, lp, k0)
    Iq = wq * current_profile(zq, lq, k0)
    # rows: receiving wire q, columns: source wire p
    sep = dz[:, None, None] + zq[None, :, None] - zp[None, None, :]
    K = dipole_ez_kernel(rho[:, None, None], sep, k0)
    return -np.einsum("i,nij,j->n", Iq, K, Ip)


def _reaction_near(rho, dz, lp, lq, k0, order):
    """Nested rule with panels graded toward the near-singular points."""
    hp, hq = 0.5 * lp, 0.5 * lq
    width = max(rho, 1e-6 * max(lp, lq))
    # outer singularities: receiver feed, and source feed/ends seen from q
    outer = _graded_breaks(-hq, hq, [0.0, -dz, -hp - dz, hp - dz], width)
    zq, wq = composite_gauss_legendre(outer, order)
    total = 0.0 + 0.0j
    for z, w in zip(zq, wq):
        inner = _graded_breaks(-hp, hp, [0.0, z + dz], width)
        zp, wp = composite_gauss_legendre(inner, order)
        field_ = np.dot(wp * current_profile(zp, lp, k0), dipole_ez_kernel(rho, dz + z - zp, k0))
        total += w * current_profile(z, lq, k0) * field_
    return -total


def _reaction(rho, dz, lp, lq, k0, order):
    if _closest_approach(rho, dz, lp, lq) >= max(lp, lq):
        return complex(_reaction_far(rho, dz, lp, lq, k0, order)[0])
    return complex(_reaction_near(rho, dz, lp, lq, k0, order))


def _relative_geometry(p: WireElement, q: WireElement):
    dx, dy, dz = (qc - pc for pc, qc in zip(p.position, q.position))
    return math.hypot(dx, dy), dz


def mutual_impedance(p: WireElement, q: WireElement, k0: float, order: int = DEFAULT_ORDER) -> complex:
    """Induced-EMF mutual impedance between two parallel z-directed wires (Ohm).

    Symmetric in its arguments. Raises DegenerateGeometry for collinear
    wires whose segments overlap.
    """
    rho, dz = _relative_geometry(p, q)
    if rho == 0.0 and abs(dz) < 0.5 * (p.length + q.length):
        raise DegenerateGeometry("collinear wires overlap; use self_impedance for a wire with itself")
    return _reaction(rho, dz, p.length, q.length, k0, order)


def self_impedance(p: WireElement, k0: float, order: int = DEFAULT_ORDER) -> complex:
    """Self impedance, with the field sampled on the wire surface (offset = radius)."""
    if not p.radius > 0:
        raise DegenerateGeometry("self impedance needs a positive radius")
    return _reaction(p.radius, 0.0, p.length, p.length, k0, order)


def fraunhofer_distance(s: Scenario) -> float:
    aperture = s.M * s.d
    return 2.0 * aperture**2 / s.wavelength


def _ris_coupling_matrix(elements, k0, order):
    """Z_SS off-diagonals, computing each displacement class once.

    Assumes identical RIS elements, so Z depends only on (rho, |dz|).
    """
    n = len(elements)
    length = elements[0].length
    pos = np.array([e.position for e in elements])
    iu, ju = np.triu_indices(n, k=1)
    diff = pos[ju] - pos[iu]
    rho = np.hypot(diff[:, 0], diff[:, 1])
    adz = np.abs(diff[:, 2])
    quantum = 1e-9 * length
    keys = np.stack([np.round(rho / quantum), np.round(adz / quantum)], axis=1)
    uniq, first, inverse = np.unique(keys, axis=0, return_index=True, return_inverse=True)
    inverse = np.asarray(inverse).ravel()
    u_rho, u_dz = rho[first], adz[first]
    values = np.empty(len(uniq), dtype=complex)
    far = np.array([_closest_approach(r, z, length, length) >= length for r, z in zip(u_rho, u_dz)], dtype=bool)
    for idx in np.flatnonzero(~far):
        if u_rho[idx] == 0.0 and u_dz[idx] < length:
            raise DegenerateGeometry("RIS elements overlap (spacing below wire length)")
        values[idx] = _reaction_near(u_rho[idx], u_dz[idx], length, length, k0, order)
    if far.any():
        values[far] = _reaction_far(u_rho[far], u_dz[far], length, length, k0, order)
    Z = np.zeros((n, n), dtype=complex)
    Z[iu, ju] = values[inverse]
    Z[ju, iu] = values[inverse]
    return Z


def _couplings_to(elements, wire: WireElement, k0, order):
    """mutual_impedance(element_i, wire) for every element, batching far pairs."""
    out = np.empty(len(elements), dtype=complex)
    far_idx, rhos, dzs = [], [], []
    for i, e in enumerate(elements):
        rho, dz = _relative_geometry(e, wire)
        if _closest_approach(rho, dz, e.length, wire.length) >= max(e.length, wire.length):
            far_idx.append(i)
            rhos.append(rho)
            dzs.append(dz)
        else:
            out[i] = mutual_impedance(e, wire, k0, order)
    if far_idx:
        lengths = {elements[i].length for i in far_idx}
        if len(lengths) == 1:
            out[far_idx] = _reaction_far(rhos, dzs, lengths.pop(), wire.length, k0, order)
        else:
            for i in far_idx:
                out[i] = mutual_impedance(elements[i], wire, k0, order)
    return out


def assemble_network(s: Scenario, order: int = DEFAULT_ORDER) -> ImpedanceNetwork:
    """Full impedance description of a scenario from its geometry alone."""
    k0 = s.k0
    elements = build_ris_grid(s.M, s.d, s.ris_center, length=s.ris_length, radius=s.ris_radius, plane=s.ris_plane)
    limit = fraunhofer_distance(s)
    center = np.array(s.ris_center)
    for name, wire in (("transmitter", s.tx), ("receiver", s.rx)):
        dist = np.linalg.norm(wire.r - center)
        if dist <= limit:
            warnings.warn(
                f"{name} at {dist:.3g} m is inside the far-field distance {limit:.3g} m of the RIS",
                FarFieldWarning,
                stacklevel=2,
            )

    Z_SS = _ris_coupling_matrix(elements, k0, order) if len(elements) > 1 else np.zeros((1, 1), dtype=complex)
    np.fill_diagonal(Z_SS, self_impedance(elements[0], k0, order))
    z_ST = _couplings_to(elements, s.tx, k0, order)
    z_RS = _couplings_to(elements, s.rx, k0, order)
    Z_RT = mutual_impedance(s.rx, s.tx, k0, order) if s.direct_link else 0.0
    return ImpedanceNetwork(Z_RT, z_ST, z_RS, Z_SS)


# -- presets and configuration files -------------------------------------

PAPER_FREQUENCY = 28e9


def paper_scenario(M: int = 8, d_over_lambda: float = 0.25) -> Scenario:
    """The 28 GHz setup: Tx (5,-5,3), Rx (5,5,1), RIS at the origin, l = lambda/32, a = lambda/500, R0 = 0.2."""
    lam = C0 / PAPER_FREQUENCY
    length, radius = lam / 32.0, lam / 500.0
    return Scenario(
        frequency=PAPER_FREQUENCY,
        tx=WireElement((5.0, -5.0, 3.0), length, radius),
        rx=WireElement((5.0, 5.0, 1.0), length, radius),
        M=M,
        d=d_over_lambda * lam,
        ris_center=(0.0, 0.0, 0.0),
        ris_length=length,
        ris_radius=radius,
        R0=0.2,
        Y0=1.0,
        direct_link=False,
    )


PRESETS = {"paper-28ghz": paper_scenario}


def _vector(text: str):
    parts = [p for p in text.replace("(", " ").replace(")", " ").replace(",", " ").split()]
    if len(parts) != 3:
        raise ValueError(f"expected three components, got {text!r}")
    return tuple(float(p) for p in parts)


def _flag(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def parse_config(text: str) -> dict[str, str]:
    """``key = value`` lines; blank lines and ``#`` comments are ignored."""
    entries = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        entries[key] = value
    return entries


SCENARIO_KEYS = {
    "frequency_hz", "tx_pos", "rx_pos", "ris_center", "M", "d_over_lambda", "d_m",
    "wire_length_over_lambda", "wire_radius_over_lambda", "R0_ohm", "Y0_re", "Y0_im",
    "direct_link", "ris_plane",
    "tx_length_over_lambda", "tx_radius_over_lambda", "rx_length_over_lambda",
    "rx_radius_over_lambda", "ris_length_over_lambda", "ris_radius_over_lambda",
}


def scenario_from_config(entries: dict[str, str], base: Scenario | None = None) -> Scenario:
    """Build a Scenario from parsed config entries, overriding ``base``.

    Unknown keys are ignored here so experiment-level keys can share the file.
    Wire dimensions are given relative to the wavelength; the per-device keys
    (``tx_*``, ``rx_*``, ``ris_*``) override the shared ``wire_*`` values.
    """
    base = base if base is not None else paper_scenario()
    freq = float(entries.get("frequency_hz", base.frequency))
    lam = C0 / freq
    old_lam = base.wavelength

    def dims(prefix, wire_len, wire_rad):
        shared_l = entries.get("wire_length_over_lambda")
        shared_a = entries.get("wire_radius_over_lambda")
        l_rel = entries.get(f"{prefix}_length_over_lambda", shared_l)
        a_rel = entries.get(f"{prefix}_radius_over_lambda", shared_a)
        length = float(l_rel) * lam if l_rel is not None else wire_len / old_lam * lam
        radius = float(a_rel) * lam if a_rel is not None else wire_rad / old_lam * lam
        return length, radius

    tx_l, tx_a = dims("tx", base.tx.length, base.tx.radius)
    rx_l, rx_a = dims("rx", base.rx.length, base.rx.radius)
    ris_l, ris_a = dims("ris", base.ris_length, base.ris_radius)
    tx_pos = _vector(entries["tx_pos"]) if "tx_pos" in entries else base.tx.position
    rx_pos = _vector(entries["rx_pos"]) if "rx_pos" in entries else base.rx.position

    if "d_m" in entries and "d_over_lambda" in entries:
        raise ValueError("give either d_m or d_over_lambda, not both")
    if "d_m" in entries:
        d = float(entries["d_m"])
    elif "d_over_lambda" in entries:
        d = float(entries["d_over_lambda"]) * lam
    else:
        d = base.d / old_lam * lam

    Y0 = complex(float(entries.get("Y0_re", base.Y0.real)), float(entries.get("Y0_im", base.Y0.imag)))
    return Scenario(
        frequency=freq,
        tx=WireElement(tx_pos, tx_l, tx_a),
        rx=WireElement(rx_pos, rx_l, rx_a),
        M=int(entries.get("M", base.M)),
        d=d,
        ris_center=_vector(entries["ris_center"]) if "ris_center" in entries else base.ris_center,
        ris_length=ris_l,
        ris_radius=ris_a,
        R0=float(entries.get("R0_ohm", base.R0)),
        Y0=Y0,
        direct_link=_flag(entries["direct_link"]) if "direct_link" in entries else base.direct_link,
        ris_plane=entries.get("ris_plane", base.ris_plane),
    )


def load_scenario(path: str | Path, base: Scenario | None = None) -> Scenario:
    return scenario_from_config(parse_config(Path(path).read_text(encoding="utf-8")), base)
