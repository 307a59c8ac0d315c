"""Closed-form dipole impedances used as independent references.

None of these share code with the quadrature in ``em_model``: the classical
sine/cosine-integral results come straight from ``scipy.special.sici`` and
the general reference integrates the exact field of a sinusoidal current
filament with adaptive QUADPACK.
"""
from __future__ import annotations

import numpy as np
from scipy import integrate
from scipy.special import sici

from .em_model import ETA0

EULER_GAMMA = 0.5772156649015329


def _si(x):
    return sici(x)[0]


def _ci(x):
    return sici(x)[1]


def dipole_self_impedance(length: float, radius: float, k0: float) -> complex:
    """Induced-EMF input impedance of a center-fed dipole (classical Si/Ci form).

    The textbook expressions are referenced to the current maximum; the
    result is transferred to the feed by dividing by sin^2(k0 l / 2).
    """
    kl = k0 * length
    s, c = np.sin(kl), np.cos(kl)
    R = ETA0 / (2 * np.pi) * (
        EULER_GAMMA + np.log(kl) - _ci(kl)
        + 0.5 * s * (_si(2 * kl) - 2 * _si(kl))
        + 0.5 * c * (EULER_GAMMA + np.log(kl / 2) + _ci(2 * kl) - 2 * _ci(kl))
    )
    X = ETA0 / (4 * np.pi) * (
        2 * _si(kl)
        + c * (2 * _si(kl) - _si(2 * kl))
        - s * (2 * _ci(kl) - _ci(2 * kl) - _ci(2 * k0 * radius**2 / length))
    )
    return complex(R, X) / np.sin(kl / 2) ** 2


def halfwave_mutual_impedance(spacing: float, k0: float) -> complex:
    """Mutual impedance of two side-by-side half-wave dipoles."""
    lam = 2 * np.pi / k0
    length = lam / 2
    root = np.hypot(spacing, length)
    u0 = k0 * spacing
    u1 = k0 * (root + length)
    u2 = k0 * (root - length)
    R = ETA0 / (4 * np.pi) * (2 * _ci(u0) - _ci(u1) - _ci(u2))
    X = -ETA0 / (4 * np.pi) * (2 * _si(u0) - _si(u1) - _si(u2))
    return complex(R, X)


def filament_field(rho, z, length: float, k0: float):
    """E_z of a center-fed sinusoidal filament on the z axis, unit feed current."""
    h = length / 2
    r0 = np.hypot(rho, z)
    r1 = np.hypot(rho, z - h)
    r2 = np.hypot(rho, z + h)
    amp = -1j * ETA0 / (4 * np.pi * np.sin(k0 * h))
    return amp * (
        np.exp(-1j * k0 * r1) / r1 + np.exp(-1j * k0 * r2) / r2
        - 2 * np.cos(k0 * h) * np.exp(-1j * k0 * r0) / r0
    )


def reaction_impedance(rho: float, dz: float, lp: float, lq: float, k0: float) -> complex:
    """Mutual impedance from the exact filament field, integrated adaptively.

    ``rho`` is the transverse offset and ``dz`` the axial offset of wire q's
    center relative to wire p's. Passing ``rho = radius, dz = 0`` gives the
    self impedance.
    """
    hp, hq = lp / 2, lq / 2

    def integrand(z):
        current = np.sin(k0 * (hq - abs(z))) / np.sin(k0 * hq)
        return filament_field(rho, dz + z, lp, k0) * current

    points = sorted({p for p in (0.0, -dz, -hp - dz, hp - dz) if -hq < p < hq})
    opts = dict(points=points or None, limit=400, epsabs=0.0, epsrel=1e-11)
    re = integrate.quad(lambda z: integrand(z).real, -hq, hq, **opts)[0]
    im = integrate.quad(lambda z: integrand(z).imag, -hq, hq, **opts)[0]
    return -complex(re, im)
