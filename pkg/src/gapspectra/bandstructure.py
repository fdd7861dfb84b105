"""Band-gap structure of the free operator and its integrated density of states."""

import math
from dataclasses import dataclass

import numpy as np

from .model import BandPointError, DomainError, make_window


def phi(tree, xi):
    """Inverse of :func:`psi`: ``arccos(cos(xi)/R)``, mapping [0, pi] onto [theta, pi - theta]."""
    return np.arccos(np.cos(xi) / tree.R)


def psi(tree, mu):
    """Band dispersion ``arccos(R cos mu)`` on ``[theta, pi - theta]``."""
    mu = np.asarray(mu, dtype=float)
    lo, hi = tree.theta, math.pi - tree.theta
    tol = 1e-12
    if np.any(mu < lo - tol) or np.any(mu > hi + tol):
        raise DomainError(f"psi is defined on [{lo}, {hi}]")
    out = _psi(tree, mu)
    return out if out.ndim else float(out)


def _psi(tree, mu):
    low = mu <= 0.5 * math.pi
    out = _psi_lower(tree, np.where(low, mu, math.pi - mu))
    return np.where(low, out, math.pi - out)


def _psi_lower(tree, mu):
    # 1 - R cos(mu) written as a product so that it stays accurate near theta
    th = tree.theta
    u = 2.0 * tree.R * np.sin(0.5 * (mu + th)) * np.sin(0.5 * (mu - th))
    return 2.0 * np.arcsin(np.sqrt(np.clip(0.5 * u, 0.0, 1.0)))


def psi_edge(tree, mu):
    """Leading square-root behaviour of ``psi`` at the lower end ``theta``."""
    return math.sqrt(2.0) * (tree.R ** 2 - 1.0) ** 0.25 * np.sqrt(np.asarray(mu) - tree.theta)


def band_edges(tree, l):
    """Closed band ``l >= 1`` in the spectral variable."""
    if l < 1:
        raise DomainError("bands are numbered from 1")
    th = tree.theta
    return (math.pi * (l - 1) + th) ** 2, (math.pi * l - th) ** 2


def bands_and_gaps(tree, lmax):
    """Lists of bands ``1..lmax`` and gap windows ``0..lmax``."""
    bands = [band_edges(tree, l) for l in range(1, lmax + 1)]
    gaps = [make_window(tree, l) for l in range(lmax + 1)]
    return bands, gaps


def _omega_k(tree, k):
    """Quasi-momentum as a function of ``k = sqrt(lambda) >= 0`` (vectorised)."""
    k = np.asarray(k, dtype=float)
    th = tree.theta
    m = np.rint(k / math.pi)
    in_gap = np.abs(k - m * math.pi) < th
    l = np.floor(k / math.pi) + 1.0
    odd = np.mod(l, 2.0) == 1.0
    # band l: odd l counts up from pi(l-1), even l counts down from pi*l
    chi = np.where(odd, k - math.pi * (l - 1.0), math.pi * l - k)
    ps = _psi(tree, np.clip(chi, th, math.pi - th))
    band_val = np.where(odd, math.pi * (l - 1.0) + ps, math.pi * l - ps)
    return np.where(in_gap, m * math.pi, band_val)


def omega(tree, lam):
    """Global quasi-momentum: ``pi*l`` on gap ``l``, continuous and increasing on bands."""
    lam = np.asarray(lam, dtype=float)
    out = np.where(lam <= tree.theta ** 2, 0.0, _omega_k(tree, np.sqrt(np.maximum(lam, 0.0))))
    return out if out.ndim else float(out)


def rho(tree, lam):
    """Integrated density of states per unit length, ``omega/pi``."""
    out = np.asarray(omega(tree, lam)) / math.pi
    return out if out.ndim else float(out)


def rho_edge_constant(tree, edge):
    """Coefficient ``c`` in ``|rho(edge +- d) - rho(edge)| ~ c * sqrt(d)`` on the band side."""
    return ((tree.R ** 2 - 1.0) / edge) ** 0.25 / math.pi


@dataclass(frozen=True)
class TransferRoots:
    q1: complex
    q2: complex
    sigma: float
    wronskian: complex


def transfer_roots(tree, lam):
    """Roots of ``q**2 - 2 R q cos(sqrt(lam)) + 1 = 0`` for ``lam`` off the bands.

    ``q1`` is the root with ``|q1| < 1``; ``sigma = -ln|q1|`` is the decay rate of
    the subordinate solution per unit length.
    """
    if lam <= 0:
        raise DomainError("transfer roots are implemented for lam > 0")
    k = math.sqrt(lam)
    c = tree.R * math.cos(k)
    if abs(c) <= 1.0 + 1e-14:
        raise BandPointError(f"lambda={lam} is a band point")
    r = math.sqrt(c * c - 1.0)
    a, b_ = c - r, c + r
    q1, q2 = (a, b_) if abs(a) < abs(b_) else (b_, a)
    w = math.sqrt(tree.b) * (q2 - q1) * k * math.sin(k)
    return TransferRoots(q1=q1, q2=q2, sigma=-math.log(abs(q1)), wronskian=w)


def _roots_complex(tree, k):
    c = tree.R * math.cos(k)
    r = np.sqrt(complex(c * c - 1.0))
    return c - r, c + r


def free_solution(tree, lam, t, derivative=False):
    """Solution of the free half-line problem with ``y(0) = 0``, ``y'(0+) = sqrt(lam)``.

    Built from the transfer roots; valid on bands too (complex conjugate
    roots), except at band edges where the roots coincide.
    """
    k = math.sqrt(lam)
    q1, q2 = _roots_complex(tree, k)
    if abs(q2 - q1) < 1e-12:
        raise BandPointError("transfer roots coincide at a band edge")
    t = np.asarray(t, dtype=float)
    n = np.floor(t) + 1.0
    sb = math.sqrt(tree.b)
    u_prev = (q2 ** (n - 1) - q1 ** (n - 1)) / (q2 - q1)
    u_n = (q2 ** n - q1 ** n) / (q2 - q1)
    if derivative:
        val = sb * u_prev * (-k) * np.cos(k * (n - t)) + u_n * k * np.cos(k * (t - n + 1))
    else:
        val = sb * u_prev * np.sin(k * (n - t)) + u_n * np.sin(k * (t - n + 1))
    out = np.real(val)
    return out if out.ndim else float(out)


def gap_eigenfunction_constant(b):
    """Normalisation constant of the mid-gap eigenfunction, ``sqrt(2(b-1))``."""
    return math.sqrt(2.0 * (b - 1))


def free_gap_eigenfunction(tree, l, t):
    """Normalised eigenfunction for the free eigenvalue ``(pi*l)**2``.

    On ``(n-1, n)`` it equals ``c * b**(-n/2) * sin(pi*l*t)``.
    """
    if l < 1:
        raise DomainError("gap index must be >= 1")
    t = np.asarray(t, dtype=float)
    n = np.floor(t) + 1.0
    out = gap_eigenfunction_constant(tree.b) * tree.b ** (-n / 2.0) * np.sin(math.pi * l * t)
    return out if out.ndim else float(out)
