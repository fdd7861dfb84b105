"""Asymptotic coefficients for large coupling and the predicted growth laws."""

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, special

from .bandstructure import _omega_k, rho, rho_edge_constant
from .model import (DomainError, NonAdmissibleError, Potential, as_interval,
                    window_of)

_GL_N = 40
_GL_X, _GL_W = np.polynomial.legendre.leggauss(_GL_N)
# tau in [0, pi] mapped through k = ks + (ke - ks) * (1 - cos tau) / 2
_TAU = 0.5 * math.pi * (_GL_X + 1.0)
_TAU_W = 0.5 * math.pi * _GL_W
_BAND_CAP = 4000
_X_CAP = 1e3


# Weyl coefficients

def _power_tail_integral(gamma, start):
    """``int_start^inf (1+t)^(-gamma) dt``."""
    return (1.0 + start) ** (1.0 - gamma) / (gamma - 1.0)


def weyl_coefficient(q, delta=(0.0, math.inf), tree=None, variant="individual"):
    """Leading Weyl coefficient ``(1/pi) int sqrt(q)`` and its tree analogues.

    ``variant`` is ``"individual"`` (a single half-line or interval),
    ``"tilde"`` (unweighted sum over generations) or ``"tree"`` (sum weighted
    by the generation multiplicities).
    """
    delta = as_interval(delta)
    if variant == "individual":
        if not delta.bounded and q.kind == "power" and q.gamma <= 1:
            raise DomainError("Weyl integral diverges for gamma <= 1 on a half-line")
        if q.kind == "power" and not delta.bounded:
            s = q.offset + delta.r1
            return math.sqrt(q.scale) * _power_tail_integral(q.gamma, s) / math.pi
        if q.kind == "exp" and not delta.bounded:
            s = q.offset + delta.r1
            return math.sqrt(q.scale) * math.exp(-q.kappa * s) / q.kappa / math.pi
        val, _ = integrate.quad(lambda t: math.sqrt(q(t)), delta.r1, delta.r2, limit=200)
        return val / math.pi
    if tree is None:
        raise DomainError("tree variants need the tree parameters")
    if q.kind == "power":
        if variant == "tree":
            raise DomainError("tree-weighted Weyl sum diverges for power profiles")
        if q.gamma <= 2:
            raise DomainError("unweighted Weyl sum needs gamma > 2")
        c = math.sqrt(q.scale) / math.pi
        # sum_k (1+k+offset)^(1-gamma) / (gamma-1) is a Hurwitz zeta value
        total = special.zeta(q.gamma - 1.0, 1.0 + q.offset) / (q.gamma - 1.0)
        return c * total
    if q.kind == "exp":
        a = math.sqrt(q.scale) * math.exp(-q.kappa * q.offset) / q.kappa / math.pi
        r = math.exp(-q.kappa)
        if variant == "tilde":
            return a / (1.0 - r)
        if q.kappa <= tree.beta:
            raise DomainError("tree-weighted Weyl sum needs kappa > ln b")
        rb = tree.b * r
        return a * (1.0 + (1.0 - 1.0 / tree.b) * rb / (1.0 - rb))
    raise DomainError("tree Weyl sums are available for power and exponential profiles")


# k-space integration of functions of rho

def _band_pieces(tree, lam, mu_lo, mu_hi, split_ratio=2.0):
    """Split ``[mu_lo, mu_hi]`` into constant-rho pieces and band pieces.

    Returns (const_pieces, band_pieces); constant pieces are ``(mu_a, mu_b, rho)``
    and band pieces ``(mu_a, mu_b)`` further divided so that the distance to
    ``lam`` changes by at most ``split_ratio`` across each piece.
    """
    th = tree.theta
    const, band = [], []
    if mu_lo < th * th:
        const.append((mu_lo, min(mu_hi, th * th), 0.0))
    lo = max(mu_lo, th * th)
    if lo >= mu_hi:
        return const, band
    k_lo, k_hi = math.sqrt(lo), math.sqrt(mu_hi)
    l_first = int(math.floor((k_lo + th) / math.pi))
    l_last = int(math.floor((k_hi + th) / math.pi))
    # edges: band l = [pi(l-1)+th, pi*l-th]
    edges = []
    for m in range(max(l_first, 0), l_last + 2):
        for e in (math.pi * m - th, math.pi * m + th):
            if k_lo < e < k_hi:
                edges.append(e)
    ks = [k_lo] + sorted(edges) + [k_hi]
    for a, c in zip(ks[:-1], ks[1:]):
        if c <= a:
            continue
        mid = 0.5 * (a + c)
        m = round(mid / math.pi)
        if abs(mid - m * math.pi) < th:
            const.append((a * a, c * c, float(m)))
            continue
        mua, muc = a * a, c * c
        da, dc = abs(mua - lam), abs(muc - lam)
        r = max(da, dc) / max(min(da, dc), 1e-300)
        if r > split_ratio:
            n = int(math.ceil(math.log(r) / math.log(split_ratio)))
            ds = np.geomspace(da, dc, n + 1)
            mus = lam + np.sign(mua - lam) * ds
            mus[0], mus[-1] = mua, muc
            band.extend(zip(mus[:-1], mus[1:]))
        else:
            band.append((mua, muc))
    return const, band


def _edge_cutoff(lam, gamma):
    """Cut-off for edge points: ``lam -+ X**(-2 gamma)`` must stay resolvable in floats."""
    return min(_X_CAP, (1e-8 * (1.0 + abs(lam))) ** (-1.0 / (2.0 * gamma)))


def _x_of_mu(lam, gamma, mu):
    return np.abs(lam - mu) ** (-1.0 / (2.0 * gamma))


def _x_or_zero(lam, gamma, mu):
    return float(_x_of_mu(lam, gamma, mu)) if math.isfinite(mu) else 0.0


def _moment(tree, lam, sign, gamma, a, c, power, ref):
    """``int_a^c x**power * (rho(lam - sign*x**(-2 gamma)) - ref) dx`` for ``0 <= a < c < inf``."""
    def mu_of(x):
        return lam - sign * x ** (-2.0 * gamma) if x > 0 else -sign * math.inf

    mu_a, mu_c = mu_of(a), mu_of(c)
    mu_lo, mu_hi = min(mu_a, mu_c), max(mu_a, mu_c)
    total = 0.0
    p1 = power + 1.0
    # beyond the band cap rho is replaced by its mean sqrt(mu)/pi (sign -1 only)
    k_cap = 2.0 * math.pi * _BAND_CAP
    if mu_hi > k_cap ** 2:
        x_cap = _x_of_mu(lam, gamma, k_cap ** 2)

        def smooth(x):
            return x ** power * (math.sqrt(lam + x ** (-2.0 * gamma)) / math.pi - ref)

        val, _ = integrate.quad(smooth, a, x_cap, limit=400, epsabs=1e-13, epsrel=1e-12)
        total += val
        mu_hi = k_cap ** 2
    const, band = _band_pieces(tree, lam, mu_lo, mu_hi)
    for mua, mub, r in const:
        x1, x2 = _x_or_zero(lam, gamma, mua), _x_or_zero(lam, gamma, mub)
        total += (r - ref) * abs(x2 ** p1 - x1 ** p1) / p1
    if band:
        arr = np.asarray(band)
        ks, ke = np.sqrt(arr[:, 0])[:, None], np.sqrt(arr[:, 1])[:, None]
        k = ks + (ke - ks) * (1.0 - np.cos(_TAU))[None, :] / 2.0
        dk = (ke - ks) * np.sin(_TAU)[None, :] / 2.0
        d = np.abs(lam - k * k)
        x = d ** (-1.0 / (2.0 * gamma))
        dxdk = (k / gamma) * d ** (-1.0 / (2.0 * gamma) - 1.0)
        f = x ** power * (_omega_k(tree, k) / math.pi - ref) * dxdk * dk
        total += float((f * _TAU_W[None, :]).sum())
    return total


def _setup(tree, sign, gamma, lam, gamma0):
    w = window_of(tree, lam)
    d = w.distance(sign, lam)
    if d == 0 and gamma <= gamma0:
        raise NonAdmissibleError(f"lambda at the gap edge needs gamma > {gamma0}")
    return w, d


def support_end(tree, sign, gamma, lam):
    """``sigma_pm``: the coefficient vanishes for ``sigma`` beyond it (``inf`` at the edge)."""
    w = window_of(tree, lam)
    d = w.distance(sign, lam)
    if d == 0:
        return math.inf
    return d ** (-1.0 / (2.0 * gamma))


def F(tree, sign, gamma, sigma, lam):
    """Non-Weyl density ``sign * int_0^inf [rho(lam) - rho(lam - sign*(s+sigma)**(-2 gamma))] ds``."""
    if sigma <= 0:
        raise DomainError("sigma must be positive")
    w, d = _setup(tree, sign, gamma, lam, 1.0)
    if math.isinf(d):
        return 0.0
    X = d ** (-1.0 / (2.0 * gamma)) if d > 0 else _edge_cutoff(lam, gamma)
    if sigma >= X:
        return 0.0
    r0 = rho(tree, lam)
    val = -sign * _moment(tree, lam, sign, gamma, sigma, X, 0.0, r0)
    if d == 0:
        c = rho_edge_constant(tree, lam)
        val += c * X ** (1.0 - gamma) / (gamma - 1.0)
    return val


def G(tree, sign, gamma, sigma, lam1, lam2):
    """Window density ``sign * (F(sigma, lam1) - F(sigma, lam2))``."""
    return sign * (F(tree, sign, gamma, sigma, lam1) - F(tree, sign, gamma, sigma, lam2))


def _check_nonweyl(sign, gamma):
    if sign < 0 and gamma >= 2:
        raise DomainError("the non-Weyl regime for negative potentials needs gamma < 2")


def nonweyl_coefficient(tree, sign, gamma, lam, route="moment"):
    """``int_0^inf F(sigma) d sigma``.

    ``route="moment"`` uses ``int_0^inf x * h(x) dx`` with ``h`` the integrand of
    ``F``; ``route="nested"`` integrates :func:`F` over ``sigma`` numerically.
    """
    _check_nonweyl(sign, gamma)
    w, d = _setup(tree, sign, gamma, lam, 2.0)
    if math.isinf(d):
        return 0.0
    X = d ** (-1.0 / (2.0 * gamma)) if d > 0 else _edge_cutoff(lam, gamma)
    if route == "moment":
        r0 = rho(tree, lam)
        val = -sign * _moment(tree, lam, sign, gamma, 0.0, X, 1.0, r0)
        if d == 0:
            c = rho_edge_constant(tree, lam)
            val += c * X ** (2.0 - gamma) / (gamma - 2.0)
        return val
    if route == "nested":
        pts = [X * f for f in (1e-3, 1e-2, 0.1, 0.5)] if math.isfinite(X) else None
        val, _ = integrate.quad(lambda s: F(tree, sign, gamma, s, lam), 0.0, X,
                                points=pts, limit=400, epsabs=1e-11, epsrel=1e-10)
        if d == 0:
            c = rho_edge_constant(tree, lam)
            # F(sigma) ~ c*sigma**(1-gamma)/(gamma-1) beyond X
            val += c * X ** (2.0 - gamma) / ((gamma - 1.0) * (gamma - 2.0))
        return val
    raise DomainError(f"unknown route {route!r}")


def riemann_sum(tree, sign, gamma, lam, alpha):
    """``alpha**-1 * sum_k F(beta_k)`` over ``beta_k = (k+1)/alpha``."""
    X = support_end(tree, sign, gamma, lam)
    if math.isinf(X):
        raise DomainError("Riemann sum needs compact support")
    kmax = int(math.ceil(X * alpha))
    return sum(F(tree, sign, gamma, (k + 1) / alpha, lam) for k in range(kmax)) / alpha


# predicted laws

@dataclass(frozen=True)
class AsymptoticLaw:
    kind: str
    quantity: str
    limit: float
    params: dict

    def normalization(self, g):
        p = self.params
        if self.kind == "Weyl":
            return math.sqrt(g)
        if self.kind == "NonWeylPower":
            return g ** (1.0 / p["gamma"])
        if self.kind in ("CriticalGamma2", "ExpCriticalKappa"):
            return math.sqrt(g) * math.log(g)
        if self.kind == "ExpTildeM":
            return math.log(g) ** 2
        if self.kind == "LnMRate":
            return g ** (1.0 / (2.0 * p["gamma"]))
        if self.kind == "RenewalPeriodic":
            return g ** (p["tree"].beta / (2.0 * p["kappa"]))
        raise DomainError(self.kind)

    def normalized(self, g, count):
        if self.kind == "LnMRate":
            return math.log(count) / self.normalization(g) if count > 0 else -math.inf
        return count / self.normalization(g)


LAW_KINDS = ("Weyl", "NonWeylPower", "CriticalGamma2", "ExpTildeM", "ExpCriticalKappa",
             "LnMRate", "RenewalPeriodic")


def predicted_law(kind, params):
    """Normalisation and limiting constant for one of the growth regimes.

    ``params`` holds ``tree`` and, depending on ``kind``, ``q``, ``sign``,
    ``gamma``, ``kappa`` and ``lam``.
    """
    tree = params.get("tree")
    if kind == "Weyl":
        lim = weyl_coefficient(params["q"], params.get("delta", (0.0, math.inf)), tree,
                               params.get("variant", "individual"))
        return AsymptoticLaw(kind, params.get("quantity", "M"), lim, dict(params))
    if kind == "NonWeylPower":
        lim = nonweyl_coefficient(tree, params["sign"], params["gamma"], params["lam"])
        return AsymptoticLaw(kind, "tilde_M", lim, dict(params))
    if kind == "CriticalGamma2":
        if params.get("sign", -1) != -1:
            raise DomainError("the critical power law concerns negative potentials")
        return AsymptoticLaw(kind, "tilde_M", 1.0 / (4.0 * math.pi), dict(params))
    if kind == "ExpTildeM":
        if params.get("sign", 1) != 1:
            raise DomainError("the squared-log law concerns positive potentials")
        lim = rho(tree, params["lam"]) / (8.0 * params["kappa"] ** 2)
        return AsymptoticLaw(kind, "tilde_M", lim, dict(params))
    if kind == "ExpCriticalKappa":
        kappa = params["kappa"]
        if abs(kappa - tree.beta) > 1e-12 * tree.beta:
            raise DomainError("critical exponential law needs kappa = ln b")
        lim = (1.0 - 1.0 / tree.b) / (2.0 * math.pi * kappa ** 2)
        return AsymptoticLaw(kind, "tree_M", lim, dict(params))
    if kind == "LnMRate":
        w = window_of(tree, params["lam"])
        # with crossing=True the free eigenvalue inside the gap is taken into
        # account; the default uses the distance to the gap edge alone
        if params.get("crossing", False):
            d = w.threshold(params["sign"], params["lam"])
        else:
            d = w.distance(params["sign"], params["lam"])
        lim = tree.beta * d ** (-1.0 / (2.0 * params["gamma"]))
        return AsymptoticLaw(kind, "tree_M", lim, dict(params))
    if kind == "RenewalPeriodic":
        return AsymptoticLaw(kind, params.get("quantity", "tree_M"), None, dict(params))
    raise DomainError(f"unknown law {kind!r}")


# renewal profiles

@dataclass
class RenewalProfile:
    period: float
    bin_centers: np.ndarray     # phase in [0, 1)
    profiles: np.ndarray        # (periods, bins), NaN where a bin is empty
    mean_profile: np.ndarray
    residual: float             # max |last - previous| over shared bins
    mean: float
    min_value: float

    @property
    def relative_residual(self):
        return self.residual / self.mean


def renewal_extract(samples, period, bins=64, origin=None):
    """Fold ``(ln g, value)`` samples by the period in ``ln g`` and bin the phase."""
    arr = np.asarray(samples, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise DomainError("samples must be pairs (ln g, value)")
    lg, v = arr[:, 0], arr[:, 1]
    if origin is None:
        origin = lg.min()
    span = lg.max() - origin
    n_per = int(math.floor(span / period + 1e-9))
    if n_per < 3:
        raise DomainError("need at least three full periods of samples")
    u = (lg - origin) / period
    per = np.floor(u + 1e-12).astype(int)
    ph = np.clip(u - per, 0.0, 1.0 - 1e-15)
    b = np.minimum((ph * bins).astype(int), bins - 1)
    prof = np.full((n_per, bins), np.nan)
    for p in range(n_per):
        for j in range(bins):
            sel = (per == p) & (b == j)
            if np.any(sel):
                prof[p, j] = v[sel].mean()
    last, prev = prof[-1], prof[-2]
    ok = ~np.isnan(last) & ~np.isnan(prev)
    if not np.any(ok):
        raise DomainError("the last two periods share no occupied bins")
    residual = float(np.max(np.abs(last[ok] - prev[ok])))
    mean_prof = np.nanmean(prof[-2:], axis=0)
    return RenewalProfile(period=period, bin_centers=(np.arange(bins) + 0.5) / bins,
                          profiles=prof, mean_profile=mean_prof, residual=residual,
                          mean=float(np.nanmean(mean_prof)), min_value=float(np.nanmin(mean_prof)))
