"""Eigenvalue counting for the half-line problem with tree matching conditions.

Counts come from a Pruefer phase: the number of eigenvalues below ``lam`` on a
bounded interval with Dirichlet ends equals ``floor(xi(r2)/pi)``.  Half-line
quantities are computed on integer-aligned truncations whose length is doubled
until the count stops changing.
"""

import math
from dataclasses import dataclass, field

from . import _kernels
from .model import (ConvergenceError, DomainError, NearEigenvalueError,
                    NonAdmissibleError, Potential, as_interval, is_admissible,
                    window_of)

RTOL = 1e-9
PHASE_MARGIN = 1e-7
MAX_STEPS = 50_000_000
MAX_DOUBLINGS = 6
# the end point sits this many powers of ten of free decay beyond the potential
TRUNCATION_DIGITS = 12
MAX_EXTENSION = 1e6


def lam_plus(lam):
    """Numerical stand-in for the right limit ``lam + 0``."""
    return lam + 1e-9 * (1.0 + abs(lam))


@dataclass
class PruferState:
    t: float
    xi: float
    steps: int = 0


@dataclass
class CountResult:
    value: int
    truncation_radius: float = None
    ode_tolerance: float = RTOL
    warnings: list = field(default_factory=list)

    def __int__(self):
        return self.value

    def to_json(self):
        return {"value": self.value, "truncation_radius": self.truncation_radius,
                "ode_tolerance": self.ode_tolerance, "warnings": list(self.warnings)}


def prufer_state(tree, V, lam, delta, rtol=RTOL):
    """Phase at the right end of a bounded interval, starting from ``xi(r1) = 0``."""
    delta = as_interval(delta)
    if not delta.bounded:
        raise DomainError("Pruefer integration needs a bounded interval")
    kind, par, tx, ty = V.kernel_args()
    if V.kind == "table" and not V.extend_constant:
        if delta.r1 + V.offset < V.grid[0] or delta.r2 + V.offset > V.grid[-1]:
            raise DomainError("interval extends beyond the tabulated profile")
    vsign = 0.0 if V.is_zero else float(V.sign)
    xi, status, steps = _kernels.prufer_phase(
        float(delta.r1), float(delta.r2), float(lam), vsign, kind, par, tx, ty,
        float(tree.b), rtol, rtol, MAX_STEPS)
    if status != _kernels.STATUS_OK:
        raise ConvergenceError(f"phase integration failed (status {status}) at lam={lam}")
    return PruferState(t=delta.r2, xi=xi, steps=steps)


def count_N(tree, V, lam, delta, rtol=RTOL):
    """Number of eigenvalues strictly below ``lam`` on a bounded interval."""
    st = prufer_state(tree, V, lam, delta, rtol)
    x = st.xi / math.pi
    n = math.floor(x)
    res = CountResult(value=n, ode_tolerance=rtol)
    margin = max(PHASE_MARGIN, 10 * rtol * abs(st.xi))
    if min(x - n, n + 1 - x) * math.pi < margin:
        res.warnings.append(f"lam={lam!r} is within phase margin of an eigenvalue; count may be off by one")
    return res


def _merge(res, *others):
    for o in others:
        for w in o.warnings:
            if w not in res.warnings:
                res.warnings.append(w)
    return res


class _FreeCache:
    """Free counts depend only on (b, lam, interval); they recur across generations."""

    def __init__(self):
        self._d = {}

    def get(self, tree, lam, delta, rtol):
        key = (tree.b, lam, delta.r1, delta.r2, rtol)
        r = self._d.get(key)
        if r is None:
            r = count_N(tree, Potential.zero(), lam, delta, rtol)
            self._d[key] = r
        return r


_free_cache = _FreeCache()


def _M_bounded(tree, V, lam, delta, rtol):
    """M on a bounded interval through the difference of counting functions."""
    if V.sign < 0:
        a = count_N(tree, V, lam, delta, rtol)
        b0 = _free_cache.get(tree, lam, delta, rtol)
        return _merge(CountResult(a.value - b0.value, ode_tolerance=rtol), a, b0)
    lp = lam_plus(lam)
    a = _free_cache.get(tree, lp, delta, rtol)
    b1 = count_N(tree, V, lp, delta, rtol)
    return _merge(CountResult(a.value - b1.value, ode_tolerance=rtol), a, b1)


def _check_lambda(tree, window, sign, q, lam):
    if window is None:
        window = window_of(tree, lam)
    if not window.contains_closed(lam):
        raise DomainError(f"lambda={lam} is outside the gap window {window}")
    if not is_admissible(tree, window, sign, q, lam, gamma0=1.0):
        raise NonAdmissibleError(f"lambda={lam} is not admissible for this profile")
    return window


def free_decay_rate(tree, lam):
    """``-ln|q1|``: decay per unit length of the subordinate free solution at ``lam``."""
    if lam > 0:
        a = abs(tree.R * math.cos(math.sqrt(lam)))
    else:
        a = tree.R * math.cosh(math.sqrt(-lam))
    if a <= 1.0:
        return 0.0
    return math.log(a + math.sqrt(a * a - 1.0))


def _initial_end(tree, q, g, r1, threshold, *lams):
    """Integer right end for the first truncation.

    Beyond ``t0`` the potential stays below half the threshold; the end is then
    pushed far enough that free solutions decay by ``10**-TRUNCATION_DIGITS``
    between ``t0`` and the Dirichlet end, so the end point cannot move an
    eigenvalue across ``lam``.
    """
    t0 = q.decay_radius(0.5 * threshold / g) if g > 0 else 0.0
    if not math.isfinite(t0):
        raise NonAdmissibleError("profile does not decay below the gap threshold")
    sigma = min(free_decay_rate(tree, lam) for lam in lams)
    ext = TRUNCATION_DIGITS * math.log(10.0) / (2.0 * sigma) if sigma > 0 else math.inf
    return float(math.ceil(max(t0, r1) + 1.0 + min(ext, MAX_EXTENSION)))


def count_M(tree, sign, q, g, lam, delta, window=None, rtol=RTOL):
    """Number of eigenvalues crossing ``lam`` as the coupling runs from 0 to ``g``.

    ``q`` is the non-negative profile; the potential is ``sign * g * q``.
    For a half-line interval ``(r1, inf)`` the count is taken on ``(r1, T)`` with
    integer ``T``, doubling ``T - r1`` until two successive counts agree.
    """
    delta = as_interval(delta)
    window = _check_lambda(tree, window, sign, q, lam)
    V = q.with_sign(sign).scaled(g)
    lam_eval = lam
    warnings = []
    if not window.contains(lam):
        # one-sided limit from inside the gap
        eps = 1e-9 * (1.0 + abs(lam))
        lam_eval = lam + eps if lam == window.lambda_minus else lam - eps
        warnings.append("lambda at a gap edge: evaluated as a one-sided limit")
    if delta.bounded:
        res = _M_bounded(tree, V, lam_eval, delta, rtol)
        res.warnings.extend(warnings)
        return res
    d = window.threshold(sign, lam)
    if d <= 0:
        raise NonAdmissibleError("lambda coincides with the free eigenvalue inside the gap")
    if g * q.sup_from(delta.r1) < d:
        return CountResult(0, truncation_radius=delta.r1, ode_tolerance=rtol, warnings=warnings)
    T = _initial_end(tree, q, g, delta.r1, d, lam_eval)
    prev = _M_bounded(tree, V, lam_eval, as_interval((delta.r1, T)), rtol)
    for _ in range(MAX_DOUBLINGS):
        T2 = delta.r1 + 2 * (T - delta.r1)
        T2 = float(math.ceil(T2))
        cur = _M_bounded(tree, V, lam_eval, as_interval((delta.r1, T2)), rtol)
        if cur.value == prev.value:
            cur.truncation_radius = T
            cur.warnings.extend(warnings)
            return _merge(cur, prev)
        prev, T = cur, T2
    prev.truncation_radius = T
    prev.warnings.append("truncation did not stabilise; count is a lower-confidence estimate")
    prev.warnings.extend(warnings)
    return prev


def _window_direct(tree, V, lam1, lam2, delta, rtol):
    a = count_N(tree, V, lam2, delta, rtol)
    b0 = count_N(tree, V, lam_plus(lam1), delta, rtol)
    return _merge(CountResult(a.value - b0.value, ode_tolerance=rtol), a, b0)


def count_window(tree, sign, q, g, lam1, lam2, delta, window=None, rtol=RTOL):
    """Number of eigenvalues of the perturbed problem in the open window ``(lam1, lam2)``.

    On a half-line the window must lie inside one gap; the count is made on an
    integer-aligned truncation that is doubled until stable.  When the free
    problem has no spectrum in the window the result is cross-checked against
    the difference of crossing counts.
    """
    if not lam1 < lam2:
        raise DomainError("need lam1 < lam2")
    delta = as_interval(delta)
    V = q.with_sign(sign).scaled(g)
    if delta.bounded:
        res = _window_direct(tree, V, lam1, lam2, delta, rtol)
        return res
    if window is None:
        window = window_of(tree, lam1)
    if not (window.contains(lam1) and window.contains(lam2)):
        raise DomainError("half-line window counts need (lam1, lam2) strictly inside one gap")
    d = min(window.threshold(sign, lam1), window.threshold(sign, lam2),
            lam1 - window.lambda_minus, window.lambda_plus - lam2)
    if d <= 0:
        raise NonAdmissibleError("window touches the free eigenvalue inside the gap")
    if g * q.sup_from(delta.r1) < d:
        return CountResult(0, truncation_radius=delta.r1, ode_tolerance=rtol)
    T = _initial_end(tree, q, g, delta.r1, d, lam1, lam2)
    prev = _window_direct(tree, V, lam1, lam2, as_interval((delta.r1, T)), rtol)
    for _ in range(MAX_DOUBLINGS):
        T2 = float(math.ceil(delta.r1 + 2 * (T - delta.r1)))
        cur = _window_direct(tree, V, lam1, lam2, as_interval((delta.r1, T2)), rtol)
        if cur.value == prev.value:
            cur.truncation_radius = T
            return _merge(cur, prev)
        prev, T = cur, T2
    prev.truncation_radius = T
    prev.warnings.append("truncation did not stabilise; count is a lower-confidence estimate")
    return prev


def window_from_crossings(tree, sign, q, g, lam1, lam2, delta, window=None, rtol=RTOL):
    """Window count assembled from crossing counts at the two ends.

    Negative potentials give ``M(lam2) - M(lam1 + 0)``; positive ones give
    ``M(lam1) - M(lam2)``, which counts the window closed at ``lam2``.
    """
    if sign < 0:
        a = count_M(tree, sign, q, g, lam2, delta, window, rtol)
        b0 = count_M(tree, sign, q, g, lam_plus(lam1), delta, window, rtol)
    else:
        a = count_M(tree, sign, q, g, lam1, delta, window, rtol)
        b0 = count_M(tree, sign, q, g, lam2, delta, window, rtol)
    return _merge(CountResult(a.value - b0.value, ode_tolerance=rtol), a, b0)


def eigenvalues_in_window(tree, V, delta, lam1, lam2, tol=1e-10, rtol=RTOL):
    """Eigenvalues in ``(lam1, lam2)`` on a bounded interval, located by bisection."""
    delta = as_interval(delta)
    if not delta.bounded:
        raise DomainError("eigenvalue location needs a bounded interval")
    if tol < 1e-12 * (1.0 + max(abs(lam1), abs(lam2))):
        raise DomainError("tolerance below the phase resolution")

    def N(x):
        return count_N(tree, V, x, delta, rtol).value

    out = []

    def split(a, na, c, nc):
        # na = #{< a} after a, nc = #{< c}
        if nc - na <= 0:
            return
        if c - a <= tol:
            out.extend([0.5 * (a + c)] * (nc - na))
            return
        m = 0.5 * (a + c)
        nm = N(m)
        split(a, na, m, nm)
        split(m, nm, c, nc)

    lo = lam_plus(lam1)
    split(lo, N(lo), lam2, N(lam2))
    return out


def count_N_checked(tree, V, lam, delta, rtol=RTOL):
    """Like :func:`count_N` but raising when ``lam`` is too close to an eigenvalue."""
    r = count_N(tree, V, lam, delta, rtol)
    if r.warnings:
        raise NearEigenvalueError(r.warnings[0])
    return r
