"""Tree-level counting functions assembled from the shifted half-line problems.

Generation ``k`` contributes with multiplicity ``b**k - b**(k-1)`` (weighted
sums) or with weight one (the unweighted ``tilde`` sums).  Sums are exact
Python integers.
"""

import math
import os
import threading
from concurrent.futures import ThreadPoolExecutor

from .model import (DomainError, HALF_LINE, NonAdmissibleError, multiplicity,
                    window_of)
from .sturm import count_M, count_window

MID_TOL = 1e-8


def thread_count():
    env = os.environ.get("GAPSPECTRA_THREADS")
    if env:
        try:
            n = int(env)
        except ValueError as exc:
            raise DomainError("GAPSPECTRA_THREADS must be an integer") from exc
        return max(1, n)
    return os.cpu_count() or 1


class _Memo:
    def __init__(self):
        self._d = {}
        self._lock = threading.Lock()

    def get(self, key):
        with self._lock:
            return self._d.get(key)

    def put(self, key, value):
        with self._lock:
            self._d[key] = value

    def clear(self):
        with self._lock:
            self._d.clear()


_memo = _Memo()


def clear_cache():
    _memo.clear()


def _check_mid(window, *lams):
    if window.l >= 1:
        m = window.mid
        for lam in lams:
            if abs(lam - m) <= MID_TOL * (1.0 + m):
                raise DomainError(f"lambda={lam} coincides with the free eigenvalue {m}")


def k_max(tree, sign, q, g, lam, window=None):
    """Smallest generation from which every per-generation count vanishes.

    This is the first ``k`` with ``g * sup q(k + .) < threshold``, where the
    threshold is the distance from ``lam`` to the nearest piece of free spectrum
    that a potential of this sign pushes towards ``lam``.
    """
    if window is None:
        window = window_of(tree, lam)
    d = window.threshold(sign, lam)
    if d <= 0:
        raise NonAdmissibleError("lambda sits on the free spectrum")
    if math.isinf(d):
        return 0
    t = q.decay_radius(d / g)
    if math.isinf(t):
        raise NonAdmissibleError("profile does not decay below the threshold")
    k = max(0, math.ceil(t))
    # guard against rounding at the boundary
    while k > 0 and g * q.sup_from(k - 1) < d:
        k -= 1
    while g * q.sup_from(k) >= d:
        k += 1
    return k


def _key_g(g):
    return float(f"{g:.13e}")


def _per_k(tree, sign, q, g, k, lam, lam2, window, self_similar):
    if self_similar and q.kind == "exp" and q.offset == 0.0:
        gk = _key_g(g * math.exp(-2.0 * q.kappa * k))
        key = (tree.b, q, sign, gk, 0, lam, lam2)
        qk, gg = q, gk
    else:
        key = (tree.b, q, sign, _key_g(g), k, lam, lam2)
        qk, gg = q.shift(k), g
    hit = _memo.get(key)
    if hit is not None:
        return hit
    if lam2 is None:
        r = count_M(tree, sign, qk, gg, lam, HALF_LINE, window)
    else:
        r = count_window(tree, sign, qk, gg, lam, lam2, HALF_LINE, window)
    _memo.put(key, r)
    return r


def per_generation_counts(tree, sign, q, g, lam, lam2=None, window=None,
                          self_similar=True, threads=None):
    """Half-line counts for generations ``0 .. k_max - 1``.

    With ``lam2`` given these are window counts in ``(lam, lam2)``, otherwise
    crossing counts at ``lam``.
    """
    if window is None:
        window = window_of(tree, lam)
    if lam2 is None:
        _check_mid(window, lam)
        km = k_max(tree, sign, q, g, lam, window)
    else:
        if not (window.contains(lam) and window.contains(lam2)) or not lam < lam2:
            raise DomainError("window must satisfy lam1 < lam2 inside one gap")
        if window.l >= 1 and lam <= window.mid <= lam2:
            raise DomainError("window contains the free eigenvalue of the gap")
        _check_mid(window, lam, lam2)
        km = max(k_max(tree, sign, q, g, lam, window), k_max(tree, sign, q, g, lam2, window))
    n = threads or thread_count()

    def job(k):
        return _per_k(tree, sign, q, g, k, lam, lam2, window, self_similar)

    if n <= 1 or km <= 1:
        return [job(k) for k in range(km)]
    with ThreadPoolExecutor(max_workers=n) as ex:
        return list(ex.map(job, range(km)))


def _weighted(tree, counts):
    return sum(multiplicity(tree, k) * c.value for k, c in enumerate(counts))


def tree_M(tree, sign, q, g, lam, window=None, **kw):
    return _weighted(tree, per_generation_counts(tree, sign, q, g, lam, None, window, **kw))


def tilde_M(tree, sign, q, g, lam, window=None, **kw):
    return sum(c.value for c in per_generation_counts(tree, sign, q, g, lam, None, window, **kw))


def tree_N(tree, sign, q, g, lam1, lam2, window=None, **kw):
    return _weighted(tree, per_generation_counts(tree, sign, q, g, lam1, lam2, window, **kw))


def tilde_N(tree, sign, q, g, lam1, lam2, window=None, **kw):
    return sum(c.value for c in per_generation_counts(tree, sign, q, g, lam1, lam2, window, **kw))


QUANTITIES = {"tree_M": tree_M, "tilde_M": tilde_M, "tree_N": tree_N, "tilde_N": tilde_N}


def sweep(tree, sign, q, lam, log_g, quantity="tree_M", lam2=None, **kw):
    """Rows ``(g, count)`` over the values of ``ln g``."""
    fn = QUANTITIES[quantity]
    rows = []
    for lg in log_g:
        g = math.exp(lg)
        if quantity in ("tree_N", "tilde_N"):
            rows.append((g, fn(tree, sign, q, g, lam, lam2, **kw)))
        else:
            rows.append((g, fn(tree, sign, q, g, lam, **kw)))
    return rows


def renewal_identity(tree, sign, q, g, lam, lam2=None):
    """Both sides of ``N(g) - b N(g e^{-2 kappa}) = n(g) - n(g e^{-2 kappa})``.

    ``N`` is the weighted tree count computed generation by generation with
    explicitly shifted profiles; ``n`` is the count of the unshifted half-line
    problem.  Holds exactly for ``q = exp(-2 kappa t)``.
    """
    if q.kind != "exp":
        raise DomainError("the renewal identity needs an exponential profile")
    g1 = g * math.exp(-2.0 * q.kappa)
    if lam2 is None:
        big = [tree_M(tree, sign, q, x, lam, self_similar=False) for x in (g, g1)]
        small = [count_M(tree, sign, q, x, lam, HALF_LINE).value
                 if x * q.sup_from(0) >= window_of(tree, lam).threshold(sign, lam) else 0
                 for x in (g, g1)]
    else:
        big = [tree_N(tree, sign, q, x, lam, lam2, self_similar=False) for x in (g, g1)]
        small = [count_window(tree, sign, q, x, lam, lam2, HALF_LINE).value for x in (g, g1)]
    return big[0] - tree.b * big[1], small[0] - small[1]
