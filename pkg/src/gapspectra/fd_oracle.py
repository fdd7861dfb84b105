"""Independent finite-element discretisation used as a cross-check.

Works with the continuous weighted quadratic form
``int (|u'|^2 + V |u|^2) w dt`` where ``w = b**k`` on ``[k-1, k)``; the tree
matching conditions are then natural and no phase jumps appear.  Piecewise
linear elements on a mesh containing every integer, Dirichlet ends.
"""

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from . import _kernels
from .model import DomainError, NearEigenvalueError, as_interval

MAX_DENSE_DIM = 20000
PIVOT_TOL = 1e-12

# three-point Gauss rule on [0, 1]
_GX = np.array([0.5 - math.sqrt(15) / 10, 0.5, 0.5 + math.sqrt(15) / 10])
_GW = np.array([5 / 18, 8 / 18, 5 / 18])


@dataclass
class DiscretizedForm:
    grid: np.ndarray      # all nodes including the two Dirichlet ends
    K: np.ndarray         # lower band storage (2, n) of the stiffness + potential matrix
    Mmat: np.ndarray      # lower band storage (2, n) of the mass matrix
    weight: np.ndarray    # weight on each element

    @property
    def dim(self):
        return self.K.shape[1]

    def dense(self):
        return _band_to_dense(self.K), _band_to_dense(self.Mmat)


def _band_to_dense(ab):
    n = ab.shape[1]
    A = np.diag(ab[0])
    for j in range(1, ab.shape[0]):
        off = ab[j, : n - j]
        A += np.diag(off, -j) + np.diag(off, j)
    return A


def tree_weight(b, t):
    """``b**k`` on ``[k-1, k)``."""
    return float(b) ** (np.floor(np.asarray(t, dtype=float)) + 1.0)


def make_grid(delta, h):
    delta = as_interval(delta)
    if not delta.bounded:
        raise DomainError("the oracle needs a bounded interval")
    if not h > 0:
        raise DomainError("mesh width must be positive")
    m = round(1.0 / h)
    if abs(m * h - 1.0) > 1e-12:
        raise DomainError("mesh width must divide the unit interval")
    if m < 8:
        raise DomainError("need at least 8 nodes per unit interval")
    j0 = math.floor(delta.r1 * m) + 1
    j1 = math.ceil(delta.r2 * m) - 1
    inner = np.arange(j0, j1 + 1) / m
    inner = inner[(inner > delta.r1 + 1e-12) & (inner < delta.r2 - 1e-12)]
    return np.concatenate(([delta.r1], inner, [delta.r2]))


def assemble(tree, V, delta, h):
    """Stiffness (with potential) and mass matrices for the interior nodes."""
    x = make_grid(delta, h)
    if x.size - 2 < 1:
        raise DomainError("interval too short for the requested mesh")
    le = np.diff(x)
    mid = 0.5 * (x[:-1] + x[1:])
    w = tree_weight(tree.b, mid)
    # potential contributions by Gauss quadrature on each element
    tq = x[:-1, None] + le[:, None] * _GX[None, :]
    vq = np.zeros_like(tq) if V.is_zero else V.sign * np.asarray(V(tq))
    p0 = 1.0 - _GX
    p1 = _GX
    v00 = (vq * p0 * p0 * _GW).sum(axis=1) * le * w
    v01 = (vq * p0 * p1 * _GW).sum(axis=1) * le * w
    v11 = (vq * p1 * p1 * _GW).sum(axis=1) * le * w
    s = w / le
    m_d = w * le / 3.0
    m_o = w * le / 6.0
    n_nodes = x.size
    diagK = np.zeros(n_nodes)
    diagM = np.zeros(n_nodes)
    diagK[:-1] += s + v00
    diagK[1:] += s + v11
    diagM[:-1] += m_d
    diagM[1:] += m_d
    offK = -s + v01
    offM = m_o
    # restrict to interior nodes 1..n-2
    n = n_nodes - 2
    K = np.zeros((2, n))
    M = np.zeros((2, n))
    K[0] = diagK[1:-1]
    M[0] = diagM[1:-1]
    K[1, : n - 1] = offK[1:-1]
    M[1, : n - 1] = offM[1:-1]
    return DiscretizedForm(grid=x, K=K, Mmat=M, weight=w)


def inertia_count(form, lam):
    """Number of discrete eigenvalues below ``lam`` (Sylvester inertia of ``K - lam*M``)."""
    ab = form.K - lam * form.Mmat
    neg, bad = _kernels.banded_ldl_inertia(np.ascontiguousarray(ab), PIVOT_TOL)
    if bad >= 0:
        raise NearEigenvalueError(f"near-zero pivot at row {bad}: lam={lam} is a discrete eigenvalue")
    return int(neg)


def dense_eigs(form, n_lowest=None, window=None):
    """Lowest ``n_lowest`` generalised eigenvalues, or all of them inside ``window``."""
    if form.dim > MAX_DENSE_DIM:
        raise DomainError(f"dimension {form.dim} exceeds the dense cap {MAX_DENSE_DIM}")
    A, B = form.dense()
    if window is not None:
        return scipy.linalg.eigh(A, B, eigvals_only=True, subset_by_value=window)
    if n_lowest is None:
        return scipy.linalg.eigh(A, B, eigvals_only=True)
    n_lowest = min(n_lowest, form.dim)
    return scipy.linalg.eigh(A, B, eigvals_only=True, subset_by_index=[0, n_lowest - 1])


def oracle_count(tree, V, lam, delta, h=1 / 64):
    return inertia_count(assemble(tree, V, delta, h), lam)


def richardson(values, ratio=2.0, order=2):
    """Repeated Richardson extrapolation of a sequence computed at ``h, h/ratio, ...``."""
    table = [np.asarray(values, dtype=float)]
    p = order
    while table[-1].shape[0] > 1:
        v = table[-1]
        f = ratio ** p
        table.append((f * v[1:] - v[:-1]) / (f - 1.0))
        p += order
    return float(table[-1][0])


@dataclass
class OracleCase:
    b: int
    profile: dict
    g: float
    delta: tuple
    lam: float
    prufer: int = None
    fd: int = None
    fd_fine: int = None
    resolved: bool = False

    @property
    def agree(self):
        return self.prufer == self.fd


def random_case(rng):
    from .model import Potential

    b = int(rng.choice([2, 3, 4]))
    r1 = float(rng.uniform(0.0, 38.0))
    r2 = float(rng.uniform(r1 + 0.5, 40.0))
    g = float(10.0 ** rng.uniform(-1.0, 4.0))
    sign = int(rng.choice([-1, 1]))
    if rng.random() < 0.5:
        q = Potential.power(float(rng.uniform(0.5, 3.0)), sign=sign)
    else:
        q = Potential.exponential(float(rng.uniform(0.2, 2.0)), sign=sign)
    lam = float(rng.uniform(-2.0, 60.0))
    return OracleCase(b=b, profile=q.to_json(), g=g, delta=(r1, r2), lam=lam)


def run_case(case, h=1 / 64):
    """Fill in the Pruefer and finite-element counts for one case.

    The case counts as resolved when the finite-element count does not change
    under one mesh halving and the Pruefer phase is not within its margin of
    an eigenvalue.
    """
    from .model import Potential, make_tree
    from .sturm import count_N

    tree = make_tree(case.b)
    V = Potential.from_json(case.profile).scaled(case.g)
    r = count_N(tree, V, case.lam, case.delta)
    case.prufer = r.value
    try:
        case.fd = oracle_count(tree, V, case.lam, case.delta, h)
        case.fd_fine = oracle_count(tree, V, case.lam, case.delta, h / 2)
    except NearEigenvalueError:
        case.resolved = False
        return case
    case.resolved = case.fd == case.fd_fine and not r.warnings
    return case


def oracle_check(n_cases=100, seed=0, h=1 / 64, max_draws=None):
    """Draw random cases until ``n_cases`` resolved ones have been compared.

    Returns ``(resolved_cases, draws)``.
    """
    rng = np.random.default_rng(seed)
    max_draws = max_draws or 20 * n_cases
    out, draws = [], 0
    while len(out) < n_cases and draws < max_draws:
        draws += 1
        c = run_case(random_case(rng), h)
        if c.resolved:
            out.append(c)
    return out, draws
