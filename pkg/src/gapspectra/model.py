"""Core value types: tree parameters, potentials, intervals, gap windows."""

import json
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np


class GapSpectraError(Exception):
    """Base class for computation errors raised by this package."""


class DomainError(GapSpectraError, ValueError):
    pass


class BandPointError(GapSpectraError, ValueError):
    """Raised when a spectral parameter lies in the interior of a band."""


class NonAdmissibleError(GapSpectraError, ValueError):
    pass


class NearEigenvalueError(GapSpectraError):
    pass


class ConvergenceError(GapSpectraError):
    pass


@dataclass(frozen=True)
class TreeParams:
    """Homogeneous metric tree with branching number ``b`` and unit edges.

    ``R`` is the half-sum ``(sqrt(b) + 1/sqrt(b))/2``, ``theta = arccos(1/R)``
    is the half-width of every spectral gap in the quasi-momentum variable and
    ``beta = ln b`` is the exponential growth rate of the tree.
    """

    b: int
    R: float
    theta: float
    beta: float


def make_tree(b):
    if isinstance(b, bool) or int(b) != b or b < 2:
        raise DomainError(f"branching number must be an integer >= 2, got {b!r}")
    b = int(b)
    R = (math.sqrt(b) + 1.0 / math.sqrt(b)) / 2.0
    return TreeParams(b=b, R=R, theta=math.acos(1.0 / R), beta=math.log(b))


def multiplicity(tree, k):
    """Number of copies of the shifted half-line problem at generation ``k``."""
    if k < 0 or int(k) != k:
        raise DomainError(f"generation must be a non-negative integer, got {k!r}")
    k = int(k)
    if k == 0:
        return 1
    return tree.b ** k - tree.b ** (k - 1)


_KIND_CODES = {"zero": 0, "power": 1, "exp": 2, "table": 3}


@dataclass(frozen=True)
class Potential:
    """Non-negative radial profile ``q`` together with a sign.

    The physical potential is ``sign * q``.  ``q`` is ``scale * Q(t + offset)``
    where ``Q`` is one of the model profiles ``(1+t)**(-2*gamma)``,
    ``exp(-2*kappa*t)`` or a piecewise linear table.
    """

    kind: str
    sign: int = -1
    gamma: float = None
    kappa: float = None
    scale: float = 1.0
    offset: float = 0.0
    grid: tuple = ()
    values: tuple = ()
    extend_constant: bool = False
    _arrays: dict = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if self.kind not in _KIND_CODES:
            raise DomainError(f"unknown profile kind {self.kind!r}")
        if self.sign not in (-1, 1):
            raise DomainError("sign must be +1 or -1")
        if not (self.scale >= 0 and math.isfinite(self.scale)):
            raise DomainError("scale must be finite and non-negative")
        if self.kind == "power" and not (self.gamma is not None and self.gamma > 0):
            raise DomainError("power profile needs gamma > 0")
        if self.kind == "exp" and not (self.kappa is not None and self.kappa > 0):
            raise DomainError("exponential profile needs kappa > 0")
        if self.kind == "table":
            x = np.asarray(self.grid, dtype=float)
            y = np.asarray(self.values, dtype=float)
            if x.ndim != 1 or x.size < 2 or x.shape != y.shape:
                raise DomainError("table needs matching 1-d grid and values, at least 2 points")
            if np.any(np.diff(x) <= 0):
                raise DomainError("table grid must be strictly increasing")
            if np.any(y < 0) or not np.all(np.isfinite(y)):
                raise DomainError("table values must be finite and non-negative")

    # constructors

    @classmethod
    def power(cls, gamma, sign=-1, scale=1.0):
        return cls("power", sign=sign, gamma=float(gamma), scale=float(scale))

    @classmethod
    def exponential(cls, kappa, sign=-1, scale=1.0):
        return cls("exp", sign=sign, kappa=float(kappa), scale=float(scale))

    @classmethod
    def tabulated(cls, grid, values, sign=-1, extend_constant=False):
        return cls("table", sign=sign, grid=tuple(float(v) for v in grid),
                   values=tuple(float(v) for v in values),
                   extend_constant=bool(extend_constant))

    @classmethod
    def zero(cls):
        return cls("zero", sign=1, scale=0.0)

    # derived potentials

    def _replace(self, **changes):
        d = {f: getattr(self, f) for f in
             ("kind", "sign", "gamma", "kappa", "scale", "offset", "grid",
              "values", "extend_constant")}
        d.update(changes)
        return Potential(**d)

    def shift(self, k):
        """Profile ``t -> q(t + k)``."""
        if k < 0:
            raise DomainError("shift must be non-negative")
        if self.kind == "table" and not self.extend_constant:
            if self.offset + k >= self.grid[-1]:
                raise DomainError(
                    f"shift {k} leaves the tabulated range [{self.grid[0]}, {self.grid[-1]}]")
        return self._replace(offset=self.offset + k)

    def scaled(self, c):
        return self._replace(scale=self.scale * float(c))

    def with_sign(self, sign):
        return self._replace(sign=int(sign))

    @property
    def is_model(self):
        """True for an unscaled, unshifted power or exponential profile."""
        return self.kind in ("power", "exp") and self.scale == 1.0 and self.offset == 0.0

    @property
    def is_zero(self):
        return self.kind == "zero" or self.scale == 0.0

    # evaluation

    def _table_arrays(self):
        if self._arrays is None:
            object.__setattr__(self, "_arrays", {
                "x": np.asarray(self.grid, dtype=float),
                "y": np.asarray(self.values, dtype=float),
            })
        return self._arrays["x"], self._arrays["y"]

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        s = t + self.offset
        if self.kind == "zero":
            out = np.zeros_like(s)
        elif self.kind == "power":
            out = self.scale * (1.0 + s) ** (-2.0 * self.gamma)
        elif self.kind == "exp":
            out = self.scale * np.exp(-2.0 * self.kappa * s)
        else:
            x, y = self._table_arrays()
            hi = x[-1] if not self.extend_constant else np.inf
            if np.any(s < x[0]) or np.any(s > hi):
                raise DomainError(
                    f"tabulated profile queried outside [{x[0]}, {x[-1]}]")
            out = self.scale * np.interp(s, x, y)
        return out if out.ndim else float(out)

    def potential(self, t):
        """Signed potential ``sign * q(t)``."""
        return self.sign * self(t)

    def sup_from(self, t0):
        """``sup_{t >= t0} q(t)``."""
        s0 = t0 + self.offset
        if self.kind == "zero" or self.scale == 0.0:
            return 0.0
        if self.kind == "power":
            return self.scale * (1.0 + s0) ** (-2.0 * self.gamma)
        if self.kind == "exp":
            return self.scale * math.exp(-2.0 * self.kappa * s0)
        x, y = self._table_arrays()
        if s0 > x[-1]:
            if self.extend_constant:
                return self.scale * y[-1]
            raise DomainError("supremum requested beyond tabulated range")
        inside = y[x > s0]
        v = max(float(np.interp(s0, x, y)), float(inside.max()) if inside.size else 0.0)
        return self.scale * v

    def decay_radius(self, level):
        """Smallest ``t >= 0`` with ``sup_{s >= t} q(s) < level`` (``inf`` if none)."""
        if level <= 0:
            return math.inf
        if self.sup_from(0.0) < level:
            return 0.0
        if self.kind == "power":
            return (self.scale / level) ** (1.0 / (2.0 * self.gamma)) - 1.0 - self.offset
        if self.kind == "exp":
            return math.log(self.scale / level) / (2.0 * self.kappa) - self.offset
        x, y = self._table_arrays()
        ys = self.scale * y
        if self.extend_constant and ys[-1] >= level:
            return math.inf
        above = np.nonzero(ys >= level)[0]
        i = above[-1]
        if i == len(x) - 1:
            return x[-1] - self.offset
        # linear piece from node i (>= level) to i+1 (< level)
        t = x[i] + (ys[i] - level) / (ys[i] - ys[i + 1]) * (x[i + 1] - x[i])
        return max(t - self.offset, 0.0)

    def kernel_args(self):
        """Arguments for the compiled kernels: (code, params, grid, values)."""
        par = np.array([self.scale, self.gamma or self.kappa or 0.0, self.offset,
                        1.0 if self.extend_constant else 0.0])
        if self.kind == "table":
            x, y = self._table_arrays()
        else:
            x = y = np.zeros(2)
        return _KIND_CODES[self.kind], par, x, y

    # serialization

    def to_json(self):
        d = {"sign": self.sign, "kind": self.kind}
        if self.kind == "table":
            d["table"] = {"grid": list(self.grid), "values": list(self.values),
                          "extend_constant": self.extend_constant}
            if self.scale != 1.0:
                d["params"] = {"scale": self.scale}
        else:
            params = {"scale": self.scale}
            if self.kind == "power":
                params["gamma"] = self.gamma
            elif self.kind == "exp":
                params["kappa"] = self.kappa
            d["params"] = params
        if self.offset:
            d["offset"] = self.offset
        return d

    def dumps(self):
        return json.dumps(self.to_json(), sort_keys=True)

    @classmethod
    def from_json(cls, d):
        if isinstance(d, str):
            d = json.loads(d)
        try:
            kind = d["kind"]
            sign = int(d.get("sign", -1))
            params = d.get("params", {})
            scale = float(params.get("scale", 1.0))
            if kind == "table":
                tab = d["table"]
                out = cls.tabulated(tab["grid"], tab["values"], sign=sign,
                                    extend_constant=tab.get("extend_constant", False))
                out = out._replace(scale=scale)
            elif kind == "power":
                out = cls.power(params["gamma"], sign=sign, scale=scale)
            elif kind == "exp":
                out = cls.exponential(params["kappa"], sign=sign, scale=scale)
            elif kind == "zero":
                out = cls.zero()
            else:
                raise DomainError(f"unknown profile kind {kind!r}")
        except (KeyError, TypeError) as exc:
            raise DomainError(f"malformed potential description: {exc}") from exc
        if d.get("offset"):
            out = out._replace(offset=float(d["offset"]))
        return out


@dataclass(frozen=True)
class Interval:
    r1: float
    r2: float

    def __post_init__(self):
        if not (self.r1 >= 0 and self.r2 > self.r1):
            raise DomainError(f"need 0 <= r1 < r2, got ({self.r1}, {self.r2})")

    @property
    def bounded(self):
        return math.isfinite(self.r2)

    @property
    def length(self):
        return self.r2 - self.r1


def as_interval(delta):
    if isinstance(delta, Interval):
        return delta
    r1, r2 = delta
    return Interval(float(r1), float(r2))


HALF_LINE = Interval(0.0, math.inf)


@dataclass(frozen=True)
class GapWindow:
    """Gap number ``l`` with edges ``lambda_minus < lambda_plus``.

    For ``l >= 1`` the free half-line operator has the eigenvalue
    ``mid = (pi*l)**2`` inside the gap.  Gap 0 is ``(-inf, theta**2)``.
    """

    l: int
    lambda_minus: float
    lambda_plus: float

    @property
    def mid(self):
        return (math.pi * self.l) ** 2 if self.l >= 1 else None

    def contains(self, lam):
        return self.lambda_minus < lam < self.lambda_plus

    def contains_closed(self, lam):
        return self.lambda_minus <= lam <= self.lambda_plus

    def distance(self, sign, lam):
        """Distance from ``lam`` to the edge that a potential of this sign moves towards it."""
        if sign > 0:
            return lam - self.lambda_minus
        return self.lambda_plus - lam

    def threshold(self, sign, lam):
        """Largest perturbation size that cannot move any free spectrum across ``lam``.

        Besides the relevant gap edge this accounts for the free eigenvalue
        ``(pi*l)**2`` when the potential pushes it towards ``lam``.
        """
        d = self.distance(sign, lam)
        if self.l >= 1:
            m = self.mid
            if (sign < 0 and lam < m) or (sign > 0 and lam > m):
                d = min(d, abs(lam - m))
        return d


def make_window(tree, l):
    if l < 0 or int(l) != l:
        raise DomainError("gap index must be a non-negative integer")
    l = int(l)
    if l == 0:
        return GapWindow(0, -math.inf, tree.theta ** 2)
    return GapWindow(l, (math.pi * l - tree.theta) ** 2, (math.pi * l + tree.theta) ** 2)


def window_of(tree, lam):
    """Gap window whose closure contains ``lam``; raises BandPointError otherwise."""
    if lam <= tree.theta ** 2:
        return make_window(tree, 0)
    k = math.sqrt(lam)
    l = int(round(k / math.pi))
    if l >= 1 and abs(k - math.pi * l) <= tree.theta * (1 + 1e-14):
        return make_window(tree, l)
    raise BandPointError(f"lambda={lam} lies inside a band")


def is_admissible(tree, window, sign, q, lam, gamma0=1.0):
    """Admissibility of ``lam`` for the counting function of order ``gamma0``.

    Interior points are always admissible.  At a gap edge power profiles with
    ``gamma <= gamma0`` are excluded on the side the potential pushes towards.
    """
    if not window.contains_closed(lam):
        return False
    if window.contains(lam):
        return True
    if q.kind == "power" and q.gamma <= gamma0:
        return window.distance(sign, lam) > 0
    return True


@dataclass(frozen=True)
class ScaleParams:
    """Semiclassical scale ``alpha`` for coupling ``g`` and the grid ``beta_k = (k+1)/alpha``."""

    alpha: float
    g: float

    def beta_k(self, k):
        return (np.asarray(k) + 1.0) / self.alpha


def make_scale(q, g):
    if g <= 1:
        raise DomainError("coupling must exceed 1")
    if q.kind == "power":
        a = g ** (1.0 / (2.0 * q.gamma))
    elif q.kind == "exp":
        a = math.log(g) / (2.0 * q.kappa)
    else:
        raise DomainError("scale is defined for power and exponential profiles only")
    return ScaleParams(alpha=a, g=float(g))
