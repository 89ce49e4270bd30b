"""Composite Gauss-Legendre grids and sampled functions on (0, inf)."""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

__all__ = ["gauss_legendre", "panel_rule", "grade_to_zero", "Grid", "Tail", "GridFunction"]


@lru_cache(maxsize=32)
def gauss_legendre(order):
    """Nodes, weights and barycentric weights of the Gauss-Legendre rule on [-1, 1]."""
    t, w = np.polynomial.legendre.leggauss(order)
    bary = (-1.0) ** np.arange(order) * np.sqrt((1.0 - t * t) * w)
    for arr in (t, w, bary):
        arr.setflags(write=False)
    return t, w, bary


def panel_rule(breaks, order=16):
    """Composite rule on panels [breaks[i], breaks[i+1]]; unweighted (dx)."""
    breaks = np.asarray(breaks, dtype=float)
    t, w, _ = gauss_legendre(order)
    half = 0.5 * np.diff(breaks)
    mid = 0.5 * (breaks[1:] + breaks[:-1])
    nodes = (mid[:, None] + half[:, None] * t[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def grade_to_zero(breaks, levels=40):
    """Refine the first panel geometrically toward 0.

    x^alpha with non-integer alpha is not polynomial at 0, which spoils
    Gauss-Legendre accuracy on any panel [a, b] with a small against b - a.
    Breaks a + (b - a) 2^-j are added (at most ``levels``) until the panel
    next to a is no wider than a.
    """
    breaks = np.asarray(breaks, dtype=float)
    if breaks.size < 2:
        return breaks
    a, w = breaks[0], breaks[1] - breaks[0]
    j = np.arange(1, levels + 1)
    j = j[w * 2.0 ** -(j - 1) > a]
    if j.size == 0:
        return breaks
    return np.unique(np.concatenate([breaks, a + w * 2.0 ** -j]))


@dataclass(frozen=True, eq=False)
class Grid:
    """Panels ``breaks`` on (0, inf) with ``order`` Gauss nodes each.

    ``weights`` already carry the density x^alpha, so ``weights @ f(nodes)``
    approximates the integral of f against x^alpha dx.
    """

    breaks: np.ndarray
    alpha: float
    order: int = 16
    nodes: np.ndarray = field(init=False, repr=False)
    weights: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        breaks = np.asarray(self.breaks, dtype=float)
        if breaks.ndim != 1 or breaks.size < 2:
            raise ValueError("a grid needs at least one panel")
        if breaks[0] < 0 or np.any(np.diff(breaks) <= 0):
            raise ValueError("panel boundaries must be nonnegative and increasing")
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")
        nodes, w = panel_rule(breaks, self.order)
        object.__setattr__(self, "breaks", breaks)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", w * nodes**self.alpha)

    @property
    def n_panels(self):
        return self.breaks.size - 1

    @property
    def x_max(self):
        return float(self.breaks[-1])

    def refined(self, factor=2):
        """Grid with every panel split into ``factor`` equal pieces."""
        b = self.breaks
        parts = [np.linspace(b[i], b[i + 1], factor + 1)[:-1] for i in range(b.size - 1)]
        return Grid(np.append(np.concatenate(parts), b[-1]), self.alpha, self.order)


def _endpoint(vals, t, bary, s):
    c = bary / (s - t)
    return (vals * c).sum(axis=1) / c.sum()


@dataclass(frozen=True)
class Tail:
    """Behaviour beyond the last panel.

    ``compact`` means the function vanishes there.  Otherwise
    |f(x)| <= coefficient * x^(-exponent) for x > x_max; the bound enters error
    budgets only, evaluation returns 0 past x_max.
    """

    compact: bool = True
    exponent: float | None = None
    coefficient: float | None = None

    def __post_init__(self):
        if not self.compact and (self.exponent is None or self.coefficient is None):
            raise ValueError("non-compact tail needs exponent and coefficient")

    def lp_bound(self, x_max, p, alpha):
        """Bound on the integral of |f|^p x^alpha over (x_max, inf)."""
        if self.compact:
            return 0.0
        q = p * self.exponent - alpha - 1.0
        if q <= 0:
            return float("inf")
        return self.coefficient**p * x_max ** (-q) / q

    def to_dict(self):
        return {"compact": self.compact, "exponent": self.exponent, "coefficient": self.coefficient}


@dataclass(eq=False)
class GridFunction:
    """Samples of a function at the nodes of a `Grid`.

    Between nodes the function is the degree ``order-1`` interpolant of its
    panel, so panel boundaries are the only places it may jump.  Outside
    [breaks[0], breaks[-1]] it is zero.
    """

    grid: Grid
    values: np.ndarray
    tail: Tail = field(default_factory=Tail)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != self.grid.nodes.shape:
            raise ValueError("values must match the grid nodes")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("GridFunction values must be finite")

    @classmethod
    def from_callable(cls, fn, breaks, alpha, order=16, tail=None):
        grid = Grid(np.asarray(breaks, dtype=float), alpha, order)
        return cls(grid, fn(grid.nodes), tail or Tail())

    @classmethod
    def zeros(cls, grid):
        return cls(grid, np.zeros_like(grid.nodes))

    @property
    def alpha(self):
        return self.grid.alpha

    @property
    def breaks(self):
        return self.grid.breaks

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        flat = np.atleast_1d(x).ravel()
        out = np.zeros_like(flat)
        b = self.grid.breaks
        order = self.grid.order
        inside = (flat >= b[0]) & (flat <= b[-1])
        if inside.any():
            xi = flat[inside]
            panel = np.clip(np.searchsorted(b, xi, side="right") - 1, 0, b.size - 2)
            t, _, bary = gauss_legendre(order)
            lo, hi = b[panel], b[panel + 1]
            s = (2.0 * xi - lo - hi) / (hi - lo)
            vals = self.values.reshape(-1, order)[panel]
            diff = s[:, None] - t[None, :]
            exact = diff == 0.0
            diff[exact] = 1.0
            c = bary[None, :] / diff
            res = (c * vals).sum(axis=1) / c.sum(axis=1)
            hit = exact.any(axis=1)
            if hit.any():
                res[hit] = vals[hit][exact[hit]]
            out[inside] = res
        return out.reshape(x.shape) if x.ndim else float(out[0])

    def jumps(self, rel_tol=1e-8):
        """Breaks where the piecewise interpolant is discontinuous.

        The ends of the grid count as jumps when f is nonzero there.
        """
        b = self.grid.breaks
        scale = float(np.max(np.abs(self.values))) if self.values.size else 0.0
        if scale == 0.0:
            return np.empty(0)
        vals = self.values.reshape(-1, self.grid.order)
        t, _, bary = gauss_legendre(self.grid.order)
        right_end = _endpoint(vals, t, bary, 1.0)
        left_end = _endpoint(vals, t, bary, -1.0)
        inner = np.abs(right_end[:-1] - left_end[1:]) > rel_tol * scale
        ends = [abs(left_end[0]) > rel_tol * scale, *inner, abs(right_end[-1]) > rel_tol * scale]
        return b[np.asarray(ends)]

    def integral(self):
        """Integral against x^alpha dx."""
        return float(self.grid.weights @ self.values)

    def support(self):
        """Smallest [a, b] made of panel boundaries outside which f vanishes."""
        nz = np.flatnonzero(np.any(self.values.reshape(-1, self.grid.order) != 0.0, axis=1))
        if nz.size == 0:
            return None
        b = self.grid.breaks
        return float(b[nz[0]]), float(b[nz[-1] + 1])

    def map(self, fn):
        return GridFunction(self.grid, fn(self.values), self.tail)

    def scaled(self, c):
        return GridFunction(self.grid, c * self.values, self.tail)

    def resample(self, grid):
        """Evaluate on another grid (exact when its panels refine this one's)."""
        return GridFunction(grid, self(grid.nodes), self.tail)

    def __add__(self, other):
        if other.grid is not self.grid:
            raise ValueError("add GridFunctions on the same grid only; resample first")
        return GridFunction(self.grid, self.values + other.values, self.tail)

    def __mul__(self, c):
        return self.scaled(float(c))

    __rmul__ = __mul__

    # -- serialisation: JSON header + CSV body -------------------------------

    def header(self):
        return {
            "alpha": self.grid.alpha,
            "x_max": self.grid.x_max,
            "order": self.grid.order,
            "breaks": [float(v) for v in self.grid.breaks],
            "tail": self.tail.to_dict(),
        }

    def to_text(self):
        buf = io.StringIO()
        buf.write("# " + json.dumps(self.header(), sort_keys=True) + "\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["x", "value"])
        for x, v in zip(self.grid.nodes, self.values):
            writer.writerow([repr(float(x)), repr(float(v))])
        return buf.getvalue()

    @classmethod
    def from_text(cls, text):
        lines = text.splitlines()
        if not lines or not lines[0].startswith("#"):
            raise ValueError("missing JSON header line")
        head = json.loads(lines[0][1:])
        for key in ("alpha", "order", "breaks", "tail"):
            if key not in head:
                raise ValueError(f"header lacks {key!r}")
        grid = Grid(np.asarray(head["breaks"], dtype=float), float(head["alpha"]), int(head["order"]))
        rows = list(csv.reader(lines[1:]))
        if not rows or rows[0] != ["x", "value"]:
            raise ValueError("CSV body must start with x,value")
        data = np.array([[float(a), float(b)] for a, b in rows[1:]]).reshape(-1, 2)
        if data.shape[0] != grid.nodes.size or not np.allclose(data[:, 0], grid.nodes, rtol=1e-12, atol=0):
            raise ValueError("CSV nodes do not match the header grid")
        tail = Tail(**head["tail"])
        return cls(grid, data[:, 1], tail)
