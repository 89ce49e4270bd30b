"""Geometry of ((0, inf), |x - y|, x^alpha dx): intervals, rho, covers."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "check_alpha",
    "rho",
    "Interval",
    "mu",
    "dilate",
    "smooth_step",
    "Cover",
    "build_cover",
    "PartitionOfUnity",
    "partition_of_unity",
]


def check_alpha(alpha):
    alpha = float(alpha)
    if not alpha > 0:
        raise ValueError(f"alpha must be positive (alpha <= 0 is not supported), got {alpha}")
    return alpha


def rho(y):
    """Critical scale: 1 on (0, 1), 1/y on [1, inf)."""
    y = np.asarray(y, dtype=float)
    if np.any(~(y > 0)):
        raise ValueError("rho is defined for y > 0")
    out = np.where(y < 1.0, 1.0, 1.0 / np.maximum(y, 1.0))
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class Interval:
    """The ball B(center, radius) intersected with (0, inf)."""

    center: float
    radius: float

    def __post_init__(self):
        if not (self.center > 0 and self.radius > 0):
            raise ValueError("interval needs center > 0 and radius > 0")

    @property
    def left(self):
        return max(self.center - self.radius, 0.0)

    @property
    def right(self):
        return self.center + self.radius

    @classmethod
    def from_endpoints(cls, a, b):
        return cls(0.5 * (a + b), 0.5 * (b - a))

    def contains(self, x):
        x = np.asarray(x)
        return (x > self.left) & (x < self.right)

    def to_dict(self):
        return {"center": self.center, "radius": self.radius}


def mu(interval, alpha):
    """Measure of the interval under x^alpha dx, in closed form."""
    alpha = check_alpha(alpha)
    p = alpha + 1.0
    return (interval.right**p - interval.left**p) / p


def mu_between(a, b, alpha):
    p = alpha + 1.0
    return (np.asarray(b, dtype=float) ** p - np.asarray(a, dtype=float) ** p) / p


def dilate(interval, k):
    if not k > 0:
        raise ValueError("dilation factor must be positive")
    return Interval(interval.center, k * interval.radius)


def _psi(u):
    out = np.zeros_like(u)
    pos = u > 0
    out[pos] = np.exp(-1.0 / u[pos])
    return out


def smooth_step(s):
    """C-infinity step: 1 for s <= 0, 0 for s >= 1, strictly between inside."""
    s = np.asarray(s, dtype=float)
    a, b = _psi(1.0 - s), _psi(s)
    return a / (a + b)


def smooth_step_dx(s):
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    inside = (s > 0) & (s < 1)
    si = s[inside]
    a, b = np.exp(-1.0 / (1.0 - si)), np.exp(-1.0 / si)
    da = -a / (1.0 - si) ** 2
    db = b / si**2
    out[inside] = (da * (a + b) - a * (da + db)) / (a + b) ** 2
    return out


@dataclass(frozen=True)
class Cover:
    """Intervals I_n = B(z_n, rho(z_n)) covering (0, x_max]."""

    centers: tuple
    x_max: float
    overlap_bound: int

    @property
    def intervals(self):
        return [Interval(z, rho(z)) for z in self.centers]

    def to_dict(self):
        return {
            "x_max": self.x_max,
            "overlap_bound": self.overlap_bound,
            "centers": list(self.centers),
            "radii": [rho(z) for z in self.centers],
        }

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)


def _overlap_count(centers, probe, k):
    z = np.asarray(centers)
    r = k * rho(z)
    return ((np.abs(probe[:, None] - z[None, :]) < r[None, :])).sum(axis=1)


def _probe(x_max, n=20000):
    return np.concatenate([np.geomspace(1e-6, 1.0, n // 4), np.linspace(1.0, x_max, n)])


# Spacing of consecutive centres, in units of the local rho.
MARCH_FACTOR = 1.5


def build_cover(x_max, alpha, overlap_bound=8):
    """March centres z_1 = 1/2, z_{n+1} = z_n + step until past ``x_max``.

    step = MARCH_FACTOR * (rho(z_n) + rho(z_n + rho(z_n))) / 2.  The result is
    checked on a probe grid: every point of (0, x_max] lies in some I_n and
    no point lies in more than ``overlap_bound`` of the 4 I_n.
    """
    check_alpha(alpha)
    if not x_max > 1:
        raise ValueError("build_cover needs x_max > 1")
    centers = [0.5]
    while centers[-1] <= x_max:
        z = centers[-1]
        r = rho(z)
        centers.append(z + MARCH_FACTOR * 0.5 * (r + rho(z + r)))
    probe = _probe(x_max)
    if np.any(_overlap_count(centers, probe, 1.0) < 1):
        raise RuntimeError("cover leaves a gap in (0, x_max]")
    worst = int(_overlap_count(centers, probe, 4.0).max())
    if worst > overlap_bound:
        raise RuntimeError(f"4I_n overlap {worst} exceeds bound {overlap_bound}")
    return Cover(tuple(float(c) for c in centers), float(x_max), overlap_bound)


@dataclass(frozen=True)
class PartitionOfUnity:
    """eta_n = b_n / sum_m b_m with b_n = smooth_step(2|x - z_n|/rho(z_n) - 1).

    b_n is 1 on the half-radius core of I_n and vanishes outside I_n.
    """

    cover: Cover
    derivative_bound: float

    def bumps(self, x):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        z = np.asarray(self.cover.centers)
        r = rho(z)
        return smooth_step(2.0 * np.abs(x[None, :] - z[:, None]) / r[:, None] - 1.0)

    def weights(self, x):
        """Array (n_intervals, len(x)) of eta_n(x)."""
        b = self.bumps(x)
        total = b.sum(axis=0)
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(total > 0, b / total, 0.0)

    def weights_dx(self, x):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        z = np.asarray(self.cover.centers)
        r = rho(z)
        s = 2.0 * np.abs(x[None, :] - z[:, None]) / r[:, None] - 1.0
        b = smooth_step(s)
        db = smooth_step_dx(s) * 2.0 * np.sign(x[None, :] - z[:, None]) / r[:, None]
        total, dtotal = b.sum(axis=0), db.sum(axis=0)
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(total > 0, (db * total - b * dtotal) / total**2, 0.0)

    def eta(self, n):
        """Callable eta_n."""
        return lambda x: self.weights(x)[n]

    def to_dict(self):
        d = self.cover.to_dict()
        d.update({"bump": "smooth_step(2|x-z|/rho(z) - 1)", "derivative_bound": self.derivative_bound})
        return d

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)


def partition_of_unity(cover, derivative_bound=16.0):
    """Normalised bumps over ``cover``; |eta_n'| rho(z_n) is certified on a probe grid."""
    pou = PartitionOfUnity(cover, derivative_bound)
    probe = _probe(cover.x_max)
    b = pou.bumps(probe)
    if np.any(b.sum(axis=0) <= 0):
        raise RuntimeError("partition of unity degenerates: bumps vanish somewhere")
    d = np.abs(pou.weights_dx(probe)) * rho(np.asarray(cover.centers))[:, None]
    worst = float(d.max())
    if worst > derivative_bound:
        raise RuntimeError(f"|eta'| rho = {worst:.3g} exceeds {derivative_bound}")
    return pou


def ball_measure_ratio(center, radius, k, alpha):
    """mu(k B) / mu(B); a helper for doubling checks."""
    return mu(Interval(center, k * radius), alpha) / mu(Interval(center, radius), alpha)

