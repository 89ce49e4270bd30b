"""Atoms of H^1(X), H~^1(X) and h^{1,m}(X), and a constructive atomic decomposition."""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .grid import Grid, GridFunction, Tail, grade_to_zero
from .measure import Interval, build_cover, check_alpha, dilate, mu, mu_between, partition_of_unity, rho, smooth_step

__all__ = [
    "Atom",
    "AtomReport",
    "AtomicDecomposition",
    "LocalBump",
    "sup_norm",
    "validate_atom",
    "random_atom",
    "telescope_expand",
    "split_to_h1",
    "decompose",
    "decompose_local",
    "make_atom",
    "dilate_atom",
    "atomic_norm_upper",
]

KINDS = ("H1", "H1-tilde", "local")
SIZE_TOL = 1e-9
CANCEL_TOL = 1e-9
_SAMPLES = 48
# Panels toward 0 for the fixed profile families; the first panel's share of
# mu(I) is then below 2^-30, far under every tolerance used here.
_ZERO_LEVELS = 20


def sup_norm(f):
    """max |f| over the nodes and a dense uniform sample of every panel."""
    b = f.breaks
    s = np.linspace(0.0, 1.0, _SAMPLES)
    pts = (b[:-1, None] + (b[1:] - b[:-1])[:, None] * s[None, :]).ravel()
    return float(max(np.max(np.abs(f.values)), np.max(np.abs(f(pts)))))


@dataclass(frozen=True, eq=False)
class Atom:
    """A profile supported in ``interval``; ``m`` is the scale of a local atom."""

    interval: Interval
    kind: str
    profile: GridFunction
    m: float | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}")
        if self.kind == "local" and not (self.m is not None and self.m > 0):
            raise ValueError("a local atom needs m > 0")

    @property
    def alpha(self):
        return self.profile.alpha

    def needs_cancellation(self):
        r = self.interval.radius
        if self.kind == "H1":
            return r <= 0.25 * rho(self.interval.center)
        if self.kind == "H1-tilde":
            return True
        return r <= 0.25 * self.m

    def to_dict(self):
        return {"interval": self.interval.to_dict(), "kind": self.kind, "m": self.m}


@dataclass
class AtomReport:
    ok: bool
    violations: list = field(default_factory=list)
    measured: dict = field(default_factory=dict)


def validate_atom(a):
    """Check support, size, scale and cancellation; violations are returned, not raised."""
    rep = AtomReport(True)
    I = a.interval
    muI = mu(I, a.alpha)
    tol_x = 1e-12 * max(I.right, 1.0)
    supp = a.profile.support()
    rep.measured["support"] = supp
    if supp is not None and (supp[0] < I.left - tol_x or supp[1] > I.right + tol_x):
        rep.violations.append({"axiom": "support", "measured": list(supp), "limit": [I.left, I.right]})
    sup = sup_norm(a.profile)
    rep.measured["sup_times_mu"] = sup * muI
    if sup * muI > 1.0 + SIZE_TOL:
        rep.violations.append({"axiom": "size", "measured": sup * muI, "limit": 1.0})
    r = I.radius
    if a.kind == "H1" and r > rho(I.center) * (1.0 + 1e-12):
        rep.violations.append({"axiom": "radius", "measured": r, "limit": rho(I.center)})
    if a.kind == "local" and r > a.m * (1.0 + 1e-12):
        rep.violations.append({"axiom": "radius", "measured": r, "limit": a.m})
    integral = a.profile.integral()
    rep.measured["integral"] = integral
    if a.needs_cancellation():
        scale = max(sup * muI, 1e-300)
        if abs(integral) > CANCEL_TOL * scale:
            rep.violations.append({"axiom": "cancellation", "measured": integral, "limit": CANCEL_TOL * scale})
    rep.ok = not rep.violations
    return rep


# -- profile families --------------------------------------------------------------


def _mu_split(lo, hi, alpha):
    """Point s in (lo, hi) with mu(lo, s) = mu(s, hi)."""
    p = alpha + 1.0
    return (0.5 * (lo**p + hi**p)) ** (1.0 / p)


def _indicator_profile(lo, hi, alpha, height):
    grid = Grid(grade_to_zero([lo, hi], _ZERO_LEVELS), alpha)
    return GridFunction(grid, np.full(grid.nodes.shape, height))


def _two_block(lo, hi, alpha, height, sign):
    s = _mu_split(lo, hi, alpha)
    grid = Grid(grade_to_zero([lo, s, hi], _ZERO_LEVELS), alpha)
    vals = np.where(grid.nodes < s, sign * height, -sign * height)
    return GridFunction(grid, vals)


def _wavelet(lo, hi, alpha, muI, sign):
    """(1 - u^2)^2 (u - c), u the position rescaled to [-1, 1], c making the mu-mean vanish.

    Scaled so that its maximum modulus is 1/mu(I).
    """
    grid = Grid(grade_to_zero(np.linspace(lo, hi, 5), _ZERO_LEVELS), alpha)
    mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
    u = (grid.nodes - mid) / half
    g = (1.0 - u**2) ** 2
    c = float(grid.weights @ (g * u)) / float(grid.weights @ g)
    P = np.polynomial.Polynomial
    poly = P([1.0, 0.0, -1.0]) ** 2 * P([-c, 1.0])
    crit = [r.real for r in poly.deriv().roots() if abs(r.imag) < 1e-12 and -1.0 <= r.real <= 1.0]
    peak = max(abs(poly(v)) for v in crit + [-1.0, 1.0])
    return GridFunction(grid, sign * poly(u) / (peak * muI))


def _draw_radius(rng, kind, y0, m):
    u = math.exp(rng.uniform(math.log(0.01), 0.0))
    if kind == "H1":
        return u * rho(y0)
    if kind == "local":
        return u * m
    return u * 0.5 * y0


FAMILIES = ("indicator", "two-block", "wavelet")


def make_atom(interval, kind, alpha, family, sign=1.0, m=None):
    """Atom on ``interval`` with a profile from the fixed family, scaled to sup = 1/mu(I)."""
    if family not in FAMILIES:
        raise ValueError(f"family must be one of {FAMILIES}")
    lo, hi = interval.left, interval.right
    muI = mu(interval, alpha)
    if family == "indicator":
        prof = _indicator_profile(lo, hi, alpha, 1.0 / muI)
    elif family == "two-block":
        prof = _two_block(lo, hi, alpha, 1.0 / muI, sign)
    else:
        prof = _wavelet(lo, hi, alpha, muI, sign)
    return Atom(interval, kind, prof, m)


def random_atom(kind, region, seed, alpha, m=None, log_center=False):
    """Deterministic random atom with center in ``region``.

    Profiles: normalised indicator (only when no cancellation is required),
    a two-block Haar profile split at the mu-midpoint, or a smooth mean-zero
    polynomial wavelet.  Every draw passes `validate_atom`.
    """
    alpha = check_alpha(alpha)
    if kind not in KINDS:
        raise ValueError(f"kind must be one of {KINDS}")
    if kind == "local" and not (m is not None and m > 0):
        raise ValueError("local atoms need m > 0")
    rng = np.random.default_rng(seed)
    a_lo, a_hi = max(region.left, 1e-6), region.right
    if log_center:
        y0 = math.exp(rng.uniform(math.log(a_lo), math.log(a_hi)))
    else:
        y0 = rng.uniform(a_lo, a_hi)
    I = Interval(y0, _draw_radius(rng, kind, y0, m))
    probe = Atom(I, kind, GridFunction.zeros(Grid(np.array([I.left, I.right]), alpha)), m)
    families = FAMILIES[1:] if probe.needs_cancellation() else FAMILIES
    family = families[int(rng.integers(len(families)))]
    sign = 1.0 if rng.random() < 0.5 else -1.0
    return make_atom(I, kind, alpha, family, sign, m)


def dilate_atom(a, lam):
    """a_lam(x) = lam^(-alpha-1) a(x/lam): an atom on B(lam y0, lam r), scale lam m."""
    if not lam > 0:
        raise ValueError("dilation factor must be positive")
    g = a.profile.grid
    grid = Grid(g.breaks * lam, g.alpha, g.order)
    prof = GridFunction(grid, a.profile.values * lam ** (-(g.alpha + 1.0)))
    I = Interval(a.interval.center * lam, a.interval.radius * lam)
    return Atom(I, a.kind, prof, None if a.m is None else a.m * lam)


# -- telescoping -------------------------------------------------------------------


@dataclass(frozen=True)
class LocalBump:
    """psi_I for I = B(center, m): 1 on I, 0 off (4/3) I, C-infinity."""

    center: float
    m: float

    def __call__(self, x):
        return smooth_step((np.abs(np.asarray(x, dtype=float) - self.center) / self.m - 1.0) * 3.0)

    @property
    def lipschitz(self):
        # max |smooth_step'| = 2, attained at s = 1/2, times the 3/m chain factor.
        return 6.0 / self.m


def _chi_profile(I, alpha, height):
    return _indicator_profile(I.left, I.right, alpha, height)


def _normalised(term, I, kind, m):
    s = sup_norm(term)
    if s == 0.0:
        return None
    kappa = s * mu(I, term.alpha)
    return kappa, Atom(I, kind, term.scaled(1.0 / kappa), m)


def telescope_expand(a, bump):
    """Write psi_I a as sum kappa_i b_i with b_i local atoms at scale m = bump.m.

    With J = B(z0, r) the interval of ``a`` and sigma = integral of
    a (psi_I - psi_I(z0)) dmu, the terms are
      psi_I a - sigma chi_2J / mu(2J),
      sigma (chi_{2^i J}/mu(2^i J) - chi_{2^{i+1} J}/mu(2^{i+1} J)), i = 1..N-1,
      sigma chi_{2^N J}/mu(2^N J),
    where 2^(-N-1) m <= r < 2^(-N) m.  Returns (terms, sigma); zero terms are dropped.
    """
    m = bump.m
    J = a.interval
    r, z0 = J.radius, J.center
    alpha = a.alpha
    if not r < 0.25 * m:
        raise ValueError("telescope_expand needs r < m/4")
    if abs(z0 - bump.center) >= (4.0 / 3.0) * m + r:
        raise ValueError("support of the atom misses (4/3) I")
    N = int(math.floor(-math.log2(r / m)))
    if not (2.0 ** (-N - 1) * m <= r < 2.0 ** (-N) * m):
        N += 1 if r < 2.0 ** (-N - 1) * m else -1
    prof = a.profile
    # psi_I is not analytic where it leaves 0 or 1, so those points become
    # breaks; panels no wider than m/64 resolve it in between.
    kinks = bump.center + m * np.array([-4.0 / 3.0, -1.0, 1.0, 4.0 / 3.0])
    br = prof.breaks
    br = np.unique(np.concatenate([br, kinks[(kinks > br[0]) & (kinks < br[-1])]]))
    pieces = [np.linspace(lo, hi, max(1, int(math.ceil((hi - lo) / (m / 64.0)))) + 1)[:-1] for lo, hi in zip(br[:-1], br[1:])]
    fine = Grid(grade_to_zero(np.append(np.concatenate(pieces), br[-1])), alpha)
    av = prof(fine.nodes)
    sigma = float(fine.weights @ (av * (bump(fine.nodes) - bump(z0))))
    two_J = dilate(J, 2.0)
    grid0 = Grid(grade_to_zero(np.unique(np.concatenate([fine.breaks, [two_J.left, two_J.right]]))), alpha)
    v0 = np.where(
        (grid0.nodes > two_J.left) & (grid0.nodes < two_J.right), -sigma / mu(two_J, alpha), 0.0
    ) + prof(grid0.nodes) * bump(grid0.nodes)
    terms = []
    first = _normalised(GridFunction(grid0, v0), two_J, "local", m)
    if first is not None:
        terms.append(first)
    for i in range(1, N):
        inner, outer = dilate(J, 2.0**i), dilate(J, 2.0 ** (i + 1))
        g = Grid(grade_to_zero(np.unique([outer.left, inner.left, inner.right, outer.right])), alpha)
        x = g.nodes
        v = np.where((x > inner.left) & (x < inner.right), sigma / mu(inner, alpha), 0.0) - sigma / mu(outer, alpha)
        t = _normalised(GridFunction(g, v), outer, "local", m)
        if t is not None:
            terms.append(t)
    last_I = dilate(J, 2.0**N)
    if sigma != 0.0:
        terms.append(_normalised(_chi_profile(last_I, alpha, sigma / mu(last_I, alpha)), last_I, "local", m))
    return terms, sigma


def _rho_length(x):
    """Integral of 1/rho from 0 to x."""
    return x if x <= 1.0 else 1.0 + 0.5 * (x * x - 1.0)


def _rho_length_inv(v):
    return v if v <= 1.0 else math.sqrt(2.0 * (v - 1.0) + 1.0)


def split_to_h1(a):
    """Split an atom into H^1(X) atoms using the local scale rho.

    Atoms already valid as H^1 atoms come back unchanged with coefficient 1.
    Otherwise the interval is cut into pieces of equal rho-length in
    (3/4, 3/2], so each piece P has radius comparable to rho(c_P) and a chi_P
    is an H^1 atom without cancellation.
    """
    as_h1 = Atom(a.interval, "H1", a.profile)
    if validate_atom(as_h1).ok:
        return [(1.0, as_h1)]
    lo, hi = a.interval.left, a.interval.right
    v0, v1 = _rho_length(lo), _rho_length(hi)
    n = max(1, math.ceil((v1 - v0) / 1.5))
    cuts = [lo] + [_rho_length_inv(v0 + (v1 - v0) * k / n) for k in range(1, n)] + [hi]
    prof = a.profile
    out = []
    for c0, c1 in zip(cuts[:-1], cuts[1:]):
        br = prof.breaks
        inner = br[(br > c0) & (br < c1)]
        g = Grid(grade_to_zero(np.concatenate([[c0], inner, [c1]])), a.alpha)
        res = _normalised(GridFunction(g, prof(g.nodes)), Interval.from_endpoints(c0, c1), "H1", None)
        if res is None:
            continue
        rep = validate_atom(res[1])
        if not rep.ok:
            raise ValueError(f"piece [{c0}, {c1}] of the split is not an H^1 atom: {rep.violations}")
        out.append(res)
    return out


# -- decomposition -----------------------------------------------------------------


@dataclass
class AtomicDecomposition:
    """Pairs (lambda_j, a_j) with a reconstruction reference."""

    alpha: float
    terms: list
    target: dict = field(default_factory=dict)

    @property
    def coefficient_sum(self):
        return float(sum(abs(l) for l, _ in self.terms))

    def synthesize(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        for lam, a in self.terms:
            lo, hi = a.profile.breaks[0], a.profile.breaks[-1]
            sel = (x >= lo) & (x <= hi)
            if sel.any():
                out[sel] += lam * a.profile(x[sel])
        return out

    def to_json(self):
        doc = {
            "alpha": self.alpha,
            "target": self.target,
            "coefficient_sum": self.coefficient_sum,
            "atoms": [dict(a.to_dict(), coefficient=float(l), index=i) for i, (l, a) in enumerate(self.terms)],
        }
        return json.dumps(doc, sort_keys=True, indent=1)

    def profiles_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["atom", "x", "value"])
        for i, (_, a) in enumerate(self.terms):
            for x, v in zip(a.profile.grid.nodes, a.profile.values):
                w.writerow([i, repr(float(x)), repr(float(v))])
        return buf.getvalue()


def _sub_grid(grid, lo, hi):
    b = grid.breaks
    inner = b[(b > lo) & (b < hi)]
    return Grid(np.concatenate([[lo], inner, [hi]]), grid.alpha, grid.order)


def _haar(g, lo, hi, alpha, levels, grid, m, out, floor):
    """Expand g on [lo, hi] in dyadic martingale differences plus finest remainders.

    Appends local atoms to ``out`` and returns the mu-mean of g over [lo, hi].
    Finest means are refined once so each remainder integrates to zero to
    rounding; coarser means are mu-weighted averages of their children, and
    a difference is written through d = m_left - m_right so its cancellation
    is exact by construction.  Terms with sup below ``floor`` are dropped.
    """
    edges = np.linspace(lo, hi, 2**levels + 1)
    means = np.empty(2**levels)
    for i, (a, b) in enumerate(zip(edges[:-1], edges[1:])):
        sub = _sub_grid(grid, a, b)
        w = sub.weights
        r = g(sub.nodes)
        mq = float(w @ r) / w.sum()
        r = r - mq
        c = float(w @ r) / w.sum()
        r -= c
        means[i] = mq + c
        if np.max(np.abs(r)) > floor:
            res = _normalised(GridFunction(sub, r), Interval.from_endpoints(a, b), "local", m)
            if res is not None:
                out.append(res)
    for _ in range(levels):
        mus = mu_between(edges[:-1], edges[1:], alpha)
        parents = []
        for i in range(0, means.size, 2):
            a, c, b = edges[i], edges[i + 1], edges[i + 2]
            mu_l, mu_r = mus[i], mus[i + 1]
            mu_p = mu_l + mu_r
            d = means[i] - means[i + 1]
            if abs(d) > floor:
                g2 = Grid(grade_to_zero([a, c, b]), alpha)
                v = np.where(g2.nodes < c, mu_r * d / mu_p, -mu_l * d / mu_p)
                res = _normalised(GridFunction(g2, v), Interval.from_endpoints(a, b), "local", m)
                if res is not None:
                    out.append(res)
            parents.append((mu_l * means[i] + mu_r * means[i + 1]) / mu_p)
        means = np.asarray(parents)
        edges = edges[::2]
    return float(means[0])


def decompose_local(f, I, levels=5, floor=0.0):
    """Local atoms at scale m = radius of I for f supported in I.

    The mean term xi chi_I (uncancelled, r = m), dyadic Haar differences and
    finest mean-zero remainders, each pushed through `telescope_expand`
    with psi_I.  Every atom is supported in I, hence in 3I.
    Returns a list of (coefficient, Atom).
    """
    alpha = f.alpha
    supp = f.support()
    if supp is not None and (supp[0] < I.left - 1e-12 * I.right or supp[1] > I.right * (1 + 1e-12)):
        raise ValueError("f must be supported in I")
    m = I.radius
    br = f.breaks
    grid = _sub_grid(Grid(grade_to_zero(np.unique(np.concatenate([br, [I.left, I.right]]))), alpha, f.grid.order),
                     I.left, I.right)
    muI = mu(I, alpha)
    lam = float(grid.weights @ f(grid.nodes))
    xi = lam / muI
    local = []
    resid = lambda x: f(x) - xi * ((x > I.left) & (x < I.right))
    # The residual mean is zero up to rounding; folding it back keeps the sum exact.
    lam += muI * _haar(resid, I.left, I.right, alpha, levels, grid, m, local, floor)
    if lam != 0.0:
        local.append((lam, Atom(I, "local", _chi_profile(I, alpha, 1.0 / muI), m)))
    bump = LocalBump(I.center, m)
    out = []
    for kappa, atom in local:
        if atom.interval.radius < 0.25 * m:
            expanded, _ = telescope_expand(atom, bump)
        else:
            expanded = [(1.0, atom)]
        out.extend((kappa * k2, b) for k2, b in expanded)
    return out


def decompose(f, alpha=None, levels=5, overlap_bound=8):
    """Constructive decomposition of a compactly supported f into H^1(X) atoms.

    For each piece eta_n f of a partition of unity over the cover I_n: the
    mean term (one uncancelled atom on I_n), dyadic Haar differences and
    finest-level mean-zero remainders (local atoms at scale rho(z_n)), the
    telescoping localisation, and finally the split into H^1(X) atoms.
    """
    alpha = check_alpha(f.alpha if alpha is None else alpha)
    if not f.tail.compact:
        raise ValueError("decompose needs a compactly supported input")
    supp = f.support()
    if supp is None:
        return AtomicDecomposition(alpha, [], {"l1": 0.0})
    a_s, b_s = supp
    cover = build_cover(max(b_s, 1.5), alpha, overlap_bound)
    pou = partition_of_unity(cover)
    pieces_br = [f.breaks]
    active = []
    for n, I in enumerate(cover.intervals):
        if I.right <= a_s or I.left >= b_s:
            continue
        active.append(n)
        pieces_br.append([I.left, I.right])
    common = Grid(grade_to_zero(np.unique(np.concatenate([np.ravel(p) for p in pieces_br]))), alpha, f.grid.order)
    fx = f(common.nodes)
    floor = 1e-14 * float(np.max(np.abs(fx)))
    etas = pou.weights(common.nodes)
    terms = []
    for n in active:
        if not np.any(etas[n] * fx):
            continue
        piece = GridFunction(common, etas[n] * fx)
        for kappa, atom in decompose_local(piece, cover.intervals[n], levels, floor):
            for k3, h in split_to_h1(atom):
                terms.append((kappa * k3, h))
    for i, (_, h) in enumerate(terms):
        rep = validate_atom(h)
        if not rep.ok:
            raise RuntimeError(f"decompose produced an invalid atom #{i}: {rep.violations}")
    return AtomicDecomposition(alpha, terms, {"support": [a_s, b_s]})


def atomic_norm_upper(f, alpha=None, levels=5):
    """Sum |lambda_j| of the constructive decomposition: an upper bound for the atomic norm."""
    return decompose(f, alpha, levels).coefficient_sum
