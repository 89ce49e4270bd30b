import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from laguerre_h1 import atoms as at
from laguerre_h1.grid import Grid, GridFunction, Tail, grade_to_zero
from laguerre_h1.measure import Interval, dilate, mu, rho


def _normalised_indicator(I, alpha):
    return at.make_atom(I, "H1", alpha, "indicator")


# -- validation -----------------------------------------------------------------------


def test_indicator_at_critical_scale_is_valid():
    rep = at.validate_atom(_normalised_indicator(Interval(2.0, 0.5), 1.0))
    assert rep.ok, rep.violations
    assert rep.measured["sup_times_mu"] == pytest.approx(1.0, rel=1e-12)


def test_small_indicator_violates_cancellation():
    rep = at.validate_atom(_normalised_indicator(Interval(2.0, 0.05), 1.0))
    assert not rep.ok
    assert [v["axiom"] for v in rep.violations] == ["cancellation"]
    assert rep.violations[0]["measured"] == pytest.approx(1.0, rel=1e-10)


@pytest.mark.parametrize("kind", at.KINDS)
def test_two_block_valid_for_all_kinds(kind):
    a = at.make_atom(Interval(1.0, 0.1), kind, 1.0, "two-block", m=0.4)
    if kind != "local":
        a = at.Atom(a.interval, kind, a.profile)
    assert at.validate_atom(a).ok


def test_size_radius_and_support_violations():
    I = Interval(2.0, 0.5)
    a = _normalised_indicator(I, 1.0)
    big = at.Atom(I, "H1", a.profile.scaled(1.01))
    assert [v["axiom"] for v in at.validate_atom(big).violations] == ["size"]
    wide = at.make_atom(Interval(2.0, 0.6), "H1", 1.0, "indicator")
    assert "radius" in [v["axiom"] for v in at.validate_atom(wide).violations]
    shifted = at.Atom(Interval(1.9, 0.5), "H1", a.profile)
    assert "support" in [v["axiom"] for v in at.validate_atom(shifted).violations]


def test_local_atom_needs_m():
    with pytest.raises(ValueError):
        at.Atom(Interval(1.0, 0.1), "local", _normalised_indicator(Interval(1.0, 0.1), 1.0).profile)
    with pytest.raises(ValueError):
        at.Atom(Interval(1.0, 0.1), "other", _normalised_indicator(Interval(1.0, 0.1), 1.0).profile)


def test_sup_norm_sees_between_nodes():
    g = Grid(np.array([0.0, 1.0]), 1.0, order=4)
    f = GridFunction(g, np.cos(40 * g.nodes))
    assert at.sup_norm(f) >= np.max(np.abs(f.values))


# -- random atoms ---------------------------------------------------------------------


def test_random_atom_respects_rho():
    region = Interval(10.0, 0.5)
    for seed in range(50):
        a = at.random_atom("H1", region, seed, 1.0)
        assert a.interval.radius <= rho(a.interval.center) * (1 + 1e-12)
        assert a.interval.radius <= 0.1 * (1 + 1e-12) * 10.5 / a.interval.center


def test_random_atom_deterministic():
    region = Interval(5.0, 4.0)
    a, b = at.random_atom("local", region, 17, 1.5, m=0.3), at.random_atom("local", region, 17, 1.5, m=0.3)
    assert a.interval == b.interval
    assert np.array_equal(a.profile.values, b.profile.values)
    assert a.profile.to_text() == b.profile.to_text()


def test_random_atoms_always_validate():
    region = Interval.from_endpoints(0.01, 50.0)
    bad = []
    for kind in at.KINDS:
        for seed in range(334):
            a = at.random_atom(kind, region, seed, 1.0, m=0.7, log_center=True)
            if not at.validate_atom(a).ok:
                bad.append((kind, seed))
    assert not bad


def test_random_atom_validation_errors():
    with pytest.raises(ValueError):
        at.random_atom("local", Interval(1.0, 0.5), 0, 1.0)
    with pytest.raises(ValueError):
        at.random_atom("bogus", Interval(1.0, 0.5), 0, 1.0)
    with pytest.raises(ValueError):
        at.make_atom(Interval(1.0, 0.5), "H1", 1.0, "sawtooth")


@settings(max_examples=30, deadline=None)
@given(st.floats(0.2, 5.0), st.integers(0, 10_000))
def test_dilate_atom_preserves_validity(lam, seed):
    a = at.random_atom("local", Interval(2.0, 1.5), seed, 1.0, m=0.5)
    b = at.dilate_atom(a, lam)
    assert at.validate_atom(b).ok
    assert b.m == pytest.approx(0.5 * lam)
    assert b.profile.integral() == pytest.approx(a.profile.integral(), abs=1e-12)


# -- telescoping ----------------------------------------------------------------------


def _telescope_input(seed):
    rng = np.random.default_rng(seed)
    m = 10 ** rng.uniform(-1, 1)
    y0 = 10 ** rng.uniform(-1, 1)
    r = m * math.exp(rng.uniform(math.log(0.01), math.log(0.24)))
    z0 = max(abs(y0 + rng.uniform(-4 / 3, 4 / 3) * m), r / 2)
    a = at.make_atom(Interval(z0, r), "local", 1.0, ["two-block", "wavelet"][seed % 2], m=m)
    return a, at.LocalBump(y0, m)


@pytest.mark.parametrize("seed", range(12))
def test_telescope_reconstructs_and_bounds_sigma(seed):
    a, bump = _telescope_input(seed)
    terms, sigma = at.telescope_expand(a, bump)
    J = a.interval
    breaks = np.concatenate([a.profile.breaks] + [b.profile.breaks for _, b in terms])
    x = np.linspace(max(J.center - 8 * bump.m, 1e-6), J.center + 8 * bump.m, 3001)
    x = x[np.min(np.abs(x[:, None] - breaks[None, :]), axis=1) > 1e-9]
    rec = sum(k * b.profile(x) for k, b in terms)
    assert np.max(np.abs(rec - bump(x) * a.profile(x))) * mu(J, 1.0) < 1e-9
    assert abs(sigma) <= (bump.lipschitz + 1.0) * J.radius
    for _, b in terms:
        assert at.validate_atom(b).ok
        assert b.kind == "local" and b.m == bump.m


def test_telescope_sigma_matches_direct_quadrature():
    from scipy import integrate

    a, bump = _telescope_input(3)
    _, sigma = at.telescope_expand(a, bump)
    z0 = a.interval.center
    br = a.profile.breaks
    ref = sum(integrate.quad(lambda z: a.profile(z) * (bump(z) - bump(z0)) * z, lo, hi, epsabs=1e-15, limit=200)[0]
              for lo, hi in zip(br[:-1], br[1:]))
    assert sigma == pytest.approx(ref, abs=1e-12 / mu(a.interval, 1.0))


def test_telescope_rejects_large_radius():
    a = at.make_atom(Interval(2.0, 0.4), "local", 1.0, "two-block", m=1.0)
    with pytest.raises(ValueError):
        at.telescope_expand(a, at.LocalBump(2.0, 1.0))


def test_local_bump_shape():
    b = at.LocalBump(3.0, 0.6)
    assert b(3.0) == 1.0 and b(3.6) == 1.0 and b(3.0 + 0.8 + 1e-9) == 0.0
    x = np.linspace(1.5, 4.5, 30001)
    slope = np.max(np.abs(np.diff(b(x)) / np.diff(x)))
    assert slope <= b.lipschitz * (1 + 1e-6)


# -- split and decomposition ----------------------------------------------------------


def test_split_to_h1_of_large_indicator():
    I = Interval(3.0, 2.0)
    a = at.Atom(I, "local", at.make_atom(I, "local", 1.0, "indicator", m=2.0).profile, 2.0)
    parts = at.split_to_h1(a)
    assert len(parts) > 1
    x = np.linspace(1.01, 4.99, 2000)
    total = sum(k * b.profile(x) for k, b in parts)
    assert np.allclose(total, a.profile(x), rtol=1e-12)
    for _, b in parts:
        assert b.kind == "H1" and at.validate_atom(b).ok


def test_split_keeps_valid_h1_atom():
    a = at.make_atom(Interval(2.0, 0.5), "local", 1.0, "indicator", m=0.5)
    parts = at.split_to_h1(a)
    assert len(parts) == 1 and parts[0][0] == 1.0


def _smooth(c, w, alpha=1.0):
    from laguerre_h1.kernels import cutoff_phi

    return GridFunction.from_callable(lambda x: np.cos(3 * x) * cutoff_phi((x - c) / (0.5 * w)),
                                      np.linspace(c - w, c + w, 17), alpha, tail=Tail(True))


@pytest.mark.parametrize("c,w", [(0.5, 0.4), (2.0, 0.8), (4.0, 0.4)])
def test_decompose_roundtrip(c, w):
    f = _smooth(c, w)
    d = at.decompose(f)
    fine = f.grid.refined(2)
    err = fine.weights @ np.abs(d.synthesize(fine.nodes) - f(fine.nodes))
    l1 = fine.weights @ np.abs(f(fine.nodes))
    assert err < 1e-6 * l1
    assert all(at.validate_atom(a).ok for _, a in d.terms)


def test_decompose_single_atom_has_bounded_norm():
    a = at.make_atom(Interval(1.0, 0.1), "H1", 1.0, "two-block")
    f = GridFunction(a.profile.grid, a.profile.values, Tail(True))
    assert at.atomic_norm_upper(f) <= 20.0


def test_atomic_norm_scaling_and_zero():
    f = _smooth(2.0, 0.8)
    two = GridFunction(f.grid, 2 * f.values, f.tail)
    assert at.atomic_norm_upper(two) == pytest.approx(2 * at.atomic_norm_upper(f), rel=1e-12)
    assert at.atomic_norm_upper(GridFunction(f.grid, 0 * f.values, f.tail)) == 0.0


def test_decompose_rejects_noncompact():
    f = _smooth(2.0, 0.8)
    with pytest.raises(ValueError):
        at.decompose(GridFunction(f.grid, f.values, Tail(False, 3.0, 1.0)))


def test_decompose_local_supports_in_3I():
    f = _smooth(2.0, 0.5)
    I = Interval(2.0, 0.5)
    big = dilate(I, 3.0)
    terms = at.decompose_local(f, I)
    assert terms
    for _, a in terms:
        assert big.left - 1e-12 <= a.interval.left and a.interval.right <= big.right + 1e-12
        assert a.kind == "local" and at.validate_atom(a).ok


def test_decomposition_serialises():
    f = _smooth(1.0, 0.4)
    d = at.decompose(f)
    doc = json.loads(d.to_json())
    assert len(doc["atoms"]) == len(d.terms)
    assert doc["coefficient_sum"] == pytest.approx(d.coefficient_sum)
    assert d.profiles_csv().startswith("atom,x,value\n")
