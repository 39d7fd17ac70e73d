import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from microcasimir.kernels import (
    RETARDED_C6,
    GeometryError,
    Triangle,
    g2,
    g3,
    pair_energy,
    retarded_geometry,
    triplet_energy,
    u2_full,
    u2_nonretarded,
    u2_retarded,
    u3_full,
    u3_nonretarded,
    u3_retarded,
)
from microcasimir.material import DomainError, DrudeMaterial, PerfectConductor, load_material
from microcasimir.quadrature import QuadratureSpec, integrate_semi_infinite

PC = PerfectConductor()
TIGHT = QuadratureSpec(rel_tol=1e-11)


def random_triangles(n, seed=3):
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < n:
        a, b, c = rng.uniform(0.2, 5.0, 3)
        if a < b + c and b < a + c and c < a + b:
            out.append(Triangle(a, b, c))
    return out


def test_g2_values():
    assert g2(0.0) == 3.0
    assert g2(1.0) == pytest.approx(17 * math.exp(-2), rel=1e-15)
    with pytest.raises(DomainError):
        g2(-1.0)


def test_g2_integral_gives_retarded_constant():
    r = integrate_semi_infinite(g2, TIGHT)
    assert r.value == pytest.approx(23 / 4, rel=1e-12)
    assert RETARDED_C6 == pytest.approx(r.value / math.pi, rel=1e-12)


def test_g3_static_limit_is_atm_bracket():
    t = Triangle(1.0, 1.3, 1.7)
    ca, cb, cc = t.cosines
    assert g3(0, 0, 0, ca, cb, cc) == pytest.approx(3 * (1 + 3 * ca * cb * cc), rel=1e-14)
    with pytest.raises(DomainError):
        g3(-1, 0, 0, ca, cb, cc)


@pytest.mark.parametrize("sides", [(1, 1, 1), (1, 1.5, 2), (2, 3, 4.9), (1, 1, 1.999)])
def test_retarded_geometry_matches_frequency_integral(sides):
    t = Triangle(*sides)
    a, b, c = t.sides
    r = integrate_semi_infinite(lambda x: g3(a * x, b * x, c * x, *t.cosines), TIGHT)
    assert r.value / (a * b * c) ** 3 == pytest.approx(4 * retarded_geometry(a, b, c), rel=1e-9)


def test_equilateral_closed_form():
    assert retarded_geometry(1.0, 1.0, 1.0) == pytest.approx(316 / 243, rel=1e-14)


def test_triangle_validation():
    with pytest.raises(GeometryError):
        Triangle(1, 1, 3)
    with pytest.raises(GeometryError):
        Triangle(0, 1, 1)
    Triangle(1, 1, 2)  # collinear is allowed


# -- (a) / (b): perfect conductor, full integral equals the retarded form ---------

@pytest.mark.parametrize("r", [0.1, 1.0, 10.0])
def test_u2_full_perfect_conductor_is_retarded(r):
    full = u2_full(PC, r, TIGHT)
    ret = u2_retarded(1.0, r)
    assert full.converged
    assert full.value == pytest.approx(ret.value, rel=1e-9)


def test_u3_full_perfect_conductor_is_retarded_on_random_triangles():
    for t in random_triangles(50):
        full = u3_full(PC, t, TIGHT)
        ret = u3_retarded(1.0, t)
        assert full.converged
        assert full.value == pytest.approx(ret.value, rel=1e-8, abs=10 * full.value_error), t


# -- (c): permutation symmetry ---------------------------------------------------

sides_st = st.floats(0.1, 10.0)


@settings(max_examples=200, deadline=None)
@given(sides_st, sides_st, sides_st)
def test_u3_permutation_symmetry(a, b, c):
    if not (a < b + c and b < a + c and c < a + b):
        return
    ref = u3_retarded(1.0, Triangle(a, b, c)).value
    gold = DrudeMaterial(0.05, 0.0004)
    ref_nr = u3_nonretarded(gold, Triangle(a, b, c)).value
    for p in itertools.permutations((a, b, c)):
        t = Triangle(*p)
        assert u3_retarded(1.0, t).value == pytest.approx(ref, rel=1e-12)
        assert u3_nonretarded(gold, t).value == pytest.approx(ref_nr, rel=1e-12)


# -- (d): scaling laws ----------------------------------------------------------

@settings(max_examples=100, deadline=None)
@given(st.floats(0.1, 10.0), st.floats(0.5, 4.0))
def test_two_body_scaling(r, k):
    assert u2_retarded(1.0, k * r).value == pytest.approx(u2_retarded(1.0, r).value * k ** -7, rel=1e-12)
    m = DrudeMaterial(0.05)
    assert u2_nonretarded(m, k * r).value == pytest.approx(u2_nonretarded(m, r).value * k ** -6, rel=1e-12)


@settings(max_examples=100, deadline=None)
@given(sides_st, sides_st, sides_st, st.floats(0.5, 4.0))
def test_three_body_scaling(a, b, c, k):
    if not (a < b + c and b < a + c and c < a + b):
        return
    t = Triangle(a, b, c)
    ret, ret_k = u3_retarded(1.0, t), u3_retarded(1.0, t.scaled(k))
    assert ret_k.coefficient == pytest.approx(ret.coefficient, rel=1e-11)
    assert ret_k.value == pytest.approx(ret.value * k ** -10, rel=1e-11)
    m = DrudeMaterial(0.05)
    assert u3_nonretarded(m, t.scaled(k)).value == pytest.approx(u3_nonretarded(m, t).value * k ** -9, rel=1e-11)


def test_radius_scaling():
    assert u2_retarded(2.0, 1.0).value == pytest.approx(64 * u2_retarded(1.0, 1.0).value, rel=1e-14)
    t = Triangle(1, 1, 1)
    assert u3_retarded(2.0, t).value == pytest.approx(512 * u3_retarded(1.0, t).value, rel=1e-14)


# -- (e): signs -----------------------------------------------------------------

def test_signs():
    m = DrudeMaterial(0.05, 0.0004)
    eq, col = Triangle(1, 1, 1), Triangle(1, 1, 2)
    assert u2_retarded(1, 1).coefficient < 0
    assert u2_nonretarded(m, 1).coefficient < 0
    assert u3_retarded(1, eq).coefficient > 0
    assert u3_nonretarded(m, eq).coefficient > 0
    assert u3_retarded(1, col).coefficient < 0
    assert u3_nonretarded(m, col).coefficient < 0


# -- regimes with a real metal --------------------------------------------------

def test_drude_full_interpolates_between_limits():
    m = DrudeMaterial(1.0, 0.0)
    lp = m.plasma_wavelength
    near, far = lp / 100, lp * 100
    assert u2_full(m, near, TIGHT).value / u2_nonretarded(m, near).value == pytest.approx(1.0, abs=2e-3)
    assert u2_full(m, far, TIGHT).value / u2_retarded(1, far).value == pytest.approx(1.0, abs=2e-3)
    t = Triangle(1, 1.2, 1.5)
    assert u3_full(m, t.scaled(near), TIGHT).value / u3_nonretarded(m, t.scaled(near)).value == \
        pytest.approx(1.0, abs=2e-3)
    assert u3_full(m, t.scaled(far), TIGHT).value / u3_retarded(1, t.scaled(far)).value == \
        pytest.approx(1.0, abs=2e-3)


def test_damping_correction_first_order():
    m0, m1 = DrudeMaterial(1.0, 0.0), DrudeMaterial(1.0, 0.002)
    r = 1e-3
    shift = 1 - u2_full(m1, r, TIGHT).value / u2_full(m0, r, TIGHT).value
    expected = 1 - u2_nonretarded(m1, r).value / u2_nonretarded(m0, r).value
    assert shift == pytest.approx(expected, rel=1e-2)


def test_auto_regime_for_gold():
    gold = load_material("gold")
    res = pair_energy(gold, 1.0, "auto")
    assert res.regime == "nonret"
    assert res.metadata["auto_regime"] == "nonret"
    assert pair_energy(gold, 1e4, "auto").regime == "ret"
    assert pair_energy(gold, 50.0, "auto").regime == "full"
    assert pair_energy(PC, 1e-3, "auto").regime == "ret"
    assert triplet_energy(gold, Triangle(1, 1, 1), "auto").regime == "nonret"


def test_outside_regime_flag():
    m = DrudeMaterial(1.0)
    assert u2_nonretarded(m, 10.0).metadata["outside_regime"]
    assert not u2_nonretarded(m, 1e-3).metadata["outside_regime"]


def test_bad_inputs():
    with pytest.raises(DomainError):
        u2_retarded(1.0, 0.0)
    with pytest.raises(ValueError):
        pair_energy(PC, 1.0, "sideways")
    with pytest.raises(TypeError):
        u2_nonretarded(PC, 1.0)
