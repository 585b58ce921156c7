import itertools
import random

import pytest

import anchorcalc as ac
from anchorcalc import forms as fo

E2, L2 = fo.euclidean(2), fo.lorentzian(2)
E4, L4 = fo.euclidean(4), fo.lorentzian(4)
SPACES = (E2, L2, E4, L4)


def rand_form(space, grade, seed):
    """Random form with polynomial coordinate coefficients and occasional
    field jets."""
    rng = random.Random((space.signature, grade, seed).__repr__())
    comps = {}
    for idx in itertools.combinations(range(space.n), grade):
        e = ac.rational(rng.randint(-3, 3))
        for m in range(space.n):
            if rng.random() < 0.4:
                e = e + ac.rational(rng.randint(-2, 2)) * space.coord_expr(m)
        if rng.random() < 0.4:
            e = e * ac.jet("u" + "".join(map(str, idx)))
        comps[idx] = e
    return fo.Form(space, grade, comps)


def rand_vector(space, seed):
    rng = random.Random(("vec", space.signature, seed).__repr__())
    comps = []
    for _ in range(space.n):
        e = ac.rational(rng.randint(-2, 2))
        for m in range(space.n):
            if rng.random() < 0.4:
                e = e + ac.rational(rng.randint(-2, 2)) * space.coord_expr(m)
        comps.append(e)
    return fo.SpacetimeVector(space, comps)


# --- wedge ------------------------------------------------------------------


def test_wedge_antisymmetry_basis():
    dx0, dx1 = fo.basis_form(L2, 0), fo.basis_form(L2, 1)
    assert fo.wedge(dx0, dx1) == fo.wedge(dx1, dx0).scale(-1)


def test_wedge_odd_square_zero():
    a = fo.basis_form(E4, 0) + fo.basis_form(E4, 2)
    assert fo.wedge(a, a).is_zero()


def test_wedge_hand_expansion():
    dx0, dx1 = fo.basis_form(E2, 0), fo.basis_form(E2, 1)
    result = fo.wedge(dx0 + dx1, dx0 - dx1)
    assert result == fo.wedge(dx0, dx1).scale(-2)


def test_wedge_graded_commutativity_random():
    for ga, gb in ((1, 1), (1, 2), (2, 2), (1, 3)):
        for s in range(5):
            a, b = rand_form(E4, ga, s), rand_form(E4, gb, s + 100)
            sign = (-1) ** (ga * gb)
            assert fo.wedge(a, b) == fo.wedge(b, a).scale(sign)


def test_wedge_associativity_random():
    for s in range(5):
        a, b, c = rand_form(E4, 1, s), rand_form(E4, 1, s + 7), rand_form(E4, 2, s + 9)
        assert fo.wedge(fo.wedge(a, b), c) == fo.wedge(a, fo.wedge(b, c))


def test_wedge_grade_overflow():
    with pytest.raises(fo.FormError):
        fo.wedge(rand_form(E2, 1, 0), rand_form(E2, 2, 0))


# --- exterior derivative ----------------------------------------------------


def test_d_basis_example():
    a = fo.Form(L2, 1, {(1,): ac.indep("x0")})
    assert fo.exterior_d(a) == fo.basis_form(L2, 0, 1)


def test_d_square_zero_everywhere():
    for space in (E2, L2, E4, L4):
        for grade in range(space.n - 1):
            for s in range(50):
                w = rand_form(space, grade, s)
                assert fo.exterior_d(fo.exterior_d(w)).is_zero()


def test_d_of_field_one_form():
    F = fo.field_form(L2, "F", 1)
    d = fo.exterior_d(F)
    expected = ac.canonicalize(ac.jet("F1", {"x0": 1}) - ac.jet("F0", {"x1": 1}))
    assert ac.canonicalize(d.components[(0, 1)]) == expected


def test_d_grade_n_errors():
    with pytest.raises(fo.FormError):
        fo.exterior_d(fo.volume_form(E2))


# --- hodge ------------------------------------------------------------------


def test_hodge_of_one():
    assert fo.hodge(fo.scalar(E4, 1)) == fo.volume_form(E4)
    assert fo.hodge(fo.scalar(L4, 1)) == fo.volume_form(L4)


def test_hodge_n2_lorentz_convention():
    # frozen golden values of the convention
    assert fo.hodge(fo.basis_form(L2, 0)) == fo.basis_form(L2, 1).scale(-1)
    assert fo.hodge(fo.basis_form(L2, 1)) == fo.basis_form(L2, 0).scale(-1)
    # forced by the convention: ** = +1 on middle forms
    a = rand_form(L2, 1, 3)
    assert fo.hodge(fo.hodge(a)) == a


def test_hodge_euclidean_four_middle():
    a = rand_form(E4, 2, 1)
    assert fo.hodge(fo.hodge(a)) == a


def test_double_hodge_sign_table():
    for space in SPACES:
        for grade in range(space.n + 1):
            w = rand_form(space, grade, grade)
            s = fo.double_hodge_sign(space, grade)
            assert fo.hodge(fo.hodge(w)) == w.scale(s)


# --- interior product and Lie derivative ------------------------------------


def test_interior_basis():
    assert fo.interior(fo.translation(L2, 0), fo.basis_form(L2, 0, 1)) == fo.basis_form(L2, 1)
    xi = fo.SpacetimeVector(L2, [ac.ONE, ac.ONE])
    assert fo.interior(xi, fo.basis_form(L2, 0)) == fo.scalar(L2, 1)


def test_interior_squares_to_zero():
    for space in (E2, E4):
        for grade in range(2, space.n + 1):
            for s in range(50):
                xi = rand_vector(space, s)
                w = rand_form(space, grade, s)
                assert fo.interior(xi, fo.interior(xi, w)).is_zero()


def test_interior_grade_zero_errors():
    with pytest.raises(fo.FormError):
        fo.interior(fo.translation(E2, 0), fo.scalar(E2, 1))


def test_lie_derivative_translation():
    a = fo.Form(L2, 1, {(1,): ac.indep("x0")})
    assert fo.lie_derivative(fo.translation(L2, 0), a) == fo.basis_form(L2, 1)


def test_cartan_identities_random():
    # L = i d + d i by construction; check [L, d] = 0 on 50 samples per
    # grade per dimension and grade preservation
    for space in (E2, L2, E4, L4):
        for grade in range(space.n + 1):
            for s in range(50):
                w = rand_form(space, grade, s)
                xi = rand_vector(space, s + 3)
                lie = fo.lie_derivative(xi, w)
                assert lie.grade == grade
                if grade < space.n:
                    assert fo.exterior_d(lie) == fo.lie_derivative(xi, fo.exterior_d(w))


def test_lie_derivative_volume_rotation():
    assert fo.lie_derivative(fo.rotation(E2, 0, 1), fo.volume_form(E2)).is_zero()


# --- projections and pairings -----------------------------------------------


def test_selfdual_projection_properties():
    H = fo.field_form(L2, "H", 1)
    plus, minus = fo.selfdual_project(H)
    assert fo.hodge(plus) == plus
    assert fo.hodge(minus) == minus.scale(-1)
    assert (plus + minus) == H
    # idempotence and complementarity
    pp, pm = fo.selfdual_project(plus)
    assert pp == plus and pm.is_zero()


def test_selfdual_reassembly_of_basis():
    dx0 = fo.basis_form(L2, 0)
    plus, minus = fo.selfdual_project(dx0)
    assert (plus + minus) == dx0


def test_selfdual_isotropy_and_cross_pairing():
    dx0 = fo.basis_form(L2, 0)
    plus, minus = fo.selfdual_project(dx0)
    assert fo.pairing_density(plus, plus).is_zero()
    assert fo.pairing_density(minus, minus).is_zero()
    # hand value: plus ^ *minus = -1/2 vol
    assert fo.pairing_density(plus, minus) == fo.volume_form(L2).scale(
        ac.rational(-1, 2)
    )


def test_selfdual_preconditions():
    with pytest.raises(fo.FormError):
        fo.selfdual_project(rand_form(E2, 1, 0))  # euclidean
    with pytest.raises(fo.FormError):
        fo.selfdual_project(rand_form(L4, 2, 0))  # n = 4 is not 4k+2
    with pytest.raises(fo.FormError):
        fo.selfdual_project(fo.scalar(L2, 1))  # wrong grade


def test_pairing_symmetric_and_diagonal():
    assert fo.pairing_density(fo.basis_form(E2, 1), fo.basis_form(E2, 1)) == fo.volume_form(E2)
    for s in range(5):
        a, b = rand_form(L4, 2, s), rand_form(L4, 2, s + 50)
        assert fo.pairing_density(a, b) == fo.pairing_density(b, a)
    with pytest.raises(fo.FormError):
        fo.pairing_density(rand_form(E2, 1, 0), rand_form(E2, 2, 0))


# --- killing classification -------------------------------------------------


def test_killing_translations_rotations():
    for space in SPACES:
        for mu in range(space.n):
            assert fo.conformal_killing_check(fo.translation(space, mu), space) == "killing"
        for mu, nu in itertools.combinations(range(space.n), 2):
            assert fo.conformal_killing_check(fo.rotation(space, mu, nu), space) == "killing"


def test_dilation_is_conformal():
    for space in SPACES:
        assert fo.conformal_killing_check(fo.dilation(space), space) == "conformal"


def test_neither_case():
    bad = fo.SpacetimeVector(L4, [L4.coord_expr(1) ** 2, ac.ZERO, ac.ZERO, ac.ZERO])
    assert fo.conformal_killing_check(bad, L4) == "neither"


def test_form_validation():
    with pytest.raises(fo.FormError):
        fo.Form(E2, 1, {(0, 1): ac.ONE})
    with pytest.raises(fo.FormError):
        fo.Form(E2, 2, {(1, 0): ac.ONE})
    with pytest.raises(fo.FormError):
        fo.Form(E2, 1, {(5,): ac.ONE})
