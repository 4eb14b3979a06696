import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from gravdip.errors import ContractError, ValidityError
from gravdip.model import PhysicalParams, derive_scales
from gravdip.pn_potential import (
    CouplingTable,
    CouplingTerm,
    PNOrder,
    classical_cross_sum,
    com_frame_check,
    expand_cross_coupling,
    pn_potential_classical,
    quadratic_mode_form,
    taylor_reference,
)

# natural units keep every PN order the same size
UNIT = PhysicalParams(G=1.0, c=1.0, hbar=1e-12, m=1.0, d=1.0, omega_m=1.0)


def test_term_count_by_order():
    table = expand_cross_coupling(PhysicalParams())
    assert len(table) == 19
    counts = {o: sum(t.pn_order is o for t in table) for o in PNOrder}
    assert counts == {PNOrder.PN0: 6, PNOrder.PN1: 12, PNOrder.PN2: 1}


def test_frozen_coefficients():
    p = PhysicalParams()
    G, c, m, d = p.G, p.c, p.m, p.d
    table = expand_cross_coupling(p)
    expected = {
        "xA xB": 2 * G * m**2 / d**3,
        "xA^2 xB^2": -6 * G * m**2 / d**5,
        "pA pB": 4 * G / (c**2 * d),
        "pA pB xA xB": -8 * G / (c**2 * d**3),
        "pA^2 xB": 1.5 * G / (c**2 * d**2),
        "pB^2 xA^2": -1.5 * G / (c**2 * d**3),
        "pA^2 pB^2": -2.25 * G / (c**4 * m**2 * d),
    }
    for label, value in expected.items():
        assert table.term(label).coeff == pytest.approx(value, rel=1e-15), label


def test_filters():
    p = PhysicalParams()
    assert {t.label for t in expand_cross_coupling(p, 2, PNOrder.PN1)} == {"xA xB", "pA pB"}
    assert len(expand_cross_coupling(p, 4, PNOrder.PN0)) == 6
    assert len(expand_cross_coupling(p, 3, "PN2")) == 8
    with pytest.raises(ValidityError):
        expand_cross_coupling(p, 5)


@pytest.mark.parametrize("lam", [1e-2, 5e-3, 2.5e-3])
def test_table_matches_taylor_reference(lam):
    table = expand_cross_coupling(UNIT)
    args = (0.7 * lam, -0.4 * lam, 0.9 * lam, 0.3 * lam)
    ref = taylor_reference(UNIT, *args)
    got = classical_cross_sum(table, *args)
    # first neglected terms are fifth order in the small quantities
    assert abs(got - ref) < 50 * lam**5
    assert abs(ref) > lam**2 * 1e-2


@given(
    st.floats(-1e-3, 1e-3),
    st.floats(-1e-3, 1e-3),
    st.floats(-1e-3, 1e-3),
    st.floats(-1e-3, 1e-3),
)
def test_taylor_residual_is_fifth_order(xa, xb, pa, pb):
    table = expand_cross_coupling(UNIT)
    resid = classical_cross_sum(table, xa, xb, pa, pb) - taylor_reference(UNIT, xa, xb, pa, pb)
    assert abs(resid) < 100 * 1e-15 + 1e-13 * max(abs(xa), abs(xb), abs(pa), abs(pb)) ** 2


@given(st.floats(1e-3, 1e3), st.floats(0.1, 10.0))
def test_com_frame_reduction(p, r):
    full = pn_potential_classical(UNIT, p, -p, r)
    assert full == pytest.approx(com_frame_check(UNIT, p, r), rel=1e-12)


def test_quadratic_mode_form_gives_g_pm():
    p = PhysicalParams(omega_m=3e3)
    s = derive_scales(p)
    g_minus, g_plus = quadratic_mode_form(expand_cross_coupling(p, 2, PNOrder.PN1))
    assert g_minus == pytest.approx(s.g_minus, rel=1e-12)
    assert g_plus == pytest.approx(s.g_plus, rel=1e-12)


def test_quadratic_mode_form_rejects_higher_terms():
    with pytest.raises(ContractError):
        quadratic_mode_form(expand_cross_coupling(PhysicalParams()))


@pytest.mark.parametrize(
    "powers",
    [(1, 0, 0, 0), (2, 0, 1, 0), (3, 2, 0, 0), (0, 0, 0, 2), (-1, 1, 1, 1)],
)
def test_invalid_terms_rejected(powers):
    with pytest.raises(ContractError):
        CouplingTerm(*powers, coeff=1.0, pn_order=PNOrder.PN0)


def test_json_round_trip():
    table = expand_cross_coupling(PhysicalParams(m=2e-15))
    again = CouplingTable.from_json(table.to_json())
    assert again == table


def test_labels_are_unique():
    labels = [t.label for t in expand_cross_coupling(PhysicalParams())]
    assert len(set(labels)) == len(labels)


def test_nonpositive_separation():
    with pytest.raises(ValidityError):
        pn_potential_classical(UNIT, 0.0, 0.0, 0.0)
    with pytest.raises(ValidityError):
        com_frame_check(UNIT, 1.0, -1.0)


def test_cross_sum_sign_of_leading_attraction():
    # moving the masses towards each other (xA > 0, xB < 0) lowers the energy
    table = expand_cross_coupling(UNIT, 2, PNOrder.PN0)
    assert classical_cross_sum(table, 1e-3, -1e-3, 0, 0) < 0
    assert math.isclose(classical_cross_sum(table, 1e-3, 1e-3, 0, 0), 2e-6)


def test_mirror_symmetry():
    # swapping the particles reflects the axis: x -> -x, so a term picks up (-1)^(x power)
    table = expand_cross_coupling(PhysicalParams())
    by_powers = {t.powers: t for t in table}
    for t in table:
        xa, xb, pa, pb = t.powers
        mirror = by_powers[(xb, xa, pb, pa)]
        assert mirror.coeff == pytest.approx((-1) ** (xa + xb) * t.coeff, rel=1e-15), t.label
