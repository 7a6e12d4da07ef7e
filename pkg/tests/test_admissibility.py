from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from modisp import admissibility as A
from modisp import models as Mo
from modisp.pathgen import InvalidParameter

fractions = st.fractions(min_value=-2, max_value=2, max_denominator=20)
positive = st.fractions(min_value=F(1, 10), max_value=6, max_denominator=20)


def test_nu_min_examples():
    assert A.nu_min(0, 3, (1, 0, 0, 0)) == 1
    assert A.nu_min(5, 3, (1, 0, 0, 0)) == 0
    assert A.nu_min(-1, 3, (0, 0, 0, 0)) == 2
    assert A.nu_min(0, 3, None) == 0


def test_s_resonant_threshold_examples():
    assert A.s_resonant_threshold(0, 3, (1, 0, 0, 0)) == F(1, 2)
    assert A.s_resonant_threshold(F(3, 7), 3, None) == F(3, 7)
    assert A.s_resonant_threshold(-1, 3, (0, 0, 0, 0)) == 0
    with pytest.raises(InvalidParameter):
        A.s_resonant_threshold(0, 1)


def test_fkdv_example():
    rb = A.rho_bounds_for_model(Mo.fkdv(2), F(-1, 2))
    assert rb.inf_rho == F(2, 3) and rb.attained is False
    # -2s/(a+1) = 1/3 is the redundant family-3 base case
    assert {c.value for c in rb.constraints} == {F(1, 2), F(1, 3), F(2, 3)}
    assert all(c.strict for c in rb.binding)


def test_quadratic_zero_beta_example():
    p = A.ProblemParams((1, 0), (0, 0, 0), 0)
    rb = A.rho_bounds_nonresonant(p)
    tags = {c.tag: c for c in rb.constraints}
    assert tags["family 1"].value == 0 and tags["family 2"].value == 0
    base4 = tags["family 4, empty-sum base case"]
    assert base4.value == F(1, 2) and base4.strict
    assert rb.inf_rho == F(1, 2) and not rb.attained


def test_strict_ranges_drop_base_cases():
    p = A.ProblemParams((1, 0), (0, 0, 0), 0)
    rb = A.rho_bounds_nonresonant(p, strict_ranges=True)
    assert [c.tag for c in rb.constraints] == ["family 1", "family 2"]


@settings(max_examples=60, deadline=None)
@given(positive, fractions)
def test_fkdv_reduces_to_closed_form(a, s):
    rb = A.rho_bounds_nonresonant(A.ProblemParams((a, 1), (1, 0, 0), s))
    vals = {c.value for c in rb.constraints}
    expected = {1 / a, -2 * s / a, (F(3, 2) - s) / (a + 1)}
    # the family-3 base case -2s/(a+1) is implied by the others
    assert expected <= vals
    assert vals - expected <= {-2 * s / (a + 1)}
    assert rb.inf_rho == max(expected)


def test_fkdv_symbolic():
    sympy = pytest.importorskip("sympy")
    a, s = sympy.symbols("a s", positive=True)
    rb = A.rho_bounds_nonresonant(A.ProblemParams((a, 1), (1, 0, 0), s))
    got = [sympy.simplify(c.value) for c in rb.constraints]
    for e in (1 / a, -2 * s / a, (sympy.Rational(3, 2) - s) / (a + 1)):
        assert any(sympy.simplify(g - e) == 0 for g in got)


def _printed_formulas(alpha, beta, beta_R, s, gamma, nu, d=1):
    """Independent float re-implementation of the starred constraint families."""
    a1, a2 = alpha
    m = len(beta) - 1
    bs = sorted(beta[1:], reverse=True)
    bstar = {i + 1: b for i, b in enumerate(bs)}
    bR = sum(beta_R)

    def S(L):
        return sum(bstar[l + 1] + d / 2 - s for l in range(2, L + 1) if l + 1 <= m)

    out = [(beta[0] + bstar[1] + bR + (2 - gamma) * nu) / a1,
           (bstar[1] + bstar[2] - 2 * s + (1 - gamma) * nu) / a1]
    fam3 = [S(1)] + [S(L) for l0 in range(2, m + 1) for L in range(2, l0)]
    fam4 = [S(1)] + [S(L) for l0 in range(2, m + 1) for L in range(l0 + 1, m + 1)]
    out += [(bstar[1] + bstar[2] - 2 * s + x + (1 - gamma) * nu) / (a1 + a2) for x in fam3]
    out += [(bstar[1] + bstar[2] + beta[0] + bR - s + x + (2 - gamma) * nu) / (a1 + a2)
            for x in fam4]
    return sorted(out)


def test_wick_fnls_cross_check():
    rb = A.rho_bounds_for_model(Mo.wick_fnls(3), 0, gamma=0.75, nu=0.1)
    got = sorted(float(c.value) for c in rb.constraints)
    want = _printed_formulas((1, 0), (0, 0, 0, 0), (0, 0, 0, 0), 0, 0.75, 0.1)
    assert np.all(np.isfinite(got))
    assert np.allclose(got, want, rtol=0, atol=1e-14)
    assert rb.notes["terms"][0]["nu_is_limit"] is False


@settings(max_examples=40, deadline=None)
@given(st.fractions(F(1, 5), F(1, 2), max_denominator=50), st.fractions(F(1, 2), 1, max_denominator=50))
def test_wick_mkdv_family1(s, gamma):
    assume(s < F(1, 2))
    rb = A.rho_bounds_for_model(Mo.wick_mkdv(2), s, gamma=gamma)
    fam1 = [c for c in rb.constraints if c.tag == "family 1*"][0]
    assert fam1.value == 2 + (2 - gamma) * (1 - 2 * s)
    assert rb.notes["terms"][0]["nu_is_limit"] is True


@settings(max_examples=40, deadline=None)
@given(st.lists(st.fractions(0, 3, max_denominator=8), min_size=3, max_size=5), positive,
       st.fractions(0, 2, max_denominator=8), fractions, st.fractions(0, 2, max_denominator=8))
def test_monotone_in_s_and_alpha1(beta, a1, a2, s, ds):
    p = A.ProblemParams((a1, a2), tuple(beta), s)
    base = A.rho_bounds_nonresonant(p).inf_rho
    assert A.rho_bounds_nonresonant(A.ProblemParams((a1, a2), tuple(beta), s + ds)).inf_rho <= base
    assert A.rho_bounds_nonresonant(A.ProblemParams((a1 + ds, a2), tuple(beta), s)).inf_rho <= base


@settings(max_examples=40, deadline=None)
@given(st.lists(st.fractions(0, 3, max_denominator=8), min_size=4, max_size=4), positive,
       st.fractions(0, 2, max_denominator=8), fractions, st.fractions(0, 2, max_denominator=8),
       st.fractions(F(1, 2), 1, max_denominator=8))
def test_resonant_monotone_in_s(beta, a1, a2, s, ds, gamma):
    bR = (1, 0, 0, 0)
    nu = A.nu_min(s, 3, bR)
    r0 = A.rho_bounds_resonant(A.ProblemParams((a1, a2), tuple(beta), s, 1, bR, gamma, nu))
    # nu_min is nonincreasing in s as well, so fix nu to the larger value
    r1 = A.rho_bounds_resonant(A.ProblemParams((a1, a2), tuple(beta), s + ds, 1, bR, gamma, nu))
    assert r1.inf_rho <= r0.inf_rho


def test_blowup_at_zero_dispersion():
    vals = [A.rho_bounds_for_model(Mo.fkdv(a), 0).inf_rho for a in (1, 0.1, 0.01, 0.001)]
    assert all(b > a for a, b in zip(vals, vals[1:]))
    assert vals[-1] >= 999


@settings(max_examples=40, deadline=None)
@given(st.lists(st.fractions(0, 3, max_denominator=8), min_size=4, max_size=6), positive,
       st.fractions(0, 2, max_denominator=8), fractions)
def test_resonant_reduces_to_nonresonant(beta, a1, a2, s):
    # with beta_R = 0, gamma = 1 and nu = 0 the starred families 1-3 coincide with the plain ones;
    # the starred family 4 carries |beta_R| where the plain one carries d/2
    n = len(beta)
    bR = (0,) * (n if n % 2 == 0 else n + 1)
    s = abs(s)  # nu = 0 needs nu_min(s) = 0
    plain = A.rho_bounds_nonresonant(A.ProblemParams((a1, a2), tuple(beta), s))
    star = A.rho_bounds_resonant(A.ProblemParams((a1, a2), tuple(beta), s, 1, bR, 1, 0))
    assert len(plain.constraints) == len(star.constraints)
    for c, d in zip(plain.constraints, star.constraints):
        assert c.strict == d.strict
        if c.tag.startswith("family 4"):
            assert (c.value - d.value) * (a1 + a2) == F(1, 2)
        else:
            assert c.value == d.value


def test_limits_flagged():
    rb = A.rho_bounds_resonant(A.ProblemParams((1, 0), (1, 0, 0, 0), 0, 1, (1, 0, 0, 0), 1))
    assert rb.notes["nu_is_limit"] and rb.notes["gamma_is_limit"]


@pytest.mark.parametrize("kwargs", [
    dict(alpha=(0, 1)), dict(alpha=(1, -1)), dict(beta=(1, 0)), dict(beta=(1, -1, 0)),
    dict(beta_R=(1, 0, 0)), dict(d=0),
])
def test_params_validation(kwargs):
    base = dict(alpha=(1, 0), beta=(1, 0, 0), s=0)
    base.update(kwargs)
    with pytest.raises(InvalidParameter):
        A.ProblemParams(**base)


def test_resonant_validation():
    p = A.ProblemParams((1, 0), (1, 0, 0, 0), 0, 1, (1, 0, 0, 0), F(3, 4), F(1, 2))
    with pytest.raises(InvalidParameter):
        A.rho_bounds_resonant(p)  # nu below nu_min = 1
    with pytest.raises(InvalidParameter):
        A.rho_bounds_resonant(A.ProblemParams((1, 0), (1, 0, 0, 0), 0, 1, (1, 0, 0, 0), 0.4))
    with pytest.raises(InvalidParameter):
        A.rho_bounds_resonant(A.ProblemParams((1, 0), (1, 0, 0, 0), 0))


def test_exact_conversion():
    assert A.exact(0.25) == F(1, 4)
    assert A.exact(0.1) == F(1, 10)
    assert A.exact(3) == F(3)


def test_union_over_terms_tags():
    rb = A.rho_bounds_for_model(Mo.fifth_kdv(), 1, gamma=F(3, 4))
    assert any(c.tag.startswith("dx u dx^2 u: ") for c in rb.constraints)
    assert any(c.tag.startswith("wick cubic N0: ") for c in rb.constraints)
    assert rb.inf_rho == max(c.value for c in rb.constraints)


def test_json_output():
    import json

    d = json.loads(A.rho_bounds_for_model(Mo.fkdv(2), -0.5).to_json())
    assert d["inf_rho"] == {"float": 2 / 3, "exact": "2/3"} and d["attained"] is False
