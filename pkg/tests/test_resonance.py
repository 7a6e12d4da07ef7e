import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from modisp import models as Mo
from modisp import resonance as R


def _count_oracle(K):
    return sum(1 for a in range(-K, K + 1) for b in range(-K, K + 1) if abs(a + b) <= K)


def test_small_enumeration():
    tuples = list(R.enumerate_lattice(2, (-1, 1, 1), 1))
    assert (0, 0, 0) in tuples and (1, 1, 0) in tuples
    assert all(k0 == k1 + k2 for k0, k1, k2 in tuples)
    # brute force over the whole box
    box = [t for t in itertools.product(range(-1, 2), repeat=3) if t[0] == t[1] + t[2]]
    assert sorted(tuples) == sorted(box)
    assert len(tuples) == _count_oracle(1) == 7


def test_m1_gives_diagonal():
    assert list(R.enumerate_lattice(1, (-1, 1), 3)) == [(k, k) for k in range(-3, 4)]


@pytest.mark.parametrize("K", [1, 2, 5, 17])
def test_count_oracle(K):
    assert R.lattice_count(2, (-1, 1, 1), K) == _count_oracle(K)


def test_blocks_cover_box_deterministically():
    a = np.concatenate(list(R.lattice_blocks(3, (-1, 1, -1, 1), 6, block=50)))
    b = np.concatenate(list(R.lattice_blocks(3, (-1, 1, -1, 1), 6)))
    assert {tuple(r) for r in a} == {tuple(r) for r in b}
    assert len(a) == len(b)
    c = np.concatenate(list(R.lattice_blocks(3, (-1, 1, -1, 1), 6, block=50)))
    assert np.array_equal(a, c)
    assert np.all(-a[:, 0] + a[:, 1] - a[:, 2] + a[:, 3] == 0)


def test_bad_cutoff():
    with pytest.raises(ValueError):
        list(R.enumerate_lattice(2, (-1, 1, 1), 0))


@pytest.mark.parametrize("name,K", [("kdv_3k0k1k2", 30), ("mkdv_triple_product", 12),
                                    ("nls_quadratic", 30)])
def test_identities_hold(name, K):
    assert R.factorization_check(name, K)


def test_identity_detects_corruption(monkeypatch):
    m, signs, fn = R.IDENTITIES["kdv_3k0k1k2"]
    monkeypatch.setitem(R.IDENTITIES, "kdv_3k0k1k2",
                        (m, signs, lambda T: (fn(T)[0], fn(T)[1] + (T[:, 0] == 5))))
    assert not R.factorization_check("kdv_3k0k1k2", 10)


def test_unknown_identity():
    with pytest.raises(KeyError):
        R.factorization_check("nope", 4)


def test_fkdv2_bound():
    rep = R.verify_bound(Mo.fkdv(2), 64)
    assert rep.violations == [] and rep.exact_arithmetic
    assert 0.7 <= rep.c_best <= 3.0
    # the argmin really achieves c_best
    k = np.array(rep.argmin)
    mags = np.sort(np.abs(k))[::-1]
    phi = abs(Mo.resonance_phi(Mo.fkdv(2), k))
    assert rep.c_best == pytest.approx(phi / (np.hypot(1, mags[0]) ** 2 * np.hypot(1, mags[2])))


def test_wick_mkdv_identity_on_support():
    spec = Mo.wick_mkdv(2)
    t = spec.terms[0]
    for T in R.lattice_blocks(3, t.signs, 16):
        T = T[t.support(T)]
        k1, k2, k3 = T[:, 1], T[:, 2], T[:, 3]
        prod = (k1 + k2) * (k1 + k3) * (k2 + k3)
        phi = R.resonance_array(spec.symbol, t.signs, T)
        assert np.array_equal(np.abs(phi), 3 * np.abs(prod))
        assert np.all(np.abs(phi) >= 3)
    assert R.verify_bound(spec, 16).violations == []


def test_wick_fnls2_constant():
    rep = R.verify_bound(Mo.wick_fnls(2, override=True), 16)
    assert rep.violations == [] and rep.c_best == 2.0


def test_nls_conj_zero_tuple_skipped():
    rep = R.verify_bound(Mo.nls_conj_power(2), 20)
    assert rep.violations == [] and rep.c_best > 0


def test_violation_reported_for_unsupported_claim():
    # the full cubic lattice (no support restriction) contains resonant tuples
    spec = Mo.wick_mkdv(2)
    t = spec.terms[0]
    full = Mo.NonlinearTerm(t.name, t.m, t.signs, t.multiplier, t.beta, t.alpha)
    bad = Mo.ModelSpec(spec.name, spec.kind, spec.field_type, spec.symbol,
                       Mo.NonlinearityData((full,), spec.resonant), spec.alpha, False)
    rep = R.verify_bound(bad, 4)
    assert rep.violations and rep.c_best == 0.0


def test_float_symbols_report_near_violations_field():
    rep = R.verify_bound(Mo.ilw(), 20)
    assert not rep.exact_arithmetic
    assert rep.violations == [] and isinstance(rep.near_violations, list)


@settings(max_examples=10, deadline=None)
@given(st.integers(2, 20), st.integers(1, 20))
def test_c_best_monotone_in_cutoff(K1, dK):
    spec = Mo.fkdv(1)
    a = R.verify_bound(spec, K1).c_best
    b = R.verify_bound(spec, K1 + dK).c_best
    assert b <= a


@settings(max_examples=50, deadline=None)
@given(st.lists(st.integers(-30, 30), min_size=3, max_size=3))
def test_phi_symmetric_in_same_sign_slots(ks):
    spec = Mo.wick_mkdv(2)
    k0 = sum(ks)
    base = Mo.resonance_phi(spec, (k0, *ks))
    for perm in itertools.permutations(ks):
        assert Mo.resonance_phi(spec, (k0, *perm)) == base
    nls = Mo.wick_fnls(3)
    k1, k2, k3 = ks
    assert Mo.resonance_phi(nls, (k1 - k2 + k3, k1, k2, k3)) == \
        Mo.resonance_phi(nls, (k1 - k2 + k3, k3, k2, k1))


def test_report_json_roundtrip():
    import json

    d = json.loads(R.verify_bound(Mo.fkdv(2), 8).to_json())
    assert d["violations"] == [] and d["K"] == 8 and d["n_tuples"] > 0
