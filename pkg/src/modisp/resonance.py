"""Brute-force evidence for strong non-resonance on the frequency lattice.

For a term with signs ``s_j`` the lattice is
``{(k_0, ..., k_m) : sum_j s_j k_j = 0}``. We enumerate it inside the box
``|k_j| <= K`` in blocks (never materialising all tuples at once), evaluate the
resonance function ``Phi = sum_j s_j phi(k_j)`` and compare it with
``<k_0*>^{alpha_1} <k_2*>^{alpha_2}`` where ``k_0* >= k_1* >= ...`` is the
decreasing rearrangement of ``|k_j|``.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field

import numpy as np

from .models import ModelSpec, NonlinearTerm

_INT_LIMIT = 2**62


def _check_box(K: int):
    if int(K) != K or K < 1:
        raise ValueError(f"cutoff K must be an integer >= 1, got {K}")


def lattice_blocks(m: int, signs, K: int, block: int = 1 << 18):
    """Yield int64 arrays of shape ``(B, m+1)`` covering the lattice in the box.

    Order is deterministic: lexicographic in ``(k_1, ..., k_m)`` with ``k_0``
    solved from the constraint (the last sign need not be ``-1``; any slot
    with a nonzero sign can be solved for, we always solve for slot 0).
    """
    _check_box(K)
    signs = np.asarray(signs, dtype=np.int64)
    if signs.size != m + 1:
        raise ValueError("need m+1 signs")
    rng = np.arange(-K, K + 1, dtype=np.int64)
    width = 2 * K + 1
    # split the outer coordinates into chunks so that each block has ~block rows
    n_inner = 1
    inner_dims = 0
    while inner_dims < m and n_inner * width <= max(block, width):
        n_inner *= width
        inner_dims += 1
    outer_dims = m - inner_dims
    inner = np.stack(
        [g.ravel() for g in np.meshgrid(*([rng] * inner_dims), indexing="ij")], axis=-1
    ) if inner_dims else np.zeros((1, 0), dtype=np.int64)
    for outer in itertools.product(range(-K, K + 1), repeat=outer_dims):
        rest = np.column_stack((np.tile(np.array(outer, dtype=np.int64), (inner.shape[0], 1)), inner))
        k0 = -(rest @ signs[1:]) * signs[0]
        keep = np.abs(k0) <= K
        if keep.any():
            yield np.column_stack((k0[keep], rest[keep]))


def enumerate_lattice(m: int, signs, K: int):
    """All lattice tuples with ``|k_j| <= K``, one tuple at a time."""
    for blk in lattice_blocks(m, signs, K):
        for row in blk:
            yield tuple(int(v) for v in row)


def lattice_count(m: int, signs, K: int) -> int:
    return sum(blk.shape[0] for blk in lattice_blocks(m, signs, K))


def phi_values(symbol, K: np.ndarray):
    """``phi`` on an integer array, exact (int64) when the symbol allows it."""
    if symbol.integer_exact:
        kmax = int(np.abs(K).max(initial=0))
        if float(symbol(kmax)) * 8 < _INT_LIMIT:
            return symbol.exact(K)
    return symbol(K)


def resonance_array(symbol, signs, T: np.ndarray):
    vals = phi_values(symbol, T)
    return vals @ np.asarray(signs, dtype=vals.dtype)


@dataclass
class BoundReport:
    """Result of :func:`verify_bound` for one model term."""

    model: str
    term: str
    K: int
    alpha: tuple
    n_tuples: int
    c_best: float
    argmin: tuple | None
    violations: list = field(default_factory=list)
    near_violations: list = field(default_factory=list)
    exact_arithmetic: bool = True

    def to_dict(self) -> dict:
        return {
            "model": self.model,
            "term": self.term,
            "K": self.K,
            "alpha": list(self.alpha),
            "n_tuples": self.n_tuples,
            "c_best": self.c_best,
            "argmin": list(self.argmin) if self.argmin is not None else None,
            "violations": [list(v) for v in self.violations],
            "near_violations": [list(v) for v in self.near_violations],
            "exact_arithmetic": self.exact_arithmetic,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1)


def _verification_mask(spec: ModelSpec, term: NonlinearTerm, T: np.ndarray):
    mask = term.support(T)
    if spec.zero_mean_required:
        # zero modes carry no energy on the zero-mean subspace
        mask &= np.all(T != 0, axis=1)
    else:
        mask &= np.any(T != 0, axis=1)
    return mask


def verify_bound(spec: ModelSpec, K: int, term: int = 0, max_listed: int = 50) -> BoundReport:
    """Best constant ``c`` in ``|Phi| >= c <k_0*>^{a_1} <k_2*>^{a_2}`` over the box.

    Tuples outside the term's support are skipped; for zero-mean models every
    tuple with a zero frequency is skipped too, and otherwise the all-zero
    tuple (which is trivially resonant) is skipped.

    A tuple is a violation when ``Phi == 0`` exactly (integer symbols) or
    ``|Phi| <= 1e-9 <k_0*>^{a_1}`` (floating-point symbols). In the floating
    case tuples with ``|Phi|`` within a factor 1e3 of that threshold are listed
    as near violations.
    """
    _check_box(K)
    t = spec.terms[term]
    a1, a2 = spec.alpha
    exact = spec.symbol.integer_exact
    n = 0
    c_best = np.inf
    argmin = None
    violations, near = [], []
    for T in lattice_blocks(t.m, t.signs, K):
        T = T[_verification_mask(spec, t, T)]
        if T.size == 0:
            continue
        n += T.shape[0]
        phi = resonance_array(spec.symbol, t.signs, T)
        exact_blk = phi.dtype.kind == "i"
        exact = exact and exact_blk
        mags = np.sort(np.abs(T), axis=1)[:, ::-1].astype(float)
        weight = np.sqrt(1 + mags[:, 0] ** 2) ** a1 * np.sqrt(1 + mags[:, 2] ** 2) ** a2
        absphi = np.abs(phi).astype(float)
        if exact_blk:
            bad = phi == 0
            close = np.zeros_like(bad)
        else:
            tol = 1e-9 * np.sqrt(1 + mags[:, 0] ** 2) ** a1
            bad = absphi <= tol
            close = ~bad & (absphi <= 1e3 * tol)
        for row in T[bad][: max(0, max_listed - len(violations))]:
            violations.append(tuple(int(v) for v in row))
        for row in T[close][: max(0, max_listed - len(near))]:
            near.append(tuple(int(v) for v in row))
        ratio = np.where(bad, np.inf, absphi / weight)
        i = int(np.argmin(ratio))
        if ratio[i] < c_best:
            c_best = float(ratio[i])
            argmin = tuple(int(v) for v in T[i])
    if violations:
        c_best = 0.0
    return BoundReport(spec.name, t.name, int(K), (a1, a2), n,
                       float(c_best) if np.isfinite(c_best) else float("nan"),
                       argmin, violations, near, exact)


# ---------------------------------------------------------------------------
# exact polynomial identities


def _kdv(T):
    k0, k1, k2 = T[:, 0], T[:, 1], T[:, 2]
    lhs = -(k0**3) + k1**3 + k2**3
    return lhs, -3 * k0 * k1 * k2


def _mkdv(T):
    k0, k1, k2, k3 = T.T
    lhs = -(k0**3) + k1**3 + k2**3 + k3**3
    return lhs, -3 * (k1 + k2) * (k1 + k3) * (k2 + k3)


def _nls(T):
    k0, k1, k2, k3 = T.T
    lhs = -(k0**2) + k1**2 - k2**2 + k3**2
    return lhs, 2 * (k1 - k2) * (k2 - k3)


IDENTITIES = {
    # name: (m, signs, evaluator)
    "kdv_3k0k1k2": (2, (-1, 1, 1), _kdv),
    "mkdv_triple_product": (3, (-1, 1, 1, 1), _mkdv),
    "nls_quadratic": (3, (-1, 1, -1, 1), _nls),
}


def factorization_check(name: str, K: int) -> bool:
    """Check a closed-form factorisation of ``Phi`` on every lattice tuple in the box.

    ``kdv_3k0k1k2``: ``-k0^3 + k1^3 + k2^3 = -3 k0 k1 k2`` on ``k0 = k1 + k2``.
    ``mkdv_triple_product``: ``-k0^3 + k1^3 + k2^3 + k3^3 = -3(k1+k2)(k1+k3)(k2+k3)``.
    ``nls_quadratic``: ``-k0^2 + k1^2 - k2^2 + k3^2 = 2(k1-k2)(k2-k3)`` on
    ``k0 = k1 - k2 + k3``.

    Integer (int64) arithmetic throughout.
    """
    if name not in IDENTITIES:
        raise KeyError(f"unknown identity {name!r}; known: {sorted(IDENTITIES)}")
    _check_box(K)
    m, signs, fn = IDENTITIES[name]
    if 4 * (3 * K) ** 3 >= _INT_LIMIT:
        raise OverflowError("cutoff too large for int64 arithmetic")
    for T in lattice_blocks(m, signs, K):
        lhs, rhs = fn(T)
        if not np.array_equal(lhs, rhs):
            return False
    return True
