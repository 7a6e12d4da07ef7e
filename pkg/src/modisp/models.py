"""Catalog of modulated dispersive models on the one-dimensional torus.

Conventions
-----------
Fourier coefficients are ``u_hat[k] = (2 pi)^{-1} int u(x) exp(-i k x) dx`` with
``u = sum_k u_hat[k] exp(i k x)``, so ``(2 pi)^{-1} int u^2 dx = sum_k |u_hat[k]|^2``
for real ``u``.

The dispersion operator acts as ``(L u)^(k) = i phi(k) u_hat(k)`` and the PDE is
``du/dt + W'(t) L u + N(u) = 0``.

A nonlinear term of degree ``m`` is described on the lattice

    Gamma = {(k_0, ..., k_m) : sum_j s_j k_j = 0},

with signs ``s_j = +-1`` and

    N(u)^(k_0) = sum_{Gamma} Nhat(k_0, ..., k_m) prod_{j>=1} u_hat[k_j]^{s_j},

where ``u_hat^+ = u_hat`` and ``u_hat^- = conj(u_hat)``. Every catalog term uses
``s_0 = -1``, i.e. ``k_0 = sum_{j>=1} s_j k_j`` is the output frequency. The
resonance function is ``Phi = sum_j s_j phi(k_j)``.

A completely resonant part only acts on the diagonal ``k_0 = ... = k_m`` with
alternating signs ``(-, +, -, +, ...)`` so that it reads
``Rhat(k) |u_hat_k|^{m-1} u_hat_k`` with ``Rhat(k)`` purely imaginary.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import partial
from typing import Callable

import numpy as np

from .pathgen import InvalidParameter


class OffLattice(ValueError):
    """A frequency tuple does not satisfy the signed-sum constraint."""


# ---------------------------------------------------------------------------
# dispersion symbols


def stable_coth(x):
    """``coth(x)`` for ``x > 0``; switches to ``1 + 2 exp(-2x)`` for ``x >= 20``."""
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", over="ignore"):
        small = 1.0 + 2.0 / np.expm1(2.0 * np.minimum(x, 20.0))
    return np.where(x >= 20.0, 1.0 + 2.0 * np.exp(-2.0 * x), small)


SYMBOL_KINDS = (
    "fractional_burgers",
    "ilw",
    "smith",
    "fifth_order",
    "fractional_laplacian",
    "laplacian",
)


@dataclass(frozen=True)
class DispersionSymbol:
    """Real Fourier multiplier ``phi`` of the dispersion operator.

    ``kind`` selects the family; ``a`` is the order parameter of the fractional
    families and ``depth`` the ILW depth (symbol ``k|k|coth(depth |k|)``).
    """

    kind: str
    a: float | None = None
    depth: float = 1.0

    def __post_init__(self):
        if self.kind not in SYMBOL_KINDS:
            raise InvalidParameter(f"unknown symbol kind {self.kind!r}")
        if self.kind in ("fractional_burgers", "fractional_laplacian"):
            if self.a is None or not self.a > 0:
                raise InvalidParameter(f"{self.kind} needs a > 0, got {self.a}")
        if self.kind == "ilw" and not self.depth > 0:
            raise InvalidParameter("ILW depth must be positive")

    @property
    def odd(self) -> bool:
        return self.kind in ("fractional_burgers", "ilw", "smith", "fifth_order")

    @property
    def integer_exact(self) -> bool:
        if self.kind in ("fifth_order", "laplacian"):
            return True
        if self.kind in ("fractional_burgers", "fractional_laplacian"):
            return float(self.a).is_integer()
        return False

    def __call__(self, k):
        k = np.asarray(k, dtype=float)
        ak = np.abs(k)
        if self.kind == "fractional_burgers":
            return k * ak**self.a
        if self.kind == "ilw":
            with np.errstate(invalid="ignore"):
                val = k * ak * stable_coth(self.depth * ak)
            return np.where(ak == 0, 0.0, val)
        if self.kind == "smith":
            return k * np.sqrt(1.0 + k * k)
        if self.kind == "fifth_order":
            return k**5
        if self.kind == "fractional_laplacian":
            return ak**self.a
        return k * k

    def exact(self, k):
        """Integer values of ``phi`` (int64), or ``None`` if not integer-valued."""
        if not self.integer_exact:
            return None
        k = np.asarray(k, dtype=np.int64)
        ak = np.abs(k)
        if self.kind == "fifth_order":
            return k**5
        if self.kind == "laplacian":
            return k * k
        p = int(self.a)
        if self.kind == "fractional_burgers":
            return k * ak**p
        return ak**p

    def describe(self) -> str:
        if self.kind == "ilw":
            return f"ilw(depth={self.depth})"
        if self.a is not None:
            return f"{self.kind}(a={self.a})"
        return self.kind


# ---------------------------------------------------------------------------
# nonlinearity data

# multipliers take an integer array of shape (..., m+1) holding (k_0, ..., k_m)


def _mult_dx_square(K):
    return 1j * K[..., 0].astype(float)


def _mult_const(K, value=1.0):
    return np.full(K.shape[:-1], value, dtype=complex)


def _mult_mkdv(K):
    return 1j * K[..., 0].astype(float) / 3.0


def _mult_dxu_dx2u(K):
    # (i k_1)(i k_2)^2
    k1, k2 = K[..., 1].astype(float), K[..., 2].astype(float)
    return -1j * k1 * k2 * k2


def _mult_dx_u_dx2u(K):
    # i k_0 (i k_2)^2
    k0, k2 = K[..., 0].astype(float), K[..., 2].astype(float)
    return -1j * k0 * k2 * k2


def _support_all(K):
    return np.ones(K.shape[:-1], dtype=bool)


def _support_mkdv(K):
    k1, k2, k3 = K[..., 1], K[..., 2], K[..., 3]
    return ((k1 + k2) != 0) & ((k1 + k3) != 0) & ((k2 + k3) != 0)


def _support_fnls(K):
    k1, k2, k3 = K[..., 1], K[..., 2], K[..., 3]
    return (k2 != k1) & (k2 != k3)


def _res_mkdv(k):
    return -1j * np.asarray(k, dtype=float)


def _res_const(k, value=-1j):
    return np.full(np.shape(k), value, dtype=complex)


@dataclass(frozen=True)
class NonlinearTerm:
    """One multilinear term of the nonlinearity on its lattice.

    ``support`` selects the tuples carried by the term (e.g. the non-resonant
    set of a Wick-ordered cubic); ``beta`` are the exponents of the bound
    ``|Nhat| <= C prod <k_j>^{beta_j}`` and ``alpha`` the non-resonance
    exponents claimed for this term.
    """

    name: str
    m: int
    signs: tuple[int, ...]
    multiplier: Callable[[np.ndarray], np.ndarray]
    beta: tuple[float, ...]
    alpha: tuple[float, float]
    support: Callable[[np.ndarray], np.ndarray] = _support_all

    def __post_init__(self):
        if self.m < 2:
            raise InvalidParameter("degree m must be >= 2")
        if len(self.signs) != self.m + 1 or any(s not in (1, -1) for s in self.signs):
            raise InvalidParameter("need m+1 signs in {+1, -1}")
        if len(self.beta) != self.m + 1 or min(self.beta) < 0:
            raise InvalidParameter("need m+1 nonnegative beta exponents")


@dataclass(frozen=True)
class ResonantPart:
    """Completely resonant diagonal term ``Rhat(k) |u_hat_k|^{m-1} u_hat_k``."""

    m: int
    multiplier: Callable[[np.ndarray], np.ndarray]
    beta: tuple[float, ...]

    def __post_init__(self):
        if self.m % 2 != 1 or self.m < 3:
            raise InvalidParameter("completely resonant part needs odd m >= 3")

    @property
    def signs(self) -> tuple[int, ...]:
        return tuple(-1 if j % 2 == 0 else 1 for j in range(self.m + 1))

    @property
    def beta_norm(self) -> float:
        return float(sum(self.beta))


@dataclass(frozen=True)
class NonlinearityData:
    terms: tuple[NonlinearTerm, ...] = ()
    resonant: ResonantPart | None = None

    @property
    def m(self) -> int:
        degrees = [t.m for t in self.terms] + ([self.resonant.m] if self.resonant else [])
        return max(degrees) if degrees else 0

    @property
    def is_linear(self) -> bool:
        return not self.terms and self.resonant is None


@dataclass(frozen=True)
class ModelSpec:
    """A modulated dispersive model on the circle.

    ``kind`` names the nonlinearity family; the solver uses it to pick the
    physical-space evaluation of ``N(u)``.
    """

    name: str
    kind: str
    field_type: str
    symbol: DispersionSymbol
    nonlinearity: NonlinearityData
    alpha: tuple[float, float]
    zero_mean_required: bool = False
    d: int = 1
    params: dict = field(default_factory=dict, compare=False)
    notes: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.field_type not in ("real", "complex"):
            raise InvalidParameter("field_type must be 'real' or 'complex'")
        if self.d != 1:
            raise InvalidParameter("only d = 1 is supported")

    @property
    def terms(self) -> tuple[NonlinearTerm, ...]:
        return self.nonlinearity.terms

    @property
    def resonant(self) -> ResonantPart | None:
        return self.nonlinearity.resonant

    @property
    def m(self) -> int:
        return self.nonlinearity.m

    @property
    def is_real(self) -> bool:
        return self.field_type == "real"

    def linear(self) -> "ModelSpec":
        """Same dispersion with the nonlinearity removed."""
        return replace(self, name=self.name + "+linear", kind="linear",
                       nonlinearity=NonlinearityData())

    def phi(self, k):
        return self.symbol(k)


# ---------------------------------------------------------------------------
# constructors


def _burgers_term(alpha):
    return NonlinearTerm("dx(u^2)", 2, (-1, 1, 1), _mult_dx_square, (1.0, 0.0, 0.0), alpha)


def _mkdv_term(alpha):
    return NonlinearTerm("wick cubic N0", 3, (-1, 1, 1, 1), _mult_mkdv,
                         (1.0, 0.0, 0.0, 0.0), alpha, _support_mkdv)


def _mkdv_resonant():
    return ResonantPart(3, _res_mkdv, (1.0, 0.0, 0.0, 0.0))


def fkdv(a: float = 2.0) -> ModelSpec:
    """Fractional KdV/BO: ``phi = k|k|^a``, ``N(u) = dx(u^2)``, zero mean."""
    sym = DispersionSymbol("fractional_burgers", float(a))
    alpha = (float(a), 1.0)
    return ModelSpec(f"fkdv:a={_fmt(a)}", "burgers", "real", sym,
                     NonlinearityData((_burgers_term(alpha),)), alpha, True,
                     params={"a": float(a)})


def bo() -> ModelSpec:
    return fkdv(1.0)


def ilw(depth: float = 1.0) -> ModelSpec:
    sym = DispersionSymbol("ilw", depth=float(depth))
    alpha = (1.0, 1.0)
    name = "ilw" if depth == 1.0 else f"ilw:depth={_fmt(depth)}"
    return ModelSpec(name, "burgers", "real", sym, NonlinearityData((_burgers_term(alpha),)),
                     alpha, True, params={"depth": float(depth)})


def smith() -> ModelSpec:
    sym = DispersionSymbol("smith")
    alpha = (1.0, 1.0)
    return ModelSpec("smith", "burgers", "real", sym, NonlinearityData((_burgers_term(alpha),)),
                     alpha, True)


def nls_conj_power(m: int = 2) -> ModelSpec:
    """NLS with the non-gauge-invariant nonlinearity ``conj(u)^m``."""
    if int(m) != m or m < 2:
        raise InvalidParameter("nls_conj needs an integer m >= 2")
    m = int(m)
    alpha = (2.0, 0.0)
    term = NonlinearTerm(f"conj(u)^{m}", m, (-1,) * (m + 1), _mult_const, (0.0,) * (m + 1), alpha)
    return ModelSpec(f"nls_conj:m={m}", "nls_conj", "complex", DispersionSymbol("laplacian"),
                     NonlinearityData((term,)), alpha, False, params={"m": m})


def wick_mkdv(a: float = 2.0, override: bool = False) -> ModelSpec:
    """Wick-ordered fractional mKdV, ``N = (u^2 - mean(u^2)) dx u = N0 + R``."""
    if not a > 1 and not override:
        raise InvalidParameter("wick_mkdv needs a > 1 (pass override=True to build anyway)")
    alpha = (float(a) - 1.0, 0.0)
    return ModelSpec(
        f"wick_mkdv:a={_fmt(a)}", "wick_mkdv", "real",
        DispersionSymbol("fractional_burgers", float(a)),
        NonlinearityData((_mkdv_term(alpha),), _mkdv_resonant()),
        alpha, False, params={"a": float(a)},
        notes={"alpha_refined": (float(a) - 1.0, 1.0),
               "alpha_refined_excludes": "all four frequencies comparable"},
    )


def fifth_kdv() -> ModelSpec:
    """Fifth-order KdV with Wick-ordered cubic part, zero mean.

    ``N(u) = dx u dx^2 u + dx(u dx^2 u) + (u^2 - mean(u^2)) dx u``, all
    coefficients equal to one.
    """
    quad_alpha = (4.0, 1.0)
    n1 = NonlinearTerm("dx u dx^2 u", 2, (-1, 1, 1), _mult_dxu_dx2u, (0.0, 1.0, 2.0), quad_alpha)
    n2 = NonlinearTerm("dx(u dx^2 u)", 2, (-1, 1, 1), _mult_dx_u_dx2u, (1.0, 0.0, 2.0), quad_alpha)
    n3 = _mkdv_term((3.0, 0.0))
    return ModelSpec("kdv5", "kdv5", "real", DispersionSymbol("fifth_order"),
                     NonlinearityData((n1, n2, n3), _mkdv_resonant()), (3.0, 0.0), True,
                     params={"coefficients": (1.0, 1.0, 1.0)})


def wick_fnls(a: float = 3.0, override: bool = False) -> ModelSpec:
    """Wick-ordered fractional cubic NLS, ``N = i(|u|^2 - 2 mean|u|^2) u = N0 + R``."""
    if not a > 2 and not override:
        raise InvalidParameter("wick_fnls needs a > 2 (pass override=True to build anyway)")
    alpha = (float(a) - 2.0, 0.0)
    n0 = NonlinearTerm("wick cubic N0", 3, (-1, 1, -1, 1), partial(_mult_const, value=1j),
                       (0.0,) * 4, alpha, _support_fnls)
    res = ResonantPart(3, partial(_res_const, value=-1j), (0.0,) * 4)
    return ModelSpec(f"wick_fnls:a={_fmt(a)}", "wick_fnls", "complex",
                     DispersionSymbol("fractional_laplacian", float(a)),
                     NonlinearityData((n0,), res), alpha, False, params={"a": float(a)},
                     notes={"alpha_refined": (float(a) - 1.0, 0.0)})


def _fmt(x) -> str:
    x = float(x)
    return str(int(x)) if x.is_integer() else repr(x)


def catalog() -> list[ModelSpec]:
    """Default instances of every model family."""
    return [
        fkdv(2.0),
        bo(),
        fkdv(4.0),
        fkdv(0.5),
        ilw(),
        smith(),
        nls_conj_power(2),
        nls_conj_power(3),
        wick_mkdv(2.0),
        fifth_kdv(),
        wick_fnls(3.0),
    ]


_BUILDERS = {
    "fkdv": lambda a=2.0: fkdv(a),
    "bo": lambda: bo(),
    "ilw": lambda depth=1.0: ilw(depth),
    "smith": lambda: smith(),
    "kdv5": lambda: fifth_kdv(),
    "wick_mkdv": lambda a=2.0, override=False: wick_mkdv(a, override),
    "wick_fnls": lambda a=3.0, override=False: wick_fnls(a, override),
    "nls_conj": lambda m=2: nls_conj_power(m),
}


def parse_model(text: str) -> ModelSpec:
    """Build a model from a string such as ``"fkdv:a=2"`` or ``"nls_conj:m=3"``."""
    name, _, rest = text.strip().partition(":")
    if name not in _BUILDERS:
        raise InvalidParameter(f"unknown model {name!r}; choose from {sorted(_BUILDERS)}")
    kwargs = {}
    for item in filter(None, (p.strip() for p in rest.split(","))):
        key, eq, val = item.partition("=")
        if not eq:
            raise InvalidParameter(f"malformed model option {item!r}")
        key = key.strip()
        if key == "override":
            kwargs[key] = val.strip().lower() in ("1", "true", "yes")
        elif key == "m":
            kwargs[key] = int(val)
        else:
            kwargs[key] = float(val)
    try:
        return _BUILDERS[name](**kwargs)
    except TypeError as exc:
        raise InvalidParameter(f"bad options for {name}: {exc}") from None


# ---------------------------------------------------------------------------
# lattice-level operations


def on_lattice(signs, ks) -> bool:
    return sum(s * k for s, k in zip(signs, ks)) == 0


def resonance_phi(spec: ModelSpec, ks, term: int = 0):
    """Resonance function ``sum_j s_j phi(k_j)`` of one term at a lattice tuple.

    Integer-valued symbols are evaluated in exact integer arithmetic.
    """
    t = spec.terms[term]
    ks = tuple(int(k) for k in ks)
    if len(ks) != t.m + 1:
        raise OffLattice(f"expected {t.m + 1} frequencies, got {len(ks)}")
    if not on_lattice(t.signs, ks):
        raise OffLattice(f"{ks} violates sum s_j k_j = 0 for signs {t.signs}")
    return phi_sum(spec.symbol, t.signs, ks)


def phi_sum(symbol: DispersionSymbol, signs, ks):
    if symbol.integer_exact:
        return sum(s * int(symbol.exact(k)) for s, k in zip(signs, ks))
    return float(sum(s * float(symbol(k)) for s, k in zip(signs, ks)))


def _tuples(term_m, signs, N):
    """All tuples with |k_j| <= N for j >= 1 and output |k_0| <= N, shape (T, m+1)."""
    rng = np.arange(-N, N + 1)
    grids = np.meshgrid(*([rng] * term_m), indexing="ij")
    rest = np.stack([g.ravel() for g in grids], axis=-1)
    s = np.asarray(signs)
    k0 = -(rest @ s[1:]) * s[0]
    keep = np.abs(k0) <= N
    return np.column_stack((k0[keep], rest[keep]))


def apply_nonlinearity_smalln(spec: ModelSpec, coeffs, N: int) -> np.ndarray:
    """Fourier coefficients of ``P_N N(u)`` by direct summation over the lattice.

    ``coeffs`` holds ``u_hat[k]`` for ``k = -N..N``. The cost is ``O(N^m)``, so
    this is meant as an oracle for small ``N``.
    """
    c = np.asarray(coeffs, dtype=complex)
    if c.shape != (2 * N + 1,):
        raise ValueError(f"expected {2 * N + 1} coefficients")
    out = np.zeros(2 * N + 1, dtype=complex)
    for t in spec.terms:
        K = _tuples(t.m, t.signs, N)
        K = K[t.support(K)]
        if K.size == 0:
            continue
        prod = t.multiplier(K).astype(complex)
        for j in range(1, t.m + 1):
            f = c[K[:, j] + N]
            prod = prod * (f if t.signs[j] > 0 else np.conj(f))
        idx = K[:, 0] + N
        out += np.bincount(idx, prod.real, 2 * N + 1) + 1j * np.bincount(idx, prod.imag, 2 * N + 1)
    if spec.resonant is not None:
        r = spec.resonant
        k = np.arange(-N, N + 1)
        out += r.multiplier(k) * np.abs(c) ** (r.m - 1) * c
    if spec.zero_mean_required:
        # every term is a derivative; dx u dx^2 u = dx((dx u)^2 / 2) has no explicit k0 factor
        out[N] = 0
    return out


def beta_constant(spec: ModelSpec, K: int, term: int = 0) -> float:
    """Smallest ``C`` with ``|Nhat| <= C prod <k_j>^{beta_j}`` over tuples with ``|k_j| <= K``."""
    t = spec.terms[term]
    T = _tuples(t.m, t.signs, K)
    T = T[t.support(T)]
    weight = np.prod(np.sqrt(1.0 + T.astype(float) ** 2) ** np.asarray(t.beta), axis=-1)
    return float(np.max(np.abs(t.multiplier(T)) / weight))


def japanese(k):
    return math.sqrt(1.0 + float(k) ** 2)
