"""Thresholds on the irregularity exponent rho.

All formulas use generic arithmetic: integer inputs are promoted to
:class:`fractions.Fraction`, so rational input gives exact output, floats give
floats and sympy expressions give sympy expressions.

Notation: ``beta = (beta_0, ..., beta_m)``; ``beta_1* >= ... >= beta_m*`` is the
decreasing rearrangement of ``(beta_1, ..., beta_m)``; ``|beta_R|`` is the sum of
the resonant exponents. The partial sums

    S(L) = sum_{l=2}^{L} (beta*_{l+1} + d/2 - s)

drop every summand whose index ``l+1`` exceeds ``m``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction

from .pathgen import InvalidParameter


def _num(x):
    if isinstance(x, bool):
        raise InvalidParameter("booleans are not numbers here")
    if isinstance(x, int):
        return Fraction(x)
    return x


def _max(values):
    try:
        return max(values)
    except TypeError:
        import sympy

        return sympy.Max(*values)


def _as_float(x):
    try:
        return float(x)
    except (TypeError, ValueError):
        return None


def nu_min(s, m: int, beta_R=None):
    """``max(|beta_R| - (m-1) s, 0)``; the short-time exponent must exceed it."""
    if beta_R is None:
        return Fraction(0)
    return _max([sum(_num(b) for b in beta_R) - (m - 1) * _num(s), Fraction(0)])


def s_resonant_threshold(s, m: int, beta_R=None):
    """``max(s, |beta_R| / (m-1))``, the regularity where the fixed point applies."""
    if m < 2:
        raise InvalidParameter("m must be >= 2")
    if beta_R is None:
        return _num(s)
    return _max([_num(s), sum(_num(b) for b in beta_R) / Fraction(m - 1)])


@dataclass(frozen=True)
class ProblemParams:
    """Exponents entering the rho conditions.

    ``nu=None`` means the limit ``nu -> nu_min(s)`` from above.
    """

    alpha: tuple
    beta: tuple
    s: object
    d: int = 1
    beta_R: tuple | None = None
    gamma: object = None
    nu: object = None

    def __post_init__(self):
        if len(self.alpha) != 2:
            raise InvalidParameter("alpha = (alpha_1, alpha_2)")
        a1, a2 = self.alpha
        if _as_float(a1) is not None and not float(a1) > 0:
            raise InvalidParameter("alpha_1 must be positive")
        if _as_float(a2) is not None and float(a2) < 0:
            raise InvalidParameter("alpha_2 must be nonnegative")
        if len(self.beta) < 3:
            raise InvalidParameter("beta needs m+1 >= 3 entries")
        if any(_as_float(b) is not None and float(b) < 0 for b in self.beta):
            raise InvalidParameter("beta must be nonnegative")
        if self.beta_R is not None:
            if len(self.beta_R) % 2 != 0 or len(self.beta_R) < 4:
                raise InvalidParameter("beta_R needs m_R+1 entries with m_R odd >= 3")
            if any(_as_float(b) is not None and float(b) < 0 for b in self.beta_R):
                raise InvalidParameter("beta_R must be nonnegative")
        if int(self.d) != self.d or self.d < 1:
            raise InvalidParameter("d must be a positive integer")

    @property
    def m(self) -> int:
        return len(self.beta) - 1


@dataclass(frozen=True)
class Constraint:
    value: object
    strict: bool
    tag: str

    def to_dict(self):
        return {"value": _jsonable(self.value), "strict": self.strict, "tag": self.tag}


def _jsonable(x):
    if isinstance(x, Fraction):
        return {"float": float(x), "exact": str(x)}
    f = _as_float(x)
    if f is not None and not isinstance(x, float):
        return {"float": f, "exact": str(x)}
    return f if f is not None else str(x)


@dataclass
class RhoBounds:
    """The constraint list with its infimum.

    ``attained`` is true when ``rho = inf_rho`` itself satisfies every
    constraint, i.e. no strict constraint reaches the maximum.
    """

    constraints: list
    inf_rho: object
    attained: bool
    notes: dict = field(default_factory=dict)

    @property
    def binding(self) -> list:
        return [c for c in self.constraints if _equal(c.value, self.inf_rho)]

    def to_dict(self):
        return {
            "inf_rho": _jsonable(self.inf_rho),
            "attained": self.attained,
            "constraints": [c.to_dict() for c in self.constraints],
            "notes": self.notes,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1)


def _equal(a, b) -> bool:
    try:
        diff = a - b
        if hasattr(diff, "simplify"):
            diff = diff.simplify()
        return bool(diff == 0)
    except TypeError:
        return False


def _finish(constraints, notes) -> RhoBounds:
    inf_rho = _max([c.value for c in constraints])
    binding = [c for c in constraints if _equal(c.value, inf_rho)]
    attained = bool(binding) and not any(c.strict for c in binding)
    return RhoBounds(constraints, inf_rho, attained, notes)


def _pieces(p: ProblemParams):
    s = _num(p.s)
    a1, a2 = (_num(a) for a in p.alpha)
    beta = [_num(b) for b in p.beta]
    m = p.m
    star = sorted(beta[1:], reverse=True)  # star[i] = beta*_{i+1}
    half_d = Fraction(p.d, 2)

    def tail(L):
        total = Fraction(0)
        for ell in range(2, L + 1):
            if ell + 1 <= m:
                total = total + star[ell] + half_d - s
        return total

    return s, a1, a2, beta[0], star[0], star[1], m, half_d, tail


def _ranges(m: int, strict_ranges: bool):
    fam3 = [(l0, L) for l0 in range(2, m + 1) for L in range(2, l0)]
    fam4 = [(l0, L) for l0 in range(2, m + 1) for L in range(l0 + 1, m + 1)]
    base = [] if strict_ranges else [("base", 1)]
    return base + fam3, base + fam4


def _tag(family, l0, L):
    if l0 == "base":
        return f"family {family}, empty-sum base case"
    return f"family {family}, l0={l0}, L={L}"


def rho_bounds_nonresonant(p: ProblemParams, strict_ranges: bool = False) -> RhoBounds:
    """Constraints on rho for a strongly non-resonant nonlinearity.

    Families: (1) ``rho >= (beta_0 + beta_1*)/alpha_1``; (2) ``rho >=
    (beta_1* + beta_2* - 2s)/alpha_1``; (3) ``rho > (beta_1* + beta_2* - 2s +
    S(L))/(alpha_1 + alpha_2)`` for ``2 <= l0 <= m, 2 <= L <= l0 - 1``; (4)
    ``rho > (beta_1* + beta_2* + beta_0 + d/2 - s + S(L))/(alpha_1 + alpha_2)``
    for ``2 <= l0 <= m, l0 + 1 <= L <= m``.

    Unless ``strict_ranges`` is set, families (3) and (4) also get their
    empty-sum instance, which the quadratic (m = 2) case needs.
    """
    s, a1, a2, b0, b1, b2, m, half_d, tail = _pieces(p)
    r3, r4 = _ranges(m, strict_ranges)
    cons = [
        Constraint((b0 + b1) / a1, False, "family 1"),
        Constraint((b1 + b2 - 2 * s) / a1, False, "family 2"),
    ]
    for l0, L in r3:
        cons.append(Constraint((b1 + b2 - 2 * s + tail(L)) / (a1 + a2), True, _tag(3, l0, L)))
    for l0, L in r4:
        cons.append(Constraint((b1 + b2 + b0 + half_d - s + tail(L)) / (a1 + a2), True,
                               _tag(4, l0, L)))
    return _finish(cons, {"kind": "nonresonant", "strict_ranges": strict_ranges})


def rho_bounds_resonant(p: ProblemParams, strict_ranges: bool = False) -> RhoBounds:
    """Constraints on rho with a completely resonant part (starred families).

    Same index sets as :func:`rho_bounds_nonresonant`, with additive terms
    ``|beta_R| + (2 - gamma) nu`` in family (1), ``(1 - gamma) nu`` in families
    (2) and (3), and family (4) replaced by
    ``(beta_1* + beta_2* + beta_0 + |beta_R| - s + S(L) + (2 - gamma) nu)/(alpha_1 + alpha_2)``.
    """
    if p.beta_R is None:
        raise InvalidParameter("resonant bounds need beta_R")
    if p.gamma is None:
        raise InvalidParameter("resonant bounds need gamma")
    g = _num(p.gamma)
    gf = _as_float(g)
    if gf is not None and not (0.5 <= gf <= 1.0):
        raise InvalidParameter("gamma must lie in [1/2, 1]")
    s, a1, a2, b0, b1, b2, m, half_d, tail = _pieces(p)
    bR = sum(_num(b) for b in p.beta_R)
    lo = nu_min(p.s, len(p.beta_R) - 1, p.beta_R)
    notes = {"kind": "resonant", "strict_ranges": strict_ranges, "nu_min": _jsonable(lo)}
    if p.nu is None:
        nu = lo
        notes["nu_is_limit"] = True
    else:
        nu = _num(p.nu)
        try:
            below = bool(nu < lo)
        except TypeError:
            below = False
        if below:
            raise InvalidParameter(f"nu={nu} is below nu_min={lo}")
        notes["nu_is_limit"] = _equal(nu, lo)
    if gf is not None and gf in (0.5, 1.0):
        notes["gamma_is_limit"] = True
    r3, r4 = _ranges(m, strict_ranges)
    cons = [
        Constraint((b0 + b1 + bR + (2 - g) * nu) / a1, False, "family 1*"),
        Constraint((b1 + b2 - 2 * s + (1 - g) * nu) / a1, False, "family 2*"),
    ]
    for l0, L in r3:
        cons.append(Constraint((b1 + b2 - 2 * s + tail(L) + (1 - g) * nu) / (a1 + a2), True,
                               _tag("3*", l0, L)))
    for l0, L in r4:
        cons.append(Constraint((b1 + b2 + b0 + bR - s + tail(L) + (2 - g) * nu) / (a1 + a2),
                               True, _tag("4*", l0, L)))
    return _finish(cons, notes)


def exact(x):
    """Short rational equal to a float when one exists, else the float's exact value."""
    if isinstance(x, float):
        fr = Fraction(x).limit_denominator(10**9)
        return fr if float(fr) == x else Fraction(x)
    return _num(x)


def params_for_model(spec, s, term: int = 0, gamma=None, nu=None) -> ProblemParams:
    """Problem parameters of one nonlinear term of a catalog model (floats made exact)."""
    t = spec.terms[term]
    beta_R = tuple(exact(b) for b in spec.resonant.beta) if spec.resonant is not None else None
    return ProblemParams(
        tuple(exact(a) for a in spec.alpha), tuple(exact(b) for b in t.beta), exact(s),
        spec.d, beta_R, None if gamma is None else exact(gamma), None if nu is None else exact(nu),
    )


def rho_bounds_for_model(spec, s, gamma=None, nu=None, strict_ranges: bool = False) -> RhoBounds:
    """Union of the constraints of every nonlinear term of ``spec``.

    Models with a resonant part use the starred families.
    """
    cons, notes = [], {"model": spec.name, "terms": []}
    for i, t in enumerate(spec.terms):
        p = params_for_model(spec, s, i, gamma, nu)
        if spec.resonant is not None:
            rb = rho_bounds_resonant(p, strict_ranges)
        else:
            rb = rho_bounds_nonresonant(p, strict_ranges)
        prefix = f"{t.name}: " if len(spec.terms) > 1 else ""
        cons += [Constraint(c.value, c.strict, prefix + c.tag) for c in rb.constraints]
        notes["terms"].append({"term": t.name, **rb.notes})
    return _finish(cons, notes)
