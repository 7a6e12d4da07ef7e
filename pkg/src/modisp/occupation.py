"""Occupation measure, local time and irregularity probes of a path.

All quantities are computed exactly for the piecewise-linear interpolant of a
:class:`~modisp.pathgen.SamplePath`. On a segment where ``W(r) = a + b r`` the
phase integral has the closed form

.. math::

    \\int_{r_1}^{r_2} e^{i\\xi W_r}\\,dr
      = (r_2 - r_1)\\, e^{i\\xi (w_1 + w_2)/2}\\,
        \\operatorname{sinc}\\big(\\xi (w_2 - w_1)/2\\big),

which is already stable in the limits ``b -> 0`` and ``xi -> 0``.

The irregularity probe measures

.. math::

    \\sup_{(s,t)}\\sup_{\\xi}\\; \\langle\\xi\\rangle^{\\rho}
        \\frac{|\\Phi^W_{s,t}(\\xi)|}{(t-s)^{\\gamma}},
    \\qquad \\langle\\xi\\rangle = (1 + \\xi^2)^{1/2},

on finite grids of intervals and frequencies. This ratio is the operational
surrogate used here for the Fourier--Lebesgue / Hoelder-in-time norm of the
local time; nothing is extrapolated beyond the grids, which travel with the
report.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .pathgen import OutOfRange, SamplePath


def japanese_bracket(xi):
    return np.sqrt(1.0 + np.square(xi, dtype=float))


def _segment_phase(dr, wa, wb, xi):
    # exact integral of exp(i xi w(r)) over a linear piece
    half = 0.5 * xi * (wb - wa)
    return dr * np.exp(0.5j * xi * (wa + wb)) * np.sinc(half / np.pi)


def oscillatory_integral(path: SamplePath, s: float, t: float, xi):
    """Fourier transform of the local time on ``[s, t]`` at frequency ``xi``.

    Returns ``int_s^t exp(i xi W_r) dr`` for the piecewise-linear interpolant,
    summed segment by segment in closed form. ``xi`` may be an array.
    """
    r, w = path.restrict(s, t)
    xi_arr = np.asarray(xi, dtype=float)
    flat = xi_arr.reshape(-1, 1)
    vals = _segment_phase(np.diff(r)[None, :], w[None, :-1], w[None, 1:], flat).sum(axis=1)
    if xi_arr.ndim == 0:
        return complex(vals[0])
    return vals.reshape(xi_arr.shape)


def cumulative_phase(path: SamplePath, times, xi: float) -> np.ndarray:
    """``C(t) = int_{t_0}^{t} exp(i xi W_r) dr`` at each requested time.

    Pair values follow as differences ``C(t) - C(s)``; this is how the
    irregularity probe evaluates many intervals at once.
    """
    q = np.asarray(times, dtype=float)
    if np.any(q < path.times[0]) or np.any(q > path.times[-1]):
        raise OutOfRange("query time outside path span")
    tt, ww = path.times, path.values
    seg = _segment_phase(np.diff(tt), ww[:-1], ww[1:], xi)
    at_nodes = np.concatenate(([0.0], np.cumsum(seg)))
    i = np.clip(np.searchsorted(tt, q, side="right") - 1, 0, tt.size - 2)
    wq = np.interp(q, tt, ww)
    return at_nodes[i] + _segment_phase(q - tt[i], ww[i], wq, xi)


# ---------------------------------------------------------------------------
# local time


@dataclass(frozen=True, eq=False)
class LocalTimeEstimate:
    """Binned local time of a path on an interval.

    ``density[j]`` is the time spent in ``[bin_edges[j], bin_edges[j+1])``
    divided by the bin width (the last bin is closed on the right).
    """

    bin_edges: np.ndarray
    density: np.ndarray
    interval: tuple[float, float]

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.bin_edges)

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.bin_edges[:-1] + self.bin_edges[1:])

    @property
    def mass(self) -> np.ndarray:
        return self.density * self.widths

    @property
    def total_mass(self) -> float:
        return float(self.mass.sum())


def split_at_levels(r: np.ndarray, w: np.ndarray, levels: np.ndarray):
    """Insert every crossing of the given levels into a piecewise-linear path.

    After refinement no level lies strictly between the values at the ends of
    any piece, so each piece stays inside one bin.
    """
    levels = np.asarray(levels, dtype=float)
    wa, wb = w[:-1], w[1:]
    lo, hi = np.minimum(wa, wb), np.maximum(wa, wb)
    first = np.searchsorted(levels, lo, side="right")
    last = np.searchsorted(levels, hi, side="left")
    counts = np.maximum(last - first, 0)
    n_seg = wa.size
    if counts.sum() == 0:
        return r, w
    seg_of = np.repeat(np.arange(n_seg), counts)
    offs = np.arange(counts.sum()) - np.repeat(np.cumsum(counts) - counts, counts)
    rising = wb[seg_of] > wa[seg_of]
    lvl_idx = np.where(rising, first[seg_of] + offs, last[seg_of] - 1 - offs)
    zc = levels[lvl_idx]
    frac = (zc - wa[seg_of]) / (wb[seg_of] - wa[seg_of])
    rc = np.clip(r[seg_of] + frac * (r[seg_of + 1] - r[seg_of]), r[seg_of], r[seg_of + 1])
    # order: segment index, then node (rank 0) before its crossings (rank 1 + offs)
    seg_key = np.concatenate((np.arange(r.size), seg_of))
    rank = np.concatenate((np.zeros(r.size), 1.0 + offs))
    order = np.lexsort((rank, seg_key))
    return np.concatenate((r, rc))[order], np.concatenate((w, zc))[order]


def _default_edges(w, n_bins):
    lo, hi = float(w.min()), float(w.max())
    if hi == lo:
        lo, hi = lo - 0.5, hi + 0.5
    return np.linspace(lo, hi, n_bins + 1)


def _bin_index(z, edges):
    j = np.searchsorted(edges, z, side="right") - 1
    j = np.where(z == edges[-1], edges.size - 2, j)
    return j


def local_time_histogram(path: SamplePath, s: float, t: float, n_bins: int = 64,
                         bin_edges=None) -> LocalTimeEstimate:
    """Exact occupation of each level bin by the interpolant on ``[s, t]``.

    Time spent per bin is obtained by cutting every segment at the bin edges,
    so no time sampling is involved. With the default edges (``n_bins`` equal
    bins spanning the path's range on the interval) the total mass is
    ``t - s`` up to roundoff; custom edges that do not cover the range lose
    the uncovered mass.
    """
    r, w = path.restrict(s, t)
    if bin_edges is None:
        if int(n_bins) != n_bins or n_bins < 1:
            raise ValueError("n_bins must be a positive integer")
        edges = _default_edges(w, int(n_bins))
    else:
        edges = np.asarray(bin_edges, dtype=float)
        if edges.ndim != 1 or edges.size < 2 or not np.all(np.diff(edges) > 0):
            raise ValueError("bin_edges must be strictly increasing with >= 2 entries")
    rr, ww = split_at_levels(r, w, edges)
    dr = np.diff(rr)
    mid = 0.5 * (ww[:-1] + ww[1:])
    j = _bin_index(mid, edges)
    keep = (j >= 0) & (j < edges.size - 1)
    mass = np.bincount(j[keep], weights=dr[keep], minlength=edges.size - 1)
    return LocalTimeEstimate(edges, mass / np.diff(edges), (float(s), float(t)))


_GL_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _gauss_legendre(order):
    if order not in _GL_CACHE:
        _GL_CACHE[order] = np.polynomial.legendre.leggauss(order)
    return _GL_CACHE[order]


def time_integral(path: SamplePath, s: float, t: float, F, order: int = 8, levels=None) -> float:
    """``int_s^t F(W_r) dr`` by Gauss--Legendre on every linear piece.

    Exact for polynomial ``F`` of degree below ``2*order``. When ``levels``
    are given the pieces are first cut at those levels, which makes the rule
    exact for ``F`` piecewise polynomial between them.
    """
    r, w = path.restrict(s, t)
    if levels is not None:
        r, w = split_at_levels(r, w, levels)
    x, wt = _gauss_legendre(order)
    dr = np.diff(r)
    wa, wb = w[:-1], w[1:]
    nodes = wa[:, None] + (wb - wa)[:, None] * (0.5 * (x[None, :] + 1.0))
    vals = np.asarray(F(nodes), dtype=float)
    return float(np.sum(0.5 * dr * (vals @ wt)))


def occupation_formula_check(path: SamplePath, s: float, t: float, F, n_bins: int = 64,
                             order: int = 8) -> tuple[float, float]:
    """Both sides of the occupation-time formula for ``F``.

    ``lhs = int_s^t F(W_r) dr`` (exact per-piece quadrature) and
    ``rhs = sum_bins F(z_mid) * localtime * width``.
    """
    lt = local_time_histogram(path, s, t, n_bins)
    lhs = time_integral(path, s, t, F, order=order, levels=lt.bin_edges)
    rhs = float(np.sum(np.asarray(F(lt.centers), dtype=float) * lt.mass))
    return lhs, rhs


# ---------------------------------------------------------------------------
# irregularity


def default_xi_grid(xi_max: float = 2.0**14, per_octave: int = 4) -> np.ndarray:
    n_oct = np.log2(xi_max)
    return 2.0 ** np.linspace(0.0, n_oct, int(round(n_oct * per_octave)) + 1)


def resolved_xi_grid(path: SamplePath, c: float = 0.5, per_octave: int = 4) -> np.ndarray:
    """Logarithmic grid from 1 up to ``c / median|dW|``.

    Above roughly the inverse typical increment the piecewise-linear
    interpolant, not the sampled process, dominates ``Phi``; the cap keeps the
    probe in the range where the path is resolved.
    """
    inc = np.abs(np.diff(path.values))
    med = float(np.median(inc))
    if med <= 0:
        raise ValueError("path has no resolvable increments")
    return default_xi_grid(max(2.0, c / med), per_octave)


def dyadic_pairs(horizon: float, depth: int, start: float = 0.0) -> np.ndarray:
    """All dyadic sub-intervals of ``[start, start + horizon]`` down to level ``depth``."""
    out = []
    for level in range(depth + 1):
        j = np.arange(2**level)
        h = horizon / 2**level
        out.append(np.column_stack((start + j * h, start + (j + 1) * h)))
    return np.concatenate(out)


def default_rho_grid() -> np.ndarray:
    return np.round(np.arange(0.0, 3.0 + 1e-9, 0.05), 10)


@dataclass(eq=False)
class IrregularityReport:
    """Empirical (rho, gamma)-irregularity of a path on finite grids.

    ``pair_sup[i]`` is ``max over pairs of |Phi_{s,t}(xi_i)| / (t-s)^gamma``;
    the ratio for any rho then factors as
    ``max_i <xi_i>^rho * pair_sup[i]``.
    """

    gamma: float
    xi_grid: np.ndarray
    pair_grid: np.ndarray
    rho_grid: np.ndarray
    pair_sup: np.ndarray
    threshold: float
    path_meta: dict = field(default_factory=dict)

    def sup_ratio_at(self, rho: float, xi_max: float | None = None) -> float:
        mask = np.ones_like(self.xi_grid, bool) if xi_max is None else self.xi_grid <= xi_max
        if not mask.any():
            raise ValueError("no frequency below xi_max")
        return float(np.max(japanese_bracket(self.xi_grid[mask]) ** rho * self.pair_sup[mask]))

    @property
    def sup_ratio(self) -> np.ndarray:
        w = japanese_bracket(self.xi_grid)
        return np.array([np.max(w**rho * self.pair_sup) for rho in self.rho_grid])

    def running_sup(self, rho: float) -> np.ndarray:
        """``sup_{xi' <= xi}`` of the ratio, as a function of the grid frequency."""
        return np.maximum.accumulate(japanese_bracket(self.xi_grid) ** rho * self.pair_sup)

    def growth_exponent(self, rho: float, lower_fraction: float = 0.5) -> float:
        """Log-log growth rate of the running sup over the upper part of the grid.

        The running sup is compared between the geometric point splitting the
        frequency range at ``lower_fraction`` (in log scale) and the top.
        """
        xi = self.xi_grid
        run = self.running_sup(rho)
        lx = np.log(xi)
        cut = lx[0] + lower_fraction * (lx[-1] - lx[0])
        i0 = int(np.searchsorted(lx, cut))
        i0 = min(max(i0, 0), xi.size - 2)
        return float(np.log(run[-1] / run[i0]) / (lx[-1] - lx[i0]))

    @property
    def breakdown_rho(self) -> float:
        """Largest grid rho up to which the running sup grows no faster than ``xi**threshold``.

        Returns ``nan`` when even the smallest grid rho exceeds the threshold.
        """
        best = np.nan
        for rho in self.rho_grid:
            if self.growth_exponent(rho) <= self.threshold:
                best = float(rho)
            else:
                break
        return best

    def to_json(self) -> str:
        return json.dumps(
            {
                "gamma": self.gamma,
                "rho_grid": [float(r) for r in self.rho_grid],
                "sup_ratio": [float(v) for v in self.sup_ratio],
                "xi_max": float(self.xi_grid.max()),
                "xi_grid": [float(x) for x in self.xi_grid],
                "pairs": [[float(a), float(b)] for a, b in self.pair_grid],
                "breakdown_rho": None if np.isnan(self.breakdown_rho) else self.breakdown_rho,
                "threshold": self.threshold,
                "path_meta": self.path_meta,
            },
            indent=1,
        )


def estimate_irregularity(path: SamplePath, gamma: float, xi_grid=None, pair_grid=None,
                          rho_grid=None, threshold: float = 0.1) -> IrregularityReport:
    """Probe the (rho, gamma)-irregularity of ``path`` on finite grids.

    Parameters
    ----------
    gamma : float
        Hoelder exponent in time, in ``(0, 1]``.
    xi_grid : array_like, optional
        Frequencies; defaults to a logarithmic grid from 1 to ``2**14``.
    pair_grid : array_like of shape (P, 2), optional
        Intervals ``(s, t)``; defaults to dyadic intervals of the path span
        down to the path's node spacing (at most 16 levels).
    rho_grid : array_like, optional
        Candidate rho values, sorted increasingly.
    threshold : float
        Growth exponent of the running sup (in ``xi``) tolerated before a rho
        counts as broken; see :attr:`IrregularityReport.breakdown_rho`.
    """
    if not (0.0 < gamma <= 1.0):
        raise ValueError("gamma must lie in (0, 1]")
    xi = default_xi_grid() if xi_grid is None else np.asarray(xi_grid, dtype=float)
    if pair_grid is None:
        depth = int(min(16, max(1, np.ceil(np.log2(len(path) - 1)))))
        pairs = dyadic_pairs(path.horizon, depth, path.start)
    else:
        pairs = np.asarray(pair_grid, dtype=float).reshape(-1, 2)
    rho = default_rho_grid() if rho_grid is None else np.sort(np.asarray(rho_grid, dtype=float))
    if xi.size == 0 or pairs.size == 0 or rho.size == 0:
        raise ValueError("grids must be nonempty")
    if np.any(pairs[:, 1] <= pairs[:, 0]):
        raise ValueError("every pair needs s < t")
    ends, inv = np.unique(pairs.ravel(), return_inverse=True)
    inv = inv.reshape(-1, 2)
    scale = (pairs[:, 1] - pairs[:, 0]) ** gamma
    pair_sup = np.empty(xi.size)
    for i, x in enumerate(xi):
        c = cumulative_phase(path, ends, x)
        pair_sup[i] = np.max(np.abs(c[inv[:, 1]] - c[inv[:, 0]]) / scale)
    return IrregularityReport(gamma, xi, pairs, rho, pair_sup, float(threshold), dict(path.meta))
