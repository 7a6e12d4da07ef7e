"""Modulation paths :math:`W_t`.

A :class:`SamplePath` stores a continuous path by its values on a strictly
increasing time grid together with the piecewise-linear interpolant between
nodes. Everything downstream (oscillatory integrals, local times, the solver's
stage sampling) relies on that interpolant, so it is fixed here.

Random paths use numpy's ``PCG64`` bit generator seeded explicitly through
``numpy.random.Generator(numpy.random.PCG64(seed))``. Fractional Brownian
motion is simulated exactly through circulant embedding of the fractional
Gaussian noise covariance (Davies--Harte / Wood--Chan), with a Cholesky
fallback when the embedding is not nonnegative definite.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.linalg


class InvalidParameter(ValueError):
    """Raised for parameters outside an operation's domain."""


class OutOfRange(ValueError):
    """Raised when a time lies outside the span of a path."""


class EmbeddingFailure(RuntimeError):
    """Raised when neither circulant embedding nor Cholesky can factor the covariance."""


def _frozen(a, dtype=float):
    out = np.array(a, dtype=dtype, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class SamplePath:
    """Continuous path sampled on a grid, evaluated by linear interpolation.

    Parameters
    ----------
    times : array_like
        Strictly increasing time nodes, at least two of them.
    values : array_like
        Path values at the nodes.
    meta : dict, optional
        Free-form provenance (generator, parameters, seed, method).
    """

    times: np.ndarray
    values: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        times = _frozen(self.times)
        values = _frozen(self.values)
        if times.ndim != 1 or values.ndim != 1:
            raise InvalidParameter("times and values must be one-dimensional")
        if times.size < 2 or times.size != values.size:
            raise InvalidParameter("times and values need equal length >= 2")
        if not np.all(np.diff(times) > 0):
            raise InvalidParameter("times must be strictly increasing")
        if not (np.all(np.isfinite(times)) and np.all(np.isfinite(values))):
            raise InvalidParameter("path samples must be finite")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "meta", dict(self.meta))

    @property
    def start(self) -> float:
        return float(self.times[0])

    @property
    def end(self) -> float:
        return float(self.times[-1])

    @property
    def horizon(self) -> float:
        return self.end - self.start

    @property
    def max_spacing(self) -> float:
        return float(np.max(np.diff(self.times)))

    def __len__(self):
        return self.times.size

    def __call__(self, t):
        return sample_at(self, t)

    def restrict(self, s: float, t: float) -> tuple[np.ndarray, np.ndarray]:
        """Nodes and values of the interpolant on ``[s, t]``, endpoints included."""
        if not (s < t):
            raise OutOfRange(f"need s < t, got s={s}, t={t}")
        _check_span(self, np.array([s, t]))
        inner = (self.times > s) & (self.times < t)
        r = np.concatenate(([s], self.times[inner], [t]))
        w = np.concatenate(([sample_at(self, s)], self.values[inner], [sample_at(self, t)]))
        return r, w


@dataclass(frozen=True)
class FbmParams:
    """Parameters of a fractional Brownian motion sample on ``[0, horizon]``."""

    hurst: float
    horizon: float = 1.0
    n_points: int = 2**12 + 1
    seed: int = 0

    def __post_init__(self):
        if not (0.0 < self.hurst < 1.0):
            raise InvalidParameter(f"hurst must lie in (0, 1), got {self.hurst}")
        if not self.horizon > 0:
            raise InvalidParameter(f"horizon must be positive, got {self.horizon}")
        if int(self.n_points) != self.n_points or self.n_points < 2:
            raise InvalidParameter(f"n_points must be an integer >= 2, got {self.n_points}")
        if int(self.seed) != self.seed or not (0 <= self.seed < 2**64):
            raise InvalidParameter("seed must be an unsigned 64-bit integer")


def _check_span(path: SamplePath, t: np.ndarray):
    lo, hi = path.times[0], path.times[-1]
    if np.any(t < lo) or np.any(t > hi) or np.any(np.isnan(t)):
        raise OutOfRange(f"time outside path span [{lo}, {hi}]")


def sample_at(path: SamplePath, t):
    """Evaluate the piecewise-linear interpolant; exact at nodes."""
    ta = np.asarray(t, dtype=float)
    _check_span(path, ta)
    out = np.interp(ta, path.times, path.values)
    return float(out) if out.ndim == 0 else out


def uniform_grid(horizon: float, n_points: int) -> np.ndarray:
    if not horizon > 0:
        raise InvalidParameter(f"horizon must be positive, got {horizon}")
    if int(n_points) != n_points or n_points < 2:
        raise InvalidParameter(f"n_points must be an integer >= 2, got {n_points}")
    # node i is i*h exactly, not an accumulated sum
    return np.arange(n_points, dtype=float) * (horizon / (n_points - 1))


def generate_deterministic(slope: float, horizon: float, n_points: int) -> SamplePath:
    """The path ``W(t) = slope * t`` on a uniform grid of ``[0, horizon]``."""
    t = uniform_grid(horizon, n_points)
    return SamplePath(t, slope * t, {"kind": "linear", "slope": float(slope)})


def make_rng(seed: int) -> np.random.Generator:
    """The generator used for every random object in the package."""
    return np.random.Generator(np.random.PCG64(int(seed)))


def fgn_autocovariance(hurst: float, n: int) -> np.ndarray:
    """Autocovariance of unit-step fractional Gaussian noise at lags ``0..n-1``."""
    k = np.arange(n, dtype=float)
    h2 = 2.0 * hurst
    return 0.5 * (np.abs(k + 1) ** h2 - 2.0 * k**h2 + np.abs(k - 1) ** h2)


def _circulant_fgn(hurst, n, rng, tol=1e-10):
    gamma = fgn_autocovariance(hurst, n + 1)
    # first row of the 2n circulant: gamma_0..gamma_n, gamma_{n-1}..gamma_1
    row = np.concatenate((gamma, gamma[-2:0:-1]))
    lam = np.fft.fft(row).real
    if lam.min() < -tol * lam.max():
        return None
    lam = np.clip(lam, 0.0, None)
    m = row.size
    xi = rng.standard_normal(m) + 1j * rng.standard_normal(m)
    y = np.fft.fft(np.sqrt(lam / m) * xi)
    return y.real[:n]


def _cholesky_fgn(hurst, n, rng):
    gamma = fgn_autocovariance(hurst, n)
    cov = scipy.linalg.toeplitz(gamma)
    try:
        chol = np.linalg.cholesky(cov)
    except np.linalg.LinAlgError as exc:
        raise EmbeddingFailure("fGn covariance is not positive definite") from exc
    return chol @ rng.standard_normal(n)


def generate_fbm(params: FbmParams, method: str = "auto") -> SamplePath:
    """One sample of fractional Brownian motion with ``W(0) = 0``.

    Increments over a lag ``delta`` have variance ``delta**(2H)``. The method
    that actually ran (``"circulant"`` or ``"cholesky"``) is recorded in
    ``path.meta["method"]``.

    Parameters
    ----------
    params : FbmParams
    method : {"auto", "circulant", "cholesky"}
        ``"auto"`` tries circulant embedding and falls back to Cholesky.
    """
    n = params.n_points - 1
    dt = params.horizon / n
    rng = make_rng(params.seed)
    noise = None
    used = method
    if method in ("auto", "circulant"):
        noise = _circulant_fgn(params.hurst, n, rng)
        used = "circulant"
        if noise is None:
            if method == "circulant":
                raise EmbeddingFailure("circulant embedding is not nonnegative definite")
            rng = make_rng(params.seed)
    if noise is None:
        noise = _cholesky_fgn(params.hurst, n, rng)
        used = "cholesky"
    increments = noise * dt**params.hurst
    values = np.concatenate(([0.0], np.cumsum(increments)))
    meta = {
        "kind": "fbm",
        "hurst": float(params.hurst),
        "horizon": float(params.horizon),
        "n_points": int(params.n_points),
        "seed": int(params.seed),
        "method": used,
        "rng": "numpy PCG64",
    }
    return SamplePath(uniform_grid(params.horizon, params.n_points), values, meta)


def generate_brownian(horizon: float, n_points: int, seed: int) -> SamplePath:
    """Standard Brownian motion, i.e. fBm with Hurst index 1/2."""
    return generate_fbm(FbmParams(0.5, horizon, n_points, seed))


def write_path_csv(path: SamplePath, dest) -> None:
    """Write ``t,w`` rows with 17 significant digits (round-trips doubles)."""
    with open(dest, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["t", "w"])
        for t, w in zip(path.times, path.values):
            writer.writerow([f"{t:.17g}", f"{w:.17g}"])


def read_path_csv(src) -> SamplePath:
    with open(src, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if [h.strip() for h in header] != ["t", "w"]:
            raise InvalidParameter(f"expected header 't,w', got {header!r}")
        rows = [(float(a), float(b)) for a, b in reader]
    arr = np.array(rows, dtype=float).reshape(-1, 2)
    return SamplePath(arr[:, 0], arr[:, 1], {"kind": "csv", "source": str(Path(src))})
