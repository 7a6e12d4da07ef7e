"""Fourier--Galerkin integration in the interaction representation.

The unknown is ``v_hat[k] = exp(i W_t phi(k)) u_hat[k]`` for ``|k| <= N``; it obeys

    d v_hat[k] / dt = -exp(i W_t phi(k)) * N(u)^[k],    u_hat = exp(-i W_t phi) v_hat,

so the linear flow is carried exactly by the phases and only the nonlinearity
is integrated (classical RK4). ``N(u)`` is evaluated in physical space on a
grid of ``M >= (m+1) N + 1`` points, which makes every degree-``m`` product
alias-free on ``|k| <= N``: the scheme is the exact Galerkin truncation.

Norms use the normalisation ``||u||_{H^s}^2 = sum_k <k>^{2s} |u_hat[k]|^2``.
"""
from __future__ import annotations

import csv
import json
import math
import warnings
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
import scipy.fft

from . import __version__
from .models import ModelSpec
from .pathgen import InvalidParameter, SamplePath, sample_at


class IntegrationFailure(RuntimeError):
    """Raised when the state stops being finite; ``partial`` holds the run so far."""

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class StepSizeWarning(UserWarning):
    """The phase ``phi(k) * dW`` rotates too far within one step to be resolved."""


def wavenumbers(N: int) -> np.ndarray:
    return np.arange(-N, N + 1)


def bracket(k):
    return np.sqrt(1.0 + np.asarray(k, dtype=float) ** 2)


# ---------------------------------------------------------------------------
# states


@dataclass(frozen=True, eq=False)
class SpectralState:
    """Interaction coefficients ``v_hat[k]``, ``k = -N..N`` ascending, at ``time``."""

    coeffs: np.ndarray
    N: int
    time: float
    field_type: str = "real"

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=complex, copy=True)
        if c.shape != (2 * self.N + 1,):
            raise InvalidParameter(f"expected {2 * self.N + 1} coefficients, got {c.shape}")
        if self.field_type not in ("real", "complex"):
            raise InvalidParameter("field_type must be 'real' or 'complex'")
        if not np.all(np.isfinite(c)):
            raise InvalidParameter("coefficients must be finite")
        if self.field_type == "real":
            scale = max(1.0, float(np.abs(c).max(initial=0.0)))
            if np.abs(c - np.conj(c[::-1])).max(initial=0.0) > 1e-10 * scale:
                raise InvalidParameter("real field needs v_hat[-k] = conj(v_hat[k])")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def k(self) -> np.ndarray:
        return wavenumbers(self.N)

    def physical(self, spec: ModelSpec, W: float) -> np.ndarray:
        """``u_hat = exp(-i W phi(k)) v_hat``."""
        return np.exp(-1j * W * spec.symbol(self.k)) * self.coeffs

    @classmethod
    def from_physical(cls, uhat, spec: ModelSpec, W: float, time: float = 0.0):
        uhat = np.asarray(uhat, dtype=complex)
        N = (uhat.size - 1) // 2
        v = np.exp(1j * W * spec.symbol(wavenumbers(N))) * uhat
        return cls(v, N, time, spec.field_type)


def hs_norm(uhat, s: float = 0.0) -> float:
    uhat = np.asarray(uhat)
    N = (uhat.size - 1) // 2
    return float(np.sqrt(np.sum(bracket(wavenumbers(N)) ** (2 * s) * np.abs(uhat) ** 2)))


def truncate(uhat, N: int) -> np.ndarray:
    """``P_{<=N}``: keep ``|k| <= N`` (or zero-pad when the input is shorter)."""
    uhat = np.asarray(uhat, dtype=complex)
    n0 = (uhat.size - 1) // 2
    out = np.zeros(2 * N + 1, dtype=complex)
    n = min(n0, N)
    out[N - n : N + n + 1] = uhat[n0 - n : n0 + n + 1]
    return out


# ---------------------------------------------------------------------------
# initial data


@dataclass(frozen=True)
class InitialData:
    """Named initial profile.

    ``cosine``: ``amplitude * cos(mode x)``. ``gaussian``: ``amplitude *
    exp(-(x - pi)^2 / (2 width^2))``. ``random_hs``: ``u_hat[k] =
    amplitude * <k>^{-1/2 - s - eps} exp(i theta_k)`` with phases drawn per
    frequency from ``numpy.random.default_rng([seed, j(k)])`` so that
    truncations at different ``N`` share their coefficients. ``file``: CSV
    ``k,re,im`` of ``u_hat``.
    """

    profile: str = "cosine"
    amplitude: float = 1.0
    mode: int = 1
    width: float = 0.5
    s: float = 0.0
    eps: float = 0.01
    seed: int = 0
    file: str | None = None
    zero_mean: bool | None = None

    def __post_init__(self):
        if self.profile not in ("cosine", "gaussian", "random_hs", "file"):
            raise InvalidParameter(f"unknown initial profile {self.profile!r}")
        if self.profile == "file" and not self.file:
            raise InvalidParameter("profile 'file' needs a file name")


def initial_coeffs(init: InitialData, N: int, spec: ModelSpec) -> np.ndarray:
    """Fourier coefficients ``u_hat[k]``, ``|k| <= N``, of the initial profile."""
    k = wavenumbers(N)
    real = spec.is_real
    if init.profile == "cosine":
        u = np.zeros(2 * N + 1, dtype=complex)
        if init.mode <= N:
            u[N + init.mode] += init.amplitude / 2
            u[N - init.mode] += init.amplitude / 2
    elif init.profile == "gaussian":
        M = max(1024, 8 * N)
        x = 2 * np.pi * np.arange(M) / M
        g = init.amplitude * np.exp(-((x - np.pi) ** 2) / (2 * init.width**2))
        full = np.fft.fft(g) / M
        u = full[k % M]
        if real:
            u = 0.5 * (u + np.conj(u[::-1]))
    elif init.profile == "random_hs":
        u = np.zeros(2 * N + 1, dtype=complex)
        amp = init.amplitude * bracket(k) ** (-0.5 - init.s - init.eps)
        for i, kk in enumerate(k):
            if real and kk < 0:
                continue
            j = 2 * abs(int(kk)) + (1 if kk < 0 else 0)
            theta = np.random.default_rng([int(init.seed), j]).uniform(0, 2 * np.pi)
            u[i] = amp[i] * np.exp(1j * theta)
        if real:
            u[N] = u[N].real
            u[:N] = np.conj(u[N + 1 :][::-1])
    else:
        u = truncate(read_coeffs_csv(init.file), N)
    zero_mean = spec.zero_mean_required if init.zero_mean is None else init.zero_mean
    if zero_mean:
        u[N] = 0.0
    return u


# ---------------------------------------------------------------------------
# nonlinearity by transforms


class _Workspace:
    """Per-(model, N) constants: wavenumbers, symbol values, padded grid size."""

    def __init__(self, spec: ModelSpec, N: int):
        self.spec = spec
        self.N = N
        self.k = wavenumbers(N)
        self.kf = self.k.astype(float)
        self.phi = np.asarray(spec.symbol(self.k), dtype=float)
        m = max(spec.m, 1)
        self.M = int(scipy.fft.next_fast_len((m + 1) * N + 1))
        self.real = spec.is_real

    # u_hat (|k| <= N) -> grid values
    def to_grid(self, uhat):
        M, N = self.M, self.N
        if self.real:
            half = np.zeros(M // 2 + 1, dtype=complex)
            half[: N + 1] = uhat[N:]
            return scipy.fft.irfft(half, n=M) * M
        full = np.zeros(M, dtype=complex)
        full[self.k % M] = uhat
        return scipy.fft.ifft(full) * M

    # grid values -> coefficients on |k| <= N
    def from_grid(self, g):
        M, N = self.M, self.N
        if self.real:
            half = scipy.fft.rfft(g) / M
            pos = half[: N + 1]
            return np.concatenate((np.conj(pos[:0:-1]), pos))
        return (scipy.fft.fft(g) / M)[self.k % M]


def nonlinearity_hat(spec: ModelSpec, uhat, ws: _Workspace | None = None) -> np.ndarray:
    """``N(u)^[k]`` for ``|k| <= N`` by alias-free pseudospectral products."""
    uhat = np.asarray(uhat, dtype=complex)
    N = (uhat.size - 1) // 2
    ws = ws if ws is not None else _Workspace(spec, N)
    ik = 1j * ws.kf
    kind = spec.kind
    if kind == "linear":
        return np.zeros_like(uhat)
    if kind == "burgers":
        u = ws.to_grid(uhat)
        out = ik * ws.from_grid(u * u)
    elif kind == "nls_conj":
        u = ws.to_grid(uhat)
        out = ws.from_grid(np.conj(u) ** spec.m)
    elif kind == "wick_mkdv":
        out = _wick_mkdv_hat(ws, uhat, ik)
    elif kind == "kdv5":
        u = ws.to_grid(uhat)
        ux = ws.to_grid(ik * uhat)
        uxx = ws.to_grid(-(ws.kf**2) * uhat)
        out = ws.from_grid(ux * uxx) + ik * ws.from_grid(u * uxx) + _wick_mkdv_hat(ws, uhat, ik)
    elif kind == "wick_fnls":
        S = float(np.sum(np.abs(uhat) ** 2))
        u = ws.to_grid(uhat)
        out = 1j * ws.from_grid((u * np.conj(u)) * u) - 2j * S * uhat
    else:
        raise InvalidParameter(f"no transform rule for model kind {kind!r}")
    if spec.zero_mean_required:
        # the mean mode of these nonlinearities vanishes identically
        out[N] = 0.0
    return out


def _wick_mkdv_hat(ws, uhat, ik):
    # (u^2 - sum |u_hat|^2) dx u, the Wick subtraction applied modewise
    S = float(np.sum(np.abs(uhat) ** 2))
    u = ws.to_grid(uhat)
    ux = ws.to_grid(ik * uhat)
    return ws.from_grid(u * u * ux) - S * ik * uhat


# ---------------------------------------------------------------------------
# configuration and integration


@dataclass(frozen=True, eq=False)
class SimConfig:
    """Everything a run depends on.

    The path grid must be at least four times finer than ``dt`` so that the
    stage values of ``W`` are interpolated within single path segments.
    """

    model: ModelSpec
    N: int
    dt: float
    t_end: float
    path: SamplePath
    initial: InitialData = InitialData()
    diagnostics_every: int = 1
    hs_orders: tuple = (0.0,)
    t0: float = 0.0
    keep_states: bool = True

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 1:
            raise InvalidParameter("N must be an integer >= 1")
        if not self.dt > 0:
            raise InvalidParameter("dt must be positive")
        if not self.t_end > self.t0:
            raise InvalidParameter("t_end must exceed t0")
        if self.t0 < self.path.start or self.t_end > self.path.end + 1e-12:
            raise InvalidParameter(
                f"[t0, t_end] = [{self.t0}, {self.t_end}] is outside the path span "
                f"[{self.path.start}, {self.path.end}]")
        if self.path.max_spacing > self.dt / 4 * (1 + 1e-9):
            raise InvalidParameter(
                f"path spacing {self.path.max_spacing:.3g} must be <= dt/4 = {self.dt / 4:.3g}")
        if int(self.diagnostics_every) != self.diagnostics_every or self.diagnostics_every < 1:
            raise InvalidParameter("diagnostics_every must be a positive integer")

    @property
    def n_steps(self) -> int:
        return max(1, int(math.ceil((self.t_end - self.t0) / self.dt - 1e-9)))

    def to_dict(self) -> dict:
        return {
            "model": self.model.name,
            "N": self.N,
            "dt": self.dt,
            "t0": self.t0,
            "t_end": self.t_end,
            "initial": {k: v for k, v in vars(self.initial).items()},
            "diagnostics_every": self.diagnostics_every,
            "hs_orders": list(self.hs_orders),
            "path_meta": self.path.meta,
            "path_points": len(self.path),
            "dealias": "exact_padding",
        }


class Integrator:
    """RK4 on the interaction ODE for one (model, N)."""

    def __init__(self, spec: ModelSpec, N: int, path: SamplePath):
        self.spec = spec
        self.path = path
        self.ws = _Workspace(spec, N)

    def rhs(self, v, t: float, W: float | None = None):
        W = sample_at(self.path, t) if W is None else W
        ph = np.exp(-1j * W * self.ws.phi)
        return -np.conj(ph) * nonlinearity_hat(self.spec, ph * v, self.ws)

    def step(self, v, t: float, dt: float):
        """One classical RK4 step from ``t`` to ``t + dt`` (``dt`` may be negative)."""
        if self.spec.nonlinearity.is_linear:
            return v.copy(), 0.0
        h = 0.5 * dt
        W0, Wh, W1 = (sample_at(self.path, x) for x in (t, t + h, t + dt))
        k1 = self.rhs(v, t, W0)
        k2 = self.rhs(v + h * k1, t + h, Wh)
        k3 = self.rhs(v + h * k2, t + h, Wh)
        k4 = self.rhs(v + dt * k3, t + dt, W1)
        out = v + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        if self.spec.is_real:
            out = 0.5 * (out + np.conj(out[::-1]))
        return out, float(np.abs(k1).max(initial=0.0))


def rhs(state: SpectralState, t: float, config: SimConfig) -> np.ndarray:
    return Integrator(config.model, state.N, config.path).rhs(state.coeffs, t)


def step(state: SpectralState, dt: float, config: SimConfig) -> SpectralState:
    t1 = state.time + dt
    if t1 > config.path.end + 1e-12 or t1 < config.path.start - 1e-12:
        raise InvalidParameter("step leaves the path span")
    out, _ = Integrator(config.model, state.N, config.path).step(state.coeffs, state.time, dt)
    if not np.all(np.isfinite(out)):
        raise IntegrationFailure(f"nonfinite state after t={state.time}")
    return SpectralState(out, state.N, t1, state.field_type)


@dataclass
class DiagnosticsLog:
    hs_orders: tuple
    t: list = field(default_factory=list)
    mean: list = field(default_factory=list)
    l2: list = field(default_factory=list)
    hs: list = field(default_factory=list)
    max_rhs: list = field(default_factory=list)

    def record(self, t, uhat, max_rhs):
        N = (uhat.size - 1) // 2
        self.t.append(float(t))
        self.mean.append(complex(uhat[N]))
        self.l2.append(hs_norm(uhat, 0.0))
        self.hs.append([hs_norm(uhat, s) for s in self.hs_orders])
        self.max_rhs.append(float(max_rhs))

    def arrays(self):
        return (np.array(self.t), np.array(self.mean), np.array(self.l2),
                np.array(self.hs).reshape(len(self.t), -1), np.array(self.max_rhs))

    def write_csv(self, dest):
        with open(dest, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["t", "mean_re", "mean_im", "l2"]
                       + [f"hs_{s:g}" for s in self.hs_orders] + ["max_rhs"])
            for t, mu, l2, hs, mr in zip(self.t, self.mean, self.l2, self.hs, self.max_rhs):
                w.writerow([f"{t:.17g}", f"{mu.real:.17g}", f"{mu.imag:.17g}", f"{l2:.17g}"]
                           + [f"{x:.17g}" for x in hs] + [f"{mr:.17g}"])


@dataclass
class RunResult:
    config: SimConfig
    states: list
    log: DiagnosticsLog
    final: SpectralState
    warnings: list = field(default_factory=list)
    failed: bool = False
    message: str = ""

    def final_physical(self) -> np.ndarray:
        return self.final.physical(self.config.model, sample_at(self.config.path, self.final.time))

    def physical_at(self, i: int) -> np.ndarray:
        st = self.states[i]
        return st.physical(self.config.model, sample_at(self.config.path, st.time))


def phase_rotation_per_step(config: SimConfig) -> float:
    """``max|phi(k)| * max |W(t + dt) - W(t)|`` over the run."""
    t = np.append(np.arange(config.n_steps) * config.dt + config.t0, config.t_end)
    t = np.minimum(t, config.t_end)
    dW = np.abs(np.diff(sample_at(config.path, t))).max(initial=0.0)
    phimax = float(np.abs(config.model.symbol(wavenumbers(config.N))).max())
    return phimax * float(dW)


def run(config: SimConfig, initial_uhat=None) -> RunResult:
    """Integrate from ``t0`` to ``t_end``, logging every ``diagnostics_every`` steps.

    On a nonfinite state an :class:`IntegrationFailure` is raised whose
    ``partial`` attribute carries the :class:`RunResult` up to the last good
    time.
    """
    spec = config.model
    N = config.N
    uhat0 = initial_coeffs(config.initial, N, spec) if initial_uhat is None else truncate(initial_uhat, N)
    msgs = []
    rot = phase_rotation_per_step(config)
    if rot > 0.5 and not spec.nonlinearity.is_linear:
        msg = f"phase rotation per step {rot:.3g} > 0.5; time step does not resolve the modulation"
        warnings.warn(msg, StepSizeWarning, stacklevel=2)
        msgs.append(msg)
    integ = Integrator(spec, N, config.path)
    t = config.t0
    v = np.exp(1j * sample_at(config.path, t) * integ.ws.phi) * uhat0
    log = DiagnosticsLog(tuple(config.hs_orders))
    state = SpectralState(v, N, t, spec.field_type)
    states = [state] if config.keep_states else []
    log.record(t, uhat0, 0.0)
    max_rhs = 0.0
    for n in range(config.n_steps):
        dt = min(config.dt, config.t_end - t)
        new, mr = integ.step(v, t, dt)
        max_rhs = max(max_rhs, mr)
        if not np.all(np.isfinite(new)):
            partial = RunResult(config, states, log, state, msgs, True,
                                f"nonfinite state in step starting at t={t}")
            raise IntegrationFailure(partial.message, partial)
        v = new
        t = config.t0 + (n + 1) * config.dt if n + 1 < config.n_steps else config.t_end
        if (n + 1) % config.diagnostics_every == 0 or n + 1 == config.n_steps:
            state = SpectralState(v, N, t, spec.field_type)
            if config.keep_states:
                states.append(state)
            log.record(t, state.physical(spec, sample_at(config.path, t)), max_rhs)
            max_rhs = 0.0
    final = SpectralState(v, N, t, spec.field_type)
    return RunResult(config, states, log, final, msgs)


# ---------------------------------------------------------------------------
# mean-shift gauge for the Burgers-type family


def gauge_to_zero_mean(uhat, t: float, c: float | None = None):
    """Map data of mean ``c`` to the zero-mean problem at time ``t``.

    For ``N(u) = dx(u^2)`` write ``u = c + w``; then ``w`` solves the same
    equation plus the transport term ``2c dx w``, removed by
    ``z_hat[k] = exp(2 i c k t) w_hat[k]``.
    """
    uhat = np.asarray(uhat, dtype=complex)
    N = (uhat.size - 1) // 2
    c = float(uhat[N].real) if c is None else c
    z = np.exp(2j * c * wavenumbers(N) * t) * uhat
    z[N] = 0.0
    return z, c


def gauge_from_zero_mean(zhat, t: float, c: float):
    zhat = np.asarray(zhat, dtype=complex)
    N = (zhat.size - 1) // 2
    u = np.exp(-2j * c * wavenumbers(N) * t) * zhat
    u[N] = c
    return u


def run_gauged(config: SimConfig, initial_uhat=None):
    """Run a Burgers-type model with nonzero-mean data through the mean-shift gauge.

    Returns ``(result_of_zero_mean_run, u_hat_final, c)``.
    """
    if config.model.kind != "burgers":
        raise InvalidParameter("the mean-shift gauge applies to the Burgers-type family")
    spec = config.model
    u0 = initial_coeffs(replace(config.initial, zero_mean=False), config.N, spec) \
        if initial_uhat is None else truncate(initial_uhat, config.N)
    z0, c = gauge_to_zero_mean(u0, config.t0)
    res = run(config, z0)
    return res, gauge_from_zero_mean(res.final_physical(), res.final.time, c), c


# ---------------------------------------------------------------------------
# checks and comparisons


def resonant_cancellation_check(spec: ModelSpec, state, multiplier=None) -> float:
    """``max_k |Re(Rhat(k) |v_k|^{m-1} v_k conj(v_k))|``.

    Zero whenever ``Rhat`` is purely imaginary; ``multiplier`` substitutes a
    different ``Rhat`` (for testing the test).
    """
    if spec.resonant is None:
        raise InvalidParameter(f"{spec.name} has no completely resonant part")
    v = state.coeffs if isinstance(state, SpectralState) else np.asarray(state, dtype=complex)
    N = (v.size - 1) // 2
    R = (multiplier or spec.resonant.multiplier)(wavenumbers(N))
    m = spec.resonant.m
    term = R * (np.abs(v) ** (m - 1) * (v.real**2 + v.imag**2))
    return float(np.abs(term.real).max(initial=0.0))


@dataclass
class GalerkinPair:
    N: int
    factor: int
    times: np.ndarray
    diff: np.ndarray
    coarse: RunResult
    fine: RunResult


def galerkin_pair(config: SimConfig, N: int | None = None, factor: int = 2, s: float = 0.0,
                  initial_uhat=None) -> GalerkinPair:
    """Runs from ``P_{<=N} u_0`` and ``P_{<=factor N} u_0``; ``||u_N - u_{fN}||_{H^s}`` in time."""
    N = config.N if N is None else N
    if factor < 2 or int(factor) != factor:
        raise InvalidParameter("factor must be an integer >= 2")
    Nf = factor * N
    if initial_uhat is None:
        u_full = initial_coeffs(config.initial, Nf, config.model)
    else:
        u_full = truncate(initial_uhat, Nf)
    coarse = run(replace(config, N=N, keep_states=True), truncate(u_full, N))
    fine = run(replace(config, N=Nf, keep_states=True), u_full)
    diffs = [hs_norm(truncate(coarse.physical_at(i), Nf) - fine.physical_at(i), s)
             for i in range(len(coarse.states))]
    times = np.array([st.time for st in coarse.states])
    return GalerkinPair(N, factor, times, np.array(diffs), coarse, fine)


def self_convergence(config: SimConfig, dts, reference_dt: float, initial_uhat=None):
    """Terminal errors ``||u_dt(T) - u_ref(T)||`` and the fitted order.

    Returns ``(errors, order)`` where ``order`` is the least-squares slope of
    ``log error`` against ``log dt``.
    """
    ref = run(replace(config, dt=reference_dt, keep_states=False), initial_uhat).final_physical()
    errs = []
    for dt in dts:
        u = run(replace(config, dt=dt, keep_states=False), initial_uhat).final_physical()
        errs.append(hs_norm(u - ref, 0.0))
    errs = np.array(errs)
    order = float(np.polyfit(np.log(dts), np.log(errs), 1)[0])
    return errs, order


# ---------------------------------------------------------------------------
# I/O


def write_coeffs_csv(uhat, dest) -> None:
    uhat = np.asarray(uhat, dtype=complex)
    N = (uhat.size - 1) // 2
    with open(dest, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["k", "re", "im"])
        for k, c in zip(wavenumbers(N), uhat):
            w.writerow([int(k), f"{c.real:.17g}", f"{c.imag:.17g}"])


def read_coeffs_csv(src) -> np.ndarray:
    with open(src, newline="") as fh:
        reader = csv.reader(fh)
        header = [h.strip() for h in next(reader)]
        if header != ["k", "re", "im"]:
            raise InvalidParameter(f"expected header 'k,re,im', got {header!r}")
        rows = [(int(a), float(b), float(c)) for a, b, c in reader]
    N = max(abs(r[0]) for r in rows)
    out = np.zeros(2 * N + 1, dtype=complex)
    for k, re, im in rows:
        out[k + N] = re + 1j * im
    return out


def write_run(result: RunResult, outdir, timestamp: str | None = None) -> Path:
    """Write ``diagnostics.csv``, ``final_state.csv`` and ``manifest.json``."""
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    result.log.write_csv(out / "diagnostics.csv")
    write_coeffs_csv(result.final_physical(), out / "final_state.csv")
    manifest = {
        "code_version": __version__,
        "config": result.config.to_dict(),
        "final_time": result.final.time,
        "warnings": result.warnings,
        "failed": result.failed,
        "timestamp": timestamp,
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=1, default=str) + "\n")
    return out
