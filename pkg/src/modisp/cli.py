"""Command-line entry point: ``modisp <subcommand> [options]``.

Subcommands: ``path``, ``irregularity``, ``resonance``, ``rho``, ``simulate``,
``experiment``. Every subcommand accepts ``--config FILE`` holding flat
``key = value`` lines (``#`` starts a comment; keys are option names with
``-`` or ``_``); options given on the command line override the file.

Exit codes: 0 success, 1 usage or validation error, 2 runtime failure.
"""
from __future__ import annotations

import argparse
import json
import sys
import warnings
from pathlib import Path

import numpy as np

from . import INTERFACE_VERSION, __version__
from .pathgen import (EmbeddingFailure, FbmParams, InvalidParameter, OutOfRange,
                      generate_deterministic, generate_fbm, read_path_csv, write_path_csv)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}\n{self.format_usage()}")


def _floats(text):
    return [float(x) for x in str(text).split(",") if x.strip()]


def _ints(text):
    out = []
    for part in str(text).split(","):
        part = part.strip()
        if not part:
            continue
        if ":" in part:
            a, b = part.split(":")
            out.extend(range(int(a), int(b)))
        else:
            out.append(int(part))
    return out


def _bool(text):
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"not a boolean: {text!r}")


def _kv(text):
    name, _, rest = str(text).partition(":")
    opts = {}
    for item in filter(None, (p.strip() for p in rest.split(","))):
        k, eq, v = item.partition("=")
        if not eq:
            raise InvalidParameter(f"malformed option {item!r} in {text!r}")
        opts[k.strip()] = v.strip()
    return name.strip(), opts


def parse_path_spec(text: str, horizon: float, n_points: int):
    """``fbm:H=0.3,seed=7``, ``brownian:seed=1``, ``linear:slope=1`` or a CSV file."""
    name, opts = _kv(text)
    if name == "fbm":
        return generate_fbm(FbmParams(float(opts.get("H", 0.5)), horizon, n_points,
                                      int(opts.get("seed", 0))), opts.get("method", "auto"))
    if name == "brownian":
        return generate_fbm(FbmParams(0.5, horizon, n_points, int(opts.get("seed", 0))))
    if name == "linear":
        return generate_deterministic(float(opts.get("slope", 1.0)), horizon, n_points)
    if Path(text).is_file():
        return read_path_csv(text)
    raise InvalidParameter(f"unknown path spec {text!r}")


def parse_initial(text: str):
    from .solver import InitialData

    name, opts = _kv(text)
    kw = {}
    for k, v in opts.items():
        if k in ("mode", "seed"):
            kw[k] = int(v)
        elif k == "file":
            kw[k] = v
        elif k == "zero_mean":
            kw[k] = _bool(v)
        else:
            kw[k] = float(v)
    return InitialData(name, **kw)


def _emit(obj, out=None):
    text = json.dumps(obj, indent=1, default=_json_default, allow_nan=True)
    if out:
        Path(out).write_text(text + "\n")
    print(text)


def _json_default(x):
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if isinstance(x, np.ndarray):
        return x.tolist()
    return str(x)


# ---------------------------------------------------------------------------
# subcommands


def cmd_path(a):
    p = parse_path_spec(a.spec, a.horizon, a.n_points)
    if a.out:
        write_path_csv(p, a.out)
    _emit({"meta": p.meta, "n_points": len(p), "horizon": p.horizon,
           "w_end": float(p.values[-1]), "out": a.out})


def cmd_irregularity(a):
    from .occupation import default_xi_grid, estimate_irregularity, resolved_xi_grid

    p = parse_path_spec(a.path, a.horizon, a.n_points)
    if a.resolved:
        xi = resolved_xi_grid(p, a.c, a.per_octave)
    else:
        xi = default_xi_grid(a.xi_max, a.per_octave)
    rep = estimate_irregularity(p, a.gamma, xi_grid=xi, threshold=a.threshold)
    text = rep.to_json()
    if a.out:
        Path(a.out).write_text(text + "\n")
    print(text)


def cmd_resonance(a):
    from .models import parse_model
    from .resonance import factorization_check, verify_bound

    if a.identity:
        _emit({"identity": a.identity, "K": a.K, "holds": factorization_check(a.identity, a.K)}, a.out)
        return
    spec = parse_model(a.model)
    rep = verify_bound(spec, a.K, a.term)
    _emit(rep.to_dict(), a.out)


def cmd_rho(a):
    from .admissibility import exact, rho_bounds_for_model
    from .models import parse_model

    spec = parse_model(a.model)
    if spec.resonant is not None and a.gamma is None:
        raise InvalidParameter(f"{spec.name} has a resonant part; pass --gamma")
    rb = rho_bounds_for_model(spec, exact(a.s), a.gamma, a.nu, a.strict_ranges)
    _emit(rb.to_dict(), a.out)


def cmd_simulate(a):
    from .models import parse_model
    from .solver import IntegrationFailure, SimConfig, run, write_run

    spec = parse_model(a.model)
    n_points = int(np.ceil(a.T / (a.dt / 4) - 1e-9)) + 1
    path = parse_path_spec(a.path, a.T, n_points)
    cfg = SimConfig(spec, a.N, a.dt, a.T, path, parse_initial(a.init),
                    a.diagnostics_every, tuple(a.hs))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        try:
            res = run(cfg)
        except IntegrationFailure as exc:
            if a.out and exc.partial is not None:
                write_run(exc.partial, a.out, None if a.no_timestamp else _now())
            raise
    if a.out:
        write_run(res, a.out, None if a.no_timestamp else _now())
    l2 = res.log.l2
    _emit({"model": spec.name, "final_time": res.final.time, "l2_initial": l2[0], "l2_final": l2[-1],
           "mean_final": [res.log.mean[-1].real, res.log.mean[-1].imag], "warnings": res.warnings,
           "out": a.out})


def cmd_experiment(a):
    from . import experiments as E

    if a.name == "irregularity_sweep":
        tab = E.irregularity_sweep(a.H_list or [0.3, 0.5, 0.7], a.gamma, a.seeds or range(20),
                                   n_points=a.n_points, threshold=a.threshold, workers=a.workers)
    elif a.name == "galerkin_vs_hurst":
        tab = E.galerkin_vs_hurst(a.model, a.s, a.H_list or (0.2, 0.5, 0.8), a.N_list or (16, 32, 64),
                                  a.T, a.seeds or (0,), a.dt, workers=a.workers)
    else:
        tab = E.flow_lipschitz_probe(a.model, a.s, a.eps_list or (1e-3, 1e-4), a.T,
                                     (a.N_list or [32])[0], a.dt, (a.H_list or [0.3])[0],
                                     a.seeds or (0,), workers=a.workers)
    if a.out:
        tab.write(a.out, timestamp=not a.no_timestamp)
    _emit({"experiment": tab.name, "summary": tab.summary, "out": a.out})


def _now():
    import time

    return time.strftime("%Y-%m-%dT%H:%M:%S")


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="modisp", description="Modulated dispersive PDE toolkit.")
    p.add_argument("--version", action="version",
                   version=f"modisp {__version__} (interface {INTERFACE_VERSION})")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    def add(name, fn, help_):
        sp = sub.add_parser(name, help=help_, description=help_)
        sp.add_argument("--config", help="flat key=value file; command-line flags win")
        sp.set_defaults(func=fn)
        return sp

    sp = add("path", cmd_path, "generate a modulation path and export it as CSV")
    sp.add_argument("--spec", default="fbm:H=0.5,seed=0")
    sp.add_argument("--horizon", type=float, default=1.0)
    sp.add_argument("--n-points", type=int, default=2**12 + 1)
    sp.add_argument("--out")

    sp = add("irregularity", cmd_irregularity, "estimate (rho, gamma)-irregularity of a path")
    sp.add_argument("--path", default="fbm:H=0.5,seed=0")
    sp.add_argument("--horizon", type=float, default=1.0)
    sp.add_argument("--n-points", type=int, default=2**14 + 1)
    sp.add_argument("--gamma", type=float, default=0.5)
    sp.add_argument("--xi-max", type=float, default=2.0**14)
    sp.add_argument("--per-octave", type=int, default=4)
    sp.add_argument("--resolved", type=_bool, default=False,
                    help="cap the frequency grid at c/median|dW|")
    sp.add_argument("--c", type=float, default=0.5)
    sp.add_argument("--threshold", type=float, default=0.1)
    sp.add_argument("--out")

    sp = add("resonance", cmd_resonance, "verify the non-resonance bound on the lattice")
    sp.add_argument("--model", default="fkdv:a=2")
    sp.add_argument("--K", type=int, default=None)
    sp.add_argument("--term", type=int, default=0)
    sp.add_argument("--identity", choices=["kdv_3k0k1k2", "mkdv_triple_product", "nls_quadratic"])
    sp.add_argument("--out")

    sp = add("rho", cmd_rho, "thresholds on rho for a model")
    sp.add_argument("--model", default="fkdv:a=2")
    sp.add_argument("--s", type=float, default=0.0)
    sp.add_argument("--gamma", type=float)
    sp.add_argument("--nu", type=float)
    sp.add_argument("--strict-ranges", type=_bool, default=False)
    sp.add_argument("--out")

    sp = add("simulate", cmd_simulate, "integrate a model along a modulation path")
    sp.add_argument("--model", default="fkdv:a=2")
    sp.add_argument("--N", type=int, default=32)
    sp.add_argument("--dt", type=float, default=1e-4)
    sp.add_argument("--T", type=float, default=0.1)
    sp.add_argument("--path", default="linear:slope=1")
    sp.add_argument("--init", default="cosine")
    sp.add_argument("--diagnostics-every", type=int, default=10)
    sp.add_argument("--hs", type=_floats, default=[0.0])
    sp.add_argument("--no-timestamp", type=_bool, default=False)
    sp.add_argument("--out")

    sp = add("experiment", cmd_experiment, "run a named sweep")
    sp.add_argument("name", choices=["irregularity_sweep", "galerkin_vs_hurst", "flow_lipschitz_probe"])
    sp.add_argument("--model", default="fkdv:a=2")
    sp.add_argument("--s", type=float, default=-0.25)
    sp.add_argument("--gamma", type=float, default=0.5)
    sp.add_argument("--H-list", type=_floats)
    sp.add_argument("--N-list", type=_ints)
    sp.add_argument("--eps-list", type=_floats)
    sp.add_argument("--seeds", type=_ints)
    sp.add_argument("--n-points", type=int, default=2**16 + 1)
    sp.add_argument("--threshold", type=float, default=0.1)
    sp.add_argument("--T", type=float, default=0.1)
    sp.add_argument("--dt", type=float, default=5e-5)
    sp.add_argument("--workers", type=int, default=None)
    sp.add_argument("--no-timestamp", type=_bool, default=False)
    sp.add_argument("--out")
    return p


def read_config(path) -> dict:
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, eq, val = line.partition("=")
        if not eq:
            raise UsageError(f"{path}:{lineno}: expected key = value")
        out[key.strip().lstrip("-").replace("-", "_")] = val.strip()
    return out


def _apply_config(parser, sub_parser, argv, ns):
    """Re-parse with config values as typed defaults so that flags override them."""
    cfg = read_config(ns.config)
    actions = {a.dest: a for a in sub_parser._actions}
    defaults = {}
    for key, val in cfg.items():
        if key not in actions or key in ("help", "config", "func"):
            raise UsageError(f"unknown config key {key!r} for '{ns.command}'")
        act = actions[key]
        conv = act.type or (lambda x: x)
        try:
            value = conv(val)
        except (ValueError, argparse.ArgumentTypeError) as exc:
            raise UsageError(f"config key {key!r}: {exc}") from None
        if act.choices is not None and value not in act.choices:
            raise UsageError(f"config key {key!r}: {value!r} not in {list(act.choices)}")
        defaults[key] = value
    sub_parser.set_defaults(**defaults)
    # positional arguments from the config must not be required on the command line
    for act in sub_parser._actions:
        if act.dest in defaults and not act.option_strings:
            act.nargs = "?"
    return parser.parse_args(argv)


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        try:
            ns = parser.parse_args(argv)
        except UsageError:
            # a config file may supply required positionals; retry after loading it
            ns = None
            if "--config" not in argv and not any(x.startswith("--config=") for x in argv):
                raise
        if ns is None or getattr(ns, "config", None):
            cmd = next((x for x in argv if not x.startswith("-")), None)
            subs = [a for a in parser._actions if isinstance(a, argparse._SubParsersAction)][0]
            if cmd not in subs.choices:
                raise UsageError(parser.format_usage())
            sub_parser = subs.choices[cmd]
            if ns is None:
                cfg_path = _config_from_argv(argv)
                ns = argparse.Namespace(config=cfg_path, command=cmd)
            ns = _apply_config(parser, sub_parser, argv, ns)
        if not getattr(ns, "command", None):
            raise UsageError(parser.format_usage())
        if ns.command == "resonance" and ns.K is None:
            ns.K = 24 if _degree(ns) >= 3 else 64
        ns.func(ns)
        return 0
    except SystemExit as exc:  # --help and --version
        return int(exc.code or 0)
    except UsageError as exc:
        print(str(exc).rstrip(), file=sys.stderr)
        return 1
    except (InvalidParameter, OutOfRange, ValueError, KeyError) as exc:
        print(f"modisp: invalid input: {exc}", file=sys.stderr)
        return 1
    except (EmbeddingFailure, RuntimeError, OSError, ArithmeticError) as exc:
        print(f"modisp: runtime failure: {exc}", file=sys.stderr)
        return 2


def _config_from_argv(argv):
    for i, x in enumerate(argv):
        if x == "--config" and i + 1 < len(argv):
            return argv[i + 1]
        if x.startswith("--config="):
            return x.split("=", 1)[1]
    raise UsageError("missing --config value")


def _degree(ns) -> int:
    if ns.identity:
        return 2 if ns.identity == "kdv_3k0k1k2" else 3
    from .models import parse_model

    return parse_model(ns.model).terms[0].m


if __name__ == "__main__":
    sys.exit(main())
