"""Command-line front end.

Subcommands: ``gen`` (draw an instance), ``solve`` (run one scheme on an
instance), ``success-rate`` and ``robustness`` (Monte Carlo sweeps, CSV out)
and ``prox-table`` (thresholding functions, CSV out).

Configs are JSON objects; explicit flags and ``--set key=value`` pairs are
layered on top, in that order.  Exit status: 0 on success, 1 for usage or
configuration errors, 2 for failures while running.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import math
import os
import sys
from typing import Any, Sequence

import numpy as np

from .harness import (
    ExperimentSpec,
    RobustnessSpec,
    TrialError,
    relative_error,
    robustness_csv,
    run_robustness_experiment,
    run_success_experiment,
    success_csv,
    threshold_csv,
    write_atomic,
)
from .problems import NoiseSpec, ProblemInstance, RngStream, make_instance
from .solvers import LinearModel, SolverConfig, solve

__all__ = ["ConfigError", "GenSpec", "load_config", "run_cli", "main"]


class ConfigError(ValueError):
    pass


class _UsageError(Exception):
    pass


@dataclasses.dataclass
class GenSpec:
    family: str = "gaussian"
    M: int = 128
    N: int = 512
    k: int = 10
    r: float = 0.0
    F: float = 1.0
    min_sep: int | None = None
    amplitude_std: float = 1.0
    noise: NoiseSpec | None = None
    master_seed: int = 1


_KINDS = {
    "gen": GenSpec,
    "solve": SolverConfig,
    "success-rate": ExperimentSpec,
    "robustness": RobustnessSpec,
}

_SOLVE_ALIASES = {"lambda": "lam"}


def _parse_value(text: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def _apply_override(cfg: dict, key: str, value: Any) -> None:
    parts = key.split(".")
    node = cfg
    for p in parts[:-1]:
        if not isinstance(node.get(p), dict):
            node[p] = {}
        node = node[p]
    node[parts[-1]] = value


def _build(cls, data: dict):
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = sorted(set(data) - names)
    if unknown:
        raise ConfigError(f"unknown config key(s) for {cls.__name__}: {', '.join(unknown)}")
    data = dict(data)
    if "noise" in data and data["noise"] is not None:
        noise = data["noise"]
        if not isinstance(noise, dict):
            raise ConfigError("noise: expected an object with sigma and linf_cap")
        extra = sorted(set(noise) - {"sigma", "linf_cap"})
        if extra:
            raise ConfigError(f"unknown config key(s) in noise: {', '.join(extra)}")
        cap = noise.get("linf_cap")
        data["noise"] = NoiseSpec(float(noise.get("sigma", 0.0)), math.inf if cap is None else float(cap))
    try:
        return cls(**data)
    except TypeError as exc:
        raise ConfigError(f"{cls.__name__}: {exc}") from exc
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _pairs(overrides) -> list[tuple[str, Any]]:
    if not overrides:
        return []
    if isinstance(overrides, dict):
        return list(overrides.items())
    pairs = []
    for item in overrides:
        if isinstance(item, tuple):
            pairs.append(item)
            continue
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not of the form key=value")
        key, _, value = item.partition("=")
        pairs.append((key.strip(), _parse_value(value)))
    return pairs


def load_config(
    path: str | None,
    overrides: dict | Sequence | None = None,
    kind: str = "solve",
    defaults: dict | None = None,
):
    """Read a JSON config, overlay ``overrides`` and validate it.

    ``overrides`` is a mapping, or a sequence of ``key=value`` strings or
    ``(key, value)`` pairs; string values are parsed as JSON when possible
    and dotted keys reach into nested objects.  ``defaults`` sit beneath the
    file.  Returns a :class:`SolverConfig`, :class:`ExperimentSpec`,
    :class:`RobustnessSpec` or :class:`GenSpec` depending on ``kind``.
    """
    if kind not in _KINDS:
        raise ConfigError(f"unknown config kind {kind!r}")
    data: dict = dict(defaults or {})
    if path is not None:
        if not os.path.isfile(path):
            raise ConfigError(f"config file not found: {path}")
        with open(path) as fh:
            try:
                loaded = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
        if not isinstance(loaded, dict):
            raise ConfigError(f"{path}: top level must be a JSON object")
        data.update(loaded)
    for key, value in _pairs(overrides):
        _apply_override(data, key, value)
    if kind == "solve":
        data = {_SOLVE_ALIASES.get(k, k): v for k, v in data.items()}
        if "scheme" not in data:
            raise ConfigError("solve config: scheme missing")
    return _build(_KINDS[kind], data)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise _UsageError(f"{self.prog}: error: {message}")


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON config file")
    p.add_argument("--seed", type=int, default=None, help="master seed (default 1)")
    p.add_argument("--out", help="output path (default: standard output)")
    p.add_argument("--threads", type=int, default=None, help="worker processes (env TL1_THREADS)")
    p.add_argument(
        "--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
        help="override a config entry; repeatable",
    )


def _matrix_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--family", choices=("gaussian", "dct"))
    p.add_argument("--M", type=int)
    p.add_argument("--N", type=int)
    p.add_argument("--r", type=float)
    p.add_argument("--F", type=float)


def _build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="tl1it", description="TL1 iterative thresholding toolkit")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("gen", help="draw a seeded problem instance (JSON)")
    _common(p)
    _matrix_flags(p)
    p.add_argument("--k", type=int)

    p = sub.add_parser("solve", help="solve an instance with one scheme")
    _common(p)
    p.add_argument("--instance", help="instance JSON written by gen")
    p.add_argument("--scheme", choices=("S1", "S2", "S3", "HardIT", "HalfIT"))
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--a", type=float)
    p.add_argument("--k", type=int)

    p = sub.add_parser("success-rate", help="success-rate sweep (CSV)")
    _common(p)
    _matrix_flags(p)
    p.add_argument("--scheme", action="append", choices=("S2", "S3", "HardIT", "HalfIT"))
    p.add_argument("--k", type=int, action="append", help="sparsity; repeatable")
    p.add_argument("--trials", type=int)
    p.add_argument("--a", type=float)

    p = sub.add_parser("robustness", help="sparsity-misestimation study (CSV)")
    _common(p)
    p.add_argument("--N", type=int)
    p.add_argument("--M", type=int, action="append", help="measurement count; repeatable")
    p.add_argument("--scheme", action="append", choices=("S2", "S3", "HardIT", "HalfIT"))
    p.add_argument("--k", type=int, action="append", help="sparsity estimate; repeatable")
    p.add_argument("--trials", type=int)
    p.add_argument("--a", type=float)

    p = sub.add_parser("prox-table", help="thresholding functions on a grid (CSV)")
    p.add_argument("--lambda", dest="lam", type=float, default=0.5)
    p.add_argument("--a", type=float, action="append", help="TL1 parameter; repeatable (default 2 and 1)")
    p.add_argument("--xmin", type=float, default=-3.0)
    p.add_argument("--xmax", type=float, default=3.0)
    p.add_argument("--num", type=int, default=601)
    p.add_argument("--out", help="output path (default: standard output)")
    return parser


def _flag_overrides(ns: argparse.Namespace, mapping: dict[str, str]) -> dict:
    out = {}
    for attr, key in mapping.items():
        v = getattr(ns, attr, None)
        if v is not None:
            out[key] = v
    return out


def _threads(ns) -> int:
    if ns.threads is not None:
        return max(1, ns.threads)
    env = os.environ.get("TL1_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise _UsageError(f"TL1_THREADS must be an integer, got {env!r}")
    return 1


def _load(ns, kind: str, flags: dict, defaults: dict | None = None):
    pairs = list(flags.items())
    if getattr(ns, "seed", None) is not None:
        pairs.append(("master_seed", ns.seed))
    pairs += _pairs(ns.overrides)
    return load_config(ns.config, pairs, kind, defaults)


def _emit(text: str, out: str | None) -> None:
    if out:
        write_atomic(out, text)
    else:
        sys.stdout.write(text)


def _cmd_gen(ns) -> None:
    flags = _flag_overrides(ns, {"family": "family", "M": "M", "N": "N", "r": "r", "F": "F", "k": "k"})
    spec: GenSpec = _load(ns, "gen", flags)
    try:
        inst = make_instance(
            spec.family, spec.M, spec.N, spec.k, RngStream(spec.master_seed),
            r=spec.r, F=spec.F, min_sep=spec.min_sep,
            amplitude_std=spec.amplitude_std, noise=spec.noise,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    _emit(inst.to_json() + "\n", ns.out)


def _cmd_solve(ns) -> None:
    ns.seed = None  # solving draws no random numbers
    if ns.config is not None and not os.path.isfile(ns.config):
        raise ConfigError(f"config file not found: {ns.config}")
    if ns.instance is None:
        raise _UsageError("solve: --instance is required")
    if not os.path.isfile(ns.instance):
        raise ConfigError(f"instance file not found: {ns.instance}")
    with open(ns.instance) as fh:
        try:
            inst = ProblemInstance.from_json(fh.read())
        except ValueError as exc:
            raise ConfigError(f"{ns.instance}: {exc}") from exc
    flags = _flag_overrides(ns, {"scheme": "scheme", "lam": "lam", "a": "a", "k": "k"})
    cfg: SolverConfig = _load(ns, "solve", flags, defaults={"k": inst.k})
    res = solve(LinearModel(inst.A, inst.y), cfg)
    doc = {
        "scheme": cfg.scheme.value,
        "x": res.x.tolist(),
        "iterations": res.iterations,
        "converged": res.converged,
        "final_rel_change": res.final_rel_change,
        "fixed_point_residual": res.fixed_point_residual,
        "objective_history": res.objective_history,
        "rel_error": relative_error(res.x, inst.x_true),
    }
    _emit(json.dumps(doc) + "\n", ns.out)


def _cmd_success(ns) -> None:
    flags = _flag_overrides(ns, {"family": "family", "M": "M", "N": "N", "trials": "trials", "a": "a"})
    if ns.r is not None:
        flags["sweep"] = [ns.r]
    if ns.F is not None:
        flags["sweep"] = [ns.F]
    if ns.k:
        flags["k_grid"] = ns.k
    if ns.scheme:
        flags["schemes"] = ns.scheme
    spec: ExperimentSpec = _load(ns, "success-rate", flags)
    curves = run_success_experiment(spec, workers=_threads(ns))
    _emit(success_csv(curves, spec.family), ns.out)


def _cmd_robustness(ns) -> None:
    flags = _flag_overrides(ns, {"N": "N", "trials": "trials", "a": "a"})
    if ns.M:
        flags["M_grid"] = ns.M
    if ns.k:
        flags["k_est_grid"] = ns.k
    if ns.scheme:
        flags["schemes"] = ns.scheme
    spec: RobustnessSpec = _load(ns, "robustness", flags)
    curves = run_robustness_experiment(spec, workers=_threads(ns))
    _emit(robustness_csv(curves), ns.out)


def _cmd_prox_table(ns) -> None:
    if ns.num < 1 or not ns.xmax >= ns.xmin:
        raise _UsageError("prox-table: need --num >= 1 and --xmax >= --xmin")
    if not ns.lam > 0:
        raise _UsageError("prox-table: --lambda must be positive")
    a_values = tuple(ns.a) if ns.a else (2.0, 1.0)
    if any(not a > 0 for a in a_values):
        raise _UsageError("prox-table: --a must be positive")
    grid = np.linspace(ns.xmin, ns.xmax, ns.num)
    _emit(threshold_csv(ns.lam, grid, a_values), ns.out)


_COMMANDS = {
    "gen": _cmd_gen,
    "solve": _cmd_solve,
    "success-rate": _cmd_success,
    "robustness": _cmd_robustness,
    "prox-table": _cmd_prox_table,
}


def run_cli(argv: Sequence[str] | None = None) -> int:
    parser = _build_parser()
    try:
        ns = parser.parse_args(argv)
    except _UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    if ns.command is None:
        parser.print_usage(sys.stderr)
        return 1
    try:
        _COMMANDS[ns.command](ns)
    except _UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"tl1it: error: {exc}", file=sys.stderr)
        return 1
    except ConfigError as exc:
        print(f"tl1it {ns.command}: error: {exc}", file=sys.stderr)
        return 1
    except (TrialError, ArithmeticError, ValueError, OSError, RuntimeError) as exc:
        print(f"tl1it {ns.command}: failed: {exc}", file=sys.stderr)
        return 2
    return 0


def main() -> None:
    sys.exit(run_cli())
