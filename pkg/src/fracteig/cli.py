"""Command-line entry points: eig, sweep, infinity, verify1d.

Every run reads a JSON config, computes, and writes artifacts (CSV tables,
report.json) into an output directory.  Runs are deterministic: identical
config and package version produce byte-identical CSV files and an identical
report.json up to the wall_time_s field.

Exit codes: 0 for completed runs (including honest non-convergence, which is
reported in-band via converged flags), 2 for configuration or environment
errors (bad paths, malformed config, invalid exponent ranges, empty p lists).
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from .closedform1d import first_1d, sample, second_1d, third_1d
from .energy import FracParams
from .geometry import (
    GridDomain,
    GridFunction,
    build_disk,
    build_interval,
    build_rectangle,
    distance_to_complement,
    high_ridge,
    inscribed_radius,
    NodeSet,
)
from .infinity import (
    first_residual,
    higher_residual,
    lambda_infinity,
    r2_radius,
    representation,
)
from .reports import (
    config_digest,
    function_rows,
    infinity_header,
    mask_rows,
    write_csv,
    write_json,
)
from .solver import SolverOptions, minimize_first, p2_oracle, p_sweep

__all__ = ["RunConfig", "RunReport", "main"]

_DEFAULT_VERIFY1D_H = [1 / 50, 1 / 100, 1 / 200, 1 / 400]


class ConfigError(Exception):
    """Bad configuration or environment; maps to a nonzero exit code."""


@dataclass
class RunConfig:
    """Validated run parameters (config file merged with CLI overrides)."""

    command: str
    domain: dict
    alpha: float
    h: float
    margin: float = 2.0
    p: Optional[float] = None
    ps: Optional[list] = None
    solver: dict = field(default_factory=dict)
    gamma1: Optional[list] = None
    h_list: Optional[list] = None
    out: Path = Path(".")
    threads: Optional[int] = None
    raw: dict = field(default_factory=dict)

    @classmethod
    def load(cls, command: str, args: argparse.Namespace) -> "RunConfig":
        path = Path(args.config)
        try:
            raw = json.loads(path.read_text(encoding="utf-8"))
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
        if not isinstance(raw, dict):
            raise ConfigError("config must be a JSON object")

        merged = dict(raw)
        if args.h is not None:
            merged["h"] = args.h
        if args.margin is not None:
            merged["margin"] = args.margin
        if args.out is not None:
            merged["out"] = args.out
        if args.threads is not None:
            merged["threads"] = args.threads

        try:
            domain = merged["domain"]
            alpha = float(merged["alpha"])
            h = float(merged["h"])
        except KeyError as exc:
            raise ConfigError(f"config missing required key {exc}") from exc
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"malformed config value: {exc}") from exc
        if not isinstance(domain, dict) or "shape" not in domain:
            raise ConfigError("config 'domain' must be an object with a 'shape'")

        cfg = cls(
            command=command,
            domain=domain,
            alpha=alpha,
            h=h,
            margin=float(merged.get("margin", 2.0)),
            p=float(merged["p"]) if "p" in merged else None,
            ps=[float(v) for v in merged["ps"]] if "ps" in merged else None,
            solver=dict(merged.get("solver", {})),
            gamma1=merged.get("gamma1"),
            h_list=[float(v) for v in merged["h_list"]] if "h_list" in merged else None,
            out=Path(merged.get("out", ".")),
            threads=int(merged["threads"]) if "threads" in merged else None,
            raw=merged,
        )
        return cfg

    def echo(self) -> dict:
        d = dict(self.raw)
        d["out"] = str(self.out)
        d["command"] = self.command
        return d


@dataclass
class RunReport:
    """What a run produced: config echo + digest, version, timing, outputs."""

    config: dict
    config_sha256: str
    version: str
    command: str
    wall_time_s: float
    outputs: dict
    summary: dict

    def to_dict(self) -> dict:
        return {
            "command": self.command,
            "config": self.config,
            "config_sha256": self.config_sha256,
            "outputs": self.outputs,
            "summary": self.summary,
            "version": self.version,
            "wall_time_s": self.wall_time_s,
        }


# ---------------------------------------------------------------------------
# domain construction
# ---------------------------------------------------------------------------


def _load_mask_csv(path: Path, margin: float) -> GridDomain:
    try:
        text = Path(path).read_text(encoding="utf-8").strip().splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read mask file {path}: {exc}") from exc
    if not text:
        raise ConfigError(f"mask file {path} is empty")
    header = text[0].split(",")
    dim = len(header) - 1
    if header[-1] != "inside" or dim not in (1, 2):
        raise ConfigError(f"mask file {path} must have columns x[,y],inside")
    data = np.array([[float(v) for v in line.split(",")] for line in text[1:]])
    coords, flags = data[:, :dim], data[:, dim] != 0.0
    axes = []
    for j in range(dim):
        ax = np.unique(coords[:, j])
        steps = np.diff(ax)
        if not np.allclose(steps, steps[0], rtol=0.0, atol=1e-9 * abs(steps[0])):
            raise ConfigError(f"mask file {path} is not a uniform lattice")
        axes.append(ax)
    h = float(np.diff(axes[0])[0])
    shape = tuple(len(ax) for ax in axes)
    if coords.shape[0] != int(np.prod(shape)):
        raise ConfigError(f"mask file {path} does not cover the full lattice")
    inside = np.zeros(shape, dtype=bool)
    pos = [np.searchsorted(axes[j], coords[:, j]) for j in range(dim)]
    inside[tuple(pos)] = flags
    return GridDomain(dim=dim, h=h, axes=tuple(axes), inside=inside,
                      shape_tag=None, margin=margin)


def build_domain(cfg: RunConfig) -> GridDomain:
    spec = cfg.domain
    kind = spec.get("shape")
    try:
        if kind == "interval":
            return build_interval(float(spec["a"]), float(spec["b"]), cfg.h, cfg.margin)
        if kind == "disk":
            return build_disk([float(c) for c in spec["center"]],
                              float(spec["radius"]), cfg.h, cfg.margin)
        if kind == "rectangle":
            return build_rectangle([float(c) for c in spec["lo"]],
                                   [float(c) for c in spec["hi"]], cfg.h, cfg.margin)
        if kind == "mask":
            return _load_mask_csv(Path(spec["path"]), cfg.margin)
    except ConfigError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad domain description: {exc}") from exc
    raise ConfigError(f"unknown domain shape {kind!r}")


def _solver_options(cfg: RunConfig) -> SolverOptions:
    s = cfg.solver
    try:
        kwargs = {}
        for key in ("max_iters", "tol_rel_q", "tol_grad", "step0", "backtrack_factor",
                    "init_mode", "seed"):
            if key in s:
                kwargs[key] = s[key]
        return SolverOptions(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad solver options: {exc}") from exc


def _prepare_out(cfg: RunConfig) -> Path:
    out = cfg.out
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ConfigError(f"cannot create output directory {out}: {exc}") from exc
    return out


def _coord_header(dom: GridDomain) -> list:
    return ["x"] if dom.dim == 1 else ["x", "y"]


def _write_mask(dom: GridDomain, out: Path) -> str:
    path = out / "domain_mask.csv"
    write_csv(path, [*_coord_header(dom), "inside"], mask_rows(dom))
    return path.name


def _finish(cfg: RunConfig, outputs: dict, summary: dict, started: float) -> RunReport:
    out = cfg.out
    report = RunReport(
        config=cfg.echo(),
        config_sha256=config_digest(cfg.echo()),
        version=__version__,
        command=cfg.command,
        wall_time_s=time.perf_counter() - started,
        outputs=outputs,
        summary=summary,
    )
    write_json(out / "report.json", report.to_dict())
    print(str(out / "report.json"))
    return report


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_eig(cfg: RunConfig) -> RunReport:
    started = time.perf_counter()
    if cfg.p is None:
        raise ConfigError("eig requires a single exponent 'p' in the config")
    dom = build_domain(cfg)
    try:
        prm = FracParams(cfg.alpha, cfg.p)
        prm.validate_for_dim(dom.dim)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    out = _prepare_out(cfg)
    opts = _solver_options(cfg)

    res = minimize_first(dom, prm, opts)
    outputs = {"mask": _write_mask(dom, out)}
    path = out / "eigenfunction.csv"
    write_csv(path, [*_coord_header(dom), "u"], function_rows(res.u))
    outputs["eigenfunction"] = path.name

    summary = {
        "alpha": cfg.alpha,
        "p": cfg.p,
        "lambda": res.lam,
        "iters": res.iters,
        "final_grad_norm": res.final_grad_norm,
        "converged": res.converged,
        "inside_nodes": dom.inside_count,
        "flags": prm.flags(dom.dim),
    }
    if cfg.p == 2.0:
        oracle = p2_oracle(dom, cfg.alpha)
        summary["oracle_lambda"] = oracle.lam
        summary["oracle_gap"] = abs(oracle.lam - res.lam)
    return _finish(cfg, outputs, summary, started)


def cmd_sweep(cfg: RunConfig) -> RunReport:
    started = time.perf_counter()
    if not cfg.ps:
        raise ConfigError("sweep requires a non-empty ascending list 'ps'")
    dom = build_domain(cfg)
    try:
        for p in cfg.ps:
            FracParams(cfg.alpha, p).validate_for_dim(dom.dim)
        result = p_sweep(dom, cfg.alpha, cfg.ps, _solver_options(cfg))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    out = _prepare_out(cfg)

    outputs = {"mask": _write_mask(dom, out)}
    path = out / "sweep.csv"
    write_csv(path, ["p", "lambda", "root", "target", "converged", "iters"],
              [(r.p, r.lam, r.root, result.target, r.converged, r.iters)
               for r in result.rows])
    outputs["sweep"] = path.name

    gaps = result.gaps()
    summary = {
        "alpha": cfg.alpha,
        "target": result.target,
        "final_gap": gaps[-1],
        "gaps": gaps,
        "all_converged": all(r.converged for r in result.rows),
    }
    return _finish(cfg, outputs, summary, started)


def cmd_infinity(cfg: RunConfig) -> RunReport:
    started = time.perf_counter()
    dom = build_domain(cfg)
    out = _prepare_out(cfg)
    delta = distance_to_complement(dom)
    ridge = high_ridge(delta)
    if cfg.gamma1 is not None:
        try:
            gamma1 = NodeSet(dom, np.asarray(cfg.gamma1, dtype=np.int64))
        except ValueError as exc:
            raise ConfigError(f"bad gamma1 node list: {exc}") from exc
        if not np.isin(gamma1.indices, ridge.indices).all():
            raise ConfigError("gamma1 contains nodes outside the ridge")
    else:
        gamma1 = ridge

    lam = lambda_infinity(dom, cfg.alpha)
    u = representation(dom, gamma1, cfg.alpha)
    report = first_residual(u, cfg.alpha, lam, delta)

    outputs = {"mask": _write_mask(dom, out)}
    path = out / "representation.csv"
    write_csv(path, [*_coord_header(dom), "u"], function_rows(u))
    outputs["representation"] = path.name
    path = out / "infinity_report.csv"
    write_csv(path, infinity_header(dom), report.rows())
    outputs["report_table"] = path.name

    summary = {
        "alpha": cfg.alpha,
        "lambda_infinity": lam,
        "inscribed_radius": inscribed_radius(delta),
        "r2_radius": r2_radius(dom),
        "ridge_nodes": len(ridge),
        "gamma1_nodes": len(gamma1),
        **report.summary(),
    }
    return _finish(cfg, outputs, summary, started)


def cmd_verify1d(cfg: RunConfig) -> RunReport:
    started = time.perf_counter()
    alpha = cfg.alpha
    try:
        examples = [first_1d(alpha), second_1d(alpha), third_1d(alpha)]
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    out = _prepare_out(cfg)
    hs = cfg.h_list or _DEFAULT_VERIFY1D_H

    outputs = {}
    table = []
    finest = min(hs)
    for h in hs:
        dom = build_interval(0.0, 2.0, h, cfg.margin)
        delta = distance_to_complement(dom)
        for ex in examples:
            u = sample(ex, dom)
            if ex.kind == "first":
                rep = first_residual(u, alpha, ex.lam, delta)
            else:
                rep = higher_residual(u, alpha, ex.lam, delta)
            table.append((ex.kind, h, rep.sup_norm(), rep.sup_norm(exclude_collar=True)))
            if h == finest:
                path = out / f"{ex.kind}_profile.csv"
                write_csv(path, ["x", "u"], function_rows(u))
                outputs[f"{ex.kind}_profile"] = path.name

    path = out / "residuals.csv"
    write_csv(path, ["example", "h", "sup_residual", "sup_residual_interior"], table)
    outputs["residuals"] = path.name

    second, third = examples[1], examples[2]
    lam_nodal = lambda_infinity(build_interval(0.0, 1.0, finest, cfg.margin), alpha)
    verdicts = {
        "max_left_of_midpoint": bool(second.a < 0.5),
        "unequal_nodal_lengths": bool(
            not math.isclose(1.0 - third.a, (1.0 + third.a) / 2.0,
                             rel_tol=0.0, abs_tol=1e-12)),
        "lambda_exceeds_nodal_lambda": bool(second.lam > lam_nodal),
    }
    summary = {
        "alpha": alpha,
        "second": {"a": second.a, "lambda": second.lam},
        "third": {"a": third.a, "lambda": third.lam},
        "first_lambda": examples[0].lam,
        "nodal_lambda_01": lam_nodal,
        "verdicts": verdicts,
        "h_list": hs,
    }
    return _finish(cfg, outputs, summary, started)


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fracteig",
        description="Grid laboratory for nonlocal fractional p-eigenvalue problems",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in [
        ("eig", "first eigenpair at a single exponent p"),
        ("sweep", "warm-started eigenvalue sweep over ascending p"),
        ("infinity", "limiting-equation report for a representation eigenfunction"),
        ("verify1d", "closed-form 1D profiles: constants, residual refinement, verdicts"),
    ]:
        cmd = sub.add_parser(name, help=help_text)
        cmd.add_argument("--config", required=True, help="JSON config path")
        cmd.add_argument("--out", default=None, help="output directory (overrides config)")
        cmd.add_argument("--margin", type=float, default=None,
                         help="box margin in region diameters (overrides config)")
        cmd.add_argument("--h", type=float, default=None,
                         help="lattice spacing (overrides config)")
        cmd.add_argument("--threads", type=int, default=None,
                         help="cap BLAS/OMP thread pools (results are identical)")
    return parser


_COMMANDS = {
    "eig": cmd_eig,
    "sweep": cmd_sweep,
    "infinity": cmd_infinity,
    "verify1d": cmd_verify1d,
}


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    if args.threads is not None and args.threads > 0:
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
            os.environ[var] = str(args.threads)
    try:
        cfg = RunConfig.load(args.command, args)
        _COMMANDS[args.command](cfg)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
