"""Command line entry point: ``thinfrac {constants,energy,sweep,verify}``.

Exit codes: 0 success, 1 usage error, 2 numerical or acceptance failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import time
from dataclasses import asdict, dataclass, fields

from . import __version__
from .acceptance import SUITES, run_suite
from .asymptotics import (
    RegimeLabel,
    bbm_sweep,
    classify_regime,
    critical_sweep,
    parse_schedule,
    run_sweep,
)
from .constants import constant_table
from .errors import NumericalFailure, SweepFailure, ThinFracError, UsageError
from .geometry import BaseDomain, FractionalParams, ThinFilm
from .kernelquad import QuadratureSpec, seminorm
from .svgplot import loglog_svg
from .testfns import parse_tag

EXIT_OK, EXIT_USAGE, EXIT_FAIL = 0, 1, 2
GAP_LIMIT = 1e-8


@dataclass
class RunConfig:
    """Every flag of every subcommand, as one JSON-serialisable document."""

    command: str | None = None
    fn: str = "planar-linear:a=1"
    d: int = 2
    s: float | None = None
    s_schedule: str | None = None
    p: float = 2.0
    eps: float = 0.1
    eps_from: str = "2^-3"
    eps_to: str = "2^-10"
    tau: float = 0.0
    engine: str = "grid"
    samples: int = 200_000
    panels: int = 16
    seed: int | None = None
    out: str = "-"
    format: str = "json"
    csv: str | None = None
    plot: str | None = None
    s_grid: list[float] | None = None
    d_set: list[int] | None = None
    p_set: list[float] | None = None
    suite: str = "all"
    budget: str = "quick"

    @classmethod
    def from_json(cls, text: str) -> RunConfig:
        data = json.loads(text)
        known = {f.name for f in fields(cls)}
        extra = set(data) - known
        if extra:
            raise UsageError(f"unknown config keys: {sorted(extra)}")
        return cls(**data)

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True, indent=2)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _floats(text):
    return [float(v) for v in text.split(",") if v]


def _ints(text):
    return [int(v) for v in text.split(",") if v]


def parse_eps(text: str) -> float:
    """``0.125``, ``2^-3`` or ``2**-3``."""
    t = str(text).replace("**", "^").strip()
    try:
        if "^" in t:
            base, exp = t.split("^", 1)
            return float(base) ** float(exp)
        return float(t)
    except ValueError as exc:
        raise UsageError(f"bad eps value {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    S = argparse.SUPPRESS
    common = _Parser(add_help=False)
    common.add_argument("--config", default=S, help="JSON RunConfig; flags override it")
    common.add_argument("--dump-config", default=S, help="write the effective config and continue")
    common.add_argument("--out", default=S, help="output path, '-' for stdout")
    common.add_argument("--format", choices=["json", "csv"], default=S)
    common.add_argument("--threads", type=int, default=S, help="worker threads (default: all cores)")

    quad = _Parser(add_help=False)
    quad.add_argument("--fn", default=S, help="function tag, e.g. planar-linear:a=1")
    quad.add_argument("--d", type=int, default=S)
    quad.add_argument("--p", type=float, default=S)
    quad.add_argument("--engine", choices=["mc", "grid"], default=S)
    quad.add_argument("--samples", type=int, default=S)
    quad.add_argument("--panels", type=int, default=S)
    quad.add_argument("--seed", type=int, default=S, help="default: $THINFRAC_SEED or 0")
    quad.add_argument("--tau", type=float, default=S)

    top = _Parser(prog="thinfrac", description="Fractional energies on thin films.")
    top.add_argument("--version", action="version", version=f"thinfrac {__version__}")
    sub = top.add_subparsers(dest="command", parser_class=_Parser)

    c = sub.add_parser("constants", parents=[common], help="closed form vs quadrature table")
    c.add_argument("--s", dest="s_grid", type=_floats, default=S, help="comma list of s values")
    c.add_argument("--d", dest="d_set", type=_ints, default=S, help="comma list of d values")
    c.add_argument("--p", dest="p_set", type=_floats, default=S, help="comma list of p values")

    e = sub.add_parser("energy", parents=[common, quad], help="one energy evaluation")
    e.add_argument("--s", type=float, default=S)
    e.add_argument("--eps", type=parse_eps, default=S)

    w = sub.add_parser("sweep", parents=[common, quad], help="epsilon-ladder sweep")
    w.add_argument("--s", type=float, default=S)
    w.add_argument("--s-schedule", dest="s_schedule", default=S, help="const:x | bbm-log2 | bbm-log")
    w.add_argument("--eps-from", dest="eps_from", default=S)
    w.add_argument("--eps-to", dest="eps_to", default=S)
    w.add_argument("--csv", default=S, help="also write eps,raw,scaled,predicted rows here")
    w.add_argument("--plot", default=S, help="write a log-log SVG here")

    v = sub.add_parser("verify", parents=[common], help="run acceptance suites")
    v.add_argument("suite", help="|".join(SUITES))
    v.add_argument("--budget", choices=["quick", "full"], default=S)
    return top


def resolve_config(ns: argparse.Namespace) -> tuple[RunConfig, int]:
    """Defaults, then the config file, then explicit flags."""
    cfg = RunConfig()
    given = vars(ns).copy()
    path = given.pop("config", None)
    if path:
        try:
            with open(path) as fh:
                cfg = RunConfig.from_json(fh.read())
        except OSError as exc:
            raise UsageError(f"cannot read config {path}: {exc}") from exc
        except (json.JSONDecodeError, TypeError) as exc:
            raise UsageError(f"bad config {path}: {exc}") from exc
    threads = given.pop("threads", None) or os.cpu_count() or 1
    dump = given.pop("dump_config", None)
    for key, value in given.items():
        if value is not None and hasattr(cfg, key):
            setattr(cfg, key, value)
    if cfg.seed is None:
        env = os.environ.get("THINFRAC_SEED")
        try:
            cfg.seed = int(env) if env else 0
        except ValueError as exc:
            raise UsageError("THINFRAC_SEED must be an integer") from exc
    if dump:
        with open(dump, "w") as fh:
            fh.write(cfg.to_json() + "\n")
    return cfg, threads


def _emit(text: str, out: str):
    if out == "-":
        sys.stdout.write(text)
    else:
        with open(out, "w") as fh:
            fh.write(text)


def _json_doc(result, cfg: RunConfig, threads: int) -> str:
    doc = {
        "result": result,
        "config": asdict(cfg),
        "metadata": {"timestamp": time.strftime("%Y-%m-%dT%H:%M:%S%z"), "version": __version__, "threads": threads},
    }
    return json.dumps(doc, sort_keys=True, indent=2, default=_jsonable) + "\n"


def _jsonable(obj):
    if hasattr(obj, "value"):
        return obj.value
    raise TypeError(f"not serialisable: {type(obj)}")


def _csv(rows: list[dict], columns: list[str]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=columns, extrasaction="ignore", lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: ("n/a" if row.get(k) is None else row.get(k)) for k in columns})
    return buf.getvalue()


def _spec(cfg: RunConfig, threads: int) -> QuadratureSpec:
    return QuadratureSpec(engine=cfg.engine, samples=cfg.samples, panels=cfg.panels, seed=cfg.seed, threads=threads)


# ------------------------------------------------------------------ commands


def cmd_constants(cfg: RunConfig, threads: int) -> int:
    s_grid = cfg.s_grid or [round(0.05 * k, 2) for k in range(1, 20)]
    d_set = cfg.d_set or [2, 3]
    p_set = cfg.p_set or [2.0]
    if any(d not in (2, 3) for d in d_set):
        raise UsageError("--d accepts 2 and 3")
    if any(not 0 < s <= 1 for s in s_grid):
        raise UsageError("--s values must lie in (0, 1]")
    if any(not (p >= 1 and math.isfinite(p)) for p in p_set):
        raise UsageError("--p values must be finite and >= 1")
    rows = [r.row() for r in constant_table(s_grid, d_set, p_set)]
    if cfg.format == "csv":
        _emit(_csv(rows, ["name", "s", "d", "p", "closed", "quad", "rel_gap"]), cfg.out)
    else:
        _emit(_json_doc(rows, cfg, threads), cfg.out)
    bad = [r for r in rows if r["rel_gap"] is not None and r["rel_gap"] > GAP_LIMIT]
    if bad:
        print(f"{len(bad)} rows exceed the {GAP_LIMIT:g} gap", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


def cmd_energy(cfg: RunConfig, threads: int) -> int:
    if cfg.s is None:
        raise UsageError("energy needs --s")
    params = FractionalParams(cfg.d, cfg.s, cfg.p)
    f = parse_tag(cfg.fn, cfg.d)
    film = ThinFilm(BaseDomain.for_dimension(cfg.d), float(cfg.eps), cfg.tau)
    est = seminorm(f, film, params, _spec(cfg, threads))
    result = {
        "value": est.value,
        "error": est.error,
        "engine": est.engine,
        "low_confidence": est.low_confidence,
        "config": {"fn": f.tag, "d": cfg.d, "s": cfg.s, "p": cfg.p, "eps": cfg.eps, "tau": cfg.tau},
    }
    if cfg.format == "csv":
        _emit(_csv([result], ["value", "error", "engine", "low_confidence"]), cfg.out)
    else:
        _emit(_json_doc(result, cfg, threads), cfg.out)
    return EXIT_OK


def _ladder(cfg: RunConfig) -> list[float]:
    hi, lo = parse_eps(cfg.eps_from), parse_eps(cfg.eps_to)
    k0, k1 = -math.log2(hi), -math.log2(lo)
    if abs(k0 - round(k0)) > 1e-9 or abs(k1 - round(k1)) > 1e-9:
        raise UsageError("--eps-from/--eps-to must be powers of two")
    return [2.0 ** -k for k in range(round(k0), round(k1) + 1)]


def cmd_sweep(cfg: RunConfig, threads: int) -> int:
    f = parse_tag(cfg.fn, cfg.d)
    spec = _spec(cfg, threads)
    ladder = _ladder(cfg)
    if cfg.s_schedule and cfg.s is not None:
        raise UsageError("give either --s or --s-schedule")
    try:
        if cfg.s_schedule:
            sched = parse_schedule(cfg.s_schedule)
            if sched.name.startswith("bbm"):
                report = bbm_sweep(f, cfg.d, ladder, sched, spec)
            else:
                params = FractionalParams(cfg.d, sched(ladder[0]), cfg.p)
                report = run_sweep(f, params, ladder, spec, s_schedule=sched, tau=cfg.tau)
        else:
            if cfg.s is None:
                raise UsageError("sweep needs --s or --s-schedule")
            params = FractionalParams(cfg.d, cfg.s, cfg.p)
            vertical = f.vertical and not f.planar
            if not vertical and classify_regime(params).label is RegimeLabel.CRITICAL:
                report = critical_sweep(f, cfg.d, cfg.p, ladder, spec)
            else:
                report = run_sweep(f, params, ladder, spec, tau=cfg.tau)
    except SweepFailure as exc:
        if exc.partial is not None:
            _emit(_json_doc({"error": str(exc), "partial": exc.partial.to_dict()}, cfg, threads), cfg.out)
        raise
    if "candidates" in report.extras:
        ex = report.extras
        print(
            f"critical coefficient {ex['log_coefficient']:.4f}; candidates "
            f"theorem={ex['candidates']['theorem']:.4f} half={ex['candidates']['half']:.4f}",
            file=sys.stderr,
        )
    rows = report.rows()
    if cfg.format == "csv":
        _emit(_csv(rows, ["eps", "raw", "scaled", "predicted"]), cfg.out)
    else:
        _emit(_json_doc(report.to_dict(), cfg, threads), cfg.out)
    if cfg.csv:
        _emit(_csv(rows, ["eps", "raw", "scaled", "predicted"]), cfg.csv)
    if cfg.plot:
        svg = loglog_svg(
            report.eps_ladder, report.raw_energies, title=f"{report.function} ({report.regime.label.value})",
            slope=report.predicted_slope,
        )
        _emit(svg, cfg.plot)
    return EXIT_OK


def cmd_verify(cfg: RunConfig, threads: int) -> int:
    if cfg.suite not in SUITES:
        raise UsageError(f"unknown suite {cfg.suite!r}; choose from {', '.join(SUITES)}")
    results = run_suite(cfg.suite, cfg.budget, log=lambda line: print(line, file=sys.stderr))
    payload = [r.to_dict() for r in results]
    if cfg.format == "csv":
        rows = [{"criterion": r.number, "title": r.title, "passed": r.passed, "runtime_s": round(r.runtime_s, 3)} for r in results]
        _emit(_csv(rows, ["criterion", "title", "passed", "runtime_s"]), cfg.out)
    else:
        # runtimes vary between runs, so they go with the metadata
        for item in payload:
            item.pop("runtime_s")
        doc = json.loads(_json_doc(payload, cfg, threads))
        doc["metadata"]["runtimes_s"] = {str(r.number): r.runtime_s for r in results}
        _emit(json.dumps(doc, sort_keys=True, indent=2) + "\n", cfg.out)
    failed = [r for r in results if not r.passed]
    if failed:
        print("failing criteria: " + ", ".join(f"{r.number} ({r.title})" for r in failed), file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


COMMANDS = {"constants": cmd_constants, "energy": cmd_energy, "sweep": cmd_sweep, "verify": cmd_verify}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
        if ns.command is None:
            parser.print_help(sys.stderr)
            return EXIT_USAGE
        cfg, threads = resolve_config(ns)
        if threads < 1:
            raise UsageError("--threads must be >= 1")
        return COMMANDS[cfg.command](cfg, threads)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericalFailure as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except ThinFracError as exc:
        # domain and family errors come from bad inputs
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
