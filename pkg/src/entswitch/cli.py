"""Command-line front end.

Subcommands: ``analytic``, ``simulate``, ``solve``, ``drift``,
``identities`` and ``sweep``.  Settings resolve as flags, then a flat
``key=value`` config file (``--config``), then built-in defaults; the
seed additionally falls back to ``ENTSWITCH_SEED`` before the built-in
default.

Exit status: 0 success, 1 internal error, 2 rejected parameters,
3 tolerance, tail-bound or certification failure.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import math
import os
import sys
from datetime import datetime, timezone
from typing import Any, Callable, Dict, List, Optional, Sequence

from . import __version__
from .errors import ConfigInvalid, EntSwitchError, TailBoundViolated

SEED_ENV = "ENTSWITCH_SEED"
IDENTITY_TOL = 1e-9

SIMULATE_FIELDS = ("k", "n", "mu", "q", "steps", "seed", "capacity", "capacity_ci", "occupancy",
                   "occupancy_ci", "r0_frac", "r0_ci", "attempts", "successes")
SWEEP_FIELDS = ("k", "n", "expected_qubits", "log10_expected_qubits")
SOLVE_FIELDS = ("k", "n", "B", "pi_R0", "expected_qubits", "A", "B_aggr", "residual", "boundary_mass")


# ---------------------------------------------------------------------------
# settings


@dataclasses.dataclass(frozen=True)
class Setting:
    name: str
    type: Callable[[str], Any]
    default: Any
    help: str


def _seed_type(text: str) -> int:
    value = int(text, 0)
    if not 0 <= value < 2 ** 64:
        raise ValueError("seed must be a 64-bit unsigned integer")
    return value


COMMON_FORMAT = Setting("format", str, "text", "output format: text, json or csv")

SETTINGS: Dict[str, List[Setting]] = {
    "analytic": [
        Setting("k", int, None, "number of links"),
        Setting("n", int, None, "size of the entangled state"),
        Setting("mu", float, 1.0, "per-link generation rate"),
        Setting("q", float, 1.0, "swap success probability"),
    ],
    "simulate": [
        Setting("k", int, None, "number of links"),
        Setting("n", int, None, "size of the entangled state"),
        Setting("mu", float, 1.0, "per-link generation rate"),
        Setting("q", float, 1.0, "swap success probability"),
        Setting("steps", int, 1_000_000, "chain steps per replication"),
        Setting("warmup", int, None, "discarded steps (default 5%% of steps)"),
        Setting("seed", _seed_type, 0, f"RNG seed (default ${SEED_ENV} or 0)"),
        Setting("replications", int, 1, "independent replications"),
        Setting("batches", int, 50, "batches per replication for the confidence intervals"),
        Setting("workers", int, 1, "threads running replications"),
    ],
    "solve": [
        Setting("k", int, None, "number of links"),
        Setting("n", int, None, "size of the entangled state"),
        Setting("mu", float, 1.0, "per-link generation rate"),
        Setting("q", float, 1.0, "swap success probability"),
        Setting("cap", int, 60, "per-slot truncation cap B"),
        Setting("tol", float, 1e-12, "stop when ||pi P - pi||_1 falls below this"),
        Setting("max_sweeps", int, 1_000_000, "iteration budget"),
        Setting("pi_out", str, None, "write the stationary vector to this CSV file"),
    ],
    "drift": [
        Setting("k", int, None, "number of links"),
        Setting("n", int, None, "size of the entangled state"),
        Setting("alpha", float, None, "certification parameter in (0, 1/(n-1)); default 0.5/(n-1)"),
        Setting("tail_tol", float, 1e-10, "tolerance for the truncated boundary constants"),
    ],
    "identities": [
        Setting("grid", str, "default", "parameter grid: default (k=5..10) or small (k=5..6)"),
        Setting("tol", float, IDENTITY_TOL, "largest acceptable scaled residual"),
    ],
    "sweep": [
        Setting("kmin", int, 3, "smallest k"),
        Setting("kmax", int, 100, "largest k"),
    ],
}

DEFAULT_FORMAT = {"sweep": "csv"}


def read_config_file(path: str) -> Dict[str, str]:
    """Parse ``key=value`` lines; ``#`` starts a comment, blank lines are skipped."""
    out: Dict[str, str] = {}
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise ConfigInvalid(f"cannot read config file {path!r}: {exc}") from exc
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigInvalid(f"{path}:{lineno}: expected key=value, got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


def resolve_settings(command: str, flags: Dict[str, Any], file_values: Dict[str, str],
                     env: Optional[Dict[str, str]] = None) -> Dict[str, Any]:
    """Merge flags over config-file values over defaults."""
    env = os.environ if env is None else env
    settings = SETTINGS[command] + [COMMON_FORMAT]
    known = {s.name for s in settings}
    unknown = set(file_values) - known
    if unknown:
        raise ConfigInvalid(f"unknown config keys for {command}: {', '.join(sorted(unknown))}")
    out: Dict[str, Any] = {}
    for s in settings:
        if flags.get(s.name) is not None:
            out[s.name] = flags[s.name]
            continue
        if s.name in file_values:
            try:
                out[s.name] = s.type(file_values[s.name])
            except ValueError as exc:
                raise ConfigInvalid(f"bad value for {s.name}: {file_values[s.name]!r}") from exc
            continue
        if s.name == "seed" and env.get(SEED_ENV):
            try:
                out[s.name] = _seed_type(env[SEED_ENV])
            except ValueError as exc:
                raise ConfigInvalid(f"bad {SEED_ENV}: {env[SEED_ENV]!r}") from exc
            continue
        default = DEFAULT_FORMAT.get(command, s.default) if s.name == "format" else s.default
        out[s.name] = default
    missing = [s.name for s in settings if s.default is None and out[s.name] is None
               and s.name in ("k", "n")]
    if missing:
        raise ConfigInvalid(f"missing required setting(s): {', '.join(missing)}")
    if out["format"] not in ("text", "json", "csv"):
        raise ConfigInvalid(f"unknown format {out['format']!r}")
    return out


# ---------------------------------------------------------------------------
# output


@dataclasses.dataclass
class RunManifest:
    subcommand: str
    parameters: Dict[str, Any]
    seed: Optional[int]
    version: str
    timestamp: str
    outputs: List[str]

    @classmethod
    def create(cls, command: str, settings: Dict[str, Any], outputs: Sequence[str] = ()) -> "RunManifest":
        return cls(command, dict(settings), settings.get("seed"), __version__,
                   datetime.now(timezone.utc).isoformat(timespec="seconds"), list(outputs))


def _json_value(v: Any) -> Any:
    if isinstance(v, float):
        if math.isfinite(v):
            return float(f"{v:.17g}")
        return repr(v)
    if isinstance(v, dict):
        return {str(k): _json_value(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_json_value(x) for x in v]
    if hasattr(v, "item"):
        return _json_value(v.item())
    return v


def to_json(manifest: RunManifest, result: Any) -> str:
    return json.dumps({"manifest": _json_value(dataclasses.asdict(manifest)),
                       "result": _json_value(result)}, indent=2)


def _text_value(v: Any) -> str:
    if isinstance(v, float):
        return f"{v:.12g}"
    return str(v)


def to_text(record: Dict[str, Any]) -> str:
    width = max(len(k) for k in record)
    return "\n".join(f"{k:<{width}}  {_text_value(v)}" for k, v in record.items())


def _csv_value(v: Any) -> str:
    if isinstance(v, float):
        return repr(v) if math.isfinite(v) else str(v)
    return str(v)


def to_csv(fields: Sequence[str], rows: Sequence[Dict[str, Any]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(fields)
    for row in rows:
        w.writerow([_csv_value(row[f]) for f in fields])
    return buf.getvalue()


def _emit(text: str, output: Optional[str], manifest: RunManifest) -> None:
    if output is None:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
        return
    with open(output, "w", encoding="utf-8") as fh:
        fh.write(text if text.endswith("\n") else text + "\n")
    if not output.endswith(".json"):
        with open(output + ".manifest.json", "w", encoding="utf-8") as fh:
            fh.write(to_json(manifest, None) + "\n")


# ---------------------------------------------------------------------------
# subcommands


def cmd_analytic(s: Dict[str, Any]) -> Dict[str, Any]:
    """Closed-form performance figures for one switch."""
    from .analytic import report
    from .model import SwitchParams

    r = report(SwitchParams(s["k"], s["n"], s["mu"], s["q"]))
    return {"k": s["k"], "n": s["n"], "mu": s["mu"], "q": s["q"], **dataclasses.asdict(r)}


def cmd_simulate(s: Dict[str, Any]) -> Dict[str, Any]:
    """Monte Carlo estimates from the uniformized chain."""
    from .model import SwitchParams
    from .simulate import SimConfig, run

    params = SwitchParams(s["k"], s["n"], s["mu"], s["q"])
    config = SimConfig(steps=s["steps"], warmup=s["warmup"], seed=s["seed"],
                       replications=s["replications"], batches=s["batches"], workers=s["workers"])
    r = run(params, config)
    return {
        "k": r.k, "n": r.n, "mu": r.mu, "q": r.q, "steps": r.steps, "seed": r.seed,
        "capacity": r.capacity_est, "capacity_ci": r.capacity_hw,
        "occupancy": r.occupancy_est, "occupancy_ci": r.occupancy_hw,
        "r0_frac": r.r0_fraction, "r0_ci": r.r0_hw,
        "attempts": r.attempts, "successes": r.successes,
    }


def cmd_solve(s: Dict[str, Any]) -> Dict[str, Any]:
    """Stationary distribution of the chain truncated at a cap."""
    from .model import SwitchParams
    from .solve import build, pi_rows, stationary

    params = SwitchParams(s["k"], s["n"], s["mu"], s["q"])
    chain = build(params, s["cap"])
    res = stationary(chain, s["tol"], s["max_sweeps"])
    if s["pi_out"]:
        with open(s["pi_out"], "w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow([f"x{i + 1}" for i in range(params.n - 1)] + ["probability"])
            for row in pi_rows(chain, res.pi):
                w.writerow([_csv_value(v) for v in row])
    return {
        "k": params.k, "n": params.n, "B": res.B_used, "pi_R0": res.pi_R0,
        "expected_qubits": res.expected_qubits, "A": res.aggregate_A, "B_aggr": res.aggregate_B,
        "residual": res.residual, "boundary_mass": res.boundary_mass,
    }


def cmd_drift(s: Dict[str, Any]) -> Dict[str, Any]:
    """Negative-drift certificate for the quadratic Lyapunov function."""
    from .comb import SeriesTruncation
    from .lyapunov import LyapunovConfig, certify_negative_drift
    from .model import SwitchParams

    params = SwitchParams(s["k"], s["n"])
    alpha = s["alpha"] if s["alpha"] is not None else 0.5 / (params.n - 1)
    cert = certify_negative_drift(params, LyapunovConfig.from_alpha(params.n, alpha),
                                  trunc=SeriesTruncation(tail_tol=s["tail_tol"]))
    return {
        "k": cert.k, "n": cert.n, "alpha": cert.alpha, "b": cert.b, "M": cert.M,
        "epsilon": cert.epsilon,
        "rows": [{"stratum": name, "coefficient": c, "constant": d, "threshold": t}
                 for name, c, d, t in cert.rows()],
    }


def cmd_identities(s: Dict[str, Any]) -> Dict[str, Any]:
    """Check the series identities on a parameter grid."""
    from .comb import identity_grid

    grids = {"default": range(5, 11), "small": range(5, 7)}
    if s["grid"] not in grids:
        raise ConfigInvalid(f"unknown grid {s['grid']!r}; choose from {', '.join(grids)}")
    checks = identity_grid(grids[s["grid"]])
    worst: Dict[str, float] = {}
    for c in checks:
        worst[c.name] = max(worst.get(c.name, 0.0), c.residual)
    return {"grid": s["grid"], "checks": len(checks), "max_residual": max(worst.values()),
            "tolerance": s["tol"], "rows": [{"identity": k, "max_residual": v} for k, v in worst.items()]}


def cmd_sweep(s: Dict[str, Any]) -> Dict[str, Any]:
    """Occupancy grid over (k, n)."""
    from .analytic import heatmap_grid

    if s["kmin"] < 3 or s["kmax"] < s["kmin"]:
        raise ConfigInvalid(f"need 3 <= kmin <= kmax, got kmin={s['kmin']}, kmax={s['kmax']}")
    rows = heatmap_grid(range(s["kmin"], s["kmax"] + 1))
    return {"rows": [dataclasses.asdict(r) for r in rows]}


COMMANDS = {
    "analytic": (cmd_analytic, None),
    "simulate": (cmd_simulate, SIMULATE_FIELDS),
    "solve": (cmd_solve, SOLVE_FIELDS),
    "drift": (cmd_drift, ("stratum", "coefficient", "constant", "threshold")),
    "identities": (cmd_identities, ("identity", "max_residual")),
    "sweep": (cmd_sweep, SWEEP_FIELDS),
}


def _render(command: str, fmt: str, result: Dict[str, Any], manifest: RunManifest) -> str:
    fields = COMMANDS[command][1]
    if fmt == "json":
        return to_json(manifest, result)
    rows = result.get("rows")
    if fmt == "csv":
        if rows is None:
            fields = fields or tuple(result)
            return to_csv(fields, [result])
        return to_csv(fields, rows)
    head = {k: v for k, v in result.items() if k != "rows"}
    parts = [to_text(head)] if head else []
    if rows:
        cols = list(rows[0])
        cells = [[_text_value(r[c]) for c in cols] for r in rows]
        widths = [max(len(c), *(len(row[i]) for row in cells)) for i, c in enumerate(cols)]
        parts.append("  ".join(f"{c:>{w}}" for c, w in zip(cols, widths)))
        for row in cells:
            parts.append("  ".join(f"{v:>{w}}" for v, w in zip(row, widths)))
    return "\n".join(parts)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="entswitch", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, settings in SETTINGS.items():
        doc = COMMANDS[name][0].__doc__
        p = sub.add_parser(name, help=doc, description=doc)
        for s in settings:
            flag = "--" + s.name.replace("_", "-")
            aliases = ["--B"] if s.name == "cap" else []
            p.add_argument(flag, *aliases, dest=s.name, type=s.type, default=None, help=s.help)
        p.add_argument("--format", dest="format", choices=("text", "json", "csv"), default=None,
                       help=COMMON_FORMAT.help)
        p.add_argument("--config", default=None, help="flat key=value settings file")
        p.add_argument("--output", "-o", default=None, help="write to this file instead of stdout")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    command = args.command
    flags = {k: v for k, v in vars(args).items() if k not in ("command", "config", "output")}
    try:
        file_values = read_config_file(args.config) if args.config else {}
        settings = resolve_settings(command, flags, file_values)
        result = COMMANDS[command][0](settings)
        manifest = RunManifest.create(command, settings, [args.output] if args.output else [])
        _emit(_render(command, settings["format"], result, manifest), args.output, manifest)
        if command == "identities" and not result["max_residual"] <= settings["tol"]:
            raise TailBoundViolated(
                f"max residual {result['max_residual']:.3e} exceeds {settings['tol']:.1e}")
    except EntSwitchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except Exception as exc:  # pragma: no cover - last-resort mapping to the internal-error code
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
