"""Command-line front end: ``sgdyn solve``, ``sgdyn run`` and ``sgdyn sweep``."""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import itertools
import json
import logging
import os
import sys
import tempfile
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import __version__
from .dynamics import DYNAMICS, AgentSpec, validate_two_timescale
from .engine import ExperimentConfig, run, snapshot_csv, summary_json, trace_csv
from .games import GameParseError, GameValidationError, builtin_game, load_game
from .oracles import DEFAULT_TOL, shapley_iterate

log = logging.getLogger("sgdyn")

EXIT_OK, EXIT_FAIL, EXIT_IO, EXIT_PARSE, EXIT_INVALID, EXIT_CONFIG = 0, 1, 2, 3, 4, 5
LEVELS = ("model-based", "model-free", "minimal")
AGENT_FLAGS = ("level", "rho_alpha", "rho_beta", "epsilon", "tau")


class CliError(Exception):
    def __init__(self, code: int, message: str):
        self.code = code
        super().__init__(message)


def resolve_game(ref: str):
    """Load ``builtin:NAME`` or a JSON file, mapping failures to exit codes."""
    if ref.startswith("builtin:"):
        try:
            return builtin_game(ref[len("builtin:"):]), None
        except (KeyError, ValueError) as exc:
            raise CliError(EXIT_CONFIG, str(exc)) from exc
    try:
        raw = Path(ref).read_bytes()
    except OSError as exc:
        raise CliError(EXIT_IO, f"cannot read {ref}: {exc.strerror or exc}") from exc
    try:
        return load_game(raw.decode("utf-8")), hashlib.sha256(raw).hexdigest()
    except UnicodeDecodeError as exc:
        raise CliError(EXIT_PARSE, f"{ref}: not UTF-8 text") from exc
    except GameParseError as exc:
        raise CliError(EXIT_PARSE, f"{ref}: {exc}") from exc
    except GameValidationError as exc:
        raise CliError(EXIT_INVALID, f"{ref}: {exc}") from exc


def write_atomic(path: Path, text: str) -> None:
    """Write through a temporary sibling and rename, so readers never see a partial file."""
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.chmod(tmp, 0o644)
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise


def _out_dir(path: str) -> Path:
    out = Path(path)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise CliError(EXIT_IO, f"cannot create {out}: {exc.strerror or exc}") from exc
    return out


# ---------------------------------------------------------------- solve

def cmd_solve(args) -> int:
    game, _ = resolve_game(args.game)
    if not game.is_zero_sum:
        raise CliError(EXIT_INVALID, "solve needs a zero-sum game")
    tol = DEFAULT_TOL if args.tolerance is None else args.tolerance
    sol = shapley_iterate(game, tol)
    for s in range(game.state_count):
        # printed values are rounded to 12 decimals so solver round-off shows as 0.0
        v1, v2 = (round(float(v), 12) + 0.0 for v in sol.values[:, s])
        print(f"state {s}: value {v1} (player 2: {v2})")
    print(f"iterations {sol.iterations}, residual {sol.residual:.3e}")
    doc = {
        "game": args.game,
        "tolerance": tol,
        "values": sol.values.tolist(),
        "strategies": [sol.strategies[0].tolist(), sol.strategies[1].tolist()],
        "q_functions": sol.q_functions.tolist(),
        "residual": sol.residual,
        "iterations": sol.iterations,
    }
    if args.out:
        out = _out_dir(args.out)
        try:
            write_atomic(out / "solution.json", json.dumps(doc, indent=2, sort_keys=True) + "\n")
        except OSError as exc:
            raise CliError(EXIT_IO, f"cannot write solution: {exc}") from exc
    if sol.residual > tol:
        print(f"error: residual {sol.residual:.3e} exceeds tolerance {tol:.3e}", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


# ---------------------------------------------------------------- run

def load_config_file(path: str) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise CliError(EXIT_IO, f"cannot read {path}: {exc.strerror or exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CliError(EXIT_PARSE, f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    if not isinstance(doc, dict):
        raise CliError(EXIT_PARSE, f"{path}: config must be a JSON object")
    return doc


def config_document(args) -> dict:
    """Merge a config file (same layout as a summary's ``config`` echo) with flags."""
    doc = load_config_file(args.config) if args.config else {}
    doc = dict(doc)
    for key, flag in (("game", "game"), ("horizon", "horizon"), ("seed", "seed"),
                      ("cadence", "cadence"), ("tolerance", "tolerance"), ("lambda", "lam")):
        value = getattr(args, flag)
        if value is not None:
            doc[key] = value
    agents = [dict(a) for a in doc.get("agents", [{}, {}])]
    if len(agents) != 2:
        raise CliError(EXIT_CONFIG, "config must describe exactly two agents")
    if args.dynamics is not None:
        agents[0]["dynamics"] = args.dynamics
        agents[1]["dynamics"] = args.opponent or args.dynamics
    elif args.opponent is not None:
        agents[1]["dynamics"] = args.opponent
    for name in AGENT_FLAGS:
        value = getattr(args, name)
        if value is not None:
            for a in agents:
                a[name] = value
    doc["agents"] = agents
    return doc


def build_config(doc: dict) -> ExperimentConfig:
    missing = [k for k in ("game", "horizon") if k not in doc]
    if missing:
        raise CliError(EXIT_CONFIG, f"missing required setting(s): {', '.join(missing)}")
    if any("dynamics" not in a for a in doc["agents"]):
        raise CliError(EXIT_CONFIG, "both agents need a dynamics kind (--dynamics)")
    game, _ = resolve_game(doc["game"])
    try:
        specs = tuple(AgentSpec(**a) for a in doc["agents"])
        cfg = ExperimentConfig(
            game, specs, int(doc["horizon"]), seed=int(doc.get("seed", 0)),
            cadence=int(doc.get("cadence", 1000)), tolerance=float(doc.get("tolerance", DEFAULT_TOL)),
            lam=doc.get("lambda"), game_ref=doc["game"],
        )
        cfg.validate()
    except (TypeError, ValueError) as exc:
        raise CliError(EXIT_CONFIG, f"invalid configuration: {exc}") from exc
    return cfg


def execute(doc: dict, out: Path) -> dict:
    """Run one experiment and write its artifacts; returns the manifest."""
    cfg = build_config(doc)
    game_hash = None if cfg.game_ref.startswith("builtin:") else resolve_game(cfg.game_ref)[1]
    t0 = time.perf_counter()
    trace = run(cfg)
    files = {"trace": "trace.csv", "snapshots": "snapshots.csv", "summary": "summary.json"}
    try:
        write_atomic(out / files["trace"], trace_csv(trace))
        write_atomic(out / files["snapshots"], snapshot_csv(trace))
        write_atomic(out / files["summary"], summary_json(trace))
        manifest = {
            "config": cfg.echo(),
            "game_sha256": game_hash,
            "artifacts": {k: str(out / v) for k, v in files.items()},
            "duration_s": time.perf_counter() - t0,
            "final": trace.summary["final"],
            "exit_status": EXIT_OK,
            "version": __version__,
        }
        write_atomic(out / "manifest.json", json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    except OSError as exc:
        raise CliError(EXIT_IO, f"cannot write artifacts to {out}: {exc}") from exc
    manifest["summary"] = trace.summary
    return manifest


def cmd_run(args) -> int:
    doc = config_document(args)
    out = _out_dir(args.out)
    manifest = execute(doc, out)
    final = manifest["final"]
    shown = ", ".join(f"{k}={v:.4g}" for k, v in final.items() if k != "k" and v is not None)
    print(f"k={final['k']}: {shown}")
    print(f"wrote {out}")
    return EXIT_OK


# ---------------------------------------------------------------- sweep

def parse_list(text: str, kind=float) -> list:
    try:
        return [kind(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise CliError(EXIT_CONFIG, f"cannot parse list {text!r}: {exc}") from exc


def _sweep_job(job):
    doc, out = job
    manifest = execute(doc, Path(out))
    return manifest["final"]


def worker_count(n_jobs: int) -> int:
    cap = os.environ.get("SGDYN_THREADS")
    try:
        limit = int(cap) if cap else (os.cpu_count() or 1)
    except ValueError as exc:
        raise CliError(EXIT_CONFIG, f"SGDYN_THREADS must be an integer, got {cap!r}") from exc
    return max(1, min(limit, n_jobs))


def cmd_sweep(args) -> int:
    seeds = parse_list(args.seeds, int)
    ras = parse_list(args.rho_alpha_grid)
    rbs = parse_list(args.rho_beta_grid)
    if not seeds or not ras or not rbs:
        raise CliError(EXIT_CONFIG, "seed list and exponent grid must be non-empty")
    grid = sorted(set(itertools.product(ras, rbs)))
    for ra, rb in grid:
        try:
            validate_two_timescale(ra, rb)
        except ValueError as exc:
            raise CliError(EXIT_CONFIG, f"grid point (rho_alpha={ra}, rho_beta={rb}): {exc}") from exc
    args.rho_alpha = args.rho_beta = None
    base = config_document(args)
    build_config(base)  # fail fast before fanning out
    root = _out_dir(args.out)
    jobs, keys = [], []
    for (ra, rb), seed in itertools.product(grid, sorted(set(seeds))):
        doc = json.loads(json.dumps(base))
        doc["seed"] = seed
        for a in doc["agents"]:
            a["rho_alpha"], a["rho_beta"] = ra, rb
        out = root / f"ra{ra}_rb{rb}_seed{seed}"
        out.mkdir(exist_ok=True)
        jobs.append((doc, str(out)))
        keys.append((ra, rb, seed, out.name))
    workers = worker_count(len(jobs))
    log.info("sweep: %d runs on %d worker(s)", len(jobs), workers)
    if workers == 1:
        finals = [_sweep_job(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            finals = list(pool.map(_sweep_job, jobs))
    metrics = [m for m in finals[0] if m != "k"]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["rho_alpha", "rho_beta", "seed", "run", "k", *metrics])
    for (ra, rb, seed, name), final in zip(keys, finals):
        w.writerow([repr(ra), repr(rb), seed, name, final["k"],
                    *("" if final[m] is None else repr(final[m]) for m in metrics)])
    write_atomic(root / "aggregate.csv", buf.getvalue())
    print(f"{len(jobs)} runs; aggregate written to {root / 'aggregate.csv'}")
    return EXIT_OK


# ---------------------------------------------------------------- parser

def _add_game(p):
    p.add_argument("--game", help="game file path or builtin:NAME "
                   "(matching-pennies, rps, random-zs[:S[:A1xA2]], with optional :gamma=G:seed=N)")


def _add_run_flags(p):
    _add_game(p)
    p.add_argument("--config", help="JSON config, same layout as the summary's config echo")
    p.add_argument("--dynamics", choices=DYNAMICS, help="dynamics for both players")
    p.add_argument("--opponent", choices=DYNAMICS + ("frozen",), help="override player 2's dynamics")
    p.add_argument("--level", choices=LEVELS)
    p.add_argument("--horizon", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--tau", type=float)
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--tolerance", type=float)
    p.add_argument("--cadence", type=int)
    p.add_argument("--out", default=".", help="output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sgdyn", description="Learning dynamics in zero-sum stochastic games")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="Shapley value iteration on a zero-sum game")
    _add_game(p)
    p.add_argument("--tolerance", type=float)
    p.add_argument("--out", help="directory for solution.json")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("run", help="simulate one experiment")
    _add_run_flags(p)
    p.add_argument("--rho-alpha", type=float)
    p.add_argument("--rho-beta", type=float)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="run a seed list over a step-size exponent grid")
    _add_run_flags(p)
    p.add_argument("--seeds", default="0", help="comma-separated seeds")
    p.add_argument("--rho-alpha", dest="rho_alpha_grid", default="0.6", help="comma-separated grid")
    p.add_argument("--rho-beta", dest="rho_beta_grid", default="1.0", help="comma-separated grid")
    p.set_defaults(func=cmd_sweep, rho_alpha=None, rho_beta=None)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if getattr(args, "game", None) is None and not getattr(args, "config", None):
        parser.error("--game is required")
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
