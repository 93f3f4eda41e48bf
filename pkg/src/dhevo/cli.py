"""Command-line surface: gen, dive, evolve, eval, report.

Exit codes: 0 success, 2 configuration or usage problems, 3 runtime
failures. Every command writes a run manifest next to its outputs; mock
evolution runs are byte-reproducible from the manifest alone.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from datetime import datetime, timezone

try:
    import tomllib
except ModuleNotFoundError:                      # Python 3.10
    import tomli as tomllib

from . import storage
from .bnb import solve_bnb
from .diving import builtin_scorer, default_dmax, dive, program_scorer
from .dsl import parse as parse_program
from .errors import (
    ConfigError, DhevoError, InfeasibleSpec, IoError, ProviderError,
    SchemaMismatch,
)
from .evolution import EvolveConfig, run_baseline_ec, run_dhevo
from .generators import FAMILIES, GenSpec, PRESETS, generate, preset_params
from .metrics import primal_gap
from .model import MipSolution
from .report import read_per_instance_csv, write_report
from .rng import derive_seed

log = logging.getLogger("dhevo")


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def _manifest(args, command: str, config: dict, seeds: dict,
              instance_hashes: dict, outputs: list[str], started: str,
              out_dir: str) -> None:
    path = os.path.join(out_dir, "manifest.json")
    storage.write_manifest(path, command=command, config=config, seeds=seeds,
                           instance_hashes=instance_hashes, outputs=outputs,
                           started_at=started, finished_at=_now())


# --- gen ---

def cmd_gen(args) -> int:
    started = _now()
    if args.family not in FAMILIES:
        raise ConfigError(f"unknown family {args.family!r}; choose from {FAMILIES}")
    params = preset_params(args.family, args.preset)
    for override in args.param or []:
        if "=" not in override:
            raise ConfigError(f"--param expects key=value, got {override!r}")
        key, value = override.split("=", 1)
        params[key] = float(value) if "." in value else int(value)
    os.makedirs(args.out, exist_ok=True)
    outputs, hashes = [], {}
    for i in range(args.count):
        seed_i = args.seed + i
        inst = generate(GenSpec(family=args.family, params=params, seed=seed_i))
        path = os.path.join(args.out, f"{args.family}_{seed_i}.json")
        hashes[inst.name] = storage.save_instance(path, inst)
        outputs.append(path)
        log.info("wrote %s (%d vars, %d rows)", path, inst.num_vars, inst.num_cons)
    _manifest(args, "gen",
              {"family": args.family, "preset": args.preset, "params": params,
               "count": args.count},
              {"base_seed": args.seed}, hashes, outputs, started, args.out)
    return 0


# --- dive ---

def make_scorer(spec: str, seed: int = 0):
    """Scorer from a CLI spec: builtin:<name> or dsl:<path.dh>."""
    if spec.startswith("builtin:"):
        return builtin_scorer(spec.split(":", 1)[1], seed=seed)
    if spec.startswith("dsl:"):
        text = storage.load_program_text(spec.split(":", 1)[1])
        return program_scorer(parse_program(text))
    raise ConfigError(f"scorer spec must be builtin:<name> or dsl:<path>, "
                      f"got {spec!r}")


def cmd_dive(args) -> int:
    started = _now()
    inst = storage.load_instance(args.instance)
    scorer = make_scorer(args.scorer, seed=args.seed)
    d_max = args.dmax if args.dmax is not None else default_dmax(inst)
    result = dive(inst, scorer, d_max=d_max)

    ref = solve_bnb(inst, max_nodes=args.zref_nodes, max_seconds=args.zref_seconds)
    gap = None
    if result.best_objective is not None and ref.objective is not None:
        gap = primal_gap(result.best_objective, ref.objective)
    payload = {
        "schema_version": storage.SCHEMA_VERSION,
        "kind": "dive_result",
        "instance": inst.name,
        "scorer": args.scorer,
        "d_max": d_max,
        "solutions": [
            {"x": [float(v) for v in x], "objective": obj}
            for x, obj in result.solutions
        ],
        "best_objective": result.best_objective,
        "depth_reached": result.depth_reached,
        "lp_resolves": result.lp_resolves,
        "terminated_by": result.terminated_by,
        "z_ref": ref.objective,
        "z_ref_proven": ref.status == MipSolution.OPTIMAL,
        "primal_gap": gap,
    }
    storage.write_json(args.json_out, payload)
    out_dir = os.path.dirname(os.path.abspath(args.json_out))
    _manifest(args, "dive",
              {"instance": args.instance, "scorer": args.scorer, "d_max": d_max},
              {"seed": args.seed},
              {inst.name: storage.instance_content_hash(inst)},
              [args.json_out], started, out_dir)
    log.info("dive: best=%s resolves=%d terminated=%s gap=%s",
             result.best_objective, result.lp_resolves, result.terminated_by, gap)
    return 0


# --- evolve ---

def load_evolve_config(path: str) -> tuple[EvolveConfig, dict]:
    """EvolveConfig plus the [instances] table from a TOML file."""
    try:
        with open(path, "rb") as handle:
            raw = tomllib.load(handle)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}")
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"invalid TOML in {path}: {exc}")
    instances_spec = raw.pop("instances", {})
    known = set(EvolveConfig.__dataclass_fields__)
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    try:
        cfg = EvolveConfig(**raw)
    except TypeError as exc:
        raise ConfigError(f"bad config value: {exc}")
    cfg.validate()
    return cfg, instances_spec


def resolve_instances(cfg: EvolveConfig, spec: dict,
                      config_dir: str) -> list:
    """Instances named by the config: a directory of JSON files or a
    generation recipe (family/preset/count/seed)."""
    if "dir" in spec:
        directory = os.path.join(config_dir, spec["dir"])
        instances = [storage.load_instance(path)
                     for path in _instance_files(directory)]
    elif "family" in spec:
        family = spec["family"]
        params = preset_params(family, spec.get("preset", "tiny"))
        params.update(spec.get("params", {}))
        base = int(spec.get("seed", cfg.seed))
        count = int(spec.get("count", cfg.n))
        try:
            instances = [generate(GenSpec(family=family, params=params,
                                          seed=base + i))
                         for i in range(count)]
        except TypeError as exc:
            raise ConfigError(f"bad [instances.params] for {family}: {exc}")
    else:
        raise ConfigError("config [instances] needs either dir= or family=")
    if len(instances) != cfg.n:
        raise ConfigError(f"config n={cfg.n} but {len(instances)} instances "
                          f"were provided")
    return instances


def build_provider(cfg: EvolveConfig):
    if cfg.provider == "mock":
        from .agents import mock_provider
        return mock_provider(derive_seed(cfg.seed, "provider"))
    if cfg.provider == "http":
        from .agents import http_provider
        return http_provider()
    raise ConfigError(f"unknown provider {cfg.provider!r}")


def cmd_evolve(args) -> int:
    started = _now()
    cfg, instances_spec = load_evolve_config(args.config)
    instances = resolve_instances(cfg, instances_spec,
                                  os.path.dirname(os.path.abspath(args.config)))
    provider = build_provider(cfg)
    hashes = {inst.name: storage.instance_content_hash(inst)
              for inst in instances}
    os.makedirs(args.out, exist_ok=True)
    archive_path = os.path.join(args.out, "archive.json")
    events_path = os.path.join(args.out, "events.jsonl")
    transcripts_path = os.path.join(args.out, "transcripts.jsonl")

    def flush(archive) -> None:
        storage.save_archive(archive_path, archive.as_dict())
        storage.write_jsonl(events_path, archive.events)
        storage.write_jsonl(transcripts_path,
                            list(archive.episodes.values()))

    runner = run_dhevo if cfg.fitness_mode == "per_instance" else run_baseline_ec
    holder: dict = {}
    try:
        archive = runner(cfg, instances, provider,
                         instance_hashes=[hashes[i.name] for i in instances],
                         on_archive=lambda a: holder.__setitem__("archive", a))
    except KeyboardInterrupt:
        partial = holder.get("archive")
        if partial is not None:
            partial.complete = False
            flush(partial)
            log.warning("interrupted; partial archive flushed to %s", archive_path)
        raise
    flush(archive)
    _manifest(args, "evolve",
              {"config_file": args.config, "config": archive.config},
              {"seed": cfg.seed}, hashes,
              [archive_path, events_path, transcripts_path],
              started, args.out)
    log.info("archive written to %s (%d generations)", archive_path,
             len(archive.generations))
    return 0


# --- eval ---

def _portfolio_scorers(portfolio: str, seed: int) -> list[tuple[str, object]]:
    """(method name, scorer) list from an archive, a portfolio file, a .dh
    program, or a builtin spec."""
    if portfolio.startswith("builtin:"):
        return [(portfolio, make_scorer(portfolio, seed=seed))]
    if portfolio.endswith(".dh"):
        text = storage.load_program_text(portfolio)
        name = os.path.splitext(os.path.basename(portfolio))[0]
        return [(f"dsl:{name}", program_scorer(parse_program(text)))]
    payload = storage.read_json(portfolio)
    kind = payload.get("kind")
    if kind == "archive":
        out = []
        for i, row in enumerate(payload["final_portfolio"]):
            program = parse_program(row["candidate"]["program"])
            out.append((f"evolved_{i + 1}", program_scorer(program)))
        if not out:
            raise IoError(f"{portfolio}: archive has an empty portfolio")
        return out
    if kind == "portfolio":
        out = []
        for row in payload["heuristics"]:
            if "builtin" in row:
                out.append((row["name"], builtin_scorer(row["builtin"], seed=seed)))
            else:
                out.append((row["name"], program_scorer(parse_program(row["program"]))))
        return out
    raise IoError(f"{portfolio}: expected an archive or portfolio file")


def _instance_files(directory: str) -> list[str]:
    """Instance JSON paths in a directory, skipping manifests and other kinds."""
    try:
        names = sorted(f for f in os.listdir(directory) if f.endswith(".json"))
    except OSError as exc:
        raise IoError(f"cannot list {directory}: {exc}")
    paths = []
    for name in names:
        path = os.path.join(directory, name)
        try:
            if storage.read_json(path).get("kind") == "instance":
                paths.append(path)
        except (IoError, SchemaMismatch):
            continue
    if not paths:
        raise IoError(f"no instance files in {directory}")
    return paths


def cmd_eval(args) -> int:
    started = _now()
    scorers = _portfolio_scorers(args.portfolio, args.seed)
    instances = [storage.load_instance(path)
                 for path in _instance_files(args.instances)]
    rows = []
    hashes = {}
    for inst in instances:
        hashes[inst.name] = storage.instance_content_hash(inst)
        ref = solve_bnb(inst, max_nodes=args.zref_nodes,
                        max_seconds=args.zref_seconds)
        if ref.objective is None:
            raise IoError(f"no reference solution for {inst.name}")
        for method, scorer in scorers:
            result = dive(inst, scorer,
                          d_max=args.dmax if args.dmax else default_dmax(inst))
            if result.best_objective is None:
                objective, gap = "", args.gap_cap
            else:
                objective = result.best_objective
                gap = min(primal_gap(result.best_objective, ref.objective),
                          args.gap_cap)
            rows.append({"method": method, "instance": inst.name,
                         "objective": objective, "z_ref": ref.objective,
                         "primal_gap": gap})
    os.makedirs(args.out, exist_ok=True)
    paths = write_report(args.out, rows)
    _manifest(args, "eval",
              {"portfolio": args.portfolio, "instances": args.instances,
               "gap_cap": args.gap_cap},
              {"seed": args.seed}, hashes, list(paths.values()), started,
              args.out)
    log.info("report written to %s", paths["summary_md"])
    return 0


# --- report ---

def cmd_report(args) -> int:
    started = _now()
    rows = read_per_instance_csv(args.per_instance)
    os.makedirs(args.out, exist_ok=True)
    paths = write_report(args.out, rows)
    _manifest(args, "report", {"per_instance": args.per_instance},
              {}, {}, list(paths.values()), started, args.out)
    return 0


# --- wiring ---

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="base seed")
    common.add_argument("--threads", type=int, default=1,
                        help="reserved; runs are single-threaded")
    common.add_argument("--log-level", default="warning",
                        choices=["debug", "info", "warning", "error"])

    parser = argparse.ArgumentParser(
        prog="dhevo",
        description="Co-evolve MILP diving heuristics and benchmark instances.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_parser(name, **kwargs):
        return sub.add_parser(name, parents=[common], **kwargs)

    p = add_parser("gen", help="generate benchmark instances")
    p.add_argument("--family", required=True)
    p.add_argument("--preset", default="tiny", choices=sorted(PRESETS))
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--param", action="append", metavar="KEY=VALUE",
                   help="override a preset parameter (repeatable)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen)

    p = add_parser("dive", help="run one dive on one instance")
    p.add_argument("--instance", required=True)
    p.add_argument("--scorer", required=True,
                   help="builtin:<name> or dsl:<path.dh>")
    p.add_argument("--dmax", type=int, default=None)
    p.add_argument("--json-out", required=True)
    p.add_argument("--zref-nodes", type=int, default=100_000)
    p.add_argument("--zref-seconds", type=float, default=60.0)
    p.set_defaults(func=cmd_dive)

    p = add_parser("evolve", help="run the co-evolution loop")
    p.add_argument("--config", required=True, help="TOML config file")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_evolve)

    p = add_parser("eval", help="evaluate a heuristic portfolio")
    p.add_argument("--portfolio", required=True,
                   help="archive.json, portfolio.json, file.dh, or builtin:<name>")
    p.add_argument("--instances", required=True, help="directory of instances")
    p.add_argument("--out", required=True)
    p.add_argument("--dmax", type=int, default=None)
    p.add_argument("--gap-cap", type=float, default=10.0)
    p.add_argument("--zref-nodes", type=int, default=100_000)
    p.add_argument("--zref-seconds", type=float, default=60.0)
    p.set_defaults(func=cmd_eval)

    p = add_parser("report", help="rebuild summary tables from a CSV")
    p.add_argument("--per-instance", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_report)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=args.log_level.upper(),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, SchemaMismatch, InfeasibleSpec) as exc:
        log.error("%s", exc)
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ProviderError as exc:
        print(f"provider error: {exc}", file=sys.stderr)
        return 3
    except DhevoError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except KeyboardInterrupt:
        print("interrupted", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
