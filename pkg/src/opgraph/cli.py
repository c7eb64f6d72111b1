"""Command line: ``opgraph analyze | synth | validate``.

Exit codes: 0 ok, 2 usage, 3 data error, 4 internal error. Failures print a
single ``opgraph: error stage=... code=... message="..."`` line on stderr.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import sys
from contextlib import contextmanager
from dataclasses import asdict, dataclass
from pathlib import Path

from opgraph import __version__
from opgraph.cohesion import write_per_node
from opgraph.errors import DataError, IngestError
from opgraph.graph import write_edgelist
from opgraph.ingest import (
    Phase,
    SynthConfig,
    dedupe,
    generate_synthetic,
    parse_events,
    segment,
    write_events,
)
from opgraph.metrics import DEFAULT_MAX_EXACT_NODES, write_degree_distribution
from opgraph.pipeline import AnalysisConfig, analyze_segments
from opgraph.refmodels import DEFAULT_REPLICATES
from opgraph.report import (
    OutputDir,
    manifest_hash,
    write_constraint_means,
    write_figures,
    write_metrics,
)
from opgraph.smallworld import DEFAULT_CC_THRESHOLD, DEFAULT_PL_TOLERANCE, segment_series, write_series
from opgraph.stats import SDConfig, correlate_series, write_table

log = logging.getLogger("opgraph")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_INTERNAL = 0, 2, 3, 4
SEED_ENV = "OPGRAPH_SEED"


class StageError(Exception):
    def __init__(self, stage: str, code: int, message: str):
        super().__init__(message)
        self.stage = stage
        self.code = code


@dataclass
class RunConfig:
    input_path: str | None = None
    synth_config: str | None = None
    phase: str = "both"
    window_days: int = 100
    horizon_days: int = 1300
    replicates: int = DEFAULT_REPLICATES
    seed: int = 0
    cc_threshold: float = DEFAULT_CC_THRESHOLD
    pl_tolerance: float = DEFAULT_PL_TOLERANCE
    extra_dirs: int = 250
    max_exact_nodes: int = DEFAULT_MAX_EXACT_NODES
    path_sample: int | None = None
    out_dir: str = "opgraph-out"
    jobs: int = 1
    plots: bool = True
    verbose: bool = False
    dump_edges: bool = False
    # not part of the manifest
    _runtime = ("out_dir", "jobs")

    def phases(self) -> list[Phase]:
        return [Phase.INTRA, Phase.POST] if self.phase == "both" else [Phase(self.phase)]

    def analysis(self) -> AnalysisConfig:
        return AnalysisConfig(self.replicates, self.seed, self.cc_threshold, self.pl_tolerance,
                              self.max_exact_nodes, self.path_sample)

    def synth(self) -> SynthConfig:
        if self.synth_config in (None, "", "default"):
            return SynthConfig()
        return SynthConfig.from_file(self.synth_config)


def build_manifest(cfg: RunConfig) -> dict:
    """Everything that determines the output bytes."""
    config = {k: v for k, v in asdict(cfg).items() if k not in RunConfig._runtime}
    manifest: dict = {"tool": "opgraph", "version": __version__, "config": config}
    if cfg.input_path:
        try:
            manifest["input_sha256"] = hashlib.sha256(Path(cfg.input_path).read_bytes()).hexdigest()
        except OSError as exc:
            raise StageError("ingest", EXIT_DATA, f"cannot read {cfg.input_path}: {exc}") from None
        config["input_path"] = Path(cfg.input_path).name
    else:
        try:
            manifest["synth"] = cfg.synth().to_dict()
        except (DataError, OSError) as exc:
            raise StageError("ingest", EXIT_DATA, str(exc)) from None
    n_seg = cfg.horizon_days // cfg.window_days if cfg.window_days > 0 else 0
    manifest["segment_seeds"] = [cfg.analysis().segment_seed(k) for k in range(n_seg)]
    manifest["robust"] = {"method": "stahel-donoho", "weight": "huber-squared",
                          "cutoff": "sqrt(chi2_p(0.95))", "mad_scale": 1.4826,
                          "extra_dirs": cfg.extra_dirs, "seed": cfg.seed,
                          "inference": "pearson t-test only; robust r has no p-value"}
    return manifest


@contextmanager
def _stage(name: str):
    try:
        yield
    except StageError:
        raise
    except (DataError, OSError) as exc:
        raise StageError(name, EXIT_DATA, str(exc)) from exc
    except Exception as exc:
        raise StageError(name, EXIT_INTERNAL, f"{type(exc).__name__}: {exc}") from exc


def load_records(cfg: RunConfig):
    if cfg.input_path:
        parsed = parse_events(cfg.input_path)
        records = parsed.records
    else:
        records = generate_synthetic(cfg.synth(), cfg.seed)
    result = dedupe(records)
    if result.removed:
        log.info("removed %d duplicate records", result.removed)
    wanted = set(cfg.phases())
    kept = [r for r in result.records if r.phase in wanted]
    if not kept:
        raise IngestError(f"no records for phase {cfg.phase}")
    return kept


def cmd_analyze(cfg: RunConfig) -> int:
    manifest = build_manifest(cfg)
    digest = manifest_hash(manifest)
    manifest = {"manifest_sha256": digest, **manifest}

    with _stage("ingest"):
        records = load_records(cfg)
    with _stage("segment"):
        segments = segment(records, cfg.window_days, cfg.horizon_days)

    results = {}
    with _stage("analyze"):
        for phase in cfg.phases():
            if not any(r.phase is phase for r in records):
                log.warning("no %s records; phase skipped", phase)
                continue
            results[phase.value] = analyze_segments(segments, phase, cfg.analysis(), cfg.jobs)

    tables = {}
    with _stage("correlate"):
        sd = SDConfig(extra_dirs=cfg.extra_dirs, seed=cfg.seed)
        for phase, res in results.items():
            metrics = [r.metrics for r in res]
            try:
                tables[phase] = correlate_series(metrics, config=sd, phase=phase)
            except DataError as exc:
                log.warning("%s: correlation skipped: %s", phase, exc)
                tables[phase] = []

    with _stage("report"):
        out = OutputDir(cfg.out_dir, digest)
        by_phase = {p: [r.metrics for r in res] for p, res in results.items()}
        for phase, res in results.items():
            rows = by_phase[phase]
            out.text(f"metrics_{phase}.csv", lambda fh, rows=rows: write_metrics(rows, fh))
            series = segment_series(rows, cfg.cc_threshold, cfg.pl_tolerance)
            out.text(f"smallworld_{phase}.csv", lambda fh, s=series: write_series(s, fh))
            out.text(f"constraint_{phase}.csv", lambda fh, rows=rows: write_constraint_means(rows, fh))
            for r in res:
                k = r.metrics.segment
                out.text(f"degrees/{phase}_seg{k:02d}.csv",
                         lambda fh, d=r.degrees: write_degree_distribution(d, fh))
                if cfg.verbose and r.constraint is not None:
                    out.text(f"constraint_nodes/{phase}_seg{k:02d}.csv",
                             lambda fh, c=r.constraint: write_per_node(c, fh))
                if cfg.dump_edges:
                    out.text(f"edges/{phase}_seg{k:02d}.tsv", lambda fh, g=r.graph: write_edgelist(g, fh))
        all_rows = [row for p in tables for row in tables[p]]
        out.text("correlations.csv", lambda fh: write_table(all_rows, fh))
        if cfg.plots:
            write_figures(out, by_phase, tables)
        manifest["files"] = sorted(out.written)
        p = out.path("manifest.json")
        p.write_text(json.dumps(manifest, indent=2, sort_keys=False) + "\n", encoding="utf-8")
    print(f"wrote {len(out.written) + 1} files to {cfg.out_dir}")
    return EXIT_OK


def cmd_synth(config_path: str | None, seed: int, out_path: str) -> int:
    with _stage("ingest"):
        config = SynthConfig() if config_path in (None, "default") else SynthConfig.from_file(config_path)
        records = generate_synthetic(config, seed)
    with _stage("report"):
        Path(out_path).parent.mkdir(parents=True, exist_ok=True)
        with open(out_path, "w", encoding="utf-8", newline="") as fh:
            write_events(records, fh)
    print(f"wrote {len(records)} records to {out_path}")
    return EXIT_OK


def validate_report(path: str, horizon_days: int = 1300) -> dict:
    parsed = parse_events(path)
    deduped = dedupe(parsed.records)
    recs = parsed.records
    report: dict = {
        "records": len(recs),
        "duplicates": deduped.removed,
        "unknown_roles": parsed.n_warnings,
    }
    for phase in Phase:
        report[f"encounters_{phase.value}"] = len({r.encounter_id for r in recs if r.phase is phase})
    days = [r.day_index for r in recs]
    report["day_min"] = min(days) if days else None
    report["day_max"] = max(days) if days else None
    report["beyond_horizon"] = len({r.encounter_key for r in recs if r.day_index >= horizon_days})
    return report


def cmd_validate(path: str, horizon_days: int = 1300) -> int:
    with _stage("ingest"):
        report = validate_report(path, horizon_days)
    for k, v in report.items():
        print(f"{k}: {'' if v is None else v}")
    return EXIT_OK


def _env_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise StageError("usage", EXIT_USAGE, f"{SEED_ENV} must be an integer, got {raw!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="opgraph", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"opgraph {__version__}")
    parser.add_argument("-q", "--quiet", action="store_true", help="only log errors")
    sub = parser.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", help="run the full segment pipeline")
    src = a.add_mutually_exclusive_group(required=True)
    src.add_argument("--input", metavar="PATH", help="encounter log CSV")
    src.add_argument("--synth", metavar="CONFIG", nargs="?", const="default",
                     help="generate a synthetic log (key = value file, or 'default')")
    a.add_argument("--phase", choices=("intra", "post", "both"), default="both")
    a.add_argument("--window-days", type=int, default=100)
    a.add_argument("--horizon-days", type=int, default=1300)
    a.add_argument("--replicates", type=int, default=DEFAULT_REPLICATES)
    a.add_argument("--seed", type=int, default=None, help=f"base seed (default ${SEED_ENV} or 0)")
    a.add_argument("--cc-threshold", type=float, default=DEFAULT_CC_THRESHOLD)
    a.add_argument("--pl-tolerance", type=float, default=DEFAULT_PL_TOLERANCE)
    a.add_argument("--extra-dirs", type=int, default=250)
    a.add_argument("--max-exact-nodes", type=int, default=DEFAULT_MAX_EXACT_NODES)
    a.add_argument("--path-sample", type=int, default=None, metavar="K",
                   help="approximate path length from K BFS sources on graphs above --max-exact-nodes")
    a.add_argument("--out", default="opgraph-out", metavar="DIR")
    a.add_argument("--jobs", type=int, default=1, help="worker processes across segments")
    a.add_argument("--no-plots", action="store_true", help="skip PNG figures")
    a.add_argument("--verbose", action="store_true", help="also write per-node constraint tables")
    a.add_argument("--dump-edges", action="store_true", help="write projected edge lists")

    s = sub.add_parser("synth", help="write a synthetic encounter log")
    s.add_argument("--config", default=None, metavar="PATH")
    s.add_argument("--seed", type=int, default=None)
    s.add_argument("--out", required=True, metavar="PATH")

    v = sub.add_parser("validate", help="summarize an encounter log without analyzing it")
    v.add_argument("input")
    v.add_argument("--horizon-days", type=int, default=1300)
    return parser


def _fail(err: StageError) -> int:
    print(f"opgraph: error stage={err.stage} code={err.code} message={json.dumps(str(err))}",
          file=sys.stderr)
    return err.code


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.ERROR if args.quiet else logging.WARNING,
                        format="opgraph: %(levelname)s %(message)s")
    try:
        seed = args.seed if getattr(args, "seed", None) is not None else _env_seed()
        if args.command == "analyze":
            if args.window_days <= 0 or args.horizon_days % max(args.window_days, 1):
                parser.error("--horizon-days must be a positive multiple of --window-days")
            if args.replicates < 1 or args.jobs < 1:
                parser.error("--replicates and --jobs must be >= 1")
            cfg = RunConfig(
                input_path=args.input, synth_config=args.synth, phase=args.phase,
                window_days=args.window_days, horizon_days=args.horizon_days,
                replicates=args.replicates, seed=seed, cc_threshold=args.cc_threshold,
                pl_tolerance=args.pl_tolerance, extra_dirs=args.extra_dirs,
                max_exact_nodes=args.max_exact_nodes, path_sample=args.path_sample,
                out_dir=args.out, jobs=args.jobs, plots=not args.no_plots,
                verbose=args.verbose, dump_edges=args.dump_edges,
            )
            return cmd_analyze(cfg)
        if args.command == "synth":
            return cmd_synth(args.config, seed, args.out)
        return cmd_validate(args.input, args.horizon_days)
    except StageError as err:
        return _fail(err)


if __name__ == "__main__":
    sys.exit(main())
