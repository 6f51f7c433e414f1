"""
Command-line entry point.

    python run_experiments.py detect-sweep --config presets/pd_vs_snr.env --out results
    python run_experiments.py --emit-paper-presets presets
"""

from __future__ import annotations
import argparse
import sys
import time
from pathlib import Path
from typing import List, Optional

from rich.console import Console
from rich.progress import BarColumn, MofNCompleteColumn, Progress, TextColumn, TimeElapsedColumn
from rich.table import Table

from harness.dataset import build_dataset
from harness.experiments import run_experiment
from harness.presets import emit_presets
from harness.run_log import write_run
from harness.schemas import DatasetSpec, ExperimentKind, ExperimentSpec, ResultTable
from repos.calibration_cache import CalibrationCache
from repos.results_repo import ResultsRepo
from sensing.errors import ConfigError, SensingError

console = Console()
err_console = Console(stderr=True)

COMMAND_KINDS = {
    "detect-sweep": (ExperimentKind.PD_VS_SNR, ExperimentKind.PD_VS_N),
    "roc": (ExperimentKind.ROC,),
    "classify-sweep": (ExperimentKind.ACC_VS_SNR, ExperimentKind.ACC_VS_M,
                       ExperimentKind.TRAINING_TIME),
    "criteria-sweep": (ExperimentKind.CRITERIA_VS_M, ExperimentKind.CRITERIA_VS_SNR),
    "pipeline": (ExperimentKind.PIPELINE,),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="run_experiments",
        description="Monte Carlo emitter detection and counting experiments.")
    parser.add_argument("--emit-paper-presets", "--emit-presets", dest="emit_presets_dir",
                        metavar="DIR", type=Path,
                        help="write one config file per preset and exit")
    sub = parser.add_subparsers(dest="command")
    for name in [*COMMAND_KINDS, "dataset"]:
        p = sub.add_parser(name)
        p.add_argument("--config", type=Path, required=name != "dataset",
                       help="KEY=VALUE file with experiment fields")
        p.add_argument("--seed", type=int)
        p.add_argument("--out", type=Path, help="output directory")
        p.add_argument("--trials", type=int,
                       help="samples per class" if name == "dataset" else "Monte Carlo trials per grid point")
        p.add_argument("--workers", type=int)
        if name != "dataset":
            p.add_argument("--no-cache", action="store_true", help="skip the calibration cache")
    return parser


def _summary(table: ResultTable) -> Table:
    df = table.to_frame()
    shown = [c for c in df.columns if not c.endswith("_ci")][:10]
    out = Table(title=table.experiment)
    for c in shown:
        out.add_column(c, justify="right")
    for _, row in df[shown].iterrows():
        out.add_row(*[f"{v:.4g}" if isinstance(v, float) else str(v) for v in row])
    return out


def _run_experiment_command(args: argparse.Namespace) -> List[str]:
    spec = ExperimentSpec.from_file(args.config, seed=args.seed, trials=args.trials,
                                    workers=args.workers)
    if spec.kind not in COMMAND_KINDS[args.command]:
        allowed = ", ".join(k.value for k in COMMAND_KINDS[args.command])
        raise ConfigError(f"{args.command} runs kinds {allowed}; config has {spec.kind.value}")
    cache = None if args.no_cache else CalibrationCache()

    with Progress(TextColumn("[bold]{task.description}"), BarColumn(), MofNCompleteColumn(),
                  TimeElapsedColumn(), console=console) as progress:
        task = progress.add_task(spec.stem, total=len(spec.grid))
        table = run_experiment(spec, cache, on_point=lambda _: progress.advance(task))

    csv_path, meta_path = ResultsRepo(args.out).save_table(table)
    console.print(_summary(table))
    failures = table.metadata.get("failures") or {}
    if failures:
        console.print(f"⚠️  {sum(len(v) for v in failures.values())} classifier fits failed; "
                      f"see {meta_path.name}")
    console.print(f"[green]✓[/green] wrote {csv_path} and {meta_path}")
    args._experiment, args._spec_hash, args._seed = spec.stem, spec.spec_hash(), spec.seed
    return [str(csv_path), str(meta_path)]


def _run_dataset_command(args: argparse.Namespace) -> List[str]:
    ds = DatasetSpec.from_file(args.config, seed=args.seed, per_class=args.trials,
                               workers=args.workers)
    data = build_dataset(ds.K_max, ds.per_class, ds.snr_db, ds.M, ds.N, ds.seed, ds.workers)
    repo = ResultsRepo(args.out)
    csv_path = repo.save_dataset(data, ds.name)
    meta_path = repo.save_metadata(ds.name, {"spec": ds.model_dump(), "rows": len(data),
                                             "class_counts": data.class_counts().tolist()})
    console.print(f"[green]✓[/green] {len(data)} feature rows -> {csv_path}")
    args._experiment, args._spec_hash, args._seed = ds.name, None, ds.seed
    return [str(csv_path), str(meta_path)]


def _ledger(args: argparse.Namespace) -> Optional[Path]:
    return args.out / "runs.json" if args.out else None


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    if args.emit_presets_dir:
        for path in emit_presets(args.emit_presets_dir):
            console.print(f"[green]✓[/green] {path}")
        return 0
    if not args.command:
        parser.print_help()
        return 2

    start = time.perf_counter()
    args._experiment, args._spec_hash, args._seed = str(args.config or args.command), None, args.seed
    try:
        if args.command == "dataset":
            outputs = _run_dataset_command(args)
        else:
            outputs = _run_experiment_command(args)
    except ConfigError as e:
        err_console.print(f"[red]config error:[/red] {e}")
        return 2
    except SensingError as e:
        err_console.print(f"[red]error:[/red] {type(e).__name__}: {e}")
        write_run(args.command, args._experiment, args._spec_hash, "failed",
                  time.perf_counter() - start, [], seed=args._seed, notes=str(e), path=_ledger(args))
        return 1

    write_run(args.command, args._experiment, args._spec_hash, "ok",
              time.perf_counter() - start, outputs, seed=args._seed, path=_ledger(args))
    return 0


if __name__ == "__main__":
    sys.exit(main())
