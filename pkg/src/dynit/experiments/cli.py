"""Command line: ``dynit run <spec-file>``, ``dynit accept``, ``dynit list-figures``."""

from __future__ import annotations

import argparse
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from .acceptance import AcceptanceContext, acceptance_report
from .config import DEFAULT_SEED, FIGURE_TITLES, FIGURES, SpecError, load_specs, resolve_seed
from .figures import run_experiment, write_table


def _common(p: argparse.ArgumentParser):
    p.add_argument("--seed", type=int, default=None,
                   help="RNG seed (overrides $DYNIT_SEED and the spec file)")
    p.add_argument("--samples", type=int, default=None, help="Monte Carlo sample count")
    p.add_argument("--out-dir", type=Path, default=None, help="directory for CSV output")
    p.add_argument("--tail-tol", type=float, default=None,
                   help="demand series tail mass cut-off")
    p.add_argument("--quad-tol", type=float, default=None,
                   help="absolute tolerance of capacity quadrature")
    p.add_argument("--gnuplot", action="store_true", help="also write a .gp script per CSV")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dynit", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run the experiments in a YAML spec file")
    run.add_argument("spec_file", type=Path)
    run.add_argument("--workers", type=int, default=1,
                     help="experiments run concurrently")
    _common(run)
    acc = sub.add_parser("accept", help="run the acceptance suite")
    _common(acc)
    sub.add_parser("list-figures", help="list figure ids and their default sweeps")
    return parser


def _run(args) -> int:
    try:
        specs = load_specs(args.spec_file)
    except (SpecError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    specs = [s.with_overrides(seed=resolve_seed(args.seed, s.sim.seed),
                              n_samples=args.samples, tail_tol=args.tail_tol,
                              quad_tol=args.quad_tol)
             for s in specs]

    def one(spec):
        table = run_experiment(spec)
        if args.out_dir is not None or spec.output_path is None:
            out_dir, stem = args.out_dir or Path("."), spec.figure_id
        else:
            target = Path(spec.output_path)
            out_dir, stem = target.parent, target.stem
        return write_table(table, out_dir, stem, args.gnuplot)

    with ThreadPoolExecutor(max_workers=max(1, args.workers)) as pool:
        for path in pool.map(one, specs):
            print(path)
    return 0


def _accept(args) -> int:
    ctx_kwargs = {"seed": resolve_seed(args.seed, DEFAULT_SEED),
                  "tail_tol": args.tail_tol, "quad_tol": args.quad_tol}
    if args.samples is not None:
        ctx_kwargs["n_samples"] = args.samples
    ctx = AcceptanceContext(**ctx_kwargs)
    report = acceptance_report(ctx=ctx)
    print(report.text().splitlines()[-1])
    if args.out_dir is not None:
        ctx.write_figures(args.out_dir, args.gnuplot)
        (Path(args.out_dir) / "acceptance_report.txt").write_text(report.text())
    return report.exit_code


def _list() -> int:
    for fig, sweeps in FIGURES.items():
        desc = ", ".join(f"{k}={v}" for k, v in sweeps.items())
        print(f"{fig:<12} {FIGURE_TITLES[fig]}  [{desc}]")
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "run":
        return _run(args)
    if args.command == "accept":
        return _accept(args)
    return _list()


if __name__ == "__main__":
    sys.exit(main())
