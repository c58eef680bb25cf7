import argparse
import logging
import os
import sys

# Add project root to path
sys.path.append(os.path.dirname(__file__))

from src.czset.operations import interval_hull
from src.czset.set_io import read_sets
from src.dcprog.enclosure import EnclosureKind
from src.harness.monte_carlo import RunConfig, output_paths, run_monte_carlo, write_summary
from src.harness.report import write_report
from src.harness.run_diagnostics import RunDiagnostics
from src.harness.selftest import run_selftest
from src.interval.interval import set_inflation
from src.lp.simplex import SimplexSolver
from src.models.registry import BenchmarkId
from src.utils.errors import CzdcError
from src.utils.settings import load_benchmark_defaults, load_settings

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_ERROR = 2


def build_parser():
    parser = argparse.ArgumentParser(prog="czdc", description="Set-membership state estimation with CZDC.")
    parser.add_argument("--settings", help="Path to a settings JSON (default config/settings.json)")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="Monte Carlo runs on a benchmark")
    run.add_argument("--example", required=True, choices=[b.value for b in BenchmarkId])
    run.add_argument("--steps", type=int)
    run.add_argument("--runs", type=int)
    run.add_argument("--phi-c", type=int, dest="phi_c")
    run.add_argument("--phi-g", type=int, dest="phi_g")
    run.add_argument("--enclosure", choices=["box", "partope", "parallelotope"])
    run.add_argument("--seed", type=int,
                     help="Master seed; equal seeds give identical CSVs except the wall-clock stage_time_ms column")
    run.add_argument("--out", default="czdc_run.csv",
                     help="Per-step CSV; the summary JSON and report go next to it")
    run.add_argument("--no-consistency", action="store_true", help="Skip the invariant step")
    run.add_argument("--workers", type=int, help="Worker processes for independent runs")
    run.add_argument("--sample-x0", action="store_true", help="Draw x0 from X0 instead of the nominal value")

    sub.add_parser("selftest", help="Run the test suites")

    hull = sub.add_parser("hull", help="Print interval hulls of sets in the exchange format")
    hull.add_argument("file")
    return parser


def make_run_config(args, settings):
    defaults = load_benchmark_defaults(args.example)

    def pick(flag, key):
        return flag if flag is not None else defaults[key]

    enclosure = EnclosureKind.parse(pick(args.enclosure, "enclosure"))
    # An explicit --enclosure applies to every stage
    stage_enclosure = {} if args.enclosure else defaults.get("stage_enclosure", {})
    return RunConfig(
        benchmark=args.example,
        steps=pick(args.steps, "steps"),
        runs=pick(args.runs, "runs"),
        seed=pick(args.seed, "seed"),
        enclosure_kind=enclosure,
        phi_c=pick(args.phi_c, "phi_c"),
        phi_g=pick(args.phi_g, "phi_g"),
        out=args.out,
        stage_enclosure=stage_enclosure,
        consistency_enabled=not args.no_consistency,
        sample_x0=args.sample_x0,
        workers=args.workers if args.workers is not None else settings.workers,
    )


def cmd_run(args, settings):
    run_cfg = make_run_config(args, settings)
    print(f"[*] {run_cfg.benchmark.value}: {run_cfg.runs} runs x {run_cfg.steps} steps, "
          f"phi_c={run_cfg.phi_c}, phi_g={run_cfg.phi_g}, enclosure={run_cfg.enclosure_kind.value}")

    metrics, summaries = run_monte_carlo(run_cfg, settings)
    for s in summaries:
        print(f"[.] run {s['run']}: A_box={s['a_box']:.6g}, {s['mean_step_ms']:.3f} ms/step, "
              f"violations={s['violations']}, empty stages={s['empty_stages']}")

    summary_path, report_path = output_paths(run_cfg.out)
    payload = write_summary(summary_path, run_cfg, metrics, summaries, RunDiagnostics().get_report())
    write_report(report_path, payload)
    print(f"[+] CSV: {run_cfg.out}  summary: {summary_path}  report: {report_path}")
    print(f"[+] A_box={metrics.a_box:.6g}  T_cpu={metrics.t_cpu_ms:.3f} ms")

    if not metrics.passed:
        print(f"[!] {metrics.containment_violations} containment violations, "
              f"{metrics.empty_stages} empty stages")
        return EXIT_FAILED
    return EXIT_OK


def cmd_hull(args, settings):
    solver = SimplexSolver(settings.tol_feas, settings.tol_opt)
    for idx, X in enumerate(read_sets(args.file)):
        hull = interval_hull(X, solver)
        bounds = ", ".join(f"[{lo:.17g}, {hi:.17g}]" for lo, hi in zip(hull.lower, hull.upper))
        print(f"[.] set {idx} (n={X.n}, n_g={X.n_g}, n_h={X.n_h}): {bounds}")
    return EXIT_OK


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        settings = load_settings(args.settings)
        logging.basicConfig(level=getattr(logging, settings.log_level.upper(), logging.INFO),
                            format="%(asctime)s %(name)s %(levelname)s %(message)s")
        set_inflation(settings.inflation)

        if args.command == "run":
            return cmd_run(args, settings)
        if args.command == "hull":
            return cmd_hull(args, settings)
        print("[*] Running test suites...")
        return run_selftest()
    except (CzdcError, OSError) as e:
        print(f"[!] {type(e).__name__}: {e}")
        return EXIT_ERROR
    except KeyboardInterrupt:
        print("\n[!] Interrupted.")
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
