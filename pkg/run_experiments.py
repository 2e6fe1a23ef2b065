"""
Experiment runner - Favard length sweeps, lemma audits and the exponent ledger.

Usage:
    python run_experiments.py favard-sweep
    python run_experiments.py lemma-suite --config experiment.env --jobs 8
    python run_experiments.py tiling-scan --out results/tiling --seed 7
    python run_experiments.py zero-trace --t0 0.2 --t1 0.4 --m 3 --rect 0.01,20,-1,1
    python run_experiments.py exponent-ledger
"""
import argparse
import logging
import sys
from datetime import datetime

from src.errors import FavardLabError
from src.experiments.config import resolve_settings
from src.experiments.runner import COMMANDS, execute


def _print_summary(record):
    print(f"\n📊 {record.command}: {len(record.rows)} rows, config {record.config_hash}")
    for key, value in record.summary.items():
        if key == "counterexamples":
            continue
        if isinstance(value, float):
            print(f"   {key:28} {value:.6g}")
        elif not isinstance(value, (dict, list)):
            print(f"   {key:28} {value}")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description="Favard length experiments for gasket-type fractals")
    parser.add_argument("command", choices=sorted(COMMANDS), help="Experiment to run")
    parser.add_argument("--config", help="KEY=value config file")
    parser.add_argument("--out", help="Output directory (overrides output_dir)")
    parser.add_argument("--seed", type=int, help="64-bit seed for randomized audits")
    parser.add_argument("--jobs", type=int, help="Worker processes (default: FAVARD_JOBS or CPU count)")
    parser.add_argument("--verbose", "-v", action="store_true", help="Log progress at INFO")

    trace = parser.add_argument_group("zero-trace")
    trace.add_argument("--t0", type=float, help="Parameter t where the zeros are found")
    trace.add_argument("--t1", type=float, help="Parameter t the zeros are continued to")
    trace.add_argument("--m", type=int, help="Scale m (also used by the lemma and tiling commands)")
    trace.add_argument("--rect", help="Search rectangle re_lo,re_hi,im_lo,im_hi")

    args = parser.parse_args(argv)

    try:
        settings = resolve_settings(
            args.config, args.out, args.seed, args.jobs,
            log_level="INFO" if args.verbose else None,
            overrides={"trace_t0": args.t0, "trace_t1": args.t1, "m": args.m, "trace_rect": args.rect},
        )
    except FavardLabError as e:
        print(f"❌ {e}", file=sys.stderr)
        return e.exit_code

    logging.basicConfig(
        level=settings.log_level,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )

    print(f"\n🚀 {args.command} started at {datetime.now().strftime('%Y-%m-%d %H:%M:%S')}")
    print(f"   config {settings.config.config_hash}, {settings.jobs} worker(s), output in {settings.config.output_dir}/")

    try:
        record = execute(args.command, settings)
    except FavardLabError as e:
        print(f"\n❌ {type(e).__name__}: {e}", file=sys.stderr)
        for example in (getattr(e, "counterexamples", None) or [])[:5]:
            print(f"   {example}", file=sys.stderr)
        return e.exit_code

    _print_summary(record)
    print(f"\n✅ Completed at {datetime.now().strftime('%Y-%m-%d %H:%M:%S')} ({record.elapsed_s:.1f} s)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
