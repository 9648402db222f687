"""Command-line entry point: ``camwake {train,run,campaign,plot,replay}``."""

from __future__ import annotations

import argparse
import csv
import filecmp
import json
import logging
import sys
import tempfile
from pathlib import Path

import numpy as np

from . import gpr, rbe, runner
from .config import POLICIES, ExperimentConfig
from .controller import DECISION_LOG_COLUMNS
from .metrics import read_results, run_metrics, write_results
from .selftrain import TrainingDataset
from .world import pod_of_rssi

log = logging.getLogger("camwake")


def _load_config(args) -> ExperimentConfig:
    config = ExperimentConfig.load(args.config) if args.config else ExperimentConfig()
    overrides = {}
    if getattr(args, "seed", None) is not None and args.command != "run":
        overrides["seed"] = args.seed
    if getattr(args, "policies", None):
        overrides["policies"] = tuple(p.strip() for p in args.policies.split(",") if p.strip())
    if getattr(args, "out", None):
        overrides["out_dir"] = args.out
    return config.with_overrides(**overrides) if overrides else config


def _out_dir(config: ExperimentConfig) -> Path:
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_train(args) -> int:
    config = _load_config(args)
    out = _out_dir(config)
    dataset = TrainingDataset.from_csv(args.dataset) if args.dataset else None
    dataset, model = runner.train(config, dataset)
    dataset.to_csv(out / "dataset.csv")
    model.save(out / "model.json")
    from .plots import plot_pod
    truth = None if args.dataset else (lambda r: pod_of_rssi(r, config.plm, config.pod))
    plot_pod(model, dataset, out / "pod.svg", truth=truth)
    print(f"trained on {dataset.n_train} pairs: lengthscale={model.kernel.lengthscale:.4g} dB "
          f"signal_var={model.kernel.signal_var:.4g} -> {out / 'model.json'}")
    return 0


def cmd_run(args) -> int:
    config = _load_config(args)
    out = _out_dir(config)
    model = None
    if args.policy == "s2gpr":
        if args.model:
            model = gpr.GprModel.load(args.model)
        else:
            _, model = runner.train(config)
    seed = args.seed if args.seed is not None else runner.campaign_seeds(config.seed, 1)[0]
    decisions = []
    dump = rbe.ParticleDump(out / f"particles_{args.policy}_{seed}.csv") if args.dump_particles else None
    try:
        trace = runner.run_policy(config, args.policy, seed, model=model, decision_log=decisions,
                                  particle_dump=dump)
    finally:
        if dump is not None:
            dump.close()
    stem = f"{args.policy}_{seed}"
    trace.to_csv(out / f"trace_{stem}.csv")
    if decisions:
        with open(out / f"decisions_{stem}.csv", "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(DECISION_LOG_COLUMNS)
            for t, s_old, jd, je_on, je_off, u in decisions:
                writer.writerow((f"{t:.6g}", s_old, repr(jd), repr(je_on), repr(je_off), u))
    row = {"policy": args.policy, "seed": seed, **run_metrics(trace)}
    write_results(out / "results.csv", [row], append=True)
    print(json.dumps(row))
    return 0


def cmd_campaign(args) -> int:
    config = _load_config(args)
    model = gpr.GprModel.load(args.model) if args.model else None
    summary = runner.run_campaign(config, model=model, jobs=args.jobs)
    print(f"{'policy':8s} {'acc mean':>9s} {'acc min':>8s} {'E mean [J]':>11s} {'CE median':>10s}")
    for p in config.policies:
        acc, e, ce = (summary.values(p, m) for m in runner.METRICS)
        print(f"{p:8s} {acc.mean():9.3f} {acc.min():8.3f} {e.mean():11.3f} {float(np.median(ce)):10.3f}")
    print(f"artifacts in {config.out_dir} (config {config.fingerprint()[:12]})")
    return 0


def cmd_plot(args) -> int:
    from .plots import plot_ecdfs
    rows = read_results(args.results)
    out = Path(args.out) if args.out else Path(args.results).parent
    out.mkdir(parents=True, exist_ok=True)
    policies = [p for p in POLICIES if any(r["policy"] == p for r in rows)]
    for path in plot_ecdfs(rows, out, policies):
        print(path)
    return 0


def cmd_replay(args) -> int:
    """Re-run the campaign recorded in a summary and compare result CSVs byte for byte."""
    summary_path = Path(args.summary)
    if summary_path.is_dir():
        summary_path = summary_path / "summary.json"
    with open(summary_path) as fh:
        doc = json.load(fh)
    config = ExperimentConfig.from_ini(doc["config"])
    if config.fingerprint() != doc["config_fingerprint"]:
        raise ValueError("summary config does not match its fingerprint")
    original = summary_path.parent / "results.csv"
    model_path = summary_path.parent / "model.json"
    model = gpr.GprModel.load(model_path) if args.reuse_model and model_path.exists() else None
    with tempfile.TemporaryDirectory() as tmp:
        out = Path(args.out) if args.out else Path(tmp)
        runner.run_campaign(config, model=model, out_dir=out, plots=False)
        same = filecmp.cmp(original, out / "results.csv", shallow=False)
        if same and model is None and model_path.exists():
            same = filecmp.cmp(model_path, out / "model.json", shallow=False)
    print("replay identical" if same else "replay DIFFERS")
    return 0 if same else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="camwake", description=__doc__)
    parser.add_argument("--log-level", default="WARNING")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, seed_help):
        p.add_argument("--config", help="INI config file (defaults: the standard 50 s simulation setup)")
        p.add_argument("--seed", type=int, help=seed_help)
        p.add_argument("--out", help="output directory")

    p = sub.add_parser("train", help="collect the self-supervised dataset and fit the GP")
    common(p, "master seed")
    p.add_argument("--dataset", help="fit on this dataset CSV instead of simulating")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("run", help="simulate one test of one policy")
    common(p, "run seed (default: first campaign seed)")
    p.add_argument("--policy", choices=POLICIES, required=True)
    p.add_argument("--model", help="model JSON for s2gpr (default: train in-process)")
    p.add_argument("--dump-particles", action="store_true", help="write the particle cloud per sample")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("campaign", help="Monte Carlo comparison of all policies")
    common(p, "master seed")
    p.add_argument("--policies", help=f"comma-separated subset of {','.join(POLICIES)}")
    p.add_argument("--model", help="reuse a trained model JSON instead of training")
    p.add_argument("--jobs", type=int, default=1, help="worker processes")
    p.set_defaults(func=cmd_campaign)

    p = sub.add_parser("plot", help="ECDF SVGs from a results CSV")
    p.add_argument("--results", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_plot)

    p = sub.add_parser("replay", help="re-run a campaign and check results are byte-identical")
    p.add_argument("summary", help="summary.json or the campaign output directory")
    p.add_argument("--out", help="keep the replayed artifacts here")
    p.add_argument("--reuse-model", action="store_true", help="reuse model.json instead of retraining")
    p.set_defaults(func=cmd_replay)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=args.log_level.upper(), format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (OSError, ValueError, KeyError, ArithmeticError) as exc:
        print(f"camwake: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
