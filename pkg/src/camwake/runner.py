"""Train/test orchestration and the Monte Carlo campaign over wake-up policies."""

from __future__ import annotations

import json
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from . import controller, gpr, rbe, selftrain
from .config import POLICIES, ExperimentConfig
from .metrics import RunTrace, ecdf, run_metrics, write_results
from .simcore import (ACTIVE, SLEEP, EnergyLedger, PlatformState, accumulate, camera_energy,
                      receiver_energy, transition)
from .world import WorldTrace, generate_world

log = logging.getLogger(__name__)

# substream ids under one run seed
WORLD, DETECTION, FILTER, LOOKAHEAD, POLICY = range(5)
# substream ids under the master seed for the training phase
TRAIN_WORLD, TRAIN_DETECTION = 1001, 1002

RX_POLICIES = ("gt", "s2gpr")
METRICS = ("acc", "e_total_j", "ce")


def substream(seed: int, stream_id: int) -> np.random.Generator:
    """Independent Philox generator for one named stream of a seed."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(stream_id,))))


def campaign_seeds(master_seed: int, n: int) -> list[int]:
    """Per-run seeds derived from the master seed; shared by every policy."""
    return [int(s) for s in np.random.SeedSequence(master_seed).generate_state(n, dtype=np.uint32)]


def world_for_seed(config: ExperimentConfig, seed: int) -> WorldTrace:
    return generate_world(config.time, config.process, config.plm, config.pod,
                          substream(seed, WORLD), substream(seed, DETECTION))


def train(config: ExperimentConfig, dataset: selftrain.TrainingDataset | None = None):
    """Collect the self-supervised dataset (unless given) and fit the GP."""
    if dataset is None:
        dataset = selftrain.collect_dataset(
            config.time, config.process, config.plm, config.pod, config.n_train,
            substream(config.seed, TRAIN_WORLD), substream(config.seed, TRAIN_DETECTION),
            floor=config.label_noise_floor,
        )
    model = gpr.fit(dataset, init=config.kernel, n_restarts=config.gp_restarts, seed=config.seed)
    return dataset, model


def run_policy(config: ExperimentConfig, policy: str, seed: int, model: gpr.GprModel | None = None,
               world: WorldTrace | None = None, decision_log: list | None = None,
               particle_dump: rbe.ParticleDump | None = None, run_id: int = 0) -> RunTrace:
    """Simulate one test of ``policy`` over the horizon ``n_test * t_rf``.

    ``decision_log`` (a list) receives one controller record per receiver
    sample for the ``gt``/``s2gpr`` policies.
    """
    if policy not in POLICIES:
        raise ValueError(f"unknown policy {policy!r}")
    if policy == "s2gpr" and model is None:
        raise ValueError("policy s2gpr needs a fitted GP model")
    time = config.time
    nu, t_rf = time.nu, time.t_rf
    if world is None:
        world = world_for_seed(config, seed)
    energy = replace(config.energy, rx_enabled=policy in RX_POLICIES)
    ctrl = controller.ControllerParams.from_energy(config.alpha, nu, t_rf, energy)
    filter_params = config.filter_params
    policy_rng = substream(seed, POLICY)
    filter_rng = substream(seed, FILTER)
    lookahead_rng = substream(seed, LOOKAHEAD)

    n_frames = time.n_frames
    detection = world.detectable[1:n_frames + 1].astype(np.int64)
    modes = np.empty(n_frames, dtype=np.int64)
    frame_energy = np.empty(n_frames)
    ledger = EnergyLedger()
    s = PlatformState(ACTIVE if policy == "always" else SLEEP)
    pset = None

    for m in range(time.n_test):
        t = m * t_rf
        costs = None
        if policy == "always":
            u = 0
        elif policy == "rnd":
            u = int(policy_rng.random() < 0.5) - s.mode
        elif policy == "gt":
            j_d = controller.true_detection_term(world.distance[m * nu], config.pod, config.process, nu,
                                                 lookahead_rng, config.gt_rollouts)
            u, costs = controller.decide_from_detection(j_d, s, energy, ctrl)
        else:
            obs = world.observation(m)
            if pset is None:
                pset = rbe.init_particles(config.n_particles, obs.value, filter_rng, config.sigma_rf_guess)
            else:
                pset = rbe.update(pset, obs, config.sigma_rf_guess)
                pset = rbe.resample_if_needed(pset, config.ess_threshold, filter_rng)
            if particle_dump is not None:
                particle_dump.write(t, pset)
            u, costs = controller.decide(pset, model, s, energy, ctrl, filter_params, lookahead_rng)
        if costs is not None and decision_log is not None:
            decision_log.append(controller.decision_record(t, s, costs, u))

        s_new = transition(s, u)
        steady, trans = camera_energy(energy, s_new, s, t_rf)
        rx = receiver_energy(energy, t_rf)
        category = "active" if s_new.mode == ACTIVE else "sleep"
        for j in range(nu):
            k = m * nu + j
            wrong = s_new.mode != detection[k]
            de = steady / nu
            accumulate(ledger, de, category, wrong)
            if j == 0 and trans > 0:
                accumulate(ledger, trans, "transition", wrong)
                de += trans
            if rx > 0:
                accumulate(ledger, rx / nu, "receiver", wrong)
                de += rx / nu
            modes[k] = s_new.mode
            frame_energy[k] = de
            if pset is not None:
                pset = rbe.predict(pset, filter_params, filter_rng)
        s = s_new

    frames = np.arange(1, n_frames + 1)
    return RunTrace(t=frames * time.t_c, mode=modes, detection=detection, energy=frame_energy,
                    policy=policy, seed=seed, run_id=run_id, ledger=ledger)


def _run_seed(args):
    config, model, run_id, seed = args
    world = world_for_seed(config, seed)
    rows = []
    for policy in config.policies:
        trace = run_policy(config, policy, seed, model=model, world=world, run_id=run_id)
        rows.append({"policy": policy, "seed": seed, "run_id": run_id, **run_metrics(trace)})
    return rows


@dataclass
class CampaignSummary:
    rows: list
    config: ExperimentConfig

    def by_policy(self, policy: str) -> list:
        return [r for r in self.rows if r["policy"] == policy]

    def values(self, policy: str, metric: str) -> np.ndarray:
        return np.array([r[metric] for r in self.by_policy(policy)])

    def curves(self) -> dict:
        return {p: {m: ecdf(self.values(p, m)) for m in METRICS} for p in self.config.policies}

    def to_dict(self) -> dict:
        policies = {}
        for p in self.config.policies:
            stats = {}
            for m in METRICS:
                v = self.values(p, m)
                x, f = ecdf(v).points()
                stats[m] = {
                    "mean": float(v.mean()), "median": float(np.median(v)),
                    "min": float(v.min()), "max": float(v.max()),
                    "ecdf": [[float(a), float(b)] for a, b in zip(x, f)],
                }
            policies[p] = stats
        return {
            "config_fingerprint": self.config.fingerprint(),
            "master_seed": self.config.seed,
            "n_tests": self.config.n_tests,
            "policies": policies,
            "config": self.config.to_ini(),
        }


def run_campaign(config: ExperimentConfig, model: gpr.GprModel | None = None, out_dir=None,
                 jobs: int = 1, plots: bool = True) -> CampaignSummary:
    """Run ``n_tests`` paired tests of every configured policy.

    Every policy sees the same world for a given run (trajectory, RSSI noise,
    detection draws). Artifacts written to ``out_dir``: ``results.csv``,
    ``summary.json``, ``model.json``/``dataset.csv`` when a model was trained,
    and one ECDF SVG per metric.
    """
    out = Path(out_dir if out_dir is not None else config.out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out}: {exc}") from exc
    if not os.access(out, os.W_OK):
        raise OSError(f"output directory {out} is not writable")

    if "s2gpr" in config.policies and model is None:
        dataset, model = train(config)
        dataset.to_csv(out / "dataset.csv")
        model.save(out / "model.json")

    tasks = [(config, model, i, s) for i, s in enumerate(campaign_seeds(config.seed, config.n_tests))]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            chunks = list(pool.map(_run_seed, tasks))
    else:
        chunks = [_run_seed(t) for t in tasks]
    order = {p: i for i, p in enumerate(config.policies)}
    rows = sorted((r for chunk in chunks for r in chunk), key=lambda r: (order[r["policy"]], r["run_id"]))

    summary = CampaignSummary(rows, config)
    write_results(out / "results.csv", rows)
    with open(out / "summary.json", "w") as fh:
        json.dump(summary.to_dict(), fh, indent=1)
        fh.write("\n")
    if plots:
        from .plots import plot_ecdfs
        plot_ecdfs(rows, out, config.policies)
    return summary
