"""Per-run accuracy, energy and confusion-energy; ECDFs across runs."""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass

import numpy as np

RESULTS_COLUMNS = ("policy", "seed", "acc", "e_total_j", "ce")


@dataclass
class RunTrace:
    """Per-frame record of one run.

    ``detection`` is the frame's detection outcome as the detector would report
    it with the camera on; ``mode * detection`` is what was actually observed.
    ``energy`` holds the per-frame increments, summing to the run total.
    """

    t: np.ndarray
    mode: np.ndarray
    detection: np.ndarray
    energy: np.ndarray
    policy: str = ""
    seed: int = 0
    run_id: int = 0
    ledger: object = None

    def __len__(self):
        return len(self.t)

    @property
    def observed(self) -> np.ndarray:
        return self.mode * self.detection

    @property
    def e_total(self) -> float:
        return float(np.sum(self.energy))

    def misclassified(self) -> np.ndarray:
        s, d = self.mode, self.detection
        return s + d - 2 * s * d

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(("t", "s", "d", "observed", "delta_e_j"))
            for row in zip(self.t, self.mode, self.detection, self.observed, self.energy):
                writer.writerow((f"{row[0]:.6g}", int(row[1]), int(row[2]), int(row[3]), repr(float(row[4]))))


def accuracy(trace: RunTrace) -> float:
    if len(trace) == 0:
        raise ValueError("empty trace")
    s, d = trace.mode, trace.detection
    return float(np.mean(d * s + (1 - d) * (1 - s)))


def misclassification_rate(trace: RunTrace) -> float:
    return float(np.mean(trace.misclassified()))


def confusion_energy(trace: RunTrace) -> float:
    """Share of the run's energy spent on frames where mode and detection disagree."""
    total = trace.e_total
    if total <= 0:
        raise ValueError("confusion-energy undefined for zero total energy")
    return float(np.dot(trace.energy, trace.misclassified()) / total)


@dataclass(frozen=True)
class EcdfCurve:
    values: np.ndarray

    def __call__(self, q):
        return evaluate(self, q)

    def points(self) -> tuple[np.ndarray, np.ndarray]:
        """Step corners ``(x, F(x))`` at each distinct sample value."""
        x = np.unique(self.values)
        return x, evaluate(self, x)


def ecdf(samples) -> EcdfCurve:
    samples = np.asarray(samples, dtype=float).ravel()
    if samples.size == 0:
        raise ValueError("ECDF of an empty sample")
    return EcdfCurve(np.sort(samples))


def evaluate(curve: EcdfCurve, q):
    out = np.searchsorted(curve.values, q, side="right") / curve.values.size
    return out if np.ndim(out) else float(out)


def run_metrics(trace: RunTrace) -> dict:
    return {"acc": accuracy(trace), "e_total_j": trace.e_total, "ce": confusion_energy(trace)}


def write_results(path, rows, append: bool = False) -> None:
    """Write metric rows (dicts keyed by ``RESULTS_COLUMNS``) to a results CSV."""
    new = not append or not os.path.exists(path) or os.path.getsize(path) == 0
    with open(path, "a" if append else "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        if new:
            writer.writerow(RESULTS_COLUMNS)
        for row in rows:
            writer.writerow((row["policy"], row["seed"], repr(float(row["acc"])),
                             repr(float(row["e_total_j"])), repr(float(row["ce"]))))


def read_results(path) -> list:
    with open(path, newline="") as fh:
        return [
            {"policy": r["policy"], "seed": int(r["seed"]), "acc": float(r["acc"]),
             "e_total_j": float(r["e_total_j"]), "ce": float(r["ce"])}
            for r in csv.DictReader(fh)
        ]
