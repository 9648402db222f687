"""Self-supervised collection of (RSSI, empirical POD) training pairs."""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .simcore import TimeBase
from .world import PathLossParams, PodCurve, ProcessModelParams, generate_world

log = logging.getLogger(__name__)

NOISE_FLOOR = 1e-4
CSV_COLUMNS = ("timestamp_s", "rssi_dbm", "label", "nu", "noise_var")


@dataclass(frozen=True)
class TrainingPair:
    rssi: float
    label: float
    nu: int
    noise_var: float
    timestamp: float = 0.0


@dataclass
class TrainingDataset:
    pairs: list = field(default_factory=list)

    @property
    def n_train(self) -> int:
        return len(self.pairs)

    @property
    def inputs(self) -> np.ndarray:
        return np.array([p.rssi for p in self.pairs], dtype=float)

    @property
    def labels(self) -> np.ndarray:
        return np.array([p.label for p in self.pairs], dtype=float)

    @property
    def noise_vars(self) -> np.ndarray:
        return np.array([p.noise_var for p in self.pairs], dtype=float)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(CSV_COLUMNS)
            for p in self.pairs:
                writer.writerow([repr(p.timestamp), repr(p.rssi), repr(p.label), p.nu, repr(p.noise_var)])

    @classmethod
    def from_csv(cls, path) -> "TrainingDataset":
        path = Path(path)
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh, skipinitialspace=True)
            missing = set(CSV_COLUMNS) - set(reader.fieldnames or ())
            if missing:
                raise ValueError(f"{path}: missing columns {sorted(missing)}")
            pairs = [
                TrainingPair(
                    rssi=float(row["rssi_dbm"]),
                    label=float(row["label"]),
                    nu=int(row["nu"]),
                    noise_var=float(row["noise_var"]),
                    timestamp=float(row["timestamp_s"]),
                )
                for row in reader
            ]
        for p in pairs:
            if not 0.0 <= p.label <= 1.0 or p.noise_var <= 0:
                raise ValueError(f"{path}: invalid row {p}")
        return cls(pairs)


def empirical_pod(window, nu: int | None = None) -> float:
    """Fraction of detections in a window of camera frames."""
    window = np.asarray(window)
    if nu is not None and window.size != nu:
        raise ValueError(f"window has {window.size} outcomes, expected {nu}")
    if window.size < 1:
        raise ValueError("empty detection window")
    return float(window.mean())


def label_noise_variance(label: float, nu: int, floor: float = NOISE_FLOOR) -> float:
    """Plug-in binomial variance ``label (1 - label) / nu``, floored."""
    if nu < 1:
        raise ValueError(f"nu must be >= 1, got {nu}")
    return max(label * (1.0 - label) / nu, floor)


def collect_dataset(time: TimeBase, process: ProcessModelParams, plm: PathLossParams, pod: PodCurve,
                    n_train: int, world_rng: np.random.Generator, detection_rng: np.random.Generator,
                    floor: float = NOISE_FLOOR, d0: float | None = None) -> TrainingDataset:
    """Run the world with the camera pinned active and window detections into labels.

    Pair ``i`` (1-based) couples the RSSI sample at ``i * t_rf`` with the mean of
    the ``nu`` detections on frames ``(i-1) nu + 1 .. i nu``.
    """
    if n_train < 1:
        raise ValueError(f"n_train must be >= 1, got {n_train}")
    if time.nu < 5:
        log.warning("nu=%d: the Gaussian label-noise approximation is rough at small nu", time.nu)
    world = generate_world(time, process, plm, pod, world_rng, detection_rng, n_intervals=n_train, d0=d0)
    nu = time.nu
    pairs = []
    for i in range(1, n_train + 1):
        label = empirical_pod(world.detectable[(i - 1) * nu + 1: i * nu + 1], nu)
        pairs.append(TrainingPair(
            rssi=float(world.rssi[i]),
            label=label,
            nu=nu,
            noise_var=label_noise_variance(label, nu, floor),
            timestamp=i * time.t_rf,
        ))
    return TrainingDataset(pairs)
