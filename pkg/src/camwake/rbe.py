"""Particle-filter estimation of the target RSSI from intermittent samples."""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field

import numpy as np

from .world import PathLossParams, ProcessModelParams, distance_from_rssi, rssi_true

log = logging.getLogger(__name__)

RANDOM_WALK_RSSI = "random_walk_rssi"
MAPPED_DISTANCE_WALK = "mapped_distance_walk"


@dataclass
class ParticleSet:
    particles: np.ndarray
    weights: np.ndarray

    @property
    def size(self) -> int:
        return len(self.particles)

    def copy(self) -> "ParticleSet":
        return ParticleSet(self.particles.copy(), self.weights.copy())


@dataclass(frozen=True)
class FilterProcessParams:
    """Filter-side guess of the RSSI dynamics.

    ``random_walk_rssi`` adds N(0, guessed_noise_std^2) dB per frame.
    ``mapped_distance_walk`` maps particles to distance, walks there with
    ``process.noise_std`` and maps back through ``plm``.
    """

    guessed_noise_std: float = 0.1
    model: str = RANDOM_WALK_RSSI
    plm: PathLossParams = field(default_factory=PathLossParams)
    process: ProcessModelParams = field(default_factory=ProcessModelParams)

    def __post_init__(self):
        if self.guessed_noise_std < 0:
            raise ValueError("guessed_noise_std must be non-negative")
        if self.model not in (RANDOM_WALK_RSSI, MAPPED_DISTANCE_WALK):
            raise ValueError(f"unknown filter model {self.model!r}")


def init_particles(n: int, first_obs, rng: np.random.Generator, sigma_rf: float = 3.0) -> ParticleSet:
    """Draw ``n`` particles around ``first_obs``.

    ``first_obs`` is either an RSSI value (particles ~ N(obs, (3 sigma_rf)^2)) or a
    ``(low, high)`` RSSI range to sample uniformly when no sample is available.
    """
    if n < 1:
        raise ValueError(f"need at least one particle, got {n}")
    if np.ndim(first_obs) == 0:
        particles = rng.normal(float(first_obs), 3.0 * sigma_rf, size=n)
    else:
        lo, hi = first_obs
        particles = rng.uniform(lo, hi, size=n)
    return ParticleSet(particles, np.full(n, 1.0 / n))


def predict(pset: ParticleSet, params: FilterProcessParams, rng: np.random.Generator) -> ParticleSet:
    """Propagate every particle one camera frame; weights are untouched."""
    n = pset.size
    if params.model == RANDOM_WALK_RSSI:
        if params.guessed_noise_std == 0:
            return ParticleSet(pset.particles.copy(), pset.weights.copy())
        moved = pset.particles + rng.normal(0.0, params.guessed_noise_std, size=n)
    else:
        d = distance_from_rssi(pset.particles, params.plm)
        if params.process.noise_std > 0:
            d = d + rng.normal(0.0, params.process.noise_std, size=n)
        moved = rssi_true(np.maximum(d, params.process.d_min), params.plm)
    return ParticleSet(moved, pset.weights.copy())


def update(pset: ParticleSet, obs, sigma_rf_guess: float = 3.0) -> ParticleSet:
    """Bayes update with the Gaussian RF likelihood; the empty observation is a no-op.

    ``obs`` may be an ``RssiObservation``, a float or None.
    """
    value = getattr(obs, "value", obs)
    if value is None:
        return pset
    # log domain: far-off samples would underflow a direct Gaussian product
    with np.errstate(divide="ignore"):
        logw = np.log(pset.weights) - 0.5 * ((value - pset.particles) / sigma_rf_guess) ** 2
    peak = np.max(logw)
    if not np.isfinite(peak):
        log.warning("particle weights collapsed at observation %.2f dBm; resetting to uniform", value)
        return ParticleSet(pset.particles.copy(), np.full(pset.size, 1.0 / pset.size))
    w = np.exp(logw - peak)
    return ParticleSet(pset.particles.copy(), w / w.sum())


def effective_sample_size(weights) -> float:
    weights = np.asarray(weights)
    return 1.0 / np.sum(weights * weights)


def systematic_resample(weights, rng: np.random.Generator) -> np.ndarray:
    n = len(weights)
    positions = (rng.random() + np.arange(n)) / n
    cumulative = np.cumsum(weights)
    cumulative[-1] = 1.0
    return np.searchsorted(cumulative, positions, side="right")


def resample_if_needed(pset: ParticleSet, ess_threshold_fraction: float, rng: np.random.Generator) -> ParticleSet:
    if effective_sample_size(pset.weights) >= ess_threshold_fraction * pset.size:
        return pset
    idx = systematic_resample(pset.weights, rng)
    return ParticleSet(pset.particles[idx], np.full(pset.size, 1.0 / pset.size))


def posterior_summary(pset: ParticleSet) -> tuple[float, float]:
    mean = float(np.dot(pset.weights, pset.particles))
    var = float(np.dot(pset.weights, (pset.particles - mean) ** 2))
    return mean, var


class ParticleDump:
    """Per-frame particle-cloud CSV writer (``t, particle, rssi_dbm, weight``)."""

    def __init__(self, path):
        self._fh = open(path, "w", newline="")
        self._writer = csv.writer(self._fh, lineterminator="\n")
        self._writer.writerow(("t", "particle", "rssi_dbm", "weight"))

    def write(self, t: float, pset: ParticleSet) -> None:
        for i, (r, w) in enumerate(zip(pset.particles, pset.weights)):
            self._writer.writerow((f"{t:.6g}", i, repr(float(r)), repr(float(w))))

    def close(self) -> None:
        self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()
