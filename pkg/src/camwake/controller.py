"""Energy-aware wake/sleep decision at each receiver sample."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import rbe
from .simcore import ACTIVE, EnergyModelParams, PlatformState, admissible_inputs, step_energy
from .world import PodCurve, ProcessModelParams

DECISION_LOG_COLUMNS = ("t", "s_old", "j_d_on", "j_e_on", "j_e_off", "u_star")


@dataclass(frozen=True)
class ControllerParams:
    alpha: float
    nu: int
    t_rf: float
    e_max: float

    def __post_init__(self):
        if self.alpha < 0:
            raise ValueError(f"alpha must be non-negative, got {self.alpha}")
        if self.e_max <= 0:
            raise ValueError("e_max must be positive")

    @classmethod
    def from_energy(cls, alpha: float, nu: int, t_rf: float, energy: EnergyModelParams) -> "ControllerParams":
        return cls(alpha, nu, t_rf, energy.e_max(t_rf))


@dataclass(frozen=True)
class CostBreakdown:
    j_detection: float
    j_energy: float

    @property
    def j_total(self) -> float:
        return self.j_detection + self.j_energy


def at_least_one_probability(p, nu: int):
    """Probability of at least one success in ``nu`` Bernoulli(p) frames."""
    if nu < 1:
        raise ValueError(f"nu must be >= 1, got {nu}")
    p = np.asarray(p, dtype=float)
    if np.any((p < 0) | (p > 1)):
        raise ValueError("probability outside [0, 1]")
    out = 1.0 - (1.0 - p) ** nu
    return out if np.ndim(out) else float(out)


def detection_from_pod(weights, pod_values, nu: int) -> float:
    """``1 - sum_i w_i (1 - p_i)^nu`` for already evaluated, clamped POD values."""
    return float(1.0 - np.dot(weights, (1.0 - np.asarray(pod_values)) ** nu))


def lookahead(pset: rbe.ParticleSet, filter_params: rbe.FilterProcessParams, nu: int,
              rng: np.random.Generator) -> rbe.ParticleSet:
    """Propagate a copy of the particles one control interval ahead."""
    ahead = pset.copy()
    for _ in range(nu):
        ahead = rbe.predict(ahead, filter_params, rng)
    return ahead


def detection_term(pset: rbe.ParticleSet, model, params: ControllerParams,
                   filter_params: rbe.FilterProcessParams, rng: np.random.Generator) -> float:
    """Expected probability of at least one detection over the next interval with the camera on."""
    ahead = lookahead(pset, filter_params, params.nu, rng)
    pod = np.clip(model.predict_mean(ahead.particles), 0.0, 1.0)
    return detection_from_pod(pset.weights, pod, params.nu)


def true_detection_term(d: float, pod: PodCurve, process: ProcessModelParams, nu: int,
                        rng: np.random.Generator, n_rollouts: int = 100) -> float:
    """Detection term with perfect knowledge: true distance, POD and dynamics."""
    d_ahead = np.full(n_rollouts, float(d))
    if process.noise_std > 0:
        for _ in range(nu):
            d_ahead = np.maximum(d_ahead + rng.normal(0.0, process.noise_std, n_rollouts), process.d_min)
    return detection_from_pod(np.full(n_rollouts, 1.0 / n_rollouts), pod(d_ahead), nu)


def energy_term(s_new: PlatformState, s_old: PlatformState, energy: EnergyModelParams,
                params: ControllerParams) -> float:
    return step_energy(energy, s_new, s_old, params.t_rf) / params.e_max


def decide_from_detection(j_d_on: float, s: PlatformState, energy: EnergyModelParams,
                          params: ControllerParams) -> tuple[int, dict]:
    """Pick the input maximizing ``J_D - alpha * E_c / E_max`` given the camera-on detection term.

    Exact ties go to the lower-energy candidate.
    """
    costs, spend = {}, {}
    for u in admissible_inputs(s):
        s_new = PlatformState(s.mode + u)
        spend[u] = energy_term(s_new, s, energy, params)
        j_d = j_d_on if s_new.mode == ACTIVE else 0.0
        costs[u] = CostBreakdown(j_d, -params.alpha * spend[u])
    u_star = max(costs, key=lambda u: (costs[u].j_total, -spend[u]))
    return u_star, costs


def decide(pset: rbe.ParticleSet, model, s: PlatformState, energy: EnergyModelParams,
           params: ControllerParams, filter_params: rbe.FilterProcessParams,
           rng: np.random.Generator) -> tuple[int, dict]:
    j_d_on = detection_term(pset, model, params, filter_params, rng)
    return decide_from_detection(j_d_on, s, energy, params)


def wake_threshold(energy: EnergyModelParams, params: ControllerParams) -> float:
    """Detection term above which a sleeping camera is switched on."""
    wake = energy_term(PlatformState(ACTIVE), PlatformState(0), energy, params)
    stay = energy_term(PlatformState(0), PlatformState(0), energy, params)
    return params.alpha * (wake - stay)


def decision_record(t: float, s_old: PlatformState, costs: dict, u_star: int) -> tuple:
    on = 1 if s_old.mode == 0 else 0
    off = 0 if s_old.mode == 0 else -1
    return (t, s_old.mode, costs[on].j_detection, costs[on].j_energy, costs[off].j_energy, u_star)
