"""Hidden ground truth: target distance walk, RSSI and Bernoulli detections."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .simcore import ACTIVE, TimeBase

D_MIN = 0.01


@dataclass(frozen=True)
class TargetState:
    d: float


@dataclass(frozen=True)
class ProcessModelParams:
    noise_std: float = 0.2
    d0_range: tuple = (0.5, 6.0)
    d_min: float = D_MIN

    def __post_init__(self):
        lo, hi = self.d0_range
        if self.noise_std < 0:
            raise ValueError("noise_std must be non-negative")
        if not 0 < lo <= hi:
            raise ValueError(f"d0_range must satisfy 0 < lo <= hi, got {self.d0_range}")
        if self.d_min <= 0:
            raise ValueError("d_min must be positive")


@dataclass(frozen=True)
class PathLossParams:
    """Log-distance path loss: ``kappa - 10 n log10(d / ref_dist)``."""

    kappa: float = -30.0
    exponent: float = 2.0
    ref_dist: float = 1.0
    sigma_rf: float = 3.0

    def __post_init__(self):
        if self.exponent <= 0 or self.ref_dist <= 0:
            raise ValueError("exponent and ref_dist must be positive")
        if self.sigma_rf < 0:
            raise ValueError("sigma_rf must be non-negative")


@dataclass(frozen=True)
class PodCurve:
    """Probability of detection as a function of distance.

    ``shape="logistic"`` evaluates ``1 / (1 + exp(slope * (d - midpoint)))``;
    ``shape="tabulated"`` linearly interpolates ``knots`` (pairs of distance,
    probability) and holds the end values outside them.
    """

    shape: str = "logistic"
    slope: float = 5.0
    midpoint: float = 3.5
    knots: tuple = field(default_factory=tuple)

    def __post_init__(self):
        if self.shape not in ("logistic", "tabulated"):
            raise ValueError(f"unknown POD shape {self.shape!r}")
        if self.shape == "tabulated":
            if len(self.knots) < 2:
                raise ValueError("tabulated POD needs at least two knots")
            ds = [k[0] for k in self.knots]
            ps = [k[1] for k in self.knots]
            if any(b <= a for a, b in zip(ds, ds[1:])):
                raise ValueError("knot distances must be strictly increasing")
            if any(not 0.0 <= p <= 1.0 for p in ps):
                raise ValueError("knot probabilities must lie in [0, 1]")

    def __call__(self, d):
        d = np.asarray(d, dtype=float)
        if self.shape == "logistic":
            # expit form avoids overflow for large |slope * (d - midpoint)|
            out = 0.5 * (1.0 - np.tanh(0.5 * self.slope * (d - self.midpoint)))
        else:
            ds, ps = zip(*self.knots)
            out = np.interp(d, ds, ps)
        return out if out.ndim else float(out)


def blind_zone_pod() -> PodCurve:
    """Non-monotone POD: undetectable very close and far, as real detectors behave."""
    return PodCurve(shape="tabulated", knots=(
        (0.2, 0.0), (0.6, 0.2), (1.0, 0.9), (2.5, 0.95), (3.5, 0.5), (4.5, 0.05), (6.0, 0.0),
    ))


@dataclass(frozen=True)
class RssiObservation:
    """``value`` is None for the empty observation between receiver samples."""

    value: float | None
    timestamp: float

    @property
    def empty(self) -> bool:
        return self.value is None


@dataclass(frozen=True)
class DetectionEvent:
    detected: int
    timestamp: float = 0.0


def step_target(state: TargetState, params: ProcessModelParams, rng: np.random.Generator) -> TargetState:
    if state.d <= 0:
        raise ValueError(f"distance must be positive, got {state.d}")
    eta = rng.normal(0.0, params.noise_std) if params.noise_std > 0 else 0.0
    return TargetState(max(state.d + eta, params.d_min))


def initial_target(params: ProcessModelParams, rng: np.random.Generator) -> TargetState:
    lo, hi = params.d0_range
    return TargetState(float(rng.uniform(lo, hi)))


def rssi_true(d, params: PathLossParams):
    d_arr = np.asarray(d, dtype=float)
    if np.any(d_arr <= 0):
        raise ValueError("distance must be positive")
    r = params.kappa - 10.0 * params.exponent * np.log10(d_arr / params.ref_dist)
    return r if r.ndim else float(r)


def distance_from_rssi(r, params: PathLossParams):
    """Inverse path loss map."""
    r = np.asarray(r, dtype=float)
    d = params.ref_dist * 10.0 ** ((params.kappa - r) / (10.0 * params.exponent))
    return d if d.ndim else float(d)


def observe_rssi(d: float, t: float, params: PathLossParams, time: TimeBase,
                 rng: np.random.Generator) -> RssiObservation:
    if not time.is_rf_instant(t):
        return RssiObservation(None, t)
    noise = rng.normal(0.0, params.sigma_rf) if params.sigma_rf > 0 else 0.0
    return RssiObservation(rssi_true(d, params) + noise, t)


def sample_detection(d: float, mode: int, curve: PodCurve, rng: np.random.Generator,
                     timestamp: float = 0.0) -> DetectionEvent:
    """One Bernoulli detection draw for a camera frame.

    A uniform is consumed even in sleep mode so that the detection stream stays
    aligned across policies that sleep at different frames.
    """
    if d <= 0:
        raise ValueError(f"distance must be positive, got {d}")
    u = rng.random()
    hit = int(mode == ACTIVE and u < curve(d))
    return DetectionEvent(hit, timestamp)


@dataclass
class WorldTrace:
    """Pre-generated ground truth for one run.

    ``distance[k]`` is the target distance at frame ``k`` (``k = 0`` is the
    initial condition), ``detectable[k]`` the detection outcome the camera would
    produce at frame ``k`` if active, and ``rssi[m]`` the noisy receiver sample
    at frame ``m * nu``.
    """

    time: TimeBase
    distance: np.ndarray
    detectable: np.ndarray
    rssi: np.ndarray

    def observation(self, m: int) -> RssiObservation:
        return RssiObservation(float(self.rssi[m]), m * self.time.t_rf)


def generate_world(time: TimeBase, process: ProcessModelParams, plm: PathLossParams, pod: PodCurve,
                   world_rng: np.random.Generator, detection_rng: np.random.Generator,
                   n_intervals: int | None = None, d0: float | None = None) -> WorldTrace:
    """Simulate the target for ``n_intervals`` receiver periods (default ``time.n_test``)."""
    n_intervals = time.n_test if n_intervals is None else n_intervals
    n_frames = n_intervals * time.nu
    state = initial_target(process, world_rng) if d0 is None else TargetState(d0)
    distance = np.empty(n_frames + 1)
    detectable = np.zeros(n_frames + 1, dtype=np.int8)
    rssi = np.empty(n_intervals + 1)
    distance[0] = state.d
    for k in range(n_frames + 1):
        if k > 0:
            state = step_target(state, process, world_rng)
            distance[k] = state.d
            detectable[k] = sample_detection(state.d, ACTIVE, pod, detection_rng).detected
        if k % time.nu == 0:
            obs = observe_rssi(state.d, time.frame_time(k), plm, time, world_rng)
            rssi[k // time.nu] = obs.value
    return WorldTrace(time, distance, detectable, rssi)


def rssi_range(plm: PathLossParams, d_min: float, d_max: float) -> tuple[float, float]:
    return rssi_true(d_max, plm), rssi_true(d_min, plm)


def pod_of_rssi(r, plm: PathLossParams, pod: PodCurve):
    """True POD expressed in RSSI space, ``p_D(g^-1(r))``."""
    return pod(distance_from_rssi(r, plm))

