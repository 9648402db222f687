"""Simulated time, the two-mode camera state machine and energy bookkeeping."""

from __future__ import annotations

from dataclasses import dataclass, field

SLEEP = 0
ACTIVE = 1

ENERGY_CATEGORIES = ("active", "sleep", "transition", "receiver")


@dataclass(frozen=True)
class TimeBase:
    """Camera frame period ``t_c`` and receiver period ``t_rf = nu * t_c``.

    Internally everything is indexed by integer frame number; seconds are only
    derived for output.
    """

    t_rf: float = 0.1
    nu: int = 10
    n_test: int = 500

    def __post_init__(self):
        if self.t_rf <= 0:
            raise ValueError(f"t_rf must be positive, got {self.t_rf}")
        if int(self.nu) != self.nu or self.nu < 1:
            raise ValueError(f"nu must be a positive integer, got {self.nu}")
        if int(self.n_test) != self.n_test or self.n_test < 1:
            raise ValueError(f"n_test must be a positive integer, got {self.n_test}")

    @property
    def t_c(self) -> float:
        return self.t_rf / self.nu

    @property
    def horizon(self) -> float:
        return self.n_test * self.t_rf

    @property
    def n_frames(self) -> int:
        return self.n_test * self.nu

    def frame_time(self, k: int) -> float:
        return k * self.t_rf / self.nu

    def frame_index(self, t: float) -> int | None:
        """Frame index of ``t`` or None when ``t`` is not on the frame grid."""
        k = round(t / self.t_c)
        if abs(k * self.t_c - t) > 1e-9 * max(1.0, abs(t)):
            return None
        return k

    def is_rf_instant(self, t: float) -> bool:
        k = self.frame_index(t)
        return k is not None and k % self.nu == 0


@dataclass
class PlatformState:
    mode: int = SLEEP

    def __post_init__(self):
        if self.mode not in (SLEEP, ACTIVE):
            raise ValueError(f"mode must be 0 or 1, got {self.mode}")


@dataclass(frozen=True)
class EnergyModelParams:
    """Power constants in watts, transition time in seconds."""

    p_active: float = 0.100
    p_detector: float = 0.100
    p_sleep: float = 0.001
    p_trans: float = 0.050
    t_trans: float = 0.003
    p_rx: float = 0.020
    rx_enabled: bool = True

    def __post_init__(self):
        for name in ("p_active", "p_detector", "p_sleep", "p_trans", "p_rx"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.t_trans < 0:
            raise ValueError("t_trans must be non-negative")
        if not self.p_sleep < self.p_active:
            raise ValueError("p_sleep must be lower than p_active")

    @property
    def e_trans(self) -> float:
        return self.p_trans * self.t_trans

    def e_max(self, t_rf: float) -> float:
        """Energy of the costliest control interval (wake-up into active)."""
        return (self.p_active + self.p_detector) * t_rf + self.e_trans

    def scaled(self, factor: float) -> "EnergyModelParams":
        return EnergyModelParams(
            p_active=self.p_active * factor,
            p_detector=self.p_detector * factor,
            p_sleep=self.p_sleep * factor,
            p_trans=self.p_trans * factor,
            t_trans=self.t_trans,
            p_rx=self.p_rx * factor,
            rx_enabled=self.rx_enabled,
        )


@dataclass
class EnergyLedger:
    total: float = 0.0
    per_category: dict = field(default_factory=lambda: dict.fromkeys(ENERGY_CATEGORIES, 0.0))
    misclassified: float = 0.0


def admissible_inputs(s: PlatformState) -> frozenset:
    return frozenset({0, 1}) if s.mode == SLEEP else frozenset({0, -1})


def transition(s: PlatformState, u: int) -> PlatformState:
    if u not in admissible_inputs(s):
        raise ValueError(f"input {u} is not admissible in mode {s.mode}")
    return PlatformState(s.mode + u)


def camera_energy(params: EnergyModelParams, s_new: PlatformState, s_old: PlatformState,
                  interval: float) -> tuple[float, float]:
    """Split of one interval's camera energy into (steady-state, transition) joules."""
    if interval < 0:
        raise ValueError(f"interval must be non-negative, got {interval}")
    if s_new.mode == ACTIVE:
        steady = interval * (params.p_active + params.p_detector)
    else:
        steady = interval * params.p_sleep
    trans = params.e_trans * abs(s_new.mode - s_old.mode)
    return steady, trans


def step_energy(params: EnergyModelParams, s_new: PlatformState, s_old: PlatformState,
                interval: float) -> float:
    """Camera energy of one control interval charged at the new state.

    The receiver is not included; it is charged separately as
    ``interval * p_rx`` when ``rx_enabled``.
    """
    steady, trans = camera_energy(params, s_new, s_old, interval)
    return steady + trans


def receiver_energy(params: EnergyModelParams, interval: float) -> float:
    if interval < 0:
        raise ValueError(f"interval must be non-negative, got {interval}")
    return interval * params.p_rx if params.rx_enabled else 0.0


def accumulate(ledger: EnergyLedger, increment: float, category: str,
               misclassified: bool = False) -> EnergyLedger:
    """Add ``increment`` joules to ``ledger`` in place and return it."""
    if increment < 0:
        raise ValueError(f"energy increment must be non-negative, got {increment}")
    if category not in ledger.per_category:
        raise KeyError(f"unknown energy category {category!r}")
    ledger.total += increment
    ledger.per_category[category] += increment
    if misclassified:
        ledger.misclassified += increment
    return ledger
