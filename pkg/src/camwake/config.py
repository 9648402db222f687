"""Experiment configuration: INI file <-> validated parameter dataclasses.

Defaults describe the standard simulation setup (T_RF = 0.1 s,
nu = 10, 100/100/1 mW active/detector/sleep, 50 mW x 3 ms transitions, 20 mW
receiver, n_train = 900, n_test = 500, 100 particles, 50 Monte Carlo tests,
alpha = 1).
"""

from __future__ import annotations

import configparser
import hashlib
import io
from dataclasses import dataclass, field, replace

from .gpr import KernelParams
from .rbe import FilterProcessParams
from .simcore import EnergyModelParams, TimeBase
from .world import PathLossParams, PodCurve, ProcessModelParams

POLICIES = ("always", "rnd", "gt", "s2gpr")


@dataclass(frozen=True)
class ExperimentConfig:
    time: TimeBase = field(default_factory=TimeBase)
    energy: EnergyModelParams = field(default_factory=EnergyModelParams)
    process: ProcessModelParams = field(default_factory=ProcessModelParams)
    plm: PathLossParams = field(default_factory=PathLossParams)
    pod: PodCurve = field(default_factory=PodCurve)
    n_train: int = 900
    label_noise_floor: float = 1e-2
    kernel: KernelParams = field(default_factory=KernelParams)
    gp_restarts: int = 5
    n_particles: int = 100
    guessed_noise_std: float = 0.1
    filter_model: str = "random_walk_rssi"
    sigma_rf_guess: float = 3.0
    ess_threshold: float = 0.5
    alpha: float = 1.0
    gt_rollouts: int = 100
    n_tests: int = 50
    policies: tuple = POLICIES
    seed: int = 0
    out_dir: str = "results"

    def __post_init__(self):
        if self.n_train < 1:
            raise ValueError("n_train must be >= 1")
        if self.n_particles < 1:
            raise ValueError("n_particles must be >= 1")
        if not 0.0 <= self.ess_threshold <= 1.0:
            raise ValueError("ess_threshold must lie in [0, 1]")
        if self.alpha < 0:
            raise ValueError("alpha must be non-negative")
        if self.n_tests < 1 or self.gt_rollouts < 1 or self.gp_restarts < 1:
            raise ValueError("n_tests, gt_rollouts and gp_restarts must be >= 1")
        if self.label_noise_floor <= 0 or self.sigma_rf_guess <= 0:
            raise ValueError("label_noise_floor and sigma_rf_guess must be positive")
        unknown = set(self.policies) - set(POLICIES)
        if unknown or not self.policies:
            raise ValueError(f"unknown policies {sorted(unknown)}; choose from {POLICIES}")
        # constructing it runs its own validation
        self.filter_params

    @property
    def filter_params(self) -> FilterProcessParams:
        return FilterProcessParams(self.guessed_noise_std, self.filter_model, self.plm, self.process)

    def with_overrides(self, **kw) -> "ExperimentConfig":
        return replace(self, **kw)

    # -- INI round trip -------------------------------------------------

    def to_parser(self) -> configparser.ConfigParser:
        cp = configparser.ConfigParser(interpolation=None)
        cp["time"] = {"t_rf": repr(self.time.t_rf), "nu": str(self.time.nu), "n_test": str(self.time.n_test)}
        e = self.energy
        cp["energy"] = {
            "p_active": repr(e.p_active), "p_detector": repr(e.p_detector), "p_sleep": repr(e.p_sleep),
            "p_trans": repr(e.p_trans), "t_trans": repr(e.t_trans), "p_rx": repr(e.p_rx),
        }
        pod = self.pod
        cp["world"] = {
            "noise_std": repr(self.process.noise_std),
            "d0_min": repr(self.process.d0_range[0]), "d0_max": repr(self.process.d0_range[1]),
            "d_min": repr(self.process.d_min),
            "kappa": repr(self.plm.kappa), "exponent": repr(self.plm.exponent),
            "ref_dist": repr(self.plm.ref_dist), "sigma_rf": repr(self.plm.sigma_rf),
            "pod_shape": pod.shape, "pod_slope": repr(pod.slope), "pod_midpoint": repr(pod.midpoint),
            "pod_knots": ", ".join(f"{d!r}:{p!r}" for d, p in pod.knots),
        }
        cp["selftrain"] = {"n_train": str(self.n_train), "noise_floor": repr(self.label_noise_floor)}
        cp["gpr"] = {
            "lengthscale": repr(self.kernel.lengthscale), "signal_var": repr(self.kernel.signal_var),
            "smoothness": repr(self.kernel.smoothness), "restarts": str(self.gp_restarts),
        }
        cp["rbe"] = {
            "n_particles": str(self.n_particles), "guessed_noise_std": repr(self.guessed_noise_std),
            "model": self.filter_model, "sigma_rf_guess": repr(self.sigma_rf_guess),
            "ess_threshold": repr(self.ess_threshold),
        }
        cp["controller"] = {"alpha": repr(self.alpha), "gt_rollouts": str(self.gt_rollouts)}
        cp["campaign"] = {
            "n_tests": str(self.n_tests), "policies": ", ".join(self.policies),
            "seed": str(self.seed), "out_dir": self.out_dir,
        }
        return cp

    def to_ini(self) -> str:
        buf = io.StringIO()
        self.to_parser().write(buf)
        return buf.getvalue()

    def save(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.to_ini())

    def fingerprint(self) -> str:
        """SHA-256 over every parameter that influences results (out_dir excluded)."""
        cp = self.to_parser()
        cp.remove_option("campaign", "out_dir")
        buf = io.StringIO()
        cp.write(buf)
        return hashlib.sha256(buf.getvalue().encode()).hexdigest()

    @classmethod
    def from_parser(cls, cp: configparser.ConfigParser) -> "ExperimentConfig":
        known = cls().to_parser()
        for section in cp.sections():
            if section not in known:
                raise ValueError(f"unknown config section [{section}]")
            for key in cp[section]:
                if key not in known[section]:
                    raise ValueError(f"unknown config key {section}.{key}")
        merged = known
        merged.read_dict({s: dict(cp[s]) for s in cp.sections()})
        t, e, w = merged["time"], merged["energy"], merged["world"]
        sec_st, sec_gp, sec_rb = merged["selftrain"], merged["gpr"], merged["rbe"]
        sec_c, sec_camp = merged["controller"], merged["campaign"]
        knots_txt = w.get("pod_knots", "").strip()
        knots = tuple(
            tuple(float(v) for v in item.split(":")) for item in knots_txt.split(",") if item.strip()
        )
        return cls(
            time=TimeBase(t.getfloat("t_rf"), t.getint("nu"), t.getint("n_test")),
            energy=EnergyModelParams(
                e.getfloat("p_active"), e.getfloat("p_detector"), e.getfloat("p_sleep"),
                e.getfloat("p_trans"), e.getfloat("t_trans"), e.getfloat("p_rx"),
            ),
            process=ProcessModelParams(
                w.getfloat("noise_std"), (w.getfloat("d0_min"), w.getfloat("d0_max")), w.getfloat("d_min"),
            ),
            plm=PathLossParams(
                w.getfloat("kappa"), w.getfloat("exponent"), w.getfloat("ref_dist"), w.getfloat("sigma_rf"),
            ),
            pod=PodCurve(w.get("pod_shape"), w.getfloat("pod_slope"), w.getfloat("pod_midpoint"), knots),
            n_train=sec_st.getint("n_train"),
            label_noise_floor=sec_st.getfloat("noise_floor"),
            kernel=KernelParams(
                sec_gp.getfloat("lengthscale"), sec_gp.getfloat("signal_var"), sec_gp.getfloat("smoothness"),
            ),
            gp_restarts=sec_gp.getint("restarts"),
            n_particles=sec_rb.getint("n_particles"),
            guessed_noise_std=sec_rb.getfloat("guessed_noise_std"),
            filter_model=sec_rb.get("model"),
            sigma_rf_guess=sec_rb.getfloat("sigma_rf_guess"),
            ess_threshold=sec_rb.getfloat("ess_threshold"),
            alpha=sec_c.getfloat("alpha"),
            gt_rollouts=sec_c.getint("gt_rollouts"),
            n_tests=sec_camp.getint("n_tests"),
            policies=tuple(p.strip() for p in sec_camp.get("policies").split(",") if p.strip()),
            seed=sec_camp.getint("seed"),
            out_dir=sec_camp.get("out_dir"),
        )

    @classmethod
    def from_ini(cls, text: str) -> "ExperimentConfig":
        cp = configparser.ConfigParser(interpolation=None)
        cp.read_string(text)
        return cls.from_parser(cp)

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        with open(path) as fh:
            return cls.from_ini(fh.read())
