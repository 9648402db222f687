"""Gaussian process regression of detection probability on RSSI.

Zero-mean GP with a Matern covariance and a known, per-point noise variance.
Hyperparameters (lengthscale, signal variance) are fitted by maximizing the log
marginal likelihood with multi-start L-BFGS-B in log space.
"""

from __future__ import annotations

import json
import logging
from dataclasses import asdict, dataclass

import numpy as np
from scipy import linalg, optimize

log = logging.getLogger(__name__)

LENGTHSCALE_BOUNDS = (0.5, 50.0)
SIGNAL_VAR_BOUNDS = (1e-3, 4.0)
JITTERS = (0.0, 1e-10, 1e-9, 1e-8, 1e-7, 1e-6)
SMOOTHNESS = (0.5, 1.5, 2.5)

MODEL_KIND = "camwake.gpr"
MODEL_VERSION = 1


class NotPositiveDefiniteError(np.linalg.LinAlgError):
    pass


@dataclass(frozen=True)
class KernelParams:
    lengthscale: float = 5.0
    signal_var: float = 0.25
    smoothness: float = 2.5

    def __post_init__(self):
        if self.lengthscale <= 0 or self.signal_var <= 0:
            raise ValueError("lengthscale and signal_var must be positive")
        if self.smoothness not in SMOOTHNESS:
            raise ValueError(f"smoothness must be one of {SMOOTHNESS}, got {self.smoothness}")


@dataclass(frozen=True)
class PodPrediction:
    mean: np.ndarray | float
    variance: np.ndarray | float

    @property
    def mean_clamped(self):
        return np.clip(self.mean, 0.0, 1.0)


def _matern_profile(dist, lengthscale, smoothness):
    """Correlation and its derivative with respect to log(lengthscale)."""
    if smoothness == 0.5:
        s = dist / lengthscale
        e = np.exp(-s)
        return e, s * e
    if smoothness == 1.5:
        s = np.sqrt(3.0) * dist / lengthscale
        e = np.exp(-s)
        return (1.0 + s) * e, s * s * e
    s = np.sqrt(5.0) * dist / lengthscale
    e = np.exp(-s)
    return (1.0 + s + s * s / 3.0) * e, s * s * (1.0 + s) * e / 3.0


def matern(x1, x2, kernel: KernelParams) -> np.ndarray:
    dist = np.abs(np.asarray(x1, float)[:, None] - np.asarray(x2, float)[None, :])
    corr, _ = _matern_profile(dist, kernel.lengthscale, kernel.smoothness)
    return kernel.signal_var * corr


def _cholesky(a: np.ndarray):
    """Lower Cholesky factor with jitter escalation; returns (factor, jitter used)."""
    eye = np.eye(a.shape[0])
    for jitter in JITTERS:
        try:
            return linalg.cholesky(a + jitter * eye, lower=True, check_finite=False), jitter
        except linalg.LinAlgError:
            continue
    raise NotPositiveDefiniteError(f"covariance not positive definite even with jitter {JITTERS[-1]}")


def log_marginal_likelihood(x, y, noise_vars, kernel: KernelParams, with_grad: bool = False):
    """Log evidence of ``y`` under the GP; gradient is w.r.t. (log lengthscale, log signal_var)."""
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    dist = np.abs(x[:, None] - x[None, :])
    corr, dcorr = _matern_profile(dist, kernel.lengthscale, kernel.smoothness)
    kf = kernel.signal_var * corr
    chol, _ = _cholesky(kf + np.diag(noise_vars))
    alpha = linalg.cho_solve((chol, True), y, check_finite=False)
    lml = -0.5 * y @ alpha - np.log(np.diag(chol)).sum() - 0.5 * len(y) * np.log(2 * np.pi)
    if not with_grad:
        return lml
    k_inv = linalg.cho_solve((chol, True), np.eye(len(y)), check_finite=False)
    w = np.outer(alpha, alpha) - k_inv
    grad = np.array([
        0.5 * np.sum(w * (kernel.signal_var * dcorr)),
        0.5 * np.sum(w * kf),
    ])
    return lml, grad


class GprModel:
    """A fitted GP: training data, hyperparameters and the cached factorization.

    Treat instances as immutable; concurrent ``predict`` calls are safe.
    """

    def __init__(self, inputs, labels, noise_vars, kernel: KernelParams):
        self.inputs = np.asarray(inputs, dtype=float)
        self.labels = np.asarray(labels, dtype=float)
        self.noise_vars = np.asarray(noise_vars, dtype=float)
        if not (self.inputs.shape == self.labels.shape == self.noise_vars.shape) or self.inputs.ndim != 1:
            raise ValueError("inputs, labels and noise_vars must be 1-d arrays of equal length")
        if np.any(self.noise_vars <= 0):
            raise ValueError("noise variances must be positive")
        self.kernel = kernel
        gram = matern(self.inputs, self.inputs, kernel) + np.diag(self.noise_vars)
        self.chol, self.jitter = _cholesky(gram)
        self.alpha = linalg.cho_solve((self.chol, True), self.labels, check_finite=False)
        self.log_marginal_likelihood = float(
            -0.5 * self.labels @ self.alpha - np.log(np.diag(self.chol)).sum()
            - 0.5 * len(self.labels) * np.log(2 * np.pi)
        )

    def __len__(self):
        return len(self.inputs)

    def predict_mean(self, r) -> np.ndarray:
        r = np.atleast_1d(np.asarray(r, dtype=float))
        return matern(r, self.inputs, self.kernel) @ self.alpha

    def predict(self, r) -> PodPrediction:
        scalar = np.ndim(r) == 0
        r = np.atleast_1d(np.asarray(r, dtype=float))
        k_star = matern(r, self.inputs, self.kernel)
        mean = k_star @ self.alpha
        v = linalg.solve_triangular(self.chol, k_star.T, lower=True, check_finite=False)
        var = np.maximum(self.kernel.signal_var - np.sum(v * v, axis=0), 0.0)
        if scalar:
            return PodPrediction(float(mean[0]), float(var[0]))
        return PodPrediction(mean, var)

    def to_dict(self) -> dict:
        return {
            "kind": MODEL_KIND,
            "version": MODEL_VERSION,
            "kernel": {"family": "matern", **asdict(self.kernel)},
            "log_marginal_likelihood": self.log_marginal_likelihood,
            "inputs": self.inputs.tolist(),
            "labels": self.labels.tolist(),
            "noise_vars": self.noise_vars.tolist(),
        }

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=1)
            fh.write("\n")

    @classmethod
    def from_dict(cls, doc: dict) -> "GprModel":
        if doc.get("kind") != MODEL_KIND:
            raise ValueError(f"not a {MODEL_KIND} document")
        if doc.get("version") != MODEL_VERSION:
            raise ValueError(f"unsupported model version {doc.get('version')}")
        k = doc["kernel"]
        kernel = KernelParams(k["lengthscale"], k["signal_var"], k["smoothness"])
        return cls(doc["inputs"], doc["labels"], doc["noise_vars"], kernel)

    @classmethod
    def load(cls, path) -> "GprModel":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


def fit(dataset, init: KernelParams = KernelParams(), n_restarts: int = 5, seed: int = 0,
        lengthscale_bounds=LENGTHSCALE_BOUNDS, signal_var_bounds=SIGNAL_VAR_BOUNDS) -> GprModel:
    """Fit hyperparameters by maximum marginal likelihood.

    ``dataset`` is a ``TrainingDataset`` or an ``(inputs, labels, noise_vars)``
    triple. The first start is ``init`` (clipped into the bounds); the other
    ``n_restarts - 1`` are drawn log-uniformly from the box with ``seed``.
    """
    if hasattr(dataset, "pairs"):
        x, y, noise = dataset.inputs, dataset.labels, dataset.noise_vars
    else:
        x, y, noise = (np.asarray(a, dtype=float) for a in dataset)
    if len(x) < 2:
        raise ValueError(f"need at least 2 training points, got {len(x)}")
    if np.ptp(x) == 0:
        raise ValueError("degenerate dataset: all inputs identical")
    if np.any(noise <= 0):
        raise ValueError("noise variances must be positive")

    bounds = np.log([lengthscale_bounds, signal_var_bounds])
    smoothness = init.smoothness

    def objective(theta):
        kernel = KernelParams(float(np.exp(theta[0])), float(np.exp(theta[1])), smoothness)
        try:
            lml, grad = log_marginal_likelihood(x, y, noise, kernel, with_grad=True)
        except NotPositiveDefiniteError:
            return 1e25, np.zeros(2)
        return -lml, -grad

    rng = np.random.default_rng(seed)
    starts = [np.clip(np.log([init.lengthscale, init.signal_var]), bounds[:, 0], bounds[:, 1])]
    for _ in range(max(n_restarts, 1) - 1):
        starts.append(rng.uniform(bounds[:, 0], bounds[:, 1]))

    best = None
    for theta0 in starts:
        res = optimize.minimize(objective, theta0, jac=True, method="L-BFGS-B", bounds=bounds)
        log.debug("restart from %s -> %s (nlml %.4f)", np.exp(theta0), np.exp(res.x), res.fun)
        if best is None or res.fun < best.fun:
            best = res
    kernel = KernelParams(float(np.exp(best.x[0])), float(np.exp(best.x[1])), smoothness)
    log.info("GP fitted: lengthscale=%.4g dB, signal_var=%.4g, lml=%.4f", kernel.lengthscale,
             kernel.signal_var, -best.fun)
    return GprModel(x, y, noise, kernel)


def predict(model: GprModel, r) -> PodPrediction:
    return model.predict(r)
