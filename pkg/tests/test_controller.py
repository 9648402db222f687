import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from camwake import controller
from camwake.controller import (ControllerParams, at_least_one_probability, decide_from_detection,
                                detection_term, energy_term, true_detection_term, wake_threshold)
from camwake.rbe import FilterProcessParams, ParticleSet
from camwake.simcore import EnergyModelParams, PlatformState, admissible_inputs
from camwake.world import PodCurve, ProcessModelParams

ENERGY = EnergyModelParams()
PARAMS = ControllerParams.from_energy(1.0, 10, 0.1, ENERGY)
SLEEPING, AWAKE = PlatformState(0), PlatformState(1)


class TablePod:
    """Stand-in model mapping particle RSSI to a fixed POD."""

    def __init__(self, table):
        self.table = table

    def predict_mean(self, r):
        return np.array([self.table[float(x)] for x in r])


def test_at_least_one_example():
    assert at_least_one_probability(0.5, 10) == 0.9990234375


@pytest.mark.parametrize("nu", [1, 3, 6])
@pytest.mark.parametrize("p", [0.0, 0.2, 0.5, 0.9, 1.0])
def test_at_least_one_enumeration(nu, p):
    total = sum(np.prod([p if o else 1 - p for o in outcome])
                for outcome in itertools.product((0, 1), repeat=nu) if any(outcome))
    assert at_least_one_probability(p, nu) == pytest.approx(total, abs=1e-12)


def test_at_least_one_validation():
    with pytest.raises(ValueError):
        at_least_one_probability(1.2, 10)
    with pytest.raises(ValueError):
        at_least_one_probability(0.5, 0)


def test_detection_term_example():
    pset = ParticleSet(np.array([-40.0, -80.0]), np.array([0.5, 0.5]))
    model = TablePod({-40.0: 1.0, -80.0: 0.0})
    j = detection_term(pset, model, PARAMS, FilterProcessParams(guessed_noise_std=0.0), np.random.default_rng())
    assert j == pytest.approx(0.5)


def test_detection_term_clamps_gp_mean():
    pset = ParticleSet(np.array([-40.0, -80.0]), np.array([0.5, 0.5]))
    model = TablePod({-40.0: 1.3, -80.0: -0.2})
    j = detection_term(pset, model, PARAMS, FilterProcessParams(guessed_noise_std=0.0), np.random.default_rng())
    assert j == pytest.approx(0.5)


def test_detection_term_does_not_move_particles():
    pset = ParticleSet(np.array([-40.0, -41.0]), np.array([0.5, 0.5]))
    before = pset.particles.copy()
    model = TablePod.__new__(TablePod)
    model.predict_mean = lambda r: np.full(len(r), 0.3)
    detection_term(pset, model, PARAMS, FilterProcessParams(), np.random.default_rng())
    assert np.array_equal(pset.particles, before)


@pytest.mark.parametrize("new, old, expected", [(1, 0, 1.0), (0, 0, 0.0001 / 0.02015), (1, 1, 0.02 / 0.02015)])
def test_energy_terms(new, old, expected):
    assert energy_term(PlatformState(new), PlatformState(old), ENERGY, PARAMS) == pytest.approx(expected)


def test_energy_term_values_rounded():
    assert energy_term(SLEEPING, SLEEPING, ENERGY, PARAMS) == pytest.approx(0.004963, abs=1e-6)
    assert energy_term(AWAKE, AWAKE, ENERGY, PARAMS) == pytest.approx(0.99256, abs=1e-5)


def test_decide_examples():
    assert decide_from_detection(0.999, SLEEPING, ENERGY, PARAMS)[0] == 1
    assert decide_from_detection(0.99, SLEEPING, ENERGY, PARAMS)[0] == 0
    assert decide_from_detection(0.0, AWAKE, ENERGY, PARAMS)[0] == -1
    assert decide_from_detection(1.0, AWAKE, ENERGY, PARAMS)[0] == 0


def test_wake_threshold_matches_bisection():
    lo, hi = 0.0, 1.0
    for _ in range(60):
        mid = (lo + hi) / 2
        if decide_from_detection(mid, SLEEPING, ENERGY, PARAMS)[0] == 1:
            hi = mid
        else:
            lo = mid
    assert wake_threshold(ENERGY, PARAMS) == pytest.approx(hi, abs=1e-12)
    assert hi == pytest.approx(0.995037, abs=1e-6)


@given(st.floats(0.0, 1.0, exclude_min=True))
def test_alpha_zero_wakes_on_any_evidence(j):
    params = ControllerParams.from_energy(0.0, 10, 0.1, ENERGY)
    assert decide_from_detection(j, SLEEPING, ENERGY, params)[0] == 1
    assert decide_from_detection(j, AWAKE, ENERGY, params)[0] == 0


def test_alpha_zero_tie_goes_to_lower_energy():
    params = ControllerParams.from_energy(0.0, 10, 0.1, ENERGY)
    assert decide_from_detection(0.0, SLEEPING, ENERGY, params)[0] == 0
    assert decide_from_detection(0.0, AWAKE, ENERGY, params)[0] == -1


@given(st.floats(0.0, 1.0), st.floats(0.01, 100.0), st.integers(0, 1), st.floats(0.0, 5.0))
def test_power_scale_invariance(j, c, mode, alpha):
    scaled = ENERGY.scaled(c)
    a = decide_from_detection(j, PlatformState(mode), ENERGY, ControllerParams.from_energy(alpha, 10, 0.1, ENERGY))
    b = decide_from_detection(j, PlatformState(mode), scaled, ControllerParams.from_energy(alpha, 10, 0.1, scaled))
    assert a[0] == b[0]


@given(st.floats(0.0, 1.0), st.floats(0.0, 1.0), st.integers(0, 1), st.floats(0.0, 5.0))
def test_decision_monotone_in_detection(j1, j2, mode, alpha):
    lo, hi = sorted((j1, j2))
    s = PlatformState(mode)
    params = ControllerParams.from_energy(alpha, 10, 0.1, ENERGY)
    u_lo = decide_from_detection(lo, s, ENERGY, params)[0]
    u_hi = decide_from_detection(hi, s, ENERGY, params)[0]
    assert mode + u_hi >= mode + u_lo
    assert u_lo in admissible_inputs(s) and u_hi in admissible_inputs(s)


def test_true_detection_term_extremes():
    g = np.random.default_rng(0)
    pod, process = PodCurve(), ProcessModelParams()
    assert true_detection_term(0.5, pod, process, 10, g) > 0.999
    assert true_detection_term(20.0, pod, process, 10, g) < 1e-6
    static = ProcessModelParams(noise_std=0.0)
    assert true_detection_term(3.5, pod, static, 10, g) == pytest.approx(0.9990234375)


def test_controller_params_validation():
    with pytest.raises(ValueError):
        ControllerParams(-1.0, 10, 0.1, 0.02)
    with pytest.raises(ValueError):
        ControllerParams(1.0, 10, 0.1, 0.0)


def test_decision_record_columns():
    u, costs = decide_from_detection(0.999, SLEEPING, ENERGY, PARAMS)
    rec = controller.decision_record(0.3, SLEEPING, costs, u)
    assert len(rec) == len(controller.DECISION_LOG_COLUMNS)
    assert rec[2] == 0.999 and rec[3] == pytest.approx(-1.0) and rec[5] == 1
